"""Test package; makes shared fixture helpers importable as tests.conftest."""

"""Unit tests for the curda library."""

"""Test suite for fvcs."""

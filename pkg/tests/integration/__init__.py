"""Integration tests for mera-kit."""

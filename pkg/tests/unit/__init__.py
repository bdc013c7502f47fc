"""Unit tests for mera-kit."""

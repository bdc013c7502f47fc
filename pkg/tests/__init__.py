"""Tests for mera-kit."""

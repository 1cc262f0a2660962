"""Tests for ia-utils."""

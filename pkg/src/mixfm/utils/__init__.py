"""Utility functions for mixfm."""

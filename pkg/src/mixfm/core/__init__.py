"""Core computation for mixfm."""

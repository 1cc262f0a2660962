"""CLI subcommands for mixfm."""

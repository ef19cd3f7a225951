"""Integration tests over the reference catalogue and command line."""

"""Unit tests for dofusion modules."""

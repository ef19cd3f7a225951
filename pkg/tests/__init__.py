"""dofusion test suite."""

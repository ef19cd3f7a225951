"""dofusion - symbolic causal identification across heterogeneous data sources."""

__version__ = "0.1.0"

"""Max-product message passing for binary AND/OR/POOL factor graphs and the
hierarchical compositional network built on top of it."""

__version__ = "0.1.0"

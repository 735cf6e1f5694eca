"""Similarity embedding: projections learned by matching pairwise similarities to a target."""

__version__ = "0.1.0"

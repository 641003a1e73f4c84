"""Exact group arithmetic, wreath embeddings, block actions and cork-twist ledgers."""

__version__ = "0.1.0"

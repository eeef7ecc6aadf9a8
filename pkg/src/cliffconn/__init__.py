"""Matrix representations of Clifford algebras, their G-structures and planar connections."""

__version__ = "0.1.0"

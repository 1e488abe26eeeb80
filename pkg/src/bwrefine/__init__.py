"""Refinement-based 2-approximation of branchwidth and rankwidth."""
__version__ = "0.1.0"

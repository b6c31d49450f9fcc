"""Sequential grouped search for multi-objective discrete design problems."""

__version__ = "0.1.0"

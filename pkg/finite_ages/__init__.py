"""finite-ages: finite relational structures, their ages and ideals."""

__version__ = "0.1.0"

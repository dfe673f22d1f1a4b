"""Numerics for billiards on lemon tables: maps, period-six orbits, manifolds."""
from .errors import DomainError, LemonError
from .geometry import AngularState, Arc, LineState, Table

__version__ = "0.1.0"

__all__ = ["AngularState", "Arc", "DomainError", "LemonError", "LineState", "Table"]

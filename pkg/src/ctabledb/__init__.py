"""Database engine for incomplete information stored as conditional tables."""

from .condition import FALSE, TRUE, GlobalCondition
from .ctable import CTable, CTuple, Relation, Schema
from .engine import Database, Engine

__version__ = "0.1.0"

__all__ = [
    "TRUE",
    "FALSE",
    "GlobalCondition",
    "CTable",
    "CTuple",
    "Relation",
    "Schema",
    "Database",
    "Engine",
]

"""Moves on directed multigraphs, their (D, B) pairs, canonical form and pointed K0."""

from .canonical import Certificate, canonicalize, check_canonical, verify_certificate
from .core import DBPair, Graph, components, from_db, to_db
from .extnat import INF
from .ktheory import pointed_iso, pointed_k0, snf
from .moves import Move, MoveScript, apply_script

__all__ = [
    "INF",
    "Certificate",
    "DBPair",
    "Graph",
    "Move",
    "MoveScript",
    "apply_script",
    "canonicalize",
    "check_canonical",
    "components",
    "from_db",
    "pointed_iso",
    "pointed_k0",
    "snf",
    "to_db",
    "verify_certificate",
]

"""OTOC engines and instanton analysis for barrier systems (atomic units)."""

from . import potentials
from . import ringpolymer
from . import stability
from . import instanton
from . import constrained
from . import matsubara
from . import qdvr
from . import scatter

__version__ = "0.1.0"

__all__ = [
    "potentials",
    "ringpolymer",
    "stability",
    "instanton",
    "constrained",
    "matsubara",
    "qdvr",
    "scatter",
]

"""Lattice packings from lifts of module codes over orders in division algebras."""

__version__ = "0.1.0"

from .algebra import AlgebraElement, OrderSpec, PositiveElement, build_invariant_form  # noqa: E402
from .catalog import FamilySpec, build  # noqa: E402

__all__ = ["AlgebraElement", "OrderSpec", "PositiveElement", "build_invariant_form",
           "FamilySpec", "build", "__version__"]

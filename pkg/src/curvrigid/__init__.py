"""Pointwise checks of Clifford, curvature-operator and submersion identities."""

from .clifford import CliffordAlgebra, CliffordElement, clifford_algebra
from .curvature import CurvatureOperator, fubini_study, product, sphere
from .exterior import Bivector, wedge
from .holonomy import classify, generate_lie_algebra
from .numerics import Tolerance
from .submersion import SubmersionPoint, hopf_fixture, product_fixture

__version__ = "0.1.0"

__all__ = [
    "Bivector", "CliffordAlgebra", "CliffordElement", "CurvatureOperator", "SubmersionPoint",
    "Tolerance", "classify", "clifford_algebra", "fubini_study", "generate_lie_algebra",
    "hopf_fixture", "product", "product_fixture", "sphere", "wedge",
]

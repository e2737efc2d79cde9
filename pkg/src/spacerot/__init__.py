"""Time-dependent frame rotations, the spacetime intervals they induce,
stable surfaces of averaged metrics, wave-equation residual checks and
Bessel-zero size quantification."""

from .errors import SpaceRotError
from .exprparse import parse_expr
from .rotation import Axis, AsrSpec, Leaf, Product, Sum, asr, eval_expr

__version__ = "0.1.0"

__all__ = ["Axis", "AsrSpec", "Leaf", "Product", "Sum", "SpaceRotError", "asr", "eval_expr",
           "parse_expr", "__version__"]

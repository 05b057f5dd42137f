"""Phase engineering for constructive interference at a receiver.

Built-in families are linear in three basis functions of ``(k1, k2)``::

    phi_lm = 2 pi (a_lm k1 + b_lm k2 + c_lm sqrt(k1^2 + (k2 + shift)^2))

with integer coefficients depending on the element index ``(l, m)``:

==========  ============  ========  ========  =====
family      a             b         c         shift
==========  ============  ========  ========  =====
A           m + l         l         0         0
B           m + l         0         l - m     4
C           m             l         l         0
OPTIMAL     0             0         0         0
==========  ============  ========  ========  =====

Custom families take any ``f(l, m, k1, k2)`` or an expression string.
"""

from __future__ import annotations

import ast
import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InconsistencyError, ValidationError
from .fieldcore import COINCIDENCE_TOL, VACUUM, ArrayConfig, as_vec3, DegenerateGeometryError
from .geometry import IndexedArray

TWO_PI = 2.0 * np.pi
FULL_FRACTION = 0.99
AF_SLACK = 1e-9


class FamilyId(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    OPTIMAL = "OPTIMAL"
    CUSTOM = "CUSTOM"


_LINEAR = {
    FamilyId.A: (lambda l, m: (m + l, l, 0 * l), 0.0),
    FamilyId.B: (lambda l, m: (m + l, 0 * l, l - m), 4.0),
    FamilyId.C: (lambda l, m: (m, l, l), 0.0),
    FamilyId.OPTIMAL: (lambda l, m: (0 * l, 0 * l, 0 * l), 0.0),
}

_EXPR_NAMES = {
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "floor": np.floor,
    "pi": np.pi,
}
_EXPR_VARS = {"l", "m", "k1", "k2"}
_EXPR_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.FloorDiv, ast.USub, ast.UAdd,
)


def _compile_expression(expr: str) -> Callable:
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse phase expression {expr!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise ValidationError(f"phase expression uses unsupported syntax: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _EXPR_NAMES and node.id not in _EXPR_VARS:
            raise ValidationError(f"phase expression uses unknown name {node.id!r}")
        if isinstance(node, ast.Call) and not isinstance(node.func, ast.Name):
            raise ValidationError("phase expression may only call plain functions")
    code = compile(tree, "<phase expression>", "eval")

    def formula(l, m, k1, k2):
        return eval(code, {"__builtins__": {}, **_EXPR_NAMES}, {"l": l, "m": m, "k1": k1, "k2": k2})

    return formula


@dataclass(frozen=True)
class PhaseFamily:
    """A named phase function ``(l, m, k1, k2) -> radians``.

    Custom expressions are plain arithmetic in ``l, m, k1, k2`` with
    ``sqrt, sin, cos, tan, exp, log, abs, floor`` and ``pi``, and return
    radians directly (no implicit ``2 pi`` factor).
    """

    family_id: FamilyId
    formula: Callable | None = None
    expression: str | None = None

    def __post_init__(self):
        if self.family_id is FamilyId.CUSTOM and self.formula is None:
            if self.expression is None:
                raise ValidationError("custom family needs a formula or an expression")
            object.__setattr__(self, "formula", _compile_expression(self.expression))

    @classmethod
    def named(cls, name: str) -> PhaseFamily:
        try:
            return cls(FamilyId(name.upper()))
        except ValueError:
            raise ValidationError(f"unknown phase family {name!r}") from None

    @classmethod
    def custom(cls, formula: Callable | str) -> PhaseFamily:
        if isinstance(formula, str):
            return cls(FamilyId.CUSTOM, expression=formula)
        return cls(FamilyId.CUSTOM, formula=formula)

    @property
    def name(self) -> str:
        return self.family_id.value

    @property
    def is_linear(self) -> bool:
        return self.family_id in _LINEAR

    def coefficients(self, l, m):
        """(a, b, c, shift) for a built-in family; ``l`` and ``m`` may be arrays."""
        if not self.is_linear:
            raise ValidationError("custom families have no linear coefficients")
        coef, shift = _LINEAR[self.family_id]
        a, b, c = (np.asarray(v, dtype=float) for v in coef(np.asarray(l), np.asarray(m)))
        return a, b, c, shift


FAMILY_A = PhaseFamily(FamilyId.A)
FAMILY_B = PhaseFamily(FamilyId.B)
FAMILY_C = PhaseFamily(FamilyId.C)
OPTIMAL = PhaseFamily(FamilyId.OPTIMAL)


def family_phase(family: PhaseFamily, l, m, k1, k2):
    """Family phase before propagation compensation; broadcasts over arrays."""
    if family.is_linear:
        a, b, c, shift = family.coefficients(l, m)
        root = np.sqrt(k1 * k1 + (k2 + shift) * (k2 + shift))
        out = TWO_PI * (a * k1 + b * k2 + c * root)
    else:
        out = family.formula(l, m, k1, k2)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _distances(positions, x) -> np.ndarray:
    x = as_vec3(x, "x")
    d = np.linalg.norm(x - np.asarray(positions, dtype=float).reshape(-1, 3), axis=1)
    if d.min() < COINCIDENCE_TOL:
        raise DegenerateGeometryError(f"receiver coincides with element {int(d.argmin())}")
    return d


def optimal_phases(positions, x, omega: float, c: float = VACUUM.c) -> np.ndarray:
    """Phases that cancel each element's propagation delay to ``x``."""
    return -(omega / c) * _distances(positions, x)


def custom_phase_table(family: PhaseFamily, l, m, k1, k2) -> np.ndarray:
    """Evaluate a custom family on every (k1, k2) pair and element.

    ``k1``, ``k2`` are 1-D grids and ``l``, ``m`` flat index arrays; the result
    has shape ``(len(k1), len(k2), len(l))``. Non-broadcasting callables are
    evaluated point by point.
    """
    K1 = np.asarray(k1, dtype=float)[:, None, None]
    K2 = np.asarray(k2, dtype=float)[None, :, None]
    L = np.asarray(l)[None, None, :]
    M = np.asarray(m)[None, None, :]
    shape = (K1.shape[0], K2.shape[1], L.shape[2])
    with np.errstate(all="ignore"):  # non-finite results are rejected below
        try:
            out = np.broadcast_to(np.asarray(family.formula(L, M, K1, K2), dtype=float), shape)
        except (TypeError, ValueError):
            f = np.vectorize(lambda *a: float(family.formula(*a)), otypes=[float])
            out = f(L, M, K1, K2)
    if not np.all(np.isfinite(out)):
        raise ValidationError("phase family produced non-finite values")
    return np.array(out)


def assign_family_phases(
    array: IndexedArray,
    family: PhaseFamily,
    k1: float,
    k2: float,
    x,
    omega: float,
    c: float = VACUUM.c,
    compensation: bool = True,
) -> np.ndarray:
    """Flat row-major element phases ``family_phase - (omega/c)|x - y_lm|``."""
    ll, mm = array.indices
    base = family_phase(family, ll, mm, float(k1), float(k2))
    base = np.broadcast_to(np.asarray(base, dtype=float), ll.shape)
    if not compensation:
        _distances(array.flat_positions, x)
        return np.array(base)
    return base + optimal_phases(array.flat_positions, x, omega, c)


def family_config(
    array: IndexedArray,
    family: PhaseFamily,
    k1: float,
    k2: float,
    x,
    omega: float,
    compensation: bool = True,
    **config_kwargs,
) -> ArrayConfig:
    """ArrayConfig with phases assigned from ``family`` at ``(k1, k2)``."""
    medium = config_kwargs.get("medium", VACUUM)
    phases = assign_family_phases(array, family, k1, k2, x, omega, medium.c, compensation)
    return ArrayConfig(array.flat_positions, phases, omega=omega, **config_kwargs)


def predicted_partial_af(counts: tuple[int, int], f_m_values: Sequence[float]) -> float:
    """``L^2 |sum_m exp(i v_m)|^2`` for the partially coherent regime.

    ``f_m_values[m]`` is the total phase of column ``m``, i.e. ``m * f_m``
    evaluated at the sweep point; all rows are assumed mutually in phase.
    """
    L, M = counts
    v = np.asarray(f_m_values, dtype=float)
    if L < 1:
        raise ValidationError("L must be >= 1")
    if v.ndim != 1 or v.size != M:
        raise ValidationError(f"expected {M} column phases, got {v.size}")
    s = np.exp(1j * v).sum()
    return float(L * L * (s.real**2 + s.imag**2))


class Regime(enum.Enum):
    FULL = "FULL"
    PARTIAL = "PARTIAL"
    DESTRUCTIVE = "DESTRUCTIVE"


@dataclass(frozen=True)
class InterferenceReport:
    regime: Regime
    array_factor_value: float
    n_total: int

    @property
    def coherent_bound(self) -> float:
        return float(self.n_total**2)

    @property
    def incoherent_level(self) -> float:
        return float(self.n_total)


def classify_interference(af: float, n_total: int) -> InterferenceReport:
    """FULL at >= 99% of N^2, DESTRUCTIVE at or below the random-phase level N."""
    if n_total < 1:
        raise ValidationError("n_total must be >= 1")
    bound = float(n_total) ** 2
    if not (0.0 <= af <= bound * (1 + AF_SLACK)):
        raise InconsistencyError(f"array factor {af!r} outside [0, {bound:g}]")
    if af >= FULL_FRACTION * bound:
        regime = Regime.FULL
    elif af <= n_total:
        regime = Regime.DESTRUCTIVE
    else:
        regime = Regime.PARTIAL
    return InterferenceReport(regime, float(af), int(n_total))

"""Processing functions T, their normalization to sup T = 1, and the weight G.

Each measurement magnitude y is transformed by a scalar map T before the data
matrix A^H diag(T(y_i)) A is formed. All shipped kinds are expressed in the
variable s = delta * y^2, which has an Exp(1) law under the model; kinds whose
value depends on delta only through s carry delta_free=True.

Normalization: an affine remap T -> (C + T) / (C + T_max) with C chosen so
the normalized sup is 1. Because A has orthonormal columns this remap shifts
and scales the spectrum of the data matrix without touching its eigenvectors,
so it loses nothing. For every built-in kind the raw sup is positive and known
analytically, hence C = 0 and plain division applies; the general rule
(C = max(0, -T_max) + 1 when T_max <= 0) is implemented for custom maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, SingularityError

__all__ = [
    "ProcessingFunction",
    "make_function",
    "normalize",
    "eval_T",
    "eval_G",
    "t_range",
    "TRIM_C2_DEFAULT",
    "SUBSET_C1_DEFAULT",
    "STAR_KAPPA_DEFAULT",
    "SINGULARITY_EPS",
]

TRIM_C2_DEFAULT = 2.0
SUBSET_C1_DEFAULT = 1.5
STAR_KAPPA_DEFAULT = 0.01

SINGULARITY_EPS = 1e-14  # |1/mu - T| below this is treated as a pole

_KINDS = ("trim", "subset", "mm", "star", "star_regularized", "alt_weak", "shifted_mm", "custom")

# knobs each kind accepts at construction; delta is never one of them, it
# binds at evaluation time
_PARAM_KEYS = {
    "trim": {"c2"},
    "subset": {"c1"},
    "mm": set(),
    "star": set(),
    "star_regularized": {"kappa"},
    "alt_weak": set(),
    "shifted_mm": set(),
    "custom": {"s", "t"},
}

_KIND_ALIASES = {
    "starregularized": "star_regularized",
    "starreg": "star_regularized",
    "altweak": "alt_weak",
    "shiftedmm": "shifted_mm",
}


def canonical_kind(kind: str) -> str:
    k = kind.strip().lower().replace("-", "_")
    k = _KIND_ALIASES.get(k.replace("_", ""), k)
    if k not in _KINDS:
        raise InvalidParameterError(f"unknown processing kind {kind!r}; choose from {_KINDS}")
    return k


def _sqrt_delta(delta):
    if delta <= 1.0:
        raise InvalidParameterError(f"delta must exceed 1, got {delta}")
    return math.sqrt(delta)


@dataclass(frozen=True)
class TRange:
    t_min: float
    t_max: float
    bounded_below: bool


@dataclass(frozen=True)
class ProcessingFunction:
    """A processing map with its normalization metadata.

    params holds the kind's scalar knobs (thresholds, regularizer) or, for
    kind="custom", the interpolation table. delta-dependent kinds (mm,
    alt_weak, shifted_mm) resolve their normalization per call from the delta
    argument; query it with `normalization(delta)`.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        p = dict(self.params)
        allowed = _PARAM_KEYS[self.kind]
        extra = set(p) - allowed
        if extra:
            raise InvalidParameterError(
                f"{self.kind} takes no parameter {sorted(extra)}; allowed: {sorted(allowed) or 'none'}"
            )
        if self.kind == "trim":
            p.setdefault("c2", TRIM_C2_DEFAULT)
            if p["c2"] <= 0:
                raise InvalidParameterError("trim threshold c2 must be positive")
        elif self.kind == "subset":
            p.setdefault("c1", SUBSET_C1_DEFAULT)
            if p["c1"] <= 0:
                raise InvalidParameterError("subset threshold c1 must be positive")
        elif self.kind == "star_regularized":
            p.setdefault("kappa", STAR_KAPPA_DEFAULT)
            if p["kappa"] <= 0:
                raise InvalidParameterError("regularizer kappa must be positive")
        elif self.kind == "custom":
            s_pts = np.asarray(p.get("s", ()), dtype=float)
            t_pts = np.asarray(p.get("t", ()), dtype=float)
            if s_pts.size < 2 or s_pts.shape != t_pts.shape:
                raise InvalidParameterError("custom table needs matching s/t arrays, length >= 2")
            if np.any(np.diff(s_pts) <= 0):
                raise InvalidParameterError("custom table s values must be strictly increasing")
            if not (np.all(np.isfinite(s_pts)) and np.all(np.isfinite(t_pts))):
                raise InvalidParameterError("custom table must be finite")
            p = {"s": tuple(s_pts.tolist()), "t": tuple(t_pts.tolist())}
        object.__setattr__(self, "params", p)

    # -- raw values ---------------------------------------------------------

    def raw_of_s(self, s, delta=None):
        """Pre-normalization T as a function of s = delta*y^2 (vectorized)."""
        s = np.asarray(s, dtype=float)
        k = self.kind
        if k == "trim":
            c2sq = self.params["c2"] ** 2
            return s * (s < c2sq)
        if k == "subset":
            return (s > self.params["c1"]).astype(float)
        if k == "mm":
            rd = _sqrt_delta(delta)
            return 1.0 - rd / (s + rd - 1.0)
        if k == "star":
            return 1.0 - 1.0 / np.maximum(s, 1e-300)
        if k == "star_regularized":
            return 1.0 - 1.0 / (s + self.params["kappa"])
        if k == "alt_weak":
            # below delta=2 the printed map is unbounded above; the embedded
            # shift is clamped at 0 so the kind degenerates continuously to
            # the plain inverse-square map, which is the delta=2 member
            if delta is None or delta <= 1.0:
                raise InvalidParameterError("alt_weak needs delta > 1")
            shift = max(delta - 2.0, 0.0)
            return 1.0 - 1.0 / np.maximum(s + shift, 1e-300)
        if k == "shifted_mm":
            rd = _sqrt_delta(delta)
            return 3.0 - (1.0 - rd / (s + rd - 1.0))
        # custom: linear interpolation, constant beyond the table
        return np.interp(s, self.params["s"], self.params["t"])

    def _sup_raw(self, delta=None) -> float:
        k = self.kind
        if k == "trim":
            return self.params["c2"] ** 2  # approached as s -> c2^2 from below
        if k in ("subset", "mm", "star", "star_regularized", "alt_weak"):
            return 1.0
        if k == "shifted_mm":
            rd = _sqrt_delta(delta)
            return 2.0 + rd / (rd - 1.0)  # attained at s = 0
        return float(np.max(self.params["t"]))

    def _inf_raw(self, delta=None) -> float:
        k = self.kind
        if k in ("trim", "subset"):
            return 0.0
        if k == "mm":
            rd = _sqrt_delta(delta)
            return 1.0 - rd / (rd - 1.0)  # at s = 0
        if k == "star":
            return -np.inf
        if k == "star_regularized":
            return 1.0 - 1.0 / self.params["kappa"]
        if k == "alt_weak":
            shift = max(delta - 2.0, 0.0)
            return 1.0 - 1.0 / shift if shift > 0 else -np.inf
        if k == "shifted_mm":
            return 2.0  # s -> inf limit, not attained
        return float(np.min(self.params["t"]))

    def normalization(self, delta=None):
        """The (C, T_max_raw) pair of the affine normalization map."""
        t_max = self._sup_raw(delta)
        c = max(0.0, -t_max) + 1.0 if t_max <= 0 else 0.0
        return c, t_max

    # -- normalized values --------------------------------------------------

    def t_of_s(self, s, delta=None):
        """Normalized T (sup = 1) as a function of s = delta*y^2."""
        c, t_max = self.normalization(delta)
        return (c + self.raw_of_s(s, delta)) / (c + t_max)

    @property
    def delta_free(self) -> bool:
        return self.kind not in ("mm", "alt_weak", "shifted_mm")

    def jumps(self, delta=None):
        """Discontinuity locations in s, for quadrature splitting."""
        if self.kind == "trim":
            return (self.params["c2"] ** 2,)
        if self.kind == "subset":
            return (self.params["c1"],)
        return ()

    def t_range(self, delta=None) -> TRange:
        c, t_max = self.normalization(delta)
        inf_raw = self._inf_raw(delta)
        t_min = (c + inf_raw) / (c + t_max) if np.isfinite(inf_raw) else -np.inf
        return TRange(t_min=float(t_min), t_max=1.0, bounded_below=bool(np.isfinite(inf_raw)))

    def label(self) -> str:
        k = self.kind
        if k == "trim":
            return f"trim(c2={self.params['c2']:g})"
        if k == "subset":
            return f"subset(c1={self.params['c1']:g})"
        if k == "star_regularized":
            return f"star_regularized(kappa={self.params['kappa']:g})"
        return k


def make_function(kind: str, **params) -> ProcessingFunction:
    """Factory with defaults: make_function("trim"), make_function("subset", c1=2.0), ..."""
    return ProcessingFunction(kind=kind, params=params)


def normalize(raw, probe_grid=None) -> ProcessingFunction:
    """Normalize a raw scalar map into a custom ProcessingFunction.

    `raw` is a callable s -> T(s) or an (s, t) table pair. The sup is taken
    over the probe grid (default: logarithmic, s in [1e-8, 1e8]); the affine
    rule (C + T)/(C + T_max) with C = max(0, -T_max) + 1 for nonpositive sup
    is recorded in the result's table. A raw map still growing at the right
    end of the grid is rejected as unbounded.
    """
    if probe_grid is None:
        probe_grid = np.logspace(-8, 8, 4097)
    grid = np.asarray(probe_grid, dtype=float)
    if callable(raw):
        vals = np.asarray(raw(grid), dtype=float)
    else:
        s_pts, t_pts = raw
        grid = np.asarray(s_pts, dtype=float)
        vals = np.asarray(t_pts, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidParameterError("raw T is not finite on the probe grid")
    t_max = float(np.max(vals))
    if callable(raw):
        tail = float(raw(np.asarray([10.0 * grid[-1]]))[0] if np.ndim(raw(grid[-1:])) else raw(10.0 * grid[-1]))
        if tail > t_max + 1e-9:
            raise InvalidParameterError("raw T appears unbounded above (still growing past the probe grid)")
    c = max(0.0, -t_max) + 1.0 if t_max <= 0 else 0.0
    normalized = (c + vals) / (c + t_max)
    return make_function("custom", s=tuple(grid.tolist()), t=tuple(normalized.tolist()))


def eval_T(func: ProcessingFunction, y, delta):
    """Normalized T at magnitude(s) y, i.e. t_of_s(delta * y^2)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise InvalidParameterError("magnitudes y must be nonnegative")
    return func.t_of_s(delta * y**2, delta)


def g_from_t(t_values, nu, mu=None, context=""):
    """Resolvent weights 1/(nu - T) with a pole guard, nu = 1/mu."""
    t_values = np.asarray(t_values, dtype=float)
    denom = nu - t_values
    bad = np.abs(denom) <= SINGULARITY_EPS
    if np.any(bad):
        raise SingularityError(
            f"G evaluation within {SINGULARITY_EPS} of its pole{(' in ' + context) if context else ''}",
            mu=mu if mu is not None else (1.0 / nu if nu != 0 else None),
            where=np.flatnonzero(bad)[:16],
        )
    return 1.0 / denom


def eval_G(func: ProcessingFunction, y, mu: float, delta: float):
    """G(y, mu) = 1 / (1/mu - T(y)) on the normalized T."""
    if mu == 0:
        raise InvalidParameterError("mu must be nonzero")
    return g_from_t(eval_T(func, y, delta), 1.0 / mu, mu=mu)


def t_range(func: ProcessingFunction, delta=None) -> TRange:
    return func.t_range(delta)

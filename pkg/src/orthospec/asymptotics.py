"""Large-system asymptotics for the spectral initializer.

Everything here lives in the scalar variable s = delta * |<row, signal>|^2,
which is Exp(1)-distributed in the orthogonal-column model. The three
functionals of the resolvent weight g(s) = 1 / (1/mu - T(s)),

    psi1 = E[s g] / E[g]
    psi2 = E[g^2] / E[g]^2
    psi3 = sqrt(E[s g^2]) / E[g]

drive all predictions: the bulk-edge location mu_bar solves psi2 = kappa,
the outlier location mu_hat solves psi1 = kappa with kappa = delta/(delta-1),
and the squared overlap between the top eigenvector and the signal is

    rho^2 = (kappa^2 - kappa psi2) / (psi3^2 - kappa psi2)   at mu_hat.

The same machinery runs on the extended branch 1/mu < min T (only for maps
bounded below), which locates an outlier below the bulk instead of above it.

Expectations are Gauss-Laguerre quadrature; maps with jump discontinuities
get the domain split at each jump, with Gauss-Legendre panels on the finite
pieces and a shifted Laguerre rule on the tail. A Monte Carlo fallback is
provided mainly as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import DegeneratePredictionError, InvalidParameterError
from .preprocessing import ProcessingFunction, g_from_t

__all__ = [
    "QuadratureSpec",
    "PsiTriple",
    "MuBarResult",
    "MuHatResult",
    "AsymptoticPrediction",
    "DeltaThreshold",
    "exp_expectation",
    "exp_expectation_mc",
    "psi",
    "psi_nu",
    "lambda_of_mu",
    "f_of_mu",
    "mu_bar",
    "mu_hat",
    "predict",
    "star_optimal",
    "rho_star_curve",
    "delta_threshold",
    "MU_ONE",
]

MU_ONE = 1.0 - 1e-12  # stand-in for the mu = 1 endpoint; dodges poles of maps attaining their sup
BOUNDARY_TOL = 1e-9  # slack when deciding whether psi1(mu_bar) reaches kappa
_BRENTQ_XTOL = 1e-13


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the Exp(1) expectations."""

    laguerre_nodes: int = 400
    segment_nodes: int = 200


_DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=8)
def _laguerre_rule(n: int):
    # Golub-Welsch on the Laguerre Jacobi matrix. The scipy.special route
    # overflows internally for n this large; the tridiagonal eigensolve is
    # stable and matches the asymptotic weight formulas to machine precision.
    k = np.arange(n, dtype=float)
    nodes, vecs = eigh_tridiagonal(2.0 * k + 1.0, k[1:])
    weights = vecs[0] ** 2  # total mass of e^{-s} ds is 1
    return nodes, weights


@lru_cache(maxsize=8)
def _legendre_rule(n: int):
    return np.polynomial.legendre.leggauss(n)


def exp_expectation(fn, jumps=(), quad: QuadratureSpec | None = None):
    """E[fn(s)] for s ~ Exp(1); fn may return a stack of integrands (..., len(s)).

    jumps lists interior points where fn (through T) is discontinuous; the
    integral is split there so each panel sees a smooth integrand.
    """
    quad = quad or _DEFAULT_QUAD
    points = sorted(j for j in jumps if np.isfinite(j) and j > 0)
    if not points:
        nodes, w = _laguerre_rule(quad.laguerre_nodes)
        return np.sum(w * np.asarray(fn(nodes)), axis=-1)
    xs, ws = _legendre_rule(quad.segment_nodes)
    total = 0.0
    a = 0.0
    for b in points:
        if b <= a:
            continue
        half = 0.5 * (b - a)
        s = 0.5 * (a + b) + half * xs
        total = total + half * np.sum(ws * np.exp(-s) * np.asarray(fn(s)), axis=-1)
        a = b
    nodes, w = _laguerre_rule(quad.laguerre_nodes)
    total = total + math.exp(-a) * np.sum(w * np.asarray(fn(a + nodes)), axis=-1)
    return total


def exp_expectation_mc(fn, rng, n_samples: int = 10**6):
    """Monte Carlo E[fn(s)], s ~ Exp(1). Returns (mean, standard_error)."""
    s = rng.exponential(size=n_samples)
    vals = np.asarray(fn(s), dtype=float)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n_samples))


@dataclass(frozen=True)
class PsiTriple:
    mu: float
    nu: float
    psi1: float
    psi2: float
    psi3: float
    e_g: float
    e_sg: float
    e_g2: float
    e_sg2: float


def psi_nu(func: ProcessingFunction, nu: float, delta: float, quad: QuadratureSpec | None = None) -> PsiTriple:
    """The psi functionals parametrized by nu = 1/mu directly.

    Convenient on the extended branch, where nu crosses zero and mu = 1/nu
    would pass through infinity.
    """

    def moments(s):
        g = g_from_t(func.t_of_s(s, delta), nu, context="psi moments")
        return np.stack([g, s * g, g * g, s * g * g])

    e_g, e_sg, e_g2, e_sg2 = exp_expectation(moments, func.jumps(delta), quad)
    if e_g == 0.0:
        raise DegeneratePredictionError(f"E[g] vanished at nu={nu}")
    return PsiTriple(
        mu=1.0 / nu if nu != 0 else math.inf,
        nu=nu,
        psi1=e_sg / e_g,
        psi2=e_g2 / e_g**2,
        psi3=math.sqrt(max(e_sg2, 0.0)) / e_g,
        e_g=e_g,
        e_sg=e_sg,
        e_g2=e_g2,
        e_sg2=e_sg2,
    )


def _check_branch(func: ProcessingFunction, nu: float, delta: float):
    if nu >= 1.0:
        return
    tr = func.t_range(delta)
    if tr.bounded_below and nu < tr.t_min:
        return
    raise InvalidParameterError(
        f"1/mu = {nu:g} lies inside the closed range of the normalized map "
        f"[{tr.t_min:g}, 1]; no resolvent branch is defined there"
    )


def psi(func: ProcessingFunction, mu: float, delta: float, quad: QuadratureSpec | None = None) -> PsiTriple:
    if mu == 0:
        raise InvalidParameterError("mu must be nonzero")
    nu = 1.0 / mu
    _check_branch(func, nu, delta)
    return psi_nu(func, nu, delta, quad)


def lambda_of_mu(func: ProcessingFunction, mu: float, delta: float, quad: QuadratureSpec | None = None) -> float:
    """Predicted eigenvalue location 1/mu - ((delta-1)/delta) / E[g]."""
    p = psi(func, mu, delta, quad)
    return p.nu - ((delta - 1.0) / delta) / p.e_g


def f_of_mu(func: ProcessingFunction, mu: float, delta: float, quad: QuadratureSpec | None = None) -> float:
    """Companion location map 1/mu - 1/E[s g]; agrees with lambda_of_mu at mu_hat."""
    p = psi(func, mu, delta, quad)
    if p.e_sg == 0.0:
        raise DegeneratePredictionError(f"E[s g] vanished at mu={mu}")
    return p.nu - 1.0 / p.e_sg


@dataclass(frozen=True)
class MuBarResult:
    mu: float
    interior: bool  # True when psi2 = kappa pins mu_bar strictly inside (0, 1)


def mu_bar(func: ProcessingFunction, delta: float, quad: QuadratureSpec | None = None) -> MuBarResult:
    """Bulk-edge parameter: the root of psi2 = delta/(delta-1) in (0, 1), else the endpoint 1."""
    kappa = delta / (delta - 1.0)

    def h(mu):
        return psi(func, mu, delta, quad).psi2 - kappa

    h_hi = h(MU_ONE)
    if h_hi <= 0.0:
        return MuBarResult(mu=1.0, interior=False)
    lo = 1e-6
    while h(lo) >= 0.0 and lo > 1e-12:
        lo *= 1e-2
    root = brentq(h, lo, MU_ONE, xtol=_BRENTQ_XTOL)
    return MuBarResult(mu=float(root), interior=True)


@dataclass(frozen=True)
class MuHatResult:
    mu: Optional[float]
    nu: Optional[float]
    found: bool
    at_boundary: bool  # psi1 reached kappa only at the top of the search interval
    mu_bar: float
    mu_bar_interior: bool  # whether mu_bar came from psi2 = kappa rather than the endpoint 1
    branch: str  # "max" or "min"


def mu_hat(
    func: ProcessingFunction,
    delta: float,
    branch: str = "max",
    quad: QuadratureSpec | None = None,
) -> MuHatResult:
    """Outlier parameter: root of psi1 = delta/(delta-1) on the requested branch.

    Max branch: mu in (0, mu_bar]; no root there means the phase is negative
    (found=False) and the top of the spectrum carries no signal. Min branch:
    solved in nu = 1/mu below the lower edge of the map's range; requires a
    map bounded below.
    """
    kappa = delta / (delta - 1.0)
    if branch == "max":
        mb = mu_bar(func, delta, quad)
        mu_top = min(mb.mu, MU_ONE)

        def h(mu):
            return psi(func, mu, delta, quad).psi1 - kappa

        h_top = h(mu_top)
        if h_top < -BOUNDARY_TOL:
            return MuHatResult(None, None, False, False, mb.mu, mb.interior, "max")
        if h_top <= BOUNDARY_TOL:
            return MuHatResult(mu_top, 1.0 / mu_top, True, True, mb.mu, mb.interior, "max")
        lo = 1e-8
        while h(lo) >= 0.0 and lo > 1e-12:
            lo *= 1e-2
        root = float(brentq(h, lo, mu_top, xtol=_BRENTQ_XTOL))
        return MuHatResult(root, 1.0 / root, True, False, mb.mu, mb.interior, "max")

    if branch != "min":
        raise InvalidParameterError(f"branch must be 'max' or 'min', got {branch!r}")

    tr = func.t_range(delta)
    if not tr.bounded_below:
        raise DegeneratePredictionError(
            f"extended branch needs a map bounded below; {func.label()} is not"
        )

    def h_nu(nu):
        return psi_nu(func, nu, delta, quad).psi1 - kappa

    # walk away from the lower edge until psi1 drops below kappa, then bracket
    offsets = np.geomspace(1e-9, 1e5, 90)
    prev_nu = None
    prev_h = None
    root = None
    for d in offsets:
        nu = tr.t_min - d
        val = h_nu(nu)
        if prev_h is not None and val * prev_h < 0.0:
            root = brentq(h_nu, nu, prev_nu, xtol=_BRENTQ_XTOL)
            break
        prev_nu, prev_h = nu, val
    if root is None:
        return MuHatResult(None, None, False, False, math.nan, False, "min")
    root = float(root)
    return MuHatResult(1.0 / root if root != 0 else math.inf, root, True, False, math.nan, False, "min")


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Phase, overlap, and eigenvalue location for one (map, delta) pair."""

    label: str
    delta: float
    branch: str
    positive_phase: bool
    at_boundary: bool
    mu_bar: float
    mu_hat: Optional[float]
    rho_sq: float
    theta_sq: float
    lambda1: float
    psi1: Optional[float] = None
    psi2: Optional[float] = None
    psi3: Optional[float] = None


def predict(
    func: ProcessingFunction,
    delta: float,
    branch: str = "max",
    quad: QuadratureSpec | None = None,
) -> AsymptoticPrediction:
    """Full prediction: squared overlap rho^2, auxiliary ratio theta^2, outlier location.

    Below threshold (max branch, psi1 never reaching kappa) the overlap is
    exactly 0 and lambda1 reports the bulk edge instead of an outlier.
    """
    kappa = delta / (delta - 1.0)
    mh = mu_hat(func, delta, branch, quad)
    if not mh.found:
        mb_eff = min(mh.mu_bar, MU_ONE) if np.isfinite(mh.mu_bar) else MU_ONE
        edge = lambda_of_mu(func, mb_eff, delta, quad)
        return AsymptoticPrediction(
            label=func.label(),
            delta=delta,
            branch=branch,
            positive_phase=False,
            at_boundary=False,
            mu_bar=mh.mu_bar,
            mu_hat=None,
            rho_sq=0.0,
            theta_sq=0.0,
            lambda1=edge,
        )
    p = psi_nu(func, mh.nu, delta, quad)
    denom_rho = p.psi3**2 - kappa * p.psi2
    denom_theta = p.psi3**2 - kappa**2
    # psi1 touching kappa exactly at an interior mu_bar is the threshold case
    # (psi2 = kappa there too, so the overlap vanishes); a root pinned at the
    # endpoint mu = 1 is a genuine solution and keeps the general formula
    threshold_case = mh.at_boundary and mh.mu_bar_interior
    if threshold_case:
        rho2, theta2 = 0.0, 0.0
    else:
        if abs(denom_rho) < 1e-300 or abs(denom_theta) < 1e-300:
            raise DegeneratePredictionError(
                f"overlap denominators vanished at mu_hat={mh.mu} ({func.label()}, delta={delta})"
            )
        rho2 = (kappa**2 - kappa * p.psi2) / denom_rho
        theta2 = (kappa - p.psi2) / denom_theta
        rho2 = min(max(rho2, 0.0), 1.0)
        theta2 = max(theta2, 0.0)
    lam = p.nu - ((delta - 1.0) / delta) / p.e_g
    return AsymptoticPrediction(
        label=func.label(),
        delta=delta,
        branch=branch,
        positive_phase=not threshold_case,
        at_boundary=mh.at_boundary,
        mu_bar=mh.mu_bar,
        mu_hat=mh.mu,
        rho_sq=float(rho2),
        theta_sq=float(theta2),
        lambda1=float(lam),
        psi1=p.psi1,
        psi2=p.psi2,
        psi3=p.psi3,
    )


def star_optimal(delta: float, quad: QuadratureSpec | None = None):
    """Overlap ceiling over all processing maps, in closed form.

    Zero at or below delta = 2; above it, (1 - mu) / (1 - mu/delta) with mu
    the outlier parameter of the inverse-one-over-s map. Returns
    (rho_sq, theta_sq, mu_hat or None).
    """
    if delta <= 2.0:
        return 0.0, 0.0, None
    from .preprocessing import make_function

    mh = mu_hat(make_function("star"), delta, "max", quad)
    if not mh.found:
        return 0.0, 0.0, None
    mu = mh.mu
    rho2 = (1.0 - mu) / (1.0 - mu / delta)
    theta2 = 1.0 / mu - 1.0
    return float(rho2), float(theta2), float(mu)


def rho_star_curve(deltas, quad: QuadratureSpec | None = None) -> np.ndarray:
    """star_optimal's rho^2 over a grid of deltas (vectorized convenience)."""
    return np.array([star_optimal(float(d), quad)[0] for d in np.asarray(deltas, dtype=float)])


@dataclass(frozen=True)
class DeltaThreshold:
    delta_T: float
    found: bool
    delta_T_fixed_point: Optional[float]  # second route, delta-free maps only
    mu_diamond: Optional[float]


def delta_threshold(
    func: ProcessingFunction,
    quad: QuadratureSpec | None = None,
    bracket=(1.02, 64.0),
    tol: float = 1e-4,
) -> DeltaThreshold:
    """Weak-recovery threshold in delta for one processing map.

    Primary route: bisection of the positive-phase indicator (does psi1 reach
    kappa on (0, mu_bar]?). For delta-free maps a second, independent route is
    computed: the crossing mu_diamond of psi1 = psi2 gives the threshold as
    psi1 / (psi1 - 1) there, with the endpoint mu = 1 taking over when the
    curves only meet there.
    """

    def positive(d):
        return mu_hat(func, d, "max", quad).found

    lo_b, hi_b = bracket
    grid = np.geomspace(lo_b, hi_b, 48)
    lo = None
    hi = None
    prev = grid[0]
    if positive(float(prev)):
        # already positive at the left edge of the bracket
        lo, hi = 1.0 + 1e-6, float(prev)
    else:
        for d in grid[1:]:
            if positive(float(d)):
                lo, hi = float(prev), float(d)
                break
            prev = d
    if hi is None:
        return DeltaThreshold(math.nan, False, None, None)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if positive(mid):
            hi = mid
        else:
            lo = mid
    delta_T = 0.5 * (lo + hi)

    fp = None
    mu_d = None
    if func.delta_free:
        # psi1 and psi2 are delta-independent here, so their crossing pins the
        # threshold without any search in delta
        mus = np.linspace(1e-4, MU_ONE, 300)
        # delta only enters psi through T for delta-bound maps; any value works
        d_probe = 2.0

        def gap(mu):
            p = psi(func, mu, d_probe, quad)
            return p.psi1 - p.psi2

        vals = np.array([gap(m) for m in mus])
        idx = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
        if idx.size:
            i = int(idx[-1])
            mu_d = float(brentq(gap, mus[i], mus[i + 1], xtol=_BRENTQ_XTOL))
        else:
            mu_d = 1.0
        p1 = psi(func, min(mu_d, MU_ONE), d_probe, quad).psi1
        if p1 > 1.0:
            fp = p1 / (p1 - 1.0)
    return DeltaThreshold(float(delta_T), True, fp, mu_d)

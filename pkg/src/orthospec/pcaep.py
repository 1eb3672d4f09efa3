"""Linear eigen-iteration in measurement space and its deterministic tracker.

The iteration z <- (delta*A A^H - I)(G/Gbar - I) z is a power method in
disguise: its fixed points are eigenvectors of the data matrix, and both
factors have zero normalized trace, which is what makes the scalar recursion
below exact in the large-system limit. The tracker runs the actual iteration
on one realized instance and, side by side, the two-dimensional recursion

    alpha'   = (delta-1) * alpha * (psi1 - 1)
    sigma^2' = (delta-1) * [|alpha|^2 (psi3^2 - psi1^2) + sigma^2 (psi2 - 1)]

for the signal coefficient and the noise energy, plus a recursion for the
correlation between successive noise vectors. With mu set to the outlier
solution, alpha is a fixed point and the iterate aligns with the leading
eigenvector without ever normalizing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import PsiTriple, mu_hat, psi
from .core import cosine_similarity_sq, make_rng, make_signal, sample_complex_gaussian
from .errors import DegeneratePredictionError, DegenerateStateError, InvalidParameterError
from .preprocessing import ProcessingFunction, eval_G
from .spectral import WeightDiagonal, apply_D, build_weights

__all__ = [
    "EPWeights",
    "EPState",
    "SEState",
    "TrackedRun",
    "FixedPointCheck",
    "build_ep_weights",
    "ep_init",
    "ep_step",
    "ep_extract_x",
    "se_step",
    "se_cosine",
    "noise_corr_step",
    "run_tracked",
    "fixed_point_check",
    "write_tracked_csv",
    "TRACKED_CSV_COLUMNS",
]


@dataclass(frozen=True)
class EPWeights:
    """Per-measurement weights G(y_i, mu) with their empirical mean."""

    g_values: np.ndarray
    g_bar: float
    mu: float


def build_ep_weights(func: ProcessingFunction, signal, mu: float, delta: float | None = None) -> EPWeights:
    d = signal.delta if delta is None else delta
    g = eval_G(func, signal.y, mu, d)
    return EPWeights(g_values=g, g_bar=float(np.mean(g)), mu=mu)


@dataclass(frozen=True)
class EPState:
    z: np.ndarray
    t: int
    mu: float
    g_bar: float


def ep_init(signal, weights: EPWeights, alpha0: complex, sigma0: float, rng) -> EPState:
    """Seeded start z0 = alpha0 * z_true + sigma0 * w0, w0 i.i.d. CN(0, 1/delta)."""
    if sigma0 < 0:
        raise InvalidParameterError("sigma0 must be nonnegative")
    m = signal.m
    w0 = sample_complex_gaussian(rng, m, variance=1.0 / signal.delta)
    z0 = alpha0 * signal.z_star + sigma0 * w0
    return EPState(z=z0, t=0, mu=weights.mu, g_bar=weights.g_bar)


def ep_step(op, state: EPState, weights: EPWeights) -> EPState:
    """One application of (delta*A A^H - I)(G/Gbar - I), matrix-free."""
    if weights.g_bar == 0.0:
        raise DegenerateStateError("mean weight Gbar is zero")
    p = (weights.g_values / weights.g_bar - 1.0) * state.z
    delta_r = op.m / op.n
    z_next = delta_r * op.apply(op.apply_adjoint(p)) - p
    return EPState(z=z_next, t=state.t + 1, mu=state.mu, g_bar=state.g_bar)


def ep_extract_x(op, state) -> np.ndarray:
    """Back-projection sqrt(n) * A^H z / ||A^H z||; state may be an EPState or a raw vector."""
    z = state.z if isinstance(state, EPState) else np.asarray(state)
    xz = op.apply_adjoint(z)
    norm = np.linalg.norm(xz)
    zn = np.linalg.norm(z)
    if norm == 0.0 or (zn > 0 and norm < 1e-12 * zn):
        raise DegenerateStateError("A^H z is (numerically) zero; z has no component in range(A)")
    return math.sqrt(op.n) / norm * xz


@dataclass(frozen=True)
class SEState:
    alpha: complex
    sigma_sq: float
    w_corr: float  # E[conj(W_t) W_{t+1}] per coordinate; 0 at t = 0
    t: int


def noise_corr_step(p: PsiTriple, delta: float, alpha_t: complex, alpha_t1: complex, prev: float) -> float:
    cross = float(np.real(np.conj(alpha_t) * alpha_t1)) / delta
    return (delta - 1.0) * (cross * (p.psi3**2 - p.psi1**2) + (p.psi2 - 1.0) * prev)


def se_step(p: PsiTriple, delta: float, state: SEState) -> SEState:
    alpha_next = (delta - 1.0) * state.alpha * (p.psi1 - 1.0)
    sigma_next = (delta - 1.0) * (
        abs(state.alpha) ** 2 * (p.psi3**2 - p.psi1**2) + state.sigma_sq * (p.psi2 - 1.0)
    )
    corr_next = noise_corr_step(p, delta, state.alpha, alpha_next, state.w_corr)
    return SEState(alpha=alpha_next, sigma_sq=max(sigma_next, 0.0), w_corr=corr_next, t=state.t + 1)


def se_cosine(state: SEState, delta: float) -> float:
    """Predicted squared overlap |alpha|^2 / (|alpha|^2 + (delta-1)/delta * sigma^2)."""
    a2 = abs(state.alpha) ** 2
    if a2 == 0.0 and state.sigma_sq == 0.0:
        raise DegenerateStateError("both alpha and sigma are zero")
    return a2 / (a2 + (delta - 1.0) / delta * state.sigma_sq)


@dataclass(frozen=True)
class TrackedRun:
    """Empirical and predicted series, index t = 0 .. t_max.

    wcorr entries at index t refer to the pair (w_t, w_{t+1}) and are NaN in
    the final row. Predictions depend only on (func, delta, mu, alpha0,
    sigma0), never on the seed.
    """

    t: np.ndarray
    alpha_emp: np.ndarray  # complex: <z_true, z_t> / ||z_true||^2
    alpha_se: np.ndarray
    sigma2_emp: np.ndarray  # ||z_t - alpha_emp_t z_true||^2 / ||z_true||^2
    sigma2_se: np.ndarray
    p2_emp: np.ndarray
    p2_se: np.ndarray
    wcorr_emp: np.ndarray
    wcorr_se: np.ndarray
    mu: float
    delta: float
    delta_realized: float
    func: str
    seed: int


def run_tracked(
    op_spec,
    func: ProcessingFunction,
    delta: float,
    mu_choice,
    alpha0: complex,
    sigma0_sq: float,
    t_max: int,
    seed: int,
) -> TrackedRun:
    """Run the iteration t_max steps and log empirical vs predicted statistics.

    mu_choice is "hat" (solve for the outlier parameter at this delta) or an
    explicit float. The empirical noise vector at step t is recovered through
    the empirical projection coefficient, w_t = z_t - alpha_emp_t * z_true.
    """
    if t_max < 1:
        raise InvalidParameterError("t_max must be at least 1")
    spec = op_spec.replace_seed(seed)
    op = spec.build()
    signal = make_signal(op, make_rng(seed, f"pcaep/signal/{spec.kind}/{spec.n}"))
    if mu_choice == "hat":
        mh = mu_hat(func, delta, "max")
        if not mh.found:
            raise DegeneratePredictionError(f"no outlier parameter at delta={delta} for {func.label()}")
        mu = mh.mu
    else:
        mu = float(mu_choice)
    weights = build_ep_weights(func, signal, mu)
    p = psi(func, mu, delta)

    state = ep_init(signal, weights, alpha0, math.sqrt(sigma0_sq), make_rng(seed, "pcaep/noise"))
    se = SEState(alpha=complex(alpha0), sigma_sq=float(sigma0_sq), w_corr=0.0, t=0)

    z_star = signal.z_star
    z_star_sq = float(np.real(np.vdot(z_star, z_star)))

    n_rows = t_max + 1
    alpha_emp = np.zeros(n_rows, dtype=complex)
    alpha_se = np.zeros(n_rows, dtype=complex)
    sigma2_emp = np.zeros(n_rows)
    sigma2_se = np.zeros(n_rows)
    p2_emp = np.zeros(n_rows)
    p2_se = np.zeros(n_rows)
    wcorr_emp = np.full(n_rows, np.nan)
    wcorr_se = np.full(n_rows, np.nan)

    noise_prev = None
    se_states = [se]
    for _ in range(t_max):
        se_states.append(se_step(p, delta, se_states[-1]))

    st = state
    for t in range(n_rows):
        a_hat = np.vdot(z_star, st.z) / z_star_sq
        w_vec = st.z - a_hat * z_star
        alpha_emp[t] = a_hat
        sigma2_emp[t] = float(np.real(np.vdot(w_vec, w_vec))) / z_star_sq
        p2_emp[t] = cosine_similarity_sq(signal.x_star, ep_extract_x(op, st))
        s = se_states[t]
        alpha_se[t] = s.alpha
        sigma2_se[t] = s.sigma_sq
        p2_se[t] = se_cosine(s, delta)
        if noise_prev is not None:
            num = float(np.real(np.vdot(noise_prev, w_vec)))
            den = np.linalg.norm(noise_prev) * np.linalg.norm(w_vec)
            wcorr_emp[t - 1] = num / den if den > 0 else np.nan
            s_prev = se_states[t - 1]
            den_se = math.sqrt(s_prev.sigma_sq * s.sigma_sq)
            wcorr_se[t - 1] = delta * s_prev.w_corr / den_se if den_se > 0 else np.nan
        noise_prev = w_vec
        if t < t_max:
            st = ep_step(op, st, weights)

    return TrackedRun(
        t=np.arange(n_rows),
        alpha_emp=alpha_emp,
        alpha_se=alpha_se,
        sigma2_emp=sigma2_emp,
        sigma2_se=sigma2_se,
        p2_emp=p2_emp,
        p2_se=p2_se,
        wcorr_emp=wcorr_emp,
        wcorr_se=wcorr_se,
        mu=mu,
        delta=delta,
        delta_realized=signal.delta,
        func=func.label(),
        seed=seed,
    )


@dataclass(frozen=True)
class FixedPointCheck:
    eigen_residual: float
    lambda_pred: float


def fixed_point_check(op, func: ProcessingFunction, mu: float, signal, z_inf: np.ndarray) -> FixedPointCheck:
    """Verify that a converged iterate back-projects to an eigenvector of the data matrix.

    lambda_pred uses the empirical mean weight: 1/mu - ((delta-1)/delta)/Gbar.
    The residual is ||D x - lambda_pred x|| / ||x|| with x the normalized
    back-projection of z_inf.
    """
    weights = build_ep_weights(func, signal, mu)
    delta_r = op.m / op.n
    lam = 1.0 / mu - (delta_r - 1.0) / delta_r / weights.g_bar
    x = ep_extract_x(op, z_inf)
    w = build_weights(func, signal)
    resid = float(np.linalg.norm(apply_D(op, w, x) - lam * x) / np.linalg.norm(x))
    return FixedPointCheck(eigen_residual=resid, lambda_pred=float(lam))


TRACKED_CSV_COLUMNS = [
    "t",
    "alpha_emp_re",
    "alpha_emp_im",
    "alpha_se_re",
    "alpha_se_im",
    "sigma2_emp",
    "sigma2_se",
    "p2_emp",
    "p2_se",
    "wcorr_emp",
    "wcorr_se",
]


def write_tracked_csv(path, run: TrackedRun) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(TRACKED_CSV_COLUMNS)
        for i in range(run.t.shape[0]):
            wr.writerow(
                [
                    int(run.t[i]),
                    f"{run.alpha_emp[i].real:.12g}",
                    f"{run.alpha_emp[i].imag:.12g}",
                    f"{run.alpha_se[i].real:.12g}",
                    f"{run.alpha_se[i].imag:.12g}",
                    f"{run.sigma2_emp[i]:.12g}",
                    f"{run.sigma2_se[i]:.12g}",
                    f"{run.p2_emp[i]:.12g}",
                    f"{run.p2_se[i]:.12g}",
                    f"{run.wcorr_emp[i]:.12g}",
                    f"{run.wcorr_se[i]:.12g}",
                ]
            )

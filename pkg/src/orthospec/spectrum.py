"""Dense eigen-analysis at small sizes: the Hermitian data matrix and the
non-Hermitian iteration matrix, with extreme-eigenvalue checks on both branches.

The interesting finite-size facts: on the max branch an outlier of D sits at
the predicted location above the bulk while the iteration matrix E shows an
eigenvalue of magnitude one; on the min branch (maps bounded below, tuning
parameter taken below the lower edge of the map's range) the outlier appears
under the bulk as the smallest eigenvalue of D.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .asymptotics import mu_hat
from .core import make_rng, make_signal
from .errors import InvalidParameterError, NumericError
from .pcaep import EPState, build_ep_weights, ep_step
from .preprocessing import ProcessingFunction
from .spectral import WeightDiagonal, apply_D, build_weights

__all__ = [
    "DENSE_N_CAP",
    "DENSE_M_CAP",
    "SpectrumReport",
    "dense_D",
    "dense_E",
    "eig_hermitian",
    "eig_general",
    "analyze",
    "freedman_diaconis_histogram",
    "write_report",
]

DENSE_N_CAP = 1536
DENSE_M_CAP = 1536
_HERMIT_TOL = 1e-8


def dense_D(op, w: WeightDiagonal, cap: int = DENSE_N_CAP) -> np.ndarray:
    """Materialize the data matrix column by column through basis probes.

    The result is explicitly Hermitized as (D + D^H)/2; an asymmetry residual
    beyond 1e-8 means the operator pair is not an adjoint pair, which is a
    bug, so it raises rather than warns.
    """
    n = op.n
    if n > cap:
        raise InvalidParameterError(f"dense build capped at n <= {cap}, got n = {n}")
    cols = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        cols[:, j] = apply_D(op, w, e)
        e[j] = 0.0
    asym = float(np.max(np.abs(cols - cols.conj().T)))
    if asym > _HERMIT_TOL:
        raise NumericError(f"data matrix asymmetry {asym:.3e} exceeds {_HERMIT_TOL}; adjoint is inconsistent")
    return 0.5 * (cols + cols.conj().T)


def dense_E(op, weights, cap: int = DENSE_M_CAP) -> np.ndarray:
    """Materialize the m-by-m iteration matrix from basis probes of one step."""
    m = op.m
    if m > cap:
        raise InvalidParameterError(f"dense build capped at m <= {cap}, got m = {m}")
    cols = np.empty((m, m), dtype=complex)
    e = np.zeros(m, dtype=complex)
    for j in range(m):
        e[j] = 1.0
        st = EPState(z=e, t=0, mu=weights.mu, g_bar=weights.g_bar)
        cols[:, j] = ep_step(op, st, weights).z
        e[j] = 0.0
    return cols


def eig_hermitian(mat: np.ndarray) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidParameterError("need a square matrix")
    asym = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if asym > _HERMIT_TOL:
        raise InvalidParameterError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return scipy.linalg.eigvalsh(mat)


def eig_general(mat: np.ndarray) -> np.ndarray:
    """All eigenvalues of a general complex matrix (dense QR algorithm)."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidParameterError("need a square matrix")
    try:
        return scipy.linalg.eigvals(mat)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericError(f"nonsymmetric eigensolver failed: {exc}") from exc


@dataclass(frozen=True)
class SpectrumReport:
    applicable: bool
    branch: str
    mu: Optional[float]
    lambda_pred: Optional[float]  # location from the empirical mean weight
    outlier_gap: Optional[float]  # | max |eig(E)| - 1 |
    top_match: Optional[float]  # |extreme eig(D) - lambda_pred|
    d_eigs: Optional[np.ndarray]
    e_eigs: Optional[np.ndarray]
    func: str
    delta: float
    delta_realized: Optional[float]
    n: int
    m: Optional[int]
    seed: int
    reason: str = ""


def analyze(
    op_spec,
    func: ProcessingFunction,
    delta: float,
    branch: str,
    seed: int,
    n_cap: int = DENSE_N_CAP,
    m_cap: int = DENSE_M_CAP,
) -> SpectrumReport:
    """Full dense run: solve for mu on the requested branch, build both spectra,
    and score the extreme eigenvalues against the predicted location."""
    mh = mu_hat(func, delta, branch)
    if not mh.found:
        return SpectrumReport(
            applicable=False,
            branch=branch,
            mu=None,
            lambda_pred=None,
            outlier_gap=None,
            top_match=None,
            d_eigs=None,
            e_eigs=None,
            func=func.label(),
            delta=delta,
            delta_realized=None,
            n=op_spec.n,
            m=None,
            seed=seed,
            reason=f"no outlier parameter on the {branch} branch at delta={delta}",
        )
    mu = mh.mu
    spec = op_spec.replace_seed(seed)
    op = spec.build()
    signal = make_signal(op, make_rng(seed, f"spectrum/signal/{spec.kind}/{spec.n}"))
    w = build_weights(func, signal)
    ep_w = build_ep_weights(func, signal, mu)
    delta_r = signal.delta
    lam_pred = 1.0 / mu - (delta_r - 1.0) / delta_r / ep_w.g_bar

    d_eigs = eig_hermitian(dense_D(op, w, cap=n_cap))
    e_eigs = eig_general(dense_E(op, ep_w, cap=m_cap))

    outlier_gap = float(abs(np.max(np.abs(e_eigs)) - 1.0))
    extreme = float(d_eigs[-1] if branch == "max" else d_eigs[0])
    top_match = float(abs(extreme - lam_pred))
    return SpectrumReport(
        applicable=True,
        branch=branch,
        mu=float(mu),
        lambda_pred=float(lam_pred),
        outlier_gap=outlier_gap,
        top_match=top_match,
        d_eigs=d_eigs,
        e_eigs=e_eigs,
        func=func.label(),
        delta=delta,
        delta_realized=delta_r,
        n=op.n,
        m=op.m,
        seed=seed,
    )


def freedman_diaconis_histogram(values: np.ndarray):
    """Histogram with Freedman-Diaconis bin widths; returns (edges, counts)."""
    values = np.asarray(values, dtype=float)
    edges = np.histogram_bin_edges(values, bins="fd")
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


def write_report(out_dir, report: SpectrumReport) -> None:
    """Emit d_eigs.csv, e_eigs.csv (re, im), and report.json into out_dir."""
    import os

    payload = {
        "applicable": report.applicable,
        "branch": report.branch,
        "func": report.func,
        "delta": report.delta,
        "delta_realized": report.delta_realized,
        "n": report.n,
        "m": report.m,
        "seed": report.seed,
        "mu": report.mu,
        "lambda_pred": report.lambda_pred,
        "outlier_gap": report.outlier_gap,
        "top_match": report.top_match,
        "reason": report.reason,
    }
    if report.applicable:
        with open(os.path.join(out_dir, "d_eigs.csv"), "w") as fh:
            fh.write("eig\n")
            for v in report.d_eigs:
                fh.write(f"{v:.12g}\n")
        with open(os.path.join(out_dir, "e_eigs.csv"), "w") as fh:
            fh.write("re,im\n")
            for v in report.e_eigs:
                fh.write(f"{v.real:.12g},{v.imag:.12g}\n")
        edges, counts = freedman_diaconis_histogram(report.d_eigs)
        payload["d_hist"] = {"edges": edges.tolist(), "counts": counts.tolist()}
        payload["d_min"] = float(report.d_eigs[0])
        payload["d_max"] = float(report.d_eigs[-1])
        payload["e_max_abs"] = float(np.max(np.abs(report.e_eigs)))
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")

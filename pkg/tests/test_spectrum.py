"""Dense eigen-analysis: materialized matrices, solvers, branch reports, file output."""

import json

import numpy as np
import pytest

from orthospec import (
    EPState,
    InvalidParameterError,
    SensingSpec,
    WeightDiagonal,
    analyze,
    apply_D,
    build_ep_weights,
    build_weights,
    dense_D,
    dense_E,
    ep_step,
    make_function,
    make_rng,
    make_signal,
)
from orthospec.errors import NumericError
from orthospec.spectrum import (
    DENSE_M_CAP,
    DENSE_N_CAP,
    eig_general,
    eig_hermitian,
    freedman_diaconis_histogram,
    write_report,
)


def test_dense_D_hermitian_and_consistent(small_op):
    signal = make_signal(small_op, make_rng(6, "spectrum/sig"))
    w = build_weights(make_function("trim"), signal)
    D = dense_D(small_op, w)
    assert np.max(np.abs(D - D.conj().T)) < 1e-12
    rng = make_rng(6, "spectrum/probe")
    x = rng.standard_normal(small_op.n) + 1j * rng.standard_normal(small_op.n)
    np.testing.assert_allclose(D @ x, apply_D(small_op, w, x), atol=1e-9)


def test_dense_E_consistent(small_op):
    signal = make_signal(small_op, make_rng(6, "spectrum/sig"))
    weights = build_ep_weights(make_function("star_regularized"), signal, mu=0.6)
    E = dense_E(small_op, weights)
    rng = make_rng(7, "spectrum/probe")
    z = rng.standard_normal(small_op.m) + 1j * rng.standard_normal(small_op.m)
    st = EPState(z=z, t=0, mu=0.6, g_bar=weights.g_bar)
    np.testing.assert_allclose(E @ z, ep_step(small_op, st, weights).z, atol=1e-9)


def test_dense_caps():
    spec = SensingSpec(kind="haar", n=48, seed=7, delta=2.0)
    op = spec.build()
    signal = make_signal(op, make_rng(6, "spectrum/sig"))
    w = build_weights(make_function("trim"), signal)
    with pytest.raises(InvalidParameterError):
        dense_D(op, w, cap=16)
    weights = build_ep_weights(make_function("star"), signal, mu=0.5)
    with pytest.raises(InvalidParameterError):
        dense_E(op, weights, cap=16)
    assert DENSE_N_CAP == 1536 and DENSE_M_CAP == 1536


def test_dense_D_rejects_broken_adjoint():
    class BadOp:
        n = 3
        m = 4
        rng = make_rng(0, "bad")
        B = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))

        def apply(self, x):
            return self.B @ x

        def apply_adjoint(self, z):
            return self.B.T @ z  # transpose without conjugate: not the adjoint

    w = WeightDiagonal(t_values=np.ones(4))
    with pytest.raises(NumericError):
        dense_D(BadOp(), w)


def test_eig_hermitian():
    mat = np.array([[2.0, 1j], [-1j, 2.0]])
    ev = eig_hermitian(mat)
    np.testing.assert_allclose(ev, [1.0, 3.0], atol=1e-12)
    with pytest.raises(InvalidParameterError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidParameterError):
        eig_hermitian(np.zeros(3))


def test_eig_general():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    ev = np.sort_complex(eig_general(rot))
    np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-12)


def test_analyze_max_branch():
    # calibrated at this seed: outlier_gap 0.064, top_match 0.012
    spec = SensingSpec(kind="haar", n=128, seed=0, delta=5.0)
    r = analyze(spec, make_function("mm"), 5.0, "max", seed=0)
    assert r.applicable
    assert r.branch == "max"
    assert r.outlier_gap < 0.15
    assert r.top_match < 0.05
    assert r.d_eigs.shape == (128,)
    assert r.e_eigs.shape == (640,)
    assert np.all(np.diff(r.d_eigs) >= 0)


def test_analyze_min_branch():
    # the map is bounded below; with the tuning parameter under the lower edge
    # the outlier comes out below the bulk as the smallest eigenvalue
    spec = SensingSpec(kind="haar", n=96, seed=0, delta=5.0)
    r = analyze(spec, make_function("shifted_mm"), 5.0, "min", seed=0)
    assert r.applicable
    assert r.top_match < 0.05
    assert abs(r.lambda_pred - 0.72) < 0.05
    assert float(r.d_eigs[0]) < float(np.percentile(r.d_eigs, 5))


def test_analyze_not_applicable():
    spec = SensingSpec(kind="haar", n=64, seed=0, delta=1.9)
    r = analyze(spec, make_function("star"), 1.9, "max", seed=0)
    assert not r.applicable
    assert r.reason != ""
    assert r.d_eigs is None and r.mu is None


def test_freedman_diaconis():
    rng = make_rng(0, "hist")
    vals = rng.standard_normal(500)
    edges, counts = freedman_diaconis_histogram(vals)
    assert counts.sum() == 500
    assert edges.shape[0] == counts.shape[0] + 1


def test_write_report(tmp_path):
    spec = SensingSpec(kind="haar", n=64, seed=0, delta=4.0)
    r = analyze(spec, make_function("mm"), 4.0, "max", seed=0)
    write_report(tmp_path, r)
    d_lines = (tmp_path / "d_eigs.csv").read_text().strip().split("\n")
    assert d_lines[0] == "eig"
    assert len(d_lines) == 65
    e_lines = (tmp_path / "e_eigs.csv").read_text().strip().split("\n")
    assert e_lines[0] == "re,im"
    assert len(e_lines) == 257
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["applicable"] is True
    assert np.isclose(payload["e_max_abs"], float(np.max(np.abs(r.e_eigs))))
    assert "d_hist" in payload and sum(payload["d_hist"]["counts"]) == 64


def test_write_report_not_applicable(tmp_path):
    spec = SensingSpec(kind="haar", n=64, seed=0, delta=1.9)
    r = analyze(spec, make_function("star"), 1.9, "max", seed=0)
    write_report(tmp_path, r)
    assert not (tmp_path / "d_eigs.csv").exists()
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["applicable"] is False and payload["reason"]

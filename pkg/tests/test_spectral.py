"""Weight diagonal, matrix-free products, power iteration, trial harness."""

import numpy as np
import pytest

from orthospec import (
    DegenerateStateError,
    InvalidParameterError,
    SensingSpec,
    SignalInstance,
    WeightDiagonal,
    apply_D,
    build_weights,
    cosine_similarity_sq,
    default_shift,
    make_function,
    make_rng,
    power_method,
    run_trial,
)
from orthospec.spectral import TRIAL_CSV_COLUMNS, read_trials_csv, write_trials_csv

from conftest import dense_matrix


def test_build_weights_trim_values():
    # hand-built instance: n=2, m=4 so s = 2 y^2
    x = np.array([1.0 + 0j, 1.0 + 0j])
    y = np.array([1.0, np.sqrt(2.0), 2.0, 3.0])  # s = 2, 4, 8, 18
    sig = SignalInstance(x_star=x, z_star=y.astype(complex), y=y, op_id="manual")
    w = build_weights(make_function("trim"), sig)
    assert w.m == 4
    np.testing.assert_allclose(w.t_values, [0.5, 0.0, 0.0, 0.0], atol=1e-14)


def test_build_weights_delta_override():
    x = np.array([1.0 + 0j, 1.0 + 0j])
    y = np.array([1.0, 1.0, 1.0, 1.0])
    sig = SignalInstance(x_star=x, z_star=y.astype(complex), y=y, op_id="manual")
    w4 = build_weights(make_function("trim"), sig, delta=4.0)  # s = 4 -> 0
    np.testing.assert_allclose(w4.t_values, 0.0, atol=1e-14)


def test_apply_D_matches_dense(small_op):
    A = dense_matrix(small_op)
    t = np.linspace(0.0, 1.0, small_op.m)
    D = A.conj().T @ (t[:, None] * A)
    w = WeightDiagonal(t_values=t)
    rng = make_rng(3, "test/applyD")
    for _ in range(3):
        x = rng.standard_normal(small_op.n) + 1j * rng.standard_normal(small_op.n)
        np.testing.assert_allclose(apply_D(small_op, w, x), D @ x, atol=1e-10)
    with pytest.raises(InvalidParameterError):
        apply_D(small_op, w, np.zeros(small_op.n + 1, dtype=complex))


def test_power_method_against_dense_eig(small_op):
    A = dense_matrix(small_op)
    t = np.linspace(0.0, 1.0, small_op.m)
    D = A.conj().T @ (t[:, None] * A)
    evals, evecs = np.linalg.eigh(D)
    assert evals[-1] - evals[-2] > 1e-3  # generic gap for these fixed seeds
    w = WeightDiagonal(t_values=t)
    est = power_method(small_op, w, shift=0.0, max_iter=20000, tol=1e-10, rng=make_rng(11, "test/power"))
    assert est.converged
    assert abs(est.lambda_hat - evals[-1]) < 1e-8
    assert est.residual < 1e-8
    assert np.isclose(np.linalg.norm(est.x_hat), np.sqrt(small_op.n))
    top = evecs[:, -1]
    assert cosine_similarity_sq(top, est.x_hat) > 1.0 - 1e-10


def test_power_method_shift_invariance(small_op):
    t = np.linspace(0.0, 1.0, small_op.m)
    w = WeightDiagonal(t_values=t)
    v0 = make_rng(5, "test/v0").standard_normal(small_op.n) + 0j
    a = power_method(small_op, w, shift=0.0, max_iter=20000, tol=1e-10, v0=v0)
    b = power_method(small_op, w, shift=7.5, max_iter=20000, tol=1e-10, v0=v0)
    assert abs(a.lambda_hat - b.lambda_hat) < 1e-7


def test_power_method_eigen_residual(small_op):
    t = np.linspace(0.0, 1.0, small_op.m)
    w = WeightDiagonal(t_values=t)
    est = power_method(small_op, w, shift=0.0, max_iter=20000, tol=1e-10, rng=make_rng(2, "r"))
    v = est.x_hat / np.sqrt(small_op.n)
    r = apply_D(small_op, w, v) - est.lambda_hat * v
    assert np.linalg.norm(r) < 1e-8


def test_power_method_argument_errors(small_op):
    w = WeightDiagonal(t_values=np.ones(small_op.m))
    with pytest.raises(InvalidParameterError):
        power_method(small_op, w, shift=-1.0, rng=make_rng(1, "x"))
    with pytest.raises(InvalidParameterError):
        power_method(small_op, w, shift=0.0, tol=0.0, rng=make_rng(1, "x"))
    with pytest.raises(InvalidParameterError):
        power_method(small_op, w, shift=0.0)  # neither rng nor v0
    with pytest.raises(InvalidParameterError):
        power_method(small_op, w, shift=0.0, v0=np.ones(3, dtype=complex))


def test_power_method_zero_weights_collapse(small_op):
    w = WeightDiagonal(t_values=np.zeros(small_op.m))
    v0 = np.ones(small_op.n, dtype=complex)
    with pytest.raises(DegenerateStateError):
        power_method(small_op, w, shift=0.0, v0=v0)


def test_default_shift_table():
    assert default_shift(make_function("trim")) == 0.0
    assert default_shift(make_function("subset")) == 0.0
    assert default_shift(make_function("mm")) == 10.0
    for kind in ("star", "star_regularized", "alt_weak"):
        assert default_shift(make_function(kind)) == 50.0
    assert default_shift(make_function("shifted_mm")) == 50.0


def test_run_trial_deterministic():
    spec = SensingSpec(kind="partial_dft", n=128, seed=0, delta=4.0)
    func = make_function("subset")
    a = run_trial(spec, func, seed=3, max_iter=2000)
    b = run_trial(spec, func, seed=3, max_iter=2000)
    assert a.p2 == b.p2
    assert a.lambda1 == b.lambda1
    assert a.iterations == b.iterations
    c = run_trial(spec, func, seed=4, max_iter=2000)
    assert c.p2 != a.p2
    assert a.kind == "partial_dft"
    assert np.isclose(a.delta_realized, 4.0)
    assert a.func == "subset(c1=1.5)"


def test_run_trial_recovers_at_large_delta():
    # delta=6 subset is far above threshold even at n=256
    spec = SensingSpec(kind="partial_dft", n=256, seed=0, delta=6.0)
    res = [run_trial(spec, make_function("subset"), seed=s) for s in range(3)]
    assert all(r.converged for r in res)
    assert np.mean([r.p2 for r in res]) > 0.4


def test_trials_csv_round_trip(tmp_path):
    spec = SensingSpec(kind="partial_dft", n=64, seed=0, delta=2.0)
    res = [run_trial(spec, make_function("trim"), seed=s, max_iter=500) for s in range(2)]
    path = tmp_path / "trials.csv"
    write_trials_csv(path, res)
    back = read_trials_csv(path)
    assert len(back) == 2
    for orig, rt in zip(res, back):
        assert rt.seed == orig.seed
        assert rt.kind == orig.kind
        assert rt.func == orig.func
        assert np.isclose(rt.p2, orig.p2, rtol=1e-10)
        assert np.isclose(rt.lambda1, orig.lambda1, rtol=1e-10)
        assert rt.iterations == orig.iterations
        assert rt.converged == orig.converged


def test_trials_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("seed,oops\n1,2\n")
    with pytest.raises(InvalidParameterError):
        read_trials_csv(path)
    assert TRIAL_CSV_COLUMNS[0] == "seed"

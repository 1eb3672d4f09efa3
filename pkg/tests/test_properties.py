"""Property-based checks: invariants that should hold for arbitrary inputs."""

import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from orthospec import (
    SensingSpec,
    cosine_similarity_sq,
    make_function,
    make_rng,
    psi,
    t_range,
)
from orthospec.asymptotics import exp_expectation

_DELTAS = st.floats(min_value=1.2, max_value=8.0, allow_nan=False)


def _complex_vec(draw, n):
    re = draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n))
    im = draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n))
    return np.array(re) + 1j * np.array(im)


@st.composite
def _vec_pairs(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    a = _complex_vec(draw, n)
    b = _complex_vec(draw, n)
    if np.linalg.norm(a) < 1e-6:
        a = a + 1.0
    if np.linalg.norm(b) < 1e-6:
        b = b + 1j
    return a, b


@settings(max_examples=60, deadline=None)
@given(_vec_pairs(), st.floats(0.0, 2 * np.pi), st.floats(0.1, 10.0))
def test_cosine_phase_and_scale_invariant(pair, phase, scale):
    a, b = pair
    base = cosine_similarity_sq(a, b)
    assert 0.0 <= base <= 1.0
    rotated = cosine_similarity_sq(a, scale * np.exp(1j * phase) * b)
    assert np.isclose(rotated, base, atol=1e-9)


@st.composite
def _funcs(draw):
    kind = draw(st.sampled_from(["trim", "subset", "mm", "star", "star_regularized", "alt_weak", "shifted_mm"]))
    if kind == "trim":
        return make_function(kind, c2=draw(st.floats(0.5, 4.0)))
    if kind == "subset":
        return make_function(kind, c1=draw(st.floats(0.2, 4.0)))
    if kind == "star_regularized":
        return make_function(kind, kappa=draw(st.floats(0.001, 0.5)))
    return make_function(kind)


@settings(max_examples=60, deadline=None)
@given(_funcs(), _DELTAS, st.floats(1e-6, 50.0))
def test_normalized_map_never_exceeds_one(func, delta, s):
    t = float(func.t_of_s(np.array([s]), delta)[0])
    assert t <= 1.0 + 1e-9
    r = t_range(func, delta)
    assert np.isclose(r.t_max, 1.0)
    if r.bounded_below:
        assert t >= r.t_min - 1e-9


@settings(max_examples=40, deadline=None)
@given(_funcs(), st.floats(0.05, 0.95), _DELTAS)
def test_psi_ordering_invariants(func, mu, delta):
    if func.kind in ("mm", "shifted_mm") and delta < 1.35:
        delta = 1.35  # keep the sqrt(delta)/(sqrt(delta)-1) scale finite
    p = psi(func, mu, delta)
    assert p.psi2 >= 1.0 - 1e-9  # second moment over squared mean
    assert p.psi3 >= p.psi1 - 1e-9  # Cauchy-Schwarz with E[s] = 1
    assert p.e_g > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**64 - 1), st.text(max_size=12))
def test_make_rng_reproducible(seed, label):
    a = make_rng(seed, label).standard_normal(4)
    b = make_rng(seed, label).standard_normal(4)
    np.testing.assert_array_equal(a, b)


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_exponential_expectation_affine_exact(a, b):
    val = exp_expectation(lambda s: a + b * s)
    assert np.isclose(val, a + b, atol=1e-8 * (1 + abs(a) + abs(b)))


@st.composite
def _sensing_specs(draw):
    kind = draw(st.sampled_from(["haar", "cdp", "partial_dft"]))
    seed = draw(st.integers(0, 2**32))
    if kind == "cdp":
        return SensingSpec(kind=kind, n=draw(st.integers(8, 64)), seed=seed, blocks=draw(st.integers(2, 5)))
    n = draw(st.integers(8, 64))
    delta = draw(st.floats(1.2, 6.0))
    return SensingSpec(kind=kind, n=n, seed=seed, delta=delta)


@settings(max_examples=40, deadline=None)
@given(_sensing_specs())
def test_sensing_spec_json_round_trip(spec):
    back = SensingSpec.from_json(json.loads(json.dumps(spec.to_json())))
    assert back == spec
    assert back.resolved_m() == spec.resolved_m()

import numpy as np
import pytest

from orthospec import (
    InvalidParameterError,
    SingularityError,
    eval_G,
    eval_T,
    make_function,
    normalize,
    t_range,
)
from orthospec.preprocessing import canonical_kind


def test_trim_values_and_jump():
    f = make_function("trim")  # c2 = 2, cut at s = 4
    s = np.array([0.0, 2.0, 3.9999, 4.0, 10.0])
    t = f.t_of_s(s)
    assert np.allclose(t, [0.0, 0.5, 0.999975, 0.0, 0.0])
    assert f.jumps() == (4.0,)
    r = f.t_range()
    assert r.t_min == 0.0 and r.t_max == 1.0 and r.bounded_below


def test_subset_is_an_indicator():
    f = make_function("subset", c1=1.5)
    t = f.t_of_s(np.array([0.0, 1.5, 1.5001, 8.0]))
    assert np.array_equal(t, [0.0, 0.0, 1.0, 1.0])
    assert f.jumps() == (1.5,)


def test_mm_hand_values():
    f = make_function("mm")
    # sqrt(delta) = 2: T = 1 - 2/(s+1)
    t = f.t_of_s(np.array([0.0, 1.0, 3.0]), delta=4.0)
    assert np.allclose(t, [-1.0, 0.0, 0.5])
    assert f.t_range(4.0).t_min == -1.0
    assert not f.delta_free


def test_star_and_regularized():
    star = make_function("star")
    assert np.allclose(star.t_of_s(np.array([0.5, 1.0, 2.0])), [-1.0, 0.0, 0.5])
    assert not star.t_range().bounded_below

    reg = make_function("star_regularized")
    assert np.isclose(reg.t_of_s(0.0), 1.0 - 1.0 / 0.01)
    r = reg.t_range()
    assert r.bounded_below and np.isclose(r.t_min, -99.0)


def test_alt_weak_shift_clamps_at_two():
    f = make_function("alt_weak")
    # delta=4: shift 2, T = 1 - 1/(s+2)
    assert np.isclose(f.t_of_s(0.0, delta=4.0), 0.5)
    assert np.isclose(f.t_range(4.0).t_min, 0.5)
    # at delta=2 the shift vanishes and the map loses its lower bound
    assert not f.t_range(2.0).bounded_below


def test_shifted_mm_normalization():
    f = make_function("shifted_mm")
    # delta=4: raw = 2 + 2/(s+1), sup 4 at s=0, inf 2 as s -> inf
    assert np.isclose(f.t_of_s(0.0, delta=4.0), 1.0)
    r = f.t_range(4.0)
    assert np.isclose(r.t_min, 0.5) and r.t_max == 1.0
    big = f.t_of_s(1e9, delta=4.0)
    assert 0.5 < big < 0.5 + 1e-8


def test_custom_interpolation():
    f = make_function("custom", s=(0.0, 1.0, 2.0), t=(0.0, 0.5, 1.0))
    assert np.allclose(f.t_of_s(np.array([0.5, 1.5, 5.0])), [0.25, 0.75, 1.0])
    assert f.delta_free
    with pytest.raises(InvalidParameterError):
        make_function("custom", s=(0.0,), t=(1.0,))
    with pytest.raises(InvalidParameterError):
        make_function("custom", s=(0.0, 0.0), t=(0.0, 1.0))


def test_normalize_callable_with_nonpositive_sup():
    f = normalize(lambda s: -s / (1.0 + s))
    assert f.kind == "custom"
    t = np.asarray(f.params["t"])
    assert np.isclose(np.max(t), 1.0)
    assert np.all(t <= 1.0 + 1e-12)


def test_normalize_rejects_unbounded():
    with pytest.raises(InvalidParameterError):
        normalize(lambda s: np.asarray(s))


def test_eval_T_and_G():
    f = make_function("trim")
    # y^2 * delta = s
    t = eval_T(f, np.array([1.0]), delta=2.0)  # s = 2 -> 0.5
    assert np.isclose(t[0], 0.5)
    with pytest.raises(InvalidParameterError):
        eval_T(f, np.array([-1.0]), delta=2.0)
    g = eval_G(f, np.array([1.0]), mu=0.5, delta=2.0)  # 1/(2 - 0.5)
    assert np.isclose(g[0], 1.0 / 1.5)


def test_G_pole_guard():
    f = make_function("subset")
    with pytest.raises(SingularityError) as err:
        eval_G(f, np.array([0.5, 2.0]), mu=1.0, delta=2.0)
    assert err.value.mu == 1.0


def test_aliases_and_labels():
    assert canonical_kind("StarReg") == "star_regularized"
    assert canonical_kind("ALT-WEAK") == "alt_weak"
    assert canonical_kind("ShiftedMM") == "shifted_mm"
    with pytest.raises(InvalidParameterError):
        canonical_kind("nope")
    assert make_function("trim").label() == "trim(c2=2)"
    assert make_function("subset", c1=2.0).label() == "subset(c1=2)"
    assert make_function("star_regularized").label() == "star_regularized(kappa=0.01)"
    assert make_function("mm").label() == "mm"


def test_unknown_params_rejected():
    with pytest.raises(InvalidParameterError):
        make_function("mm", delta=4.0)  # delta binds at evaluation, not construction
    with pytest.raises(InvalidParameterError):
        make_function("trim", c1=2.0)
    with pytest.raises(InvalidParameterError):
        make_function("star", kappa=0.1)


def test_module_level_t_range():
    r = t_range(make_function("subset"))
    assert (r.t_min, r.t_max) == (0.0, 1.0)

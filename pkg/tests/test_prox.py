import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fxtmvi.prox import (L1, Ball, Box, NonNeg, Product, Zero, check_prox_characterization,
                         prox_apply, prox_from_dict, psi_or_inf)

DIM = 4
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec = arrays(np.float64, DIM, elements=finite)
mus = st.floats(1e-3, 1e2)

KINDS = [
    Zero(),
    NonNeg(),
    Box((-1.0, 0.0, -2.0, 0.5), (1.0, 3.0, -1.0, 0.5)),
    Ball((0.5, -0.5, 1.0, 0.0), 2.0),
    L1(0.7),
    Product(((NonNeg(), 2), (L1(1.0), 2))),
]
INDICATORS = [k for k in KINDS if k.is_indicator]


def test_nonneg_projection():
    assert np.array_equal(prox_apply(NonNeg(), [-1.0, 2.0], 1.0), [0.0, 2.0])


def test_zero_is_identity():
    v = np.array([3.0, -7.5, 0.1])
    assert np.array_equal(prox_apply(Zero(), v, 0.3), v)


def test_soft_threshold_value():
    out = prox_apply(L1(1.0), [1.2, -0.3, 0.5], 0.5)
    assert np.allclose(out, [0.7, 0.0, 0.0], atol=1e-15)


def test_soft_threshold_against_grid():
    # brute-force 1-D minimization of |z| + (v - z)^2 / (2 mu) at step 1e-5
    grid = np.arange(-3.0, 3.0, 1e-5)
    for v in (1.2, -0.3, 0.5, -2.1):
        z = grid[np.argmin(np.abs(grid) + (v - grid) ** 2 / (2 * 0.5))]
        assert abs(z - prox_apply(L1(1.0), [v], 0.5)[0]) <= 1e-5


def test_ball_center_stays():
    b = Ball((1.0, 1.0), 0.5)
    assert np.array_equal(b.prox([1.0, 1.0], 2.0), [1.0, 1.0])


def test_ball_outside_lands_on_sphere():
    out = Ball((0.0, 0.0), 2.0).prox([3.0, 4.0], 1.0)
    assert np.allclose(out, [1.2, 1.6])


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        NonNeg().prox([1.0], 0.0)
    with pytest.raises(ValueError):
        Box((1.0,), (0.0,))
    with pytest.raises(ValueError):
        Ball((0.0,), 0.0)
    with pytest.raises(ValueError):
        L1(-1.0)
    with pytest.raises(ValueError):
        Box((0.0, 0.0), (1.0, 1.0)).prox([1.0, 2.0, 3.0], 1.0)


def test_characterization_nonneg_random_probes():
    rng = np.random.default_rng(0)
    probes = np.abs(rng.standard_normal((100, 2))) * 5
    res = check_prox_characterization(NonNeg(), [-1.0, 2.0], 1.0, probes)
    assert res and res.skipped == 0


def test_characterization_zero_equality_at_nu():
    v = np.array([0.3, -2.0])
    res = check_prox_characterization(Zero(), v, 1.0, [v])
    assert res and res.min_slack == 0.0


def test_characterization_detects_perturbed_candidate():
    v = np.array([-1.0, 2.0])
    nu = prox_apply(NonNeg(), v, 1.0) + 0.1
    res = check_prox_characterization(NonNeg(), v, 1.0, [nu - 0.1], nu=nu)
    assert not res


def test_characterization_skips_infeasible_probes():
    res = check_prox_characterization(NonNeg(), [1.0], 1.0, [[-1.0], [2.0]])
    assert res.skipped == 1


def test_psi_or_inf():
    assert psi_or_inf(NonNeg(), [1.0, -1.0]) == np.inf
    assert psi_or_inf(NonNeg(), [1.0, 0.0]) == 0.0
    assert psi_or_inf(L1(2.0), [1.0, -1.0]) == 4.0
    with pytest.raises(TypeError):
        NonNeg().value([1.0])


def test_product_matches_blocks():
    kind = Product(((NonNeg(), 2), (L1(1.0), 2)))
    v = np.array([-1.0, 2.0, 3.0, -0.5])
    out = kind.prox(v, 0.5)
    assert np.array_equal(out[:2], NonNeg().prox(v[:2], 0.5))
    assert np.array_equal(out[2:], L1(1.0).prox(v[2:], 0.5))


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.tag)
def test_dict_roundtrip(kind):
    assert prox_from_dict(kind.to_dict()) == kind


def test_dict_rejects_unknown_keys():
    with pytest.raises(ValueError):
        prox_from_dict({"kind": "l1", "weight": 1.0, "wieght": 2.0})
    with pytest.raises(ValueError):
        prox_from_dict({"kind": "nope"})


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.tag)
@settings(max_examples=300, deadline=None)
@given(w=vec, y=vec, mu=mus)
def test_nonexpansive(kind, w, y, mu):
    d = np.linalg.norm(kind.prox(w, mu) - kind.prox(y, mu))
    assert d <= np.linalg.norm(w - y) + 1e-12 * (1 + np.linalg.norm(w) + np.linalg.norm(y))


@pytest.mark.parametrize("kind", INDICATORS, ids=lambda k: k.tag)
@settings(max_examples=300, deadline=None)
@given(v=vec, mu=mus)
def test_indicator_idempotent(kind, v, mu):
    once = kind.prox(v, mu)
    assert np.array_equal(kind.prox(once, mu), once)


@pytest.mark.parametrize("kind", INDICATORS, ids=lambda k: k.tag)
@settings(max_examples=300, deadline=None)
@given(v=vec, mu1=mus, mu2=mus)
def test_indicator_mu_independent(kind, v, mu1, mu2):
    assert np.array_equal(kind.prox(v, mu1), kind.prox(v, mu2))


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.tag)
@settings(max_examples=100, deadline=None)
@given(v=vec, mu=mus, seed=st.integers(0, 2 ** 31))
def test_characterization_holds_at_prox(kind, v, mu, seed):
    rng = np.random.default_rng(seed)
    probes = kind.prox(v, mu) + rng.standard_normal((20, DIM)) * 3
    if kind.is_indicator:
        probes = [kind.prox(a, 1.0) for a in probes]
    tol = 1e-9 * (1 + np.linalg.norm(v)) ** 2
    assert check_prox_characterization(kind, v, mu, probes, tol=tol)

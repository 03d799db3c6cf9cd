import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import measurements
from qtradeoff.measurement import (
    InvalidMeasurementError,
    Measurement,
    canonicalize,
    degeneracy_profile,
    family_m,
    family_p,
    is_identity,
    is_projective_rank,
    is_rank_one_projector,
    metrics,
    outcome_probability,
    parse_measurement,
)

START = (0.8, 0.7, 0.4, 0.0)


def test_canonicalize_sorts():
    assert np.array_equal(canonicalize([0.4, 0.8, 0, 0.7]).lambdas, START)


def test_canonicalize_rescales_only_on_request():
    assert np.array_equal(canonicalize([2, 1], allow_rescale=True).lambdas, [1, 0.5])
    with pytest.raises(InvalidMeasurementError):
        canonicalize([2, 1])


@pytest.mark.parametrize("raw", [[0, 0, 0], [0.5], [0.5, -0.1], [0.5, np.nan], []])
def test_canonicalize_rejects(raw):
    with pytest.raises(InvalidMeasurementError):
        canonicalize(raw)


def test_tiny_negatives_clamped():
    m = canonicalize([1.0, -1e-13])
    assert m.lambdas[-1] == 0.0


def test_measurement_is_read_only():
    m = canonicalize(START)
    with pytest.raises(ValueError):
        m.lambdas[0] = 0.1


def test_direct_construction_checks_order():
    with pytest.raises(InvalidMeasurementError):
        Measurement(np.array([0.5, 0.9]))
    with pytest.raises(InvalidMeasurementError):
        Measurement(np.array([0.0, 0.0]))


def test_parse_roundtrip():
    m = canonicalize([1, 1 / 3, 0.1])
    assert np.array_equal(parse_measurement(m.to_text()).lambdas, m.lambdas)
    with pytest.raises(InvalidMeasurementError):
        parse_measurement("0.5,abc")


@pytest.mark.parametrize("lam, expected", [
    (START, (1, 1, 1)),
    ((1, 0.5, 0.5), (1, 2, 0)),
    ((1, 1, 1, 1), (4, 4, 0)),
    ((1, 1, 0, 0), (2, 2, 2)),
])
def test_degeneracy_profile(lam, expected):
    p = degeneracy_profile(canonicalize(lam))
    assert (p.n1, p.nd, p.n0) == expected


def test_degeneracy_tolerance_is_relative():
    m = canonicalize([1.0, 1.0 - 1e-10, 0.5])
    assert degeneracy_profile(m).n1 == 2
    assert degeneracy_profile(canonicalize(0.01 * m.lambdas)).n1 == 2


def test_family_p():
    assert np.array_equal(family_p(4, 1).lambdas, (1, 0, 0, 0))
    assert np.array_equal(family_p(4, 4).lambdas, (1, 1, 1, 1))
    assert np.array_equal(family_p(4, 2, 0.5).lambdas, (0.5, 0.5, 0, 0))
    for bad in [(4, 0, 1), (4, 5, 1), (4, 2, 0), (4, 2, 1.5)]:
        with pytest.raises(ValueError):
            family_p(*bad)


def test_family_m():
    assert np.allclose(family_m(4, 1, 3, 0.31).lambdas, (1, 0.31, 0.31, 0.31))
    assert np.array_equal(family_m(4, 1, 3, 1.0).lambdas, (1, 1, 1, 1))
    assert np.array_equal(family_m(3, 1, 2, 0.5).lambdas, (1, 0.5, 0.5))
    with pytest.raises(ValueError):
        family_m(4, 2, 3, 0.5)


def test_special_point_predicates():
    assert is_rank_one_projector(family_p(4, 1))
    assert is_identity(family_p(4, 4))
    assert all(is_projective_rank(family_p(4, r)) for r in range(1, 5))
    assert not is_projective_rank(canonicalize(START))


def test_metrics_at_start():
    # DERIVED: direct evaluation with sigma^2 = 1.29, tau = 1.9
    met = metrics(canonicalize(START))
    assert met.g == pytest.approx((1 + 0.64 / 1.29) / 5, abs=1e-15)
    assert met.g == pytest.approx(0.2992248062015504, abs=1e-12)
    assert met.f == pytest.approx(0.7596899224806201, abs=1e-12)
    assert met.r == 0.0
    assert outcome_probability(canonicalize(START)) == pytest.approx(0.3225, abs=1e-15)


def test_metrics_identity_and_projector():
    met = metrics(family_p(4, 4))
    assert (met.g, met.f, met.r) == pytest.approx((0.25, 1.0, 1.0))
    assert outcome_probability(family_p(4, 4)) == 1.0
    assert outcome_probability(family_p(4, 1)) == 0.25


def test_metrics_final_gr_measurement():
    met = metrics(family_m(4, 1, 3, 0.31))
    assert met.g == pytest.approx(0.3552433439, abs=1e-9)
    assert met.r == pytest.approx(0.2983777071, abs=1e-9)
    assert round(met.g, 2) == 0.36 and round(met.r, 2) == 0.30


@settings(max_examples=300, deadline=None)
@given(measurements(), st.floats(0.01, 1.0))
def test_rescaling_invariance(m, c):
    a = metrics(m)
    b = metrics(canonicalize(c * m.lambdas))
    assert np.allclose([a.g, a.f, a.r], [b.g, b.f, b.r], atol=1e-12, rtol=0)
    assert degeneracy_profile(m) == degeneracy_profile(canonicalize(c * m.lambdas))


@settings(max_examples=300, deadline=None)
@given(measurements(min_d=3), st.randoms(use_true_random=False))
def test_interior_permutation_invariance(m, rnd):
    lam = m.lambdas.copy()
    mid = list(lam[1:-1])
    rnd.shuffle(mid)
    a = metrics(m)
    b = metrics(canonicalize([lam[0], *mid, lam[-1]]))
    assert np.allclose([a.g, a.f, a.r], [b.g, b.f, b.r], atol=1e-12, rtol=0)


@settings(max_examples=500, deadline=None)
@given(measurements())
def test_metric_bounds(m):
    d = m.d
    met = metrics(m)
    eps = 1e-12
    assert 1 / d - eps <= met.g <= 2 / (d + 1) + eps
    assert 2 / (d + 1) - eps <= met.f <= 1 + eps
    assert -eps <= met.r <= 1 + eps
    mom = m.moments()
    assert mom.sigma_sq > 0
    assert np.sqrt(mom.sigma_sq) - eps <= mom.tau <= np.sqrt(d * mom.sigma_sq) + eps
    assert 0 < outcome_probability(m) <= 1


@settings(max_examples=300, deadline=None)
@given(measurements())
def test_profile_invariants(m):
    p = degeneracy_profile(m)
    assert p.n0 in (0, p.nd)
    assert (p.n0 == p.nd) == (m.lambdas[-1] <= p.tol * m.lambdas[0])
    if p.n1 != m.d:
        assert p.n1 + p.nd <= m.d


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_extremes(d):
    lo, hi = metrics(family_p(d, 1)), metrics(family_p(d, d))
    assert lo.g == pytest.approx(2 / (d + 1)) and hi.g == pytest.approx(1 / d)
    assert lo.f == pytest.approx(2 / (d + 1)) and hi.f == pytest.approx(1.0)
    assert lo.r == 0.0 and hi.r == pytest.approx(1.0)

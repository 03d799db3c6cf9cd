import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import measurements
from qtradeoff.correlation import (
    PRESETS,
    RejectionBudgetError,
    admissible_mask,
    changes,
    coefficient_range_curves,
    gamma_boundary,
    normalized_changes,
    pearson_check,
    preset,
    sample_admissible,
    sample_admissible_array,
    scatter_dataset,
    sigma_ellipse,
    sigma_for,
)
from qtradeoff.geometry import angle_set, direction_set
from qtradeoff.measurement import canonicalize, family_m, family_p

START = canonicalize([0.8, 0.7, 0.4, 0.0])
SMOOTH = canonicalize([0.9, 0.6, 0.3, 0.1])

# Coefficient quadruples (C++, -C-+, C--, -C+-) quoted for each figure panel,
# to two decimals; the presets were found by a grid search over lambda.
QUOTED = {
    "gf-smooth": (-0.60, -0.60, -0.60, -0.60),
    "gf-optimal": (-1.0, -1.0, -1.0, -1.0),
    "gf-n1-2": (-0.26, -0.79, -0.79, -0.26),
    "gf-n0-1": (-0.37, -0.37, -0.87, -0.87),
    "gf-n1-2-n0-1": (-0.13, -0.43, -1.0, -0.32),
    "gr-smooth": (-0.17, -0.17, -0.17, -0.17),
    "gr-nd-2": (-0.58, -0.58, -0.38, -0.38),
    "gr-n1-nd-2": (-0.41, -1.0, -0.67, -0.27),
    "gr-optimal": (-1.0, -1.0, -0.47, -0.47),
}


@pytest.mark.parametrize("name", sorted(QUOTED))
def test_presets_reproduce_quoted_quadruples(name):
    pair, m = preset(name)
    got = np.round(angle_set(m).quadruple(pair), 2)
    assert np.allclose(got, QUOTED[name], atol=0.0051)


def test_preset_table_complete():
    assert len(PRESETS) == 12
    assert sum(p == "gf" for p, _ in PRESETS.values()) == 6


# --- sampling ---------------------------------------------------------------

def test_unconstrained_sampling_accepts_everything():
    eps = sample_admissible_array(SMOOTH, "gf", 1.0, 2000, seed=1)
    assert np.all(admissible_mask(SMOOTH, "gf", eps))
    rng = np.random.default_rng(0)
    z = rng.normal(size=(1000, 4))
    assert admissible_mask(SMOOTH, "gf", z).all()


def test_single_tie_halves_acceptance():
    # DERIVED: one half-space through the origin keeps half the sphere
    m = canonicalize([1.0, 1.0, 0.5, 0.2])
    z = np.random.default_rng(2).normal(size=(10 ** 5, 4))
    assert admissible_mask(m, "gf", z).mean() == pytest.approx(0.5, abs=0.01)


def test_zero_entries_never_decrease():
    eps = sample_admissible_array(START, "gf", 0.01, 1000, seed=3)
    assert np.all(eps[:, -1] >= 0)
    assert np.allclose(np.linalg.norm(eps, axis=1), 0.01)


def test_minimum_block_only_constrained_for_gr():
    m = canonicalize([1.0, 0.7, 0.5, 0.5])
    z = np.random.default_rng(4).normal(size=(4000, 4))
    assert admissible_mask(m, "gf", z).all()
    assert admissible_mask(m, "gr", z).mean() == pytest.approx(0.5, abs=0.03)


def test_sampling_is_deterministic_and_chunk_stable():
    a = sample_admissible_array(START, "gr", 0.01, 300, seed=9, chunk_size=64)
    b = sample_admissible_array(START, "gr", 0.01, 300, seed=9, chunk_size=64, workers=4)
    assert np.array_equal(a, b)
    c = sample_admissible_array(START, "gr", 0.01, 300, seed=10, chunk_size=64)
    assert not np.array_equal(a, c)
    per = sample_admissible(START, "gr", 0.01, 5, seed=9)
    assert len(per) == 5 and per[0].norm == 0.01


def test_rejection_budget():
    m = canonicalize([1.0, 1.0, 0.0, 0.0])
    with pytest.raises(RejectionBudgetError):
        sample_admissible_array(m, "gf", 0.01, 1000, max_attempts=1)


def test_pair_validation():
    with pytest.raises(ValueError):
        scatter_dataset(START, "gx", 3)


# --- normalized changes -----------------------------------------------------

def test_change_coordinates_of_steepest_directions():
    ds = direction_set(SMOOTH)
    c = angle_set(SMOOTH).c_gf_pp
    p = normalized_changes(SMOOTH, ds.g_plus, "gf")
    q = normalized_changes(SMOOTH, ds.f_plus, "gf")
    assert (p.dg, p.dd) == pytest.approx((1.0, c), abs=1e-12)
    assert (q.dg, q.dd) == pytest.approx((c, 1.0), abs=1e-12)


def test_change_of_orthogonal_modification_is_zero():
    ds = direction_set(SMOOTH)
    basis = np.linalg.qr(np.column_stack([ds.g, ds.f, np.eye(4)[:, :2]]))[0]
    p = normalized_changes(SMOOTH, basis[:, 2], "gf")
    assert (p.dg, p.dd) == pytest.approx((0.0, 0.0), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(measurements(), st.sampled_from(["gf", "gr"]), st.integers(0, 2 ** 16))
def test_changes_bounded(m, pair, seed):
    pts = scatter_dataset(m, pair, 50, 0.01, seed)
    assert np.all(pts ** 2 <= 1 + 1e-9)


# --- sigma ------------------------------------------------------------------

def test_sigma_circle_and_line():
    circle = sigma_ellipse(0.0)
    assert np.allclose(np.hypot(*circle.points.T), 1.0)
    line = sigma_ellipse(-1.0)
    assert np.allclose(line.points[:, 0], -line.points[:, 1])
    with pytest.raises(ValueError):
        sigma_ellipse(0.5)


def test_sigma_passes_through_steepest_points():
    s = sigma_ellipse(-0.6)
    assert s.quadratic([[1.0, -0.6], [-0.6, 1.0]]) == pytest.approx([s.rhs()] * 2, abs=1e-15)
    assert np.allclose(s.quadratic(s.points), s.rhs(), atol=1e-12)


# --- gamma ------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(PRESETS))
def test_gamma_arcs_lie_on_their_conics(name):
    pair, m = preset(name)
    gb = gamma_boundary(m, pair)
    assert max(gb.joins()) <= 1e-9
    for arc in gb.arcs:
        if arc.kind == "ellipse":
            assert np.abs(arc.residual()).max() <= 1e-12


def test_optimal_gr_first_arc_is_line():
    m = family_m(4, 1, 3, 0.31)
    gb = gamma_boundary(m, "gr")
    arc = gb.arcs[0]
    assert arc.kind == "line"
    slope = (arc.end[1] - arc.start[1]) / (arc.end[0] - arc.start[0])
    assert slope == pytest.approx(-angle_set(m).cos_theta_r, abs=1e-12)


def test_projector_region_is_quarter_disc():
    m = family_p(4, 2)
    gb = gamma_boundary(m, "gf")
    assert np.allclose(np.hypot(*gb.arcs[0].points.T), 1.0)
    pts = scatter_dataset(m, "gf", 5000, 0.01, seed=5)
    assert np.all(pts >= -1e-12)
    assert np.all(np.hypot(*pts.T) <= 1 + 1e-12)


def test_identity_region_is_sector_of_sigma():
    m = family_p(4, 4)
    gb = gamma_boundary(m, "gr")
    kinds = [a.kind for a in gb.arcs]
    assert kinds.count("ellipse") == 1
    ell = next(a for a in gb.arcs if a.kind == "ellipse")
    sig = sigma_for(m, "gr")
    assert np.allclose(sig.quadratic(ell.points), sig.rhs(), atol=1e-12)


def test_optimal_gf_has_no_joint_improvement():
    _, m = preset("gf-optimal")
    pts = scatter_dataset(m, "gf", 5000, 0.01, seed=6)
    assert np.all(pts[:, 0] + pts[:, 1] <= 1e-12)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_scatter_inside_gamma_and_sigma(name):
    pair, m = preset(name)
    gb = gamma_boundary(m, pair)
    pts = scatter_dataset(m, pair, 3000, 0.01, seed=7)
    assert gb.contains(pts).all()
    assert sigma_for(m, pair).contains(pts).all()
    assert sigma_for(m, pair).contains(gb.vertices()).all()


def test_containment_rejects_outside_points():
    pair, m = preset("gf-smooth")
    gb = gamma_boundary(m, pair)
    edge = gb.arcs[0].points[len(gb.arcs[0].points) // 2]
    assert gb.contains(0.999 * edge)[0]
    assert not gb.contains(1.001 * edge)[0]
    assert not gb.contains([[1.5, 1.5]])[0]


def test_scatter_is_deterministic():
    a = scatter_dataset(START, "gf", 100, seed=3)
    assert np.array_equal(a, scatter_dataset(START, "gf", 100, seed=3))


def test_changes_vectorized_matches_single():
    eps = sample_admissible_array(START, "gf", 0.01, 10, seed=2)
    many = changes(START, eps, "gf")
    for row, e in zip(many, eps):
        p = normalized_changes(START, e, "gf")
        assert (p.dg, p.dd) == pytest.approx(tuple(row), abs=1e-15)


# --- range curves -----------------------------------------------------------

def test_range_curves_gf():
    curves = {c.family: c for c in coefficient_range_curves(4, "gf", 21)}
    assert np.allclose(curves["m_1_3"].c, -1.0, atol=1e-12)
    for r, g in [(1, 0.4), (2, 0.3), (4, 0.25)]:
        p = curves[f"P_{r}"]
        assert p.g[0] == pytest.approx(g) and p.c[0] == 0.0


def test_range_curves_gr():
    curves = {c.family: c for c in coefficient_range_curves(4, "gr", 21)}
    assert set(f"L_{n}" for n in (1, 2)) <= set(curves)
    # entries reaching zero make the G-R coefficient vanish
    assert np.all(curves["m_1_2"].c == 0.0)
    # L_{d-1} would coincide with the optimal family
    assert np.allclose(curves["m_1_3"].c, -1.0, atol=1e-12)
    assert np.all(curves["L_1"].c > -1.0)


def test_range_curves_validate():
    with pytest.raises(ValueError):
        coefficient_range_curves(1, "gf")


# --- Pearson ----------------------------------------------------------------

def test_pearson_matches_gradient_cosine():
    _, m = preset("gf-smooth")
    assert angle_set(m).c_gf == pytest.approx(-0.6, abs=0.01)
    assert pearson_check(m, 10 ** 5, seed=1) == pytest.approx(angle_set(m).c_gf, abs=0.02)


def test_pearson_requires_smooth_point():
    with pytest.raises(ValueError):
        pearson_check(START)

"""Gradients, constrained steepest directions and the angles between them.

Admissible modifications of a measurement must keep the ordering
``lambda_1 >= lambda_i >= lambda_d >= 0`` to first order. When the
measurement sits on one of those boundaries the raw gradient can point
into the forbidden region, and the steepest admissible direction is
obtained by projecting the gradient onto the boundary face. For the
ordering constraints the projection is an average over the tied block.

Zero vectors stand for "no direction". They appear at the rank-1
projector (``g``), at the identity (``f``, ``r_plus``) and at every
projective measurement (``g_minus``, ``f_minus``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .measurement import (
    DegeneracyProfile,
    Measurement,
    degeneracy_profile,
    is_identity,
    is_projective_rank,
    is_rank_one_projector,
    snap_to_profile,
)


@dataclass(frozen=True, eq=False)
class Gradients:
    grad_g: np.ndarray
    grad_f: np.ndarray
    grad_r: np.ndarray
    mag_g: float
    mag_f: float
    mag_r: float


@dataclass(frozen=True, eq=False)
class DirectionSet:
    grad_g: np.ndarray
    grad_f: np.ndarray
    grad_r: np.ndarray
    mag_g: float
    mag_f: float
    mag_r: float
    g: np.ndarray
    f: np.ndarray
    r: np.ndarray
    g_plus: np.ndarray
    f_plus: np.ndarray
    r_plus: np.ndarray
    g_minus: np.ndarray
    f_minus: np.ndarray
    r_minus: np.ndarray

    def unit(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def vectors(self) -> dict[str, np.ndarray]:
        names = ("g", "f", "r", "g_plus", "f_plus", "r_plus", "g_minus", "f_minus", "r_minus")
        return {k: getattr(self, k) for k in names}


@dataclass(frozen=True)
class AngleSet:
    c_gf: float
    c_gr: float
    c_gf_pp: float
    c_gf_mp: float
    c_gf_pm: float
    c_gf_mm: float
    c_gr_pp: float
    c_gr_mp: float
    c_gr_pm: float
    c_gr_mm: float
    cos_theta_g: float
    cos_theta_f: float
    cos_theta_r: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def quadruple(self, pair: str) -> tuple[float, float, float, float]:
        """Coefficients characterising the four boundary arcs of ``pair``."""
        if pair == "gf":
            return (self.c_gf_pp, -self.c_gf_mp, self.c_gf_mm, -self.c_gf_pm)
        return (self.c_gr_pp, -self.c_gr_mp, self.c_gr_mm, -self.c_gr_pm)


def _normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        return np.zeros_like(v)
    return v / n


def _ratio(num: float, den_sq: float, zero: bool = False) -> float:
    # 0/0 = 0 convention; `zero` forces it where the closed form is singular
    if zero or den_sq <= 0:
        return 0.0
    return float(num / np.sqrt(den_sq))


@dataclass(frozen=True)
class _Terms:
    """Differences of moments, each summed from nonnegative pieces.

    Writing e.g. ``sigma^2 - lambda_1^2`` as the sum of the remaining
    squares avoids cancellation when those entries are tiny.
    """

    s2: float
    tau: float
    rest_top: float       # sigma^2 - lambda_1^2
    rest_bottom: float    # sigma^2 - lambda_d^2
    rest_block: float     # sigma^2 - n1 lambda_1^2
    rest_minblock: float  # sigma^2 - nd lambda_d^2
    spread: float         # d sigma^2 - tau^2
    spread_nz: float      # (d - n0) sigma^2 - tau^2
    cross: float          # tau lambda_1 - sigma^2


def _terms(lam: np.ndarray, prof: DegeneracyProfile | None = None) -> _Terms:
    d = lam.size
    sq = lam * lam
    n1 = prof.n1 if prof else 1
    nd = prof.nd if prof else 1
    n0 = prof.n0 if prof else 0
    nz = lam[:d - n0]
    spread_nz = nz.size * float(np.sum((nz - nz.mean()) ** 2)) if nz.size else 0.0
    return _Terms(
        s2=float(sq.sum()),
        tau=float(lam.sum()),
        rest_top=float(sq[1:].sum()),
        rest_bottom=float(sq[:-1].sum()),
        rest_block=float(sq[n1:].sum()) if n1 < d else 0.0,
        rest_minblock=float(sq[:d - nd].sum()) if nd < d else 0.0,
        spread=d * float(np.sum((lam - lam.mean()) ** 2)),
        spread_nz=spread_nz,
        cross=float(np.sum(lam * (lam[0] - lam))),
    )


def _geometry_input(m: Measurement, prof: DegeneracyProfile | None):
    prof = prof or degeneracy_profile(m)
    return snap_to_profile(m, prof), prof


def gradients(m: Measurement) -> Gradients:
    """Raw gradients of G, F, R and their closed-form magnitudes."""
    lam = m.lambdas
    d = m.d
    t = _terms(lam)
    s2, tau = t.s2, t.tau
    l1, ld = lam[0], lam[-1]
    k = 2.0 / (d + 1)

    grad_g = -k * l1 ** 2 / s2 ** 2 * lam
    grad_g[0] = k * l1 * t.rest_top / s2 ** 2
    # s2 - tau lam_i = sum_j lam_j (lam_j - lam_i)
    grad_f = k * tau / s2 ** 2 * ((lam - lam[:, None]) @ lam)
    grad_r = -2.0 * d * ld ** 2 / s2 ** 2 * lam
    grad_r[-1] = 2.0 * d * ld * t.rest_bottom / s2 ** 2

    mag_g = k * (l1 / s2) * np.sqrt(t.rest_top / s2)
    mag_f = k * (tau / s2) * np.sqrt(t.spread / s2)
    mag_r = 2.0 * d * (ld / s2) * np.sqrt(t.rest_bottom / s2)
    return Gradients(grad_g, grad_f, grad_r, float(mag_g), float(mag_f), float(mag_r))


def unit_gradient_directions(m: Measurement, prof: DegeneracyProfile | None = None):
    """Unit vectors along the three gradients, with the 0/0 = 0 convention."""
    m, prof = _geometry_input(m, prof)
    lam = m.lambdas
    d = m.d
    t = _terms(lam)
    s2, tau = t.s2, t.tau
    l1, ld = lam[0], lam[-1]

    g = np.zeros(d)
    if not is_rank_one_projector(m, prof) and t.rest_top > 0:
        g = -(l1 / s2) * lam
        g[0] = t.rest_top / s2
        g *= np.sqrt(s2 / t.rest_top)

    f = np.zeros(d)
    if not is_identity(m, prof) and t.spread > 0:
        f = ((lam - lam[:, None]) @ lam) / np.sqrt(s2 * t.spread)

    r = np.zeros(d)
    r[-1] = 1.0
    if t.rest_bottom > 0:
        r = -(ld / s2) * lam
        r[-1] = t.rest_bottom / s2
        r *= np.sqrt(s2 / t.rest_bottom)
    return g, f, r


def successive_projection(v: np.ndarray, index_group) -> np.ndarray:
    """Project ``v`` onto the face where the entries of ``index_group`` are tied.

    Equivalent to projecting ``len(index_group) - 1`` times onto the
    successive boundary normals; the closed form is the block average.
    """
    out = np.array(v, dtype=float, copy=True)
    idx = np.arange(out.size)[index_group]
    if idx.size > 1:
        out[idx] = out[idx].mean()
    return out


def top_block(m: Measurement, prof: DegeneracyProfile) -> slice:
    return slice(0, prof.n1)


def bottom_block(m: Measurement, prof: DegeneracyProfile) -> slice:
    return slice(m.d - prof.nd, m.d)


def steepest_ascent(m: Measurement, prof: DegeneracyProfile | None = None):
    """Unit steepest-ascent directions ``(g_plus, f_plus, r_plus)``."""
    m, prof = _geometry_input(m, prof)
    g, f, r = unit_gradient_directions(m, prof)
    if is_identity(m, prof):
        r_plus = np.zeros(m.d)
    else:
        r_plus = _normalized(successive_projection(r, bottom_block(m, prof)))
    return g.copy(), f.copy(), r_plus


def steepest_descent(m: Measurement, prof: DegeneracyProfile | None = None):
    """Unit steepest-descent directions ``(g_minus, f_minus, r_minus)``."""
    m, prof = _geometry_input(m, prof)
    d = m.d
    g, f, r = unit_gradient_directions(m, prof)
    if is_projective_rank(m, prof):
        g_minus = np.zeros(d)
        f_minus = np.zeros(d)
    else:
        g_minus = _normalized(successive_projection(-g, top_block(m, prof)))
        f_minus = -f
        f_minus[d - prof.n0:] = 0.0
        f_minus = _normalized(f_minus)
    r_minus = -r if prof.n0 == 0 else np.zeros(d)
    return g_minus, f_minus, r_minus


def direction_set(m: Measurement, prof: DegeneracyProfile | None = None) -> DirectionSet:
    """Gradients of the measurement as given; unit and steepest directions
    of the measurement with its detected ties made exact."""
    grads = gradients(m)
    m, prof = _geometry_input(m, prof)
    g, f, r = unit_gradient_directions(m, prof)
    g_plus, f_plus, r_plus = steepest_ascent(m, prof)
    g_minus, f_minus, r_minus = steepest_descent(m, prof)
    return DirectionSet(
        grads.grad_g, grads.grad_f, grads.grad_r,
        grads.mag_g, grads.mag_f, grads.mag_r,
        g, f, r, g_plus, f_plus, r_plus, g_minus, f_minus, r_minus,
    )


def boundary_angles(m: Measurement, prof: DegeneracyProfile | None = None):
    """Cosines between each steepest direction and its gradient counterpart."""
    m, prof = _geometry_input(m, prof)
    t = _terms(m.lambdas, prof)
    proj = is_projective_rank(m, prof)

    # p_r (including the rank-1 projector and the identity) gives 0/0 or 0
    cos_g = 0.0
    if not proj and t.rest_top > 0:
        cos_g = np.sqrt(t.rest_block / (prof.n1 * t.rest_top))
    cos_f = 0.0
    if not proj and t.spread > 0:
        cos_f = np.sqrt(t.spread_nz / t.spread)
    cos_r = 0.0
    if not is_identity(m, prof) and t.rest_bottom > 0:
        cos_r = np.sqrt(t.rest_minblock / (prof.nd * t.rest_bottom))
    return float(cos_g), float(cos_f), float(cos_r)


def c_gr_pp_closed(l1: float, ld: float, sigma_sq: float, nd: int, d: int,
                   rest_top: float | None = None, rest_minblock: float | None = None) -> float:
    """Closed-form cosine between the G and R steepest-ascent directions.

    ``rest_top`` and ``rest_minblock`` default to ``sigma_sq - l1**2`` and
    ``sigma_sq - nd * ld**2``; pass them precomputed to avoid cancellation.
    """
    if nd == d:
        return 0.0
    if rest_top is None:
        rest_top = sigma_sq - l1 ** 2
    if rest_minblock is None:
        rest_minblock = sigma_sq - nd * ld ** 2
    return _ratio(-np.sqrt(nd) * l1 * ld, rest_top * rest_minblock, zero=ld == 0)


def angle_set(m: Measurement, prof: DegeneracyProfile | None = None) -> AngleSet:
    """All cosines between steepest directions, from closed forms."""
    m, prof = _geometry_input(m, prof)
    lam = m.lambdas
    d = m.d
    t = _terms(lam, prof)
    l1, ld = lam[0], lam[-1]
    n1, nd = prof.n1, prof.nd
    p1 = is_rank_one_projector(m, prof)
    pd = is_identity(m, prof)
    pr = is_projective_rank(m, prof)

    a = t.cross
    c_gf_pp = _ratio(-a, t.rest_top * t.spread, zero=p1 or pd)
    c_gf_mp = _ratio(np.sqrt(n1) * a, t.rest_block * t.spread, zero=pr)
    c_gf_pm = _ratio(a, t.rest_top * t.spread_nz, zero=pr)
    c_gf_mm = _ratio(-np.sqrt(n1) * a, t.rest_block * t.spread_nz, zero=pr)

    lld = l1 * ld
    c_gr_pp = 0.0 if p1 else c_gr_pp_closed(l1, ld, t.s2, nd, d, t.rest_top, t.rest_minblock)
    c_gr = _ratio(-lld, t.rest_top * t.rest_bottom, zero=p1)
    c_gr_mp = _ratio(np.sqrt(n1 * nd) * lld, t.rest_block * t.rest_minblock, zero=pr or pd)
    c_gr_mm = _ratio(-np.sqrt(n1) * lld, t.rest_block * t.rest_bottom, zero=pr or pd)

    cos_g, cos_f, cos_r = boundary_angles(m, prof)
    return AngleSet(
        c_gf=c_gf_pp, c_gr=c_gr,
        c_gf_pp=c_gf_pp, c_gf_mp=c_gf_mp, c_gf_pm=c_gf_pm, c_gf_mm=c_gf_mm,
        c_gr_pp=c_gr_pp, c_gr_mp=c_gr_mp, c_gr_pm=-c_gr, c_gr_mm=c_gr_mm,
        cos_theta_g=cos_g, cos_theta_f=cos_f, cos_theta_r=cos_r,
    )


def angles_from_directions(ds: DirectionSet) -> AngleSet:
    """Same cosines as :func:`angle_set`, by dot products of the vectors."""
    return AngleSet(
        c_gf=float(ds.g @ ds.f), c_gr=float(ds.g @ ds.r),
        c_gf_pp=float(ds.g_plus @ ds.f_plus), c_gf_mp=float(ds.g_minus @ ds.f_plus),
        c_gf_pm=float(ds.g_plus @ ds.f_minus), c_gf_mm=float(ds.g_minus @ ds.f_minus),
        c_gr_pp=float(ds.g_plus @ ds.r_plus), c_gr_mp=float(ds.g_minus @ ds.r_plus),
        c_gr_pm=float(ds.g_plus @ ds.r_minus), c_gr_mm=float(ds.g_minus @ ds.r_minus),
        cos_theta_g=float(-ds.g_minus @ ds.g), cos_theta_f=float(-ds.f_minus @ ds.f),
        cos_theta_r=float(ds.r_plus @ ds.r),
    )

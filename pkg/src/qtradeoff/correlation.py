"""Correlation between information and disturbance changes.

An admissible modification ``eps`` of a measurement moves the point
``(dg, dd) = (eps_hat . g, eps_hat . d)`` on the normalized change plane,
where ``d`` is the unit gradient of F or R. Without constraints the
points fill the ellipse Sigma set by the gradient cosine. The ordering
constraints cut this down to the region bounded by Gamma: four arcs
through the points reached by the steepest ascent/descent directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import AngleSet, DirectionSet, angle_set, direction_set
from .measurement import (
    DegeneracyProfile,
    Measurement,
    canonicalize,
    degeneracy_profile,
    family_m,
    family_p,
)
from .geometry import c_gr_pp_closed
from .sampling import DEFAULT_CHUNK, map_chunks, uniform_sphere

PAIRS = ("gf", "gr")
MAX_ATTEMPTS_PER_SAMPLE = 10 ** 6
ARC_POINTS = 256

# Figure archetypes (d = 4). Each reproduces the coefficient quadruple
# quoted for its panel to two decimals; see tests/test_correlation.py.
PRESETS: dict[str, tuple[str, tuple[float, ...]]] = {
    "gf-smooth": ("gf", (1.0, 0.4, 0.1, 0.05)),
    "gf-optimal": ("gf", (1.0, 0.5, 0.5, 0.5)),
    "gf-n1-2": ("gf", (1.0, 1.0, 0.5, 0.2)),
    "gf-n0-1": ("gf", (1.0, 0.7, 0.5, 0.0)),
    "gf-n1-2-n0-1": ("gf", (1.0, 1.0, 0.5, 0.0)),
    "gf-pr": ("gf", (1.0, 1.0, 0.0, 0.0)),
    "gr-smooth": ("gr", (1.0, 0.45, 0.25, 0.1)),
    "gr-nd-2": ("gr", (1.0, 0.7, 0.5, 0.5)),
    "gr-n1-nd-2": ("gr", (1.0, 1.0, 0.5, 0.5)),
    "gr-optimal": ("gr", (1.0, 0.5, 0.5, 0.5)),
    "gr-ld-0": ("gr", (1.0, 0.7, 0.5, 0.0)),
    "gr-pd": ("gr", (1.0, 1.0, 1.0, 1.0)),
}


class RejectionBudgetError(RuntimeError):
    """Rejection sampling ran out of attempts."""


def check_pair(pair: str) -> str:
    pair = pair.lower()
    if pair not in PAIRS:
        raise ValueError(f"pair must be one of {PAIRS}, got {pair!r}")
    return pair


def preset(name: str) -> tuple[str, Measurement]:
    pair, lam = PRESETS[name]
    return pair, canonicalize(lam)


@dataclass(frozen=True, eq=False)
class Perturbation:
    eps: np.ndarray
    norm: float


@dataclass(frozen=True)
class ChangePoint:
    dg: float
    dd: float


def admissible_mask(m: Measurement, pair: str, eps: np.ndarray,
                    prof: DegeneracyProfile | None = None) -> np.ndarray:
    """Rows of ``eps`` that keep the active ordering constraints.

    The maximum must stay the maximum and zeros cannot go negative. For
    the G-R pair the minimum must also stay the minimum; for G-F the
    lower entries may be freely rearranged.
    """
    pair = check_pair(pair)
    prof = prof or degeneracy_profile(m)
    eps = np.atleast_2d(eps)
    d = m.d
    ok = np.ones(eps.shape[0], dtype=bool)
    if prof.n1 > 1:
        ok &= np.all(eps[:, :1] >= eps[:, 1:prof.n1], axis=1)
    if prof.n0 > 0:
        ok &= np.all(eps[:, d - prof.n0:] >= 0, axis=1)
    if pair == "gr" and prof.nd > 1:
        ok &= np.all(eps[:, d - prof.nd:d - 1] >= eps[:, d - 1:], axis=1)
    return ok


def sample_admissible_array(m: Measurement, pair: str, eps_norm: float, count: int,
                            seed: int = 0, max_attempts: int = MAX_ATTEMPTS_PER_SAMPLE,
                            chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> np.ndarray:
    """``(count, d)`` array of admissible modifications of norm ``eps_norm``.

    Directions are uniform on the sphere, rejected until admissible.
    """
    pair = check_pair(pair)
    if eps_norm <= 0:
        raise ValueError("eps_norm must be positive")
    prof = degeneracy_profile(m)
    d = m.d

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty((n, d))
        filled = 0
        attempts = 0
        budget = max_attempts * n
        rate = 1.0
        while filled < n:
            if attempts >= budget:
                raise RejectionBudgetError(
                    f"accepted {filled}/{n} samples after {attempts} attempts")
            want = n - filled
            batch = int(min(max(64, 1.2 * want / rate), 1 << 20, budget - attempts))
            cand = uniform_sphere(rng, batch, d)
            attempts += batch
            keep = cand[admissible_mask(m, pair, cand, prof)]
            rate = max(keep.shape[0] / batch, 1e-6)
            take = min(keep.shape[0], want)
            out[filled:filled + take] = keep[:take]
            filled += take
        return out

    parts = map_chunks(draw, seed, count, chunk_size, workers)
    if not parts:
        return np.empty((0, d))
    return eps_norm * np.concatenate(parts)


def sample_admissible(m: Measurement, pair: str, eps_norm: float, count: int,
                      seed: int = 0, **kw) -> list[Perturbation]:
    arr = sample_admissible_array(m, pair, eps_norm, count, seed, **kw)
    return [Perturbation(row, eps_norm) for row in arr]


def _disturbance_unit(ds: DirectionSet, pair: str) -> np.ndarray:
    return ds.f if pair == "gf" else ds.r


def changes(m: Measurement, eps: np.ndarray, pair: str,
            ds: DirectionSet | None = None) -> np.ndarray:
    """Normalized changes ``(dg, dd)`` for every row of ``eps``."""
    pair = check_pair(pair)
    ds = ds or direction_set(m)
    eps = np.atleast_2d(eps)
    unit = eps / np.linalg.norm(eps, axis=1, keepdims=True)
    return np.column_stack([unit @ ds.g, unit @ _disturbance_unit(ds, pair)])


def normalized_changes(m: Measurement, eps, pair: str) -> ChangePoint:
    vec = eps.eps if isinstance(eps, Perturbation) else np.asarray(eps, dtype=float)
    dg, dd = changes(m, vec, pair)[0]
    return ChangePoint(float(dg), float(dd))


def scatter_dataset(m: Measurement, pair: str, count: int = 250, eps_norm: float = 0.01,
                    seed: int = 0, **kw) -> np.ndarray:
    """``(count, 2)`` array of normalized changes for random admissible modifications."""
    eps = sample_admissible_array(m, pair, eps_norm, count, seed, **kw)
    return changes(m, eps, pair)


# --- ellipses and arcs -------------------------------------------------------

def _conic_form(pts: np.ndarray, c: float, cx: float = 1.0, cy: float = 1.0) -> np.ndarray:
    x = pts[..., 0] / cx
    y = pts[..., 1] / cy
    return x * x + y * y - 2.0 * c * x * y


def _sector_contains(theta: np.ndarray, start: float, sweep: float, tol: float = 1e-12):
    rel = np.mod(theta - start, 2 * np.pi)
    return (rel <= sweep + tol) | (rel >= 2 * np.pi - tol)


def _sweep(pts: np.ndarray) -> tuple[float, float] | None:
    """Counter-clockwise angular coverage ``(start, sweep)`` of a polyline around the origin."""
    a, b = pts[0], pts[-1]
    if np.hypot(*a) < 1e-14 or np.hypot(*b) < 1e-14:
        return None
    cross = a[0] * b[1] - a[1] * b[0]
    if abs(cross) < 1e-14 * np.hypot(*a) * np.hypot(*b):
        return None
    ta, tb = np.arctan2(a[1], a[0]), np.arctan2(b[1], b[0])
    if cross > 0:
        return ta, float(np.mod(tb - ta, 2 * np.pi))
    return tb, float(np.mod(ta - tb, 2 * np.pi))


@dataclass(frozen=True, eq=False)
class SigmaEllipse:
    """``x^2 + y^2 - 2 c x y = 1 - c^2``: tilted by -45 degrees, a line when c = -1."""

    coefficient: float
    points: np.ndarray

    def quadratic(self, pts) -> np.ndarray:
        return _conic_form(np.asarray(pts, dtype=float), self.coefficient)

    def rhs(self) -> float:
        return 1.0 - self.coefficient ** 2

    def contains(self, pts, slack: float = 1e-9) -> np.ndarray:
        return self.quadratic(pts) <= self.rhs() + slack


def sigma_ellipse(c: float, n_points: int = 4 * ARC_POINTS) -> SigmaEllipse:
    """Unconstrained region boundary for gradient cosine ``c``."""
    if not -1.0 - 1e-12 <= c <= 1e-12:
        raise ValueError("ellipse coefficient must lie in [-1, 0]")
    c = float(np.clip(c, -1.0, 0.0))
    t = np.linspace(0.0, 2 * np.pi, n_points)
    # principal axes along (1, 1) and (1, -1)
    u = np.sqrt(1.0 + c) * np.cos(t)
    v = np.sqrt(1.0 - c) * np.sin(t)
    pts = np.column_stack([(u + v) / np.sqrt(2.0), (u - v) / np.sqrt(2.0)])
    return SigmaEllipse(c, pts)


@dataclass(frozen=True, eq=False)
class RegionArc:
    """One of the four pieces of Gamma.

    ``coefficient`` and the compression factors describe the ellipse
    ``(x/cx)^2 + (y/cy)^2 - 2 c (x/cx)(y/cy) = 1 - c^2`` that carries the
    arc; ``kind`` is ``"line"`` or ``"point"`` where the arc collapses.
    """

    segment: str
    coefficient: float
    compress_x: float
    compress_y: float
    kind: str
    t: np.ndarray
    points: np.ndarray

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def residual(self, pts=None) -> np.ndarray:
        pts = self.points if pts is None else np.asarray(pts, dtype=float)
        c = self.coefficient
        return _conic_form(pts, c, self.compress_x, self.compress_y) - (1.0 - c * c)

    def radius(self, theta: np.ndarray) -> np.ndarray:
        """Distance from the origin to the arc's carrier along angle ``theta``."""
        u = np.column_stack([np.cos(theta), np.sin(theta)])
        if self.kind == "ellipse":
            c = self.coefficient
            q = _conic_form(u, c, self.compress_x, self.compress_y)
            return np.sqrt((1.0 - c * c) / q)
        p, q = self.start, self.end
        e = q - p
        den = u[:, 0] * e[1] - u[:, 1] * e[0]
        num = p[0] * e[1] - p[1] * e[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den != 0, num / den, np.inf)


def _segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to every segment ``a[j] -> b[j]``; min over segments."""
    ab = b - a
    len2 = np.einsum("ij,ij->i", ab, ab)
    best = np.full(pts.shape[0], np.inf)
    for lo in range(0, a.shape[0], 512):
        sa, sab, sl = a[lo:lo + 512], ab[lo:lo + 512], len2[lo:lo + 512]
        ap = pts[:, None, :] - sa[None, :, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(sl > 0, np.einsum("pjk,jk->pj", ap, sab) / sl, 0.0)
        s = np.clip(s, 0.0, 1.0)
        diff = ap - s[..., None] * sab[None, :, :]
        best = np.minimum(best, np.sqrt(np.einsum("pjk,pjk->pj", diff, diff)).min(axis=1))
    return best


@dataclass(frozen=True, eq=False)
class GammaBoundary:
    pair: str
    arcs: list[RegionArc]
    corners: dict[str, np.ndarray] = field(default_factory=dict)

    def vertices(self) -> np.ndarray:
        return np.concatenate([a.points for a in self.arcs])

    def joins(self) -> list[float]:
        """Gaps between the end of each arc and the start of the next."""
        n = len(self.arcs)
        return [float(np.linalg.norm(self.arcs[i].end - self.arcs[(i + 1) % n].start))
                for i in range(n)]

    def boundary_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = np.concatenate([arc.points[:-1] for arc in self.arcs if arc.points.shape[0] > 1]
                           + [arc.points[:1] for arc in self.arcs if arc.points.shape[0] == 1])
        b = np.concatenate([arc.points[1:] for arc in self.arcs if arc.points.shape[0] > 1]
                           + [arc.points[:1] for arc in self.arcs if arc.points.shape[0] == 1])
        return _segment_distance(pts, a, b)

    def contains(self, pts, slack: float = 1e-9) -> np.ndarray:
        """Membership in the closed region bounded by Gamma.

        The region is star-shaped about the origin, so a point is inside
        when it is no farther out than the arc covering its direction.
        Curved arcs are tested against their exact ellipse, not the
        polyline. Points within ``slack`` of the boundary count as inside,
        which also covers regions of zero area.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rad = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        inside = rad <= slack
        for arc in self.arcs:
            if arc.kind == "point":
                continue
            cover = _sector_contains_arc(arc)
            if cover is None:
                continue
            start, sweep = cover
            sel = ~inside & _sector_contains(theta, start, sweep)
            if np.any(sel):
                inside[sel] = rad[sel] <= arc.radius(theta[sel]) + slack
        rest = ~inside
        if np.any(rest):
            inside[rest] = self.boundary_distance(pts[rest]) <= slack
        return inside


def _sector_contains_arc(arc: RegionArc):
    return _sweep(arc.points)


def _arc_points(a: np.ndarray, b: np.ndarray, g: np.ndarray, dvec: np.ndarray,
                n_points: int) -> tuple[str, np.ndarray, np.ndarray]:
    """Trace the arc generated by ``eps = a cos(phi) + b sin(phi)``."""
    def image(v):
        n = np.linalg.norm(v)
        return np.zeros(2) if n == 0 else np.array([v @ g, v @ dvec]) / n

    p, q = image(a), image(b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    collinear = na > 0 and nb > 0 and abs(a @ b) / (na * nb) >= 1 - 1e-12
    if na == 0 or nb == 0 or collinear:
        if np.linalg.norm(q - p) <= 1e-12:
            return "point", np.zeros(1), p[None, :]
        t = np.linspace(0.0, 1.0, n_points)
        return "line", t, p[None, :] + t[:, None] * (q - p)[None, :]
    t = np.linspace(0.0, 1.0, n_points)
    phi = 0.5 * np.pi * t
    eps = np.cos(phi)[:, None] * a[None, :] + np.sin(phi)[:, None] * b[None, :]
    eps /= np.linalg.norm(eps, axis=1, keepdims=True)
    pts = np.column_stack([eps @ g, eps @ dvec])
    pts[0], pts[-1] = p, q
    return "ellipse", t, pts


def gamma_boundary(m: Measurement, pair: str, n_points: int = ARC_POINTS,
                   ds: DirectionSet | None = None, angles: AngleSet | None = None
                   ) -> GammaBoundary:
    """The four arcs bounding the constrained change region of ``pair``."""
    pair = check_pair(pair)
    ds = ds or direction_set(m)
    a = angles or angle_set(m)
    name = "F" if pair == "gf" else "R"
    if pair == "gf":
        d_plus, d_minus, dvec = ds.f_plus, ds.f_minus, ds.f
        params = [(a.c_gf_pp, 1.0, 1.0), (-a.c_gf_mp, a.cos_theta_g, 1.0),
                  (a.c_gf_mm, a.cos_theta_g, a.cos_theta_f), (-a.c_gf_pm, 1.0, a.cos_theta_f)]
    else:
        d_plus, d_minus, dvec = ds.r_plus, ds.r_minus, ds.r
        params = [(a.c_gr_pp, 1.0, a.cos_theta_r), (-a.c_gr_mp, a.cos_theta_g, a.cos_theta_r),
                  (a.c_gr_mm, a.cos_theta_g, 1.0), (-a.c_gr_pm, 1.0, 1.0)]
    gens = [
        (f"G+->{name}+", ds.g_plus, d_plus),
        (f"{name}+->G-", d_plus, ds.g_minus),
        (f"G-->{name}-", ds.g_minus, d_minus),
        (f"{name}-->G+", d_minus, ds.g_plus),
    ]
    arcs = []
    for (seg, u, v), (coef, cx, cy) in zip(gens, params):
        kind, t, pts = _arc_points(u, v, ds.g, dvec, n_points)
        arcs.append(RegionArc(seg, float(coef), float(cx), float(cy), kind, t, pts))
    corners = {"G+": arcs[0].start, f"{name}+": arcs[1].start,
               "G-": arcs[2].start, f"{name}-": arcs[3].start}
    return GammaBoundary(pair, arcs, corners)


def sigma_for(m: Measurement, pair: str, angles: AngleSet | None = None,
              n_points: int = 4 * ARC_POINTS) -> SigmaEllipse:
    a = angles or angle_set(m)
    return sigma_ellipse(a.c_gf if check_pair(pair) == "gf" else a.c_gr, n_points)


# --- range curves and the Pearson property ----------------------------------

@dataclass(frozen=True, eq=False)
class RangeCurve:
    family: str
    param: np.ndarray
    g: np.ndarray
    c: np.ndarray


def coefficient_range_curves(d: int, pair: str, grid: int = 101) -> list[RangeCurve]:
    """``(G, C++)`` along every fundamental family, plus the P_r points.

    For the G-R pair the limit lines ``L_n`` evaluate the optimal family
    with the bottom degeneracy replaced by ``n``.
    """
    from .measurement import metrics

    pair = check_pair(pair)
    if d < 2 or grid < 2:
        raise ValueError("need d >= 2 and grid >= 2")
    lams = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    attr = "c_gf_pp" if pair == "gf" else "c_gr_pp"
    curves = []
    for k in range(1, d):
        for l in range(1, d - k + 1):
            gs, cs = [], []
            for lam in lams:
                m = family_m(d, k, l, lam)
                gs.append(metrics(m).g)
                cs.append(getattr(angle_set(m), attr))
            curves.append(RangeCurve(f"m_{k}_{l}", lams.copy(), np.array(gs), np.array(cs)))
    if pair == "gr":
        for n in range(1, d - 1):
            gs, cs = [], []
            for lam in lams:
                m = family_m(d, 1, d - 1, lam)
                gs.append(metrics(m).g)
                cs.append(c_gr_pp_closed(1.0, lam, m.sigma_sq, n, d))
            curves.append(RangeCurve(f"L_{n}", lams.copy(), np.array(gs), np.array(cs)))
    for r in range(1, d + 1):
        m = family_p(d, r)
        curves.append(RangeCurve(f"P_{r}", np.array([float(r)]), np.array([metrics(m).g]),
                                 np.array([getattr(angle_set(m), attr)])))
    return curves


def pearson_check(m: Measurement, count: int = 10 ** 5, eps_norm: float = 0.01,
                  seed: int = 0) -> float:
    """Sample Pearson coefficient of ``(dg, df)`` under isotropic modifications.

    Only meaningful away from the G-F boundaries (n1 = 1, n0 = 0), where
    it converges to the gradient cosine.
    """
    prof = degeneracy_profile(m)
    if prof.n1 != 1 or prof.n0 != 0:
        raise ValueError("Pearson property needs n1 = 1 and n0 = 0")
    pts = scatter_dataset(m, "gf", count, eps_norm, seed)
    return float(np.corrcoef(pts[:, 0], pts[:, 1])[0, 1])

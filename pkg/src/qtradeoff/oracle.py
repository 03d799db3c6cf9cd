"""Independent numerical checks of the closed forms.

Nothing here reuses the analytic machinery it audits: fidelities are
re-estimated by sampling random pure states, gradients by central
differences, steepest directions by brute-force search, and region
membership by a polygon test on a densely traced boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import gamma_boundary, scatter_dataset, sigma_for
from .measurement import Measurement, metrics
from .sampling import DEFAULT_CHUNK, map_chunks, uniform_sphere


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int

    def z_score(self, exact: float) -> float:
        diff = self.value - exact
        if self.std_error == 0:
            return 0.0 if abs(diff) <= 1e-12 else float(np.copysign(np.inf, diff))
        return diff / self.std_error


@dataclass(frozen=True)
class McMetrics:
    p: McEstimate
    g: McEstimate
    f: McEstimate
    r: McEstimate

    def as_dict(self) -> dict[str, McEstimate]:
        return {"p": self.p, "G": self.g, "F": self.f, "R": self.r}


def haar_states(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` Haar-random pure states in ``C^d`` as rows."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _ratio_estimate(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """``mean(a) / mean(b)`` and its delta-method standard error."""
    n = a.size
    ma, mb = a.mean(), b.mean()
    r = ma / mb
    resid = a - r * b
    var = resid.var(ddof=1) if n > 1 else 0.0
    return float(r), float(np.sqrt(var / n) / abs(mb))


def _mean_estimate(a: np.ndarray) -> tuple[float, float]:
    n = a.size
    se = a.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
    return float(a.mean()), float(se)


def haar_mc_metrics(m: Measurement, samples: int = 10 ** 5, seed: int = 0,
                    chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> McMetrics:
    """Estimate p, G, F and R by averaging over random input states.

    States are drawn in the eigenbasis of the measurement operator, so
    with ``q_i = |psi_i|^2`` the outcome probability is ``sum lam_i^2 q_i``,
    the best guess after the outcome is the first basis state, and the
    post-measurement overlap is ``sum lam_i q_i``.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lam = np.asarray(m.lambdas)
    lam2 = lam * lam

    def draw(rng, n):
        q = np.abs(haar_states(rng, n, lam.size)) ** 2
        return q @ lam2, q[:, 0], q @ lam

    parts = map_chunks(draw, seed, samples, chunk_size, workers)
    prob = np.concatenate([p[0] for p in parts])
    q1 = np.concatenate([p[1] for p in parts])
    amp = np.concatenate([p[2] for p in parts])

    p_val, p_se = _mean_estimate(prob)
    g_val, g_se = _ratio_estimate(prob * q1, prob)
    f_val, f_se = _ratio_estimate(amp * amp, prob)
    # reversal succeeds at most with the smallest eigenvalue of M^dag M,
    # relative to the average probability of the outcome
    floor = reversal_floor(m)
    r_val = floor / p_val
    r_se = floor * p_se / p_val ** 2
    n = prob.size
    return McMetrics(McEstimate(p_val, p_se, n), McEstimate(g_val, g_se, n),
                     McEstimate(f_val, f_se, n), McEstimate(r_val, r_se, n))


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def reversal_floor(m: Measurement, seed: int = 0) -> float:
    """``min over psi of <psi|M^dag M|psi>`` for ``M = U diag(lam) V``.

    Random unitaries are applied so the minimum is found from a generic
    operator rather than read off the diagonal.
    """
    rng = np.random.default_rng(seed)
    d = m.d
    op = haar_unitary(rng, d) @ np.diag(m.lambdas) @ haar_unitary(rng, d)
    eig = np.linalg.eigvalsh(op.conj().T @ op)
    # rounding noise from the unitaries is of order 1e-16 * largest eigenvalue
    return float(eig[0]) if eig[0] > 1e-12 * eig[-1] else 0.0


# --- gradients ---------------------------------------------------------------

def _raw_metrics(lam: np.ndarray) -> np.ndarray:
    """(G, F, R) from the index-based formulas, valid for unsorted input."""
    d = lam.size
    s2 = lam @ lam
    tau = lam.sum()
    return np.array([(1 + lam[0] ** 2 / s2) / (d + 1),
                     (1 + tau ** 2 / s2) / (d + 1),
                     d * lam[-1] ** 2 / s2])


def finite_difference_gradients(m: Measurement, h: float = 1e-6
                                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central-difference gradients of G, F and R.

    Raises ``ValueError`` when neighbouring singular values are within
    ``10 h`` of each other, where the ordering is not locally stable.
    """
    lam = np.asarray(m.lambdas, dtype=float)
    if np.any(np.abs(np.diff(lam)) <= 10 * h):
        raise ValueError("singular values too close for finite differences")
    d = lam.size
    out = np.empty((3, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[:, i] = (_raw_metrics(lam + e) - _raw_metrics(lam - e)) / (2 * h)
    return out[0], out[1], out[2]


def _first_order(lam: np.ndarray, target: str) -> np.ndarray:
    """Derivative of the target metric, written out from its definition."""
    d = lam.size
    s2 = lam @ lam
    tau = lam.sum()
    k = 2.0 / (d + 1)
    if target == "G":
        v = -k * lam[0] ** 2 * lam / s2 ** 2
        v[0] += k * lam[0] / s2
        return v
    if target == "F":
        return k * (tau / s2) * (1.0 - tau * lam / s2)
    v = -2.0 * d * lam[-1] ** 2 * lam / s2 ** 2
    v[-1] += 2.0 * d * lam[-1] / s2
    return v


def _keeps_order(lam: np.ndarray, dirs: np.ndarray, target: str) -> np.ndarray:
    """Directions whose short step keeps the top entry on top, no entry
    negative, and (for R) the last entry at the bottom."""
    pos = np.diff(lam)[np.diff(lam) != 0]
    scales = [abs(x) for x in pos] + [x for x in lam if x > 0]
    t = 0.25 * min(scales)
    moved = lam[None, :] + t * dirs
    ok = np.all(moved[:, :1] >= moved[:, 1:], axis=1)
    ok &= np.all(moved >= 0, axis=1)
    if target == "R":
        ok &= np.all(moved[:, :-1] >= moved[:, -1:], axis=1)
    return ok


@dataclass(frozen=True, eq=False)
class SteepestResult:
    direction: np.ndarray
    value: float
    accepted: int


def brute_force_steepest(m: Measurement, target: str, sense: str = "ascent",
                         dirs: int = 10 ** 5, seed: int = 0) -> SteepestResult:
    """Best sampled admissible unit direction for one metric.

    ``value`` is the first-order rate of change along the winner. A zero
    vector with value 0 is returned when no admissible direction changes
    the metric in the requested sense.
    """
    target = target.upper()
    if target not in ("G", "F", "R"):
        raise ValueError("target must be G, F or R")
    if sense not in ("ascent", "descent"):
        raise ValueError("sense must be 'ascent' or 'descent'")
    lam = np.asarray(m.lambdas, dtype=float)
    grad = _first_order(lam, target)
    sign = 1.0 if sense == "ascent" else -1.0

    def search(rng, n):
        cand = uniform_sphere(rng, n, lam.size)
        cand = cand[_keeps_order(lam, cand, target)]
        if cand.shape[0] == 0:
            return np.zeros(lam.size), -np.inf, 0
        rate = sign * (cand @ grad)
        j = int(np.argmax(rate))
        return cand[j], float(rate[j]), cand.shape[0]

    best_dir, best, accepted = np.zeros(lam.size), -np.inf, 0
    for vec, rate, n in map_chunks(search, seed, dirs):
        accepted += n
        if rate > best:
            best_dir, best = vec, rate
    if best <= 0:
        return SteepestResult(np.zeros(lam.size), 0.0, accepted)
    return SteepestResult(best_dir, sign * best, accepted)


# --- regions ----------------------------------------------------------------

def _inside_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting against a closed polygon."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    out = np.empty(pts.shape[0], dtype=bool)
    for lo in range(0, pts.shape[0], 512):
        x = pts[lo:lo + 512, 0][:, None]
        y = pts[lo:lo + 512, 1][:, None]
        cond = (a[None, :, 1] > y) != (b[None, :, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = a[None, :, 0] + (y - a[None, :, 1]) * (b[None, :, 0] - a[None, :, 0]) \
                / (b[None, :, 1] - a[None, :, 1])
        out[lo:lo + 512] = (np.count_nonzero(cond & (x < xc), axis=1) % 2) == 1
    return out


def _distance_to_polyline(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    len2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    best = np.full(pts.shape[0], np.inf)
    for lo in range(0, pts.shape[0], 256):
        p = pts[lo:lo + 256]
        ap = p[:, None, :] - a[None, :, :]
        s = np.clip(np.einsum("pjk,jk->pj", ap, ab) / len2, 0.0, 1.0)
        diff = ap - s[..., None] * ab[None, :, :]
        best[lo:lo + 256] = np.sqrt(np.einsum("pjk,pjk->pj", diff, diff)).min(axis=1)
    return best


@dataclass(frozen=True)
class RegionReport:
    points: int
    outside_gamma: int
    vertices: int
    outside_sigma: int
    slack: float

    @property
    def clean(self) -> bool:
        return self.outside_gamma == 0 and self.outside_sigma == 0


def region_membership_check(m: Measurement, pair: str, points: int = 10 ** 4,
                            seed: int = 0, eps_norm: float = 0.01,
                            trace: int = 2048, slack: float = 1e-9) -> RegionReport:
    """Audit sampled change points against a dense trace of the boundary.

    Chords of the traced polygon cut slightly inside the curved arcs;
    the tolerance is widened by the largest such gap, measured by tracing
    again at twice the resolution.
    """
    fine = gamma_boundary(m, pair, n_points=2 * trace - 1).arcs
    coarse_arcs = gamma_boundary(m, pair, n_points=trace).arcs
    poly = np.concatenate([a.points[:-1] if a.points.shape[0] > 1 else a.points
                           for a in coarse_arcs])
    sagitta = 0.0
    for arc in fine:
        if arc.points.shape[0] < 3:
            continue
        # odd samples of the fine trace sit midway along each coarse chord
        a, mid, b = arc.points[0:-1:2], arc.points[1::2], arc.points[2::2]
        ab = b - a
        len2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
        s = np.clip(np.einsum("ij,ij->i", mid - a, ab) / len2, 0.0, 1.0)
        gap = np.linalg.norm(mid - a - s[:, None] * ab, axis=1)
        sagitta = max(sagitta, float(gap.max()))
    tol = slack + sagitta

    pts = scatter_dataset(m, pair, points, eps_norm, seed)
    if poly.shape[0] >= 3:
        inside = _inside_polygon(pts, poly)
    else:
        inside = np.zeros(pts.shape[0], dtype=bool)
    rest = ~inside
    if np.any(rest):
        inside[rest] = _distance_to_polyline(pts[rest], poly) <= tol
    sigma = sigma_for(m, pair)
    verts = np.concatenate([a.points for a in coarse_arcs])
    return RegionReport(points=pts.shape[0], outside_gamma=int(np.count_nonzero(~inside)),
                        vertices=verts.shape[0],
                        outside_sigma=int(np.count_nonzero(~sigma.contains(verts, slack))),
                        slack=tol)


def closed_form_metrics(m: Measurement) -> dict[str, float]:
    met = metrics(m)
    return {"p": m.sigma_sq / m.d, "G": met.g, "F": met.f, "R": met.r}

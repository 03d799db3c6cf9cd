"""Iterative improvement of a measurement.

Each step moves the singular values along ``g_plus + d_plus``, which
raises the information and lowers the disturbance (raises F or R) at
equal rates. The rate is the improvability ``1 + C++``; it vanishes on
the optimal family, where the iteration stops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import check_pair, sample_admissible_array
from .geometry import angle_set, direction_set
from .measurement import (
    Measurement,
    canonicalize,
    degeneracy_profile,
    is_singular_point,
    metrics,
)

RENORMALIZED = "renormalized"
BOUNDARY_LANDED = "boundary_landed"
CONVERGED = "converged"

DEFAULT_CONV_TOL = 1e-8
DEFAULT_MAX_ITER = 10 ** 5


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    iteration: int
    lambdas: np.ndarray
    metric_g: float
    metric_d: float
    improvability: float
    nd: int
    events: frozenset = frozenset()

    def with_events(self, *extra: str) -> TrajectoryRecord:
        return TrajectoryRecord(self.iteration, self.lambdas, self.metric_g, self.metric_d,
                                self.improvability, self.nd, self.events | set(extra))


def _c_pp(m: Measurement, pair: str) -> float:
    a = angle_set(m)
    return a.c_gf_pp if pair == "gf" else a.c_gr_pp


def improvability(m: Measurement, pair: str) -> float:
    """``1 + C++`` for the pair, clipped to [0, 2].

    At the rank-one projector and the identity this is 1 by convention,
    although neither can be improved; see :func:`is_singular_point`.
    """
    pair = check_pair(pair)
    return float(np.clip(1.0 + _c_pp(m, pair), 0.0, 2.0))


def record(m: Measurement, pair: str, iteration: int, events=()) -> TrajectoryRecord:
    pair = check_pair(pair)
    met = metrics(m)
    return TrajectoryRecord(
        iteration=iteration,
        lambdas=m.lambdas,
        metric_g=met.g,
        metric_d=met.f if pair == "gf" else met.r,
        improvability=improvability(m, pair),
        nd=degeneracy_profile(m).nd,
        events=frozenset(events),
    )


def improvement_direction(m: Measurement, pair: str) -> np.ndarray:
    ds = direction_set(m)
    return ds.g_plus + (ds.f_plus if check_pair(pair) == "gf" else ds.r_plus)


def _landing_fraction(lam: np.ndarray, delta: np.ndarray, nd: int) -> float | None:
    """Smallest step fraction at which an entry above the bottom block meets it."""
    d = lam.size
    lo = d - nd
    above = np.arange(lo)
    closing = delta[above] < delta[-1]
    if not np.any(closing):
        return None
    idx = above[closing]
    t = (lam[idx] - lam[-1]) / (delta[-1] - delta[idx])
    t_min = float(t.min())
    return t_min if t_min < 1.0 else None


def improvement_step(m: Measurement, pair: str, eps: float, iteration: int = 1
                     ) -> tuple[Measurement, TrajectoryRecord]:
    """One fixed-size improving modification.

    For the G-R pair an entry that would drop below the minimum block is
    instead stopped exactly on it, which enlarges the block by one.
    """
    pair = check_pair(pair)
    if not eps > 0:
        raise ValueError("eps must be positive")
    prof = degeneracy_profile(m)
    if is_singular_point(m, prof):
        return m, record(m, pair, iteration, {CONVERGED})
    events = set()
    lam = m.lambdas.copy()
    delta = eps * improvement_direction(m, pair)
    if pair == "gr":
        t = _landing_fraction(lam, delta, prof.nd)
        if t is not None:
            lam = lam + t * delta
            block = slice(m.d - prof.nd - 1, m.d)
            lam[block] = lam[block].mean()
            events.add(BOUNDARY_LANDED)
        else:
            lam = lam + delta
    else:
        lam = lam + delta
    if lam.max() > 1.0:
        events.add(RENORMALIZED)
    new = canonicalize(lam, allow_rescale=True)
    if pair == "gr" and BOUNDARY_LANDED in events:
        # keep the enlarged block exactly tied after rescaling
        vec = new.lambdas.copy()
        block = slice(m.d - prof.nd - 1, m.d)
        vec[block] = vec[block].mean()
        new = Measurement(vec)
    return new, record(new, pair, iteration, events)


def improve(m: Measurement, pair: str, eps: float, max_iter: int = DEFAULT_MAX_ITER,
            conv_tol: float = DEFAULT_CONV_TOL) -> list[TrajectoryRecord]:
    """Iterate :func:`improvement_step` until the improvability is at most ``conv_tol``.

    The first record (iteration 0) is the starting point. The last record
    carries a ``converged`` event when the tolerance was reached, or when
    the run started at a singular point.
    """
    pair = check_pair(pair)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if max_iter < 0:
        raise ValueError("max_iter must be nonnegative")
    rec = record(m, pair, 0)
    traj = [rec]
    if rec.improvability <= conv_tol or is_singular_point(m):
        traj[-1] = rec.with_events(CONVERGED)
        return traj
    for it in range(1, max_iter + 1):
        m, rec = improvement_step(m, pair, eps, it)
        if rec.improvability <= conv_tol:
            rec = rec.with_events(CONVERGED)
        traj.append(rec)
        if CONVERGED in rec.events:
            break
    return traj


@dataclass(frozen=True)
class LawReport:
    probes: int
    qualifying: int
    violations: int
    max_delta_c: float

    @property
    def holds(self) -> bool:
        return self.qualifying > 0 and self.violations == 0


def law_of_decrease_check(m: Measurement, pair: str, trials: int = 1000,
                          probe_eps: float = 1e-4, seed: int = 0,
                          max_rounds: int = 200) -> LawReport:
    """Check that improving modifications reduce ``C++``.

    Random admissible modifications of norm ``probe_eps`` are drawn until
    ``trials`` of them raise both quantities to first order. For each such
    probe the change of ``C++`` between ``m`` and ``m + eps`` must be
    negative. G-R probes that alter the minimum block are not counted.
    """
    pair = check_pair(pair)
    prof = degeneracy_profile(m)
    ds = direction_set(m)
    dvec = ds.grad_f if pair == "gf" else ds.grad_r
    c0 = _c_pp(m, pair)
    probes = qualifying = violations = 0
    worst = -np.inf
    rounds = np.random.SeedSequence(seed).spawn(max_rounds)
    for ss in rounds:
        if qualifying >= trials:
            break
        sub = int(ss.generate_state(1)[0])
        eps = sample_admissible_array(m, pair, probe_eps, trials, sub)
        probes += eps.shape[0]
        eps = eps[(eps @ ds.grad_g > 0) & (eps @ dvec > 0)]
        for e in eps:
            moved = canonicalize(m.lambdas + e, allow_rescale=True)
            if pair == "gr" and degeneracy_profile(moved).nd != prof.nd:
                continue
            qualifying += 1
            dc = _c_pp(moved, pair) - c0
            worst = max(worst, dc)
            if not dc < 0:
                violations += 1
            if qualifying >= trials:
                break
    return LawReport(probes, qualifying, violations, float(worst))

"""Single-outcome measurement model.

A measurement outcome is represented by the singular values of its
measurement operator, sorted in descending order and lying in [0, 1].
Everything else in the package is a function of this vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
NEGATIVE_CLAMP = 1e-12


class InvalidMeasurementError(ValueError):
    """Raised when a vector cannot represent a measurement outcome."""


@dataclass(frozen=True, eq=False)
class Measurement:
    """Descending singular-value vector of one measurement operator.

    Construct through :func:`canonicalize` unless the input is already
    known to be sorted and inside [0, 1].
    """

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise InvalidMeasurementError("need at least 2 singular values")
        if not np.all(np.isfinite(lam)):
            raise InvalidMeasurementError("singular values must be finite")
        if lam[0] <= 0:
            raise InvalidMeasurementError("largest singular value must be positive")
        if lam[-1] < 0 or lam[0] > 1:
            raise InvalidMeasurementError("singular values must lie in [0, 1]")
        if np.any(np.diff(lam) > 0):
            raise InvalidMeasurementError("singular values must be sorted in descending order")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def d(self) -> int:
        return self.lambdas.size

    @property
    def sigma_sq(self) -> float:
        return float(np.dot(self.lambdas, self.lambdas))

    @property
    def tau(self) -> float:
        return float(np.sum(self.lambdas))

    def moments(self) -> Moments:
        return Moments(self.sigma_sq, self.tau)

    def __repr__(self):
        vals = ", ".join(f"{x:.6g}" for x in self.lambdas)
        return f"Measurement(({vals}))"

    def to_text(self) -> str:
        """Comma-separated form accepted by :func:`parse_measurement`."""
        return ",".join(repr(float(x)) for x in self.lambdas)


@dataclass(frozen=True)
class Moments:
    sigma_sq: float
    tau: float


@dataclass(frozen=True)
class DegeneracyProfile:
    """Multiplicities of the maximum, minimum and zero singular values."""

    n1: int
    nd: int
    n0: int
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class MetricTriple:
    g: float
    f: float
    r: float


def canonicalize(raw: Sequence[float], allow_rescale: bool = False,
                 tol: float = NEGATIVE_CLAMP) -> Measurement:
    """Sort ``raw`` into a valid :class:`Measurement`.

    Entries within ``tol`` below zero are clamped to 0. When
    ``allow_rescale`` is set and the maximum exceeds 1, the whole vector
    is divided by its maximum, which leaves every metric unchanged.
    """
    lam = np.asarray(raw, dtype=float).ravel()
    if lam.size < 2:
        raise InvalidMeasurementError("need at least 2 singular values")
    if not np.all(np.isfinite(lam)):
        raise InvalidMeasurementError("singular values must be finite")
    if np.any(lam < -tol):
        raise InvalidMeasurementError(f"negative singular value {lam.min():g}")
    lam = np.sort(np.clip(lam, 0.0, None))[::-1]
    top = lam[0]
    if top == 0:
        raise InvalidMeasurementError("all singular values are zero")
    if top > 1:
        if allow_rescale:
            lam = lam / top
        elif top > 1 + tol:
            raise InvalidMeasurementError(
                f"largest singular value {top:g} exceeds 1 (pass allow_rescale to rescale)")
        else:
            lam = np.minimum(lam, 1.0)
    return Measurement(lam)


def parse_measurement(text: str, allow_rescale: bool = False) -> Measurement:
    """Parse the comma-separated text form, e.g. ``"0.8,0.7,0.4,0"``."""
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InvalidMeasurementError(f"cannot parse measurement {text!r}") from exc
    return canonicalize(vals, allow_rescale=allow_rescale)


def degeneracy_profile(m: Measurement, tol: float = DEFAULT_TOL) -> DegeneracyProfile:
    """Count ties at the top, at the bottom, and at zero.

    Ties are detected relative to the largest singular value, so the
    profile is invariant under rescaling.
    """
    lam = m.lambdas
    scale = tol * lam[0]
    n1 = int(np.count_nonzero(lam[0] - lam <= scale))
    nd = int(np.count_nonzero(lam - lam[-1] <= scale))
    n0 = nd if lam[-1] <= scale else 0
    return DegeneracyProfile(n1=n1, nd=nd, n0=n0, tol=tol)


def snap_to_profile(m: Measurement, prof: DegeneracyProfile | None = None) -> Measurement:
    """Make the ties found by ``prof`` exact.

    The top block takes the maximum, the bottom block the minimum, and a
    bottom block counted as zero becomes exactly 0.
    """
    prof = prof or degeneracy_profile(m)
    lam = m.lambdas.copy()
    d = m.d
    if prof.n1 == d:
        lam[:] = lam[0]
        return Measurement(lam)
    lam[:prof.n1] = lam[0]
    lam[d - prof.nd:] = 0.0 if prof.n0 else lam[-1]
    if np.array_equal(lam, m.lambdas):
        return m
    return Measurement(lam)


def is_projective_rank(m: Measurement, prof: DegeneracyProfile | None = None) -> bool:
    """True at ``p_r``: r equal nonzero values followed by zeros."""
    prof = prof or degeneracy_profile(m)
    return prof.n1 + prof.n0 == m.d


def is_rank_one_projector(m: Measurement, prof: DegeneracyProfile | None = None) -> bool:
    prof = prof or degeneracy_profile(m)
    return prof.n1 == 1 and prof.n0 == m.d - 1


def is_identity(m: Measurement, prof: DegeneracyProfile | None = None) -> bool:
    prof = prof or degeneracy_profile(m)
    return prof.n1 == m.d


def is_singular_point(m: Measurement, prof: DegeneracyProfile | None = None) -> bool:
    """Rank-1 projector or identity: steepest-ascent directions are undefined there."""
    prof = prof or degeneracy_profile(m)
    return is_rank_one_projector(m, prof) or is_identity(m, prof)


def family_p(d: int, r: int, c: float = 1.0) -> Measurement:
    """Projective measurement of rank ``r``: ``c`` repeated r times, then zeros."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if not 1 <= r <= d:
        raise ValueError(f"rank r={r} outside [1, {d}]")
    if not 0 < c <= 1:
        raise ValueError("scale c must lie in (0, 1]")
    lam = np.zeros(d)
    lam[:r] = c
    return Measurement(lam)


def family_m(d: int, k: int, l: int, lam: float, c: float = 1.0) -> Measurement:
    """``k`` entries ``c``, ``l`` entries ``c*lam``, zeros elsewhere.

    ``family_m(d, 1, d - 1, lam)`` is the optimal family.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if k < 1 or l < 0 or k + l > d:
        raise ValueError(f"invalid block sizes k={k}, l={l} for d={d}")
    if not 0 <= lam <= 1:
        raise ValueError("lam must lie in [0, 1]")
    if not 0 < c <= 1:
        raise ValueError("scale c must lie in (0, 1]")
    vec = np.zeros(d)
    vec[:k] = c
    vec[k:k + l] = c * lam
    return Measurement(vec)


def metrics(m: Measurement) -> MetricTriple:
    """Estimation fidelity, operation fidelity and physical reversibility."""
    lam = m.lambdas
    d = m.d
    s2 = m.sigma_sq
    tau = m.tau
    g = (1.0 + lam[0] ** 2 / s2) / (d + 1)
    f = (1.0 + tau ** 2 / s2) / (d + 1)
    r = d * lam[-1] ** 2 / s2
    return MetricTriple(float(g), float(f), float(r))


def outcome_probability(m: Measurement) -> float:
    """Probability of the outcome for a completely unknown input state."""
    return m.sigma_sq / m.d

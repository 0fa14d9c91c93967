"""Rate regions for two-receiver broadcasting over erasure channels with feedback.

Receiver 1 wants all ``k1`` type-1 messages plus a fraction ``alpha`` of
the type-2 messages, receiver 2 the reverse. Rates are messages delivered
per broadcast slot:

    r1 = (k1 + alpha*k2) / T,    r2 = (k2 + alpha*k1) / T.

Two achievable regions are evaluated here: the one for message-specific
demands (the cross fraction is a fixed subset) and the one for
content-type demands (any ``alpha*k`` messages of the other type will do).
All functions are written with plain arithmetic so they also accept
:class:`fractions.Fraction` inputs for exact evaluation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

BOUNDARY_TOL = 1e-12
TRACE_TOL = 1e-9

Strategy = Literal["content", "message"]


def pos(x):
    return x if x > 0 else 0 * x


@dataclass(frozen=True)
class DerivedChannel:
    eps1: float
    eps2: float
    eps12: float
    phi1: float
    phi2: float


def derive_channel(eps1, eps2) -> DerivedChannel:
    """Joint erasure probability and the conditional reception probabilities.

    ``phi_i`` is the probability that receiver ``i`` got a packet given
    that at least one receiver got it.
    """
    for name, e in (("eps1", eps1), ("eps2", eps2)):
        if not 0 <= e < 1:
            raise ValueError(f"{name} must lie in [0, 1), got {e}")
    eps12 = eps1 * eps2
    return DerivedChannel(eps1, eps2, eps12, (1 - eps1) / (1 - eps12), (1 - eps2) / (1 - eps12))


class RatePoint(NamedTuple):
    r1: float
    r2: float


def _cap(num, alpha_den):
    return num / alpha_den if alpha_den > 0 else math.inf


def content_constraints(ch: DerivedChannel, alpha, p) -> list:
    """Normalised left-hand sides of the content-type constraints; each must be <= 1.

    Order: the two per-receiver caps, then the two coupled constraints.
    """
    e1, e2 = ch.eps1, ch.eps2
    r1, r2 = p
    cap1 = min(1 - e1, _cap(1 - e2, alpha))
    cap2 = min(1 - e2, _cap(1 - e1, alpha))
    g1 = pos(ch.phi1 - alpha)
    g2 = pos(ch.phi2 - alpha)
    # (phi - alpha)^+ vanishes whenever alpha == 1, so the coefficient is 0 there
    c1 = g1 / (1 - alpha * alpha) if g1 else 0 * g1
    c2 = g2 / (1 - alpha * alpha) if g2 else 0 * g2
    return [
        r1 / cap1,
        r2 / cap2,
        r1 / (1 - e1) * (1 - alpha * c1) + r2 / (1 - e1) * c1,
        r2 / (1 - e2) * (1 - alpha * c2) + r1 / (1 - e2) * c2,
    ]


def message_constraints(ch: DerivedChannel, alpha, p) -> list:
    """Normalised left-hand sides of the message-specific constraints; each must be <= 1."""
    e1, e2, e12 = ch.eps1, ch.eps2, ch.eps12
    r1, r2 = p
    cap1 = min(1 - e1, (1 - e2) / (1 - (1 - ch.phi2) * (1 - alpha)))
    cap2 = min(1 - e2, (1 - e1) / (1 - (1 - ch.phi1) * (1 - alpha)))
    return [
        r1 / cap1,
        r2 / cap2,
        r1 / (1 - e1) * (1 - alpha * ch.phi1 / (1 + alpha)) + r2 / (1 - e12) / (1 + alpha),
        r1 / (1 - e12) / (1 + alpha) + r2 / (1 - e2) * (1 - alpha * ch.phi2 / (1 + alpha)),
    ]


def _contains(values, p, tol) -> bool:
    r1, r2 = p
    return r1 >= -tol and r2 >= -tol and all(v <= 1 + tol for v in values)


def content_region_contains(ch: DerivedChannel, alpha, p, tol: float = BOUNDARY_TOL) -> bool:
    return _contains(content_constraints(ch, alpha, p), p, tol)


def message_region_contains(ch: DerivedChannel, alpha, p, tol: float = BOUNDARY_TOL) -> bool:
    return _contains(message_constraints(ch, alpha, p), p, tol)


def constraints(which: Strategy, ch: DerivedChannel, alpha, p) -> list:
    if which == "content":
        return content_constraints(ch, alpha, p)
    if which == "message":
        return message_constraints(ch, alpha, p)
    raise ValueError(f"unknown strategy {which!r}")


def ray_extent(ch: DerivedChannel, alpha, which: Strategy, theta: float, tol: float = TRACE_TOL) -> RatePoint:
    """Farthest point of the region along direction ``theta`` (radians from the r1 axis)."""
    d1, d2 = math.cos(theta), math.sin(theta)
    # clip round-off so the axis rays stay on the axes
    d1, d2 = (0.0 if abs(d1) < 1e-15 else d1), (0.0 if abs(d2) < 1e-15 else d2)

    def inside(t):
        return all(v <= 1 + BOUNDARY_TOL for v in constraints(which, ch, alpha, (t * d1, t * d2)))

    lo, hi = 0.0, 1.0
    while inside(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            lo = mid
        else:
            hi = mid
    return RatePoint(lo * d1, lo * d2)


def boundary_trace(ch: DerivedChannel, alpha, which: Strategy, n_rays: int) -> list[RatePoint]:
    """Boundary points on ``n_rays`` rays evenly spaced over [0, pi/2], axes included."""
    if n_rays < 2:
        raise ValueError("n_rays must be at least 2")
    step = (math.pi / 2) / (n_rays - 1)
    return [ray_extent(ch, alpha, which, k * step) for k in range(n_rays)]


def trace_csv(rows: list[tuple[str, float, float, float, RatePoint]], header: bool = True) -> str:
    """CSV with columns strategy,alpha,eps1,eps2,r1,r2 and 12-digit decimals."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if header:
        w.writerow(["strategy", "alpha", "eps1", "eps2", "r1", "r2"])
    for strategy, alpha, e1, e2, pt in rows:
        w.writerow([strategy] + [f"{float(x):.12f}" for x in (alpha, e1, e2, pt.r1, pt.r2)])
    return out.getvalue()


@dataclass(frozen=True)
class ExpectedPlan:
    kprime1: float
    kprime2: float
    M: tuple[tuple[float, float], tuple[float, float]]  # M[j][i]: type-j messages received by receiver i
    kr1: float
    kr2: float
    N1: float
    N2: float
    T: float
    r1: float
    r2: float


def _kept(k, alpha, phi_cross):
    excess = pos(alpha - phi_cross)
    if not excess:
        return k
    return (1 - excess / (1 - phi_cross)) * k


def expected_quantities(ch: DerivedChannel, k1, k2, alpha) -> ExpectedPlan:
    """Large-``k`` averages of the content-type strategy's phase quantities.

    Phase 1 sends type-``i`` messages until the cross receiver (the one
    wanting only a fraction of type ``i``) is owed exactly as many as
    remain, so the number sent is governed by the cross receiver's
    conditional reception probability.
    """
    kp1 = _kept(k1, alpha, ch.phi2)
    kp2 = _kept(k2, alpha, ch.phi1)
    phi = (ch.phi1, ch.phi2)
    M = tuple(tuple(kp * phi[i] for i in range(2)) for kp in (kp1, kp2))
    rest = (k1 - kp1) + (k2 - kp2)
    kr1 = (kp1 - M[0][0]) + rest
    kr2 = (kp2 - M[1][1]) + rest
    N1 = (kp1 + kp2) / (1 - ch.eps12)
    N2 = max(kr1 / (1 - ch.eps1), kr2 / (1 - ch.eps2))
    T = N1 + N2
    return ExpectedPlan(kp1, kp2, M, kr1, kr2, N1, N2, T, (k1 + alpha * k2) / T, (k2 + alpha * k1) / T)


def expected_message_specific(ch: DerivedChannel, k1, k2, alpha) -> dict:
    """Large-``k`` averages for the message-specific strategy.

    Phase 1 carries the private messages to first acknowledgement; Phase 2
    must deliver both shared subsets plus the private messages each
    receiver missed.
    """
    p1, p2 = (1 - alpha) * k1, (1 - alpha) * k2
    shared = alpha * (k1 + k2)
    kr1 = shared + p1 * (1 - ch.phi1)
    kr2 = shared + p2 * (1 - ch.phi2)
    N1 = (p1 + p2) / (1 - ch.eps12)
    N2 = max(kr1 / (1 - ch.eps1), kr2 / (1 - ch.eps2))
    T = N1 + N2
    return {"kr1": kr1, "kr2": kr2, "N1": N1, "N2": N2, "T": T,
            "r1": (k1 + alpha * k2) / T, "r2": (k2 + alpha * k1) / T}


class CaseReport(NamedTuple):
    case: int
    corner_achievable: bool

    @property
    def label(self) -> str:
        return f"Case{self.case}"


def classify_case(ch: DerivedChannel, alpha) -> CaseReport:
    """Which side of the conditional reception probabilities ``alpha`` lies on.

    Ties go to the lower case: ``alpha == min(phi)`` is Case 1 and
    ``alpha == max(phi)`` is Case 2.
    """
    lo, hi = min(ch.phi1, ch.phi2), max(ch.phi1, ch.phi2)
    if alpha <= lo:
        case = 1
    elif alpha <= hi:
        case = 2
    else:
        case = 3
    corner = hi < alpha < min(ch.phi1 / ch.phi2, ch.phi2 / ch.phi1)
    return CaseReport(case, corner)

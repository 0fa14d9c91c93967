"""Slot-level simulation of a two-receiver broadcast erasure channel with ACK feedback.

Two strategies are simulated:

``message``
    Phase 1 sends every private message (wanted by one receiver only)
    until either receiver acknowledges it. Phase 2 sends random linear
    combinations of both shared subsets and the private messages their
    owner missed.

``content``
    Phase 1 sends type-1 messages, then type-2 messages, each until either
    receiver acknowledges it, and stops a type as soon as the remaining
    messages are exactly what the cross receiver still needs to reach her
    ``alpha*k`` quota. Phase 2 sends random linear combinations of the
    remaining messages and the ones each receiver got only through the
    other receiver.

Two Phase-2 modes share the same erasure trace. ``counting`` treats every
reception as innovative. ``coded`` forms uniformly random combinations over
F_65537, carries actual payload symbols, and each receiver runs Gaussian
elimination after cancelling its side information; the phase ends when
both can decode, and the decoded payloads are checked against the truth.

Randomness: trial ``t`` of a run with seed ``s`` draws erasures from
``SeedSequence(s, spawn_key=(t, 0))`` and coefficients/payloads from
``SeedSequence(s, spawn_key=(t, 1))``, both through PCG64.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .gf import IncrementalDecoder, PrimeField

CODED_FIELD = PrimeField(65537)
_CHUNK = 1 << 16

Mode = Literal["counting", "coded"]
Strategy = Literal["content", "message"]


class SimulationError(RuntimeError):
    """A post-run audit failed; indicates a bug, never expected."""


@dataclass(frozen=True)
class ChannelParams:
    eps1: float
    eps2: float

    def __post_init__(self):
        for name, e in (("eps1", self.eps1), ("eps2", self.eps2)):
            if not 0 <= e < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {e}")


@dataclass(frozen=True)
class Workload:
    k1: int
    k2: int
    alpha: float

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ValueError("k1 and k2 must be at least 1")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha out of range: {self.alpha}")
        for name, k in (("k1", self.k1), ("k2", self.k2)):
            a = self.alpha * k
            if abs(a - round(a)) > 1e-9 * max(1, k):
                raise ValueError(f"alpha*{name} = {a} is not an integer")

    @property
    def a1(self) -> int:
        """Number of type-1 messages receiver 2 wants."""
        return round(self.alpha * self.k1)

    @property
    def a2(self) -> int:
        """Number of type-2 messages receiver 1 wants."""
        return round(self.alpha * self.k2)


@dataclass
class TrialResult:
    T: int
    T1: int
    T2: int
    kprime1: int
    kprime2: int
    q11: int
    q12: int
    q21: int
    q22: int
    both1: int  # type-1 Phase-1 messages received by both receivers
    both2: int
    kr1: int
    kr2: int
    r1: float
    r2: float
    innovative_misses: int = 0  # coded mode: non-innovative receptions while demand remained

    def to_dict(self) -> dict:
        return asdict(self)


class ErasureTrace:
    """Per-slot reception outcomes ``(rx1, rx2)`` drawn in chunks."""

    def __init__(self, ch: ChannelParams, rng: np.random.Generator):
        self._ch = ch
        self._rng = rng
        self._buf: list = []
        self._pos = 0

    def _refill(self):
        u = self._rng.random((_CHUNK, 2))
        self._buf = list(zip((u[:, 0] >= self._ch.eps1).tolist(), (u[:, 1] >= self._ch.eps2).tolist()))
        self._pos = 0

    def next(self) -> tuple[bool, bool]:
        if self._pos == len(self._buf):
            self._refill()
        out = self._buf[self._pos]
        self._pos += 1
        return out


def _send_until_ack(trace: ErasureTrace) -> tuple[int, bool, bool]:
    """Repeat one message until someone receives it; returns (slots, rx1, rx2)."""
    slots = 0
    while True:
        rx1, rx2 = trace.next()
        slots += 1
        if rx1 or rx2:
            return slots, rx1, rx2


@dataclass
class _TypeQueues:
    sent: int = 0
    only1: int = 0
    only2: int = 0
    both: int = 0

    @property
    def at1(self) -> int:
        return self.only1 + self.both

    @property
    def at2(self) -> int:
        return self.only2 + self.both

    def record(self, rx1: bool, rx2: bool):
        self.sent += 1
        if rx1 and rx2:
            self.both += 1
        elif rx1:
            self.only1 += 1
        else:
            self.only2 += 1


def _phase2_counting(trace: ErasureTrace, d1: int, d2: int) -> int:
    slots = 0
    while d1 > 0 or d2 > 0:
        rx1, rx2 = trace.next()
        slots += 1
        if rx1 and d1 > 0:
            d1 -= 1
        if rx2 and d2 > 0:
            d2 -= 1
    return slots


def _phase2_coded(trace: ErasureTrace, rng: np.random.Generator, common: int, want1: int,
                  want2: int) -> tuple[int, int]:
    """Random linear network coding over the Phase-2 set.

    Unknown layout: ``[common | only-for-1 | only-for-2]``. Receiver 1 wants
    ``common + want1`` unknowns and already holds receiver 2's private
    block, and vice versa.
    """
    q = CODED_FIELD.q
    D = common + want1 + want2
    if D == 0:
        return 0, 0
    truth = rng.integers(0, q, size=D)
    idx1 = np.r_[0:common + want1]
    idx2 = np.r_[0:common, common + want1:D]
    known1 = np.r_[common + want1:D]  # receiver 1 holds receiver 2's private block
    known2 = np.r_[common:common + want1]
    dec1 = IncrementalDecoder(CODED_FIELD, idx1.size)
    dec2 = IncrementalDecoder(CODED_FIELD, idx2.size)
    slots = misses = 0
    while not (dec1.complete and dec2.complete):
        rx1, rx2 = trace.next()
        slots += 1
        coeffs = rng.integers(0, q, size=D)
        value = int(coeffs @ truth % q)
        for rx, dec, idx, known in ((rx1, dec1, idx1, known1), (rx2, dec2, idx2, known2)):
            if rx and not dec.complete:
                reduced = (value - int(coeffs[known] @ truth[known])) % q
                if not dec.add(coeffs[idx], reduced):
                    misses += 1
    if not (np.array_equal(dec1.solution(), truth[idx1]) and np.array_equal(dec2.solution(), truth[idx2])):
        raise SimulationError("coded Phase 2 decoded wrong payloads")
    return slots, misses


def _phase2(mode: Mode, trace, coef_rng, common, want1, want2):
    if mode == "counting":
        return _phase2_counting(trace, common + want1, common + want2), 0
    if mode == "coded":
        return _phase2_coded(trace, coef_rng, common, want1, want2)
    raise ValueError(f"unknown mode {mode!r}")


def _streams(seed: int, trial: int) -> tuple[np.random.Generator, np.random.Generator]:
    erase = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, 0))))
    coef = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, 1))))
    return erase, coef


def _finish(w: Workload, T1, T2, t1: _TypeQueues, t2: _TypeQueues, d1, d2, misses) -> TrialResult:
    T = T1 + T2
    dem1 = w.k1 + w.a2
    dem2 = w.k2 + w.a1
    return TrialResult(
        T=T, T1=T1, T2=T2, kprime1=t1.sent, kprime2=t2.sent,
        q11=t1.at1, q12=t1.at2, q21=t2.at1, q22=t2.at2, both1=t1.both, both2=t2.both,
        kr1=d1, kr2=d2,
        r1=dem1 / T if T else math.inf, r2=dem2 / T if T else math.inf,
        innovative_misses=misses,
    )


def simulate_content_type(ch: ChannelParams, w: Workload, seed: int, mode: Mode = "counting",
                          trial: int = 0) -> TrialResult:
    erase_rng, coef_rng = _streams(seed, trial)
    trace = ErasureTrace(ch, erase_rng)
    queues = (_TypeQueues(), _TypeQueues())
    T1 = 0
    for i, (k, quota) in enumerate(((w.k1, w.a1), (w.k2, w.a2))):
        qs = queues[i]
        cross_at = (lambda: qs.at2) if i == 0 else (lambda: qs.at1)
        while qs.sent < k and (k - qs.sent) + cross_at() != quota:
            slots, rx1, rx2 = _send_until_ack(trace)
            T1 += slots
            qs.record(rx1, rx2)
    t1, t2 = queues
    rem1, rem2 = w.k1 - t1.sent, w.k2 - t2.sent
    common = rem1 + rem2
    want1 = t1.only2  # type 1 held only by receiver 2
    want2 = t2.only1
    d1, d2 = common + want1, common + want2
    T2, misses = _phase2(mode, trace, coef_rng, common, want1, want2)
    _audit_content(w, t1, t2, rem1, rem2)
    return _finish(w, T1, T2, t1, t2, d1, d2, misses)


def _audit_content(w: Workload, t1: _TypeQueues, t2: _TypeQueues, rem1: int, rem2: int):
    # receiver 1 ends with Q_1^1, its decoded type-1 set and the remaining type 2
    held11 = t1.at1 + t1.only2 + rem1
    held12 = t2.at1 + rem2
    held22 = t2.at2 + t2.only1 + rem2
    held21 = t1.at2 + rem1
    if held11 != w.k1 or held22 != w.k2 or held12 < w.a2 or held21 < w.a1:
        raise SimulationError("content-type demands not met at termination")


def simulate_message_specific(ch: ChannelParams, w: Workload, seed: int, mode: Mode = "counting",
                              trial: int = 0) -> TrialResult:
    """The cross subsets are taken to be the first ``alpha*k`` messages of each type."""
    erase_rng, coef_rng = _streams(seed, trial)
    trace = ErasureTrace(ch, erase_rng)
    queues = (_TypeQueues(), _TypeQueues())
    T1 = 0
    for i, private in enumerate((w.k1 - w.a1, w.k2 - w.a2)):
        for _ in range(private):
            slots, rx1, rx2 = _send_until_ack(trace)
            T1 += slots
            queues[i].record(rx1, rx2)
    t1, t2 = queues
    common = w.a1 + w.a2
    want1 = t1.only2
    want2 = t2.only1
    d1, d2 = common + want1, common + want2
    T2, misses = _phase2(mode, trace, coef_rng, common, want1, want2)
    return _finish(w, T1, T2, t1, t2, d1, d2, misses)


SIMULATORS = {"content": simulate_content_type, "message": simulate_message_specific}


@dataclass
class Aggregate:
    strategy: str
    eps1: float
    eps2: float
    alpha: float
    k1: int
    k2: int
    trials: int
    seed: int
    mode: str
    total_T: int
    mean_T: float
    mean_r1: float
    mean_r2: float
    se_T: float
    results: list[TrialResult] = field(default_factory=list, repr=False)

    def mean_of(self, name: str) -> float:
        return sum(getattr(r, name) for r in self.results) / len(self.results)

    def to_json_dict(self, per_trial: bool = False) -> dict:
        out = {
            "strategy": self.strategy, "eps1": self.eps1, "eps2": self.eps2, "alpha": self.alpha,
            "k1": self.k1, "k2": self.k2, "trials": self.trials, "seed": self.seed, "mode": self.mode,
            "mean_T": self.mean_T, "mean_r1": self.mean_r1, "mean_r2": self.mean_r2, "se_T": self.se_T,
        }
        if per_trial:
            out["per_trial"] = [r.to_dict() for r in self.results]
        return out


def run_trials(ch: ChannelParams, w: Workload, strategy: Strategy, n_trials: int, seed: int,
               mode: Mode = "counting") -> Aggregate:
    """Independent trials with per-trial substreams.

    ``mean_r1`` and ``mean_r2`` are the pooled rates ``n * demand / sum(T)``,
    computed from the integer slot total with one division.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    try:
        sim = SIMULATORS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    results = [sim(ch, w, seed, mode, trial=t) for t in range(n_trials)]
    total = sum(r.T for r in results)
    sq = sum(r.T * r.T for r in results)
    n = n_trials
    # integer sums of squares keep the variance order-independent
    var = (n * sq - total * total) / (n * (n - 1)) if n > 1 else 0.0
    dem1 = w.k1 + w.a2
    dem2 = w.k2 + w.a1
    return Aggregate(
        strategy=strategy, eps1=ch.eps1, eps2=ch.eps2, alpha=w.alpha, k1=w.k1, k2=w.k2,
        trials=n, seed=seed, mode=mode, total_T=total, mean_T=total / n,
        mean_r1=n * dem1 / total, mean_r2=n * dem2 / total,
        se_T=math.sqrt(var / n), results=results,
    )

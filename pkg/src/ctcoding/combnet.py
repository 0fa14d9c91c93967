"""The four-layer combination network B(m, k, u).

``m`` sources each hold ``u`` messages of one type and feed all ``k``
intermediate A nodes; A node ``e`` has a single unit edge to B node ``e``;
every ``m``-subset of B nodes serves its own group of ``u**m`` receivers.
An ``m``-subset of edges together with its receivers is a *structure*.

Three rates are computed:

* content-type multicast, where every receiver accepts any message of
  each type (``Rc = m``);
* the worst-case message-specific rate, where within a structure every
  receiver asks for a different tuple (``Rw = m/u``);
* a Monte Carlo estimate of the average message-specific rate under
  uniform i.i.d. requests, using the top-``m`` popularity rule per
  structure, next to its closed-form Chernoff upper bound.

The top-``m`` rule is an upper bound on what any scheme can deliver
through one structure; the true optimum over coding schemes is not
computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .gf import FieldError, FieldMatrix, PrimeField, mds_generator, solve_square

MAX_RECEIVERS = 10**6
MAX_K = 16
AUDIT_SAMPLE = 64


@dataclass(frozen=True)
class CombNet:
    m: int
    k: int
    u: int

    def __post_init__(self):
        if self.m < 1 or self.u < 1:
            raise ValueError("m and u must be at least 1")
        if self.m > self.k:
            raise ValueError(f"m > k ({self.m} > {self.k})")
        if self.k > MAX_K:
            raise ValueError(f"k={self.k} exceeds the desk-scale limit {MAX_K}")
        if self.n > MAX_RECEIVERS:
            raise ValueError(f"{self.n} receivers exceed the desk-scale limit {MAX_RECEIVERS}")

    @property
    def v(self) -> int:
        """Number of structures."""
        return math.comb(self.k, self.m)

    @property
    def group(self) -> int:
        """Receivers per structure."""
        return self.u**self.m

    @property
    def n(self) -> int:
        return self.v * self.group

    def structures(self) -> list[tuple[int, ...]]:
        return list(combinations(range(self.k), self.m))

    def tuples(self) -> list[tuple[int, ...]]:
        """Message tuples in the order receivers of a structure are indexed."""
        return list(product(range(self.u), repeat=self.m))

    def receivers(self):
        """Yield ``(structure, tuple)`` identifiers of all receivers."""
        for s in self.structures():
            for t in self.tuples():
                yield s, t


def build(m: int, k: int, u: int) -> CombNet:
    return CombNet(m, k, u)


@dataclass
class AuditResult:
    structures_checked: int
    receivers_covered: int
    mode: str  # "exhaustive" or "sampled"
    sample_seed: int | None = None
    passed: bool = True


def _decode_structure(gen: FieldMatrix, packet_cols: Sequence[int], symbols: np.ndarray) -> bool:
    sub = gen.select_columns(packet_cols)
    packets = (symbols @ sub.data) % gen.field.q
    try:
        decoded = solve_square(sub.T, packets)
    except FieldError:
        return False
    return bool(np.array_equal(decoded, symbols))


def multicast_content_rate(net: CombNet, field: PrimeField, seed: int = 0) -> tuple[Fraction, AuditResult]:
    """Multicast one message of every type to every receiver in a single slot.

    The ``m`` chosen symbols are spread over the ``k`` edges with an MDS
    code, so any ``m`` edges decode them. Every receiver of a structure sees
    the same ``m`` packets, hence decoding is checked once per structure.
    """
    if field.q <= net.k:
        raise FieldError(f"field too small: need q > k = {net.k}")
    gen = mds_generator(net.k, net.m, field)
    symbols = np.random.default_rng(seed).integers(0, field.q, size=net.m)
    ok = all(_decode_structure(gen, s, symbols) for s in net.structures())
    audit = AuditResult(net.v, net.n, "exhaustive", None, ok)
    if not ok:
        raise FieldError("content multicast decode audit failed")
    return Fraction(net.m), audit


def worst_case_requests(net: CombNet) -> list[tuple[int, ...]]:
    """Request tuple of every receiver, in :meth:`CombNet.receivers` order.

    Within each structure the ``u**m`` receivers request pairwise distinct
    tuples, so every one of the ``m*u`` messages is wanted.
    """
    per_structure = net.tuples()
    return per_structure * net.v


def request_counts(requests: Sequence[Sequence[int]], m: int, u: int) -> list[list[int]]:
    """``counts[i][j]``: receivers of one structure asking for message ``j`` of type ``i``."""
    counts = [[0] * u for _ in range(m)]
    for tup in requests:
        for i, j in enumerate(tup):
            counts[i][j] += 1
    return counts


def structure_rate(counts: Sequence[Sequence[int]], m: int, u: int) -> Fraction:
    """Per-receiver rate through one structure when its ``m`` edges carry the ``m`` most requested messages."""
    if len(counts) != m or any(len(row) != u for row in counts):
        raise ValueError(f"counts must be an {m} x {u} table")
    total = u**m
    for i, row in enumerate(counts):
        if sum(row) != total:
            raise ValueError(f"type {i} counts sum to {sum(row)}, expected {total}")
    flat = sorted((c for row in counts for c in row), reverse=True)
    return Fraction(sum(flat[:m]), total)


def worst_case_rate(net: CombNet, field: PrimeField, seed: int = 0) -> tuple[Fraction, AuditResult]:
    """Serve all ``m*u`` messages to every receiver in ``u`` slots.

    Packet ``e*u + t`` is what edge ``e`` carries in slot ``t``; the
    ``k*u`` packets are an MDS encoding of the ``m*u`` messages, so any
    receiver's ``m*u`` packets decode everything. Structures are audited
    exhaustively up to 64 of them, otherwise a seeded sample of 64.
    """
    mu, ku = net.m * net.u, net.k * net.u
    if field.q <= ku:
        raise FieldError(f"field too small: need q > k*u = {ku}")
    gen = mds_generator(ku, mu, field)
    rng = np.random.default_rng(seed)
    symbols = rng.integers(0, field.q, size=mu)
    structs = net.structures()
    if len(structs) <= AUDIT_SAMPLE:
        chosen, mode, sample_seed = structs, "exhaustive", None
    else:
        picks = np.random.default_rng(seed).choice(len(structs), size=AUDIT_SAMPLE, replace=False)
        chosen, mode, sample_seed = [structs[i] for i in sorted(picks)], "sampled", seed
    ok = all(_decode_structure(gen, [e * net.u + t for e in s for t in range(net.u)], symbols) for s in chosen)
    audit = AuditResult(len(chosen), len(chosen) * net.group, mode, sample_seed, ok)
    if not ok:
        raise FieldError("worst-case schedule decode audit failed")
    rate = Fraction(net.m, net.u)
    # the schedule meets the per-structure ceiling for these requests
    ceiling = structure_rate(request_counts(net.tuples(), net.m, net.u), net.m, net.u)
    if rate != ceiling:
        raise RuntimeError(f"schedule rate {rate} differs from the structure ceiling {ceiling}")
    return rate, audit


@dataclass
class RateEstimate:
    mean: float
    stderr: float
    exact_mean: Fraction
    trials: int
    seed: int


def estimate_average_rate(net: CombNet, trials: int, seed: int, relabel: Sequence[Sequence[int]] | None = None,
                          chunk: int = 2048) -> RateEstimate:
    """Monte Carlo average of the top-``m`` structure rate under uniform i.i.d. requests.

    ``relabel`` optionally permutes message labels within each type
    (``relabel[i][j]`` is the new label of message ``j`` of type ``i``)
    before counting.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    m, u, v, g = net.m, net.u, net.v, net.group
    rng = np.random.default_rng(seed)
    perm = None if relabel is None else np.asarray(relabel, dtype=np.int64)
    chunk = max(1, min(chunk, 2**22 // (v * g * m * u)))
    per_trial: list[int] = []
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        req = rng.integers(0, u, size=(b, v, g, m))
        if perm is not None:
            req = perm[np.arange(m), req]
        # counts[b, v, i, j]
        onehot = req[..., None] == np.arange(u)
        counts = onehot.sum(axis=2).reshape(b, v, m * u)
        top = np.sort(counts, axis=-1)[..., -m:].sum(axis=-1)
        per_trial.extend(top.sum(axis=1).tolist())
        done += b
    denom = v * g
    total = sum(per_trial)
    exact = Fraction(total, trials * denom)
    rates = np.array(per_trial, dtype=np.float64) / denom
    se = float(rates.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return RateEstimate(float(exact), se, exact, trials, seed)


def average_rate_bound(m: int, k: int, u: int) -> tuple[float, dict]:
    """Closed-form Chernoff upper bound on the average message-specific rate.

    Returns the bound and a breakdown holding the concentration parameters
    ``delta1``, ``delta2``, the abnormal-event probability bounds ``p1``,
    ``p2``, the structure count ``v`` and the four additive terms.
    """
    if u < 2:
        raise ValueError("bound undefined for u < 2")
    if not 1 <= m <= k:
        raise ValueError("need 1 <= m <= k")
    v = math.comb(k, m)
    lnu = math.log(u)
    h = u ** ((m + 1) / 2)
    p1 = m / h
    p2 = 1 / h
    delta1 = math.sqrt(1.5 * (m + 3) * lnu) / u ** ((m - 1) / 2)
    delta2 = math.sqrt(1.5 * (m + 1) * lnu) / math.sqrt(v * p1)
    terms = [
        m / u,
        m / h,
        m * m * (1 + math.sqrt(lnu)) / h,
        (m + 1) ** 2 * math.sqrt(lnu) / (math.sqrt(v) * h),
    ]
    breakdown = {"delta1": delta1, "delta2": delta2, "p1": p1, "p2": p2, "v": v, "terms": terms}
    return math.fsum(terms), breakdown


@dataclass
class GainReport:
    m: int
    k: int
    u: int
    q: int
    Rc: Fraction
    Rw: Fraction
    Gw: Fraction
    Ra_estimate: float
    Ra_stderr: float
    Ra_bound: float | None
    Ga_estimate: float
    trials: int
    seed: int
    audit_mode: str
    bound_breakdown: dict | None = None

    def to_json_dict(self) -> dict:
        def num(x: Fraction):
            return int(x) if x.denominator == 1 else float(x)

        return {
            "m": self.m, "k": self.k, "u": self.u, "q": self.q,
            "Rc": num(self.Rc), "Rw": num(self.Rw), "Gw": num(self.Gw),
            "Gw_exact": f"{self.Gw.numerator}/{self.Gw.denominator}",
            "Ra_estimate": self.Ra_estimate, "Ra_stderr": self.Ra_stderr, "Ra_bound": self.Ra_bound,
            "Ga_estimate": self.Ga_estimate, "trials": self.trials, "seed": self.seed,
            "audit_mode": self.audit_mode, "bound_breakdown": self.bound_breakdown,
            "average_model": "top-m popularity rule per structure (upper bound on any scheme)",
        }


def smallest_prime_above(n: int) -> int:
    p = n + 1
    while True:
        try:
            PrimeField(p)
            return p
        except FieldError:
            p += 1


def gains(net: CombNet, field: PrimeField | None = None, trials: int = 1000, seed: int = 0) -> GainReport:
    """Worst-case and average-case gains of content-type over message-specific coding.

    Without an explicit field, the smallest prime above ``k*u`` is used.
    """
    field = field or PrimeField(smallest_prime_above(net.k * net.u))
    rc, _ = multicast_content_rate(net, field, seed)
    rw, audit = worst_case_rate(net, field, seed)
    est = estimate_average_rate(net, trials, seed)
    bound, breakdown = average_rate_bound(net.m, net.k, net.u) if net.u >= 2 else (None, None)
    return GainReport(
        m=net.m, k=net.k, u=net.u, q=field.q, Rc=rc, Rw=rw, Gw=rc / rw,
        Ra_estimate=est.mean, Ra_stderr=est.stderr, Ra_bound=bound, Ga_estimate=float(rc) / est.mean,
        trials=trials, seed=seed, audit_mode=audit.mode, bound_breakdown=breakdown,
    )

"""Pliable index coding over prime fields.

A client is described by the set of message indices it lacks; it is happy
with any one of them. A linear broadcast of ``K`` transmissions is a
``K x m`` coding matrix ``A``. After cancelling its side information a
client sees ``A[:, N] @ b[N]``, and it can recover some ``b[i]`` exactly
when column ``i`` of ``A[:, N]`` lies outside the span of the other columns
of ``A[:, N]``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field as dc_field
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .gf import FieldError, FieldMatrix, PrimeField, rank, unique_coordinate_solve

ORACLE_MAX_UNKNOWNS = 12
ORACLE_BUDGET = 2**20
SEARCH_BUDGET = 2**26


class BudgetExceeded(RuntimeError):
    """An exhaustive search or enumeration would exceed its fixed budget."""

    def __init__(self, message: str, limit: int | None = None, at: int | None = None):
        super().__init__(message)
        self.limit = limit
        self.at = at


@dataclass(frozen=True)
class PliableInstance:
    """``m`` messages and one missing-set per client."""

    m: int
    missing: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("an instance needs at least one message")
        sets = tuple(frozenset(int(i) for i in s) for s in self.missing)
        for j, s in enumerate(sets):
            if not s:
                raise ValueError(f"client {j} misses no message and can never be satisfied")
            if min(s) < 0 or max(s) >= self.m:
                raise ValueError(f"client {j} references a message outside 0..{self.m - 1}")
        object.__setattr__(self, "missing", sets)

    @property
    def n(self) -> int:
        return len(self.missing)

    def side_information(self, j: int) -> frozenset[int]:
        return frozenset(range(self.m)) - self.missing[j]

    def degree_classes(self) -> dict[int, list[int]]:
        """Clients grouped by how many messages they lack."""
        classes: dict[int, list[int]] = {}
        for j, s in enumerate(self.missing):
            classes.setdefault(len(s), []).append(j)
        return dict(sorted(classes.items()))

    def dumps(self) -> str:
        out = io.StringIO()
        out.write(f"pliable {self.m} {self.n}\n")
        for s in self.missing:
            out.write(" ".join(str(i) for i in sorted(s)) + "\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> PliableInstance:
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty instance file")
        head = lines[0].split()
        if len(head) != 3 or head[0] != "pliable":
            raise ValueError(f"bad header line: {lines[0]!r}")
        m, n = int(head[1]), int(head[2])
        body = lines[1:]
        if len(body) != n:
            raise ValueError(f"header announces {n} clients, found {len(body)}")
        return cls(m, tuple(frozenset(int(tok) for tok in line.split()) for line in body))


@dataclass(frozen=True)
class CodingPlan:
    """A ``K x m`` coding matrix; row ``k`` holds the coefficients of transmission ``k``."""

    A: FieldMatrix
    field: PrimeField = dc_field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "field", self.A.field)

    @property
    def K(self) -> int:
        return self.A.rows

    def encode(self, b) -> np.ndarray:
        return self.A.matvec(b)


def _check(inst: PliableInstance, plan: CodingPlan, j: int) -> None:
    if plan.A.cols != inst.m:
        raise ValueError(f"coding matrix has {plan.A.cols} columns, instance has {inst.m} messages")
    if not 0 <= j < inst.n:
        raise IndexError(f"client {j} out of range 0..{inst.n - 1}")


def decodable_columns(a: FieldMatrix) -> list[int]:
    """Local indices of columns that are not in the span of the remaining columns."""
    full = rank(a)
    out = []
    for i in range(a.cols):
        rest = [l for l in range(a.cols) if l != i]
        if rank(a.select_columns(rest)) < full:
            out.append(i)
    return out


def client_satisfied(inst: PliableInstance, plan: CodingPlan, j: int) -> bool:
    _check(inst, plan, j)
    need = sorted(inst.missing[j])
    sub = plan.A.select_columns(need)
    full = rank(sub)
    if full == 0:
        return False
    for i in range(len(need)):
        rest = [l for l in range(len(need)) if l != i]
        if rank(sub.select_columns(rest)) < full:
            return True
    return False


def all_satisfied(inst: PliableInstance, plan: CodingPlan) -> bool:
    return all(client_satisfied(inst, plan, j) for j in range(inst.n))


def brute_force_satisfied(inst: PliableInstance, plan: CodingPlan, j: int, truth=None) -> bool:
    """Decide satisfiability by enumerating every candidate for the missing messages.

    ``truth`` fixes the actual values of the missing messages (defaults to
    ``1, 2, 3, ...`` mod q); the answer does not depend on it.
    """
    _check(inst, plan, j)
    need = sorted(inst.missing[j])
    q = plan.field.q
    d = len(need)
    if d > ORACLE_MAX_UNKNOWNS or q**d > ORACLE_BUDGET:
        raise BudgetExceeded("instance too large for oracle", limit=ORACLE_BUDGET, at=q**d)
    sub = plan.A.data[:, need]
    if truth is None:
        truth = np.arange(1, d + 1) % q
    truth = np.asarray(truth, dtype=np.int64) % q
    target = (sub @ truth) % q
    cand = np.array(list(product(range(q), repeat=d)), dtype=np.int64).reshape(-1, d)
    ok = np.all((cand @ sub.T) % q == target, axis=1)
    sols = cand[ok]
    return bool(np.any(np.all(sols == sols[0], axis=0)))


def decode_one(inst: PliableInstance, plan: CodingPlan, j: int, observations, side_info) -> tuple[int, int]:
    """Recover one missing message from the broadcast ``observations``.

    ``side_info`` maps every message index the client holds to its value.
    Returns ``(message index, value)``.
    """
    _check(inst, plan, j)
    q = plan.field.q
    c = plan.field.asarray(observations)
    if c.shape != (plan.K,):
        raise ValueError(f"expected {plan.K} observations, got {c.shape}")
    have = sorted(inst.side_information(j))
    missing_known = set(have) - set(side_info)
    if missing_known:
        raise ValueError(f"side information lacks values for {sorted(missing_known)}")
    if have:
        known = np.array([side_info[i] for i in have], dtype=np.int64) % q
        c = (c - plan.A.data[:, have] @ known) % q
    need = sorted(inst.missing[j])
    sub = plan.A.select_columns(need)
    for local, i in enumerate(need):
        val = unique_coordinate_solve(sub, c, local)
        if val is not None:
            return i, val
    raise ValueError(f"client {j} is not satisfied by this coding matrix")


def complete_instance(m: int) -> PliableInstance:
    """One client per nonempty subset of the ``m`` messages, ordered by size then lexicographically."""
    if not 1 <= m <= 20:
        raise ValueError(f"complete instance needs 1 <= m <= 20, got {m}")
    sets = [frozenset(s) for d in range(1, m + 1) for s in combinations(range(m), d)]
    return PliableInstance(m, tuple(sets))


def _plan_satisfies(inst: PliableInstance, a: np.ndarray, field: PrimeField, order: Sequence[int]) -> bool:
    plan = CodingPlan(FieldMatrix(field, a))
    return all(client_satisfied(inst, plan, j) for j in order)


def min_code_length(inst: PliableInstance, field: PrimeField, k_max: int) -> int | None:
    """Smallest number of transmissions satisfying every client, by exhaustive search.

    Returns ``None`` when no ``K <= k_max`` works. Raises
    :class:`BudgetExceeded` once ``q**(K*m)`` would exceed the search budget.
    """
    q, m = field.q, inst.m
    # small clients first: they reject most candidates fastest
    order = sorted(range(inst.n), key=lambda j: len(inst.missing[j]))
    for K in range(1, k_max + 1):
        if q ** (K * m) > SEARCH_BUDGET:
            raise BudgetExceeded(f"search budget 2^26 exceeded at K={K}", limit=SEARCH_BUDGET, at=K)
        for flat in product(range(q), repeat=K * m):
            a = np.array(flat, dtype=np.int64).reshape(K, m)
            if _plan_satisfies(inst, a, field, order):
                return K
    return None


def exhaustive_plans(field: PrimeField, K: int, m: int) -> Iterable[CodingPlan]:
    for flat in product(range(field.q), repeat=K * m):
        yield CodingPlan(FieldMatrix(field, np.array(flat, dtype=np.int64).reshape(K, m)))


def greedy_encode(inst: PliableInstance, field: PrimeField, rng: np.random.Generator, max_rounds: int = 64) -> CodingPlan:
    """Append uniformly random rows until every client is satisfied.

    After ``max_rounds`` random rows the plan is completed with unit rows
    for every message some client still lacks, which always suffices.
    """
    rows = np.zeros((0, inst.m), dtype=np.int64)
    pending = list(range(inst.n))
    for _ in range(max_rounds):
        row = rng.integers(0, field.q, size=(1, inst.m))
        rows = np.vstack([rows, row])
        plan = CodingPlan(FieldMatrix(field, rows))
        pending = [j for j in pending if not client_satisfied(inst, plan, j)]
        if not pending:
            return plan
    wanted = sorted(set().union(*(inst.missing[j] for j in pending)))
    units = np.eye(inst.m, dtype=np.int64)[wanted]
    return CodingPlan(FieldMatrix(field, np.vstack([rows, units])))


def random_instance(m: int, n: int, density: float, rng: np.random.Generator) -> PliableInstance:
    """Clients miss each message independently with probability ``density``, conditioned on missing at least one.

    The conditioning is sampled directly rather than by redrawing: the first
    missing index ``i`` has probability proportional to
    ``(1 - density)**i * density`` and later indices stay independent.
    """
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    weights = (1 - density) ** np.arange(m) * density
    weights = weights / weights.sum()
    sets = []
    for _ in range(n):
        first = int(rng.choice(m, p=weights))
        tail = np.flatnonzero(rng.random(m - first - 1) < density) + first + 1
        sets.append(frozenset([first, *tail.tolist()]))
    return PliableInstance(m, tuple(sets))


def load_matrix(text: str) -> FieldMatrix:
    """Parse ``matrix K m q`` followed by ``K`` rows of ``m`` integers."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "matrix":
        raise ValueError(f"bad header line: {lines[0]!r}")
    K, m, q = (int(x) for x in head[1:])
    rows = [[int(tok) for tok in ln.split()] for ln in lines[1:]]
    if len(rows) != K or any(len(r) != m for r in rows):
        raise ValueError(f"matrix body does not match header {K}x{m}")
    field = PrimeField(q)
    return FieldMatrix(field, np.array(rows, dtype=np.int64).reshape(K, m))


def dump_matrix(a: FieldMatrix) -> str:
    lines = [f"matrix {a.rows} {a.cols} {a.field.q}"]
    lines += [" ".join(str(x) for x in row) for row in a.tolist()]
    return "\n".join(lines) + "\n"


__all__ = [
    "BudgetExceeded",
    "CodingPlan",
    "FieldError",
    "PliableInstance",
    "all_satisfied",
    "brute_force_satisfied",
    "client_satisfied",
    "complete_instance",
    "decodable_columns",
    "decode_one",
    "dump_matrix",
    "exhaustive_plans",
    "greedy_encode",
    "load_matrix",
    "min_code_length",
    "random_instance",
]

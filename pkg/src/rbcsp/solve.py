"""Exact satisfiability decision and model counting.

Complete backtracking search with minimum-remaining-values variable ordering
and forward checking over per-scope allowed-tuple bitsets; duplicate scopes
are intersected at preprocessing.  Binary constraints get precomputed support
masks; higher arities fall back to a generic single-unassigned pruning path.
A vectorized exhaustive enumerator serves as an independent oracle.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from .core import Assignment, Instance, satisfies
from .errors import CapacityError

SAT = "SAT"
UNSAT = "UNSAT"
TIMEOUT = "TIMEOUT"
EXACT = "EXACT"

# Per-constraint allowed sets are Python-int bitsets of d^k bits.
MAX_BITSET_BITS = 1 << 22
BRUTE_FORCE_LIMIT = 10**7

_TIME_CHECK_MASK = 0x7FF


@dataclass(frozen=True)
class Budget:
    """Search limits; None disables a limit.  Node budgets are deterministic."""

    max_nodes: int | None = 10**8
    max_seconds: float | None = 10.0


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # SAT | UNSAT | TIMEOUT
    witness: Assignment | None
    nodes: int
    elapsed: float


@dataclass(frozen=True)
class CountOutcome:
    status: str  # EXACT | TIMEOUT
    count: int  # exact model count when EXACT; partial tally on TIMEOUT
    nodes: int
    elapsed: float


class _BudgetExhausted(Exception):
    pass


class _Engine:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.n = inst.n
        self.k = inst.k
        self.d = inst.sizes.d
        t_space = self.d**self.k
        if t_space > MAX_BITSET_BITS:
            raise CapacityError(
                f"allowed-set bitset needs d^k = {t_space} bits, above the {MAX_BITSET_BITS} cap"
            )
        full = (1 << t_space) - 1
        merged: dict[tuple[int, ...], int] = {}
        for con in inst.constraints:
            bits = 0
            for t in con.illegal:
                bits |= 1 << t
            merged[con.scope] = merged.get(con.scope, full) & ~bits
        self.merged = merged
        self.unsat_by_merge = any(allowed == 0 for allowed in merged.values())

        self.domains = [(1 << self.d) - 1] * self.n
        self.values: list[int | None] = [None] * self.n
        if self.k == 2:
            self._build_binary()
        else:
            self._build_generic()

    def _build_binary(self):
        d = self.d
        neighbors: list[list[tuple[int, list[int]]]] = [[] for _ in range(self.n)]
        active = 0
        for (x, y), allowed in self.merged.items():
            sup_xy = [0] * d
            sup_yx = [0] * d
            mask = allowed
            while mask:
                bit = mask & -mask
                mask ^= bit
                v, w = divmod(bit.bit_length() - 1, d)
                sup_xy[v] |= 1 << w
                sup_yx[w] |= 1 << v
            neighbors[x].append((y, sup_xy))
            neighbors[y].append((x, sup_yx))
            active += 1
        self.neighbors = neighbors
        self.active = active  # constraints whose scope still has >= 2 unassigned vars

    def _build_generic(self):
        self.scopes = []
        self.allowed = []
        self.con_unassigned = []
        self.var_cons: list[list[int]] = [[] for _ in range(self.n)]
        for ci, (scope, allowed) in enumerate(self.merged.items()):
            self.scopes.append(scope)
            self.allowed.append(allowed)
            self.con_unassigned.append(len(scope))
            for var in scope:
                self.var_cons[var].append(ci)
        self.active = len(self.scopes)

    # -- search ------------------------------------------------------------

    def run(self, budget: Budget, counting: bool):
        # Search recurses once per variable.
        sys.setrecursionlimit(max(sys.getrecursionlimit(), self.n + 256))
        self.node_limit = budget.max_nodes if budget.max_nodes is not None else math.inf
        self.deadline = (
            time.monotonic() + budget.max_seconds if budget.max_seconds is not None else None
        )
        self.nodes = 0
        self.solutions = 0
        self.counting = counting
        self.witness: tuple[int, ...] | None = None
        start = time.perf_counter()
        timed_out = False
        if self.unsat_by_merge:
            found = False
        else:
            try:
                search = self._search_binary if self.k == 2 else self._search_generic
                found = search(self.n)
            except _BudgetExhausted:
                timed_out = True
                found = False
        elapsed = time.perf_counter() - start
        return found, timed_out, elapsed

    def _tick(self):
        self.nodes += 1
        if self.nodes >= self.node_limit:
            raise _BudgetExhausted
        if self.deadline is not None and (self.nodes & _TIME_CHECK_MASK) == 0:
            if time.monotonic() > self.deadline:
                raise _BudgetExhausted

    def _free_product(self) -> int:
        prod = 1
        for x in range(self.n):
            if self.values[x] is None:
                prod *= self.domains[x].bit_count()
        return prod

    def _pick_var(self) -> int:
        best = -1
        best_size = 1 << 30
        values = self.values
        domains = self.domains
        for x in range(self.n):
            if values[x] is None:
                size = domains[x].bit_count()
                if size < best_size:
                    best, best_size = x, size
                    if size <= 1:
                        break
        return best

    def _search_binary(self, unassigned: int) -> bool:
        if unassigned == 0:
            if self.counting:
                self.solutions += 1
                return False
            self.witness = tuple(self.values)  # type: ignore[arg-type]
            return True
        if self.counting and self.active == 0:
            # Remaining variables are pairwise unconstrained: multiply domains.
            self.solutions += self._free_product()
            return False
        x = self._pick_var()
        values = self.values
        domains = self.domains
        neighbors = self.neighbors[x]
        mask = domains[x]
        while mask:
            bit = mask & -mask
            mask ^= bit
            v = bit.bit_length() - 1
            self._tick()
            values[x] = v
            trail = []
            deactivated = 0
            dead = False
            for y, sup in neighbors:
                if values[y] is None:
                    deactivated += 1
                    if not dead:
                        nd = domains[y] & sup[v]
                        if nd == 0:
                            dead = True
                        elif nd != domains[y]:
                            trail.append((y, domains[y]))
                            domains[y] = nd
            self.active -= deactivated
            if not dead and self._search_binary(unassigned - 1):
                return True
            for y, old in reversed(trail):
                domains[y] = old
            self.active += deactivated
            values[x] = None
        return False

    def _prune_single(self, ci: int, y: int) -> int:
        scope = self.scopes[ci]
        d = self.d
        base = 0
        weight_y = 0
        for i, var in enumerate(scope):
            w = d ** (len(scope) - 1 - i)
            if var == y:
                weight_y = w
            else:
                base += self.values[var] * w  # type: ignore[operator]
        allowed = self.allowed[ci]
        new_dom = 0
        mask = self.domains[y]
        while mask:
            bit = mask & -mask
            mask ^= bit
            w = bit.bit_length() - 1
            if (allowed >> (base + weight_y * w)) & 1:
                new_dom |= bit
        return new_dom

    def _full_code(self, ci: int) -> int:
        code = 0
        for var in self.scopes[ci]:
            code = code * self.d + self.values[var]  # type: ignore[operator]
        return code

    def _search_generic(self, unassigned: int) -> bool:
        if unassigned == 0:
            if self.counting:
                self.solutions += 1
                return False
            self.witness = tuple(self.values)  # type: ignore[arg-type]
            return True
        if self.counting and self.active == 0:
            # Constraints at one unassigned var were pruned into that domain already.
            self.solutions += self._free_product()
            return False
        x = self._pick_var()
        values = self.values
        domains = self.domains
        mask0 = domains[x]
        while mask0:
            bit = mask0 & -mask0
            mask0 ^= bit
            v = bit.bit_length() - 1
            self._tick()
            values[x] = v
            trail = []
            deactivated = 0
            dead = False
            touched = []
            for ci in self.var_cons[x]:
                self.con_unassigned[ci] -= 1
                touched.append(ci)
                u = self.con_unassigned[ci]
                if u == 1:
                    deactivated += 1
                if dead:
                    continue
                if u == 0:
                    if not (self.allowed[ci] >> self._full_code(ci)) & 1:
                        dead = True
                elif u == 1:
                    y = next(var for var in self.scopes[ci] if values[var] is None)
                    nd = self._prune_single(ci, y)
                    if nd == 0:
                        dead = True
                    elif nd != domains[y]:
                        trail.append((y, domains[y]))
                        domains[y] = nd
            self.active -= deactivated
            if not dead and self._search_generic(unassigned - 1):
                return True
            for y, old in reversed(trail):
                domains[y] = old
            for ci in touched:
                self.con_unassigned[ci] += 1
            self.active += deactivated
            values[x] = None
        return False


def solve(inst: Instance, budget: Budget = Budget()) -> SolveOutcome:
    """Decide satisfiability; sound and complete within the budget.

    A returned witness is re-verified against the raw instance before return;
    budget exhaustion yields TIMEOUT, never a wrong answer.
    """
    engine = _Engine(inst)
    found, timed_out, elapsed = engine.run(budget, counting=False)
    if found:
        assert engine.witness is not None
        if not satisfies(inst, engine.witness):
            raise AssertionError("solver produced a witness that fails verification")
        return SolveOutcome(SAT, Assignment(engine.witness), engine.nodes, elapsed)
    if timed_out:
        return SolveOutcome(TIMEOUT, None, engine.nodes, elapsed)
    return SolveOutcome(UNSAT, None, engine.nodes, elapsed)


def count(inst: Instance, budget: Budget = Budget()) -> CountOutcome:
    """Count all solutions by exhaustive backtracking enumeration."""
    engine = _Engine(inst)
    _, timed_out, elapsed = engine.run(budget, counting=True)
    status = TIMEOUT if timed_out else EXACT
    return CountOutcome(status, engine.solutions, engine.nodes, elapsed)


def brute_force(inst: Instance) -> CountOutcome:
    """Check all d^n assignments directly against the illegal code lists.

    Independent of the backtracking machinery; guarded at d^n <= 10^7.
    """
    n, d = inst.n, inst.sizes.d
    total = d**n
    if total > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"brute force refuses d^n = {total} > {BRUTE_FORCE_LIMIT} assignments")
    start = time.perf_counter()
    t_space = d**inst.k
    tables = []
    for con in inst.constraints:
        legal = np.ones(t_space, dtype=bool)
        legal[list(con.illegal)] = False
        tables.append((con.scope, legal))
    place = {var: d ** (n - 1 - var) for var in range(n)}
    found = 0
    chunk = 1 << 16
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        ok = np.ones(codes.shape, dtype=bool)
        for scope, legal in tables:
            t = np.zeros(codes.shape, dtype=np.int64)
            for var in scope:
                t = t * d + (codes // place[var]) % d
            ok &= legal[t]
        found += int(ok.sum())
    return CountOutcome(EXACT, found, total, time.perf_counter() - start)

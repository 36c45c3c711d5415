"""Solver soundness, completeness at small scale, and counting agreement."""

import math
import random

import pytest

from rbcsp.core import Constraint, Instance, RBParams, satisfies, _sizes_from_ints
from rbcsp.errors import CapacityError
from rbcsp.gen import SeedPolicy, generate
from rbcsp.solve import EXACT, SAT, TIMEOUT, UNSAT, Budget, brute_force, count, solve


def _instance(n, k, d, constraints, seed=0):
    sizes = _sizes_from_ints(n, k, d, len(constraints), len(constraints[0].illegal) if constraints else 0)
    return Instance(n=n, k=k, sizes=sizes, seed=seed, constraints=tuple(constraints))


def test_empty_constraint_set_is_sat():
    inst = Instance(n=3, k=2, sizes=_sizes_from_ints(3, 2, 3, 1, 0), seed=0, constraints=())
    out = solve(inst)
    assert out.status == SAT
    assert out.witness is not None and satisfies(inst, out.witness)
    assert count(inst).count == 27
    assert brute_force(inst).count == 27


def test_constructed_contradiction_is_unsat():
    cons = [
        Constraint(scope=(0, 1), illegal=(0, 1)),
        Constraint(scope=(0, 1), illegal=(2, 3)),
    ]
    inst = _instance(2, 2, 2, cons)
    assert solve(inst).status == UNSAT
    assert count(inst).count == 0
    assert brute_force(inst).count == 0


def test_single_constraint_counts():
    inst = _instance(2, 2, 2, [Constraint(scope=(0, 1), illegal=(0,))])
    out = count(inst)
    assert out.status == EXACT and out.count == 3
    inst = _instance(2, 2, 2, [Constraint(scope=(0, 1), illegal=(0, 1, 2))])
    assert count(inst).count == 1
    assert solve(inst).witness.values == (1, 1)


def _small_corpus(total=500, master=424242):
    policy = SeedPolicy(master)
    rng = random.Random(master)
    for trial in range(total):
        n = rng.randint(2, 5)
        k = rng.randint(2, min(n, 3))
        d = rng.randint(2, 4)
        alpha = math.log(d) / math.log(n) if n > 2 else (1.0 if d == 2 else math.log(d) / math.log(2))
        m_target = rng.randint(1, 8)
        params = RBParams(
            n=n, k=k, alpha=alpha, p=rng.uniform(0.1, 0.85), r=m_target / (n * math.log(n))
        )
        yield generate(params, policy.trial_seed(trial))


def test_decision_and_count_match_brute_force_on_corpus():
    checked = 0
    for inst in _small_corpus():
        bf = brute_force(inst)
        out = solve(inst)
        assert out.status in (SAT, UNSAT)
        assert (out.status == SAT) == (bf.count > 0)
        if out.witness is not None:
            assert satisfies(inst, out.witness)
        cnt = count(inst)
        assert cnt.status == EXACT and cnt.count == bf.count
        checked += 1
    assert checked == 500


def test_generic_arity_path_against_brute_force():
    policy = SeedPolicy(99)
    params = RBParams(n=5, k=3, alpha=math.log(3) / math.log(5), p=0.5, r=4 / (5 * math.log(5)))
    for trial in range(50):
        inst = generate(params, policy.trial_seed(trial))
        assert inst.k == 3
        bf = brute_force(inst)
        assert count(inst).count == bf.count
        out = solve(inst)
        assert (out.status == SAT) == (bf.count > 0)


def test_node_budget_timeout():
    inst = generate(RBParams(n=12, k=2, alpha=0.8, p=0.25, r=2.8), seed=1)
    out = solve(inst, Budget(max_nodes=2, max_seconds=None))
    assert out.status == TIMEOUT and out.witness is None
    cnt = count(inst, Budget(max_nodes=2, max_seconds=None))
    assert cnt.status == TIMEOUT


def test_brute_force_guard():
    inst = generate(
        RBParams(n=30, k=2, alpha=math.log(3) / math.log(30), p=0.3, r=2 / (30 * math.log(30))),
        seed=0,
    )
    with pytest.raises(CapacityError):
        brute_force(inst)  # 3^30 assignments


def test_solver_bitset_guard():
    params = RBParams(n=3000, k=2, alpha=1.0, p=1e-5, r=1 / (3000 * math.log(3000)))
    inst = generate(params, seed=0)
    with pytest.raises(CapacityError):
        solve(inst)  # d^k = 9e6 bits exceeds the bitset cap


def test_duplicate_scopes_are_merged():
    # Same scope twice with complementary illegal halves: only code 3 survives.
    cons = [
        Constraint(scope=(0, 1), illegal=(0, 1)),
        Constraint(scope=(0, 1), illegal=(2,)),
    ]
    inst = _instance(2, 2, 2, cons)
    out = solve(inst)
    assert out.status == SAT
    assert out.witness.values == (1, 1)
    assert count(inst).count == 1


def test_nodes_are_deterministic():
    inst = generate(RBParams(n=14, k=2, alpha=0.8, p=0.25, r=2.7), seed=9)
    first = solve(inst, Budget(max_nodes=10**6, max_seconds=None))
    second = solve(inst, Budget(max_nodes=10**6, max_seconds=None))
    assert (first.status, first.nodes) == (second.status, second.nodes)

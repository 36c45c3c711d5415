"""Seeded instance sampler.

Each constraint scope is a uniform k-subset of the n variables (drawn by
rejection over k uniform indices, then sorted) and each illegal set is a
uniform q-subset of the d^k tuple codes, drawn without repetition in O(q)
memory.  Generation is a pure function of (params, seed); batches derive one
independent-behaving stream per trial index from a master seed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Constraint, Instance, RBParams, derive

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """SplitMix64 finalizer: bijective 64-bit mixing."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True)
class SeedPolicy:
    """Derives per-trial seeds from a master seed.

    The stream for trial i depends only on (master_seed, i), so any single
    trial can be regenerated in isolation and batches are order-stable no
    matter how they are scheduled.
    """

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError(f"master seed must fit 64 bits, got {self.master_seed}")

    def trial_seed(self, trial: int) -> int:
        if trial < 0:
            raise ValueError(f"trial index must be non-negative, got {trial}")
        return _mix64(self.master_seed + (trial + 1) * _GOLDEN)

    def substream(self, index: int) -> "SeedPolicy":
        """A derived policy for nested experiment dimensions (grid point, size, ...)."""
        return SeedPolicy(self.trial_seed(index))


def _draw_scope(rng: np.random.Generator, n: int, k: int) -> tuple[int, ...]:
    # Rejection over k uniform indices: exactly uniform over k-subsets.
    while True:
        idx = rng.integers(0, n, size=k)
        distinct = set(idx.tolist())
        if len(distinct) == k:
            return tuple(sorted(distinct))


def _draw_codes(rng: np.random.Generator, t_space: int, q: int) -> tuple[int, ...]:
    if q == 0:
        return ()
    if q > t_space // 2:
        # Dense regime: partial Fisher-Yates over the full code range (O(t_space) = O(q)).
        pool = np.arange(t_space, dtype=np.int64)
        for i in range(q):
            j = int(rng.integers(i, t_space))
            pool[i], pool[j] = pool[j], pool[i]
        return tuple(sorted(int(x) for x in pool[:q]))
    # Sparse regime: Floyd's subset sampling, O(q) memory.
    chosen: set[int] = set()
    for j in range(t_space - q, t_space):
        t = int(rng.integers(0, j + 1))
        chosen.add(j if t in chosen else t)
    return tuple(sorted(chosen))


def generate(params: RBParams, seed: int) -> Instance:
    """Generate one instance; deterministic given (params, seed)."""
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must fit 64 bits, got {seed}")
    sizes = derive(params)
    rng = np.random.default_rng(seed)
    t_space = sizes.d**params.k
    constraints = tuple(
        Constraint(
            scope=_draw_scope(rng, params.n, params.k),
            illegal=_draw_codes(rng, t_space, sizes.q),
        )
        for _ in range(sizes.m)
    )
    return Instance(n=params.n, k=params.k, sizes=sizes, seed=seed, constraints=constraints)


def _generate_job(job) -> Instance:
    params, seed = job
    return generate(params, seed)


def generate_batch(params: RBParams, policy: SeedPolicy, count: int, workers: int = 1) -> list[Instance]:
    """Generate `count` instances on trial streams 0..count-1, in trial order.

    The result is identical for any worker-pool width.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    jobs = [(params, policy.trial_seed(i)) for i in range(count)]
    if workers <= 1:
        return [_generate_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_generate_job, jobs, chunksize=max(1, count // (4 * workers))))


def write_batch(
    params: RBParams,
    policy: SeedPolicy,
    count: int,
    out_dir: str | Path,
    prefix: str = "rb",
    workers: int = 1,
) -> Path:
    """Write a batch as RBCSP files plus a tab-delimited manifest; returns the manifest path.

    Manifest lines read "<trial>\\t<seed>\\t<path>", one per instance.
    """
    from .core import encode_instance

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    instances = generate_batch(params, policy, count, workers=workers)
    rows = []
    for trial, inst in enumerate(instances):
        path = out_dir / f"{prefix}_{trial:05d}.rbcsp"
        path.write_text(encode_instance(inst), encoding="utf-8", newline="\n")
        rows.append(f"{trial}\t{inst.seed}\t{path}")
    manifest = out_dir / f"{prefix}_manifest.tsv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    return manifest

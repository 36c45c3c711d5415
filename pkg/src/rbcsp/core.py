"""Core data model for model RB random CSP instances.

Model RB draws m = r*n*ln(n) constraints of arity k over n variables, each
variable ranging over a domain of size d = n^alpha, and each constraint
forbidding a uniform random set of q = p*d^k of its d^k value tuples.  This
module holds the control parameters, the integer sizes actually generated,
the instance data model, and the bit-exact RBCSP v1 text format shared by
the generator, solver and experiment layers.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .errors import CapacityError, DegenerateError, FormatError, InvariantError

FORMAT_MAGIC = "RBCSP 1"

# Tuple spaces are capped so codes stay inside a signed 64-bit integer.
MAX_TUPLE_SPACE_BITS = 63

_MASK64 = (1 << 64) - 1


def fmt_float(x: float) -> str:
    """Canonical float rendering used in all text output: 15 significant digits."""
    return f"{x:.15g}"


@dataclass(frozen=True)
class RBParams:
    """Control parameters.

    n      -- number of variables (>= 2)
    k      -- constraint arity (2 <= k <= n)
    alpha  -- domain exponent, d = n^alpha (> 0)
    p      -- fraction of forbidden tuples per constraint (0 < p < 1)
    r      -- constraint density, m = r*n*ln(n) (> 0)
    delta  -- confidence level for scaling-window operations (0 < delta < 1/2)
    """

    n: int
    k: int
    alpha: float
    p: float
    r: float
    delta: float = 0.1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.k > self.n:
            raise ValueError(f"k must be <= n, got k={self.k}, n={self.n}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.r <= 0.0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")

    @property
    def regime_r(self) -> bool:
        """True iff alpha > 1/k and k >= 1/(1-p): the sharp transition in r is guaranteed.

        The arity condition is evaluated as k*p <= k-1, which is the same
        inequality but exact at the boundary p = 1 - 1/k in floating point.
        """
        return self.alpha > 1.0 / self.k and self.k * self.p <= self.k - 1.0

    @property
    def regime_p(self) -> bool:
        """True iff alpha > 1/k and k*e^(-alpha/r) >= 1: the sharp transition in p is guaranteed."""
        return self.alpha > 1.0 / self.k and self.k * math.exp(-self.alpha / self.r) >= 1.0


@dataclass(frozen=True)
class DerivedSizes:
    """Integer sizes actually generated, plus the effective parameters they realize.

    The effective parameters are recomputed from the integers, not copied from
    RBParams, so analysis can use what was actually built.
    """

    d: int
    m: int
    q: int
    alpha_eff: float
    p_eff: float
    r_eff: float


def _sizes_from_ints(n: int, k: int, d: int, m: int, q: int) -> DerivedSizes:
    t_space = d**k
    return DerivedSizes(
        d=d,
        m=m,
        q=q,
        alpha_eff=math.log(d) / math.log(n),
        p_eff=q / t_space,
        r_eff=m / (n * math.log(n)),
    )


def derive(params: RBParams) -> DerivedSizes:
    """Round the real-valued sizes to the integers d, m, q that generation uses.

    d = round(n^alpha) clamped at 2, m = round(r*n*ln n) clamped at 1,
    q = round(p*d^k), all rounded half-to-even.  Raises CapacityError when the
    tuple space d^k does not fit 63 bits and DegenerateError when q rounds all
    the way up to d^k (no legal tuple would remain).
    """
    n, k = params.n, params.k
    # Pre-check in log space so n**alpha below cannot overflow a float.
    if params.alpha * k * math.log2(n) > MAX_TUPLE_SPACE_BITS + 2:
        raise CapacityError(
            f"tuple space n^(alpha*k) ~ 2^{params.alpha * k * math.log2(n):.0f} exceeds "
            f"{MAX_TUPLE_SPACE_BITS} bits"
        )
    d = max(2, round(n**params.alpha))
    t_space = d**k
    if t_space >= 1 << MAX_TUPLE_SPACE_BITS:
        raise CapacityError(f"tuple space d^k = {d}^{k} exceeds {MAX_TUPLE_SPACE_BITS} bits")
    m = max(1, round(params.r * n * math.log(n)))
    # Exact half-to-even rounding of p*d^k even when d^k is too wide for a float.
    q = round(Fraction(params.p) * t_space)
    if q >= t_space:
        raise DegenerateError(
            f"q = round(p*d^k) = {q} equals d^k = {t_space}: p={params.p} leaves no legal tuple"
        )
    return _sizes_from_ints(n, k, d, m, q)


@dataclass(frozen=True)
class Constraint:
    """A single constraint: sorted variable scope plus forbidden tuple codes.

    The code of values (v_1..v_k) over the sorted scope is the big-endian
    mixed-radix integer sum(v_i * d^(k-i)); codes are stored strictly increasing.
    """

    scope: tuple[int, ...]
    illegal: tuple[int, ...]


@dataclass(frozen=True)
class Assignment:
    """A value for every variable, each in [0, d)."""

    values: tuple[int, ...]


@dataclass(frozen=True)
class Instance:
    """A concrete generated CSP: m constraints over n variables.

    Duplicate scopes are permitted (constraints are drawn with repetition);
    all types here are immutable and safe to share across workers.
    """

    n: int
    k: int
    sizes: DerivedSizes
    seed: int
    constraints: tuple[Constraint, ...]


def tuple_code(values, scope, d: int) -> int:
    """Code of the value tuple an assignment induces on a sorted scope."""
    code = 0
    for var in scope:
        code = code * d + values[var]
    return code


def satisfies(inst: Instance, values) -> bool:
    """Check an assignment against the raw constraint list (independent verifier)."""
    if isinstance(values, Assignment):
        values = values.values
    d = inst.sizes.d
    for con in inst.constraints:
        code = 0
        for var in con.scope:
            code = code * d + values[var]
        i = bisect_left(con.illegal, code)
        if i < len(con.illegal) and con.illegal[i] == code:
            return False
    return True


def validate_instance(inst: Instance) -> None:
    """Raise InvariantError if any Instance invariant is violated."""
    n, k, sizes = inst.n, inst.k, inst.sizes
    t_space = sizes.d**k
    if len(inst.constraints) != sizes.m:
        raise InvariantError(f"expected {sizes.m} constraints, found {len(inst.constraints)}")
    if not 0 <= inst.seed <= _MASK64:
        raise InvariantError(f"seed {inst.seed} does not fit 64 bits")
    for idx, con in enumerate(inst.constraints):
        if len(con.scope) != k:
            raise InvariantError(f"constraint {idx}: scope has {len(con.scope)} variables, expected {k}")
        if any(not 0 <= v < n for v in con.scope):
            raise InvariantError(f"constraint {idx}: variable index out of [0, {n})")
        if any(a >= b for a, b in zip(con.scope, con.scope[1:])):
            raise InvariantError(f"constraint {idx}: scope not sorted strictly ascending")
        if len(con.illegal) != sizes.q:
            raise InvariantError(f"constraint {idx}: {len(con.illegal)} illegal codes, expected {sizes.q}")
        if any(not 0 <= t < t_space for t in con.illegal):
            raise InvariantError(f"constraint {idx}: tuple code out of [0, {t_space})")
        if any(a >= b for a, b in zip(con.illegal, con.illegal[1:])):
            raise InvariantError(f"constraint {idx}: illegal codes not strictly increasing")


def encode_instance(inst: Instance) -> str:
    """Serialize to the RBCSP v1 text format (UTF-8, LF, newline-terminated).

    Line 1: "RBCSP 1".  Line 2: "n=<n> k=<k> d=<d> m=<m> q=<q> seed=<seed>".
    Then one line per constraint: "c v_1 ... v_k : t_1 ... t_q" with the scope
    sorted ascending and the codes strictly increasing.  Round-trip stable.
    """
    s = inst.sizes
    lines = [
        FORMAT_MAGIC,
        f"n={inst.n} k={inst.k} d={s.d} m={s.m} q={s.q} seed={inst.seed}",
    ]
    for con in inst.constraints:
        tokens = ["c", *map(str, con.scope), ":", *map(str, con.illegal)]
        lines.append(" ".join(tokens))
    return "\n".join(lines) + "\n"


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise FormatError(f"expected integer {what}, got {token!r}", line=line) from None


def decode_instance(text: str) -> Instance:
    """Parse an RBCSP v1 document; inverse of encode_instance.

    Raises FormatError (with a 1-based line number) on syntactic problems and
    InvariantError on semantic ones (unsorted scope, duplicate codes, bad counts).
    """
    if not text.endswith("\n"):
        raise FormatError("document must end with a newline")
    lines = text.split("\n")[:-1]
    if not lines or lines[0] != FORMAT_MAGIC:
        raise FormatError(f"first line must be {FORMAT_MAGIC!r}", line=1)
    if len(lines) < 2:
        raise FormatError("missing header line", line=2)

    header = lines[1].split(" ")
    keys = ("n", "k", "d", "m", "q", "seed")
    if len(header) != len(keys) or any(not tok.startswith(key + "=") for tok, key in zip(header, keys)):
        raise FormatError("header must read 'n=<n> k=<k> d=<d> m=<m> q=<q> seed=<seed>'", line=2)
    n, k, d, m, q, seed = (_parse_int(tok.split("=", 1)[1], key, 2) for tok, key in zip(header, keys))

    if n < 2 or k < 2 or k > n:
        raise InvariantError(f"invalid sizes n={n}, k={k}", line=2)
    if d < 2 or m < 1:
        raise InvariantError(f"invalid sizes d={d}, m={m}", line=2)
    t_space = d**k
    if not 0 <= q < t_space:
        raise InvariantError(f"q={q} out of [0, d^k={t_space})", line=2)
    if not 0 <= seed <= _MASK64:
        raise InvariantError(f"seed {seed} does not fit 64 bits", line=2)

    body = lines[2:]
    if len(body) != m:
        raise FormatError(f"header claims m={m} constraints but document has {len(body)}", line=2 + len(body) + 1)

    constraints = []
    for i, raw in enumerate(body):
        lineno = 3 + i
        tokens = raw.split(" ")
        if len(tokens) != 2 + k + q or tokens[0] != "c" or tokens[1 + k] != ":":
            raise FormatError(f"constraint line must read 'c v_1 ... v_{k} : t_1 ... t_{q}'", line=lineno)
        scope = tuple(_parse_int(t, "variable index", lineno) for t in tokens[1 : 1 + k])
        illegal = tuple(_parse_int(t, "tuple code", lineno) for t in tokens[2 + k :])
        constraints.append(Constraint(scope=scope, illegal=illegal))

    inst = Instance(
        n=n, k=k, sizes=_sizes_from_ints(n, k, d, m, q), seed=seed, constraints=tuple(constraints)
    )
    validate_instance(inst)
    return inst

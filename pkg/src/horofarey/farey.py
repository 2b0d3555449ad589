"""Enumeration and counting of multidimensional Farey fractions.

F(Q, theta) is the set of rationals p/q in [0,1)^(d-1) with (p, q) a primitive
integer vector and theta*Q < q <= Q.  theta = 0 gives the full set F(Q).
Counting has an independent Moebius-inversion oracle so enumeration bugs and
counting bugs cannot hide each other.
"""

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import zeta

DEFAULT_POINT_CAP = 10 ** 8


@dataclass(frozen=True)
class FareyPoint:
    """Primitive pair (p, q) with its rational location p/q in [0,1)^(d-1)."""

    p: tuple
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if any(not (0 <= pi < self.q) for pi in self.p):
            raise ValueError(f"numerators must lie in [0, q), got {self.p}")
        if math.gcd(*self.p, self.q) != 1:
            raise ValueError(f"({self.p}, {self.q}) is not primitive")

    @property
    def r(self):
        return np.asarray(self.p, dtype=float) / self.q

    @property
    def dim(self):
        return len(self.p) + 1


@dataclass
class FareySet:
    d: int
    Q: float
    theta: float
    points: list = field(repr=False)

    def __len__(self):
        return len(self.points)

    def fractions(self):
        """(n, d-1) array of the rational locations in enumeration order."""
        return np.array([pt.r for pt in self.points]).reshape(len(self.points), self.d - 1)


def is_primitive(v):
    """True iff the integer coordinates of v have gcd 1."""
    v = [int(c) for c in v]
    if all(c == 0 for c in v):
        raise ValueError("the zero vector has no gcd")
    return math.gcd(*v) == 1


def _mobius_sieve(n):
    """Moebius function mu(1..n) by a standard multiplicative sieve."""
    mu = np.ones(n + 1, dtype=np.int64)
    primes = []
    is_comp = np.zeros(n + 1, dtype=bool)
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > n:
                break
            is_comp[i * p] = True
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return mu


@lru_cache(maxsize=32)
def _mertens_table(n):
    mu = _mobius_sieve(n)
    return np.cumsum(mu[: n + 1])


def _power_sum(k, x):
    """Sum of m^k for m = 1..x, exact (Python ints)."""
    x = int(x)
    if x <= 0:
        return 0
    if k == 0:
        return x
    if k == 1:
        return x * (x + 1) // 2
    if k == 2:
        return x * (x + 1) * (2 * x + 1) // 6
    if k == 3:
        return (x * (x + 1) // 2) ** 2
    return sum(m ** k for m in range(1, x + 1))


def farey_count_exact(d, Q):
    """|F(Q)| = sum over q <= Q of the Jordan totient J_(d-1)(q), exactly.

    Moebius inversion grouped over the O(sqrt(Q)) distinct values of Q // e:
    sum_e mu(e) * S_(d-1)(Q // e) with S_k the k-th power sum.
    """
    Q = int(Q)
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    k = d - 1
    mert = _mertens_table(Q)
    total = 0
    e = 1
    while e <= Q:
        v = Q // e
        e_hi = Q // v
        coeff = int(mert[e_hi]) - int(mert[e - 1])
        total += coeff * _power_sum(k, v)
        e = e_hi + 1
    return total


def farey_count_asymptotic(d, Q):
    """Leading-order size Q^d / (d * zeta(d))."""
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    return float(Q) ** d / (d * float(zeta(d, 1)))


def _q_bounds(Q, theta):
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must be in [0, 1), got {theta}")
    q_max = int(math.floor(Q))  # F(Q) = F(floor(Q))
    q_min = int(math.floor(theta * Q)) + 1 if theta > 0 else 1
    return q_min, q_max


def iter_farey_blocks(d, Q, theta=0.0, q_range=None):
    """Yield (q, P) blocks with P an (m, d-1) int64 array of numerators.

    Enumeration is exhaustive and lexicographic by (q, p).  q_range restricts
    to a denominator sub-interval, enabling disjoint sharding.
    """
    if d < 2 or d > 8:
        raise ValueError(f"d must be in [2, 8], got {d}")
    q_min, q_max = _q_bounds(Q, theta)
    if q_range is not None:
        q_min = max(q_min, q_range[0])
        q_max = min(q_max, q_range[1])
    for q in range(q_min, q_max + 1):
        if q == 1:
            yield 1, np.zeros((1, d - 1), dtype=np.int64)
            continue
        base = np.arange(q, dtype=np.int64)
        if d == 2:
            P = base[np.gcd(base, q) == 1][:, None]
        else:
            grids = np.meshgrid(*([base] * (d - 1)), indexing="ij")
            P = np.stack([g.ravel() for g in grids], axis=1)
            g = np.gcd.reduce(P, axis=1)
            P = P[np.gcd(g, q) == 1]
        yield q, P


def count_estimate(d, Q, theta=0.0):
    q_min, q_max = _q_bounds(Q, theta)
    if q_max < q_min:
        return 0
    total = farey_count_exact(d, q_max)
    if q_min > 1:
        total -= farey_count_exact(d, q_min - 1)
    return total


def generate_farey(d, Q, theta=0.0, cap=DEFAULT_POINT_CAP):
    """Materialize F(Q, theta) as a FareySet, guarded by a point-count cap."""
    est = count_estimate(d, Q, theta)
    if est > cap:
        raise ResourceWarning(f"Farey set would hold {est} points, above the cap {cap}")
    points = []
    for q, P in iter_farey_blocks(d, Q, theta):
        points.extend(FareyPoint(tuple(int(c) for c in row), q) for row in P)
    return FareySet(d=d, Q=float(Q), theta=float(theta), points=points)


def farey_fractions(d, Q, theta=0.0, cap=DEFAULT_POINT_CAP):
    """(fractions, denominators) arrays for F(Q, theta), in enumeration order.

    Vectorized bulk variant of generate_farey for the experiment pipelines.
    """
    est = count_estimate(d, Q, theta)
    if est > cap:
        raise ResourceWarning(f"Farey set would hold {est} points, above the cap {cap}")
    fracs, dens = [], []
    for q, P in iter_farey_blocks(d, Q, theta):
        fracs.append(P.astype(float) / q)
        dens.append(np.full(len(P), q, dtype=np.int64))
    r = np.concatenate(fracs, axis=0)
    q = np.concatenate(dens)
    return r, q


def write_farey_csv(path, d, Q, theta=0.0, cap=DEFAULT_POINT_CAP):
    """Dump F(Q, theta) as CSV with header q,p1,...,p{d-1} in enumeration order."""
    est = count_estimate(d, Q, theta)
    if est > cap:
        raise ResourceWarning(f"Farey set would hold {est} points, above the cap {cap}")
    n = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q"] + [f"p{i + 1}" for i in range(d - 1)])
        for q, P in iter_farey_blocks(d, Q, theta):
            for row in P:
                writer.writerow([q] + [int(c) for c in row])
            n += len(P)
    return n

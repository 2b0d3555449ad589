"""Geometric machinery behind the equidistribution argument, as testable code.

The thickened Farey set has two characterizations: a union of shrinking
Euclidean balls around the Farey points, and a primitive-vector cone
condition.  Both are implemented here, along with the cone-volume closed
form, the disjointness implication, and the compactness-based epsilon bound
that makes the thickened balls pairwise disjoint.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from .farey import iter_farey_blocks
from .groups import flow, n_plus
from .lattices import Lattice, shortest_vector


@dataclass(frozen=True)
class ConeRegion:
    """Cone {y in R^d : |(y_1..y_{d-1})| < eps * y_d, theta < y_d <= 1}."""

    d: int
    epsilon: float
    theta: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must be in (0, 1)")


def in_cone(y, region):
    """Strict norm / strict lower / inclusive upper inequalities, exactly as defined."""
    y = np.asarray(y, dtype=float)
    if y.size != region.d:
        raise ValueError(f"expected a vector of length {region.d}")
    yd = y[-1]
    return bool(np.linalg.norm(y[:-1]) < region.epsilon * yd and region.theta < yd <= 1.0)


def unit_ball_volume(k):
    """Volume of the Euclidean unit ball in R^k."""
    return math.pi ** (k / 2.0) / gamma(k / 2.0 + 1.0)


def cone_volume(region):
    """Closed form vol(B_1^(d-1)) * eps^(d-1) * (1 - theta^d) / d."""
    d = region.d
    return unit_ball_volume(d - 1) * region.epsilon ** (d - 1) * (1.0 - region.theta ** d) / d


def cone_volume_mc(region, n, rng):
    """Monte Carlo oracle for the cone volume: (estimate, standard_error)."""
    d = region.d
    eps = region.epsilon
    box_vol = (2.0 * eps) ** (d - 1) * 1.0
    hits = 0
    chunk = 10 ** 6
    done = 0
    while done < n:
        m = min(chunk, n - done)
        yp = rng.uniform(-eps, eps, size=(m, d - 1))
        yd = rng.uniform(0.0, 1.0, size=m)
        inside = (np.linalg.norm(yp, axis=1) < eps * yd) & (region.theta < yd)
        hits += int(np.count_nonzero(inside))
        done += m
    p = hits / n
    est = p * box_vol
    se = box_vol * math.sqrt(max(p * (1.0 - p), 1e-300) / n)
    return est, se


def _window_candidates(x, q):
    """Integer numerator candidates near q*x: round(q x) plus a +-1 window."""
    base = np.rint(q * x).astype(np.int64)
    dm1 = x.size
    offsets = np.stack(np.meshgrid(*([np.array([-1, 0, 1])] * dm1), indexing="ij"), axis=-1).reshape(-1, dm1)
    return base[None, :] + offsets


def thickening_member_balls(x, Q, theta, epsilon, t, q_cap=10 ** 6):
    """Ball characterization: x lies within eps*e^(-dt) of some Farey point
    of F(Q, theta) translated by Z^(d-1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size + 1
    radius = epsilon * math.exp(-d * t)
    q_max = int(math.floor(Q))
    if q_max > q_cap:
        raise ResourceWarning(f"denominator range {q_max} above the cap {q_cap}")
    if radius * q_max >= 0.5:
        raise ValueError("windowed search needs eps * e^(-dt) * Q < 1/2")
    q_min = int(math.floor(theta * Q)) + 1 if theta > 0 else 1
    for q in range(q_min, q_max + 1):
        for p in _window_candidates(x, q):
            if np.all(p == 0) and q == 0:
                continue
            if math.gcd(*[int(c) for c in p], q) != 1:
                continue
            if np.linalg.norm(x - p / q) < radius:
                return True
    return False


def thickening_member_cone(x, Q, theta, epsilon, t, q_cap=10 ** 6):
    """Cone characterization: some primitive a in Z^d has a n_+(x) flow(-t)
    inside the cone.  Built from the actual matrices, so it cross-checks the
    ball form through an independent computation path."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size + 1
    q_max = int(math.floor(Q))
    if q_max > q_cap:
        raise ResourceWarning(f"denominator range {q_max} above the cap {q_cap}")
    if epsilon * math.exp(-d * t) * q_max >= 0.5:
        raise ValueError("windowed search needs eps * e^(-dt) * Q < 1/2")
    region = ConeRegion(d=d, epsilon=epsilon, theta=theta) if theta > 0 else None
    M = n_plus(x) @ flow(d, -t)
    q_min = int(math.floor(theta * Q)) + 1 if theta > 0 else 1
    for q in range(q_min, q_max + 1):
        # the cone forces the numerator block of a = (p, q) to sit near -q*x
        for p in _window_candidates(-x, q):
            if math.gcd(*[int(c) for c in p], q) != 1:
                continue
            a = np.concatenate([p.astype(float), [float(q)]])
            y = a @ M
            yd = y[-1]
            if theta > 0:
                if in_cone(y, region):
                    return True
            else:
                if np.linalg.norm(y[:-1]) < epsilon * yd and 0.0 < yd <= 1.0:
                    return True
    return False


def _offsets_grid(dm1):
    return np.stack(
        np.meshgrid(*([np.array([-1, 0, 1])] * dm1), indexing="ij"), axis=-1
    ).reshape(-1, dm1)


def thickening_equivalence_batch(d, n, rng, q_hi=24):
    """Vectorized randomized cross-check of the two thickening characterizations.

    Draws n random (x, Q, theta, eps) tuples (half the x near an actual
    rational so membership-true cases are frequent), evaluates ball
    membership through fraction distances and cone membership through the
    actual a n_+(x) flow(-t) products, and counts disagreements.  Returns
    (n, disagreements, first_example_or_None).
    """
    dm1 = d - 1
    Q = rng.integers(3, q_hi + 1, size=n)
    theta = np.where(rng.random(n) < 0.5, 0.0, rng.uniform(0.1, 0.8, size=n))
    # nudge keeps q = Q off the exact y_d = 1 float boundary (measure zero)
    t = np.log(Q) / dm1 + 1e-9
    eps = rng.uniform(0.05, np.minimum(1.5, 0.45 * Q ** (1.0 / dm1)))
    radius = eps * np.exp(-d * t)
    q_min = np.where(theta > 0, np.floor(theta * Q).astype(np.int64) + 1, 1)

    x = rng.random((n, dm1))
    near = rng.random(n) < 0.5
    q_pick = rng.integers(np.maximum(q_min, 2), Q + 1)
    p_pick = (rng.random((n, dm1)) * q_pick[:, None]).astype(np.int64)
    x_near = np.mod(p_pick / q_pick[:, None] + rng.normal(size=(n, dm1)) * radius[:, None], 1.0)
    x[near] = x_near[near]

    # cone-side matrices n_+(x) flow(-t), built explicitly
    M = np.zeros((n, d, d))
    et = np.exp(t)
    M[:, np.arange(dm1), np.arange(dm1)] = et[:, None]
    M[:, -1, :dm1] = x * et[:, None]
    M[:, -1, -1] = np.exp(-dm1 * t)

    offsets = _offsets_grid(dm1)
    member_balls = np.zeros(n, dtype=bool)
    member_cone = np.zeros(n, dtype=bool)
    for q in range(1, q_hi + 1):
        active = (q >= q_min) & (q <= Q)
        if not np.any(active):
            continue
        # ball path: fraction distances
        cand = np.rint(q * x).astype(np.int64)[:, None, :] + offsets
        prim = np.gcd(np.gcd.reduce(np.abs(cand), axis=2), q) == 1
        dist = np.linalg.norm(x[:, None, :] - cand / q, axis=2)
        member_balls |= active & np.any(prim & (dist < radius[:, None]), axis=1)
        # cone path: primitive vectors through the actual matrices
        cand2 = np.rint(-q * x).astype(np.int64)[:, None, :] + offsets
        prim2 = np.gcd(np.gcd.reduce(np.abs(cand2), axis=2), q) == 1
        a = np.concatenate(
            [cand2.astype(float), np.full((n, offsets.shape[0], 1), float(q))], axis=2
        )
        y = np.einsum("nkd,nde->nke", a, M)
        yd = y[:, :, -1]
        hit = (np.linalg.norm(y[:, :, :dm1], axis=2) < eps[:, None] * yd) \
            & (theta[:, None] < yd) & (yd <= 1.0)
        member_cone |= active & np.any(prim2 & hit, axis=1)
    bad = member_balls != member_cone
    disagreements = int(np.count_nonzero(bad))
    example = None
    if disagreements:
        i = int(np.argmax(bad))
        example = {"x": x[i].tolist(), "Q": int(Q[i]), "theta": float(theta[i]),
                   "epsilon": float(eps[i]), "t": float(t[i]),
                   "balls": bool(member_balls[i]), "cone": bool(member_cone[i])}
    return n, disagreements, example


def step2_implication_check(A, b, y, epsilon, theta, p, q):
    """Disjointness implication: if the three cone-membership premises hold
    for M = [[A, b^T],[0, 1]] M_y, then |pA| < 2*eps.

    Returns True when the implication holds (vacuously true when any premise
    fails); a False return would be a counterexample to the claim.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    d = y.size
    if y[-1] <= 0:
        raise ValueError("y_d must be positive")
    yp, yd = y[:-1], y[-1]
    c = float(p @ b) + q
    lhs = p @ A * yd ** (-1.0 / (d - 1)) + c * yp
    premise = (
        np.linalg.norm(lhs) < epsilon * c * yd
        and theta < c * yd <= 1.0
        and np.linalg.norm(yp) < epsilon * yd
        and theta < yd <= 1.0
    )
    if not premise:
        return True
    return bool(np.linalg.norm(p @ A) < 2.0 * epsilon)


def step2_premise_batch(d, n, rng):
    """Vectorized premise-satisfying inputs plus the implication verdicts.

    Inputs are built backwards from the premises (pick the cone data first,
    then solve for a matrix A realizing the needed value of pA), so every
    trial genuinely satisfies all three premises.  Returns (#trials checked,
    #violations).
    """
    dm1 = d - 1
    eps = rng.uniform(0.01, 0.49, size=n)
    theta = rng.uniform(0.05, 0.9, size=n)
    yd = theta + (1.0 - theta) * rng.uniform(1e-9, 1.0, size=n)

    def ball(scale):
        u = rng.normal(size=(n, dm1))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        rad = rng.uniform(0.0, 1.0, size=n) ** (1.0 / dm1)
        return u * (scale * rad * (1.0 - 1e-9))[:, None]

    ypr = ball(eps * yd)
    c_lo = theta / yd
    c_hi = 1.0 / yd
    c = c_lo + (c_hi - c_lo) * rng.uniform(1e-9, 1.0, size=n)
    u = ball(eps * c * yd)
    w = (yd ** (1.0 / dm1))[:, None] * (u - c[:, None] * ypr)  # target pA

    p = rng.integers(-5, 6, size=(n, dm1))
    p[np.all(p == 0, axis=1), 0] = 1
    q = rng.integers(-5, 6, size=n)
    # b solves p.b + q = c along the first nonzero coordinate of p
    k = np.argmax(p != 0, axis=1)
    b = rng.uniform(-1.0, 1.0, size=(n, dm1))
    rows = np.arange(n)
    pk = p[rows, k].astype(float)
    resid = c - q - (p * b).sum(axis=1) + p[rows, k] * b[rows, k]
    b[rows, k] = resid / pk
    # A random, then one row adjusted so that pA = w
    A = rng.normal(size=(n, dm1, dm1))
    pa = np.einsum("ni,nij->nj", p.astype(float), A)
    A[rows, k, :] += (w - pa) / pk[:, None]

    pa = np.einsum("ni,nij->nj", p.astype(float), A)
    lhs = pa * (yd ** (-1.0 / dm1))[:, None] + c[:, None] * ypr
    cyd = c * yd
    premise = (
        (np.linalg.norm(lhs, axis=1) < eps * cyd)
        & (theta < cyd)
        & (cyd <= 1.0)
        & (np.linalg.norm(ypr, axis=1) < eps * yd)
        & (theta < yd)
        & (yd <= 1.0)
    )
    conclusion = np.linalg.norm(pa, axis=1) < 2.0 * eps
    checked = int(np.count_nonzero(premise))
    violations = int(np.count_nonzero(premise & ~conclusion))
    return checked, violations


def mahler_epsilon0(family, search_bound=8):
    """Half the minimal nonzero |pA| over the family: any eps at or below the
    returned value makes the thickened balls disjoint for that family.

    The minimum is certified by reduction + enumeration; the search_bound box
    scan is a redundant cross-check on the certified value.
    """
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    if search_bound < 4:
        raise ValueError("search_bound must be >= 4")
    best = math.inf
    for A in family:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        k = A.shape[0]
        if k == 1:
            lam = abs(float(A[0, 0]))
        else:
            lam = shortest_vector(Lattice(basis=A / abs(np.linalg.det(A)) ** (1.0 / k)))
            lam *= abs(np.linalg.det(A)) ** (1.0 / k)
        rng_box = np.arange(-search_bound, search_bound + 1)
        grids = np.meshgrid(*([rng_box] * k), indexing="ij")
        P = np.stack([g.ravel() for g in grids], axis=1)
        P = P[np.any(P != 0, axis=1)]
        box_min = float(np.min(np.linalg.norm(P @ A, axis=1)))
        if box_min < lam - 1e-9 * max(1.0, lam):
            raise RuntimeError("box scan undercut the certified shortest vector")
        best = min(best, lam)
    return best / 2.0


def disjointness_scan(Q, theta, epsilon, q_cap=10 ** 6):
    """Exhaustive d = 2 check that the thickened balls around F(Q, theta) are
    pairwise disjoint mod 1: consecutive gaps must exceed twice the radius.

    Returns the offending pair, or None when disjoint.
    """
    d = 2
    t = math.log(Q) / (d - 1)
    radius = epsilon * math.exp(-d * t)
    fracs = []
    for q, P in iter_farey_blocks(d, Q, theta):
        fracs.extend((float(p[0]) / q, int(p[0]), q) for p in P)
    fracs.sort()
    # wrap around mod 1 (the theta-restricted set need not contain 0/1)
    extended = fracs + [(fracs[0][0] + 1.0, fracs[0][1], fracs[0][2])]
    for (r1, p1, q1), (r2, p2, q2) in zip(extended[:-1], extended[1:]):
        if r2 - r1 < 2.0 * radius:
            return (p1, q1), (p2, q2)
    return None

"""Unimodular lattices, reduction, invariant observables and horospherical embeddings.

A lattice is Z^d @ B (row convention).  All observables here are invariant
under integer unimodular basis changes, which is what makes them well-defined
functions on the space of lattices SL(d,Z)\\SL(d,R).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .groups import DIM_MAX, check_unimodular, conjugator, flow, n_minus

LLL_DELTA = 0.99
LLL_MAX_ITER = 100_000
MAX_BALL_RADIUS = 16.0


@dataclass(frozen=True)
class Lattice:
    """Unimodular lattice Z^d @ basis, optionally carrying its reduced basis."""

    basis: np.ndarray
    reduced: Optional[np.ndarray] = None
    transform: Optional[np.ndarray] = None  # integer matrix with reduced = transform @ basis

    def __post_init__(self):
        check_unimodular(self.basis, tol_scale=1e-8)

    @property
    def dim(self):
        return self.basis.shape[0]


def _int_det(U):
    """Exact determinant of a small integer matrix (fraction-free Bareiss)."""
    a = [[int(x) for x in row] for row in np.asarray(U)]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def embed_farey(point, t):
    """Lattice Z^d @ (n_-(r) flow(t)) for a Farey point (or bare fraction r)."""
    r = point.r if hasattr(point, "r") else np.atleast_1d(np.asarray(point, float))
    return Lattice(basis=n_minus(r) @ flow(r.size + 1, t))


def embed_farey_sheared(point, A, t):
    """Lattice Z^d @ (n_-(rA) flow(t)) for an invertible shear A."""
    r = point.r if hasattr(point, "r") else np.atleast_1d(np.asarray(point, float))
    A = np.atleast_2d(np.asarray(A, float))
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("shear matrix A must be invertible")
    return Lattice(basis=n_minus(r @ A) @ flow(r.size + 1, t))


def embed_batch(r, t, A=None):
    """(n, d, d) bases of Z^d @ n_-(rA) flow(t) for an (n, d-1) block of fractions."""
    r = np.atleast_2d(np.asarray(r, float))
    n, dm1 = r.shape
    d = dm1 + 1
    if A is not None:
        r = r @ np.atleast_2d(np.asarray(A, float))
    f = flow(d, t)
    bases = np.zeros((n, d, d))
    bases[:, :dm1, :dm1] = np.eye(dm1) * f[0, 0]
    bases[:, :dm1, -1] = r * f[-1, -1]
    bases[:, -1, -1] = f[-1, -1]
    return bases


def lll_reduce(L, delta=LLL_DELTA):
    """LLL-reduce the basis; returns a Lattice carrying (reduced, transform).

    The integer transform is verified to be unimodular, so the reduced basis
    generates the same lattice.
    """
    if not 0.25 < delta < 1.0:
        raise ValueError(f"delta must be in (0.25, 1), got {delta}")
    B = np.array(L.basis, dtype=float)
    d = B.shape[0]
    U = np.eye(d, dtype=np.int64)
    if d == 2:
        ok = _kernels.gauss_reduce_2d(B, U, LLL_MAX_ITER)
    else:
        ok = _kernels.lll_inplace(B, U, delta, LLL_MAX_ITER)
    if ok < 0:
        raise RuntimeError(
            f"reduction did not converge (cond ~ {np.linalg.cond(L.basis):.3e})"
        )
    if abs(_int_det(U)) != 1:
        raise RuntimeError("reduction produced a non-unimodular transform")
    return Lattice(basis=L.basis, reduced=B, transform=U)


def shortest_vector(L):
    """Exact Euclidean length of a shortest nonzero lattice vector."""
    if L.dim > DIM_MAX:
        raise ValueError(f"enumeration supported for d <= {DIM_MAX}")
    val = float(_kernels.shortest_batch(L.basis[None, :, :], LLL_DELTA, LLL_MAX_ITER)[0])
    if not np.isfinite(val):
        raise RuntimeError("shortest-vector reduction failed (degenerate basis)")
    return val


def second_minimum(L):
    """lambda_2: length of a shortest vector independent from a lambda_1 witness."""
    val = float(_kernels.second_minimum_single(np.asarray(L.basis, float), LLL_DELTA, LLL_MAX_ITER))
    if not np.isfinite(val):
        raise RuntimeError("second-minimum enumeration failed")
    return val


def ball_count(L, radius):
    """Number of nonzero lattice vectors of length strictly below radius."""
    if not 0 < radius <= MAX_BALL_RADIUS:
        raise ValueError(f"radius must be in (0, {MAX_BALL_RADIUS}], got {radius}")
    cnt = int(_kernels.ball_count_batch(L.basis[None, :, :], float(radius), LLL_DELTA, LLL_MAX_ITER)[0])
    if cnt < 0:
        raise RuntimeError("ball-count reduction failed")
    return cnt


def fundamental_point_d2(L):
    """Shape point z = x + iy of a planar lattice in the modular fundamental
    domain {|x| <= 1/2, x^2 + y^2 >= 1}, from the Gauss-reduced Gram matrix."""
    if L.dim != 2:
        raise ValueError("fundamental_point_d2 requires d = 2")
    if np.linalg.cond(L.basis) > 1e12:
        raise ValueError("degenerate Gram matrix")
    xs, ys = _kernels.fundamental_batch_d2(L.basis[None, :, :], LLL_MAX_ITER)
    return float(xs[0]), float(ys[0])


@dataclass(frozen=True)
class ObservableSpec:
    """A bounded SL(d,Z)-invariant observable of a unimodular lattice.

    kind: shortest_vector | second_minimum | ball_count | fundamental_y
    radius applies to ball_count; cap bounds fundamental_y (min(y, cap)).
    """

    kind: str
    radius: Optional[float] = None
    cap: float = 10.0

    def __post_init__(self):
        if self.kind not in ("shortest_vector", "second_minimum", "ball_count", "fundamental_y"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind == "ball_count":
            if self.radius is None or not 0 < self.radius <= MAX_BALL_RADIUS:
                raise ValueError("ball_count needs a radius in (0, MAX_BALL_RADIUS]")

    def label(self):
        if self.kind == "ball_count":
            return f"ball_count({self.radius:g})"
        return self.kind

    @staticmethod
    def parse(text):
        """Parse compact CLI forms: sv, lambda2, ball:R, yfund[:CAP]."""
        parts = text.split(":")
        head = parts[0]
        if head in ("sv", "shortest_vector"):
            return ObservableSpec("shortest_vector")
        if head in ("lambda2", "second_minimum"):
            return ObservableSpec("second_minimum")
        if head in ("ball", "ball_count"):
            if len(parts) != 2:
                raise ValueError("ball observable needs a radius, e.g. ball:1.5")
            return ObservableSpec("ball_count", radius=float(parts[1]))
        if head in ("yfund", "fundamental_y"):
            cap = float(parts[1]) if len(parts) > 1 else 10.0
            return ObservableSpec("fundamental_y", cap=cap)
        raise ValueError(f"cannot parse observable {text!r}")


def evaluate_observable(spec, bases):
    """Evaluate an observable on a (n, d, d) batch of unimodular bases."""
    bases = np.asarray(bases, dtype=float)
    if bases.ndim == 2:
        bases = bases[None, :, :]
    d = bases.shape[1]
    if spec.kind == "shortest_vector":
        out = _kernels.shortest_batch(bases, LLL_DELTA, LLL_MAX_ITER)
    elif spec.kind == "second_minimum":
        out = _kernels.second_minimum_batch(bases, LLL_DELTA, LLL_MAX_ITER)
    elif spec.kind == "ball_count":
        out = _kernels.ball_count_batch(bases, float(spec.radius), LLL_DELTA, LLL_MAX_ITER).astype(float)
        out[out < 0] = np.nan
    else:
        if d != 2:
            raise ValueError("fundamental_y is defined for d = 2 only")
        _, ys = _kernels.fundamental_batch_d2(bases, LLL_MAX_ITER)
        out = np.minimum(ys, spec.cap)
    if np.any(~np.isfinite(out)):
        raise RuntimeError("observable evaluation failed on a degenerate basis")
    return out


def evaluate_on_lattice(spec, L):
    return float(evaluate_observable(spec, L.basis)[0])


def transported_bases(bases, A):
    """Conjugate-transport C^-1 M C with C = conjugator(A).

    An SL(d,Z)-invariant observable of the transported point is invariant
    under the conjugated lattice Gamma_A = C SL(d,Z) C^-1 acting on M, and
    the transport preserves unimodularity.
    """
    C = conjugator(A)
    Cinv = np.linalg.inv(C)
    return np.einsum("ij,njk,kl->nil", Cinv, np.asarray(bases, float), C)


def random_sl_z(d, rng, n_factors=24):
    """Random element of SL(d,Z) as a word in elementary row operations."""
    g = np.eye(d, dtype=np.int64)
    for _ in range(n_factors):
        i, j = rng.choice(d, size=2, replace=False)
        c = int(rng.integers(1, 3)) * (1 if rng.random() < 0.5 else -1)
        g[i] += c * g[j]
    return g


def hermite_flag(lengths, d):
    """Loose lambda_1 sanity cap for unimodular lattices; a bug tripwire, not a failure."""
    cap = 2.0 ** ((d - 1) / 4.0) * math.sqrt(d)
    return bool(np.any(np.asarray(lengths) > cap))

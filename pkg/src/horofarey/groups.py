"""Dense matrix algebra for the diagonal flow and horospherical maps on SL(d, R).

All functions return plain float64 numpy arrays.  Matrices act on integer row
vectors from the left-multiplication convention used throughout the package:
a lattice is Z^d @ B with the rows of B as basis vectors.
"""

import numpy as np

# Runtime dimension bounds: enumeration cost explodes beyond d = 8.
DIM_MIN = 2
DIM_MAX = 8

# Exponent arguments beyond this are rejected rather than saturated; a silent
# Inf would corrupt downstream statistics.
MAX_EXPONENT = 300.0


def _check_dim(d):
    if not isinstance(d, (int, np.integer)) or not (DIM_MIN <= d <= DIM_MAX):
        raise ValueError(f"dimension must be an integer in [{DIM_MIN}, {DIM_MAX}], got {d!r}")


def _check_finite(a, name="value"):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite, got {a!r}")
    return a


def check_unimodular(M, tol_scale=1e-9):
    """Validate that M is square, finite and has determinant 1 up to tol_scale*d."""
    M = _check_finite(M, "matrix")
    d = M.shape[0]
    if M.ndim != 2 or M.shape[1] != d:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    _check_dim(d)
    det = np.linalg.det(M)
    if abs(det - 1.0) > tol_scale * d:
        raise ValueError(f"matrix is not unimodular: det = {det!r}")
    return M


def flow(d, t):
    """Diagonal flow diag(e^-t, ..., e^-t, e^((d-1)t)) on SL(d, R)."""
    _check_dim(d)
    if not np.isfinite(t):
        raise ValueError(f"flow time must be finite, got {t!r}")
    if max(abs(t), (d - 1) * abs(t)) > MAX_EXPONENT:
        raise ValueError(f"flow time t={t} overflows the exponent guard for d={d}")
    diag = np.full(d, np.exp(-t))
    diag[-1] = np.exp((d - 1) * t)
    return np.diag(diag)


def n_minus(x):
    """Unstable horospherical element: identity block with column x^T top-right."""
    x = np.atleast_1d(_check_finite(x, "x"))
    d = x.size + 1
    _check_dim(d)
    M = np.eye(d)
    M[:-1, -1] = x
    return M


def n_plus(x):
    """Stable horospherical element: identity block with row x bottom-left."""
    x = np.atleast_1d(_check_finite(x, "x"))
    d = x.size + 1
    _check_dim(d)
    M = np.eye(d)
    M[-1, :-1] = x
    return M


def commute_flow(x, t):
    """Both sides of the commutation n_-(x) Phi^t = Phi^t n_-(e^(dt) x).

    Returns the pair (n_-(x) @ flow(t), flow(t) @ n_-(e^(dt) x)); the two
    members agree entrywise up to rounding.
    """
    x = np.atleast_1d(_check_finite(x, "x"))
    d = x.size + 1
    norm = np.linalg.norm(x)
    if d * abs(t) + (np.log(norm) if norm > 0 else 0.0) > MAX_EXPONENT:
        raise ValueError(f"e^(dt)*|x| overflows the exponent guard (t={t})")
    lhs = n_minus(x) @ flow(d, t)
    rhs = flow(d, t) @ n_minus(np.exp(d * t) * x)
    return lhs, rhs


def m_y(y):
    """Section matrix M_y with (0, ..., 0, 1) @ M_y = y, defined for y_d > 0.

    Blocks: y_d^(-1/(d-1)) * I_(d-1) top-left, zero column, bottom row (y', y_d).
    """
    y = np.atleast_1d(_check_finite(y, "y"))
    d = y.size
    _check_dim(d)
    yd = y[-1]
    if yd <= 0:
        raise ValueError(f"m_y requires y_d > 0, got {yd!r}")
    M = np.eye(d) * yd ** (-1.0 / (d - 1))
    M[-1, :-1] = y[:-1]
    M[-1, -1] = yd
    return M


def d_matrix(d, y_d):
    """diag(y_d^(-1/(d-1)) I_(d-1), y_d); equals flow(d, log(y_d)/(d-1))."""
    _check_dim(d)
    if not np.isfinite(y_d) or y_d <= 0:
        raise ValueError(f"d_matrix requires y_d > 0, got {y_d!r}")
    diag = np.full(d, y_d ** (-1.0 / (d - 1)))
    diag[-1] = y_d
    return np.diag(diag)


def conjugator(A, normalize=False):
    """Block matrix diag(A^T, 1) intertwining n_-(x) with n_-(xA).

    With normalize=True, A is first rescaled by |det A|^(1/(d-1)) so the
    result has determinant +-1.  Default is the raw (scale-preserving) form:
    rescaling changes the conjugated lattice Gamma_A, and at d = 2 it would
    collapse every scalar A to +-1.
    """
    A = np.atleast_2d(_check_finite(A, "A"))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    d = A.shape[0] + 1
    _check_dim(d)
    det = np.linalg.det(A)
    if abs(det) < 1e-12:
        raise ValueError("A must be invertible")
    if normalize:
        A = A / abs(det) ** (1.0 / (d - 1))
    M = np.eye(d)
    M[:-1, :-1] = A.T
    return M


def left_invariant_distance(M1, M2):
    """Surrogate left-invariant distance ||M1^-1 M2 - I||_F.

    Not a geodesic distance; it satisfies dist(n_pm(x), n_pm(x')) = |x - x'|
    exactly, which is the only metric property the limit arguments use.
    """
    M1 = _check_finite(M1, "M1")
    M2 = _check_finite(M2, "M2")
    if M1.shape != M2.shape:
        raise ValueError("matrices must have the same shape")
    cond = np.linalg.cond(M1)
    if not np.isfinite(cond) or cond > 1e12:
        raise ValueError(f"M1 is ill-conditioned (cond ~ {cond:.3e})")
    d = M1.shape[0]
    return float(np.linalg.norm(np.linalg.solve(M1, M2) - np.eye(d)))

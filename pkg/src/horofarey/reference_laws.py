"""Sampleable reference distributions for the two limit regimes.

Incommensurable regime: the Haar law, realized either empirically on a large
horosphere or (d = 2) exactly through the modular fundamental domain.
Commensurable regime: the explicit weighted law obtained by flowing a random
element of the affine subgroup H by an exponentially distributed time and
evaluating the observable at the transpose-inverse point.
"""

import json
import math
import os
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from .groups import flow
from .lattices import ObservableSpec, embed_batch, evaluate_observable
from .sampling import run_chunked

LAW_VERSION = 1
MIN_ACCEPTANCE_SAMPLES = 1000
CACHE_ENV = "HOROFAREY_CACHE"

SQRT3_2 = math.sqrt(3.0) / 2.0
REJECTION_RETRY_CAP = 64


@dataclass(frozen=True)
class MuHSample:
    """One draw from the affine subgroup: A in SL(d-1,R) Haar mod SL(d-1,Z),
    b uniform on [0,1)^(d-1)."""

    A: np.ndarray
    b: np.ndarray


@dataclass
class ReferenceLaw:
    kind: str
    samples: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float).ravel())

    def __len__(self):
        return self.samples.size


def fundamental_domain_batch(size, rng):
    """(x, y) from the hyperbolic probability density (3/pi) dx dy / y^2 on the
    modular fundamental domain {|x| <= 1/2, x^2 + y^2 >= 1}.

    Rejection from the proposal x ~ U(-1/2, 1/2), y ~ Pareto(1) on
    [sqrt(3)/2, inf); acceptance rate pi*sqrt(3)/6 ~ 0.91.
    """
    xs = np.empty(size)
    ys = np.empty(size)
    have = 0
    for _ in range(REJECTION_RETRY_CAP):
        need = size - have
        if need == 0:
            break
        m = int(need * 1.3) + 16
        x = rng.uniform(-0.5, 0.5, size=m)
        y = SQRT3_2 / (1.0 - rng.random(size=m))  # (0, 1] avoids a zero divisor
        keep = x * x + y * y >= 1.0
        x, y = x[keep], y[keep]
        take = min(need, x.size)
        xs[have:have + take] = x[:take]
        ys[have:have + take] = y[:take]
        have += take
    if have < size:
        raise RuntimeError("rejection sampler failed to fill the batch")
    return xs, ys


def _sl2_from_shape(x, y, angle):
    """(n, 2, 2) SL(2,R) bases whose lattices have shape point x + iy.

    Rows: (y^-1/2, 0) and (x y^-1/2, y^1/2), right-multiplied by a rotation."""
    n = x.size
    sy = np.sqrt(y)
    N = np.zeros((n, 2, 2))
    N[:, 0, 0] = 1.0 / sy
    N[:, 1, 0] = x / sy
    N[:, 1, 1] = sy
    c, s = np.cos(angle), np.sin(angle)
    R = np.zeros((n, 2, 2))
    R[:, 0, 0] = c
    R[:, 0, 1] = -s
    R[:, 1, 0] = s
    R[:, 1, 1] = c
    return N @ R


def mu_h_batch(d, size, rng):
    """(A, b) arrays of `size` draws from the probability Haar measure of the
    affine subgroup.  Supported for d in {2, 3}: no exact SL(k,Z)\\SL(k,R)
    sampler is available for k >= 3."""
    if d == 2:
        A = np.ones((size, 1, 1))
    elif d == 3:
        x, y = fundamental_domain_batch(size, rng)
        angle = rng.uniform(0.0, 2.0 * math.pi, size=size)
        A = _sl2_from_shape(x, y, angle)
    else:
        raise ValueError(f"mu_H sampling unsupported for d = {d} (needs an exact "
                         f"SL({d - 1},Z)\\SL({d - 1},R) Haar sampler)")
    b = rng.uniform(0.0, 1.0, size=(size, d - 1))
    return A, b


def sample_mu_h(d, rng):
    A, b = mu_h_batch(d, 1, rng)
    return MuHSample(A=A[0], b=b[0])


def case_b_bases(d, sigma, size, rng):
    """(bases, s) for the commensurable-regime law: M = [[A, b^T],[0,1]] flow(-s)
    with s - sigma ~ Exp(d(d-1)); the observable point is Z^d @ (M^-1)^T."""
    rate = d * (d - 1)
    s = sigma + rng.exponential(scale=1.0 / rate, size=size)
    A, b = mu_h_batch(d, size, rng)
    M = np.zeros((size, d, d))
    M[:, :d - 1, :d - 1] = A
    M[:, :d - 1, -1] = b
    M[:, -1, -1] = 1.0
    diag = np.empty((size, d))
    diag[:, :d - 1] = np.exp(s)[:, None]
    diag[:, -1] = np.exp(-(d - 1) * s)
    M *= diag[:, None, :]
    bases = np.transpose(np.linalg.inv(M), (0, 2, 1))
    return bases, s


def _case_b_chunk(size, rng, observable, d, sigma):
    bases, s = case_b_bases(d, sigma, size, rng)
    return evaluate_observable(observable, bases), s


def _haar_horosphere_chunk(size, rng, observable, d, t):
    x = rng.uniform(0.0, 1.0, size=(size, d - 1))
    return evaluate_observable(observable, embed_batch(x, t))


def _haar_exact_d2_chunk(size, rng, observable):
    x, y = fundamental_domain_batch(size, rng)
    angle = rng.uniform(0.0, 2.0 * math.pi, size=size)
    return evaluate_observable(observable, _sl2_from_shape(x, y, angle))


def case_b_reference(observable, d, sigma, n, seed, workers=1):
    """Monte Carlo oracle for the commensurable-regime limit law."""
    if d not in (2, 3):
        raise ValueError(f"commensurable-regime oracle unsupported for d = {d} "
                         f"(needs an exact SL({d - 1},Z) Haar sampler)")
    if n < MIN_ACCEPTANCE_SAMPLES:
        raise ValueError(f"n >= {MIN_ACCEPTANCE_SAMPLES} required, got {n}")
    task = partial(_case_b_chunk, observable=observable, d=d, sigma=float(sigma))
    values, s = run_chunked(task, n, seed, workers)
    meta = {
        "kind": "case_b_mc", "d": d, "sigma": float(sigma),
        "observable": observable.label(), "n": int(n), "seed": int(seed),
        "version": LAW_VERSION, "mean_s_minus_sigma": float(np.mean(s - sigma)),
    }
    return ReferenceLaw(kind="case_b_mc", samples=values, meta=meta)


def haar_reference_horosphere(observable, d, t, n, seed, workers=1):
    """Empirical Haar law via a large horosphere (mixing proxy e^(-dt) < 1e-6)."""
    if math.exp(-d * t) >= 1e-6:
        raise ValueError(f"t = {t} too small: e^(-dt) must be below 1e-6")
    if n < MIN_ACCEPTANCE_SAMPLES:
        raise ValueError(f"n >= {MIN_ACCEPTANCE_SAMPLES} required, got {n}")
    task = partial(_haar_horosphere_chunk, observable=observable, d=d, t=float(t))
    values = run_chunked(task, n, seed, workers)
    meta = {
        "kind": "haar_empirical_horosphere", "d": d, "t": float(t),
        "observable": observable.label(), "n": int(n), "seed": int(seed),
        "version": LAW_VERSION,
    }
    return ReferenceLaw(kind="haar_empirical_horosphere", samples=values, meta=meta)


def haar_exact_d2(observable, n, seed, workers=1):
    """Exact Haar sampler on the space of unimodular planar lattices."""
    if n < MIN_ACCEPTANCE_SAMPLES:
        raise ValueError(f"n >= {MIN_ACCEPTANCE_SAMPLES} required, got {n}")
    task = partial(_haar_exact_d2_chunk, observable=observable)
    values = run_chunked(task, n, seed, workers)
    meta = {
        "kind": "haar_exact_d2", "d": 2, "observable": observable.label(),
        "n": int(n), "seed": int(seed), "version": LAW_VERSION,
    }
    return ReferenceLaw(kind="haar_exact_d2", samples=values, meta=meta)


def case_b_quadrature(observable, d, sigma, gl_nodes=32, b_grid=512, fine=4000):
    """Independent deterministic rebuild of the commensurable-regime law for
    d = 2: a 32-point Gauss-Laguerre stencil in the flow time crossed with a
    midpoint grid in the translation part.  Returns (values, weights).

    The conditional law at each flow-time node is its sorted b-grid sample;
    the continuous law is reconstructed by linear quantile interpolation
    between nodes on a fine grid equidistributed under the exact exponential
    density.  (The raw node-weighted discrete law would floor any CDF
    distance at half the largest quadrature weight, ~0.05, whenever the
    observable depends on the flow time alone.)
    """
    if d != 2:
        raise ValueError("quadrature cross-check implemented for d = 2 only")
    rate = d * (d - 1)
    u, _ = np.polynomial.laguerre.laggauss(gl_nodes)
    s = sigma + u / rate
    b = (np.arange(b_grid) + 0.5) / b_grid
    S, B = np.meshgrid(s, b, indexing="ij")
    size = S.size
    M = np.zeros((size, 2, 2))
    M[:, 0, 0] = np.exp(S.ravel())
    M[:, 0, 1] = B.ravel() * np.exp(-S.ravel())
    M[:, 1, 1] = np.exp(-S.ravel())
    bases = np.transpose(np.linalg.inv(M), (0, 2, 1))
    node_q = np.sort(evaluate_observable(observable, bases).reshape(gl_nodes, b_grid), axis=1)
    # fine flow-time grid with equal exponential mass per point
    u_fine = -np.log(1.0 - (np.arange(fine) + 0.5) / fine)
    # extrapolate linearly outside the node range (clipping would pile ~4% of
    # the exponential mass onto the first node)
    idx = np.clip(np.searchsorted(u, u_fine) - 1, 0, gl_nodes - 2)
    frac = (u_fine - u[idx]) / (u[idx + 1] - u[idx])
    values = (1.0 - frac)[:, None] * node_q[idx] + frac[:, None] * node_q[idx + 1]
    weights = np.full(values.size, 1.0 / values.size)
    return values.ravel(), weights


# --- disk cache -------------------------------------------------------------

def default_cache_dir():
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "horofarey"))


def _cache_key(meta):
    fields = [f"{k}={meta[k]}" for k in sorted(meta) if k not in ("mean_s_minus_sigma",)]
    safe = "_".join(fields).replace("/", "-").replace("(", "").replace(")", "").replace(" ", "")
    return safe


def save_reference(law, cache_dir):
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    stem = cache_dir / _cache_key(law.meta)
    np.savetxt(f"{stem}.csv", law.samples, fmt="%.17g")
    with open(f"{stem}.json", "w") as fh:
        json.dump(law.meta, fh, indent=2, sort_keys=True)
    return Path(f"{stem}.csv")


def load_reference(meta_probe, cache_dir):
    stem = Path(cache_dir) / _cache_key(meta_probe)
    csv_path, json_path = Path(f"{stem}.csv"), Path(f"{stem}.json")
    if not (csv_path.exists() and json_path.exists()):
        return None
    with open(json_path) as fh:
        meta = json.load(fh)
    samples = np.loadtxt(csv_path)
    return ReferenceLaw(kind=meta["kind"], samples=samples, meta=meta)


def build_reference(kind, observable, d, n, seed, sigma=0.0, t=None, workers=1, cache_dir=None):
    """Build (or load from cache) a reference law by kind."""
    probe = {"kind": kind, "d": d, "observable": observable.label(),
             "n": int(n), "seed": int(seed), "version": LAW_VERSION}
    if kind == "case_b_mc":
        probe["sigma"] = float(sigma)
    elif kind == "haar_empirical_horosphere":
        probe["t"] = float(t)
    elif kind != "haar_exact_d2":
        raise ValueError(f"unknown reference kind {kind!r}")
    if cache_dir is not None:
        cached = load_reference(probe, cache_dir)
        if cached is not None:
            return cached
    if kind == "case_b_mc":
        law = case_b_reference(observable, d, sigma, n, seed, workers)
    elif kind == "haar_empirical_horosphere":
        law = haar_reference_horosphere(observable, d, t, n, seed, workers)
    else:
        if d != 2:
            raise ValueError("haar_exact_d2 requires d = 2")
        law = haar_exact_d2(observable, n, seed, workers)
    if cache_dir is not None:
        save_reference(law, cache_dir)
    return law

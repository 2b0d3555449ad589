"""Equidistribution experiments: Farey ensembles vs reference laws.

Three experiment kinds.  The sheared-ensemble run compares the observable law
over {n_-(rA) flow(t)} against the Haar references; the plain run compares
the unsheared ensemble against the affine-subgroup oracle; the joint run
tests asymptotic independence of the pair of observables seen from a lattice
and its conjugate-transported copy.
"""

import json
import math
import time
from dataclasses import dataclass, field, asdict
from functools import partial
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .farey import farey_fractions
from .lattices import ObservableSpec, embed_batch, evaluate_observable, transported_bases
from .reference_laws import build_reference, default_cache_dir
from .sampling import chunk_rng, run_chunked
from .stats import empirical_quantiles, ks_two_sample, wasserstein1

SCHEMA_VERSION = 1
LOW_SAMPLE_COUNT = 1000
EVAL_BLOCK = 65536
# RNG substream roles: chunk indices 0.. are claimed by run_chunked, so the
# empirical subsampler takes a far-away stream, and each reference law gets
# its own entropy offset to keep its draws independent of the others.
SUBSAMPLE_STREAM = 2 ** 31
SEED_OFFSET_REFERENCE = 1
SEED_OFFSET_REFERENCE_2 = 2

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "horofarey experiment config",
    "type": "object",
    "required": ["case", "d", "seed"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "integer"},
        "case": {"enum": ["case_a", "case_b", "joint"]},
        "d": {"type": "integer", "minimum": 2, "maximum": 8},
        "Q": {"type": "number", "minimum": 1},
        "sigma": {"type": "number"},
        "theta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "observable": {"type": "string"},
        "shear": {"type": ["number", "array"]},
        "shear_is_irrational": {"type": "boolean"},
        "rational_control": {"type": "boolean"},
        "n_reference": {"type": "integer", "minimum": 1000},
        "reference_t": {"type": "number", "exclusiveMinimum": 0},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "n_points": {"type": "integer", "minimum": 1},
        "subsample": {"type": ["integer", "null"], "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "output": {"type": ["string", "null"]},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run.

    The horosphere time is derived, not stored: t = sigma + log(Q)/(d-1), so
    Q = e^((d-1)(t-sigma)).  The joint run uses the explicit `t` field
    instead since it samples x from the uniform density rather than F(Q).
    """

    case: str
    d: int
    seed: int
    Q: float = 0.0
    sigma: float = 0.0
    theta: float = 0.0
    observable: str = "sv"
    shear: object = None
    shear_is_irrational: bool = False
    rational_control: bool = False
    n_reference: int = 100_000
    reference_t: float = 10.0
    t: float = 8.0
    n_points: int = 100_000
    subsample: object = None
    workers: int = 1
    output: object = None

    def horosphere_time(self):
        if self.Q < 1:
            raise ValueError(f"Q must be >= 1, got {self.Q}")
        return self.sigma + math.log(self.Q) / (self.d - 1)

    def observable_spec(self):
        return ObservableSpec.parse(self.observable)

    def shear_matrix(self):
        if self.shear is None:
            raise ValueError(f"the {self.case} experiment needs a shear matrix")
        A = np.atleast_2d(np.asarray(self.shear, dtype=float))
        if A.shape != (self.d - 1, self.d - 1):
            raise ValueError(f"shear must be ({self.d - 1}, {self.d - 1}), got {A.shape}")
        return A

    def to_dict(self):
        out = {k: v for k, v in asdict(self).items() if v is not None}
        if isinstance(out.get("shear"), np.ndarray):
            out["shear"] = out["shear"].tolist()
        out["schema_version"] = SCHEMA_VERSION
        return out

    @staticmethod
    def from_dict(data):
        jsonschema.validate(data, CONFIG_SCHEMA)
        data = dict(data)
        data.pop("schema_version", None)
        return ExperimentConfig(**data)


@dataclass
class ExperimentReport:
    case: str
    d: int
    observable: str
    n_empirical: int
    reference_kind: str
    ks: float
    wasserstein: float
    quantiles: dict
    passed: bool
    thresholds_used: dict
    pvalue_proxy: float
    runtime_s: float
    seed: int
    warnings: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION
    samples: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.ks < 0 or self.wasserstein < 0:
            raise ValueError("distances must be nonnegative")
        q = [self.quantiles[k] for k in sorted(self.quantiles)]
        if any(b < a - 1e-12 for a, b in zip(q, q[1:])):
            raise ValueError("quantiles must be monotone")

    def to_json_dict(self):
        out = {k: v for k, v in asdict(self).items() if k != "samples"}
        return out


def load_thresholds():
    """Calibrated decision thresholds, stored in a versioned data file so the
    test logic never hard-codes them."""
    with resources.files("horofarey").joinpath("thresholds.json").open() as fh:
        return json.load(fh)


def _pvalue_proxy(ks, n_a, n_b):
    """Asymptotic two-sample KS tail bound; descriptive only, since Farey
    points are deterministic rather than i.i.d. draws."""
    n_eff = n_a * n_b / (n_a + n_b)
    return float(min(1.0, 2.0 * math.exp(-2.0 * n_eff * ks * ks)))


def _empirical_law(config, A=None):
    """Observable values over the Farey ensemble at the derived flow time."""
    r, _ = farey_fractions(config.d, config.Q, config.theta)
    n_total = r.shape[0]
    if config.subsample is not None and n_total > int(config.subsample):
        rng = chunk_rng(config.seed, SUBSAMPLE_STREAM)
        idx = np.sort(rng.choice(n_total, size=int(config.subsample), replace=False))
        r = r[idx]
    t = config.horosphere_time()
    spec = config.observable_spec()
    parts = []
    for lo in range(0, r.shape[0], EVAL_BLOCK):
        bases = embed_batch(r[lo:lo + EVAL_BLOCK], t, A)
        parts.append(evaluate_observable(spec, bases))
    values = np.concatenate(parts)
    return values, n_total


def _finish(config, reference, values, n_total, thresholds, threshold_key, started, extras):
    ks = ks_two_sample(values, reference.samples)
    w1 = wasserstein1(values, reference.samples, resample=True)
    limit = thresholds[threshold_key]
    warnings = []
    if values.size < LOW_SAMPLE_COUNT:
        warnings.append(f"low-sample: only {values.size} ensemble points")
    if values.size < n_total:
        warnings.append(f"subsampled {values.size} of {n_total} Farey points")
    return ExperimentReport(
        case=config.case,
        d=config.d,
        observable=config.observable_spec().label(),
        n_empirical=int(values.size),
        reference_kind=reference.kind,
        ks=float(ks),
        wasserstein=float(w1),
        quantiles=empirical_quantiles(values),
        passed=bool(ks < limit),
        thresholds_used={threshold_key: limit},
        pvalue_proxy=_pvalue_proxy(ks, values.size, len(reference)),
        runtime_s=time.perf_counter() - started,
        seed=config.seed,
        warnings=warnings,
        extras=extras,
        samples={"empirical": np.sort(values), "reference": reference.samples},
    )


def run_case_b(config, thresholds=None, cache_dir=None):
    """Plain ensemble F(Q, theta) vs the affine-subgroup oracle at shift sigma."""
    started = time.perf_counter()
    if config.case != "case_b":
        raise ValueError(f"config.case is {config.case!r}, expected 'case_b'")
    thresholds = thresholds or load_thresholds()
    spec = config.observable_spec()
    reference = build_reference(
        "case_b_mc", spec, config.d, config.n_reference,
        config.seed + SEED_OFFSET_REFERENCE, sigma=config.sigma,
        workers=config.workers, cache_dir=cache_dir,
    )
    values, n_total = _empirical_law(config)
    extras = {"sigma": config.sigma, "t": config.horosphere_time(),
              "reference_meta": reference.meta}
    return _finish(config, reference, values, n_total, thresholds,
                   "case_b_ks", started, extras)


def run_case_a(config, thresholds=None, cache_dir=None):
    """Sheared ensemble {n_-(rA) flow(t)} vs the Haar references.

    The equidistribution statement needs A with an irrational entry; a
    rational A falls into the affine-subgroup regime instead, so such runs
    are refused unless rational_control is set (negative-control mode).
    """
    started = time.perf_counter()
    if config.case != "case_a":
        raise ValueError(f"config.case is {config.case!r}, expected 'case_a'")
    if not config.shear_is_irrational and not config.rational_control:
        raise ValueError(
            "the sheared-ensemble run requires a shear with an irrational entry "
            "(set shear_is_irrational, or rational_control for a negative control)"
        )
    thresholds = thresholds or load_thresholds()
    spec = config.observable_spec()
    A = config.shear_matrix()
    reference = build_reference(
        "haar_empirical_horosphere", spec, config.d, config.n_reference,
        config.seed + SEED_OFFSET_REFERENCE, t=config.reference_t,
        workers=config.workers, cache_dir=cache_dir,
    )
    values, n_total = _empirical_law(config, A=A)
    extras = {"shear": A.tolist(), "t": config.horosphere_time(),
              "rational_control": config.rational_control,
              "reference_meta": reference.meta}
    if config.d == 2:
        exact = build_reference(
            "haar_exact_d2", spec, 2, config.n_reference,
            config.seed + SEED_OFFSET_REFERENCE_2,
            workers=config.workers, cache_dir=cache_dir,
        )
        extras["ks_vs_haar_exact"] = ks_two_sample(values, exact.samples)
        extras["ks_exact_vs_horosphere"] = ks_two_sample(exact.samples, reference.samples)
    key = "case_a_d2_ks" if config.d == 2 else ("case_a_d3_ks" if config.d == 3 else "case_a_default_ks")
    report = _finish(config, reference, values, n_total, thresholds, key, started, extras)
    if config.d == 2 and report.passed:
        report.passed = bool(extras["ks_vs_haar_exact"] < thresholds[key])
    return report


def _joint_chunk(size, rng, observable, d, t, A):
    x = rng.uniform(0.0, 1.0, size=(size, d - 1))
    bases = embed_batch(x, t)
    g1 = evaluate_observable(observable, bases)
    g2 = evaluate_observable(observable, transported_bases(bases, A))
    return g1, g2


def joint_product_gap(g1, g2, grid=50):
    """sup-norm gap between the joint empirical CDF and the product of the
    marginals, over a grid of marginal quantile levels."""
    g1 = np.asarray(g1, float)
    g2 = np.asarray(g2, float)
    n = g1.size
    levels = (np.arange(grid) + 1.0) / (grid + 1.0)
    u = np.quantile(g1, levels)
    v = np.quantile(g2, levels)
    s1 = np.sort(g1)
    f1 = np.searchsorted(s1, u, side="right") / n
    f2 = np.searchsorted(np.sort(g2), v, side="right") / n
    order = np.argsort(g1, kind="stable")
    g2o = g2[order]
    ks = np.searchsorted(s1, u, side="right")
    gap = 0.0
    for i, k in enumerate(ks):
        fj = np.searchsorted(np.sort(g2o[:k]), v, side="right") / n
        gap = max(gap, float(np.max(np.abs(fj - f1[i] * f2))))
    return gap


def run_joint(config, thresholds=None):
    """Pair-of-observables independence test at a fixed flow time.

    x is drawn from the uniform density on [0,1)^(d-1); the two coordinates
    are the observable at Z^d @ n_-(x) flow(t) and at its conjugate transport
    by the shear.  The product-structure prediction says the joint law
    factorizes in the large-t limit.
    """
    started = time.perf_counter()
    if config.case != "joint":
        raise ValueError(f"config.case is {config.case!r}, expected 'joint'")
    if config.d != 2:
        raise ValueError("joint experiment unsupported for d != 2 (enumeration cost)")
    thresholds = thresholds or load_thresholds()
    spec = config.observable_spec()
    A = config.shear_matrix()
    task = partial(_joint_chunk, observable=spec, d=config.d, t=float(config.t), A=A)
    g1, g2 = run_chunked(task, config.n_points, config.seed, config.workers)
    gap = joint_product_gap(g1, g2)
    corr = float(np.corrcoef(g1, g2)[0, 1])
    gap_limit = thresholds["joint_gap"]
    corr_limit = thresholds["joint_corr"]
    passed = gap < gap_limit and abs(corr) < corr_limit
    warnings = []
    if config.n_points < LOW_SAMPLE_COUNT:
        warnings.append(f"low-sample: only {config.n_points} points")
    return ExperimentReport(
        case="joint",
        d=config.d,
        observable=spec.label(),
        n_empirical=int(g1.size),
        reference_kind="product_of_marginals",
        ks=float(gap),
        wasserstein=float(wasserstein1(g1, g2)),
        quantiles=empirical_quantiles(g1),
        passed=bool(passed),
        thresholds_used={"joint_gap": gap_limit, "joint_corr": corr_limit},
        pvalue_proxy=_pvalue_proxy(gap, g1.size, g1.size),
        runtime_s=time.perf_counter() - started,
        seed=config.seed,
        warnings=warnings,
        extras={"correlation": corr, "t": config.t, "shear": A.tolist()},
        samples={"observable_plain": np.sort(g1), "observable_transported": np.sort(g2),
                 "pairs_plain": g1, "pairs_transported": g2},
    )


def run_experiment(config, thresholds=None, cache_dir=None):
    if config.case == "case_b":
        return run_case_b(config, thresholds, cache_dir)
    if config.case == "case_a":
        return run_case_a(config, thresholds, cache_dir)
    if config.case == "joint":
        return run_joint(config, thresholds)
    raise ValueError(f"unknown experiment case {config.case!r}")


def write_samples_csv(path, samples):
    """Two-column delimited dump (ensemble, value) of every sample array.

    Values are printed with 17 significant digits so byte-level comparison is
    a valid determinism check.
    """
    with open(path, "w", newline="") as fh:
        fh.write("ensemble,value\n")
        for name in sorted(samples):
            arr = np.asarray(samples[name], float).ravel()
            for v in arr:
                fh.write(f"{name},{v:.17g}\n")
    return Path(path)


def write_report(report, out_dir, stem=None, config=None, plot=True):
    """Write the JSON report and sample CSV, and render the ECDF overlay
    figure next to them unless plotting is disabled."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or f"{report.case}_seed{report.seed}"
    payload = report.to_json_dict()
    if config is not None:
        payload["config"] = config.to_dict()
    json_path = out_dir / f"{stem}.json"
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
    csv_path = write_samples_csv(out_dir / f"{stem}_samples.csv", report.samples)
    paths = {"json": json_path, "csv": csv_path}
    if plot:
        from . import plotting
        fig_path = out_dir / f"{stem}.png"
        if report.case == "joint":
            plotting.joint_figure(report, fig_path)
        else:
            plotting.ecdf_overlay(
                {k: report.samples[k] for k in ("empirical", "reference")},
                fig_path,
                title=f"{report.case}: {report.observable} (KS = {report.ks:.4f})",
            )
        paths["figure"] = fig_path
    return paths

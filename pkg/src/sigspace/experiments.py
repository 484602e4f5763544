"""Seeded batch experiments: recovery frequency as a function of the
measurement count, across algorithms, dictionaries, and support models.

A run is a pure function of its :class:`ExperimentSpec` (master seed
included): per-trial seeds derive from a splittable hash of
``(master_seed, stage, m, trial)``, every algorithm in a trial sees the
same data, and aggregation is order-independent, so results are
byte-reproducible regardless of worker count. Wall-clock timing is the
one non-deterministic quantity and is therefore opt-in
(``measure_runtime``); with it off, runtime columns are 0.

Spec files are flat ``key = value`` text (``#`` comments allowed):

======================  =======================================================
``n, d, k``             signal length, dictionary width, sparsity
``dictionary``          identity | random-orthonormal | renormalized-orthogonal
                        | overcomplete-dft
``dict_seed``           seed for seeded dictionary kinds (default 0)
``oversampling``        overcomplete-dft only (default d / n)
``scale_min/scale_max`` renormalized-orthogonal column-norm range
``support``             uniform | separated | clustered
``min_gap``             separated only; default d // (2 k)
``m_values``            "20:120:5" (inclusive range) or comma list
``trials``              trials per m (default 200)
``noise_norm``          exact l2 norm of the additive noise (default 0)
``algorithms``          comma list from: sssp:threshold sssp:omp sssp:sp
                        sssp:cosamp sssp:l1 omp romp cosamp sp bp
``success_rel_tol``     relative signal-error success threshold (default 1e-4)
``master_seed``         root seed for the whole run
``real_coefficients``   true for real-valued nonzeros (default false)
``sssp_max_iter``       engine iteration cap inside the harness (default 15)
``sssp_eps_rel``        engine relative-change tolerance (default 1e-6)
``candidate_factor``    candidate budget multiplier (default 3)
``inner_iters``         pursuit-scheme inner iteration cap (default 20)
``l1_max_iter/l1_tol``  l1-scheme solver budget (defaults 2000 / 1e-8)
``baseline_max_iter``   iteration cap for baseline solvers (default 20)
======================  =======================================================
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dictionaries import (
    Dictionary,
    make_gaussian_sensing,
    make_identity,
    make_overcomplete_dft,
    make_random_orthonormal,
    make_renormalized_orthogonal,
)
from .projections import ProjectionScheme
from .pursuit import SolverSpec, exact_recovery, solve_with_info
from .signals import SupportModel, gen_sparse_coef, add_noise
from .sssp import SsspConfig, sssp_recover

__all__ = [
    "ALGORITHM_TAGS",
    "ExperimentSpec",
    "TrialOutcome",
    "CurvePoint",
    "RecoveryCurve",
    "derive_seed",
    "run_trial",
    "run_curve",
    "export_csv",
    "load_csv",
    "write_traces",
    "load_spec",
    "dump_spec",
]

SSSP_TAGS = ("sssp:threshold", "sssp:omp", "sssp:sp", "sssp:cosamp", "sssp:l1")
BASELINE_TAGS = ("omp", "romp", "cosamp", "sp", "bp")
ALGORITHM_TAGS = SSSP_TAGS + BASELINE_TAGS

CSV_HEADER = "algorithm,m,trials,successes,frequency,mean_iterations,mean_runtime_ms"


class SpecError(ValueError):
    """Raised for invalid experiment specifications."""


@dataclass
class ExperimentSpec:
    """Declarative description of one recovery-frequency experiment."""

    n: int
    d: int
    k: int
    dict_kind: str = "random-orthonormal"
    dict_seed: int = 0
    oversampling: int | None = None
    scale_min: float = 0.1
    scale_max: float = 10.0
    support_model: SupportModel = field(default_factory=SupportModel)
    m_values: tuple = ()
    trials: int = 200
    noise_norm: float = 0.0
    algorithms: tuple = ("sssp:threshold",)
    success_rel_tol: float = 1e-4
    master_seed: int = 0
    real_coefficients: bool = False
    # solver knobs (harness defaults; the library defaults are larger)
    sssp_max_iter: int = 15
    sssp_eps_rel: float = 1e-6
    candidate_factor: int = 3
    inner_iters: int = 20
    l1_max_iter: int = 2000
    l1_tol: float = 1e-8
    baseline_max_iter: int = 20

    def __post_init__(self):
        self.m_values = tuple(int(m) for m in self.m_values)
        self.algorithms = tuple(self.algorithms)
        if self.n < 1 or self.d < self.n or self.k < 1 or self.k > self.d:
            raise SpecError(f"bad dimensions n={self.n}, d={self.d}, k={self.k}")
        if not self.m_values:
            raise SpecError("m_values must be non-empty")
        if list(self.m_values) != sorted(self.m_values):
            raise SpecError("m_values must be ascending")
        if self.m_values[0] < 1 or self.m_values[-1] > self.n:
            raise SpecError("m_values must lie in [1, n]")
        if self.trials < 1:
            raise SpecError("trials must be >= 1")
        if self.noise_norm < 0:
            raise SpecError("noise_norm must be >= 0")
        unknown = [a for a in self.algorithms if a not in ALGORITHM_TAGS]
        if unknown:
            raise SpecError(f"unknown algorithm tags {unknown}; valid: {list(ALGORITHM_TAGS)}")
        if not self.algorithms:
            raise SpecError("algorithms must be non-empty")
        if self.dict_kind in ("identity", "random-orthonormal", "renormalized-orthogonal"):
            if self.d != self.n:
                raise SpecError(f"{self.dict_kind} requires d == n")
        elif self.dict_kind == "overcomplete-dft":
            over = self.oversampling if self.oversampling is not None else self.d // self.n
            if over * self.n != self.d:
                raise SpecError("overcomplete-dft requires d == oversampling * n")
            self.oversampling = over
        else:
            raise SpecError(f"unknown dictionary kind {self.dict_kind!r}")

    def scheme(self, kind: str) -> ProjectionScheme:
        return ProjectionScheme(kind=kind, inner_iters=self.inner_iters,
                                l1_max_iter=self.l1_max_iter, l1_tol=self.l1_tol)


@dataclass
class TrialOutcome:
    algorithm: str
    success: bool
    iterations: int
    runtime_ms: float
    residual: float
    rel_error: float
    residual_trace: tuple = ()
    error: str | None = None


@dataclass
class CurvePoint:
    m: int
    successes: int
    trials: int
    frequency: float
    mean_iterations: float
    mean_runtime_ms: float


@dataclass
class RecoveryCurve:
    algorithm: str
    points: list


def derive_seed(*parts) -> int:
    """Splittable 64-bit seed from a hash of the given components."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@lru_cache(maxsize=8)
def _cached_dictionary(kind: str, n: int, d: int, seed: int, scale_min: float,
                       scale_max: float, oversampling: int | None) -> Dictionary:
    if kind == "identity":
        return make_identity(n)
    if kind == "random-orthonormal":
        return make_random_orthonormal(n, seed)
    if kind == "renormalized-orthogonal":
        return make_renormalized_orthogonal(n, seed, scale_min, scale_max)
    return make_overcomplete_dft(n, oversampling)


def build_dictionary(spec: ExperimentSpec) -> Dictionary:
    return _cached_dictionary(spec.dict_kind, spec.n, spec.d, spec.dict_seed,
                              spec.scale_min, spec.scale_max, spec.oversampling)


def _run_algorithm(tag: str, spec: ExperimentSpec, A, D, Phi, y):
    """Recover one instance; returns (x_hat, iterations, residual_trace)."""
    if tag.startswith("sssp:"):
        cfg = SsspConfig(
            k=spec.k,
            candidate_factor=spec.candidate_factor,
            scheme=spec.scheme(tag.split(":", 1)[1]),
            max_iter=spec.sssp_max_iter,
            eps_rel=spec.sssp_eps_rel,
            noise_norm_hint=spec.noise_norm if spec.noise_norm > 0 else None,
        )
        result = sssp_recover(A, D, y, cfg)
        return result.x_hat, result.iterations, tuple(result.residual_trace)
    solver = SolverSpec(
        kind=tag, k=spec.k, max_iter=spec.baseline_max_iter,
        bp_sigma=spec.noise_norm if spec.noise_norm > 0 else None,
        bp_max_iter=spec.l1_max_iter, bp_tol=spec.l1_tol,
    )
    coef, info = solve_with_info(Phi, y, solver)
    x_hat = D.matrix @ coef.dense()
    return x_hat, info.iterations, tuple(info.residual_trace)


def run_trial(spec: ExperimentSpec, m: int, trial_index: int,
              measure_runtime: bool = False, dictionary: Dictionary | None = None) -> dict:
    """Run every algorithm of the spec on one shared random instance.

    Solver exceptions are recorded as failed outcomes and never abort the
    batch.
    """
    if m not in spec.m_values:
        raise SpecError(f"m={m} is not one of the spec's m_values")
    if not 0 <= trial_index < spec.trials:
        raise SpecError(f"trial_index must lie in [0, {spec.trials})")
    D = dictionary if dictionary is not None else build_dictionary(spec)
    A = make_gaussian_sensing(m, spec.n, derive_seed(spec.master_seed, "sensing", m, trial_index))
    coef = gen_sparse_coef(spec.d, spec.k, spec.support_model,
                           derive_seed(spec.master_seed, "coef", m, trial_index),
                           complex_valued=not spec.real_coefficients)
    x = D.matrix @ coef.dense()
    y = A.matrix @ x
    if spec.noise_norm > 0:
        y = add_noise(y, spec.noise_norm, derive_seed(spec.master_seed, "noise", m, trial_index))

    needs_phi = any(not tag.startswith("sssp:") for tag in spec.algorithms)
    Phi = A.matrix @ D.matrix if needs_phi else None

    outcomes = {}
    for tag in spec.algorithms:
        start = time.perf_counter() if measure_runtime else 0.0
        try:
            x_hat, iters, trace = _run_algorithm(tag, spec, A, D, Phi, y)
        except Exception as exc:  # isolation: one bad solver must not sink the trial
            outcomes[tag] = TrialOutcome(tag, False, 0, 0.0, float("nan"),
                                         float("nan"), (), f"{type(exc).__name__}: {exc}")
            continue
        runtime_ms = (time.perf_counter() - start) * 1e3 if measure_runtime else 0.0
        rel_error = float(np.linalg.norm(x - x_hat) / np.linalg.norm(x)) if np.any(x) else 0.0
        outcomes[tag] = TrialOutcome(
            algorithm=tag,
            success=exact_recovery(x, x_hat, spec.success_rel_tol),
            iterations=int(iters),
            runtime_ms=float(runtime_ms),
            residual=float(np.linalg.norm(y - A.matrix @ x_hat)),
            rel_error=rel_error,
            residual_trace=trace,
        )
    return outcomes


def _trial_task(args):
    spec, m, trial_index, measure_runtime = args
    return m, trial_index, run_trial(spec, m, trial_index, measure_runtime)


def run_curve(spec: ExperimentSpec, workers: int = 1, measure_runtime: bool = False,
              progress=None, collect_outcomes: list | None = None) -> list:
    """Aggregate :func:`run_trial` over the full (m, trial) grid.

    ``progress`` is called with ``(done, total)`` after every trial.
    ``collect_outcomes``, if a list, receives ``(m, trial_index, outcomes)``
    tuples for trace export. Results are identical for any worker count.
    """
    dictionary = build_dictionary(spec)
    tasks = [(spec, m, t, measure_runtime) for m in spec.m_values for t in range(spec.trials)]
    results = {}
    done = 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for m, t, outcomes in pool.map(_trial_task, tasks, chunksize=8):
                results[(m, t)] = outcomes
                done += 1
                if progress:
                    progress(done, len(tasks))
    else:
        for spec_, m, t, timing in tasks:
            results[(m, t)] = run_trial(spec_, m, t, timing, dictionary)
            done += 1
            if progress:
                progress(done, len(tasks))

    if collect_outcomes is not None:
        collect_outcomes.extend((m, t, results[(m, t)]) for m, t in sorted(results))

    curves = []
    for tag in spec.algorithms:
        points = []
        for m in spec.m_values:
            rows = [results[(m, t)][tag] for t in range(spec.trials)]
            successes = sum(r.success for r in rows)
            points.append(CurvePoint(
                m=m,
                successes=successes,
                trials=spec.trials,
                frequency=successes / spec.trials,
                mean_iterations=float(np.mean([r.iterations for r in rows])),
                mean_runtime_ms=float(np.mean([r.runtime_ms for r in rows])),
            ))
        curves.append(RecoveryCurve(tag, points))
    return curves


def _fmt(v: float) -> str:
    return repr(float(v))


def export_csv(curves, path) -> None:
    """Write curves as CSV (UTF-8, LF endings, round-trip float precision)."""
    lines = [CSV_HEADER]
    for curve in curves:
        for p in curve.points:
            lines.append(f"{curve.algorithm},{p.m},{p.trials},{p.successes},"
                         f"{_fmt(p.frequency)},{_fmt(p.mean_iterations)},{_fmt(p.mean_runtime_ms)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> list:
    """Parse a file written by :func:`export_csv` back into curves."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a recovery-curve CSV")
    by_alg: dict[str, list] = {}
    for ln in lines[1:]:
        alg, m, trials, successes, freq, mit, mrt = ln.split(",")
        by_alg.setdefault(alg, []).append(CurvePoint(
            int(m), int(successes), int(trials), float(freq), float(mit), float(mrt)))
    return [RecoveryCurve(alg, pts) for alg, pts in by_alg.items()]


def write_traces(outcome_records, path) -> None:
    """Dump residual traces as JSON lines {trial, algorithm, iteration, residual}."""
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m, trial, outcomes in outcome_records:
            for tag, out in outcomes.items():
                for i, res in enumerate(out.residual_trace):
                    fh.write(json.dumps({"m": m, "trial": trial, "algorithm": tag,
                                         "iteration": i, "residual": res}) + "\n")


# ---------------------------------------------------------------------------
# key = value spec files

_SPEC_KEYS = {
    "n": int, "d": int, "k": int,
    "dictionary": str, "dict_seed": int, "oversampling": int,
    "scale_min": float, "scale_max": float,
    "support": str, "min_gap": int,
    "m_values": str, "trials": int, "noise_norm": float,
    "algorithms": str, "success_rel_tol": float, "master_seed": int,
    "real_coefficients": bool,
    "sssp_max_iter": int, "sssp_eps_rel": float, "candidate_factor": int,
    "inner_iters": int, "l1_max_iter": int, "l1_tol": float,
    "baseline_max_iter": int,
}


def _parse_m_values(text: str):
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise SpecError(f"bad m_values range {text!r}")
        return tuple(range(start, stop + 1, step))
    return tuple(int(p) for p in text.split(","))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise SpecError(f"bad boolean {text!r}")


def load_spec(path) -> ExperimentSpec:
    """Parse a key = value spec file (see the module docstring for keys)."""
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _SPEC_KEYS:
                raise SpecError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value
    for req in ("n", "d", "k", "m_values"):
        if req not in raw:
            raise SpecError(f"{path}: missing required key {req!r}")

    def get(key, default=None):
        if key not in raw:
            return default
        if _SPEC_KEYS[key] is bool:
            return _parse_bool(raw[key])
        return _SPEC_KEYS[key](raw[key])

    support = SupportModel(kind=get("support", "uniform"), min_gap=get("min_gap"))
    algorithms = tuple(a.strip() for a in get("algorithms", "sssp:threshold").split(","))
    kwargs = dict(
        n=get("n"), d=get("d"), k=get("k"),
        dict_kind=get("dictionary", "random-orthonormal"),
        dict_seed=get("dict_seed", 0),
        oversampling=get("oversampling"),
        scale_min=get("scale_min", 0.1), scale_max=get("scale_max", 10.0),
        support_model=support,
        m_values=_parse_m_values(raw["m_values"]),
        trials=get("trials", 200),
        noise_norm=get("noise_norm", 0.0),
        algorithms=algorithms,
        success_rel_tol=get("success_rel_tol", 1e-4),
        master_seed=get("master_seed", 0),
        real_coefficients=get("real_coefficients", False),
    )
    for knob in ("sssp_max_iter", "sssp_eps_rel", "candidate_factor",
                 "inner_iters", "l1_max_iter", "l1_tol", "baseline_max_iter"):
        if knob in raw:
            kwargs[knob] = get(knob)
    return ExperimentSpec(**kwargs)


def dump_spec(spec: ExperimentSpec, path) -> None:
    """Write a spec file that :func:`load_spec` parses back equivalently."""
    lines = [
        f"n = {spec.n}", f"d = {spec.d}", f"k = {spec.k}",
        f"dictionary = {spec.dict_kind}", f"dict_seed = {spec.dict_seed}",
    ]
    if spec.oversampling is not None:
        lines.append(f"oversampling = {spec.oversampling}")
    if spec.dict_kind == "renormalized-orthogonal":
        lines += [f"scale_min = {spec.scale_min!r}", f"scale_max = {spec.scale_max!r}"]
    lines.append(f"support = {spec.support_model.kind}")
    if spec.support_model.min_gap is not None:
        lines.append(f"min_gap = {spec.support_model.min_gap}")
    lines += [
        "m_values = " + ",".join(str(m) for m in spec.m_values),
        f"trials = {spec.trials}",
        f"noise_norm = {spec.noise_norm!r}",
        "algorithms = " + ",".join(spec.algorithms),
        f"success_rel_tol = {spec.success_rel_tol!r}",
        f"master_seed = {spec.master_seed}",
        f"real_coefficients = {str(spec.real_coefficients).lower()}",
        f"sssp_max_iter = {spec.sssp_max_iter}",
        f"sssp_eps_rel = {spec.sssp_eps_rel!r}",
        f"candidate_factor = {spec.candidate_factor}",
        f"inner_iters = {spec.inner_iters}",
        f"l1_max_iter = {spec.l1_max_iter}",
        f"l1_tol = {spec.l1_tol!r}",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

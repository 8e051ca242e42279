"""Config-driven experiment sweeps with reproducible seeding and CSV output.

A JSON config names an experiment family, a system, and sweep axes (N, q,
center m, lambda, sigma_u as applicable).  The harness expands the axes into
an ordered list of sweep points, runs ``trials`` independent repetitions of
each point, and writes one CSV row per (point, trial) plus one aggregated
row per point.

Reproducibility contract: the random stream of a cell is
``numpy.random.default_rng(SeedSequence((master_seed, point_index,
trial_index)))`` with the point index in enumeration order and the trial
index starting at 0.  Cells may execute on any number of threads; results
are buffered and written in cell order, so the output bytes depend only on
the config and master seed.

Per-trial failures that are part of the studied phenomena (a diverging
rollout, a rank-deficient unregularized fit) are recorded in the row's
status column and the run continues; config errors abort before any
simulation starts.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .acquisition import (
    AcquisitionConfig,
    DivergenceError,
    FeasibleRegion,
    collect,
    collect_single_trajectory,
)
from .bounds import BoundParams, BoundReport, error_bound
from .estimator import RankDeficientError, assemble_batches, estimation_error, fit
from .systems import BUILTIN_NAMES, NoiseConfig, SystemSpec, builtin, with_envelope, with_noise

__all__ = [
    "EXPERIMENTS",
    "CSV_HEADER",
    "ExperimentConfig",
    "SweepPoint",
    "RunSummary",
    "bundled_config_path",
    "build_system",
    "sweep_points",
    "trial_stream",
    "bounds_for_point",
    "run",
    "validate",
]

EXPERIMENTS = (
    "fig1_q_sweep",
    "fig2_single_traj",
    "fig3_init_perturb",
    "fig4_strong_m_sweep",
    "fig5_lambda_sweep",
    "rate_check",
    "custom",
)

CSV_HEADER = (
    "experiment,system,q,m_norm1,lambda,sigma_u,N,trial,error,"
    "bound_total,bound_noise,bound_nonlin,bound_reg,status"
)

_CONFIG_KEYS = {
    "experiment",
    "system",
    "N",
    "q",
    "m",
    "lambda",
    "sigma_u",
    "trials",
    "master_seed",
    "delta",
    "output_path",
    "init_perturbation_std",
    "region",
    "c0",
}

_SYSTEM_KEYS = {"name", "noise", "envelope"}

# Experiments that sweep q over designed one-step experiments.
_Q_SWEEP_EXPERIMENTS = (
    "fig1_q_sweep",
    "fig3_init_perturb",
    "fig4_strong_m_sweep",
    "fig5_lambda_sweep",
)


def _as_float_list(value, field: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ValueError(f"config field {field!r} must be a nonempty list of numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
            raise ValueError(f"config field {field!r} has a non-numeric entry: {v!r}")
        out.append(float(v))
    return out


def _as_int_list(value, field: str) -> list[int]:
    vals = _as_float_list(value, field)
    out = []
    for v in vals:
        if v != int(v) or v < 1:
            raise ValueError(f"config field {field!r} entries must be positive integers, got {v}")
        out.append(int(v))
    return out


def _as_scalar(value, field: str, lo=None, hi=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(float(value)):
        raise ValueError(f"config field {field!r} must be a finite number, got {value!r}")
    v = float(value)
    if lo is not None and v < lo:
        raise ValueError(f"config field {field!r} must be at least {lo}, got {v}")
    if hi is not None and v >= hi:
        raise ValueError(f"config field {field!r} must be below {hi}, got {v}")
    return v


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Validated sweep description.

    Unknown JSON keys are rejected outright; axis applicability is enforced
    per experiment family (for example, ``sigma_u`` belongs only to the
    single-trajectory baseline and ``q`` must be absent there).
    """

    experiment: str
    system: str | dict
    n_grid: tuple[int, ...]
    q_grid: tuple[float, ...] | None = None
    m_grid: tuple[tuple[float, ...], ...] | None = None
    lambda_grid: tuple[float, ...] = (0.0,)
    sigma_u_grid: tuple[float, ...] | None = None
    trials: int = 100
    master_seed: int = 0
    delta: float = 0.1
    output_path: str = ""
    init_perturbation_std: float = 0.0
    region: FeasibleRegion | None = None
    c0: float = 1.0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if not self.n_grid:
            raise ValueError("N grid must be nonempty")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        single = self.single_trajectory
        if single:
            if not self.sigma_u_grid:
                raise ValueError(f"{self.experiment} requires a sigma_u list")
            for field in ("q_grid", "m_grid", "region"):
                if getattr(self, field) is not None:
                    raise ValueError(
                        f"config field {field.removesuffix('_grid')!r} is not applicable to "
                        f"single-trajectory experiments"
                    )
            if self.init_perturbation_std != 0.0:
                raise ValueError(
                    "config field 'init_perturbation_std' is not applicable to "
                    "single-trajectory experiments"
                )
        else:
            if self.sigma_u_grid is not None:
                raise ValueError(
                    f"config field 'sigma_u' is not applicable to {self.experiment}"
                )
            if self.experiment == "rate_check":
                if self.q_grid is not None:
                    raise ValueError(
                        "config field 'q' is not applicable to rate_check; "
                        "q is set to c0 * N^(-1/4) per sweep point"
                    )
                if self.c0 <= 0:
                    raise ValueError(f"config field 'c0' must be positive, got {self.c0}")
            elif not self.q_grid:
                raise ValueError(f"{self.experiment} requires a q list")
        if not self.output_path:
            object.__setattr__(self, "output_path", f"{self.experiment}.csv")

    @property
    def single_trajectory(self) -> bool:
        """Whether sweep points run the free-running baseline."""
        if self.experiment == "fig2_single_traj":
            return True
        return self.experiment == "custom" and self.sigma_u_grid is not None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValueError(f"config root must be a JSON object, got {type(raw).__name__}")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ValueError(
                f"unknown config key(s): {sorted(unknown)}; allowed keys: {sorted(_CONFIG_KEYS)}"
            )
        for field in ("experiment", "system", "N"):
            if field not in raw:
                raise ValueError(f"config field {field!r} is required")
        experiment = raw["experiment"]
        if not isinstance(experiment, str):
            raise ValueError("config field 'experiment' must be a string")
        system = raw["system"]
        if isinstance(system, dict):
            unknown = set(system) - _SYSTEM_KEYS
            if unknown:
                raise ValueError(
                    f"unknown system key(s): {sorted(unknown)}; allowed keys: {sorted(_SYSTEM_KEYS)}"
                )
        elif not isinstance(system, str):
            raise ValueError("config field 'system' must be a builtin name or an object")
        kwargs: dict = {
            "experiment": experiment,
            "system": system,
            "n_grid": tuple(_as_int_list(raw["N"], "N")),
        }
        if "q" in raw:
            q_grid = _as_float_list(raw["q"], "q")
            if any(v <= 0 for v in q_grid):
                raise ValueError("config field 'q' entries must be positive")
            kwargs["q_grid"] = tuple(q_grid)
        if "m" in raw:
            m_raw = raw["m"]
            if not isinstance(m_raw, list) or not m_raw or not all(isinstance(v, list) for v in m_raw):
                raise ValueError("config field 'm' must be a nonempty list of vectors")
            m_grid = tuple(tuple(_as_float_list(vec, "m")) for vec in m_raw)
            if len({len(vec) for vec in m_grid}) != 1:
                raise ValueError("config field 'm' vectors must share one length")
            kwargs["m_grid"] = m_grid
        if "lambda" in raw:
            lam_grid = _as_float_list(raw["lambda"], "lambda")
            if any(v < 0 for v in lam_grid):
                raise ValueError("config field 'lambda' entries must be nonnegative")
            kwargs["lambda_grid"] = tuple(lam_grid)
        if "sigma_u" in raw:
            sig_grid = _as_float_list(raw["sigma_u"], "sigma_u")
            if any(v < 0 for v in sig_grid):
                raise ValueError("config field 'sigma_u' entries must be nonnegative")
            kwargs["sigma_u_grid"] = tuple(sig_grid)
        if "trials" in raw:
            trials = raw["trials"]
            if isinstance(trials, bool) or not isinstance(trials, int):
                raise ValueError("config field 'trials' must be an integer")
            kwargs["trials"] = trials
        if "master_seed" in raw:
            seed = raw["master_seed"]
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise ValueError("config field 'master_seed' must be an integer")
            kwargs["master_seed"] = seed
        if "delta" in raw:
            kwargs["delta"] = _as_scalar(raw["delta"], "delta")
        if "output_path" in raw:
            if not isinstance(raw["output_path"], str) or not raw["output_path"]:
                raise ValueError("config field 'output_path' must be a nonempty string")
            kwargs["output_path"] = raw["output_path"]
        if "init_perturbation_std" in raw:
            kwargs["init_perturbation_std"] = _as_scalar(
                raw["init_perturbation_std"], "init_perturbation_std", lo=0.0
            )
        if "region" in raw:
            kwargs["region"] = _parse_region(raw["region"])
        if "c0" in raw:
            kwargs["c0"] = _as_scalar(raw["c0"], "c0")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValueError(f"{path}: cannot read config: {exc}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
        try:
            return cls.from_dict(raw)
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None


def _parse_region(raw) -> FeasibleRegion:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ValueError("config field 'region' must be an object with a 'kind'")
    kind = raw["kind"]
    if kind == "all":
        extra = set(raw) - {"kind"}
        if extra:
            raise ValueError(f"region kind 'all' takes no other keys, got {sorted(extra)}")
        return FeasibleRegion()
    if kind == "box":
        extra = set(raw) - {"kind", "lower", "upper"}
        if extra:
            raise ValueError(f"unknown region key(s): {sorted(extra)}")
        if "lower" not in raw or "upper" not in raw:
            raise ValueError("region kind 'box' requires 'lower' and 'upper'")
        return FeasibleRegion.box(
            _as_float_list(raw["lower"], "region.lower"),
            _as_float_list(raw["upper"], "region.upper"),
        )
    raise ValueError(f"unknown region kind {kind!r}; expected 'all' or 'box'")


def build_system(config: ExperimentConfig) -> SystemSpec:
    """Instantiate the configured system, applying noise/envelope overrides."""
    spec = config.system
    if isinstance(spec, str):
        return builtin(spec)
    name = spec.get("name")
    if not isinstance(name, str):
        raise ValueError("system object requires a builtin 'name'")
    sys = builtin(name)
    if "noise" in spec:
        noise_raw = spec["noise"]
        if not isinstance(noise_raw, dict) or set(noise_raw) - {"kind", "scale"}:
            raise ValueError("system 'noise' must be an object with 'kind' and 'scale'")
        scale = noise_raw.get("scale", 0.0)
        if isinstance(scale, list):
            scale = tuple(_as_float_list(scale, "noise.scale"))
        sys = with_noise(sys, NoiseConfig(noise_raw.get("kind", "none"), scale))
    if "envelope" in spec:
        env_raw = spec["envelope"]
        if env_raw is None:
            sys = with_envelope(sys, None)
        else:
            if not isinstance(env_raw, list) or len(env_raw) != 2:
                raise ValueError("system 'envelope' must be null or a [c, beta] pair")
            sys = with_envelope(sys, (float(env_raw[0]), float(env_raw[1])))
    return sys


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """One parameter combination of the sweep, in enumeration order."""

    index: int
    num_experiments: int
    lam: float
    q: float | None = None
    m: np.ndarray | None = None
    sigma_u: float | None = None
    acquisition: AcquisitionConfig | None = None

    @property
    def m_norm1(self) -> float | None:
        if self.m is None:
            return None
        return float(np.abs(self.m).sum())


def sweep_points(config: ExperimentConfig, sys: SystemSpec) -> list[SweepPoint]:
    """Expand the config axes into ordered sweep points.

    Multi-experiment sweeps iterate q (outermost), then m, then lambda, then
    N; the single-trajectory baseline iterates sigma_u, lambda, N.  For
    ``rate_check`` the offset is tied to the experiment count,
    ``q = c0 * N^(-1/4)``.

    Every point's design is validated against the feasible region here,
    before any simulation runs.
    """
    points: list[SweepPoint] = []
    if config.single_trajectory:
        for sigma_u in config.sigma_u_grid:
            for lam in config.lambda_grid:
                for n_exp in config.n_grid:
                    points.append(
                        SweepPoint(
                            index=len(points),
                            num_experiments=n_exp,
                            lam=lam,
                            sigma_u=sigma_u,
                        )
                    )
        return points
    m_grid = config.m_grid
    if m_grid is None:
        m_grid = (tuple(np.zeros(sys.dim)),)
    region = config.region if config.region is not None else FeasibleRegion()
    if config.experiment == "rate_check":
        combos = [(None, m, lam, n_exp) for m in m_grid for lam in config.lambda_grid for n_exp in config.n_grid]
    else:
        combos = [
            (q, m, lam, n_exp)
            for q in config.q_grid
            for m in m_grid
            for lam in config.lambda_grid
            for n_exp in config.n_grid
        ]
    for q, m, lam, n_exp in combos:
        if q is None:
            q = config.c0 * float(n_exp) ** -0.25
        m_vec = np.asarray(m, dtype=float)
        if m_vec.size != sys.dim:
            raise ValueError(
                f"config field 'm' vectors have length {m_vec.size} but system "
                f"{sys.name!r} has dimension {sys.dim}"
            )
        acq = AcquisitionConfig(
            num_experiments=n_exp,
            q=q,
            m=m_vec,
            region=region,
            init_perturbation_std=config.init_perturbation_std,
        )
        points.append(
            SweepPoint(
                index=len(points),
                num_experiments=n_exp,
                lam=lam,
                q=q,
                m=m_vec,
                acquisition=acq,
            )
        )
    return points


def trial_stream(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """The cell's random stream; this derivation is part of the output contract."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, point_index, trial_index)))


def bounds_for_point(
    sys: SystemSpec, point: SweepPoint, delta: float
) -> tuple[BoundReport | None, str]:
    """Evaluate the error bound for a sweep point, or explain why not.

    Returns
    -------
    (report, reason)
        ``report`` is None exactly when bounds are skipped; ``reason`` is a
        one-line diagnostic either way.
    """
    if point.sigma_u is not None:
        return None, "bounds skipped: single-trajectory baseline has no designed excitation"
    if sys.envelope is None:
        return None, "bounds skipped: envelope (c,β) unset"
    burn_in = 4 * sys.dim
    if point.num_experiments < burn_in:
        return None, f"burn-in N ≥ {burn_in} unmet; bounds skipped"
    c, _ = sys.envelope
    reach = point.m_norm1 + point.q
    if not reach < c:
        return None, (
            f"bounds skipped: ‖m‖₁ + q = {reach:g} is not below the envelope radius c = {c:g}"
        )
    params = BoundParams.for_system(
        sys,
        point.num_experiments,
        point.q,
        m=point.m,
        delta=delta,
        lam=point.lam,
    )
    return error_bound(params), "bounds enabled"


@dataclass(frozen=True)
class RunSummary:
    rows_written: int
    failed_cells: int
    wall_time_s: float
    output_path: Path


def _execute_cell(
    sys: SystemSpec, point: SweepPoint, master_seed: int, trial: int
) -> tuple[float | None, str]:
    """Run one (sweep point, trial) cell; returns (error, status)."""
    rng = trial_stream(master_seed, point.index, trial)
    try:
        if point.sigma_u is not None:
            data = collect_single_trajectory(sys, point.sigma_u, point.num_experiments, rng)
        else:
            data = collect(sys, point.acquisition, rng)
        est = fit(*assemble_batches(data), point.lam)
    except DivergenceError:
        return None, "diverged"
    except RankDeficientError:
        return None, "rank_deficient"
    return estimation_error(est, sys.theta_true), "ok"


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def run(
    config: ExperimentConfig,
    out_dir=None,
    threads: int = 1,
    master_seed: int | None = None,
) -> RunSummary:
    """Execute the sweep and write its CSV.

    Parameters
    ----------
    config : ExperimentConfig
        Validated sweep description.
    out_dir : path-like, optional
        Directory the config's ``output_path`` is resolved against.
    threads : int
        Worker threads for cell execution; has no effect on output bytes.
    master_seed : int, optional
        Overrides the config's master seed.

    Returns
    -------
    RunSummary
        Row count, failed-cell count, wall time, and the output path.
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    start = time.perf_counter()
    seed = config.master_seed if master_seed is None else master_seed
    sys = build_system(config)
    points = sweep_points(config, sys)
    bound_cols: list[tuple[str, str, str, str]] = []
    for point in points:
        report, _ = bounds_for_point(sys, point, config.delta)
        if report is None:
            bound_cols.append(("", "", "", ""))
        else:
            bound_cols.append(
                (
                    repr(report.total),
                    repr(report.noise_term),
                    repr(report.nonlinearity_term),
                    repr(report.regularization_term),
                )
            )
    cells = [(point, trial) for point in points for trial in range(config.trials)]
    if threads == 1:
        results = [_execute_cell(sys, point, seed, trial) for point, trial in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda cell: _execute_cell(sys, cell[0], seed, cell[1]), cells)
            )
    out_path = Path(config.output_path)
    if out_dir is not None:
        out_path = Path(out_dir) / out_path
    out_path.parent.mkdir(parents=True, exist_ok=True)
    rows_written = 0
    failed_cells = 0
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for point in points:
            prefix = [
                config.experiment,
                sys.name,
                _fmt(point.q),
                _fmt(point.m_norm1),
                _fmt(point.lam),
                _fmt(point.sigma_u),
                str(point.num_experiments),
            ]
            bounds_cells = bound_cols[point.index]
            errors = []
            failures = 0
            for trial in range(config.trials):
                err, status = results[point.index * config.trials + trial]
                if err is None:
                    failures += 1
                else:
                    errors.append(err)
                writer.writerow(prefix + [str(trial), _fmt(err), *bounds_cells, status])
                rows_written += 1
            agg_status = "ok" if failures == 0 else f"failed={failures}"
            if errors:
                arr = np.asarray(errors)
                mean, std = _fmt(float(arr.mean())), _fmt(float(arr.std()))
            else:
                mean, std = "", ""
            writer.writerow(prefix + ["-1", "", *bounds_cells, agg_status, mean, std])
            rows_written += 1
            failed_cells += failures
    return RunSummary(
        rows_written=rows_written,
        failed_cells=failed_cells,
        wall_time_s=time.perf_counter() - start,
        output_path=out_path,
    )


def validate(config_path) -> list[str]:
    """Check a config file and describe every sweep point's bound status.

    Returns the diagnostic lines; raises ValueError on parse or validation
    failures (with file/line context where available).
    """
    config = ExperimentConfig.from_json(config_path)
    sys = build_system(config)
    points = sweep_points(config, sys)
    lines = [
        f"config ok: experiment={config.experiment} system={sys.name} "
        f"points={len(points)} trials={config.trials}"
    ]
    for point in points:
        if point.sigma_u is not None:
            desc = f"sigma_u={point.sigma_u:g} lambda={point.lam:g} N={point.num_experiments}"
        else:
            desc = (
                f"q={point.q:g} ‖m‖₁={point.m_norm1:g} lambda={point.lam:g} "
                f"N={point.num_experiments}"
            )
        _, reason = bounds_for_point(sys, point, config.delta)
        lines.append(f"point {point.index}: {desc}: {reason}")
    return lines


def bundled_config_path(name: str) -> Path:
    """Filesystem path of a config shipped with the package (for example ``fig1``)."""
    base = resources.files("linsysid") / "configs"
    path = Path(str(base / f"{name}.json"))
    if not path.exists():
        available = sorted(p.stem for p in Path(str(base)).glob("*.json"))
        raise ValueError(f"unknown bundled config {name!r}; available: {available}")
    return path

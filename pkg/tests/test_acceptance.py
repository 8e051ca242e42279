"""End-to-end acceptance suite.

Each test covers one numbered criterion and emits exactly one pass/fail
line (visible with ``pytest -s``; ``pytest -v`` shows the same verdict per
test).  The criteria mix exact algebraic checks with qualitative
reproduction of the library's headline behaviors: recovery of linear
dynamics, validity and conservatism of the error bounds, the
offset-magnitude trade-off, the single-trajectory comparison, the
regularization benefit under heavy noise, and decay-rate checks.

Runtime budgets are part of the criteria and asserted alongside the
numerical conditions.
"""

import time

import numpy as np

from linsysid import linalg
from linsysid.acquisition import (
    AcquisitionConfig,
    DivergenceError,
    collect,
    collect_single_trajectory,
    plan_initializations,
)
from linsysid.bounds import (
    BoundParams,
    error_bound,
    minimal_b,
    pe_bounds,
    remainder_interaction_bound,
)
from linsysid.estimator import assemble_batches, estimation_error, fit
from linsysid.harness import ExperimentConfig, bundled_config_path, run
from linsysid.systems import NoiseConfig, builtin, with_noise
from linsysid.tuning import default_grid, kfold_cv


def _rng(*key):
    """Deterministic per-cell stream keyed by (criterion, subcase, trial)."""
    return np.random.default_rng(np.random.SeedSequence(key))


def _report(num, name, ok, detail):
    print(f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _mean_error(sys_spec, q, n_exp, trials, key, lam=0.0, m=None, init_std=0.0):
    m_vec = np.zeros(sys_spec.dim) if m is None else np.asarray(m, dtype=float)
    cfg = AcquisitionConfig(
        num_experiments=n_exp, q=q, m=m_vec, init_perturbation_std=init_std
    )
    errors = np.empty(trials)
    for trial in range(trials):
        data = collect(sys_spec, cfg, _rng(*key, trial))
        est = fit(*assemble_batches(data), lam)
        errors[trial] = estimation_error(est, sys_spec.theta_true)
    return float(errors.mean())


def test_criterion_01_exact_recovery_noiseless_linear():
    start = time.perf_counter()
    sys_spec = with_noise(builtin("linear2x1"), NoiseConfig())
    cfg = AcquisitionConfig(num_experiments=12, q=1.0, m=np.zeros(3))
    data = collect(sys_spec, cfg, _rng(1, 0))
    err = estimation_error(fit(*assemble_batches(data), 0.0), sys_spec.theta_true)
    elapsed = time.perf_counter() - start
    ok = err <= 1e-8 and elapsed < 1.0
    _report(1, "exact recovery", ok, f"error={err:.3e} (≤1e-8), {elapsed:.2f}s (<1s)")


def test_criterion_02_excitation_bracket_on_design_grid():
    start = time.perf_counter()
    worst = np.inf
    cases = 0
    for dim in (2, 3, 5):
        for mult in (4, 8, 50):
            for q in (0.1, 1.0):
                for m_scale in (0.0, 0.02):
                    n_exp = mult * dim
                    m = np.full(dim, m_scale)
                    plan = plan_initializations(
                        AcquisitionConfig(num_experiments=n_exp, q=q, m=m), dim
                    )
                    lo, hi = linalg.sym_eig_extremes(plan @ plan.T)
                    m1 = float(np.abs(m).sum())
                    params = BoundParams(
                        n=dim - 1,
                        p=1,
                        num_experiments=n_exp,
                        q=q,
                        sigma_w=0.0,
                        m_one_norm=m1,
                        m_two_norm=float(np.linalg.norm(m)),
                        b=minimal_b(m1, q),
                    )
                    lower, upper = pe_bounds(params)
                    worst = min(worst, lo - lower, upper - hi)
                    cases += 1
    elapsed = time.perf_counter() - start
    ok = worst >= -1e-9 and elapsed < 5.0
    _report(
        2,
        "excitation bracket",
        ok,
        f"{cases} designs, worst slack={worst:.3e} (≥-1e-9), {elapsed:.2f}s (<5s)",
    )


def test_criterion_03_error_bound_coverage():
    start = time.perf_counter()
    sys_spec = builtin("pendulum")
    cfg = AcquisitionConfig(num_experiments=2000, q=0.9, m=np.zeros(3))
    total = error_bound(
        BoundParams.for_system(sys_spec, 2000, 0.9, delta=0.1, lam=0.0)
    ).total
    hits = 0
    for trial in range(200):
        data = collect(sys_spec, cfg, _rng(3, trial))
        err = estimation_error(fit(*assemble_batches(data), 0.0), sys_spec.theta_true)
        hits += err <= total
    elapsed = time.perf_counter() - start
    ok = hits >= 180 and elapsed < 60.0
    _report(
        3,
        "bound coverage",
        ok,
        f"{hits}/200 trials within bound {total:.3f} (≥180), {elapsed:.1f}s (<1min)",
    )


def test_criterion_04_offset_size_crossover():
    start = time.perf_counter()
    sys_spec = builtin("pendulum")
    means = {
        (q, n_exp): _mean_error(sys_spec, q, n_exp, 100, (4, idx))
        for idx, (q, n_exp) in enumerate(
            [(0.6, 100), (1.2, 100), (0.6, 100000), (1.2, 100000)]
        )
    }
    elapsed = time.perf_counter() - start
    small_n = means[(0.6, 100)] > means[(1.2, 100)]
    large_n = means[(0.6, 100000)] < means[(1.2, 100000)]
    ok = small_n and large_n and elapsed < 300.0
    _report(
        4,
        "offset crossover",
        ok,
        (
            f"N=100: {means[(0.6, 100)]:.4f} > {means[(1.2, 100)]:.4f}; "
            f"N=1e5: {means[(0.6, 100000)]:.4f} < {means[(1.2, 100000)]:.4f}; "
            f"{elapsed:.1f}s (<5min)"
        ),
    )


def test_criterion_05_single_trajectory_plateau():
    start = time.perf_counter()
    sys_spec = builtin("pendulum")
    n_exp = 100000
    single_means = {}
    for idx, sigma_u in enumerate((0.1, 0.5, 1.0)):
        errors = []
        for trial in range(100):
            rng = _rng(5, idx, trial)
            try:
                data = collect_single_trajectory(sys_spec, sigma_u, n_exp, rng)
            except DivergenceError:
                continue
            est = fit(*assemble_batches(data), 0.0)
            errors.append(estimation_error(est, sys_spec.theta_true))
        single_means[sigma_u] = float(np.mean(errors))
    multi_mean = _mean_error(sys_spec, 0.6, n_exp, 100, (5, 99))
    elapsed = time.perf_counter() - start
    in_band = all(0.4 <= v <= 2.0 for v in single_means.values())
    dominated = all(v >= 3.0 * multi_mean for v in single_means.values())
    ok = in_band and dominated and elapsed < 300.0
    _report(
        5,
        "single-trajectory plateau",
        ok,
        (
            f"means={ {k: round(v, 3) for k, v in single_means.items()} } "
            f"(within [0.4,2.0]), multi={multi_mean:.4f} (≥3x), {elapsed:.1f}s (<5min)"
        ),
    )


def test_criterion_06_perturbed_initialization_robustness():
    start = time.perf_counter()
    sys_spec = builtin("pendulum")
    worst_rel = 0.0
    details = []
    for idx, q in enumerate((0.6, 0.9, 1.2)):
        base = _mean_error(sys_spec, q, 10000, 100, (6, idx, 0))
        perturbed = _mean_error(sys_spec, q, 10000, 100, (6, idx, 1), init_std=0.1)
        rel = abs(perturbed - base) / base
        worst_rel = max(worst_rel, rel)
        details.append(f"q={q}: {rel:.1%}")
    elapsed = time.perf_counter() - start
    ok = worst_rel <= 0.25 and elapsed < 300.0
    _report(
        6,
        "perturbation robustness",
        ok,
        f"{'; '.join(details)} (each ≤25%), {elapsed:.1f}s (<5min)",
    )


def test_criterion_07_error_grows_with_offset_center():
    start = time.perf_counter()
    sys_spec = builtin("strong")
    scales = (0.2, 0.4, 0.6, 1.2)
    ok = True
    details = []
    for qi, q in enumerate((0.05, 0.1, 0.15)):
        means = [
            _mean_error(sys_spec, q, 10000, 100, (7, qi, si), m=np.full(3, scale))
            for si, scale in enumerate(scales)
        ]
        increasing = all(a < b for a, b in zip(means, means[1:]))
        ok = ok and increasing
        details.append(f"q={q}: " + ("increasing" if increasing else f"NOT monotone {means}"))
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300.0
    _report(
        7,
        "center-offset ordering",
        ok,
        f"{'; '.join(details)}, {elapsed:.1f}s (<5min)",
    )


def test_criterion_08_regularization_benefit_under_heavy_noise():
    start = time.perf_counter()
    sys_spec = with_noise(builtin("pendulum"), NoiseConfig("gaussian_isotropic", 2.0))
    grid = default_grid()
    ok = True
    details = []
    for qi, q in enumerate((0.05, 0.1, 0.15)):
        cfg = AcquisitionConfig(num_experiments=500, q=q, m=np.zeros(3))
        sums = np.zeros(grid.size)
        cv_choices = np.empty(100)
        for trial in range(100):
            data = collect(sys_spec, cfg, _rng(8, qi, trial))
            x1, z = assemble_batches(data)
            for gi, lam in enumerate(grid):
                est = fit(x1, z, float(lam))
                sums[gi] += estimation_error(est, sys_spec.theta_true)
            cv_choices[trial] = kfold_cv(data, k=10).best_lambda
        means = sums / 100.0
        reduction = 1.0 - means.min() / means[0]
        avg_lam = float(cv_choices.mean())
        ok = ok and reduction >= 0.10 and 1.0 <= avg_lam <= 30.0
        details.append(f"q={q}: drop={reduction:.0%}, cv λ={avg_lam:.1f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 600.0
    _report(
        8,
        "regularization benefit",
        ok,
        f"{'; '.join(details)} (drop ≥10%, λ∈[1,30]), {elapsed:.1f}s (<10min)",
    )


def test_criterion_09_error_decay_rates():
    start = time.perf_counter()
    n_grid = np.round(np.logspace(3, 5, 21)).astype(int)
    log_n = np.log(n_grid.astype(float))

    sys_spec = builtin("pendulum")
    shrinking_q = [
        _mean_error(sys_spec, float(n) ** -0.25, int(n), 100, (9, 0, i))
        for i, n in enumerate(n_grid)
    ]
    slope_pendulum = float(np.polyfit(log_n, np.log(shrinking_q), 1)[0])

    lin = builtin("linear2x1")
    fixed_q = [
        _mean_error(lin, 1.0, int(n), 100, (9, 1, i)) for i, n in enumerate(n_grid)
    ]
    slope_linear = float(np.polyfit(log_n, np.log(fixed_q), 1)[0])

    elapsed = time.perf_counter() - start
    ok = (
        -0.45 <= slope_pendulum <= -0.10
        and -0.6 <= slope_linear <= -0.4
        and elapsed < 600.0
    )
    _report(
        9,
        "decay rates",
        ok,
        (
            f"shrinking-offset slope={slope_pendulum:.3f} (in [-0.45,-0.10]), "
            f"fixed-offset slope={slope_linear:.3f} (in [-0.6,-0.4]), {elapsed:.1f}s (<10min)"
        ),
    )


def test_criterion_10_ridge_normal_equations_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    worst_resid = 0.0
    optimal = True
    for _ in range(100):
        n = int(rng.integers(1, 5))
        p = int(rng.integers(0, 4))
        dim = n + p
        n_samples = dim + int(rng.integers(5, 40))
        x1 = rng.normal(size=(n, n_samples))
        z = rng.normal(size=(dim, n_samples))
        lam = float(10.0 ** rng.uniform(-2, 1))
        est = fit(x1, z, lam)
        gram = z @ z.T + lam * np.eye(dim)
        target = x1 @ z.T
        resid = np.linalg.norm(est.theta_hat @ gram - target) / max(
            1.0, np.linalg.norm(target)
        )
        worst_resid = max(worst_resid, resid)

        def objective(theta):
            return np.linalg.norm(x1 - theta @ z) ** 2 + lam * np.linalg.norm(theta) ** 2

        base = objective(est.theta_hat)
        for _ in range(100):
            delta = rng.normal(size=est.theta_hat.shape)
            delta *= 1e-3 / np.linalg.norm(delta)
            if objective(est.theta_hat + delta) < base:
                optimal = False
    elapsed = time.perf_counter() - start
    ok = worst_resid <= 1e-8 and optimal and elapsed < 10.0
    _report(
        10,
        "ridge oracle",
        ok,
        (
            f"worst residual={worst_resid:.2e} (≤1e-8), "
            f"objective minimal among perturbations={optimal}, {elapsed:.1f}s (<10s)"
        ),
    )


def test_criterion_11_remainder_interaction_validity():
    start = time.perf_counter()
    sys_spec = with_noise(builtin("pendulum"), NoiseConfig())
    worst = np.inf
    cases = 0
    for q in (0.1, 0.3, 0.6):
        for m_scale in (0.0, 0.05, 0.2):
            for lam in (0.0, 1.0, 10.0):
                m = np.full(3, m_scale)
                cfg = AcquisitionConfig(num_experiments=120, q=q, m=m)
                data = collect(sys_spec, cfg, _rng(11, cases))
                _, z = assemble_batches(data)
                _, r = data.ground_truth
                gram = z @ z.T + lam * np.eye(3)
                empirical = linalg.spectral_norm(r @ z.T @ np.linalg.inv(gram))
                params = BoundParams.for_system(sys_spec, 120, q, m=m, lam=lam)
                worst = min(worst, remainder_interaction_bound(params) - empirical)
                cases += 1
    elapsed = time.perf_counter() - start
    ok = worst >= -1e-9 and elapsed < 30.0
    _report(
        11,
        "remainder interaction validity",
        ok,
        f"{cases} configs, worst slack={worst:.3e} (≥-1e-9), {elapsed:.1f}s (<30s)",
    )


def test_criterion_12_thread_count_invariance(tmp_path):
    cfg = ExperimentConfig.from_json(bundled_config_path("fig1"))
    serial = run(cfg, out_dir=tmp_path / "one", threads=1)
    threaded = run(cfg, out_dir=tmp_path / "eight", threads=8)
    identical = serial.output_path.read_bytes() == threaded.output_path.read_bytes()
    _report(
        12,
        "thread-count invariance",
        identical,
        (
            f"{serial.rows_written} rows, byte-identical at 1 vs 8 threads: {identical} "
            f"({serial.wall_time_s:.1f}s vs {threaded.wall_time_s:.1f}s)"
        ),
    )

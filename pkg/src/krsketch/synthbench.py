"""Synthetic rank-one-structured least-squares benchmark.

A problem instance draws two factor matrices F (n1-by-p) and G (n2-by-p)
with orthonormal singular vector factors and singular values from
N(1, 0.2^2), a reference coefficient vector from N(1, 0.5^2), and a
right-hand side b = A x_ref + noise with A the column-wise Khatri-Rao
product of F and G.  Sketched solves are scored by the relative error
(f(x_s) - f(x*)) / f(x*) against the full least-squares baseline, both
residuals evaluated on the full system.

Seed layout, fixed and documented here: each distinct problem instance g
(0-based grid index; the r sweep has a single instance g = 0) uses seed
master_seed + 1000 * g, and trial t (1-based) uses sketch seed
master_seed + t, shared across strategies and grid points so that
strategies face identical problem and trial streams.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lsq import DEFAULT_RCOND, relative_error, residual_sq_full, solve_ls
from .records import SweepRecord
from .sketches import STRATEGIES, STRATEGY_CASE1, make_sketch, sketch_system
from .tensor_core import KhatriRaoOperator, kr_apply, kr_materialize

DEFAULT_SEED = 7
DEFAULT_NOISE = 1e-6

R_GRID_DEFAULT = (256, 1024, 4096, 16384, 65536)
N_GRID_DEFAULT = (50, 100, 150, 200, 250)
P_GRID_DEFAULT = (3, 6, 9, 12, 15)

_PROBLEM_SEED_STRIDE = 1000


@dataclass
class SynthProblem:
    """One random instance: factors, reference solution, noisy data."""

    n1: int
    n2: int
    p: int
    seed: int
    noise_level: float
    factor_f: np.ndarray
    factor_g: np.ndarray
    sv_f: np.ndarray
    sv_g: np.ndarray
    op: KhatriRaoOperator
    x_ref: np.ndarray
    b: np.ndarray
    _baselines: dict = field(default_factory=dict, repr=False)

    def baseline(self, rcond: float = DEFAULT_RCOND) -> tuple[np.ndarray, float]:
        """Full least-squares minimizer and its squared residual on the
        full system; cached per rcond."""
        if rcond not in self._baselines:
            sol = solve_ls(kr_materialize(self.op), self.b, rcond)
            f_star = residual_sq_full(self.op, sol.x, self.b)
            self._baselines[rcond] = (sol.x, f_star)
        return self._baselines[rcond]


def _random_factor(rng: np.random.Generator, n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Factor U diag(s) V^T with orthonormal U (n-by-p), V (p-by-p) from QR
    of Gaussian draws and s ~ N(1, 0.2^2).  Draw order is part of the
    reproducibility contract."""
    u = np.linalg.qr(rng.standard_normal((n, p)))[0]
    v = np.linalg.qr(rng.standard_normal((p, p)))[0]
    s = rng.normal(1.0, 0.2, p)
    return (u * s) @ v.T, np.abs(s)


def gen_problem(
    n1: int, n2: int, p: int, seed: int, noise_level: float = DEFAULT_NOISE
) -> SynthProblem:
    """Draw an instance.  Order: F factor, G factor, x_ref, then noise."""
    if min(n1, n2) < p:
        raise ValueError("factors must be tall: n1, n2 >= p")
    if noise_level < 0:
        raise ValueError("noise level must be nonnegative")
    rng = np.random.default_rng(seed)
    factor_f, sv_f = _random_factor(rng, n1, p)
    factor_g, sv_g = _random_factor(rng, n2, p)
    op = KhatriRaoOperator(((factor_f, factor_g),))
    x_ref = rng.normal(1.0, 0.5, p)
    b = kr_apply(op, x_ref)
    if noise_level > 0:
        b = b + noise_level * rng.standard_normal(n1 * n2)
    return SynthProblem(
        n1=n1,
        n2=n2,
        p=p,
        seed=seed,
        noise_level=noise_level,
        factor_f=factor_f,
        factor_g=factor_g,
        sv_f=np.sort(sv_f)[::-1],
        sv_g=np.sort(sv_g)[::-1],
        op=op,
        x_ref=x_ref,
        b=b,
    )


def run_trial(
    problem: SynthProblem,
    strategy: str,
    trial_seed: int,
    trial: int,
    r: int | None = None,
    r1: int | None = None,
    r2: int | None = None,
    rcond: float = DEFAULT_RCOND,
    sketch=None,
) -> SweepRecord:
    """Sketch, solve, and score one trial.

    The wall time covers sketch generation, sketching, and the small solve;
    the full-system residual evaluation used for scoring is excluded.
    An explicit ``sketch`` overrides the strategy draw (test hook).
    """
    _, f_star = problem.baseline(rcond)
    start = time.perf_counter()
    if sketch is None:
        sketch = make_sketch(
            strategy, problem.n1, problem.n2, seed=trial_seed, r=r, r1=r1, r2=r2
        )
    if sketch.rows < problem.p:
        raise ValueError(f"sketch rows {sketch.rows} < unknowns {problem.p}")
    system = sketch_system(sketch, problem.op, problem.b)
    sol = solve_ls(system.sa, system.sb, rcond)
    wall_ms = (time.perf_counter() - start) * 1e3
    f_sketched = residual_sq_full(problem.op, sol.x, problem.b)
    return SweepRecord(
        strategy=strategy,
        r=sketch.rows,
        r1=getattr(sketch, "r1", None),
        r2=getattr(sketch, "r2", None),
        n1=problem.n1,
        n2=problem.n2,
        p=problem.p,
        trial=trial,
        rel_error=relative_error(f_sketched, f_star),
        wall_time_ms=wall_ms,
    )


@dataclass(frozen=True)
class SweepConfig:
    """Shared sweep knobs; grids and fixed dimensions are per-sweep args."""

    strategies: tuple[str, ...] = STRATEGIES
    trials: int = 10
    master_seed: int = DEFAULT_SEED
    noise_level: float = DEFAULT_NOISE
    rcond: float = DEFAULT_RCOND
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise ValueError(f"unknown strategy {strategy!r}")


def _run_tasks(tasks, jobs: int) -> list[SweepRecord]:
    """Execute (sort_key, callable) pairs, possibly in parallel, and return
    records ordered by key regardless of completion order."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(key, pool.submit(fn)) for key, fn in tasks]
            results = [(key, fut.result()) for key, fut in futures]
    else:
        results = [(key, fn()) for key, fn in tasks]
    results.sort(key=lambda item: item[0])
    return [rec for _, rec in results]


def _sweep(problems, config: SweepConfig, r_for) -> list[SweepRecord]:
    """Common sweep driver: ``problems`` is a list of (grid_index, problem),
    ``r_for(grid_index)`` gives the sketch row target at that point."""
    for _, problem in problems:
        problem.baseline(config.rcond)
    tasks = []
    for s_idx, strategy in enumerate(config.strategies):
        for g_idx, problem in problems:
            for trial in range(1, config.trials + 1):
                trial_seed = config.master_seed + trial

                def fn(problem=problem, strategy=strategy, trial=trial,
                       trial_seed=trial_seed, r=r_for(g_idx)):
                    return run_trial(
                        problem, strategy, trial_seed, trial, r=r, rcond=config.rcond
                    )

                tasks.append(((s_idx, g_idx, trial), fn))
    return _run_tasks(tasks, config.jobs)


def sweep_r(
    r_grid=R_GRID_DEFAULT,
    n1: int = 100,
    n2: int = 100,
    p: int = 10,
    config: SweepConfig = SweepConfig(),
) -> list[SweepRecord]:
    """Error versus sketch size on one fixed problem instance."""
    problem = gen_problem(n1, n2, p, config.master_seed, config.noise_level)
    r_grid = list(r_grid)
    problems = [(g, problem) for g in range(len(r_grid))]
    # every grid point reuses instance g = 0, so baseline work is shared
    records = _sweep(problems, config, lambda g: r_grid[g])
    return records


def sweep_n(
    n_grid=N_GRID_DEFAULT,
    r: int = 2209,
    p: int = 10,
    config: SweepConfig = SweepConfig(),
) -> list[SweepRecord]:
    """Error versus ambient factor dimension (n1 = n2 = n) at fixed r."""
    problems = [
        (g, gen_problem(n, n, p, config.master_seed + _PROBLEM_SEED_STRIDE * g,
                        config.noise_level))
        for g, n in enumerate(n_grid)
    ]
    return _sweep(problems, config, lambda g: r)


def sweep_p(
    p_grid=P_GRID_DEFAULT,
    r: int = 4096,
    n1: int = 100,
    n2: int = 100,
    config: SweepConfig = SweepConfig(),
) -> list[SweepRecord]:
    """Error versus column count p at fixed r and ambient dimensions."""
    problems = [
        (g, gen_problem(n1, n2, p, config.master_seed + _PROBLEM_SEED_STRIDE * g,
                        config.noise_level))
        for g, p in enumerate(p_grid)
    ]
    return _sweep(problems, config, lambda g: r)

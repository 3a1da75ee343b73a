"""
Seeded Monte-Carlo engine for closed-loop experiments.

Every trial owns its generators, keyed by (master_seed, distribution index,
trial index). All controllers of an experiment share those keys, so they are
compared on the same noise realizations. Trials are rolled out in fixed-size
chunks and reduced in trial order, so tables do not depend on the number of
worker processes.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import special
from tqdm import tqdm

from ..models.control_models import Controller, CostStats, ExperimentSpec
from ..models.interfaces import Mechanism
from ..models.privacy_models import AmbiguityBounds, InvalidBudget, NoiseDistribution
from ..models.problem_models import CostWeights, PlantModel, ProblemSetup, quadratic_cost
from ..utils.linalg import spd_cholesky
from ..utils.logging_config import logger
from .ambiguity_service import radius_eta
from .privacy_service import (
    draw_noise,
    gaussian_epsilon_for_variance,
    gaussian_sigma_lower,
    laplace_b_lower,
    laplace_epsilon_for_scale,
)
from .synthesis_service import synthesize_dr

CHUNK_SIZE = 1000
STATS_COLUMNS = ["mechanism", "param", "controller", "mean", "p95", "worst", "trials", "seed"]
SWEEP_COLUMNS = ["mechanism", "epsilon", "delta", "mean_cost"]

TrialSeed = Union[int, Sequence[int]]

_INITIAL_STREAM, _PROCESS_STREAM, _MEASUREMENT_STREAM = 0, 1, 2


def trial_key(master_seed: int, dist_idx: int, trial_idx: int) -> Tuple[int, ...]:
    return (int(master_seed), int(dist_idx), int(trial_idx))


def _stream(trial_seed: TrialSeed, stream: int) -> np.random.Generator:
    key = [int(trial_seed)] if np.isscalar(trial_seed) else [int(s) for s in trial_seed]
    return np.random.default_rng(np.random.SeedSequence(key + [stream]))


def _factor(covariance: np.ndarray) -> np.ndarray:
    factor = spd_cholesky(covariance)
    if factor is None:
        raise ValueError("covariance is not positive definite")
    return factor


def draw_trial(plant: PlantModel, dist: NoiseDistribution, trial_seed: TrialSeed,
               zero_noise: bool = False,
               factors: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Tuple[np.ndarray, ...]:
    """Initial state, process noise (N, n) and measurement noise (N+1, p) of one trial."""
    n, p, N = plant.n, plant.p, plant.N
    if zero_noise:
        return plant.x_ini.copy(), np.zeros((N, n)), np.zeros((N + 1, p))

    initial_factor, process_factor = factors or (_factor(plant.Sigma_ini), _factor(plant.Sigma_w))
    x0 = plant.x_ini + initial_factor @ _stream(trial_seed, _INITIAL_STREAM).standard_normal(n)
    w = _stream(trial_seed, _PROCESS_STREAM).standard_normal((N, n)) @ process_factor.T
    v = draw_noise(dist, _stream(trial_seed, _MEASUREMENT_STREAM), (N + 1, p))
    return x0, w, v


def rollout_batch(plant: PlantModel, weights: CostWeights, ctrl: Controller,
                  x0: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Closed-loop costs of a batch of trials.

    x0 is (B, n), w is (B, N, n) and v is (B, N+1, p); returns (B,) costs.
    """
    if ctrl.horizon != plant.N:
        raise ValueError(f"controller horizon {ctrl.horizon} does not match plant horizon {plant.N}")
    A, B, C = plant.A, plant.B, plant.C
    batch = x0.shape[0]
    states = np.empty((batch, plant.N + 1, plant.n))
    inputs = np.empty((batch, plant.N, plant.m))
    estimate = np.broadcast_to(ctrl.initial_state(), (batch, plant.n)).copy()

    x = x0
    states[:, 0] = x
    for k in range(plant.N):
        y_tilde = x @ C.T + v[:, k]
        u, estimate = ctrl.step(k, y_tilde, estimate)
        x = x @ A.T + u @ B.T + w[:, k]
        inputs[:, k] = u
        states[:, k + 1] = x
    return quadratic_cost(states, inputs, weights)


def run_trial(plant: PlantModel, weights: CostWeights, ctrl: Controller,
              dist: NoiseDistribution, trial_seed: TrialSeed, zero_noise: bool = False) -> float:
    """Cost J of one closed-loop rollout; deterministic in its inputs."""
    x0, w, v = draw_trial(plant, dist, trial_seed, zero_noise)
    return float(rollout_batch(plant, weights, ctrl, x0[None], w[None], v[None])[0])


def _simulate_chunk(plant: PlantModel, weights: CostWeights, ctrl: Controller,
                    dist: NoiseDistribution, master_seed: int, dist_idx: int,
                    start: int, stop: int, zero_noise: bool = False) -> np.ndarray:
    factors = None if zero_noise else (_factor(plant.Sigma_ini), _factor(plant.Sigma_w))
    draws = [
        draw_trial(plant, dist, trial_key(master_seed, dist_idx, i), zero_noise, factors)
        for i in range(start, stop)
    ]
    x0, w, v = (np.stack(parts) for parts in zip(*draws))
    return rollout_batch(plant, weights, ctrl, x0, w, v)


def _run_chunk(task: Tuple) -> np.ndarray:
    return _simulate_chunk(*task)


def nearest_rank(costs: np.ndarray, q: float = 0.95) -> float:
    """ceil(q n)-th order statistic."""
    ordered = np.sort(costs)
    rank = max(int(math.ceil(q * ordered.size)), 1)
    return float(ordered[rank - 1])


def summarize_costs(costs: np.ndarray, controller_id: str, dist: NoiseDistribution,
                    seed: int) -> CostStats:
    return CostStats(
        controller_id=controller_id,
        mechanism=dist.mechanism,
        param=float(dist.parameter),
        mean=float(np.mean(costs)),
        p95=nearest_rank(costs, 0.95),
        worst=float(np.max(costs)),
        minimum=float(np.min(costs)),
        trials=int(costs.size),
        seed=int(seed),
    )


def monte_carlo(spec: ExperimentSpec, workers: int = 1, progress: bool = False,
                zero_noise: bool = False) -> List[CostStats]:
    """Cost statistics for every (controller, true distribution) pair of the spec."""
    outside = spec.out_of_bounds()
    if outside:
        logger.warning("True distributions outside the ambiguity set", {
            "distributions": [d.label for d in outside]
        })

    tasks = []
    for ctrl in spec.controllers:
        for di, dist in enumerate(spec.true_distributions):
            for start in range(0, spec.trials, CHUNK_SIZE):
                stop = min(start + CHUNK_SIZE, spec.trials)
                tasks.append((spec.plant, spec.weights, ctrl, dist, spec.master_seed,
                              di, start, stop, zero_noise))

    with logger.performance_timer("monte_carlo"):
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunks = list(tqdm(pool.map(_run_chunk, tasks), total=len(tasks),
                                   desc="Monte-Carlo", unit="chunk", disable=not progress))
        else:
            chunks = [_run_chunk(task) for task in tqdm(tasks, desc="Monte-Carlo",
                                                         unit="chunk", disable=not progress)]

    table = []
    position = 0
    for ctrl in spec.controllers:
        for dist in spec.true_distributions:
            count = math.ceil(spec.trials / CHUNK_SIZE)
            costs = np.concatenate(chunks[position:position + count])
            position += count
            table.append(summarize_costs(costs, ctrl.label, dist, spec.master_seed))
    return table


def stats_frame(table: Iterable[CostStats]) -> pd.DataFrame:
    """Plot-data table with one row per (controller, distribution)."""
    return pd.DataFrame([stats.to_row() for stats in table], columns=STATS_COLUMNS)


def dominance_counts(table: Iterable[CostStats],
                     robust: str = "proposed", baseline: str = "lqg") -> Dict[str, Dict[str, int]]:
    """
    Per mechanism, the number of grid points where the robust controller's
    p95 and worst cost are below the baseline's, and where its mean is not.
    """
    by_point: Dict[Tuple[str, float], Dict[str, CostStats]] = {}
    for stats in table:
        by_point.setdefault((stats.mechanism.value, stats.param), {})[stats.controller_id] = stats

    counts: Dict[str, Dict[str, int]] = {}
    for (mechanism, _), pair in sorted(by_point.items()):
        if robust not in pair or baseline not in pair:
            continue
        entry = counts.setdefault(mechanism, {"points": 0, "p95": 0, "worst": 0, "mean_tradeoff": 0})
        ours, theirs = pair[robust], pair[baseline]
        entry["points"] += 1
        entry["p95"] += int(ours.p95 < theirs.p95)
        entry["worst"] += int(ours.worst < theirs.worst)
        entry["mean_tradeoff"] += int(ours.mean >= theirs.mean)
    return counts


def risk_sensitive_value_mc(plant: PlantModel, weights: CostWeights, ctrl: Controller,
                            sigma2: float, tau: float, trials: int,
                            seed: int = 0) -> float:
    """
    Monte-Carlo estimate of log E[exp(J / tau)] with v ~ N(0, sigma2 I).

    Draws whole chunks from a single generator; used as an oracle for the
    closed-form optimal value.
    """
    rng = np.random.default_rng(seed)
    dist = NoiseDistribution.gaussian(sigma2, plant.L)
    initial_factor, process_factor = _factor(plant.Sigma_ini), _factor(plant.Sigma_w)
    n, p, N = plant.n, plant.p, plant.N

    scaled = []
    for start in range(0, trials, CHUNK_SIZE * 100):
        size = min(CHUNK_SIZE * 100, trials - start)
        x0 = plant.x_ini + rng.standard_normal((size, n)) @ initial_factor.T
        w = rng.standard_normal((size, N, n)) @ process_factor.T
        v = draw_noise(dist, rng, (size, N + 1, p))
        scaled.append(rollout_batch(plant, weights, ctrl, x0, w, v) / tau)

    return float(special.logsumexp(np.concatenate(scaled)) - math.log(trials))


def _sweep_point(setup: ProblemSetup, epsilon: float, delta: float,
                 ratio: float) -> Tuple[AmbiguityBounds, List[NoiseDistribution]]:
    """
    Ambiguity bounds and true distributions of one sweep point.

    The Gaussian mechanism is only calibrated for epsilon < 1. Above that the
    point is Laplace-only: the nominal variance is matched to the Laplace
    lower bound (2 b_lo^2) and the Gaussian interval collapses onto it.
    """
    L = setup.plant.L
    b_lo = laplace_b_lower(setup.privacy_spec(Mechanism.LAPLACE, epsilon, delta), setup.plant.C)
    try:
        sigma2_lo = gaussian_sigma_lower(setup.privacy_spec(Mechanism.GAUSSIAN, epsilon, delta),
                                         setup.plant.C)
    except InvalidBudget as e:
        logger.warning("Gaussian mechanism unavailable, sweep point is Laplace-only", {
            "epsilon": epsilon, "delta": delta, "reason": str(e),
        })
        sigma2_nominal = 2.0 * b_lo ** 2
        bounds = AmbiguityBounds(sigma2_nominal, sigma2_nominal, b_lo, ratio * b_lo, L)
        return bounds, [NoiseDistribution.laplace(b_lo, L)]

    bounds = AmbiguityBounds.from_ratios(sigma2_lo, b_lo, ratio, ratio, L)
    return bounds, [NoiseDistribution.gaussian(sigma2_lo, L), NoiseDistribution.laplace(b_lo, L)]


def privacy_sweep(setup: ProblemSetup, epsilons: Sequence[float], deltas: Sequence[float],
                  ratio: float, trials: int, master_seed: int, workers: int = 1,
                  grid_size: int = 64, refine_iters: int = 60,
                  progress: bool = False) -> pd.DataFrame:
    """
    Mean cost of the robust controller across privacy budgets.

    Each (epsilon, delta) point recalibrates both lower bounds, sets the
    upper bounds by ``ratio``, recomputes eta and re-synthesizes. The true
    noise of each mechanism sits at its calibrated lower bound. Points with
    epsilon >= 1 only carry a Laplace row.
    """
    plant, weights = setup.plant, setup.weights
    rows: List[Dict[str, Any]] = []
    for epsilon in epsilons:
        for delta in deltas:
            bounds, dists = _sweep_point(setup, epsilon, delta, ratio)
            eta = radius_eta(bounds)
            controller = synthesize_dr(eta, plant, weights, bounds.sigma2_lo,
                                       grid_size=grid_size, refine_iters=refine_iters)

            for dist in dists:
                spec = ExperimentSpec(plant, weights, [controller], [dist], trials, master_seed, bounds)
                stats = monte_carlo(spec, workers=workers, progress=progress)[0]
                if dist.mechanism == Mechanism.GAUSSIAN:
                    achieved = gaussian_epsilon_for_variance(dist.parameter, delta, setup.gamma, plant.C)
                else:
                    achieved = laplace_epsilon_for_scale(dist.parameter, setup.gamma, plant.C)
                rows.append({
                    "mechanism": dist.mechanism.value,
                    "epsilon": float(epsilon),
                    "delta": float(delta),
                    "mean_cost": stats.mean,
                    "param": dist.parameter,
                    "epsilon_achieved": achieved,
                    "eta": eta.eta,
                    "tau": controller.tau,
                })
            logger.info("Privacy sweep point finished", {
                "epsilon": epsilon, "delta": delta, "sigma2_lo": bounds.sigma2_lo, "b_lo": bounds.b_lo,
                "eta": eta.eta, "tau": controller.tau, "rows": len(dists),
            })

    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=SWEEP_COLUMNS)
    return frame.sort_values(["mechanism", "epsilon", "delta"], kind="mergesort").reset_index(drop=True)

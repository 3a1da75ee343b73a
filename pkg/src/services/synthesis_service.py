"""
Controller synthesis: outer search over tau, the distributionally robust
controller at the minimizing tau, and the certainty-equivalent LQG baseline.
"""
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..models.control_models import Controller, RiccatiSolution, TauSearchReport
from ..models.interfaces import ControllerKind
from ..models.privacy_models import KlRadius
from ..models.problem_models import CostWeights, PlantModel
from ..utils.linalg import symmetrize
from ..utils.logging_config import logger
from .riccati_service import objective, solve_riccati

TAU_START = 1e-3
TAU_CAP = 1e12
BOUNDARY_REL_WIDTH = 1e-3
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoFeasibleTau(RuntimeError):
    """Raised when no tau in the searched range admits a risk-sensitive controller."""
    pass


class IndexOutOfRange(IndexError):
    """Raised when a control step index lies outside 0..N-1."""
    pass


def _is_feasible(plant: PlantModel, weights: CostWeights, sigma2_lo: float, tau: float) -> bool:
    return solve_riccati(plant, weights, sigma2_lo, tau).feasible


def find_feasible_tau(plant: PlantModel, weights: CostWeights, sigma2_lo: float) -> float:
    """
    Smallest feasible tau to relative precision 1e-3.

    Doubles tau from 1e-3 until feasible, then bisects the last doubling
    interval and returns its feasible end.
    """
    tau = TAU_START
    if _is_feasible(plant, weights, sigma2_lo, tau):
        return tau

    lower = tau
    while not _is_feasible(plant, weights, sigma2_lo, tau):
        lower = tau
        tau *= 2.0
        if tau > TAU_CAP:
            raise NoFeasibleTau(
                f"no feasible tau up to {TAU_CAP:g}; the problem data admit no risk-sensitive controller"
            )

    upper = tau
    while (upper - lower) > BOUNDARY_REL_WIDTH * upper:
        middle = 0.5 * (lower + upper)
        if _is_feasible(plant, weights, sigma2_lo, middle):
            upper = middle
        else:
            lower = middle

    logger.debug("Feasibility boundary located", {"tau": upper})
    return upper


class _CachedObjective:
    """Objective with infeasible points mapped to +inf and every call recorded."""

    def __init__(self, eta: KlRadius, plant: PlantModel, weights: CostWeights, sigma2_lo: float):
        self.eta = eta
        self.plant = plant
        self.weights = weights
        self.sigma2_lo = sigma2_lo
        self.values: Dict[float, Optional[float]] = {}
        self.evaluations: List[Tuple[float, Optional[float]]] = []

    def __call__(self, tau: float) -> float:
        if tau not in self.values:
            value = objective(self.eta, self.plant, self.weights, self.sigma2_lo, tau)
            self.values[tau] = value
            self.evaluations.append((tau, value))
        value = self.values[tau]
        return math.inf if value is None else value


def golden_section(func: Callable[[float], float], lower: float, upper: float,
                   iters: int = 60) -> Tuple[float, float]:
    """Minimize func on [lower, upper] by golden-section search; returns (x, f(x))."""
    a, b = lower, upper
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)

    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)

    return (c, fc) if fc <= fd else (d, fd)


def _basins(values: Sequence[float]) -> List[int]:
    """Indices of finite local minima; plateaus yield their first index."""
    basins = []
    for i, value in enumerate(values):
        if not math.isfinite(value):
            continue
        left = values[i - 1] if i > 0 else math.inf
        right = values[i + 1] if i + 1 < len(values) else math.inf
        if value < left and value <= right:
            basins.append(i)
    return basins


def optimize_tau(eta: KlRadius, plant: PlantModel, weights: CostWeights, sigma2_lo: float,
                 grid_size: int = 64, refine_iters: int = 60,
                 tau_grid: Optional[Iterable[float]] = None) -> TauSearchReport:
    """
    Minimize tau (eta + W_tau) over feasible tau.

    The default grid is log-spaced from the feasibility boundary to 100x
    the boundary. Every local minimum on the grid is refined by golden
    section inside its neighbouring grid points, so unimodality is not
    assumed.
    """
    if tau_grid is None:
        if grid_size < 16:
            raise ValueError(f"grid_size must be >= 16, got {grid_size}")
        boundary = find_feasible_tau(plant, weights, sigma2_lo)
        grid = list(np.geomspace(boundary, 100.0 * boundary, grid_size))
    else:
        grid = sorted(float(t) for t in tau_grid)
        if not grid or grid[0] <= 0:
            raise ValueError("tau grid must contain positive values")

    cached = _CachedObjective(eta, plant, weights, sigma2_lo)
    values = [cached(float(tau)) for tau in grid]
    feasible = [tau for tau, value in zip(grid, values) if math.isfinite(value)]
    if not feasible:
        raise NoFeasibleTau("objective is infeasible on every grid point")

    best_tau, best_value = min(zip(grid, values), key=lambda item: item[1])
    basins = _basins(values)
    for i in basins:
        lower = grid[max(i - 1, 0)]
        upper = grid[min(i + 1, len(grid) - 1)]
        if upper <= lower:
            continue
        tau, value = golden_section(cached, lower, upper, refine_iters)
        if value < best_value:
            best_tau, best_value = tau, value

    logger.info("Tau search finished", {
        "tau_star": best_tau,
        "objective_star": best_value,
        "basins": len(basins),
        "evaluations": len(cached.evaluations),
    })
    return TauSearchReport(
        tau_star=float(best_tau),
        objective_star=float(best_value),
        feasible_interval_estimate=(float(feasible[0]), float(grid[-1])),
        evaluations=list(cached.evaluations),
    )


def build_dr_controller(plant: PlantModel, weights: CostWeights, sigma2_lo: float,
                        tau: float) -> Controller:
    """Materialize the robust controller from the Riccati solution at a given tau."""
    solution: RiccatiSolution = solve_riccati(plant, weights, sigma2_lo, tau)
    if not solution.feasible:
        k, condition = solution.failure
        raise NoFeasibleTau(f"tau={tau:g} is infeasible: {condition.value} fails at k={k}")

    corrections = tuple(plant.A @ P_inv @ weights.Q / tau for P_inv in solution.forward.P_inv)
    return Controller(
        kind=ControllerKind.DISTRIBUTIONALLY_ROBUST,
        plant=plant,
        estimator_gains=solution.forward.K,
        feedback_gains=solution.backward.F,
        sigma2_nom=sigma2_lo,
        xhat0=plant.x_ini.copy(),
        tau=float(tau),
        correction_matrices=corrections,
    )


def synthesize_dr(eta: KlRadius, plant: PlantModel, weights: CostWeights, sigma2_lo: float,
                  tau: Optional[float] = None, grid_size: int = 64,
                  refine_iters: int = 60) -> Controller:
    """
    Distributionally robust controller at the minimizing tau.

    Passing ``tau`` skips the search and pins the controller to that value.
    """
    if tau is None:
        tau = optimize_tau(eta, plant, weights, sigma2_lo, grid_size, refine_iters).tau_star
    return build_dr_controller(plant, weights, sigma2_lo, tau)


def kalman_filter_gains(plant: PlantModel, sigma2_nom: float) -> Tuple[np.ndarray, ...]:
    """Finite-horizon measurement-update gains M_k with measurement covariance sigma2_nom I."""
    A, C = plant.A, plant.C
    identity = np.eye(plant.n)
    prior = plant.Sigma_ini
    gains = []
    for _ in range(plant.N):
        innovation = symmetrize(C @ prior @ C.T + sigma2_nom * np.eye(plant.p))
        gain = scipy.linalg.solve(innovation, C @ prior, assume_a="pos").T
        # Joseph form keeps the posterior symmetric positive semidefinite
        shaped = identity - gain @ C
        posterior = symmetrize(shaped @ prior @ shaped.T + sigma2_nom * gain @ gain.T)
        gains.append(gain)
        prior = symmetrize(A @ posterior @ A.T + plant.Sigma_w)
    return tuple(gains)


def lqr_gains(plant: PlantModel, weights: CostWeights) -> Tuple[np.ndarray, ...]:
    """Finite-horizon LQR gains F_k = (R + B'S B)^-1 B'S A from S_N = Q_N."""
    A, B = plant.A, plant.B
    S = weights.Q_N
    gains = []
    for _ in range(plant.N):
        gain = scipy.linalg.solve(weights.R + B.T @ S @ B, B.T @ S @ A, assume_a="pos")
        gains.append(gain)
        S = symmetrize(weights.Q + A.T @ S @ (A - B @ gain))
    return tuple(reversed(gains))


def synthesize_lqg(plant: PlantModel, weights: CostWeights, sigma2_nom: float) -> Controller:
    """Certainty-equivalent LQG baseline designed for v ~ N(0, sigma2_nom I)."""
    return Controller(
        kind=ControllerKind.LQG_BASELINE,
        plant=plant,
        estimator_gains=kalman_filter_gains(plant, sigma2_nom),
        feedback_gains=lqr_gains(plant, weights),
        sigma2_nom=sigma2_nom,
        xhat0=plant.x_ini.copy(),
    )


def control_step(ctrl: Controller, k: int, y_tilde: np.ndarray,
                 state: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Apply one step of the controller; returns (u(k), next estimator state)."""
    if not 0 <= k < ctrl.horizon:
        raise IndexOutOfRange(f"step index {k} outside 0..{ctrl.horizon - 1}")
    return ctrl.step(k, np.asarray(y_tilde, dtype=float), np.asarray(state, dtype=float))

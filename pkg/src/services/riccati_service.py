"""
Coupled risk-sensitive Riccati recursions and the closed-form optimal value.

For a fixed tau the forward pass produces the estimator quantities
(Sigma_k, P_k, K_k) and the backward pass the feedback quantities
(Pi_k, L_{k+1}^-1, F_k). Infeasibility is returned as data: the first
violated positive-definiteness condition and its step index.
"""
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from ..models.control_models import BackwardPass, ForwardPass, RiccatiSolution
from ..models.interfaces import FeasibilityCondition
from ..models.privacy_models import KlRadius
from ..models.problem_models import CostWeights, PlantModel
from ..utils.linalg import (
    inverse_from_cholesky,
    logdet_from_cholesky,
    max_congruence_eigenvalue,
    spd_cholesky,
    spd_inverse,
    symmetrize,
)
from ..utils.logging_config import logger


def _solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return scipy.linalg.solve(lhs, rhs, check_finite=False)


def _below_tau(weight: np.ndarray, covariance_factor: np.ndarray, tau: float) -> bool:
    """Inverse-free test of weight^-1 - covariance / tau > 0 for PSD weights."""
    return max_congruence_eigenvalue(weight, covariance_factor) < tau


def forward_riccati(plant: PlantModel, weights: CostWeights, sigma2_lo: float,
                    tau: float) -> ForwardPass:
    """Run Sigma_{k+1} = Sigma_w + A P_k^-1 A' from Sigma_0 = Sigma_ini."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    A, C = plant.A, plant.C
    information = C.T @ C / sigma2_lo
    risk = weights.Q / tau

    Sigma = [plant.Sigma_ini]
    P: List[np.ndarray] = []
    P_inv: List[np.ndarray] = []
    K: List[np.ndarray] = []

    def stop(k: int, condition: FeasibilityCondition) -> ForwardPass:
        return ForwardPass(tuple(Sigma), tuple(P), tuple(P_inv), tuple(K),
                           feasible=False, first_failure=(k, condition))

    for k in range(plant.N):
        sigma_factor = spd_cholesky(Sigma[k])
        if sigma_factor is None:
            return stop(k, FeasibilityCondition.SIGMA_K)

        P_k = symmetrize(inverse_from_cholesky(sigma_factor) + information - risk)
        p_factor = spd_cholesky(P_k)
        if p_factor is None:
            return stop(k, FeasibilityCondition.P_K)

        P_k_inv = inverse_from_cholesky(p_factor)
        P.append(P_k)
        P_inv.append(P_k_inv)
        K.append(A @ P_k_inv @ C.T / sigma2_lo)
        Sigma.append(symmetrize(plant.Sigma_w + A @ P_k_inv @ A.T))

    if spd_cholesky(Sigma[-1]) is None:
        return stop(plant.N, FeasibilityCondition.SIGMA_K)

    return ForwardPass(tuple(Sigma), tuple(P), tuple(P_inv), tuple(K), feasible=True)


def backward_riccati(plant: PlantModel, weights: CostWeights, tau: float,
                     forward: ForwardPass) -> BackwardPass:
    """
    Run Pi_k = Q + A' L_{k+1}^-1 A from Pi_N = Q_N.

    L_{k+1}^-1 is formed as (I + Pi_{k+1} G)^-1 Pi_{k+1} with
    G = B R^-1 B' - Sigma_w / tau, which stays defined for singular Pi.
    """
    if not forward.feasible:
        raise ValueError("backward pass requires a feasible forward pass")
    A, B = plant.A, plant.B
    n = plant.n
    identity = np.eye(n)
    R_inv = spd_inverse(weights.R)
    G = B @ R_inv @ B.T - plant.Sigma_w / tau
    noise_factor = spd_cholesky(plant.Sigma_w)

    Pi = [weights.Q_N]
    L_inv: List[np.ndarray] = []
    F: List[np.ndarray] = []

    def stop(k: int, condition: FeasibilityCondition) -> BackwardPass:
        return BackwardPass(tuple(reversed(Pi)), tuple(reversed(L_inv)), tuple(reversed(F)),
                            feasible=False, first_failure=(k, condition))

    for k in range(plant.N - 1, -1, -1):
        Pi_next = Pi[-1]
        if not _below_tau(Pi_next, noise_factor, tau):
            return stop(k, FeasibilityCondition.PI_NEXT_MINUS_SIGMA_W)

        L_next_inv = symmetrize(_solve(identity + Pi_next @ G, Pi_next))
        Pi_k = symmetrize(weights.Q + A.T @ L_next_inv @ A)

        Sigma_k = forward.Sigma[k]
        if not _below_tau(Pi_k, spd_cholesky(Sigma_k), tau):
            return stop(k, FeasibilityCondition.PI_K_MINUS_SIGMA_K)

        # A (I - Sigma_k Pi_k / tau)^-1 via a transposed solve
        shaped = _solve((identity - Sigma_k @ Pi_k / tau).T, A.T).T
        F.append(R_inv @ B.T @ L_next_inv @ shaped)
        L_inv.append(L_next_inv)
        Pi.append(Pi_k)

    return BackwardPass(tuple(reversed(Pi)), tuple(reversed(L_inv)), tuple(reversed(F)),
                        feasible=True)


def _weighted_inverse(Pi: np.ndarray, Sigma: np.ndarray, tau: float) -> np.ndarray:
    """(Pi^-1 - Sigma / tau)^-1 written as (I - Pi Sigma / tau)^-1 Pi."""
    return symmetrize(_solve(np.eye(Pi.shape[0]) - Pi @ Sigma / tau, Pi))


def _optimal_value(plant: PlantModel, weights: CostWeights, sigma2_lo: float, tau: float,
                   forward: ForwardPass,
                   backward: BackwardPass) -> Tuple[Optional[float], Optional[Tuple]]:
    """Closed-form W_tau; assumes both passes and the terminal condition hold."""
    C = plant.C
    p = plant.p
    information = C.T @ C / sigma2_lo
    x = plant.x_ini

    quadratic = float(x @ _weighted_inverse(backward.Pi[0], plant.Sigma_ini, tau) @ x) / (2.0 * tau)
    initial = -0.5 * logdet_from_cholesky(spd_cholesky(plant.Sigma_ini))

    propagation = 0.0
    coupling = 0.0
    for k in range(plant.N):
        gap_factor = spd_cholesky(symmetrize(forward.P[k] - information))
        if gap_factor is None:
            return None, (k, FeasibilityCondition.INFORMATION_GAP)
        propagation += logdet_from_cholesky(spd_cholesky(forward.Sigma[k + 1]))
        propagation += logdet_from_cholesky(gap_factor)

        gap_inv = inverse_from_cholesky(gap_factor)
        innovation = sigma2_lo * np.eye(p) + C @ gap_inv @ C.T
        K_k = forward.K[k]
        weighted = _weighted_inverse(backward.Pi[k + 1], forward.Sigma[k + 1], tau)
        sign, logdet = np.linalg.slogdet(np.eye(plant.n) - K_k @ innovation @ K_k.T @ weighted / tau)
        if sign <= 0:
            return None, (k, FeasibilityCondition.VALUE_LOGDET)
        coupling += logdet

    terminal_factor = spd_cholesky(symmetrize(
        inverse_from_cholesky(spd_cholesky(forward.Sigma[-1])) - weights.Q_N / tau
    ))
    if terminal_factor is None:
        return None, (plant.N, FeasibilityCondition.TERMINAL)
    terminal = -0.5 * logdet_from_cholesky(terminal_factor)

    return quadratic + initial - 0.5 * propagation - 0.5 * coupling + terminal, None


def solve_riccati(plant: PlantModel, weights: CostWeights, sigma2_lo: float,
                  tau: float) -> RiccatiSolution:
    """Both passes, every feasibility condition and W_tau at one tau."""
    forward = forward_riccati(plant, weights, sigma2_lo, tau)
    if not forward.feasible:
        return RiccatiSolution(tau, forward, None, failure=forward.first_failure)

    terminal_factor = spd_cholesky(forward.Sigma[-1])
    if not _below_tau(weights.Q_N, terminal_factor, tau):
        return RiccatiSolution(tau, forward, None,
                               failure=(plant.N, FeasibilityCondition.TERMINAL))

    backward = backward_riccati(plant, weights, tau, forward)
    if not backward.feasible:
        return RiccatiSolution(tau, forward, backward, failure=backward.first_failure)

    value, failure = _optimal_value(plant, weights, sigma2_lo, tau, forward, backward)
    return RiccatiSolution(tau, forward, backward, w_tau=value, failure=failure)


def w_tau(plant: PlantModel, weights: CostWeights, sigma2_lo: float,
          tau: float) -> Optional[float]:
    """Optimal risk-sensitive value log E[exp(J / tau)], or None when tau is infeasible."""
    return solve_riccati(plant, weights, sigma2_lo, tau).w_tau


def objective(eta: KlRadius, plant: PlantModel, weights: CostWeights, sigma2_lo: float,
              tau: float) -> Optional[float]:
    """tau (eta + W_tau), or None when tau is infeasible."""
    solution = solve_riccati(plant, weights, sigma2_lo, tau)
    if not solution.feasible:
        k, condition = solution.failure
        logger.log_infeasible(tau, k, condition.value)
        return None
    value = tau * (eta.eta + solution.w_tau)
    logger.log_tau_evaluation(tau, value)
    return value


def tau_curve(eta: KlRadius, plant: PlantModel, weights: CostWeights, sigma2_lo: float,
              taus: Iterable[float]) -> List[Tuple[float, float]]:
    """(tau, objective) pairs over the given grid; infeasible points are skipped."""
    curve = []
    for tau in taus:
        value = objective(eta, plant, weights, sigma2_lo, float(tau))
        if value is not None:
            curve.append((float(tau), value))
    return curve

"""Bayesian optimization over binary structural choices.

The four structural switches are encoded as a 4-bit vector and modeled by a
second-order polynomial (intercept, linear, and pairwise-interaction terms)
with a conjugate Gaussian coefficient posterior.  Proposals are made by
Thompson sampling: draw one coefficient vector from the posterior and
maximize the induced quadratic pseudo-boolean objective with simulated
annealing.  The first few proposals come from a seeded permutation of all 16
vectors instead, so the model starts from a spread of observations.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .params import Algorithm, Policy, StructuralParams

logger = logging.getLogger(__name__)

N_BITS = 4
LAMBDA_REG = 1.0
NOISE_FLOOR = 1e-4
N_INIT = 4

SA_T0 = 1.0
SA_RATE = 0.95
SA_SWEEPS = 100


def encode(p: StructuralParams) -> np.ndarray:
    """Bit layout: algorithm, eligibility_traces, policy, epsilon_decay."""
    return np.array(
        [int(p.algorithm), int(p.eligibility_traces), int(p.policy), int(p.epsilon_decay)],
        dtype=np.int64,
    )


def decode(bits) -> StructuralParams:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (N_BITS,):
        raise ValueError(f"expected {N_BITS} bits, got shape {bits.shape}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    return StructuralParams(
        algorithm=Algorithm(int(bits[0])),
        eligibility_traces=bool(bits[1]),
        policy=Policy(int(bits[2])),
        epsilon_decay=bool(bits[3]),
    )


def n_features(d: int) -> int:
    return 1 + d + d * (d - 1) // 2


def features(x: np.ndarray) -> np.ndarray:
    """Second-order feature map [1, x_i, x_i x_j (i < j)], order-stable."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    out = np.empty(n_features(d), dtype=np.float64)
    out[0] = 1.0
    out[1 : 1 + d] = x
    k = 1 + d
    for i in range(d):
        for j in range(i + 1, d):
            out[k] = x[i] * x[j]
            k += 1
    return out


@dataclass
class BocsModel:
    """Gaussian coefficient posterior of the second-order binary surrogate."""

    mu: np.ndarray
    precision_chol: np.ndarray  # lower Cholesky factor of the posterior precision
    y_mean: float
    y_std: float
    noise_var: float

    @property
    def n_coefficients(self) -> int:
        return self.mu.shape[0]


def fit_bocs(
    observations: list[tuple[np.ndarray, float]],
    lam_reg: float = LAMBDA_REG,
    noise_var: float | None = None,
) -> BocsModel:
    """Conjugate Bayesian ridge over the second-order features.

    Targets are standardized; when ``noise_var`` is None it is estimated from
    the ridge-fit residuals with a floor of 1e-4.  The prior keeps the
    posterior well-defined at any observation count.
    """
    if len(observations) < 1:
        raise ValueError("need at least one observation")
    phi = np.array([features(np.asarray(bits, dtype=np.float64)) for bits, _ in observations])
    y = np.array([v for _, v in observations], dtype=np.float64)
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std == 0.0:
        y_std = 1.0
    y_s = (y - y_mean) / y_std
    p = phi.shape[1]
    gram = phi.T @ phi
    if noise_var is None:
        w_ridge = linalg.solve(gram + lam_reg * np.eye(p), phi.T @ y_s, assume_a="pos")
        resid = y_s - phi @ w_ridge
        noise_var = max(float(np.mean(resid * resid)), NOISE_FLOOR)
    precision = lam_reg * np.eye(p) + gram / noise_var
    chol = linalg.cholesky(precision, lower=True)
    mu = linalg.cho_solve((chol, True), phi.T @ y_s / noise_var)
    return BocsModel(mu=mu, precision_chol=chol, y_mean=y_mean, y_std=y_std, noise_var=noise_var)


def predictive_mean(model: BocsModel, bits: np.ndarray) -> float:
    """Posterior-mean prediction on the original target scale."""
    return model.y_mean + model.y_std * float(features(bits) @ model.mu)


def sample_acquisition(model: BocsModel, rng: np.random.Generator) -> np.ndarray:
    """One Thompson draw of the coefficient vector (standardized scale).

    With posterior precision A = L L^T, a draw is mu + L^-T z.  If the
    triangular solve fails the posterior mean is used instead.
    """
    z = rng.standard_normal(model.n_coefficients)
    try:
        return model.mu + linalg.solve_triangular(model.precision_chol.T, z, lower=False)
    except (linalg.LinAlgError, ValueError):
        logger.warning("coefficient covariance solve failed; using posterior mean")
        return model.mu.copy()


def sa_maximize(
    coeffs: np.ndarray,
    d: int,
    rng: np.random.Generator,
    t0: float = SA_T0,
    rate: float = SA_RATE,
    n_sweeps: int = SA_SWEEPS,
) -> np.ndarray:
    """Maximize x -> features(x) . coeffs over {0,1}^d by simulated annealing.

    Single-bit-flip neighborhood, geometric schedule T_k = t0 * rate^k held
    constant within each sweep of d proposed flips, Metropolis acceptance.
    Returns the best vector ever visited (strict improvement, so ties keep
    the earliest, including the start vector).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    coeffs = np.asarray(coeffs, dtype=np.float64)
    x = rng.integers(0, 2, size=d).astype(np.int64)
    value = float(features(x) @ coeffs)
    best = x.copy()
    best_value = value
    for k in range(n_sweeps):
        temp = t0 * rate**k
        for _ in range(d):
            i = int(rng.integers(d))
            x[i] ^= 1
            trial_value = float(features(x) @ coeffs)
            delta = trial_value - value
            if delta > 0.0 or rng.random() < math.exp(delta / temp):
                value = trial_value
                if value > best_value:
                    best_value = value
                    best = x.copy()
            else:
                x[i] ^= 1
    return best


def propose_structural(
    history: list[tuple[np.ndarray, float]],
    rng: np.random.Generator,
    n_init: int = N_INIT,
) -> StructuralParams:
    """Next structural configuration to evaluate.

    While the history is shorter than ``n_init``, returns the first untried
    vector from a seeded permutation of all 16; afterwards fits the surrogate
    and maximizes a Thompson sample.  Already-tried vectors may be proposed
    again by the model (the objective is stochastic, so re-evaluation is
    informative).
    """
    if len(history) < n_init:
        tried = {tuple(int(b) for b in bits) for bits, _ in history}
        for idx in rng.permutation(1 << N_BITS):
            bits = np.array([(idx >> b) & 1 for b in range(N_BITS)], dtype=np.int64)
            if tuple(int(b) for b in bits) not in tried:
                return decode(bits)
    model = fit_bocs(history)
    coeffs = sample_acquisition(model, rng)
    return decode(sa_maximize(coeffs, N_BITS, rng))

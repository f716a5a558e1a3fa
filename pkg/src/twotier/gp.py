"""Gaussian-process regression on a bounded box and expected-improvement search.

The model operates in normalized coordinates: inputs are mapped to the unit
box per dimension and targets are standardized to zero mean / unit variance.
Kernel hyper-parameters come from a coarse grid search over the marginal
likelihood (shared length-scale, three noise levels, unit signal variance),
which keeps fitting deterministic and dependency-free.  Predictive variance
includes the noise term, so far from the data it approaches
signal_var + noise_var.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import ndtr
from scipy.stats import qmc

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Grid-search ranges for the kernel hyper-parameters (normalized space,
# standardized targets).
LENGTHSCALE_GRID = tuple(np.geomspace(0.05, 2.0, 8))
NOISE_GRID = (1e-6, 1e-4, 1e-2)
SIGNAL_VAR = 1.0

JITTER_START = 1e-10
JITTER_MAX = 1e-4

N_CANDIDATES_LOG2 = 11  # 2048 quasi-random acquisition candidates
N_REFINE = 16  # pattern-search starts taken from the best candidates


class DegenerateModelError(Exception):
    """Covariance factorization failed even at maximum jitter."""


@dataclass(frozen=True)
class Dimension:
    """One box dimension; integer dimensions are rounded half-to-even."""

    name: str
    lower: float
    upper: float
    integer: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"dimension {self.name}: lower >= upper ({self.lower} >= {self.upper})")


@dataclass(frozen=True)
class KernelConfig:
    """Squared-exponential kernel settings (normalized / standardized units)."""

    lengthscales: tuple[float, ...]
    signal_var: float = SIGNAL_VAR
    noise_var: float = 1e-6


class BoxSpace:
    """Axis-aligned box with normalization, snapping, and uniform sampling."""

    def __init__(self, dims: tuple[Dimension, ...] | list[Dimension]):
        if len(dims) == 0:
            raise ValueError("BoxSpace needs at least one dimension")
        self.dims = tuple(dims)
        self.lowers = np.array([d.lower for d in self.dims], dtype=np.float64)
        self.uppers = np.array([d.upper for d in self.dims], dtype=np.float64)
        self.integer = np.array([d.integer for d in self.dims], dtype=bool)
        self.names = tuple(d.name for d in self.dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.lowers) / (self.uppers - self.lowers)

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return self.lowers + np.asarray(z, dtype=np.float64) * (self.uppers - self.lowers)

    def snap(self, x: np.ndarray) -> np.ndarray:
        """Clip into the box and round integer dimensions (half-to-even)."""
        x = np.clip(np.asarray(x, dtype=np.float64), self.lowers, self.uppers)
        if self.integer.any():
            x = np.where(self.integer, np.rint(x), x)
        return x

    def snap_norm(self, z: np.ndarray) -> np.ndarray:
        return self.normalize(self.snap(self.denormalize(np.clip(z, 0.0, 1.0))))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One uniform point; integer dimensions drawn uniformly over their values."""
        out = np.empty(self.ndim, dtype=np.float64)
        for k, d in enumerate(self.dims):
            if d.integer:
                out[k] = float(rng.integers(int(d.lower), int(d.upper) + 1))
            else:
                out[k] = rng.uniform(d.lower, d.upper)
        return out

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lowers) and np.all(x <= self.uppers))


@dataclass
class GpModel:
    """Fitted GP: cached Cholesky factor of K + noise_var I (plus any jitter)."""

    space: BoxSpace
    x_norm: np.ndarray
    y_mean: float
    y_std: float
    config: KernelConfig
    jitter: float
    chol: np.ndarray
    alpha: np.ndarray
    log_marginal_likelihood: float
    y_raw: np.ndarray = field(repr=False, default=None)

    @property
    def n_observations(self) -> int:
        return self.x_norm.shape[0]


def se_kernel(a: np.ndarray, b: np.ndarray, config: KernelConfig) -> np.ndarray:
    """Squared-exponential kernel matrix between normalized point sets."""
    ls = np.asarray(config.lengthscales, dtype=np.float64)
    diff = (a[:, None, :] - b[None, :, :]) / ls
    return config.signal_var * np.exp(-0.5 * np.sum(diff * diff, axis=2))


def _cholesky_escalate(k: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding diagonal jitter only if needed."""
    try:
        return linalg.cholesky(k, lower=True), 0.0
    except linalg.LinAlgError:
        pass
    jitter = JITTER_START
    eye = np.eye(k.shape[0])
    while jitter <= JITTER_MAX:
        try:
            return linalg.cholesky(k + jitter * eye, lower=True), jitter
        except linalg.LinAlgError:
            jitter *= 10.0
    raise DegenerateModelError(f"covariance not positive definite at jitter {JITTER_MAX}")


def _build_model(
    space: BoxSpace,
    x_norm: np.ndarray,
    y_std_values: np.ndarray,
    y_mean: float,
    y_std: float,
    y_raw: np.ndarray,
    config: KernelConfig,
) -> GpModel:
    n = x_norm.shape[0]
    k = se_kernel(x_norm, x_norm, config) + config.noise_var * np.eye(n)
    chol, jitter = _cholesky_escalate(k)
    alpha = linalg.cho_solve((chol, True), y_std_values)
    lml = (
        -0.5 * float(y_std_values @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * n * math.log(2.0 * math.pi)
    )
    return GpModel(
        space=space,
        x_norm=x_norm,
        y_mean=y_mean,
        y_std=y_std,
        config=config,
        jitter=jitter,
        chol=chol,
        alpha=alpha,
        log_marginal_likelihood=lml,
        y_raw=y_raw,
    )


def fit_gp(
    space: BoxSpace,
    points: np.ndarray,
    values: np.ndarray,
    config: KernelConfig | None = None,
) -> GpModel:
    """Fit a GP to observations given in original (unnormalized) coordinates.

    With ``config=None`` the kernel hyper-parameters maximize the log
    marginal likelihood over a fixed grid (ties keep the earliest grid
    point).  Duplicated inputs are fine; the noise term absorbs them.
    Raises :class:`DegenerateModelError` if no grid point factorizes.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    values = np.asarray(values, dtype=np.float64).ravel()
    if points.shape[0] < 1:
        raise ValueError("need at least one observation")
    if points.shape[0] != values.shape[0]:
        raise ValueError("points and values length mismatch")
    if points.shape[1] != space.ndim:
        raise ValueError(f"points have {points.shape[1]} dims, space has {space.ndim}")
    x_norm = space.normalize(points)
    y_mean = float(np.mean(values))
    y_std = float(np.std(values))
    if y_std == 0.0:
        y_std = 1.0
    y_s = (values - y_mean) / y_std
    if config is not None:
        return _build_model(space, x_norm, y_s, y_mean, y_std, values, config)
    best = None
    for ls in LENGTHSCALE_GRID:
        for nv in NOISE_GRID:
            cfg = KernelConfig(lengthscales=(float(ls),) * space.ndim, noise_var=nv)
            try:
                model = _build_model(space, x_norm, y_s, y_mean, y_std, values, cfg)
            except DegenerateModelError:
                continue
            if best is None or model.log_marginal_likelihood > best.log_marginal_likelihood:
                best = model
    if best is None:
        raise DegenerateModelError("no kernel configuration factorized")
    return best


def posterior(model: GpModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and variance (original scale) at original-space points.

    The variance includes the fitted noise term, so it tends to
    signal_var + noise_var (times the standardization scale) away from the
    data, and is clamped at 0 against floating-point cancellation.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    zq = model.space.normalize(points)
    ks = se_kernel(model.x_norm, zq, model.config)
    mean_s = ks.T @ model.alpha
    v = linalg.solve_triangular(model.chol, ks, lower=True)
    var_s = model.config.signal_var + model.config.noise_var - np.sum(v * v, axis=0)
    var_s = np.maximum(var_s, 0.0)
    mean = model.y_mean + model.y_std * mean_s
    var = (model.y_std * model.y_std) * var_s
    return mean, var


def expected_improvement(mu: np.ndarray, sigma: np.ndarray, f_best: float) -> np.ndarray:
    """EI for maximization: (mu - f_best) Phi(z) + sigma phi(z), clamped at 0.

    At sigma = 0 this reduces to max(0, mu - f_best).
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    improve = mu - f_best
    out = np.maximum(improve, 0.0)
    pos = sigma > 0.0
    if np.any(pos):
        z = improve[pos] / sigma[pos]
        pdf = INV_SQRT_2PI * np.exp(-0.5 * z * z)
        out = out.copy()
        out[pos] = improve[pos] * ndtr(z) + sigma[pos] * pdf
    return np.maximum(out, 0.0)


def ei_at(model: GpModel, points: np.ndarray, f_best: float) -> np.ndarray:
    mean, var = posterior(model, points)
    return expected_improvement(mean, np.sqrt(var), f_best)


def quasi_random_points(space: BoxSpace, n: int, rng: np.random.Generator) -> np.ndarray:
    """n scrambled low-discrepancy points in the box, snapped to valid values."""
    engine = qmc.Halton(d=space.ndim, scramble=True, seed=rng)
    return space.snap(space.denormalize(engine.random(n)))


def _is_observed(model: GpModel, z: np.ndarray) -> bool:
    if model.x_norm.shape[0] == 0:
        return False
    return bool(np.any(np.all(np.abs(model.x_norm - z) <= 1e-9, axis=1)))


def _pattern_search(model: GpModel, f_best: float, z0: np.ndarray, ei0: float):
    """Coordinate-wise hill climbing on EI with halving steps, strict moves only.

    Each sweep scores all 2d axis probes in one batch and moves to the best
    if it strictly improves; otherwise the step halves.
    """
    space = model.space
    z = z0.copy()
    ei = ei0
    step = 0.25
    sweeps = 0
    while step >= 1.0 / 128.0 and sweeps < 100:
        sweeps += 1
        probes = np.repeat(z[None, :], 2 * space.ndim, axis=0)
        for k in range(space.ndim):
            probes[2 * k, k] += step
            probes[2 * k + 1, k] -= step
        probes = space.snap_norm(probes)
        fresh = ~np.all(probes == z, axis=1)
        if np.any(fresh):
            eis = ei_at(model, space.denormalize(probes[fresh]), f_best)
            best = int(np.argmax(eis))
            if eis[best] > ei:
                z = probes[fresh][best]
                ei = float(eis[best])
                continue
        step *= 0.5
    return z, ei


def propose_next(
    model: GpModel,
    f_best: float,
    rng: np.random.Generator,
    n_refine: int = N_REFINE,
) -> np.ndarray:
    """Approximate EI argmax over the box, in original coordinates.

    2048 scrambled Sobol candidates are scored, the best ``n_refine`` are
    refined by coordinate-wise pattern search, and the overall winner is
    returned (ties keep the earliest candidate).  If the winner coincides
    with an observed point it is nudged by one grid step (1/64 of the range
    on continuous dimensions, one unit on integer ones).
    """
    space = model.space
    engine = qmc.Sobol(d=space.ndim, scramble=True, seed=rng)
    z = space.snap_norm(engine.random_base2(N_CANDIDATES_LOG2))
    ei = ei_at(model, space.denormalize(z), f_best)
    order = np.argsort(-ei, kind="stable")[:n_refine]
    best_z = z[order[0]]
    best_ei = float(ei[order[0]])
    for idx in order:
        z_ref, ei_ref = _pattern_search(model, f_best, z[idx], float(ei[idx]))
        if ei_ref > best_ei:
            best_z, best_ei = z_ref, ei_ref
    if _is_observed(model, best_z):
        best_z = _perturb_off_observed(model, best_z, rng)
    return space.denormalize(best_z)


def _perturb_off_observed(model: GpModel, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    space = model.space
    steps = np.where(space.integer, 1.0 / (space.uppers - space.lowers), 1.0 / 64.0)
    for k in rng.permutation(space.ndim):
        for sign in (1.0, -1.0):
            trial = z.copy()
            trial[k] += sign * steps[k]
            trial = space.snap_norm(trial)
            if not np.array_equal(trial, z) and not _is_observed(model, trial):
                return trial
    for _ in range(64):
        trial = space.normalize(space.sample(rng))
        if not _is_observed(model, trial):
            return trial
    return z

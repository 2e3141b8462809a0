"""Monte Carlo studies: stationary MAE tables, non-stationary tracking with gross
errors, and steady-state variance factors of the EW estimator.

Every replication draws from its own generator seeded by ``(seed, rep)``, so
results are reproducible and independent of how replications are scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .baselines import ew_pearson_path, exact_spearman
from .correlation import estimate_spearman, estimate_spearman_path
from .errors import ContractError
from .hermite_basis import build_basis_cache
from .stream_state import CoefficientState, Standardizer, ew_coefficient_path

STATIONARY_MODELS = ("normal", "lognormal")
NONSTATIONARY_MODELS = ("model1", "model2")
ESTIMATORS = ("hermite", "hermite-ew", "ew-pearson", "exact")


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(rep)]))


@dataclass(frozen=True)
class Contamination:
    fraction: float = 0.0
    variance: float = 1e4

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ContractError(f"contamination fraction must be in [0, 1), got {self.fraction}")
        if self.variance <= 0.0:
            raise ContractError("gross-error variance must be positive")


@dataclass(frozen=True)
class SimulationConfig:
    model: str = "normal"
    n: int = 10_000
    reps: int = 100
    rho: float = 0.0
    mu: tuple[float, float] = (0.0, 0.0)
    sigma1: float = 1.0
    sigma2: float = 1.0
    order: int = 20
    lam: float | None = None
    estimator: str = "hermite"
    target: str = "spearman"
    standardize: bool = False
    contamination: Contamination = field(default_factory=Contamination)
    seed: int = 0

    def __post_init__(self):
        if self.model not in STATIONARY_MODELS + NONSTATIONARY_MODELS:
            raise ContractError(f"unknown model {self.model!r}")
        if self.estimator not in ESTIMATORS:
            raise ContractError(f"unknown estimator {self.estimator!r}")
        if self.target not in ("spearman", "pearson"):
            raise ContractError(f"unknown target {self.target!r}")
        if self.n < 2 or self.reps < 1:
            raise ContractError("need n >= 2 and reps >= 1")
        if not -1.0 <= self.rho <= 1.0:
            raise ContractError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.estimator in ("hermite-ew", "ew-pearson") and self.lam is None:
            raise ContractError(f"estimator {self.estimator!r} needs a lambda")
        if self.stationary:
            if self.estimator == "ew-pearson" or self.target == "pearson":
                raise ContractError("stationary studies compare Spearman estimates only")
        else:
            if self.estimator not in ("hermite-ew", "ew-pearson"):
                raise ContractError("non-stationary studies need a per-step estimator (hermite-ew, ew-pearson)")
            if self.estimator == "ew-pearson" and self.target != "pearson":
                raise ContractError("ew-pearson can only be scored against the Pearson target")

    @property
    def stationary(self) -> bool:
        return self.model in STATIONARY_MODELS

    def params(self) -> dict:
        d = asdict(self)
        c = d.pop("contamination")
        d["mu"] = "{} {}".format(*self.mu)
        d["contamination"] = c["fraction"]
        d["gross_variance"] = c["variance"]
        return d


@dataclass
class MaeReport:
    mae: float
    se: float
    curve: np.ndarray | None = None
    config: SimulationConfig | None = None

    def row(self) -> dict:
        out = dict(self.config.params()) if self.config is not None else {}
        out["mae"] = self.mae
        out["se"] = self.se
        return out


class NonstationarySample(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    contaminated: np.ndarray


def sample_bivariate_normal(n: int, mu=(0.0, 0.0), sigma1: float = 1.0, sigma2: float = 1.0,
                            rho=0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``n`` pairs with covariance ``[[s1^2, r s1 s2], [r s1 s2, s2^2]]``.

    ``rho`` may be a length-``n`` array for a time-varying correlation. The 2x2
    Cholesky factor is written out so that |rho| = 1 works.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise ContractError("standard deviations must be positive")
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 1.0):
        raise ContractError("|rho| must not exceed 1")
    if rng is None:
        rng = np.random.default_rng()
    e = rng.standard_normal((n, 2))
    x = mu[0] + sigma1 * e[:, 0]
    y = mu[1] + sigma2 * (rho * e[:, 0] + np.sqrt(1.0 - rho * rho) * e[:, 1])
    return np.column_stack([x, y])


def nonstationary_rho(model: str, n: int) -> np.ndarray:
    t = np.arange(n) / (n - 1)
    if model in ("model1", "1", 1):
        return -1.0 + 2.0 * t
    if model in ("model2", "2", 2):
        return np.sin(2.0 * np.pi * t)
    raise ContractError(f"unknown non-stationary model {model!r}")


def contaminate(pairs: np.ndarray, contamination: Contamination, rng: np.random.Generator) -> np.ndarray:
    """Replace floor(fraction * n) distinct rows with independent N(0, variance) pairs, in place."""
    n = pairs.shape[0]
    k = int(math.floor(contamination.fraction * n))
    idx = np.sort(rng.choice(n, size=k, replace=False)) if k else np.empty(0, dtype=int)
    if k:
        pairs[idx] = math.sqrt(contamination.variance) * rng.standard_normal((k, 2))
    return idx


def gen_nonstationary(model, n: int, contamination: Contamination | None = None,
                      rng: np.random.Generator | None = None) -> NonstationarySample:
    if n < 2:
        raise ContractError("need n >= 2")
    contamination = contamination or Contamination()
    rng = rng if rng is not None else np.random.default_rng()
    rho = nonstationary_rho(model, n)
    pairs = sample_bivariate_normal(n, rho=rho, rng=rng)
    idx = contaminate(pairs, contamination, rng)
    return NonstationarySample(pairs[:, 0], pairs[:, 1], rho, idx)


def _draw(config: SimulationConfig, rng: np.random.Generator):
    if config.stationary:
        pairs = sample_bivariate_normal(config.n, config.mu, config.sigma1, config.sigma2, config.rho, rng)
        contaminate(pairs, config.contamination, rng)
        if config.model == "lognormal":
            pairs = np.exp(pairs)
        return pairs[:, 0], pairs[:, 1], None
    sample = gen_nonstationary(config.model, config.n, config.contamination, rng)
    return sample.x, sample.y, sample.rho


def _replicate(config: SimulationConfig, rep: int):
    """Absolute error(s) of one replication: a scalar (stationary) or a per-step array."""
    x, y, rho = _draw(config, replication_rng(config.seed, rep))
    if config.estimator == "exact":
        return abs(exact_spearman(x, y) - exact_spearman(x, y))

    xs, ys = x, y
    if config.standardize:
        xs = Standardizer().transform(x)
        ys = Standardizer().transform(y)

    if config.stationary:
        cache = build_basis_cache(config.order)
        state = CoefficientState(config.order, config.lam if config.estimator == "hermite-ew" else None)
        state.update_batch(xs, ys)
        return abs(estimate_spearman(state, cache).raw - exact_spearman(x, y))

    if config.estimator == "ew-pearson":
        return np.abs(ew_pearson_path(xs, ys, config.lam) - rho)

    cache = build_basis_cache(config.order)
    raw = estimate_spearman_path(*ew_coefficient_path(xs, ys, config.order, config.lam), cache)
    if config.target == "spearman":
        return np.abs(raw - 6.0 / np.pi * np.arcsin(rho / 2.0))
    return np.abs(2.0 * np.sin(np.pi * np.clip(raw, -1.0, 1.0) / 6.0) - rho)


def _replicate_star(args):
    return _replicate(*args)


def run_mae_study(config: SimulationConfig, workers: int = 1) -> MaeReport:
    """Estimate the MAE of the configured estimator over ``config.reps`` replications.

    Stationary models score the final estimate against the exact sample Spearman;
    non-stationary models score every step against the model's true correlation
    and also return the per-step MAE curve.
    """
    jobs = [(config, rep) for rep in range(config.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(_replicate_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        errors = [_replicate(*job) for job in jobs]

    m = config.reps
    if config.stationary:
        per_rep = np.asarray(errors, dtype=float)
        curve = None
    else:
        stack = np.vstack(errors)
        curve = stack.mean(axis=0)
        per_rep = stack.mean(axis=1)
    mae = float(per_rep.mean())
    se = float(per_rep.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return MaeReport(mae, se, curve, config)


class GEstimate(NamedTuple):
    g: float
    se: float


def estimate_g(order: int, rho: float, lam: float, reps: int = 200, seed: int = 0,
               length: int | None = None, n_boot: int = 1000) -> GEstimate:
    """Monte Carlo steady-state variance factor g with var(R) ~ lam/(2-lam) * g.

    Each replication runs the EW estimator on an i.i.d. standard bivariate normal
    stream of ``length`` steps; the variance is pooled over the final half of
    every stream (about the grand mean) and the bootstrap resamples replications.
    """
    if not 0.0 < lam <= 0.02:
        raise ContractError(f"variance factors need a small lambda in (0, 0.02], got {lam}")
    warmup = math.ceil(5.0 / lam)
    if length is None:
        length = max(2 * warmup, 20_000)
    if length // 2 < warmup:
        raise ContractError(f"stream length {length} leaves less than {warmup} warm-up steps")
    if reps < 2:
        raise ContractError("need at least 2 replications")

    cache = build_basis_cache(order)
    window = length - length // 2
    means = np.empty(reps)
    within = np.empty(reps)
    for rep in range(reps):
        rng = replication_rng(seed, rep)
        pairs = sample_bivariate_normal(length, rho=rho, rng=rng)
        raw = estimate_spearman_path(*ew_coefficient_path(pairs[:, 0], pairs[:, 1], order, lam), cache)
        tail = raw[-window:]
        means[rep] = tail.mean()
        within[rep] = ((tail - means[rep]) ** 2).sum()

    def pooled(idx):
        mu = means[idx].mean(axis=-1, keepdims=True)
        ss = within[idx].sum(axis=-1) + window * ((means[idx] - mu) ** 2).sum(axis=-1)
        return ss / (idx.shape[-1] * window)

    scale = (2.0 - lam) / lam
    g = float(pooled(np.arange(reps)) * scale)
    boot_rng = replication_rng(seed, 2**31)
    boot = pooled(boot_rng.integers(0, reps, size=(n_boot, reps))) * scale
    return GEstimate(g, float(boot.std(ddof=1)))

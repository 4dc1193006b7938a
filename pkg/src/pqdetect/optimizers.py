"""Population metaheuristics over a box: whale optimisation, PSO and a real-coded GA.

All three maximise a caller-supplied fitness. They share the same
contracts: positions are clamped to the box after every move, the best
position found so far is never lost, the convergence curve holds the
best-so-far fitness after each iteration, and every random draw comes from a
generator keyed on ``(seed, iteration, agent)`` so a run is a pure function
of its inputs.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from . import svm

Algorithm = Literal["WOA", "PSO", "GA"]

C_GAMMA_BOUNDS = (0.01, 200000.0)


@dataclass(frozen=True)
class SearchSpace:
    """Box ``[lower, upper]``; log10-scaled dimensions are searched in log10 units."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    scale: tuple[str, ...] | None = None

    def __post_init__(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be equal-length vectors")
        if not np.all(lo < hi):
            raise ValueError("lower must be strictly below upper")
        scale = self.scale or ("linear",) * lo.size
        object.__setattr__(self, "scale", tuple(scale))
        if len(self.scale) != lo.size or not set(self.scale) <= {"linear", "log10"}:
            raise ValueError(f"bad scale {self.scale}")
        for s, l in zip(self.scale, lo):
            if s == "log10" and l <= 0:
                raise ValueError("log10 dimensions need a positive lower bound")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Bounds in search coordinates."""
        lo = np.array([math.log10(v) if s == "log10" else v for v, s in zip(self.lower, self.scale)])
        hi = np.array([math.log10(v) if s == "log10" else v for v, s in zip(self.upper, self.scale)])
        return lo, hi

    def decode(self, position) -> np.ndarray:
        p = np.asarray(position, dtype=float)
        return np.array([10.0 ** v if s == "log10" else v for v, s in zip(p, self.scale)])

    def clamp(self, position) -> np.ndarray:
        lo, hi = self.bounds()
        return np.clip(position, lo, hi)


def svm_space(log: bool = True) -> SearchSpace:
    """(C, gamma) box; searched in log10 units unless ``log=False``."""
    lo, hi = C_GAMMA_BOUNDS
    s = "log10" if log else "linear"
    return SearchSpace((lo, lo), (hi, hi), (s, s))


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "WOA"
    n_agents: int = 10
    max_iters: int = 100
    seed: int = 0
    woa_b: float = 1.0
    pso_w: float = 0.729
    pso_c1: float = 1.49445
    pso_c2: float = 1.49445
    pso_vmax_frac: float = 0.2
    ga_crossover: float = 0.9
    ga_mutation: float = 0.1
    ga_sigma_frac: float = 0.05
    ga_tournament: int = 2
    ga_elite: int = 1

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError("n_agents must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.algorithm.upper() not in ("WOA", "PSO", "GA"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class OptimizerRun:
    algorithm: str
    best_position: np.ndarray
    best_fitness: float
    convergence: np.ndarray
    evaluations: int
    best_decoded: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def metadata(self, config: OptimizerConfig, wall_time: float | None = None) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": config.seed,
            "config": asdict(config),
            "best_position": self.best_position.tolist(),
            "best_decoded": None if self.best_decoded is None else self.best_decoded.tolist(),
            "best_fitness": self.best_fitness,
            "evaluations": self.evaluations,
            "wall_time": wall_time,
        }


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


class _Evaluator:
    """Fitness wrapper: non-finite values become -inf and are counted."""

    def __init__(self, fitness: Callable[[np.ndarray], float]):
        self.fitness = fitness
        self.calls = 0
        self.nonfinite = 0

    def __call__(self, x: np.ndarray) -> float:
        self.calls += 1
        v = float(self.fitness(np.array(x, dtype=float)))
        if not math.isfinite(v):
            self.nonfinite += 1
            return -math.inf
        return v


def _init_population(space: SearchSpace, config: OptimizerConfig) -> np.ndarray:
    lo, hi = space.bounds()
    return _rng(config.seed, 0, 0).uniform(lo, hi, size=(config.n_agents, space.dim))


def _finish(name, space, ev, best_x, best_f, curve, **diag) -> OptimizerRun:
    diag["nonfinite_fitness"] = ev.nonfinite
    return OptimizerRun(name, best_x.copy(), float(best_f), np.asarray(curve, dtype=float),
                        ev.calls, space.decode(best_x), diag)


# -- whale optimisation ------------------------------------------------------

def woa_encircle(x, leader, A, C):
    """Shrinking encircling: X* - A |C X* - X|."""
    return leader - A * np.abs(C * leader - x)


def woa_explore(x, x_rand, A, C):
    """Search around a randomly chosen whale: X_rand - A |C X_rand - X|."""
    return x_rand - A * np.abs(C * x_rand - x)


def woa_spiral(x, leader, l, b=1.0):
    """Logarithmic spiral towards the leader."""
    return np.abs(leader - x) * math.exp(b * l) * math.cos(2 * math.pi * l) + leader


def woa_coefficient(t: int, max_iters: int) -> float:
    """Linearly decreasing control parameter, 2 at t = 0 and 0 at t = max_iters."""
    return 2.0 * (1.0 - t / max_iters)


def woa_optimize(fitness, space: SearchSpace, config: OptimizerConfig = OptimizerConfig()) -> OptimizerRun:
    ev = _Evaluator(fitness)
    pop = _init_population(space, config)
    fit = np.array([ev(x) for x in pop])
    k = int(np.argmax(fit))
    best_x, best_f = pop[k].copy(), fit[k]
    curve, a_log, branches = [], [], {"encircle": 0, "explore": 0, "spiral": 0}

    for t in range(config.max_iters):
        a = woa_coefficient(t, config.max_iters)
        a_log.append(a)
        prev = pop.copy()
        for i in range(config.n_agents):
            rng = _rng(config.seed, t + 1, i)
            A = 2.0 * a * rng.random(space.dim) - a
            C = 2.0 * rng.random(space.dim)
            p = rng.random()
            l = rng.uniform(-1.0, 1.0)
            j = int(rng.integers(config.n_agents))
            if p < 0.5:
                if np.all(np.abs(A) < 1):
                    pop[i] = woa_encircle(prev[i], best_x, A, C)
                    branches["encircle"] += 1
                else:
                    pop[i] = woa_explore(prev[i], prev[j], A, C)
                    branches["explore"] += 1
            else:
                pop[i] = woa_spiral(prev[i], best_x, l, config.woa_b)
                branches["spiral"] += 1
            pop[i] = space.clamp(pop[i])
        fit = np.array([ev(x) for x in pop])
        k = int(np.argmax(fit))
        if fit[k] > best_f:
            best_x, best_f = pop[k].copy(), fit[k]
        curve.append(best_f)
    return _finish("WOA", space, ev, best_x, best_f, curve, a_schedule=a_log, branches=branches)


# -- particle swarm ----------------------------------------------------------

def pso_step(x, v, pbest, gbest, r1, r2, w, c1, c2, vmax):
    """Global-best velocity/position update; velocities clipped to +-vmax."""
    v = w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
    v = np.clip(v, -vmax, vmax)
    return x + v, v


def pso_optimize(fitness, space: SearchSpace, config: OptimizerConfig = OptimizerConfig()) -> OptimizerRun:
    ev = _Evaluator(fitness)
    lo, hi = space.bounds()
    vmax = config.pso_vmax_frac * (hi - lo)
    pop = _init_population(space, config)
    vel = _rng(config.seed, 0, 1).uniform(-vmax, vmax, size=pop.shape)
    fit = np.array([ev(x) for x in pop])
    pbest, pbest_f = pop.copy(), fit.copy()
    k = int(np.argmax(fit))
    best_x, best_f = pop[k].copy(), fit[k]
    curve = []

    for t in range(config.max_iters):
        for i in range(config.n_agents):
            rng = _rng(config.seed, t + 1, i)
            r1, r2 = rng.random(space.dim), rng.random(space.dim)
            x, vel[i] = pso_step(pop[i], vel[i], pbest[i], best_x, r1, r2,
                                 config.pso_w, config.pso_c1, config.pso_c2, vmax)
            pop[i] = space.clamp(x)
        fit = np.array([ev(x) for x in pop])
        better = fit > pbest_f
        pbest[better], pbest_f[better] = pop[better], fit[better]
        k = int(np.argmax(pbest_f))
        if pbest_f[k] > best_f:
            best_x, best_f = pbest[k].copy(), pbest_f[k]
        curve.append(best_f)
    return _finish("PSO", space, ev, best_x, best_f, curve)


# -- genetic algorithm ---------------------------------------------------------

def _tournament(rng, fit, size):
    picks = rng.integers(len(fit), size=size)
    return int(picks[np.argmax(fit[picks])])


def ga_offspring(rng, pop, fit, space: SearchSpace, config: OptimizerConfig) -> np.ndarray:
    """One child: tournament parents, arithmetic crossover, Gaussian mutation."""
    lo, hi = space.bounds()
    p1 = pop[_tournament(rng, fit, config.ga_tournament)]
    p2 = pop[_tournament(rng, fit, config.ga_tournament)]
    lam = rng.random()
    child = lam * p1 + (1.0 - lam) * p2 if rng.random() < config.ga_crossover else p1.copy()
    mutate = rng.random(space.dim) < config.ga_mutation
    noise = rng.normal(0.0, config.ga_sigma_frac * (hi - lo))
    child = np.where(mutate, child + noise, child)
    return space.clamp(child)


def ga_optimize(fitness, space: SearchSpace, config: OptimizerConfig = OptimizerConfig()) -> OptimizerRun:
    ev = _Evaluator(fitness)
    pop = _init_population(space, config)
    fit = np.array([ev(x) for x in pop])
    n_elite = min(config.ga_elite, config.n_agents)
    curve = []

    for t in range(config.max_iters):
        elite = np.argsort(-fit, kind="stable")[:n_elite]
        new_pop = np.empty_like(pop)
        new_fit = np.empty_like(fit)
        new_pop[:n_elite], new_fit[:n_elite] = pop[elite], fit[elite]
        for i in range(n_elite, config.n_agents):
            new_pop[i] = ga_offspring(_rng(config.seed, t + 1, i), pop, fit, space, config)
        new_fit[n_elite:] = [ev(x) for x in new_pop[n_elite:]]
        pop, fit = new_pop, new_fit
        curve.append(fit.max())
    k = int(np.argmax(fit))
    return _finish("GA", space, ev, pop[k], fit[k], curve)


OPTIMIZERS = {"WOA": woa_optimize, "PSO": pso_optimize, "GA": ga_optimize}


def optimize(fitness, space: SearchSpace, config: OptimizerConfig) -> OptimizerRun:
    return OPTIMIZERS[config.algorithm.upper()](fitness, space, config)


# -- SVM hyperparameter tuning -----------------------------------------------

class SVMFitness:
    """Validation accuracy of a multiclass SVM trained at decoded (C, gamma).

    Results are cached on the decoded values rounded to six significant
    digits. Failed fits score -inf. ``seen_rows`` records which training and
    validation row ids were read, for leakage audits.
    """

    def __init__(self, train: tuple, validation: tuple, space: SearchSpace, seed: int = 0):
        self.Xtr, self.ytr = np.asarray(train[0], float), np.asarray(train[1], int)
        self.Xva, self.yva = np.asarray(validation[0], float), np.asarray(validation[1], int)
        self.space = space
        self.seed = seed
        self._d_train = svm.sq_distances(self.Xtr, self.Xtr)
        self.cache: dict = {}
        self.trainings = 0
        self.failures = 0

    def hyperparams(self, position) -> svm.SVMHyperparams:
        c, g = self.space.decode(position)
        return svm.SVMHyperparams(float(c), float(g))

    def __call__(self, position) -> float:
        c, g = self.space.decode(position)
        key = (float(f"{c:.6g}"), float(f"{g:.6g}"))
        if key not in self.cache:
            self.cache[key] = self._score(*key)
        return self.cache[key]

    def _score(self, c, gamma) -> float:
        self.trainings += 1
        try:
            model = svm.train_multiclass(self.Xtr, self.ytr, svm.SVMHyperparams(c, gamma),
                                         self.seed, sqdist=self._d_train)
        except ValueError:
            self.failures += 1
            return -math.inf
        return float(np.mean(svm.predict(model, self.Xva) == self.yva))


def tune_svm(train: tuple, validation: tuple, algorithm: str = "WOA",
             config: OptimizerConfig | None = None, space: SearchSpace | None = None):
    """Search (C, gamma) maximising validation accuracy.

    Returns ``(SVMHyperparams, OptimizerRun)``.
    """
    space = space or svm_space()
    config = config or OptimizerConfig(algorithm=algorithm)
    if config.algorithm.upper() != algorithm.upper():
        config = OptimizerConfig(**{**asdict(config), "algorithm": algorithm})
    fitness = SVMFitness(train, validation, space, config.seed)
    t0 = time.perf_counter()
    run = optimize(fitness, space, config)
    run.diagnostics.update(wall_time=time.perf_counter() - t0, svm_trainings=fitness.trainings,
                           svm_failures=fitness.failures)
    return fitness.hyperparams(run.best_position), run


def grid_search(train: tuple, validation: tuple, c_values: Sequence[float],
                gamma_values: Sequence[float]):
    """Exhaustive grid; returns ``(best SVMHyperparams, best accuracy, accuracy table)``.

    Ties keep the first grid point in (C, gamma) row-major order.
    """
    fitness = SVMFitness(train, validation, svm_space())
    table = np.empty((len(c_values), len(gamma_values)))
    best, best_acc = None, -math.inf
    for a, c in enumerate(c_values):
        for b, g in enumerate(gamma_values):
            acc = fitness._score(float(c), float(g))
            table[a, b] = acc
            if acc > best_acc:
                best, best_acc = svm.SVMHyperparams(float(c), float(g)), acc
    return best, best_acc, table


def log_grid(n: int = 10, bounds=C_GAMMA_BOUNDS) -> np.ndarray:
    return np.logspace(math.log10(bounds[0]), math.log10(bounds[1]), n)

"""Brain Storm Optimization in objective space (BSO-OS).

Two entry points: ``bso_os_optimize`` runs the full offline loop for a
fixed iteration budget, and ``OnlineTuner`` generates one candidate per
simulation step against a caller-supplied evaluator, as the per-robot
gain tuner.

All randomness flows through an injected ``numpy.random.Generator``;
with a fixed seed, runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .pid import GainVector


@dataclass
class Solution:
    """A candidate position with its (possibly not yet assigned) fitness."""

    position: np.ndarray
    fitness: float | None = None
    evaluated_at: int = -1

    def copy(self) -> "Solution":
        return Solution(self.position.copy(), self.fitness, self.evaluated_at)


@dataclass(frozen=True)
class BsoConfig:
    population_size: int = 20
    perc_e: float = 20.0
    p_e: float = 0.2
    p_one: float = 0.8
    max_iter: int = 500
    slope_k: float = 20.0
    disruption_prob: float = 0.2
    lower: tuple[float, ...] = (0.0,) * 9
    upper: tuple[float, ...] = (10.0,) * 9
    # Greedy replacement either inside the generation loop or as a batch
    # after it; both orderings are available.
    update_inside_loop: bool = True

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError(f"population_size must be >= 2, got {self.population_size}")
        if not 0.0 < self.perc_e < 100.0:
            raise ValueError(f"perc_e must be in (0, 100), got {self.perc_e}")
        for name in ("p_e", "p_one", "disruption_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.slope_k <= 0.0:
            raise ValueError(f"slope_k must be > 0, got {self.slope_k}")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower/upper bound lengths differ")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every lower bound must be < its upper bound")

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def n_elites(self) -> int:
        return math.ceil(self.population_size * self.perc_e / 100.0)


@dataclass
class Population:
    """Fitness-sorted split into elitists and normals."""

    elites: list[Solution] = field(default_factory=list)
    normals: list[Solution] = field(default_factory=list)

    def members(self) -> list[Solution]:
        return self.elites + self.normals

    def best(self) -> Solution:
        return self.elites[0]


def cluster_objective_space(solutions: list[Solution], perc_e: float) -> Population:
    """Stable-sort by fitness; the top ceil(N*perc_e/100) become elitists."""
    if not solutions:
        raise ValueError("cannot cluster an empty population")
    if any(s.fitness is None for s in solutions):
        raise ValueError("all solutions must be evaluated before clustering")
    ordered = sorted(solutions, key=lambda s: s.fitness)
    n_e = math.ceil(len(solutions) * perc_e / 100.0)
    return Population(elites=ordered[:n_e], normals=ordered[n_e:])


def select_base(pop: Population, p_e: float, p_one: float,
                rng: np.random.Generator) -> np.ndarray:
    """Pick the base position for a new candidate.

    One cluster is chosen (elitists with probability p_e), then either a
    single member's position or a convex combination of two distinct
    members with one shared random weight. A single-member cluster falls
    back to the one-individual branch.
    """
    if not pop.elites or not pop.normals:
        raise ValueError("both clusters must be non-empty for selection")
    cluster = pop.elites if rng.random() < p_e else pop.normals
    if rng.random() < p_one or len(cluster) < 2:
        idx = int(rng.integers(len(cluster)))
        return cluster[idx].position.copy()
    i, j = rng.choice(len(cluster), size=2, replace=False)
    w = rng.random()
    return w * cluster[int(i)].position + (1.0 - w) * cluster[int(j)].position


def _logsig(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def step_size(t: int, cfg: BsoConfig, rng: np.random.Generator) -> float:
    """Annealed perturbation scale: logsig((T/2 - t)/k) * Uniform(0,1)."""
    return _logsig((cfg.max_iter / 2.0 - t) / cfg.slope_k) * rng.random()


def generate_new(base: np.ndarray, t: int, cfg: BsoConfig,
                 rng: np.random.Generator) -> Solution:
    """Perturb the base with per-dimension Gaussians scaled by one shared
    step size, clamp to bounds; fitness left unevaluated."""
    xi = step_size(t, cfg, rng)
    pos = base + rng.standard_normal(cfg.dims) * xi
    np.clip(pos, cfg.lower, cfg.upper, out=pos)
    return Solution(pos)


def disrupt(pop: Population, cfg: BsoConfig, rng: np.random.Generator) -> Population:
    """With probability disruption_prob, replace one dimension of one
    random individual with a uniform in-bounds value (fitness becomes
    stale and is re-evaluated on the next evaluation pass)."""
    if rng.random() >= cfg.disruption_prob:
        return pop
    members = pop.members()
    idx = int(rng.integers(len(members)))
    dim = int(rng.integers(cfg.dims))
    members[idx].position[dim] = rng.uniform(cfg.lower[dim], cfg.upper[dim])
    members[idx].fitness = None
    return pop


def _random_solution(cfg: BsoConfig, rng: np.random.Generator) -> Solution:
    return Solution(rng.uniform(cfg.lower, cfg.upper))


def _evaluate(sol: Solution, fitness, t: int) -> None:
    try:
        f = float(fitness(sol.position))
    except Exception:
        f = math.inf
    sol.fitness = f if math.isfinite(f) or f == math.inf else math.inf
    sol.evaluated_at = t


def bso_os_optimize(fitness, cfg: BsoConfig,
                    rng: np.random.Generator) -> Solution:
    """Run the BSO-OS loop for cfg.max_iter iterations.

    Per iteration: evaluate stale members, cluster, generate one new
    candidate per slot with greedy replacement, then disrupt. Returns a
    copy of the best-ever solution.
    """
    solutions = [_random_solution(cfg, rng) for _ in range(cfg.population_size)]
    best: Solution | None = None

    def note(sol: Solution) -> None:
        nonlocal best
        if best is None or sol.fitness < best.fitness:
            best = sol.copy()

    for t in range(cfg.max_iter):
        for s in solutions:
            if s.fitness is None:
                _evaluate(s, fitness, t)
            note(s)
        pop = cluster_objective_space(solutions, cfg.perc_e)
        if cfg.update_inside_loop:
            for i in range(cfg.population_size):
                base = select_base(pop, cfg.p_e, cfg.p_one, rng)
                cand = generate_new(base, t, cfg, rng)
                _evaluate(cand, fitness, t)
                note(cand)
                if cand.fitness < solutions[i].fitness:
                    solutions[i] = cand
        else:
            cands = []
            for i in range(cfg.population_size):
                base = select_base(pop, cfg.p_e, cfg.p_one, rng)
                cand = generate_new(base, t, cfg, rng)
                _evaluate(cand, fitness, t)
                note(cand)
                cands.append(cand)
            for i, cand in enumerate(cands):
                if cand.fitness < solutions[i].fitness:
                    solutions[i] = cand
        disrupt(cluster_objective_space(solutions, cfg.perc_e), cfg, rng)
    return best.copy()


class OnlineTuner:
    """Per-robot online gain tuner.

    Keeps an archive of ``population_size`` evaluated gain vectors. Each
    simulation step generates one candidate, evaluates it with the
    caller's (rollout) evaluator, keeps the best N of the N+1, and
    returns the best elitist as the active gains. Archived fitnesses go
    stale as the tracking situation drifts, so one archive slot is
    refreshed per step in round-robin order once its last evaluation is
    older than ``reeval_period`` steps.
    """

    def __init__(self, cfg: BsoConfig, rng: np.random.Generator,
                 reeval_period: int = 10):
        self.cfg = cfg
        self.rng = rng
        self.reeval_period = reeval_period
        self.solutions: list[Solution] = []
        self._rr = 0

    def initialize(self, evaluator, t: int = 0) -> None:
        """Fill the archive with random in-bounds solutions, fully evaluated."""
        self.solutions = [
            _random_solution(self.cfg, self.rng)
            for _ in range(self.cfg.population_size)
        ]
        for s in self.solutions:
            _evaluate(s, evaluator, t)

    def population(self) -> Population:
        return cluster_objective_space(self.solutions, self.cfg.perc_e)

    def best_gains(self) -> GainVector:
        return GainVector.from_sequence(self.population().best().position)

    def best_fitness(self) -> float:
        return self.population().best().fitness

    def step(self, evaluator, t: int) -> GainVector:
        """One tuner step: refresh, generate, evaluate, re-rank."""
        if not self.solutions:
            raise RuntimeError("tuner must be initialized before stepping")
        stale = self.solutions[self._rr % len(self.solutions)]
        self._rr += 1
        if t - stale.evaluated_at >= self.reeval_period:
            _evaluate(stale, evaluator, t)
        pop = cluster_objective_space(self.solutions, self.cfg.perc_e)
        base = select_base(pop, self.cfg.p_e, self.cfg.p_one, self.rng)
        cand = generate_new(base, t, self.cfg, self.rng)
        _evaluate(cand, evaluator, t)
        # Stable sort: an equally-bad newcomer is the one dropped.
        ordered = sorted(self.solutions + [cand], key=lambda s: s.fitness)
        self.solutions = ordered[:self.cfg.population_size]
        return self.best_gains()


def with_max_iter(cfg: BsoConfig, max_iter: int) -> BsoConfig:
    """The online step-size schedule anneals over the mission horizon."""
    return replace(cfg, max_iter=max_iter)

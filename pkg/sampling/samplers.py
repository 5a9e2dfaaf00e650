# -*- coding: utf-8 -*-
"""
Boucles d'échantillonnage de l'EDO probabiliste:
    - DEIS-tAB d'ordre r (intégrateur exponentiel + extrapolation polynomiale)
    - Euler
    - DDIM déterministe (η = 0)
et construction des grilles de temps.

Une seule évaluation du score par pas, en t_i; aucune en t_0 = 0.
"""
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .coeffs import (
    REPARAM_KINDS,
    REPARAM_SCORE_NORM,
    REPARAM_SIGMA,
    CoefficientTable,
    Reparameterisation,
    compute_coefficients,
    k_value,
)
from .exceptions import (
    DimensionMismatchError,
    EmptyBatchError,
    InvalidParameterError,
    NonFiniteStateError,
    NumericalError,
    TableGridMismatchError,
)
from .oracle import ScoreFunction
from .schedule import NoiseSchedule
from .score_profile import ScoreMagnitudeProfile

logger = logging.getLogger(__name__)

GRID_QUADRATIC = 'quadratic'
GRID_LINEAR = 'linear'
GRID_UNIFORM = 'uniform'
GRID_KINDS = (GRID_QUADRATIC, GRID_LINEAR, GRID_UNIFORM)
GRID_ALIASES = {
    'trailing-quadratic': GRID_QUADRATIC,
    'trailing-linear': GRID_LINEAR,
}

SAMPLER_DEIS = 'deis'
SAMPLER_EULER = 'euler'
SAMPLER_DDIM = 'ddim'
SAMPLER_KINDS = (SAMPLER_DEIS, SAMPLER_EULER, SAMPLER_DDIM)


# ============================================================================
# GRILLES DE TEMPS
# ============================================================================

@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Temps décroissants t_N = 1 > … > t_0 = 0 (times[k] = t_{N−k})."""

    times: np.ndarray
    kind: str

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        if times.ndim != 1 or times.size < 2:
            raise InvalidParameterError("Une grille contient au moins deux temps")
        if times[0] != 1.0 or times[-1] != 0.0:
            raise InvalidParameterError(f"La grille doit aller de 1 à 0 exactement ({times[0]} → {times[-1]})")
        if np.any(np.diff(times) >= 0):
            raise InvalidParameterError("La grille doit être strictement décroissante")
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    def matches(self, other: 'TimeGrid') -> bool:
        return self is other or np.array_equal(self.times, other.times)


def make_time_grid(kind: str, n_steps: int) -> TimeGrid:
    """
    Exemples:
        quadratic, 5 → (1, 0.64, 0.36, 0.16, 0.04, 0)
        linear, 4    → (1, 0.75, 0.5, 0.25, 0)
        uniform      → alias de linear

    Raises:
        InvalidParameterError: n_steps < 1 ou type inconnu
    """
    kind = GRID_ALIASES.get(kind, kind)
    if kind not in GRID_KINDS:
        raise InvalidParameterError(f"Type de grille inconnu: {kind}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise InvalidParameterError(f"n_steps doit être un entier ≥ 1 (reçu {n_steps})")

    n_steps = int(n_steps)
    indices = np.arange(n_steps, -1, -1, dtype=np.float64)
    if kind == GRID_QUADRATIC:
        times = (indices * indices) / float(n_steps * n_steps)
    else:
        times = indices / n_steps
    return TimeGrid(times=times, kind=kind)


# ============================================================================
# EXÉCUTIONS
# ============================================================================

@dataclass
class SamplerRun:
    x_init: np.ndarray
    samples: np.ndarray
    grid: TimeGrid
    nfe: int
    seed: Optional[int] = None
    sampler: str = ''
    trajectory: Optional[np.ndarray] = None


class CountingScore(ScoreFunction):
    """Compte les appels au score (NFE)."""

    def __init__(self, score: ScoreFunction):
        self.score = score
        self.dim = score.dim
        self.calls = 0

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        self.calls += 1
        return self.score.evaluate(x, t)


def _prepare_batch(x1: np.ndarray, score: ScoreFunction) -> np.ndarray:
    batch = np.array(x1, dtype=np.float64)
    if batch.ndim != 2:
        raise DimensionMismatchError(f"x1 doit être un lot (B, D), reçu {batch.shape}")
    if batch.shape[0] == 0:
        raise EmptyBatchError("Lot x1 vide")
    if batch.shape[1] != score.dim:
        raise DimensionMismatchError(f"x1 de dimension {batch.shape[1]}, score de dimension {score.dim}")
    return batch


def _check_finite(x: np.ndarray, step: int, sampler: str):
    if not np.all(np.isfinite(x)):
        raise NonFiniteStateError(step, sampler)


def _finish(x1, x, grid, counting, sampler, trajectory) -> SamplerRun:
    return SamplerRun(
        x_init=x1,
        samples=x,
        grid=grid,
        nfe=counting.calls,
        sampler=sampler,
        trajectory=np.stack(trajectory) if trajectory is not None else None,
    )


# ============================================================================
# DEIS-tAB
# ============================================================================

def deis_sample(x1: np.ndarray, grid: TimeGrid, r: int, score: ScoreFunction, rep: Reparameterisation,
                table: CoefficientTable, sched: NoiseSchedule, keep_trajectory: bool = False) -> SamplerRun:
    """
    x_{t_{i-1}} = Ψ(t_{i-1}, t_i)·x_{t_i} + Σ_j C_ij·(−K_{t_{i+j}} s(x_{t_{i+j}}, t_{i+j}))

    L'historique garde les r'+1 dernières évaluations déjà reparamétrées.

    Raises:
        TableGridMismatchError: table calculée pour une autre grille, un autre ordre ou un autre K
        NonFiniteStateError: NaN/inf après un pas (indice i du pas)
    """
    if not table.grid.matches(grid):
        raise TableGridMismatchError("La table de coefficients ne correspond pas à la grille")
    if table.order != r:
        raise TableGridMismatchError(f"Table d'ordre {table.order}, ordre demandé {r}")
    if table.reparam != rep:
        raise TableGridMismatchError(
            f"Table calculée pour K={table.reparam.kind}, échantillonnage avec K={rep.kind}"
        )

    x = _prepare_batch(x1, score)
    counting = CountingScore(score)
    times = grid.times
    history = deque(maxlen=r + 1)
    trajectory = [x.copy()] if keep_trajectory else None

    for k in range(grid.n_steps):
        t_cur, t_next = times[k], times[k + 1]
        history.appendleft(-k_value(rep, sched, t_cur) * counting.evaluate(x, t_cur))

        update = sched.psi(t_next, t_cur) * x
        for j, coefficient in enumerate(table.coefficients[k]):
            update = update + coefficient * history[j]
        x = update

        _check_finite(x, grid.n_steps - k, SAMPLER_DEIS)
        if trajectory is not None:
            trajectory.append(x.copy())

    return _finish(x1, x, grid, counting, f"deis{r}-{rep.kind}", trajectory)


# ============================================================================
# EULER ET DDIM
# ============================================================================

def euler_step(x: np.ndarray, t_cur: float, t_next: float, score: ScoreFunction, sched: NoiseSchedule) -> np.ndarray:
    """x + (t_next − t_cur)·[f x − ½ g² s(x, t_cur)]"""
    f, g2 = sched.drift_diffusion(t_cur)
    return x + (t_next - t_cur) * (f * x - 0.5 * g2 * score.evaluate(x, t_cur))


def ddim_step(x: np.ndarray, t_cur: float, t_next: float, score: ScoreFunction, sched: NoiseSchedule) -> np.ndarray:
    """a_next·(x − σ ε̂)/a_cur + σ_next·ε̂ avec ε̂ = −σ s(x, t_cur)"""
    a_cur, sigma_cur = sched.alpha_sigma(t_cur)
    a_next, sigma_next = sched.alpha_sigma(t_next)
    eps = -sigma_cur * score.evaluate(x, t_cur)
    return a_next * (x - sigma_cur * eps) / a_cur + sigma_next * eps


def _explicit_sample(step_fn: Callable, name: str, x1: np.ndarray, grid: TimeGrid, score: ScoreFunction,
                     sched: NoiseSchedule, keep_trajectory: bool) -> SamplerRun:
    x = _prepare_batch(x1, score)
    counting = CountingScore(score)
    times = grid.times
    trajectory = [x.copy()] if keep_trajectory else None

    for k in range(grid.n_steps):
        x = step_fn(x, times[k], times[k + 1], counting, sched)
        _check_finite(x, grid.n_steps - k, name)
        if trajectory is not None:
            trajectory.append(x.copy())

    return _finish(x1, x, grid, counting, name, trajectory)


def euler_sample(x1: np.ndarray, grid: TimeGrid, score: ScoreFunction, sched: NoiseSchedule,
                 keep_trajectory: bool = False) -> SamplerRun:
    return _explicit_sample(euler_step, SAMPLER_EULER, x1, grid, score, sched, keep_trajectory)


def ddim_sample(x1: np.ndarray, grid: TimeGrid, score: ScoreFunction, sched: NoiseSchedule,
                keep_trajectory: bool = False) -> SamplerRun:
    return _explicit_sample(ddim_step, SAMPLER_DDIM, x1, grid, score, sched, keep_trajectory)


# ============================================================================
# DÉCOUPAGE DU LOT
# ============================================================================

def map_batch_chunks(fn: Callable[[np.ndarray], object], x1: np.ndarray, workers: int = 1) -> List:
    """
    Applique fn à des tranches contiguës du lot, dans l'ordre des trajectoires.
    Chaque trajectoire est indépendante: le découpage ne change aucun résultat.
    """
    n_chunks = max(1, min(int(workers), len(x1)))
    chunks = np.array_split(np.asarray(x1), n_chunks)
    if n_chunks == 1:
        return [fn(chunks[0])]
    with ThreadPoolExecutor(max_workers=n_chunks) as pool:
        return list(pool.map(fn, chunks))


# ============================================================================
# DESCRIPTION D'UN ÉCHANTILLONNEUR
# ============================================================================

@dataclass(frozen=True)
class SamplerSpec:
    """
    Échantillonneur nommé. Grille par défaut: quadratique pour DEIS, linéaire pour Euler/DDIM.
    """

    name: str
    kind: str
    order: int = 3
    reparam: str = REPARAM_SIGMA
    grid: Optional[str] = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise InvalidParameterError(f"Échantillonneur inconnu: {self.kind}")
        if self.reparam not in REPARAM_KINDS:
            raise InvalidParameterError(f"Reparamétrisation inconnue: {self.reparam}")
        if int(self.order) != self.order or self.order < 0:
            raise InvalidParameterError(f"Ordre invalide: {self.order}")
        grid = self.grid
        if grid is None:
            grid = GRID_QUADRATIC if self.kind == SAMPLER_DEIS else GRID_LINEAR
        grid = GRID_ALIASES.get(grid, grid)
        if grid not in GRID_KINDS:
            raise InvalidParameterError(f"Type de grille inconnu: {grid}")
        object.__setattr__(self, 'grid', grid)

    @property
    def reparam_label(self) -> str:
        # Euler et DDIM n'ont pas de K: ils sont rangés sous 'none'
        return self.reparam if self.kind == SAMPLER_DEIS else 'none'

    @property
    def needs_profile(self) -> bool:
        return self.kind == SAMPLER_DEIS and self.reparam == REPARAM_SCORE_NORM


CoefficientCache = Dict[Tuple, CoefficientTable]


def build_coefficients(spec: SamplerSpec, grid: TimeGrid, sched: NoiseSchedule,
                       profile: Optional[ScoreMagnitudeProfile], subdivisions: int,
                       cache: Optional[CoefficientCache] = None) -> CoefficientTable:
    rep = Reparameterisation(spec.reparam, profile if spec.needs_profile else None)
    key = (grid.kind, grid.n_steps, spec.order, rep.kind, id(rep.profile), subdivisions)
    if cache is not None and key in cache:
        return cache[key]
    table = compute_coefficients(grid, spec.order, rep, sched, subdivisions)
    if cache is not None:
        cache[key] = table
    return table


def run_sampler(spec: SamplerSpec, x1: np.ndarray, nfe: int, score: ScoreFunction, sched: NoiseSchedule,
                profile: Optional[ScoreMagnitudeProfile] = None, workers: int = 1, subdivisions: int = 32,
                seed: Optional[int] = None, cache: Optional[CoefficientCache] = None) -> SamplerRun:
    """
    Construit grille (et coefficients pour DEIS) puis échantillonne le lot, éventuellement
    réparti sur plusieurs threads.

    Raises:
        NumericalError: si le NFE mesuré diffère du nombre de pas de la grille
    """
    grid = make_time_grid(spec.grid, nfe)

    if spec.kind == SAMPLER_DEIS:
        table = build_coefficients(spec, grid, sched, profile, subdivisions, cache)

        def sample_chunk(chunk):
            return deis_sample(chunk, grid, spec.order, score, table.reparam, table, sched)
    elif spec.kind == SAMPLER_EULER:
        def sample_chunk(chunk):
            return euler_sample(chunk, grid, score, sched)
    else:
        def sample_chunk(chunk):
            return ddim_sample(chunk, grid, score, sched)

    runs = map_batch_chunks(sample_chunk, x1, workers)
    for run in runs:
        if run.nfe != grid.n_steps:
            raise NumericalError(f"{spec.name}: NFE mesuré {run.nfe} ≠ {grid.n_steps} pas")

    logger.debug(f"{spec.name}: {len(x1)} trajectoires, NFE={grid.n_steps}")
    return SamplerRun(
        x_init=np.asarray(x1),
        samples=np.vstack([run.samples for run in runs]),
        grid=grid,
        nfe=grid.n_steps,
        seed=seed,
        sampler=spec.name,
    )

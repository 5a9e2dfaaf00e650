# -*- coding: utf-8 -*-
"""
Métriques d'erreur à l'échelle du bureau (à la place du FID) et courbes de diagnostic.

    - terminal_rmse: écart trajectoire par trajectoire au flot exact (une gaussienne)
    - sliced_wasserstein: distance entre lois empiriques (mélange, pas de flot exact)
    - score_curves: s̄(t), σ_t et leur produit
    - convergence_study: erreur en fonction du NFE et pente log-log
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyBatchError,
    InvalidParameterError,
    NumericalError,
    ShapeMismatchError,
)
from .oracle import MixtureScore, ScoreFunction, exact_gaussian_flow
from .schedule import NoiseSchedule
from .score_profile import ScoreMagnitudeProfile, collect_profile, constant_profile
from .seeding import PURPOSE_EVAL, PURPOSE_PROJECTION, PURPOSE_REFERENCE, standard_normal_batch, trajectory_rng

if TYPE_CHECKING:
    from .config import ExperimentConfig

logger = logging.getLogger(__name__)

METRIC_RMSE = 'rmse'
METRIC_SLICED_W2 = 'sliced-w2'
CURVE_COLUMNS = ['t', 's_bar', 'sigma', 'product']
REPORT_COLUMNS = ['sampler', 'reparam', 'nfe', 'metric', 'value', 'seed']
CONTROL_CONSTANT_SCALE = 'constant-scale'


# ============================================================================
# MÉTRIQUES
# ============================================================================

def _as_batch(values: np.ndarray, name: str) -> np.ndarray:
    batch = np.asarray(values, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[:, None]
    if batch.ndim != 2:
        raise ShapeMismatchError(f"{name} doit être un lot (B, D), reçu {batch.shape}")
    if batch.shape[0] == 0:
        raise EmptyBatchError(f"{name} est vide")
    return batch


def terminal_rmse(samples: np.ndarray, reference: np.ndarray) -> float:
    """
    Racine de la moyenne des carrés des écarts, sur toutes les coordonnées du lot.

    Exemples:
        terminal_rmse(x, x) → 0
        terminal_rmse(x, x + 1) → 1
    """
    samples = np.asarray(samples, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if samples.shape != reference.shape:
        raise ShapeMismatchError(f"Formes différentes: {samples.shape} vs {reference.shape}")
    if samples.size == 0:
        raise EmptyBatchError("Lots vides")
    return float(np.sqrt(np.mean((samples - reference) ** 2)))


def sliced_wasserstein(a: np.ndarray, b: np.ndarray, n_projections: int = 64, seed: int = 0) -> float:
    """
    Moyenne, sur des directions unitaires aléatoires, de la distance W2 1-D entre
    projections (formule des échantillons triés). Les lots doivent avoir la même taille.

    Exemples:
        sliced_wasserstein(a, a) → 0
        dim 1, a = {0, 0}, b = {1, 1} → 1

    Raises:
        EmptyBatchError, DimensionMismatchError, ShapeMismatchError (tailles différentes)
    """
    a = _as_batch(a, 'a')
    b = _as_batch(b, 'b')
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"Dimensions différentes: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatchError(f"Tailles de lots différentes: {a.shape[0]} vs {b.shape[0]}")
    if n_projections < 1:
        raise InvalidParameterError(f"n_projections doit être ≥ 1 (reçu {n_projections})")

    rng = trajectory_rng(seed, 0, PURPOSE_PROJECTION)
    directions = rng.standard_normal((n_projections, a.shape[1]))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    projected_a = np.sort(a @ directions.T, axis=0)
    projected_b = np.sort(b @ directions.T, axis=0)
    per_direction = np.sqrt(np.mean((projected_a - projected_b) ** 2, axis=0))
    return float(np.mean(per_direction))


def fit_loglog_slope(nfes: Sequence[int], errors: Sequence[float]) -> Optional[float]:
    """
    Ordre observé: −pente des moindres carrés de log(erreur) contre log(NFE).
    None s'il reste moins de deux points exploitables (erreur > 0 et finie).
    """
    pairs = [(n, e) for n, e in zip(nfes, errors) if np.isfinite(e) and e > 0]
    if len(pairs) < 2:
        return None
    log_n = np.log([n for n, _ in pairs])
    log_e = np.log([e for _, e in pairs])
    return float(-np.polyfit(log_n, log_e, 1)[0])


# ============================================================================
# COURBES s̄, σ
# ============================================================================

def score_curves(score: ScoreFunction, sched: NoiseSchedule, profile: Optional[ScoreMagnitudeProfile] = None,
                 nfe: int = 1000, batch: int = 256, seed: int = 1) -> List[Tuple[float, float, float, float]]:
    """
    Lignes (t, s̄(t), σ_t, s̄(t)·σ_t) aux noeuds du profil; le profil est collecté
    sur `score` s'il n'est pas fourni. s̄ est la valeur brute au noeud (sans troncature).
    """
    if profile is None:
        profile = collect_profile(score, sched, nfe, batch, seed)

    _, sigmas = sched.alpha_sigma(profile.knots)
    rows = []
    for t, s_bar, sigma in zip(profile.knots, profile.values, sigmas):
        s_bar, sigma = float(s_bar), float(sigma)
        rows.append((float(t), s_bar, sigma, s_bar * sigma))
    return rows


# ============================================================================
# ÉTUDE DE CONVERGENCE
# ============================================================================

@dataclass
class ConvergenceReport:
    """Erreur en fonction du NFE pour un échantillonneur (NFE strictement croissants)."""

    sampler: str
    reparam: str
    metric: str
    seed: int
    oracle: str
    grid: str
    points: List[Tuple[int, float]] = field(default_factory=list)
    slope: Optional[float] = None
    failures: Dict[int, str] = field(default_factory=dict)

    def value_at(self, nfe: int) -> Optional[float]:
        for n, value in self.points:
            if n == nfe:
                return value
        return None

    def to_dict(self) -> Dict:
        payload = asdict(self)
        payload['points'] = [{'nfe': n, 'value': v} for n, v in self.points]
        payload['failures'] = {str(n): message for n, message in self.failures.items()}
        return payload


def _reference(config: 'ExperimentConfig', score: MixtureScore, sched: NoiseSchedule,
               x1: np.ndarray) -> Tuple[str, np.ndarray]:
    mixture = score.mixture
    if mixture.is_single_gaussian:
        return METRIC_RMSE, exact_gaussian_flow(mixture, sched, x1, 1.0, 0.0)
    return METRIC_SLICED_W2, mixture.sample_stratified(config.batch, config.eval_seed, PURPOSE_REFERENCE)


def convergence_study(config: 'ExperimentConfig', profile: Optional[ScoreMagnitudeProfile] = None
                      ) -> List[ConvergenceReport]:
    """
    Balaye chaque échantillonneur sur la liste de NFE avec les mêmes tirages x_1.
    Métrique: RMSE contre le flot exact (une gaussienne) ou Wasserstein tranché contre
    des tirages directs stratifiés par composante (mélange). Un échec numérique est
    consigné dans la cellule sans interrompre le balayage.
    """
    from .samplers import run_sampler

    sched = config.build_schedule()
    score = config.build_score(sched)
    if profile is None and any(spec.needs_profile for spec in config.samplers):
        profile = collect_profile(
            score, sched, config.profile.nfe, config.profile.batch, config.profile.seed,
            config.profile.truncation_threshold, config.workers, config.subdivisions,
        )

    x1 = standard_normal_batch(config.eval_seed, config.batch, score.dim, PURPOSE_EVAL)
    metric, reference = _reference(config, score, sched, x1)
    cache = {}
    reports = []

    for spec in config.samplers:
        report = ConvergenceReport(
            sampler=spec.name,
            reparam=spec.reparam_label,
            metric=metric,
            seed=config.eval_seed,
            oracle=score.describe(),
            grid=spec.grid,
        )
        for nfe in config.nfe_list:
            try:
                run = run_sampler(spec, x1, nfe, score, sched, profile, config.workers,
                                  config.subdivisions, config.eval_seed, cache)
                if metric == METRIC_RMSE:
                    value = terminal_rmse(run.samples, reference)
                else:
                    value = sliced_wasserstein(run.samples, reference, config.n_projections, config.eval_seed)
            except NumericalError as exc:
                logger.warning(f"⚠️ {spec.name} NFE={nfe}: {exc}")
                report.failures[nfe] = str(exc)
                continue
            report.points.append((nfe, value))

        report.slope = fit_loglog_slope([n for n, _ in report.points], [v for _, v in report.points])
        logger.info(f"{spec.name}: {len(report.points)} points, pente={report.slope}")
        reports.append(report)

    return reports


def normalisation_control(config: 'ExperimentConfig', order: int = 3, level: float = 2.0) -> Dict:
    """
    Contrôle de la plomberie SN: avec un profil constant s̄ ≡ level, K ≡ 1/level et
    DEIS-SN doit reproduire DEIS à K = 1 (l'intégrale est linéaire en K⁻¹).

    Returns:
        dict: {'kind': 'constant-scale', 'order', 'level', 'max_abs_diff': {nfe: écart}}
    """
    from .samplers import SamplerSpec, run_sampler

    sched = config.build_schedule()
    score = config.build_score(sched)
    x1 = standard_normal_batch(config.eval_seed, config.batch, score.dim, PURPOSE_EVAL)
    flat = constant_profile(level)
    normalised = SamplerSpec('control-sn', 'deis', order, 'score-norm')
    plain = SamplerSpec('control-identity', 'deis', order, 'identity')

    differences = {}
    for nfe in config.nfe_list:
        sn_run = run_sampler(normalised, x1, nfe, score, sched, flat, config.workers, config.subdivisions)
        id_run = run_sampler(plain, x1, nfe, score, sched, None, config.workers, config.subdivisions)
        differences[nfe] = float(np.max(np.abs(sn_run.samples - id_run.samples)))
    return {'kind': CONTROL_CONSTANT_SCALE, 'order': order, 'level': level, 'max_abs_diff': differences}

# -*- coding: utf-8 -*-
"""
Profil empirique s̄(t) de la magnitude moyenne du score.

Collecté hors ligne sur des trajectoires DEIS-tAB3 (K = σ) à grand NFE, il définit
la reparamétrisation SN: K_t = 1/s̄(t). En dessous du seuil de troncature,
s̄ est gelé à sa valeur au seuil.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from django.conf import settings

from .exceptions import InvalidParameterError
from .oracle import ScoreFunction
from .schedule import NoiseSchedule, TimeLike, check_time
from .seeding import PURPOSE_PROFILE, standard_normal_batch

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ['t', 's_bar']


# ============================================================================
# PROFIL
# ============================================================================

@dataclass(frozen=True, eq=False)
class ScoreMagnitudeProfile:
    """
    s̄(t) aux noeuds (temps croissants), interpolé linéairement.

    Raises:
        InvalidParameterError: noeuds non strictement croissants, valeurs ≤ 0, seuil hors de [0, 1]
    """

    knots: np.ndarray
    values: np.ndarray
    truncation_threshold: float = 0.005
    batch_size: int = 0
    nfe_used: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        knots = np.array(self.knots, dtype=np.float64)
        values = np.array(self.values, dtype=np.float64)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 1:
            raise InvalidParameterError("knots et values doivent être deux vecteurs non vides de même taille")
        if np.any(np.diff(knots) <= 0):
            raise InvalidParameterError("Les noeuds du profil doivent être strictement croissants")
        if knots[0] < 0.0 or knots[-1] > 1.0:
            raise InvalidParameterError("Les noeuds du profil doivent être dans [0, 1]")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise InvalidParameterError("Toutes les valeurs du profil doivent être finies et > 0")
        if not (0.0 <= self.truncation_threshold <= 1.0):
            raise InvalidParameterError(f"Seuil de troncature hors de [0, 1]: {self.truncation_threshold}")

        knots.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'knots', knots)
        object.__setattr__(self, 'values', values)

    def lookup(self, t: TimeLike) -> TimeLike:
        """
        s̄(t): interpolation linéaire entre noeuds, constante sur [0, seuil],
        dernière valeur au-delà du dernier noeud.

        Exemples:
            lookup(0.001) == lookup(0.005) avec le seuil par défaut
            noeuds (0.2, 0.4), valeurs (2, 4): lookup(0.3) → 3
        """
        t_arr = check_time(t)
        clamped = np.maximum(t_arr, self.truncation_threshold)
        values = np.interp(clamped, self.knots, self.values)
        if np.ndim(t) == 0:
            return float(values)
        return values

    def breakpoints(self) -> np.ndarray:
        """Points où s̄ n'est pas dérivable (noeuds + seuil)."""
        return np.union1d(self.knots, [self.truncation_threshold])


def profile_lookup(p: ScoreMagnitudeProfile, t: TimeLike) -> TimeLike:
    return p.lookup(t)


def constant_profile(value: float, truncation_threshold: float = 0.0) -> ScoreMagnitudeProfile:
    """Profil constant s̄ ≡ value (expériences de contrôle)."""
    return ScoreMagnitudeProfile(
        knots=np.array([0.0, 1.0]),
        values=np.array([value, value]),
        truncation_threshold=truncation_threshold,
    )


# ============================================================================
# COLLECTE
# ============================================================================

class _MagnitudeRecorder(ScoreFunction):
    """Enregistre, à chaque évaluation, la moyenne par trajectoire de |s| sur les coordonnées."""

    def __init__(self, score: ScoreFunction):
        self.score = score
        self.dim = score.dim
        self.times: List[float] = []
        self.row_means: List[np.ndarray] = []

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        values = self.score.evaluate(x, t)
        self.times.append(float(t))
        self.row_means.append(np.mean(np.abs(np.atleast_2d(values)), axis=1))
        return values


def collect_profile(score: ScoreFunction, sched: NoiseSchedule, nfe: int, batch: int, seed: int,
                    truncation_threshold: Optional[float] = None, workers: int = 1,
                    subdivisions: Optional[int] = None) -> ScoreMagnitudeProfile:
    """
    Collecte s̄(t) le long de trajectoires DEIS-tAB3 (K = σ) sur une grille uniforme.

    Une valeur par évaluation du score (t_N = 1 … t_1); t = 0 n'est jamais évalué.
    La graine doit différer de celle de l'évaluation (responsabilité de l'appelant).

    Args:
        score: oracle ou estimateur de score
        sched: schéma de bruit
        nfe: nombre de pas (≥ 2)
        batch: nombre de trajectoires (≥ 1)
        seed: graine des tirages x_1 (usage 'profile')
        truncation_threshold: seuil de troncature (défaut: settings.DEIS_TRUNCATION_THRESHOLD)
        workers: threads pour découper le lot (sans effet sur le résultat)

    Returns:
        ScoreMagnitudeProfile
    """
    from .coeffs import REPARAM_SIGMA, Reparameterisation, compute_coefficients
    from .samplers import GRID_UNIFORM, deis_sample, make_time_grid, map_batch_chunks

    if nfe < 2:
        raise InvalidParameterError(f"La collecte demande nfe ≥ 2 (reçu {nfe})")
    if batch < 1:
        raise InvalidParameterError(f"La collecte demande batch ≥ 1 (reçu {batch})")
    if truncation_threshold is None:
        truncation_threshold = settings.DEIS_TRUNCATION_THRESHOLD
    if subdivisions is None:
        subdivisions = settings.DEIS_QUADRATURE_SUBDIVISIONS

    logger.info(f"Collecte du profil: nfe={nfe}, batch={batch}, seed={seed}")

    grid = make_time_grid(GRID_UNIFORM, nfe)
    rep = Reparameterisation(REPARAM_SIGMA)
    table = compute_coefficients(grid, 3, rep, sched, subdivisions)
    x1 = standard_normal_batch(seed, batch, score.dim, purpose=PURPOSE_PROFILE)

    def run_chunk(chunk: np.ndarray):
        recorder = _MagnitudeRecorder(score)
        deis_sample(chunk, grid, 3, recorder, rep, table, sched)
        return recorder

    recorders = map_batch_chunks(run_chunk, x1, workers)
    times = recorders[0].times
    per_time = [
        np.concatenate([recorder.row_means[step] for recorder in recorders])
        for step in range(len(times))
    ]
    values = np.array([float(np.mean(rows)) for rows in per_time])

    # Évaluations de t = 1 vers t_1: on remet les noeuds dans l'ordre croissant
    profile = ScoreMagnitudeProfile(
        knots=np.array(times[::-1]),
        values=values[::-1],
        truncation_threshold=truncation_threshold,
        batch_size=batch,
        nfe_used=nfe,
        seed=seed,
    )
    logger.info(
        f"Profil collecté: s̄(1)={profile.values[-1]:.4f}, "
        f"s̄({profile.knots[0]:.4g})={profile.values[0]:.4f}"
    )
    return profile


# ============================================================================
# FORMAT CSV
# ============================================================================

def profile_metadata(profile: ScoreMagnitudeProfile) -> Dict[str, str]:
    return {
        'nfe': str(profile.nfe_used),
        'batch': str(profile.batch_size),
        'profile_seed': '' if profile.seed is None else str(profile.seed),
        'truncation_threshold': repr(float(profile.truncation_threshold)),
    }


def profile_rows(profile: ScoreMagnitudeProfile) -> List[List[float]]:
    return [[float(t), float(v)] for t, v in zip(profile.knots, profile.values)]


def read_profile_csv(path: Union[str, Path], truncation_threshold: Optional[float] = None) -> ScoreMagnitudeProfile:
    """
    Relit un profil `t,s_bar`. Les lignes commençant par '#' portent des métadonnées
    `clé=valeur`; un seuil passé explicitement l'emporte sur celui du fichier.

    Raises:
        InvalidParameterError: en-tête absent ou contenu invalide
        OSError: fichier illisible
    """
    metadata: Dict[str, str] = {}
    knots, values = [], []
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        numbered = []
        for line_number, line in enumerate(handle, start=1):
            if line.startswith('#'):
                for token in line[1:].split():
                    key, _, value = token.partition('=')
                    metadata[key] = value
            elif line.strip():
                numbered.append((line_number, line))

    rows = zip((n for n, _ in numbered), csv.reader(line for _, line in numbered))
    _, header = next(rows, (0, None))
    if header != PROFILE_COLUMNS:
        raise InvalidParameterError(f"En-tête de profil inattendu dans {path}: {header}")
    for line_number, row in rows:
        if len(row) != len(PROFILE_COLUMNS):
            raise InvalidParameterError(f"{path}, ligne {line_number}: {len(row)} colonne(s) au lieu de 2")
        try:
            t, value = float(row[0]), float(row[1])
        except ValueError:
            raise InvalidParameterError(f"{path}, ligne {line_number}: valeur non numérique {row}")
        knots.append(t)
        values.append(value)

    if truncation_threshold is None:
        truncation_threshold = float(metadata.get('truncation_threshold', settings.DEIS_TRUNCATION_THRESHOLD))

    def _int(key: str) -> int:
        raw = metadata.get(key, '')
        return int(raw) if raw else 0

    seed_raw = metadata.get('profile_seed', '')
    return ScoreMagnitudeProfile(
        knots=np.array(knots),
        values=np.array(values),
        truncation_threshold=truncation_threshold,
        batch_size=_int('batch'),
        nfe_used=_int('nfe'),
        seed=int(seed_raw) if seed_raw else None,
    )

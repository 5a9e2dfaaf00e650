# -*- coding: utf-8 -*-
"""
Oracles de score analytiques.

Un mélange gaussien isotrope reste un mélange gaussien sous le processus direct:
p(x_t) = Σ_k w_k N(x; a_t μ_k, v_k(t) I) avec v_k(t) = a_t² c_k² + σ_t².
Son score est donc connu en forme close, et pour une seule gaussienne le flot
de l'EDO probabiliste l'est aussi (z = (x_t − a_t μ)/√v(t) est conservé).
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .exceptions import (
    DegenerateDensityError,
    DimensionMismatchError,
    InvalidParameterError,
    NotSingleGaussianError,
)
from .schedule import NoiseSchedule
from .seeding import PURPOSE_REFERENCE, trajectory_rng

logger = logging.getLogger(__name__)

NOISE_PRED = 'noise-pred'
SAMPLE_PRED = 'sample-pred'


# ============================================================================
# CONTRAT
# ============================================================================

class ScoreFunction(ABC):
    """
    Contrat minimal d'un estimateur de score: evaluate(x, t) → ∇ log p_t(x).
    Un réseau chargé depuis un fichier peut s'y brancher sans toucher aux échantillonneurs.
    """

    dim: int

    @abstractmethod
    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        """x de forme (D,) ou (B, D); rend un tableau de même forme."""

    def describe(self) -> str:
        return self.__class__.__name__


# ============================================================================
# MÉLANGE GAUSSIEN
# ============================================================================

@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: Tuple[float, ...]
    std: float


class GaussianMixture:
    """
    Mélange isotrope Σ_k w_k N(μ_k, c_k² I).

    Raises:
        InvalidParameterError: poids ne sommant pas à 1, écart-type ≤ 0, moyennes non finies
        DimensionMismatchError: moyennes de dimensions différentes
    """

    WEIGHT_TOLERANCE = 1e-12

    def __init__(self, components: Sequence[MixtureComponent]):
        if not components:
            raise InvalidParameterError("Le mélange doit contenir au moins une composante")

        dims = {len(c.mean) for c in components}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Moyennes de dimensions différentes: {sorted(dims)}")

        self.components = tuple(components)
        self.dim = dims.pop()
        self.weights = np.array([c.weight for c in components], dtype=np.float64)
        self.means = np.array([c.mean for c in components], dtype=np.float64).reshape(len(components), self.dim)
        self.stds = np.array([c.std for c in components], dtype=np.float64)

        if self.dim < 1:
            raise InvalidParameterError("La dimension doit être ≥ 1")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > self.WEIGHT_TOLERANCE:
            raise InvalidParameterError(
                f"Les poids doivent être > 0 et sommer à 1 (somme={self.weights.sum()!r})"
            )
        if np.any(self.stds <= 0) or not np.all(np.isfinite(self.stds)):
            raise InvalidParameterError("Tous les écarts-types doivent être > 0")
        if not np.all(np.isfinite(self.means)):
            raise InvalidParameterError("Toutes les moyennes doivent être finies")

        for array in (self.weights, self.means, self.stds):
            array.setflags(write=False)

    @classmethod
    def single_gaussian(cls, mean: Sequence[float], std: float) -> 'GaussianMixture':
        return cls([MixtureComponent(1.0, tuple(float(m) for m in mean), float(std))])

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def is_single_gaussian(self) -> bool:
        return self.n_components == 1

    def describe(self) -> str:
        parts = [
            f"w={c.weight:g} mu=({' '.join(f'{m:g}' for m in c.mean)}) c={c.std:g}"
            for c in self.components
        ]
        return f"gmm(dim={self.dim}; " + '; '.join(parts) + ')'

    def sample(self, n: int, seed: int, purpose: str = PURPOSE_REFERENCE) -> np.ndarray:
        """
        Tirages directs de p(x_0), un flux aléatoire par tirage.

        Args:
            n: nombre de tirages
            seed: graine
            purpose: usage (distinct de 'eval' pour ne pas réutiliser les tirages de x_1)

        Returns:
            np.ndarray: (n, dim)
        """
        if n < 1:
            raise InvalidParameterError(f"n doit être ≥ 1 (reçu {n})")
        draws = np.empty((n, self.dim), dtype=np.float64)
        for k in range(n):
            rng = trajectory_rng(seed, k, purpose)
            component = rng.choice(self.n_components, p=self.weights)
            draws[k] = self.means[component] + self.stds[component] * rng.standard_normal(self.dim)
        return draws

    def stratified_counts(self, n: int) -> np.ndarray:
        """round(w_k·n) par composante, complété au plus fort reste pour sommer à n."""
        exact = self.weights * n
        counts = np.floor(exact).astype(int)
        order = np.argsort(-(exact - counts), kind='stable')
        counts[order[:n - counts.sum()]] += 1
        return counts

    def sample_stratified(self, n: int, seed: int, purpose: str = PURPOSE_REFERENCE) -> np.ndarray:
        """
        Tirages directs avec exactement stratified_counts(n) points par composante.
        Seul le bruit intra-composante reste: deux références de graines différentes
        ne diffèrent plus par les proportions des modes.
        """
        if n < 1:
            raise InvalidParameterError(f"n doit être ≥ 1 (reçu {n})")
        labels = np.repeat(np.arange(self.n_components), self.stratified_counts(n))
        draws = np.empty((n, self.dim), dtype=np.float64)
        for k, component in enumerate(labels):
            noise = trajectory_rng(seed, k, purpose).standard_normal(self.dim)
            draws[k] = self.means[component] + self.stds[component] * noise
        return draws


# ============================================================================
# MARGINALES ET SCORE
# ============================================================================

def _as_batch(x: np.ndarray, dim: int) -> Tuple[np.ndarray, bool]:
    x_arr = np.asarray(x, dtype=np.float64)
    single = x_arr.ndim == 1
    batch = np.atleast_2d(x_arr)
    if batch.ndim != 2 or batch.shape[1] != dim:
        raise DimensionMismatchError(f"x de forme {x_arr.shape} incompatible avec la dimension {dim}")
    return batch, single


def _noised_parameters(mix: GaussianMixture, sched: NoiseSchedule, t: float) -> Tuple[np.ndarray, np.ndarray]:
    a, sigma = sched.alpha_sigma(t)
    variances = a * a * mix.stds * mix.stds + sigma * sigma
    if np.any(variances <= 0):
        raise DegenerateDensityError(f"Variance nulle à t={t}")
    return a * mix.means, variances


def gmm_marginal(mix: GaussianMixture, sched: NoiseSchedule, t: float) -> List[Tuple[float, np.ndarray, float]]:
    """
    Paramètres exacts de p(x_t): [(w_k, a_t μ_k, v_k(t)), ...], poids inchangés.
    """
    centers, variances = _noised_parameters(mix, sched, t)
    return [
        (float(w), centers[k].copy(), float(variances[k]))
        for k, w in enumerate(mix.weights)
    ]


def _log_component_densities(batch: np.ndarray, centers: np.ndarray, variances: np.ndarray,
                             weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dim = batch.shape[1]
    diff = centers[None, :, :] - batch[:, None, :]
    squared = np.sum(diff * diff, axis=-1)
    log_terms = (np.log(weights)[None, :]
                 - 0.5 * dim * np.log(2.0 * np.pi * variances)[None, :]
                 - 0.5 * squared / variances[None, :])
    return log_terms, diff


def gmm_log_density(mix: GaussianMixture, sched: NoiseSchedule, x: np.ndarray, t: float):
    """log p(x_t) (utile pour les contrôles par différences finies)."""
    batch, single = _as_batch(x, mix.dim)
    centers, variances = _noised_parameters(mix, sched, t)
    log_terms, _ = _log_component_densities(batch, centers, variances, mix.weights)
    values = logsumexp(log_terms, axis=1)
    return float(values[0]) if single else values


def gmm_score(mix: GaussianMixture, sched: NoiseSchedule, x: np.ndarray, t: float) -> np.ndarray:
    """
    Score exact Σ_k γ_k(x)·(a_t μ_k − x)/v_k(t), responsabilités γ_k calculées en log.

    Exemples:
        une composante (μ=0, c=1): score(x, t) = −x / (a_t² + σ_t²)
        deux composantes symétriques, x = 0 → 0

    Raises:
        DimensionMismatchError: x de mauvaise dimension
        DegenerateDensityError: v_k(t) = 0
    """
    batch, single = _as_batch(x, mix.dim)
    centers, variances = _noised_parameters(mix, sched, t)
    log_terms, diff = _log_component_densities(batch, centers, variances, mix.weights)
    responsibilities = np.exp(log_terms - logsumexp(log_terms, axis=1, keepdims=True))
    score = np.sum(responsibilities[:, :, None] * diff / variances[None, :, None], axis=1)
    return score[0] if single else score


class MixtureScore(ScoreFunction):
    """Oracle de score pour un mélange gaussien sous un schéma donné."""

    def __init__(self, mixture: GaussianMixture, sched: NoiseSchedule):
        self.mixture = mixture
        self.sched = sched
        self.dim = mixture.dim

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        return gmm_score(self.mixture, self.sched, x, t)

    def describe(self) -> str:
        return self.mixture.describe()


# ============================================================================
# CONVERSIONS DE PARAMÉTRISATION
# ============================================================================

def convert_parameterisation(score: np.ndarray, x: np.ndarray, t: float, sched: NoiseSchedule,
                             target: str) -> np.ndarray:
    """
    Score → prédiction de bruit (ε = −σ_t s) ou de donnée (x_θ = (x + σ_t² s)/a_t).

    Raises:
        InvalidParameterError: σ_t = 0 (ou a_t = 0), ou cible inconnue
    """
    a, sigma = sched.alpha_sigma(t)
    if sigma == 0.0 or a == 0.0:
        raise InvalidParameterError(f"Conversion impossible à t={t}: σ_t = {sigma}, a_t = {a}")
    score = np.asarray(score, dtype=np.float64)
    if target == NOISE_PRED:
        return -sigma * score
    if target == SAMPLE_PRED:
        return (np.asarray(x, dtype=np.float64) + sigma * sigma * score) / a
    raise InvalidParameterError(f"Paramétrisation inconnue: {target}")


def score_from_parameterisation(prediction: np.ndarray, x: np.ndarray, t: float, sched: NoiseSchedule,
                                source: str) -> np.ndarray:
    """Inverse de convert_parameterisation."""
    a, sigma = sched.alpha_sigma(t)
    if sigma == 0.0 or a == 0.0:
        raise InvalidParameterError(f"Conversion impossible à t={t}: σ_t = {sigma}, a_t = {a}")
    prediction = np.asarray(prediction, dtype=np.float64)
    if source == NOISE_PRED:
        return -prediction / sigma
    if source == SAMPLE_PRED:
        return (a * prediction - np.asarray(x, dtype=np.float64)) / (sigma * sigma)
    raise InvalidParameterError(f"Paramétrisation inconnue: {source}")


# ============================================================================
# FLOT EXACT (UNE GAUSSIENNE)
# ============================================================================

def exact_gaussian_flow(mix: GaussianMixture, sched: NoiseSchedule, x1: np.ndarray,
                        t_from: float, t_to: float) -> np.ndarray:
    """
    Flot exact de l'EDO probabiliste pour une donnée N(μ, c² I):
    x_{t_to} = a_{t_to} μ + √(v(t_to)/v(t_from))·(x_{t_from} − a_{t_from} μ).

    Raises:
        NotSingleGaussianError: si le mélange a plus d'une composante
    """
    if not mix.is_single_gaussian:
        raise NotSingleGaussianError(
            f"Flot exact défini pour une seule gaussienne ({mix.n_components} composantes)"
        )
    x_arr = np.asarray(x1, dtype=np.float64)
    if x_arr.shape[-1] != mix.dim:
        raise DimensionMismatchError(f"x de forme {x_arr.shape} incompatible avec la dimension {mix.dim}")

    mean = mix.means[0]
    c2 = mix.stds[0] ** 2
    a_from, sigma_from = sched.alpha_sigma(t_from)
    a_to, sigma_to = sched.alpha_sigma(t_to)
    v_from = a_from * a_from * c2 + sigma_from * sigma_from
    v_to = a_to * a_to * c2 + sigma_to * sigma_to
    if t_from == t_to:
        return x_arr.copy()
    return a_to * mean + np.sqrt(v_to / v_from) * (x_arr - a_from * mean)

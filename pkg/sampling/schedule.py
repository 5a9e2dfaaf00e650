# -*- coding: utf-8 -*-
"""
Schémas de bruit variance-preserving (VP).

Le schéma est piloté par une table: a_t² = ∏(1 − β_{i/N}) aux temps t_i = i/N,
puis interpolation linéaire de a_t entre les noeuds. σ_t est déduit de a_t
(σ_t² = (1 − a_t)(1 + a_t)), jamais interpolé séparément.
"""
import logging
from typing import Tuple, Union

import numpy as np

from .exceptions import InvalidParameterError, OutOfRangeTimeError

logger = logging.getLogger(__name__)

TimeLike = Union[float, np.ndarray]

# Tolérance d'arrondi sur les bornes de [0, 1]
TIME_TOLERANCE = 1e-12


# ============================================================================
# FONCTIONS UTILITAIRES
# ============================================================================

def check_time(t: TimeLike, name: str = 't') -> np.ndarray:
    """
    Valide un temps (scalaire ou tableau) et le ramène dans [0, 1].

    Raises:
        OutOfRangeTimeError: si t est hors de [0, 1] ou non fini
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if (not np.all(np.isfinite(t_arr))
            or np.any(t_arr < -TIME_TOLERANCE)
            or np.any(t_arr > 1.0 + TIME_TOLERANCE)):
        raise OutOfRangeTimeError(f"{name} hors de [0, 1]: {t}")
    return np.clip(t_arr, 0.0, 1.0)


def _same_kind(value: np.ndarray, like: TimeLike):
    """Rend un float pour une entrée scalaire, un tableau sinon."""
    if np.ndim(like) == 0:
        return float(value)
    return value


# ============================================================================
# SCHÉMA VP
# ============================================================================

class NoiseSchedule:
    """
    Schéma VP tabulé. Immuable après construction.

    Attributs:
        beta_min, beta_max: bornes du taux β_t (par pas de la table)
        n_discrete: N, nombre de pas de la table
        alpha_table: a_{i/N} pour i = 0..N (a_0 = 1)
        knots: temps i/N
    """

    def __init__(self, beta_min: float, beta_max: float, alpha_table: np.ndarray,
                 complement_table: np.ndarray = None):
        table = np.array(alpha_table, dtype=np.float64)
        if table.ndim != 1 or table.size < 3:
            raise InvalidParameterError("La table de a_t doit contenir au moins 3 valeurs")
        if table[0] != 1.0 or np.any(np.diff(table) >= 0) or table[-1] <= 0:
            raise InvalidParameterError("a_t doit partir de 1 et décroître strictement vers une valeur > 0")

        self.beta_min = float(beta_min)
        self.beta_max = float(beta_max)
        self.n_discrete = table.size - 1
        self.alpha_table = table
        self.knots = np.arange(self.n_discrete + 1, dtype=np.float64) / self.n_discrete
        # Pente exacte de chaque segment de l'interpolation linéaire
        self.segment_slopes = np.diff(table) * self.n_discrete

        # 1 − a_t tabulé sans annulation: σ_t reste précis près de t = 0
        if complement_table is None:
            complement_table = 1.0 - table
        self.complement_table = np.array(complement_table, dtype=np.float64)
        if self.complement_table.shape != table.shape or self.complement_table[0] != 0.0:
            raise InvalidParameterError("La table de 1 − a_t doit accompagner celle de a_t et partir de 0")

        for array in (self.alpha_table, self.complement_table, self.knots, self.segment_slopes):
            array.setflags(write=False)

    def __repr__(self):
        return (f"NoiseSchedule(beta_min={self.beta_min}, beta_max={self.beta_max}, "
                f"n_discrete={self.n_discrete})")

    # ------------------------------------------------------------------
    # Coefficients du processus direct
    # ------------------------------------------------------------------

    def alpha(self, t: TimeLike) -> TimeLike:
        t_arr = check_time(t)
        return _same_kind(np.interp(t_arr, self.knots, self.alpha_table), t)

    def alpha_sigma(self, t: TimeLike) -> Tuple[TimeLike, TimeLike]:
        """
        Rend (a_t, σ_t) avec σ_t = √(1 − a_t²).

        Exemples:
            t = 0 → (1.0, 0.0)
            t = 1 → (≈6.3e-3, ≈0.99998) pour le schéma linéaire standard
        """
        t_arr = check_time(t)
        a = np.interp(t_arr, self.knots, self.alpha_table)
        sigma = np.sqrt(self._sigma2(t_arr))
        return _same_kind(a, t), _same_kind(sigma, t)

    def _sigma2(self, t_arr: np.ndarray) -> np.ndarray:
        # σ² = (1 − a)(1 + a), 1 − a interpolé depuis sa propre table
        complement = np.interp(t_arr, self.knots, self.complement_table)
        return np.maximum(complement * (2.0 - complement), 0.0)

    def alpha_slope(self, t: TimeLike) -> TimeLike:
        """
        Dérivée exacte de l'interpolant linéaire (pente du segment contenant t).
        Sur un noeud, c'est la pente du segment de droite (sauf en t = 1).
        """
        t_arr = check_time(t)
        index = np.clip(np.floor(t_arr * self.n_discrete).astype(np.int64), 0, self.n_discrete - 1)
        return _same_kind(self.segment_slopes[index], t)

    # ------------------------------------------------------------------
    # Dérive / diffusion de l'EDS
    # ------------------------------------------------------------------

    def drift_diffusion(self, t: TimeLike) -> Tuple[TimeLike, TimeLike]:
        """
        Rend (f_t, g_t²) avec f_t = (da/dt)/a_t et g_t² = dσ²/dt − 2 f_t σ_t².

        da/dt est une différence finie centrée de pas h = 1/(2N) sur l'interpolant,
        décentrée aux bornes. dσ²/dt = −2 a_t da/dt (règle de chaîne), si bien que
        g_t² = −2 f_t à l'arrondi près.
        """
        t_arr = check_time(t)
        h = 0.5 / self.n_discrete
        lower = np.maximum(t_arr - h, 0.0)
        upper = np.minimum(t_arr + h, 1.0)

        a_lower = np.interp(lower, self.knots, self.alpha_table)
        a_upper = np.interp(upper, self.knots, self.alpha_table)
        da_dt = (a_upper - a_lower) / (upper - lower)

        a = np.interp(t_arr, self.knots, self.alpha_table)
        sigma2 = self._sigma2(t_arr)
        f = da_dt / a
        dsigma2_dt = -2.0 * a * da_dt
        g2 = dsigma2_dt - 2.0 * f * sigma2
        return _same_kind(f, t), _same_kind(g2, t)

    def psi(self, t: TimeLike, u: TimeLike) -> TimeLike:
        """Transition de la partie linéaire: Ψ(t, u) = a_t / a_u."""
        t_arr = check_time(t, 't')
        u_arr = check_time(u, 'u')
        ratio = (np.interp(t_arr, self.knots, self.alpha_table)
                 / np.interp(u_arr, self.knots, self.alpha_table))
        if np.ndim(t) == 0 and np.ndim(u) == 0:
            return float(ratio)
        return ratio

    def transfer_kernel(self, t_to: float, tau: np.ndarray, slope: np.ndarray = None) -> np.ndarray:
        """
        Noyau ½ Ψ(t_to, τ) g_τ² de l'intégrale des coefficients.

        Sous VP il vaut −a_{t_to}·a'_τ / a_τ², évalué avec la pente exacte du
        segment (passée explicitement quand l'appelant la connaît déjà).
        """
        tau_arr = check_time(tau, 'tau')
        if slope is None:
            slope = self.alpha_slope(tau_arr)
        a_to = np.interp(check_time(t_to, 't_to'), self.knots, self.alpha_table)
        a_tau = np.interp(tau_arr, self.knots, self.alpha_table)
        return -a_to * slope / (a_tau * a_tau)


# ============================================================================
# CONSTRUCTION ET OPÉRATIONS
# ============================================================================

def make_vp_linear_schedule(beta_min: float, beta_max: float, n_discrete: int = 1000) -> NoiseSchedule:
    """
    Schéma VP "linéaire": β_t = β_min + (β_max − β_min)·t et
    a_{i/N}² = ∏_{i'=1..i} (1 − β_{i'/N}).

    Raises:
        InvalidParameterError: si 0 < beta_min < beta_max < 1 ou n_discrete ≥ 2 n'est pas respecté
    """
    if not (0.0 < beta_min < beta_max < 1.0):
        raise InvalidParameterError(
            f"Il faut 0 < beta_min < beta_max < 1 (reçu beta_min={beta_min}, beta_max={beta_max})"
        )
    if int(n_discrete) != n_discrete or n_discrete < 2:
        raise InvalidParameterError(f"n_discrete doit être un entier ≥ 2 (reçu {n_discrete})")

    n_discrete = int(n_discrete)
    steps = np.arange(1, n_discrete + 1, dtype=np.float64) / n_discrete
    betas = beta_min + (beta_max - beta_min) * steps
    log_alpha2 = np.concatenate([[0.0], np.cumsum(np.log1p(-betas))])
    alpha_table = np.exp(0.5 * log_alpha2)
    complement_table = -np.expm1(0.5 * log_alpha2)
    complement_table[0] = 0.0

    schedule = NoiseSchedule(beta_min, beta_max, alpha_table, complement_table)
    logger.debug(f"Schéma VP construit: N={n_discrete}, a_1={alpha_table[-1]:.6e}")
    return schedule


def alpha_sigma(sched: NoiseSchedule, t: TimeLike) -> Tuple[TimeLike, TimeLike]:
    return sched.alpha_sigma(t)


def drift_diffusion(sched: NoiseSchedule, t: TimeLike) -> Tuple[TimeLike, TimeLike]:
    return sched.drift_diffusion(t)


def psi(sched: NoiseSchedule, t: TimeLike, u: TimeLike) -> TimeLike:
    return sched.psi(t, u)

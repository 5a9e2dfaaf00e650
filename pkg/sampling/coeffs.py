# -*- coding: utf-8 -*-
"""
Coefficients C_ij de l'intégrateur exponentiel DEIS-tAB.

    C_ij = ∫_{t_i}^{t_{i-1}} ½ Ψ(t_{i-1}, τ) g_τ² K_τ⁻¹ L_j(τ) dτ

où L_j est la base de Lagrange sur les noeuds d'historique t_{i+j}.
Quadrature de Gauss-Legendre composite (4 points par morceau). Les morceaux
suivent les noeuds de la table du schéma (a_t y est affine par segment), les
noeuds du profil SN, et une gradation géométrique vers t = 0 où K = σ rend
l'intégrande en 1/√τ. Le morceau qui touche 0 passe par τ = ℓu².
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .exceptions import (
    DuplicateNodesError,
    InvalidParameterError,
    MissingProfileError,
    SingularReparameterisationError,
)
from .schedule import NoiseSchedule, TimeLike
from .score_profile import ScoreMagnitudeProfile

if TYPE_CHECKING:
    from .samplers import TimeGrid

logger = logging.getLogger(__name__)

REPARAM_IDENTITY = 'identity'
REPARAM_SIGMA = 'sigma'
REPARAM_SCORE_NORM = 'score-norm'
REPARAM_KINDS = (REPARAM_IDENTITY, REPARAM_SIGMA, REPARAM_SCORE_NORM)

GAUSS_ORDER = 4
GAUSS_NODES, GAUSS_WEIGHTS = leggauss(GAUSS_ORDER)

# Gradation géométrique vers 0: points 0.8^k jusqu'à 1e-12
GRADING_RATIO = 0.8
GRADING_FLOOR = 1e-12
GRADING_POINTS = np.sort(GRADING_RATIO ** np.arange(
    0, int(np.ceil(np.log(GRADING_FLOOR) / np.log(GRADING_RATIO))) + 1
))

# Deux bornes de morceaux plus proches que ceci sont fusionnées
MERGE_TOLERANCE = 1e-12

COEFFICIENT_COLUMNS = ['i', 't_i', 't_prev', 'j', 'C_ij']


# ============================================================================
# REPARAMÉTRISATION
# ============================================================================

@dataclass(frozen=True)
class Reparameterisation:
    """K_t: identity → 1, sigma → σ_t, score-norm → 1/s̄(t)."""

    kind: str
    profile: Optional[ScoreMagnitudeProfile] = None

    def __post_init__(self):
        if self.kind not in REPARAM_KINDS:
            raise InvalidParameterError(
                f"Reparamétrisation inconnue: {self.kind} (attendu: {', '.join(REPARAM_KINDS)})"
            )

    def breakpoints(self) -> np.ndarray:
        if self.kind == REPARAM_SCORE_NORM and self.profile is not None:
            return self.profile.breakpoints()
        return np.empty(0)


def k_value(rep: Reparameterisation, sched: NoiseSchedule, t: TimeLike) -> TimeLike:
    """
    Exemples:
        identity, tout t → 1
        sigma → σ_t
        score-norm, profil gaussien (c=1) à t=1 → ≈ 1/0.798 ≈ 1.253

    Raises:
        MissingProfileError: score-norm sans profil
    """
    if rep.kind == REPARAM_IDENTITY:
        if np.ndim(t) == 0:
            return 1.0
        return np.ones_like(np.asarray(t, dtype=np.float64))
    if rep.kind == REPARAM_SIGMA:
        return sched.alpha_sigma(t)[1]
    if rep.profile is None:
        raise MissingProfileError("La reparamétrisation score-norm exige un profil s̄(t)")
    s_bar = rep.profile.lookup(t)
    return 1.0 / s_bar


def _inverse_k(rep: Reparameterisation, sched: NoiseSchedule, tau: np.ndarray) -> np.ndarray:
    k = np.asarray(k_value(rep, sched, tau), dtype=np.float64)
    if not np.all(np.isfinite(k)) or np.any(k <= 0):
        bad = tau[~(np.isfinite(k) & (k > 0))]
        raise SingularReparameterisationError(
            f"K(τ) nul ou non fini pour '{rep.kind}' en τ={bad[:3].tolist()}"
        )
    return 1.0 / k


# ============================================================================
# BASE DE LAGRANGE
# ============================================================================

def _check_nodes(nodes: Sequence[float]) -> np.ndarray:
    node_arr = np.asarray(nodes, dtype=np.float64)
    if node_arr.ndim != 1 or node_arr.size == 0:
        raise InvalidParameterError("Il faut au moins un noeud d'interpolation")
    if np.unique(node_arr).size != node_arr.size:
        raise DuplicateNodesError(f"Noeuds d'interpolation répétés: {node_arr.tolist()}")
    return node_arr


def lagrange_weight(j: int, tau: TimeLike, nodes: Sequence[float]) -> TimeLike:
    """
    Valeur en τ du j-ème polynôme de Lagrange ∏_{k≠j} (τ − n_k)/(n_j − n_k).

    Exemples:
        lagrange_weight(0, 0.5, [0.5, 0.7]) → 1
        Σ_j lagrange_weight(j, τ, noeuds) → 1
    """
    node_arr = _check_nodes(nodes)
    if not 0 <= j < node_arr.size:
        raise InvalidParameterError(f"Indice j={j} hors de [0, {node_arr.size})")

    tau_arr = np.asarray(tau, dtype=np.float64)
    result = np.ones_like(tau_arr)
    for k, node in enumerate(node_arr):
        if k == j:
            continue
        result = result * (tau_arr - node) / (node_arr[j] - node)
    if np.ndim(tau) == 0:
        return float(result)
    return result


def _lagrange_matrix(tau: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """(n_noeuds, *tau.shape): toutes les bases évaluées aux abscisses."""
    return np.stack([lagrange_weight(j, tau, nodes) for j in range(nodes.size)])


# ============================================================================
# QUADRATURE
# ============================================================================

def _inner(points: np.ndarray, lower: float, upper: float) -> np.ndarray:
    """Points triés strictement intérieurs à (lower, upper)."""
    start = np.searchsorted(points, lower, side='right')
    stop = np.searchsorted(points, upper, side='left')
    return points[start:stop]


def _piece_bounds(sched: NoiseSchedule, rep: Reparameterisation, lower: float, upper: float,
                  subdivisions: int) -> Tuple[np.ndarray, np.ndarray]:
    points = np.concatenate([
        [lower, upper],
        np.linspace(lower, upper, subdivisions + 1)[1:-1],
        _inner(sched.knots, lower, upper),
        _inner(GRADING_POINTS, lower, upper),
        _inner(rep.breakpoints(), lower, upper),
    ])
    points = np.unique(points)
    keep = np.concatenate([[True], np.diff(points) > MERGE_TOLERANCE])
    points = points[keep]
    points[-1] = upper
    if points.size < 2:
        points = np.array([lower, upper])
    return points[:-1], points[1:]


def _quadrature_rule(sched: NoiseSchedule, left: np.ndarray, right: np.ndarray
                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Abscisses τ (P, 4), poids dτ (P, 4) et pente de a_t par morceau (P, 1)."""
    unit = 0.5 * (GAUSS_NODES + 1.0)
    half_weights = 0.5 * GAUSS_WEIGHTS
    width = (right - left)[:, None]

    tau = left[:, None] + width * unit[None, :]
    weights = width * half_weights[None, :]

    # Morceau [0, ℓ]: τ = ℓu², dτ = 2ℓu du (lisse l'intégrande en 1/√τ)
    from_zero = left == 0.0
    if np.any(from_zero):
        tau[from_zero] = width[from_zero] * (unit * unit)[None, :]
        weights[from_zero] = 2.0 * width[from_zero] * unit[None, :] * half_weights[None, :]

    middle = 0.5 * (left + right)
    segment = np.clip(np.floor(middle * sched.n_discrete).astype(np.int64), 0, sched.n_discrete - 1)
    slopes = sched.segment_slopes[segment][:, None]
    return tau, weights, slopes


def _weighted_integrals(sched: NoiseSchedule, rep: Reparameterisation, t_from: float, t_to: float,
                        weight_rows: Callable[[np.ndarray], np.ndarray], subdivisions: int) -> np.ndarray:
    """
    ∫_{t_from}^{t_to} ½Ψ(t_to, τ) g_τ² K_τ⁻¹ w_m(τ) dτ pour chaque ligne m de weight_rows(τ).
    Intégrale orientée: négative quand t_to < t_from et l'intégrande positive.
    """
    lower, upper = min(t_from, t_to), max(t_from, t_to)
    if upper == lower:
        return np.zeros(weight_rows(np.array([[lower]])).shape[0])

    left, right = _piece_bounds(sched, rep, lower, upper, subdivisions)
    tau, weights, slopes = _quadrature_rule(sched, left, right)

    kernel = sched.transfer_kernel(t_to, tau, slopes) * _inverse_k(rep, sched, tau)
    rows = weight_rows(tau)
    integrals = np.sum(rows * (kernel * weights)[None, :, :], axis=(1, 2))
    return integrals if t_to > t_from else -integrals


def kernel_integral(sched: NoiseSchedule, rep: Reparameterisation, t_from: float, t_to: float,
                    weight_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                    subdivisions: int = 32) -> float:
    """
    ∫_{t_from}^{t_to} ½Ψ(t_to, τ) g_τ² K_τ⁻¹ w(τ) dτ, w ≡ 1 par défaut.

    Exemple:
        kernel_integral(s, Reparameterisation('sigma'), t_i, t_prev) ≈ σ_prev − Ψ(t_prev, t_i)·σ_i
    """
    if subdivisions < 1:
        raise InvalidParameterError(f"subdivisions doit être ≥ 1 (reçu {subdivisions})")
    if weight_fn is None:
        weight_fn = np.ones_like
    values = _weighted_integrals(
        sched, rep, float(t_from), float(t_to),
        lambda tau: np.asarray(weight_fn(tau), dtype=np.float64)[None, ...],
        subdivisions,
    )
    return float(values[0])


def step_coefficients(sched: NoiseSchedule, rep: Reparameterisation, t_cur: float, t_next: float,
                      nodes: Sequence[float], subdivisions: int = 32) -> np.ndarray:
    """
    Coefficients (C_0, …, C_r') d'un pas t_cur → t_next sur les noeuds d'historique
    nodes[j] = t_{i+j}. Un pas de largeur nulle rend des zéros.
    """
    node_arr = _check_nodes(nodes)
    if t_cur == t_next:
        return np.zeros(node_arr.size)
    return _weighted_integrals(
        sched, rep, float(t_cur), float(t_next),
        lambda tau: _lagrange_matrix(tau, node_arr),
        subdivisions,
    )


# ============================================================================
# TABLE DE COEFFICIENTS
# ============================================================================

@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """
    coefficients[k] contient (C_0, …, C_r') du k-ème pas (de times[k] vers times[k+1]),
    avec r' = min(order, k): démarrage à l'ordre maximal réalisable.
    """

    grid: 'TimeGrid'
    order: int
    reparam: Reparameterisation
    coefficients: Tuple[np.ndarray, ...]
    quadrature_subdivisions: int

    @property
    def n_steps(self) -> int:
        return len(self.coefficients)

    def rows(self) -> Iterator[List]:
        """Lignes (i, t_i, t_prev, j, C_ij) avec i = N − k."""
        times = self.grid.times
        n_steps = self.n_steps
        for k, row in enumerate(self.coefficients):
            for j, value in enumerate(row):
                yield [n_steps - k, float(times[k]), float(times[k + 1]), j, float(value)]


def compute_coefficients(grid: 'TimeGrid', r: int, rep: Reparameterisation, sched: NoiseSchedule,
                         subdivisions: int = 32) -> CoefficientTable:
    """
    Table des C_ij pour toute la grille.

    Raises:
        InvalidParameterError: r < 0, subdivisions < 1, grille non strictement décroissante
        MissingProfileError / SingularReparameterisationError: K inutilisable
    """
    if int(r) != r or r < 0:
        raise InvalidParameterError(f"L'ordre r doit être un entier ≥ 0 (reçu {r})")
    if int(subdivisions) != subdivisions or subdivisions < 1:
        raise InvalidParameterError(f"subdivisions doit être un entier ≥ 1 (reçu {subdivisions})")
    times = np.asarray(grid.times, dtype=np.float64)
    if times.size < 2 or np.any(np.diff(times) >= 0):
        raise InvalidParameterError("La grille doit être strictement décroissante")
    if rep.kind == REPARAM_SCORE_NORM and rep.profile is None:
        raise MissingProfileError("La reparamétrisation score-norm exige un profil s̄(t)")

    rows = []
    for k in range(times.size - 1):
        order = min(int(r), k)
        nodes = times[k - order:k + 1][::-1]
        rows.append(step_coefficients(sched, rep, times[k], times[k + 1], nodes, int(subdivisions)))

    logger.debug(f"Coefficients calculés: {len(rows)} pas, r={r}, K={rep.kind}")
    return CoefficientTable(
        grid=grid,
        order=int(r),
        reparam=rep,
        coefficients=tuple(rows),
        quadrature_subdivisions=int(subdivisions),
    )

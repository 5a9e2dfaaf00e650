# -*- coding: utf-8 -*-
"""
Exceptions du banc d'essai DEIS.

Chaque famille correspond à un code de sortie de la CLI:
    - ConfigError        → 2
    - NumericalError     → 3
    - ArtifactExistsError / OSError → 1
"""
from typing import Optional


class DEISError(Exception):
    """Racine de toutes les erreurs du projet."""

    exit_code = 1


# ============================================================================
# CONFIGURATION
# ============================================================================

class ConfigError(DEISError):
    """Fichier de configuration invalide. `key_path` indique la clé fautive (ex: 'sweep.nfe')."""

    exit_code = 2

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"[{key_path}] {message}")


# ============================================================================
# ERREURS NUMÉRIQUES
# ============================================================================

class NumericalError(DEISError):
    exit_code = 3


class InvalidParameterError(NumericalError, ValueError):
    pass


class OutOfRangeTimeError(NumericalError, ValueError):
    pass


class DimensionMismatchError(NumericalError, ValueError):
    pass


class ShapeMismatchError(NumericalError, ValueError):
    pass


class EmptyBatchError(NumericalError, ValueError):
    pass


class DegenerateDensityError(NumericalError):
    """Une variance v_k(t) est nulle: la densité bruitée n'existe pas."""


class NotSingleGaussianError(NumericalError, ValueError):
    pass


class MissingProfileError(NumericalError, ValueError):
    pass


class DuplicateNodesError(NumericalError, ValueError):
    pass


class SingularReparameterisationError(NumericalError):
    """K(τ) s'annule (ou n'est pas fini) sur un intervalle d'intégration."""


class TableGridMismatchError(NumericalError, ValueError):
    pass


class NonFiniteStateError(NumericalError):
    """L'état de l'échantillonneur contient NaN/inf après un pas."""

    def __init__(self, step: int, sampler: str = 'deis', detail: Optional[str] = None):
        self.step = step
        self.sampler = sampler
        message = f"État non fini après le pas {step} ({sampler})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


# ============================================================================
# ENTRÉES / SORTIES
# ============================================================================

class ArtifactExistsError(DEISError):
    """Un artefact existe déjà: aucune commande ne réécrit un fichier produit précédemment."""

    exit_code = 1

# -*- coding: utf-8 -*-
"""
Discipline des graines.

Chaque trajectoire tire ses nombres d'un flux indépendant indexé par
(graine, usage, indice de trajectoire). Découper un lot entre plusieurs
threads ne change donc aucun tirage.
"""
import zlib

import numpy as np

from .exceptions import InvalidParameterError

# Usages connus
PURPOSE_EVAL = 'eval'
PURPOSE_PROFILE = 'profile'
PURPOSE_REFERENCE = 'reference'
PURPOSE_PROJECTION = 'projection'


def purpose_code(purpose: str) -> int:
    """Entier stable dérivé du nom d'usage (CRC32)."""
    return zlib.crc32(purpose.encode('utf-8'))


def trajectory_rng(seed: int, index: int, purpose: str) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise InvalidParameterError(f"Graine et indice doivent être ≥ 0 (seed={seed}, index={index})")
    sequence = np.random.SeedSequence([int(seed), purpose_code(purpose), int(index)])
    return np.random.default_rng(sequence)


def standard_normal_batch(seed: int, batch: int, dim: int, purpose: str = PURPOSE_EVAL,
                          start: int = 0) -> np.ndarray:
    """
    Lot (batch, dim) de N(0, I), ligne k tirée du flux de la trajectoire start + k.

    Exemple:
        standard_normal_batch(0, 4, 2)[1] == standard_normal_batch(0, 1, 2, start=1)[0]
    """
    if batch < 1 or dim < 1:
        raise InvalidParameterError(f"batch et dim doivent être ≥ 1 (batch={batch}, dim={dim})")
    rows = [trajectory_rng(seed, start + k, purpose).standard_normal(dim) for k in range(batch)]
    return np.vstack(rows)

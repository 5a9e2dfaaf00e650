# -*- coding: utf-8 -*-
"""
Écriture des artefacts (CSV / JSON).

Chaque fichier commence par une ligne de commentaire portant le hash de la
configuration et la graine. L'écriture passe par un fichier temporaire du même
répertoire puis un renommage; un artefact existant n'est jamais remplacé.
"""
import csv
import io
import json
import logging
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from .exceptions import ArtifactExistsError

logger = logging.getLogger(__name__)


class ArtifactWriter:
    """
    Écrit les artefacts d'une exécution dans un répertoire.

    Args:
        directory: répertoire cible (créé si besoin)
        config_hash: hash de la configuration
        seed: graine pertinente pour la commande
    """

    def __init__(self, directory: Union[str, Path], config_hash: str, seed: Optional[int]):
        self.directory = Path(directory)
        self.config_hash = config_hash
        self.seed = seed
        self.written: List[Path] = []
        self.directory.mkdir(parents=True, exist_ok=True)

    def header_fields(self, extra: Optional[Dict[str, str]] = None) -> Dict[str, str]:
        fields = {
            'config_hash': self.config_hash,
            'seed': '' if self.seed is None else str(self.seed),
            'created': datetime.now().isoformat(timespec='seconds'),
        }
        fields.update(extra or {})
        return fields

    def header_line(self, extra: Optional[Dict[str, str]] = None) -> str:
        return '# ' + ' '.join(f"{key}={value}" for key, value in self.header_fields(extra).items())

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                  extra: Optional[Dict[str, str]] = None) -> Path:
        buffer = io.StringIO()
        buffer.write(self.header_line(extra) + '\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(value) if isinstance(value, float) else value for value in row])
        return self._atomic_write(name, buffer.getvalue())

    def write_json(self, name: str, payload: Dict[str, Any], extra: Optional[Dict[str, str]] = None) -> Path:
        document = {'header': self.header_fields(extra)}
        document.update(payload)
        return self._atomic_write(name, json.dumps(document, indent=2, sort_keys=False) + '\n')

    def _atomic_write(self, name: str, text: str) -> Path:
        target = self.directory / name
        if target.exists():
            raise ArtifactExistsError(f"L'artefact {target} existe déjà")

        descriptor, temporary = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.", suffix='.tmp')
        try:
            with os.fdopen(descriptor, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
            os.replace(temporary, target)
        except BaseException:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise

        self.written.append(target)
        logger.info(f"Artefact écrit: {target}")
        return target


def read_csv_body(path: Union[str, Path]) -> str:
    """Contenu d'un CSV sans ses lignes de commentaire (comparaisons de déterminisme)."""
    with open(path, 'r', encoding='utf-8') as handle:
        return ''.join(line for line in handle if not line.startswith('#'))

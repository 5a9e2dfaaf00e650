# -*- coding: utf-8 -*-
"""
Registre des exécutions de la CLI.
Chaque appel de pipeline.run laisse une ligne ExperimentRun (commande, hash, graine,
statut, artefacts, durée).
"""
import logging
from typing import Any, Dict, List, Optional

from django.db import DatabaseError
from django.db.models import Count

from .models import ExperimentRun

logger = logging.getLogger(__name__)


class RunLedger:
    """
    Enregistre les exécutions en base. Si la base n'est pas migrée, l'exécution
    continue et un avertissement est journalisé.
    """

    def record(self, run_data: Dict[str, Any]) -> Optional[ExperimentRun]:
        """
        Args:
            run_data: {
                'command': nom de la sous-commande,
                'config_path': chemin du fichier de configuration,
                'config_hash': hash canonique ('' si la config est invalide),
                'seed': graine pertinente,
                'status': un des ExperimentRun.STATUS_*,
                'exit_code': code de sortie,
                'artifacts': liste de chemins,
                'message': message d'erreur éventuel,
                'duration_ms': durée
            }

        Returns:
            ExperimentRun ou None si la base est indisponible
        """
        try:
            run = ExperimentRun.objects.create(
                command=run_data['command'],
                config_path=str(run_data.get('config_path', ''))[:500],
                config_hash=run_data.get('config_hash', ''),
                seed=run_data.get('seed'),
                status=run_data['status'],
                exit_code=run_data.get('exit_code', 0),
                artifacts=[str(path) for path in run_data.get('artifacts', [])],
                message=run_data.get('message', ''),
                duration_ms=run_data.get('duration_ms', 0),
            )
        except DatabaseError as exc:
            logger.warning(f"Registre indisponible (base non migrée ?): {exc}")
            return None

        logger.info(f"Exécution {run.id} enregistrée: {run.command} [{run.status}] en {run.duration_ms} ms")
        return run

    def get_recent_runs(self, limit: int = 10, command: Optional[str] = None) -> List[ExperimentRun]:
        runs = ExperimentRun.objects.all()
        if command:
            runs = runs.filter(command=command)
        return list(runs[:limit])

    def get_statistics(self) -> Dict[str, Any]:
        total = ExperimentRun.objects.count()
        if not total:
            return {'total_runs': 0}
        by_status = {
            row['status']: row['n']
            for row in ExperimentRun.objects.order_by().values('status').annotate(n=Count('id'))
        }
        return {
            'total_runs': total,
            'by_status': by_status,
            'success_rate': round(by_status.get(ExperimentRun.STATUS_SUCCESS, 0) / total * 100, 2),
        }

    def generate_report(self, limit: int = 20) -> str:
        stats = self.get_statistics()
        lines = [
            "=" * 80,
            "REGISTRE DES EXÉCUTIONS",
            "=" * 80,
            f"Total: {stats['total_runs']}",
        ]
        if stats['total_runs']:
            lines.append(f"Taux de succès: {stats['success_rate']}%")
            for status, count in sorted(stats['by_status'].items()):
                lines.append(f"  {status}: {count}")
            lines.append("-" * 80)
            for run in self.get_recent_runs(limit):
                lines.append(
                    f"#{run.id} {run.created_at:%Y-%m-%d %H:%M:%S} {run.command:<9} "
                    f"{run.status:<16} hash={run.config_hash or '-'} seed={run.seed} "
                    f"({run.duration_ms} ms, {len(run.artifacts)} artefact(s))"
                )
        lines.append("=" * 80)
        return '\n'.join(lines)


# Instance globale
run_ledger = RunLedger()

# -*- coding: utf-8 -*-
"""
Enchaînement des sous-commandes: profile → coeffs → sample / converge / curves.

run() charge la configuration, exécute la sous-commande, écrit les artefacts et
consigne l'exécution dans le registre. Les erreurs sont traduites en codes de sortie:
0 succès, 1 entrée/sortie, 2 configuration, 3 calcul.
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from .artifacts import ArtifactWriter
from .coeffs import COEFFICIENT_COLUMNS, REPARAM_SCORE_NORM
from .config import ExperimentConfig, load_config
from .exceptions import ArtifactExistsError, ConfigError, DEISError, InvalidParameterError, NumericalError
from .metrics import CURVE_COLUMNS, REPORT_COLUMNS, convergence_study, normalisation_control, score_curves
from .models import ExperimentRun
from .oracle import MixtureScore
from .run_ledger import run_ledger
from .samplers import SAMPLER_KINDS, SamplerSpec, build_coefficients, make_time_grid, run_sampler
from .schedule import NoiseSchedule
from .score_profile import (
    PROFILE_COLUMNS,
    ScoreMagnitudeProfile,
    collect_profile,
    profile_metadata,
    profile_rows,
    read_profile_csv,
)
from .seeding import PURPOSE_EVAL, standard_normal_batch

logger = logging.getLogger(__name__)

COMMAND_PROFILE = 'profile'
COMMAND_COEFFS = 'coeffs'
COMMAND_SAMPLE = 'sample'
COMMAND_CONVERGE = 'converge'
COMMAND_CURVES = 'curves'
COMMANDS = (COMMAND_PROFILE, COMMAND_COEFFS, COMMAND_SAMPLE, COMMAND_CONVERGE, COMMAND_CURVES)

PROFILE_FILE = 'profile.csv'
REPORT_CSV = 'report.csv'
REPORT_JSON = 'report.json'
CURVES_FILE = 'curves.csv'


@dataclass
class RunResult:
    command: str
    exit_code: int = 0
    status: str = ''
    artifacts: List[Path] = field(default_factory=list)
    message: str = ''
    config_hash: str = ''
    seed: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


# ============================================================================
# UTILITAIRES
# ============================================================================

def _destination(out: Optional[str], config: ExperimentConfig, default_name: str) -> Tuple[Path, str]:
    """--out désigne un fichier; sans lui, le fichier par défaut du répertoire de sortie."""
    if out:
        path = Path(out)
        return path.parent, path.name
    return Path(config.output_dir), default_name


def _resolve_profile(config: ExperimentConfig, writer: ArtifactWriter, score: MixtureScore,
                     sched: NoiseSchedule, profile_path: Optional[str]) -> ScoreMagnitudeProfile:
    """
    Ordre de priorité: --profile, puis [profile] path, sinon collecte (écrite dans profile.csv).
    """
    path = profile_path or config.profile.path
    if path:
        logger.info(f"Profil relu depuis {path}")
        return read_profile_csv(path, config.profile.truncation_threshold)

    profile = collect_profile(
        score, sched, config.profile.nfe, config.profile.batch, config.profile.seed,
        config.profile.truncation_threshold, config.workers, config.subdivisions,
    )
    writer.write_csv(PROFILE_FILE, PROFILE_COLUMNS, profile_rows(profile), profile_metadata(profile))
    return profile


def _sampler_from_options(config: ExperimentConfig, options: Dict[str, Any]) -> SamplerSpec:
    """
    --sampler accepte un nom de [sampler:<nom>] ou un type (deis|euler|ddim);
    --order/--reparam/--grid remplacent les valeurs correspondantes.
    """
    requested = options.get('sampler')
    known = {spec.name: spec for spec in config.samplers}
    if requested in known:
        base = known[requested]
    elif requested in SAMPLER_KINDS:
        base = SamplerSpec(name=requested, kind=requested)
    elif requested:
        raise ConfigError('--sampler', f"Ni un type ({', '.join(SAMPLER_KINDS)}) ni un nom configuré: {requested}")
    elif config.samplers:
        base = config.samplers[0]
    else:
        base = SamplerSpec(name='deis', kind='deis')

    try:
        return SamplerSpec(
            name=base.name,
            kind=base.kind,
            order=base.order if options.get('order') is None else options['order'],
            reparam=options.get('reparam') or base.reparam,
            grid=options.get('grid') or base.grid,
        )
    except InvalidParameterError as exc:
        raise ConfigError('--sampler', str(exc))


def _positive_option(options: Dict[str, Any], key: str, default: int) -> int:
    value = options.get(key)
    if value is None:
        return default
    if value < 1:
        raise ConfigError(f"--{key}", f"Doit être ≥ 1 (reçu {value})")
    return value


# ============================================================================
# SOUS-COMMANDES
# ============================================================================

def _run_profile(config: ExperimentConfig, options: Dict[str, Any], result: RunResult) -> List[Path]:
    sched = config.build_schedule()
    score = config.build_score(sched)
    directory, name = _destination(options.get('out'), config, PROFILE_FILE)
    result.seed = config.profile.seed
    writer = ArtifactWriter(directory, config.config_hash, result.seed)

    profile = collect_profile(
        score, sched, config.profile.nfe, config.profile.batch, config.profile.seed,
        config.profile.truncation_threshold, config.workers, config.subdivisions,
    )
    writer.write_csv(name, PROFILE_COLUMNS, profile_rows(profile), profile_metadata(profile))
    return writer.written


def _run_coeffs(config: ExperimentConfig, options: Dict[str, Any], result: RunResult) -> List[Path]:
    spec = _sampler_from_options(config, {**options, 'sampler': options.get('sampler') or 'deis'})
    if spec.kind != 'deis':
        raise ConfigError('--sampler', "Seul DEIS a une table de coefficients")
    nfe = _positive_option(options, 'nfe', config.nfe_list[0])
    default_name = f"coeffs-{spec.name}-r{spec.order}-{spec.reparam}-nfe{nfe}.csv"
    directory, name = _destination(options.get('out'), config, default_name)
    result.seed = config.profile.seed if spec.needs_profile else None
    writer = ArtifactWriter(directory, config.config_hash, result.seed)

    sched = config.build_schedule()
    profile = None
    if spec.needs_profile:
        profile = _resolve_profile(config, writer, config.build_score(sched), sched, options.get('profile'))

    table = build_coefficients(spec, make_time_grid(spec.grid, nfe), sched, profile, config.subdivisions)
    writer.write_csv(name, COEFFICIENT_COLUMNS, table.rows(), {
        'order': str(spec.order),
        'reparam': spec.reparam,
        'grid': spec.grid,
        'subdivisions': str(config.subdivisions),
    })
    return writer.written


def _run_sample(config: ExperimentConfig, options: Dict[str, Any], result: RunResult) -> List[Path]:
    spec = _sampler_from_options(config, options)
    nfe = _positive_option(options, 'nfe', config.nfe_list[0])
    batch = _positive_option(options, 'batch', config.batch)
    seed = config.eval_seed if options.get('seed') is None else options['seed']
    if seed < 0:
        raise ConfigError('--seed', "La graine doit être ≥ 0")

    directory, name = _destination(options.get('out'), config, f"samples-{spec.name}-nfe{nfe}.csv")
    result.seed = seed
    writer = ArtifactWriter(directory, config.config_hash, seed)

    sched = config.build_schedule()
    score = config.build_score(sched)
    profile = _resolve_profile(config, writer, score, sched, options.get('profile')) if spec.needs_profile else None

    x1 = standard_normal_batch(seed, batch, score.dim, PURPOSE_EVAL)
    run = run_sampler(spec, x1, nfe, score, sched, profile, config.workers, config.subdivisions, seed)
    columns = ['trajectory'] + [f"x{d}" for d in range(score.dim)]
    rows = ([index] + [float(v) for v in sample] for index, sample in enumerate(run.samples))
    writer.write_csv(name, columns, rows, {
        'sampler': spec.kind,
        'order': str(spec.order),
        'reparam': spec.reparam_label,
        'grid': spec.grid,
        'nfe': str(run.nfe),
    })
    return writer.written


def _run_converge(config: ExperimentConfig, options: Dict[str, Any], result: RunResult) -> List[Path]:
    if not config.samplers:
        raise ConfigError('sweep.samplers', "Aucun échantillonneur à comparer")
    directory = Path(options.get('output_dir') or config.output_dir)
    result.seed = config.eval_seed
    writer = ArtifactWriter(directory, config.config_hash, config.eval_seed)

    profile = None
    needs_profile = any(spec.needs_profile for spec in config.samplers)
    if needs_profile:
        sched = config.build_schedule()
        profile = _resolve_profile(config, writer, config.build_score(sched), sched, options.get('profile'))

    reports = convergence_study(config, profile)
    if all(not report.points for report in reports):
        raise NumericalError("Toutes les cellules du balayage ont échoué")

    rows = []
    for report in reports:
        values = dict(report.points)
        for nfe in config.nfe_list:
            value = values.get(nfe, float('nan'))
            rows.append([report.sampler, report.reparam, nfe, report.metric, value, report.seed])

    payload: Dict[str, Any] = {
        'nfe': list(config.nfe_list),
        'batch': config.batch,
        'reports': [report.to_dict() for report in reports],
    }
    if needs_profile:
        control = normalisation_control(config)
        payload['control'] = {
            'kind': control['kind'],
            'order': control['order'],
            'level': control['level'],
            'max_abs_diff': {str(n): d for n, d in control['max_abs_diff'].items()},
        }

    writer.write_csv(REPORT_CSV, REPORT_COLUMNS, rows)
    writer.write_json(REPORT_JSON, payload)
    return writer.written


def _run_curves(config: ExperimentConfig, options: Dict[str, Any], result: RunResult) -> List[Path]:
    directory, name = _destination(options.get('out'), config, CURVES_FILE)
    result.seed = config.profile.seed
    writer = ArtifactWriter(directory, config.config_hash, result.seed)

    sched = config.build_schedule()
    score = config.build_score(sched)
    profile = _resolve_profile(config, writer, score, sched, options.get('profile'))
    writer.write_csv(name, CURVE_COLUMNS, score_curves(score, sched, profile), {'oracle': score.describe()})
    return writer.written


HANDLERS: Dict[str, Callable[[ExperimentConfig, Dict[str, Any], RunResult], List[Path]]] = {
    COMMAND_PROFILE: _run_profile,
    COMMAND_COEFFS: _run_coeffs,
    COMMAND_SAMPLE: _run_sample,
    COMMAND_CONVERGE: _run_converge,
    COMMAND_CURVES: _run_curves,
}


# ============================================================================
# POINT D'ENTRÉE
# ============================================================================

def run(config_path: str, command: str, **options) -> RunResult:
    """
    Exécute une sous-commande.

    Args:
        config_path: fichier INI
        command: profile | coeffs | sample | converge | curves
        **options: drapeaux de la ligne de commande (out, output_dir, profile, workers,
                   sampler, order, reparam, nfe, grid, batch, seed)

    Returns:
        RunResult (code de sortie, artefacts écrits, message)
    """
    started = time.perf_counter()
    result = RunResult(command=command)

    try:
        if command not in HANDLERS:
            raise ConfigError('<commande>', f"Sous-commande inconnue: {command}")
        config = load_config(config_path)
        workers = options.get('workers')
        if workers is not None:
            if workers < 1:
                raise ConfigError('--workers', "Doit être ≥ 1")
            config = config.with_overrides(workers=workers)
        result.config_hash = config.config_hash

        logger.info(f"▶ {command} ({config_path}, hash {result.config_hash})")
        result.artifacts = HANDLERS[command](config, options, result)
        result.status = ExperimentRun.STATUS_SUCCESS
        result.message = f"{len(result.artifacts)} artefact(s) écrit(s)"
        logger.info(f"✅ {command}: {result.message}")

    except ConfigError as exc:
        logger.error(f"❌ Configuration invalide: {exc}")
        result.status, result.exit_code, result.message = ExperimentRun.STATUS_CONFIG_ERROR, exc.exit_code, str(exc)
    except NumericalError as exc:
        logger.exception(f"❌ Échec du calcul ({command}): {exc}")
        result.status, result.exit_code, result.message = ExperimentRun.STATUS_NUMERICAL_ERROR, exc.exit_code, str(exc)
    except (ArtifactExistsError, OSError) as exc:
        logger.error(f"❌ Entrée/sortie ({command}): {exc}")
        result.status, result.exit_code, result.message = ExperimentRun.STATUS_IO_ERROR, 1, str(exc)
    except DEISError as exc:
        logger.exception(f"❌ {command}: {exc}")
        result.status, result.exit_code, result.message = ExperimentRun.STATUS_NUMERICAL_ERROR, exc.exit_code, str(exc)
    except Exception as exc:
        logger.exception(f"❌ Erreur inattendue ({command}): {exc!r}")
        result.status, result.exit_code = ExperimentRun.STATUS_NUMERICAL_ERROR, NumericalError.exit_code
        result.message = f"{type(exc).__name__}: {exc}"

    finally:
        run_ledger.record({
            'command': command,
            'config_path': config_path,
            'config_hash': result.config_hash,
            'seed': result.seed,
            'status': result.status,
            'exit_code': result.exit_code,
            'artifacts': result.artifacts,
            'message': result.message,
            'duration_ms': int((time.perf_counter() - started) * 1000),
        })

    return result

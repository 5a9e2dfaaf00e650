# -*- coding: utf-8 -*-
"""
Fichier de configuration d'une expérience (format INI, sections à clés plates).

Exemple minimal:

    [schedule]
    beta_min = 1e-4
    beta_max = 2e-2
    n_discrete = 1000

    [oracle]
    kind = gmm
    dim = 2
    components =
        0.5 | -1 0 | 0.3
        0.5 |  1 0 | 0.3

    [sweep]
    samplers = deis3, deis3_sn, euler
    nfe = 5, 10, 20
    batch = 256
    eval_seed = 0

    [sampler:deis3]
    kind = deis
    order = 3
    reparam = sigma

Toute clé absente prend la valeur par défaut définie dans settings.py.
"""
import configparser
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, TypeVar, Union

from django.conf import settings

from .coeffs import REPARAM_KINDS
from .exceptions import ConfigError, DEISError
from .oracle import GaussianMixture, MixtureComponent, MixtureScore
from .samplers import GRID_ALIASES, GRID_KINDS, SAMPLER_KINDS, SamplerSpec
from .schedule import NoiseSchedule, make_vp_linear_schedule

logger = logging.getLogger(__name__)

ORACLE_GAUSSIAN = 'gaussian'
ORACLE_GMM = 'gmm'
ORACLE_KINDS = (ORACLE_GAUSSIAN, ORACLE_GMM)

SAMPLER_SECTION_PREFIX = 'sampler:'

KNOWN_KEYS = {
    'schedule': {'beta_min', 'beta_max', 'n_discrete'},
    'oracle': {'kind', 'dim', 'components', 'mean', 'std'},
    'sweep': {'samplers', 'nfe', 'batch', 'eval_seed', 'n_projections', 'workers'},
    'profile': {'nfe', 'batch', 'seed', 'truncation_threshold', 'path'},
    'coeffs': {'subdivisions'},
    'output': {'directory'},
}
SAMPLER_KEYS = {'kind', 'order', 'reparam', 'grid'}

# Tolérance sur la somme des poids écrits à la main (ils sont ensuite renormalisés)
WEIGHT_SUM_TOLERANCE = 1e-6

T = TypeVar('T')


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class ScheduleConfig:
    beta_min: float
    beta_max: float
    n_discrete: int


@dataclass(frozen=True)
class OracleConfig:
    kind: str
    dim: int
    components: Tuple[MixtureComponent, ...]


@dataclass(frozen=True)
class ProfileConfig:
    nfe: int
    batch: int
    seed: int
    truncation_threshold: float
    path: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    schedule: ScheduleConfig
    oracle: OracleConfig
    samplers: Tuple[SamplerSpec, ...]
    nfe_list: Tuple[int, ...]
    batch: int
    eval_seed: int
    n_projections: int
    workers: int
    profile: ProfileConfig
    subdivisions: int
    output_dir: str

    def build_schedule(self) -> NoiseSchedule:
        return make_vp_linear_schedule(self.schedule.beta_min, self.schedule.beta_max, self.schedule.n_discrete)

    def build_mixture(self) -> GaussianMixture:
        return GaussianMixture(self.oracle.components)

    def build_score(self, sched: Optional[NoiseSchedule] = None) -> MixtureScore:
        return MixtureScore(self.build_mixture(), sched or self.build_schedule())

    def sampler(self, name: str) -> SamplerSpec:
        for spec in self.samplers:
            if spec.name == name:
                return spec
        raise ConfigError('sweep.samplers', f"Échantillonneur inconnu: {name}")

    def to_dict(self) -> Dict:
        """Forme canonique (sans répertoire de sortie ni nombre de threads: ils ne changent aucun résultat)."""
        payload = asdict(self)
        payload.pop('output_dir')
        payload.pop('workers')
        return payload

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]

    def with_overrides(self, **changes) -> 'ExperimentConfig':
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


# ============================================================================
# LECTURE
# ============================================================================

def _get(parser: configparser.ConfigParser, section: str, key: str, convert: Callable[[str], T],
         default: T) -> T:
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    try:
        return convert(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{key}", f"Valeur invalide '{raw}': {exc}")


def _int_list(raw: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in raw.replace(',', ' ').split())


def _name_list(raw: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in raw.split(',') if item.strip())


def _float_vector(raw: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in raw.replace(',', ' ').split())


def _require(condition: bool, key_path: str, message: str):
    if not condition:
        raise ConfigError(key_path, message)


def _check_known_keys(parser: configparser.ConfigParser):
    for section in parser.sections():
        if section.startswith(SAMPLER_SECTION_PREFIX):
            allowed = SAMPLER_KEYS
        elif section in KNOWN_KEYS:
            allowed = KNOWN_KEYS[section]
        else:
            raise ConfigError(section, "Section inconnue")
        for key in parser.options(section):
            _require(key in allowed, f"{section}.{key}", "Clé inconnue")


def _parse_components(parser: configparser.ConfigParser, kind: str, dim: int) -> Tuple[MixtureComponent, ...]:
    if kind == ORACLE_GAUSSIAN and not parser.has_option('oracle', 'components'):
        mean = _get(parser, 'oracle', 'mean', _float_vector, tuple(0.0 for _ in range(dim)))
        std = _get(parser, 'oracle', 'std', float, 1.0)
        _require(len(mean) == dim, 'oracle.mean', f"{len(mean)} coordonnées pour dim={dim}")
        _require(std > 0, 'oracle.std', "L'écart-type doit être > 0")
        return (MixtureComponent(1.0, mean, std),)

    _require(parser.has_option('oracle', 'components'), 'oracle.components', "Composantes manquantes")
    components = []
    lines = [line.strip() for line in parser.get('oracle', 'components').splitlines() if line.strip()]
    for index, line in enumerate(lines):
        key_path = f"oracle.components[{index}]"
        fields = [part.strip() for part in line.split('|')]
        _require(len(fields) == 3, key_path, f"Format attendu 'poids | moyenne | écart-type', reçu '{line}'")
        try:
            weight, mean, std = float(fields[0]), _float_vector(fields[1]), float(fields[2])
        except ValueError as exc:
            raise ConfigError(key_path, str(exc))
        _require(len(mean) == dim, key_path, f"{len(mean)} coordonnées pour dim={dim}")
        _require(weight > 0, key_path, "Le poids doit être > 0")
        _require(std > 0, key_path, "L'écart-type doit être > 0")
        components.append(MixtureComponent(weight, mean, std))

    _require(bool(components), 'oracle.components', "Au moins une composante")
    if kind == ORACLE_GAUSSIAN:
        _require(len(components) == 1, 'oracle.components', "L'oracle gaussien a une seule composante")
    total = sum(c.weight for c in components)
    _require(abs(total - 1.0) <= WEIGHT_SUM_TOLERANCE, 'oracle.components', f"Poids de somme {total}")
    return tuple(MixtureComponent(c.weight / total, c.mean, c.std) for c in components)


def _parse_sampler(parser: configparser.ConfigParser, name: str) -> SamplerSpec:
    section = f"{SAMPLER_SECTION_PREFIX}{name}"
    _require(parser.has_section(section), section, f"Section manquante pour l'échantillonneur '{name}'")
    kind = _get(parser, section, 'kind', str, '')
    _require(kind in SAMPLER_KINDS, f"{section}.kind", f"Attendu: {', '.join(SAMPLER_KINDS)}")
    reparam = _get(parser, section, 'reparam', str, 'sigma')
    _require(reparam in REPARAM_KINDS, f"{section}.reparam", f"Attendu: {', '.join(REPARAM_KINDS)}")
    grid = _get(parser, section, 'grid', str, None)
    if grid is not None:
        _require(GRID_ALIASES.get(grid, grid) in GRID_KINDS, f"{section}.grid", f"Attendu: {', '.join(GRID_KINDS)}")
    order = _get(parser, section, 'order', int, 3)
    _require(order >= 0, f"{section}.order", "L'ordre doit être ≥ 0")
    return SamplerSpec(name=name, kind=kind, order=order, reparam=reparam, grid=grid)


def parse_config(text: str, source: str = '<texte>') -> ExperimentConfig:
    """
    Analyse et valide une configuration.

    Raises:
        ConfigError: avec le chemin de la clé fautive
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError('<fichier>', f"Syntaxe invalide: {exc}")
    _check_known_keys(parser)

    schedule = ScheduleConfig(
        beta_min=_get(parser, 'schedule', 'beta_min', float, settings.DEIS_BETA_MIN),
        beta_max=_get(parser, 'schedule', 'beta_max', float, settings.DEIS_BETA_MAX),
        n_discrete=_get(parser, 'schedule', 'n_discrete', int, settings.DEIS_N_DISCRETE),
    )
    _require(0.0 < schedule.beta_min < schedule.beta_max < 1.0, 'schedule.beta_max',
             "Il faut 0 < beta_min < beta_max < 1")
    _require(schedule.n_discrete >= 2, 'schedule.n_discrete', "n_discrete doit être ≥ 2")

    kind = _get(parser, 'oracle', 'kind', str, ORACLE_GAUSSIAN)
    _require(kind in ORACLE_KINDS, 'oracle.kind', f"Attendu: {', '.join(ORACLE_KINDS)}")
    dim = _get(parser, 'oracle', 'dim', int, 1)
    _require(dim >= 1, 'oracle.dim', "La dimension doit être ≥ 1")
    oracle = OracleConfig(kind=kind, dim=dim, components=_parse_components(parser, kind, dim))

    names = _get(parser, 'sweep', 'samplers', _name_list, ())
    _require(len(set(names)) == len(names), 'sweep.samplers', "Noms d'échantillonneurs répétés")
    samplers = tuple(_parse_sampler(parser, name) for name in names)

    nfe_list = _get(parser, 'sweep', 'nfe', _int_list, (10,))
    _require(len(nfe_list) > 0 and all(n >= 1 for n in nfe_list), 'sweep.nfe', "NFE entiers ≥ 1 attendus")
    _require(all(a < b for a, b in zip(nfe_list, nfe_list[1:])), 'sweep.nfe',
             "Les NFE doivent être strictement croissants")

    batch = _get(parser, 'sweep', 'batch', int, settings.DEIS_BATCH)
    _require(batch >= 1, 'sweep.batch', "batch doit être ≥ 1")
    eval_seed = _get(parser, 'sweep', 'eval_seed', int, settings.DEIS_EVAL_SEED)
    _require(eval_seed >= 0, 'sweep.eval_seed', "La graine doit être ≥ 0")
    n_projections = _get(parser, 'sweep', 'n_projections', int, settings.DEIS_N_PROJECTIONS)
    _require(n_projections >= 1, 'sweep.n_projections', "n_projections doit être ≥ 1")
    workers = _get(parser, 'sweep', 'workers', int, settings.DEIS_WORKERS)
    _require(workers >= 1, 'sweep.workers', "workers doit être ≥ 1")

    profile = ProfileConfig(
        nfe=_get(parser, 'profile', 'nfe', int, settings.DEIS_PROFILE_NFE),
        batch=_get(parser, 'profile', 'batch', int, settings.DEIS_PROFILE_BATCH),
        seed=_get(parser, 'profile', 'seed', int, settings.DEIS_PROFILE_SEED),
        truncation_threshold=_get(parser, 'profile', 'truncation_threshold', float,
                                  settings.DEIS_TRUNCATION_THRESHOLD),
        path=_get(parser, 'profile', 'path', str, None) or None,
    )
    _require(profile.nfe >= 2, 'profile.nfe', "La collecte demande nfe ≥ 2")
    _require(profile.batch >= 1, 'profile.batch', "batch doit être ≥ 1")
    _require(profile.seed >= 0, 'profile.seed', "La graine doit être ≥ 0")
    _require(profile.seed != eval_seed, 'profile.seed',
             "La graine du profil doit différer de la graine d'évaluation")
    _require(0.0 <= profile.truncation_threshold <= 1.0, 'profile.truncation_threshold',
             "Le seuil doit être dans [0, 1]")

    subdivisions = _get(parser, 'coeffs', 'subdivisions', int, settings.DEIS_QUADRATURE_SUBDIVISIONS)
    _require(subdivisions >= 1, 'coeffs.subdivisions', "subdivisions doit être ≥ 1")

    return ExperimentConfig(
        schedule=schedule,
        oracle=oracle,
        samplers=samplers,
        nfe_list=nfe_list,
        batch=batch,
        eval_seed=eval_seed,
        n_projections=n_projections,
        workers=workers,
        profile=profile,
        subdivisions=subdivisions,
        output_dir=_get(parser, 'output', 'directory', str, settings.DEIS_OUTPUT_DIR),
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Raises:
        ConfigError: fichier illisible ou invalide
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError('<fichier>', f"Lecture impossible de {path}: {exc}")
    config = parse_config(text, source=str(path))
    try:
        config.build_mixture()
    except DEISError as exc:
        raise ConfigError('oracle.components', str(exc))
    logger.info(f"Configuration chargée: {path} (hash {config.config_hash})")
    return config

from django.core.management.base import BaseCommand, CommandError

from sampling.config import load_config
from sampling.exceptions import ConfigError


class Command(BaseCommand):
    help = 'Validates an experiment config file without computing anything'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Experiment config file (INI)')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)

        self.stdout.write(self.style.SUCCESS(f'Configuration valide (hash {config.config_hash})'))
        self.stdout.write(f'  Oracle: {config.build_mixture().describe()}')
        self.stdout.write(f'  NFE: {", ".join(str(n) for n in config.nfe_list)}')
        for spec in config.samplers:
            self.stdout.write(f'  {spec.name}: {spec.kind} r={spec.order} K={spec.reparam_label} grille={spec.grid}')
        if not config.samplers:
            self.stdout.write(self.style.WARNING('  Aucun échantillonneur déclaré dans [sweep] samplers'))

from django.core.management.base import BaseCommand, CommandError

from sampling.pipeline import run


class PipelineCommand(BaseCommand):
    """Base des sous-commandes: --config obligatoire, --workers optionnel, erreurs → code de sortie."""

    pipeline_command = ''

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help="Fichier de configuration de l'expérience (INI)")
        parser.add_argument('--workers', type=int, help='Nombre de threads pour découper le lot')
        self.add_pipeline_arguments(parser)

    def add_pipeline_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        config_path = options.pop('config')
        result = run(config_path, self.pipeline_command, **options)
        if not result.ok:
            raise CommandError(result.message, returncode=result.exit_code)

        self.stdout.write(self.style.SUCCESS(f'{self.pipeline_command}: {result.message} (hash {result.config_hash})'))
        for path in result.artifacts:
            self.stdout.write(f'  {path}')

from django.core.management.base import BaseCommand

from sampling.run_ledger import run_ledger


class Command(BaseCommand):
    help = 'Lists the recorded runs of the pipeline commands'

    def add_arguments(self, parser):
        parser.add_argument('--limit', type=int, default=20)

    def handle(self, *args, **options):
        if not run_ledger.get_statistics()['total_runs']:
            self.stdout.write(self.style.WARNING('No runs recorded yet.'))
            return
        self.stdout.write(run_ledger.generate_report(options['limit']))

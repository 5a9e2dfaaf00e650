from sampling.management.pipeline_command import PipelineCommand


class Command(PipelineCommand):
    help = 'Sweeps every configured sampler over the NFE list and writes report.csv / report.json'
    pipeline_command = 'converge'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--profile', help='Existing profile CSV (skips the collection)')
        parser.add_argument('--output-dir', dest='output_dir', help='Directory of the reports')

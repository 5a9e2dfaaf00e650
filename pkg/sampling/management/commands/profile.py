from sampling.management.pipeline_command import PipelineCommand


class Command(PipelineCommand):
    help = 'Collects the empirical score-magnitude profile s_bar(t) and writes it as CSV'
    pipeline_command = 'profile'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--out', help='Output CSV (default: <output dir>/profile.csv)')

from sampling.management.pipeline_command import PipelineCommand


class Command(PipelineCommand):
    help = 'Writes the s_bar(t), sigma_t and s_bar * sigma curves as CSV'
    pipeline_command = 'curves'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--profile', help='Existing profile CSV')
        parser.add_argument('--out', help='Output CSV (default: <output dir>/curves.csv)')

from sampling.coeffs import REPARAM_KINDS
from sampling.management.pipeline_command import PipelineCommand
from sampling.samplers import GRID_ALIASES, GRID_KINDS


class Command(PipelineCommand):
    help = 'Dumps the DEIS-tAB coefficient table (i, t_i, t_prev, j, C_ij) as CSV'
    pipeline_command = 'coeffs'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--sampler', help='Configured DEIS sampler name (default: deis)')
        parser.add_argument('--nfe', type=int, help='Number of steps')
        parser.add_argument('--order', type=int, help='Polynomial order r')
        parser.add_argument('--reparam', choices=REPARAM_KINDS)
        parser.add_argument('--grid', choices=list(GRID_KINDS) + list(GRID_ALIASES))
        parser.add_argument('--profile', help='Existing profile CSV (score-norm)')
        parser.add_argument('--out', help='Output CSV')

from sampling.coeffs import REPARAM_KINDS
from sampling.management.pipeline_command import PipelineCommand
from sampling.samplers import GRID_ALIASES, GRID_KINDS


class Command(PipelineCommand):
    help = 'Runs one sampler on a batch of x_1 draws and writes the terminal samples'
    pipeline_command = 'sample'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--sampler', help='deis | euler | ddim, or a configured sampler name')
        parser.add_argument('--order', type=int, help='Polynomial order r (DEIS)')
        parser.add_argument('--reparam', choices=REPARAM_KINDS)
        parser.add_argument('--profile', help='Existing profile CSV (score-norm)')
        parser.add_argument('--nfe', type=int, help='Number of score evaluations')
        parser.add_argument('--grid', choices=list(GRID_KINDS) + list(GRID_ALIASES))
        parser.add_argument('--batch', type=int, help='Number of trajectories')
        parser.add_argument('--seed', type=int, help='Seed of the x_1 draws (default: eval_seed)')
        parser.add_argument('--out', help='Output CSV')

from toolkit.management.base import NnormCommand
from toolkit.nnorm_core import NormParams, check_axioms
from toolkit.serializers import AxiomReportSerializer


class Command(NnormCommand):
    help = 'Check the n-norm axioms on seeded random tuples'
    failure_message = 'Axiom violations found'

    def add_command_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--p', type=float, required=True)
        parser.add_argument('--d', type=int, required=True)
        parser.add_argument('--samples', type=int, default=1000)

    def run(self, config, options):
        params = NormParams.from_settings(options['n'], options['p'], options['d'])
        report = check_axioms(params, options['samples'], config.seed)
        return AxiomReportSerializer(report).data, report.passed

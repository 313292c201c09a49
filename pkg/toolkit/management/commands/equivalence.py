from toolkit.lp_equivalence import CSV_FIELDS, verify_equivalence_batch
from toolkit.management.base import NnormCommand
from toolkit.serializers import EquivalenceReportSerializer


class Command(NnormCommand):
    help = 'Verify the l^p equivalence bounds on seeded random samples'
    csv_fields = CSV_FIELDS
    failure_message = 'Equivalence bounds violated'

    def add_command_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--p', type=float, required=True)
        parser.add_argument('--samples', type=int, default=1000, help='Samples per dimension')
        parser.add_argument('--dims', help='Comma-separated dimensions (default: n, n+2, 8)')

    def run(self, config, options):
        dims = None
        if options['dims']:
            dims = [int(d) for d in self.parse_floats(options['dims'], '--dims')]
        report = verify_equivalence_batch(options['n'], options['p'], options['samples'], config.seed, dims)
        if config.output_format == 'csv':
            return report.rows, report.passed
        return EquivalenceReportSerializer(report).data, report.passed

from toolkit.analysis import check_convergence, check_image_convergence, cross_class_consistency
from toolkit.management.base import NnormCommand
from toolkit.serializers import (
    ConsistencyReportSerializer,
    ImageConvergenceSerializer,
    SequencePrefixSerializer,
    VerdictSerializer,
)


class Command(NnormCommand):
    help = 'Check whether a sequence prefix converges with respect to the class-m norms'
    input_option = 'sequence'
    failure_message = 'Convergence violated'

    def add_command_arguments(self, parser):
        parser.add_argument('--sequence', required=True, help='JSON file {"points": [[...], ...]}')
        parser.add_argument('--limit', required=True, help='Candidate limit as a JSON list')
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis)')
        parser.add_argument('--m', type=int, default=1)
        parser.add_argument('--eps', type=float, required=True)
        parser.add_argument('--covering', action='store_true', help='Check only the covering family')
        parser.add_argument('--compare-m', type=int, dest='compare_m', help='Also compare verdicts with this class')
        parser.add_argument('--map', help='Mapping JSON file; also check that T(x_k) converges to T(limit)')

    def run(self, config, options):
        seq = self.parse_with(SequencePrefixSerializer, self.load_json(options['sequence']), options['sequence'])
        Y = self.load_anchors(options['anchors'], seq.d)
        limit = self.parse_vector(options['limit'], '--limit')
        m, eps = options['m'], config.eps

        if options['compare_m'] is not None:
            report = cross_class_consistency(seq, limit, Y, m, options['compare_m'], eps)
            return ConsistencyReportSerializer(report).data, report.agree
        if options['map']:
            T = self.load_mapping(options['map'])
            report = check_image_convergence(T, seq, limit, Y, m, eps)
            return ImageConvergenceSerializer(report).data, report.consistent and not report.source.violated

        verdict = check_convergence(seq, limit, Y, m, eps, use_covering=options['covering'])
        return VerdictSerializer(verdict).data, not verdict.violated

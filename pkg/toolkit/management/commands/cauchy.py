from toolkit.analysis import check_cauchy
from toolkit.management.base import NnormCommand
from toolkit.serializers import SequencePrefixSerializer, VerdictSerializer


class Command(NnormCommand):
    help = 'Check whether a sequence prefix is Cauchy with respect to the class-m norms'
    input_option = 'sequence'
    failure_message = 'Cauchy condition violated'

    def add_command_arguments(self, parser):
        parser.add_argument('--sequence', required=True, help='JSON file {"points": [[...], ...]}')
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis)')
        parser.add_argument('--m', type=int, default=1)
        parser.add_argument('--eps', type=float, required=True)
        parser.add_argument('--covering', action='store_true', help='Check only the covering family')

    def run(self, config, options):
        seq = self.parse_with(SequencePrefixSerializer, self.load_json(options['sequence']), options['sequence'])
        Y = self.load_anchors(options['anchors'], seq.d)
        verdict = check_cauchy(seq, Y, options['m'], config.eps, use_covering=options['covering'])
        return VerdictSerializer(verdict).data, not verdict.violated

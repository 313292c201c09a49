from toolkit.analysis import continuity_probe
from toolkit.fixedpoint import certify_contraction
from toolkit.management.base import NnormCommand
from toolkit.sampling import DomainSampler
from toolkit.serializers import ContinuityReportSerializer


class Command(NnormCommand):
    help = 'Empirical modulus of continuity of a mapping at a point'
    input_option = 'map'
    failure_message = 'No working delta for some eps'

    def add_command_arguments(self, parser):
        parser.add_argument('--map', required=True, help='Mapping JSON file')
        parser.add_argument('--a', required=True, help='The point as a JSON list')
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis)')
        parser.add_argument('--l', type=int, default=1, help='Class of the input norms')
        parser.add_argument('--m', type=int, default=1, help='Class of the output norms')
        parser.add_argument('--eps', required=True, help='Comma-separated eps values, e.g. "0.1,0.01"')
        parser.add_argument('--radius', type=float, default=1.0, help='Largest probed radius')
        parser.add_argument('--levels', type=int, default=24, help='Number of halvings of the radius')
        parser.add_argument('--rays', type=int, default=32, help='Number of random directions')
        parser.add_argument('--certify', action='store_true', help='Report eps/C for a certified contraction')

    def handle(self, *args, **options):
        options['eps_list'] = options.pop('eps')
        return super().handle(*args, **options)

    def run(self, config, options):
        T = self.load_mapping(options['map'])
        a = self.parse_vector(options['a'], '--a')
        Y = self.load_anchors(options['anchors'], len(a))
        eps_list = self.parse_floats(options['eps_list'], '--eps')
        sampler = DomainSampler(center=a, radius=options['radius'], levels=options['levels'], rays=options['rays'])
        contraction = certify_contraction(T, Y, options['m']) if options['certify'] else None
        report = continuity_probe(
            T, a, Y, options['l'], options['m'], eps_list, sampler, seed=config.seed, contraction=contraction,
        )
        return ContinuityReportSerializer(report).data, not report.failed

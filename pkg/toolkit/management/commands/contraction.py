import numpy as np

from toolkit.fixedpoint import certify_contraction, estimate_contraction, verify_class_propagation
from toolkit.management.base import NnormCommand
from toolkit.sampling import DomainSampler
from toolkit.serializers import ContractionEstimateSerializer, PropagationReportSerializer


class Command(NnormCommand):
    help = 'Estimate (and optionally certify) the class-m contraction constant of a mapping'
    input_option = 'map'
    failure_message = 'Class propagation counterexamples found'

    def add_command_arguments(self, parser):
        parser.add_argument('--map', required=True, help='Mapping JSON file')
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis)')
        parser.add_argument('--m', type=int, default=1)
        parser.add_argument('--pairs', type=int, default=500, help='Number of sampled pairs')
        parser.add_argument('--center', help='Sampling box center as a JSON list (default: origin)')
        parser.add_argument('--radius', type=float, default=1.0, help='Sampling box half-width')
        parser.add_argument('--certify', action='store_true', help='Add the exact constant where one exists')
        parser.add_argument('--propagation', action='store_true', help='Check class-1 => class-m => class-n pairwise')

    def run(self, config, options):
        T = self.load_mapping(options['map'])
        d = getattr(T, 'd', None)
        if options['center']:
            center = self.parse_vector(options['center'], '--center')
        else:
            center = None
        Y = self.load_anchors(options['anchors'], d if d is not None else (len(center) if center else None))
        sampler = DomainSampler(center=np.zeros(Y.d) if center is None else center, radius=options['radius'])
        m = options['m']

        estimate = estimate_contraction(T, sampler, Y, m, options['pairs'], config.seed)
        report = {'mapping': T.to_dict(), 'estimate': ContractionEstimateSerializer(estimate).data}
        passed = True
        if options['certify']:
            certificate = certify_contraction(T, Y, m)
            report['certificate'] = ContractionEstimateSerializer(certificate).data if certificate else None
        if options['propagation']:
            propagation = verify_class_propagation(T, sampler, Y, m, options['pairs'], config.seed)
            report['propagation'] = PropagationReportSerializer(propagation).data
            passed = propagation.holds
        return report, passed

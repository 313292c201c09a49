import numpy as np
from django.core.management.base import CommandError

from toolkit.exceptions import ConvergenceError
from toolkit.fixedpoint import banach_solve, certify_contraction, uniqueness_probe
from toolkit.management.base import EXIT_INPUT_ERROR, NnormCommand
from toolkit.serializers import FixedPointResultSerializer, PointsSerializer, UniquenessReportSerializer


class Command(NnormCommand):
    help = 'Find a fixed point by the Banach iteration x_k = T(x_(k-1))'
    input_option = 'map'
    failure_message = 'Iteration did not converge'

    def add_command_arguments(self, parser):
        parser.add_argument('--map', required=True, help='Mapping JSON file')
        parser.add_argument('--x0', required=True, help='Starting point as a JSON list, e.g. "[8, 8]"')
        parser.add_argument('--eps', type=float, required=True)
        parser.add_argument('--max-iter', type=int, dest='max_iter', default=10000)
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis of R^d)')
        parser.add_argument('--m', type=int, default=1)
        parser.add_argument('--box-lower', dest='box_lower', help='Lower box bounds as a JSON list')
        parser.add_argument('--box-upper', dest='box_upper', help='Upper box bounds as a JSON list')
        parser.add_argument('--starts', help='JSON file {"points": [...]}: run a uniqueness probe from these starts')

    def run(self, config, options):
        T = self.load_mapping(options['map'])
        x0 = self.parse_vector(options['x0'], '--x0')
        Y = self.load_anchors(options['anchors'], len(x0))
        m = options['m']

        box = None
        if options['box_lower'] or options['box_upper']:
            if not (options['box_lower'] and options['box_upper']):
                raise CommandError('--box-lower and --box-upper go together', returncode=EXIT_INPUT_ERROR)
            box = (
                np.asarray(self.parse_vector(options['box_lower'], '--box-lower'), dtype=float),
                np.asarray(self.parse_vector(options['box_upper'], '--box-upper'), dtype=float),
            )

        estimate = certify_contraction(T, Y, m)
        context = {'trace': config.trace}
        try:
            result = banach_solve(T, x0, Y, m, config.eps, options['max_iter'], estimate=estimate, box=box)
        except ConvergenceError as exc:
            partial = getattr(exc, 'result', None)
            report = {'error': str(exc)}
            if partial is not None:
                report['result'] = FixedPointResultSerializer(partial, context=context).data
            self.failure_message = f'Iteration failed: {exc}'
            return report, False

        report = {'mapping': T.to_dict(), 'result': FixedPointResultSerializer(result, context=context).data}
        passed = result.converged
        if options['starts']:
            starts = self.parse_with(PointsSerializer, self.load_json(options['starts']), options['starts'])
            probe = uniqueness_probe(T, starts, Y, m, config.eps, options['max_iter'], estimate=estimate)
            report['uniqueness'] = UniquenessReportSerializer(probe).data
            passed = passed and probe.status != 'fail'
        return report, passed

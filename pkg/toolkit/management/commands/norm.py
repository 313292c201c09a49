from toolkit.management.base import NnormCommand
from toolkit.nnorm_core import NormParams, as_vectors, gram_2_norm, is_linearly_independent, lp_n_norm
from toolkit.serializers import VectorsInputSerializer


class Command(NnormCommand):
    help = 'Evaluate the determinant n-norm of a list of vectors'
    input_option = 'vectors'

    def add_command_arguments(self, parser):
        parser.add_argument('--vectors', required=True, help='JSON file {"vectors": [[...], ...], "p": 2}')
        parser.add_argument('--p', type=float, help='Exponent (overrides the file; default 2)')

    def run(self, config, options):
        data = self.parse_with(VectorsInputSerializer, self.load_json(options['vectors']), options['vectors'])
        rows = as_vectors(data['vectors'])
        p = options['p'] if options['p'] is not None else data.get('p', 2.0)
        params = NormParams.for_vectors(rows, p)

        report = {
            'n': params.n,
            'p': params.p,
            'd': params.d,
            'value': lp_n_norm(rows, params),
            'linearly_independent': is_linearly_independent(rows, params),
        }
        if params.p == 2.0:
            report['gram_2_norm'] = gram_2_norm(rows, params.abs_tol)
        return report, True

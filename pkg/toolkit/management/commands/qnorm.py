from django.core.management.base import CommandError

from toolkit.exceptions import InvalidSubsetError
from toolkit.management.base import EXIT_INPUT_ERROR, NnormCommand
from toolkit.nnorm_core import as_vector
from toolkit.quotient import (
    IndexSubset,
    class1_norms,
    classm_norm,
    enumerate_class,
    in_span_residual,
    quotient_zero_check,
)


class Command(NnormCommand):
    help = 'Evaluate the quotient norms of a vector with respect to an anchor set'
    input_option = 'anchors'

    def add_command_arguments(self, parser):
        parser.add_argument('--anchors', required=True, help='JSON file {"n": 2, "p": 2, "vectors": [...]}')
        parser.add_argument('--u', required=True, help='The representative vector as a JSON list, e.g. "[3, 4]"')
        group = parser.add_mutually_exclusive_group()
        group.add_argument('--subset', help='One index subset, e.g. "1,3"')
        group.add_argument('--m', type=int, help='Evaluate every subset of this class (default 1)')

    def run(self, config, options):
        Y = self.load_anchors(options['anchors'])
        u = as_vector(self.parse_vector(options['u'], '--u'), Y.d)
        if options['subset']:
            try:
                subsets = [IndexSubset.parse(options['subset']).validate(Y.n)]
            except InvalidSubsetError as exc:
                raise CommandError(f"--subset: {exc}", returncode=EXIT_INPUT_ERROR)
        else:
            subsets = list(enumerate_class(Y.n, options['m'] or 1))

        report = {
            'n': Y.n,
            'p': Y.p,
            'u': u.tolist(),
            'class1': class1_norms(u, Y),
            'norms': {str(subset): classm_norm(u, Y, subset) for subset in subsets},
            'zero_coset': {str(subset): quotient_zero_check(u, Y, subset) for subset in subsets},
            'span_residual': {str(subset): in_span_residual(u, Y, subset) for subset in subsets},
        }
        return report, True

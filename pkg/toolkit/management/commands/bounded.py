from toolkit.analysis import check_bounded
from toolkit.management.base import NnormCommand
from toolkit.serializers import PointsSerializer


class Command(NnormCommand):
    help = 'Largest class-m norm over a set of points'
    input_option = 'points'

    def add_command_arguments(self, parser):
        parser.add_argument('--points', required=True, help='JSON file {"points": [[...], ...]}')
        parser.add_argument('--anchors', help='Anchor set JSON file (default: standard basis)')
        parser.add_argument('--m', type=int, default=1)

    def run(self, config, options):
        points = self.parse_with(PointsSerializer, self.load_json(options['points']), options['points'])
        Y = self.load_anchors(options['anchors'], len(points[0]))
        bound = check_bounded(points, Y, options['m'])
        return {'m': options['m'], 'points': len(points), 'bound': bound}, True

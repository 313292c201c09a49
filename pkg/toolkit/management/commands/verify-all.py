from toolkit.management.base import NnormCommand
from toolkit.serializers import SuiteResultSerializer
from toolkit.verification import SUITES, verify_all


class Command(NnormCommand):
    help = 'Run every property suite and aggregate the results'
    failure_message = 'Some verification suites failed'

    def add_command_arguments(self, parser):
        parser.add_argument('--samples', type=int, help='Override every suite\'s sample count')
        parser.add_argument(
            '--suite', action='append', choices=[name for name, _ in SUITES], dest='suites',
            help='Run only this suite (repeatable)',
        )

    def run(self, config, options):
        report = verify_all(config.seed, samples=options['samples'], only=options['suites'])
        data = {
            'seed': report.seed,
            'passed': report.passed,
            'suites': SuiteResultSerializer(report.suites, many=True).data,
        }
        return data, report.passed

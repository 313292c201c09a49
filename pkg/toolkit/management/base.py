import csv
import io
import json
import logging
from dataclasses import dataclass

from django.core.management.base import BaseCommand, CommandError
from django.test import override_settings
from rest_framework.exceptions import ValidationError

from toolkit.exceptions import NormError
from toolkit.quotient import AnchorSet
from toolkit.serializers import AnchorSetSerializer, MappingSerializer
from toolkit.utils import get_default_seed, render_json

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2


@dataclass
class RunConfig:
    """Options shared by every toolkit command, validated before the command runs."""

    command: str
    seed: int
    output_format: str = 'json'
    out: str = None
    rel_tol: float = None
    abs_tol: float = None
    trace: bool = False
    eps: float = None
    input_path: str = None

    @classmethod
    def from_options(cls, command, options, input_option=None):
        return cls(
            command=command,
            seed=get_default_seed() if options.get('seed') is None else options['seed'],
            output_format=options.get('format') or 'json',
            out=options.get('out'),
            rel_tol=options.get('rel_tol'),
            abs_tol=options.get('abs_tol'),
            trace=bool(options.get('trace')),
            eps=options.get('eps'),
            input_path=options.get(input_option) if input_option else None,
        )

    def validate(self):
        for name in ('rel_tol', 'abs_tol', 'eps'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise CommandError(f"--{name.replace('_', '-')} must be positive, got {value}", returncode=EXIT_INPUT_ERROR)

    def setting_overrides(self):
        overrides = {}
        if self.rel_tol is not None:
            overrides['NNORM_REL_TOL'] = self.rel_tol
        if self.abs_tol is not None:
            overrides['NNORM_ABS_TOL'] = self.abs_tol
        return overrides


def _flatten_errors(errors, prefix=''):
    if isinstance(errors, dict):
        parts = []
        for key, value in errors.items():
            label = prefix if key == 'non_field_errors' else (f"{prefix}.{key}" if prefix else str(key))
            parts.extend(_flatten_errors(value, label))
        return parts
    if isinstance(errors, list):
        parts = []
        for index, value in enumerate(errors):
            if isinstance(value, (dict, list)):
                parts.extend(_flatten_errors(value, f"{prefix}[{index}]"))
            else:
                parts.append(f"{prefix}: {value}" if prefix else str(value))
        return parts
    return [f"{prefix}: {errors}" if prefix else str(errors)]


class NnormCommand(BaseCommand):
    """
    Base class for the toolkit's management commands.

    Subclasses implement ``add_command_arguments`` and ``run``. ``run`` returns
    ``(data, passed)``: the report (a dict, or CSV rows when the command
    supports ``--format csv``) and whether it records success. The report is
    always written before a failing exit status is raised.
    """

    csv_fields = None
    input_option = None
    failure_message = 'Verification failed'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='Run seed (default: NNORM_DEFAULT_SEED)')
        parser.add_argument('--out', type=str, help='Write the report to this file instead of stdout')
        parser.add_argument('--format', choices=['json', 'csv'], default='json', help='Report format')
        parser.add_argument('--rel-tol', type=float, dest='rel_tol', help='Relative tolerance override')
        parser.add_argument('--abs-tol', type=float, dest='abs_tol', help='Absolute tolerance override')
        parser.add_argument('--trace', action='store_true', help='Include per-iteration traces')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def run(self, config, options):
        raise NotImplementedError

    def handle(self, *args, **options):
        config = RunConfig.from_options(self.command_name, options, self.input_option)
        config.validate()
        if config.output_format == 'csv' and self.csv_fields is None:
            raise CommandError(f"{self.command_name} has no CSV report", returncode=EXIT_INPUT_ERROR)

        with override_settings(**config.setting_overrides()):
            try:
                data, passed = self.run(config, options)
            except ValidationError as exc:
                raise CommandError('; '.join(_flatten_errors(exc.detail)), returncode=EXIT_INPUT_ERROR)
            except NormError as exc:
                raise CommandError(str(exc), returncode=EXIT_INPUT_ERROR)

        self.emit(config, data)
        if not passed:
            logger.warning(f"{self.command_name}: {self.failure_message}")
            raise CommandError(self.failure_message, returncode=EXIT_VIOLATION)

    # -------------------------------------------------------------------------
    # Input
    # -------------------------------------------------------------------------

    def load_json(self, path):
        """Parse a JSON input file; parse failures name the file, line and column."""
        try:
            with open(path, encoding='utf-8') as handle:
                text = handle.read()
        except OSError as exc:
            raise CommandError(f"{path}: {exc.strerror}", returncode=EXIT_INPUT_ERROR)
        return self.parse_json(text, path)

    def parse_json(self, text, source):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise CommandError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}", returncode=EXIT_INPUT_ERROR)

    def parse_with(self, serializer_class, data, source):
        """Validate ``data`` with a DRF serializer and return the domain object it builds."""
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            problems = '; '.join(_flatten_errors(serializer.errors))
            raise CommandError(f"{source}: {problems}", returncode=EXIT_INPUT_ERROR)
        return serializer.save()

    def load_anchors(self, path, d=None, p=2.0):
        """The anchor set in ``path``, or the standard basis of R^d when no file is given."""
        if path is None:
            if d is None:
                raise CommandError('--anchors is required', returncode=EXIT_INPUT_ERROR)
            return AnchorSet.standard(d, p)
        return self.parse_with(AnchorSetSerializer, self.load_json(path), path)

    def load_mapping(self, path):
        return self.parse_with(MappingSerializer, self.load_json(path), path)

    def parse_vector(self, text, source):
        value = self.parse_json(text, source)
        if not isinstance(value, list) or not value or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
        ):
            raise CommandError(f"{source}: expected a JSON list of numbers", returncode=EXIT_INPUT_ERROR)
        return value

    def parse_floats(self, text, source):
        try:
            return [float(part) for part in text.split(',') if part.strip()]
        except ValueError:
            raise CommandError(f"{source}: expected comma-separated numbers, got {text!r}", returncode=EXIT_INPUT_ERROR)

    # -------------------------------------------------------------------------
    # Output
    # -------------------------------------------------------------------------

    def render(self, config, data):
        if config.output_format == 'csv':
            buffer = io.StringIO()
            writer = csv.DictWriter(buffer, fieldnames=self.csv_fields, lineterminator='\n')
            writer.writeheader()
            writer.writerows(data)
            return buffer.getvalue()
        return render_json(data) + '\n'

    def emit(self, config, data):
        try:
            text = self.render(config, data)
        except ValueError as exc:
            # strict JSON rejects inf and NaN
            raise CommandError(f"report is not representable: {exc}", returncode=EXIT_INPUT_ERROR)
        if config.out:
            with open(config.out, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
            self.stderr.write(self.style.SUCCESS(f'Report written to {config.out}'))
        else:
            self.stdout.write(text, ending='')

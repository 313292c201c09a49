import math

from rest_framework import serializers

from .analysis import SequencePrefix
from .exceptions import NormError
from .fixedpoint import AffineMapping, MAPPING_REGISTRY, RegisteredMapping, ScalingMapping
from .nnorm_core import as_vectors
from .quotient import AnchorSet


class FiniteFloatField(serializers.FloatField):
    """Floats that must be finite on input; infinities and NaN render as null."""

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not math.isfinite(value):
            raise serializers.ValidationError('Value must be finite.')
        return value

    def to_representation(self, value):
        if value is None:
            return None
        value = float(value)
        return value if math.isfinite(value) else None


def vector_field(**kwargs):
    return serializers.ListField(child=FiniteFloatField(), allow_empty=False, **kwargs)


def subset_map(values):
    """``{IndexSubset: x}`` as ``{"1,2": x}``, keeping lexicographic subset order."""
    field = FiniteFloatField()
    return {str(subset): field.to_representation(value) for subset, value in sorted(values.items())}


def _domain_error(exc):
    return serializers.ValidationError({'non_field_errors': [str(exc)]})


# =============================================================================
# Input schemas
# =============================================================================

class VectorsInputSerializer(serializers.Serializer):
    """``{"vectors": [[...], ...], "p": 2}``; p is optional."""

    vectors = serializers.ListField(child=vector_field(), allow_empty=False)
    p = FiniteFloatField(required=False, min_value=1.0)

    def validate_vectors(self, value):
        try:
            as_vectors(value)
        except NormError as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def create(self, validated_data):
        return validated_data


class AnchorSetSerializer(serializers.Serializer):
    """``{"n": int, "p": float, "vectors": [[...], ...]}``, checked for independence when parsed."""

    n = serializers.IntegerField(min_value=1)
    p = FiniteFloatField(min_value=1.0)
    vectors = serializers.ListField(child=vector_field(), allow_empty=False)

    def validate(self, attrs):
        if len(attrs['vectors']) != attrs['n']:
            raise serializers.ValidationError(
                {'vectors': [f"expected {attrs['n']} vectors, got {len(attrs['vectors'])}"]}
            )
        try:
            attrs['anchor_set'] = AnchorSet.from_vectors(attrs['vectors'], p=attrs['p'])
        except NormError as exc:
            raise _domain_error(exc)
        return attrs

    def create(self, validated_data):
        return validated_data['anchor_set']

    def to_representation(self, instance):
        return {'n': instance.n, 'p': instance.p, 'vectors': instance.vectors.tolist()}


class SequencePrefixSerializer(serializers.Serializer):
    points = serializers.ListField(child=vector_field(), min_length=2)

    def validate(self, attrs):
        try:
            attrs['prefix'] = SequencePrefix(attrs['points'])
        except NormError as exc:
            raise _domain_error(exc)
        return attrs

    def create(self, validated_data):
        return validated_data['prefix']


class PointsSerializer(serializers.Serializer):
    """``{"points": [[...], ...]}``: one or more points of a common dimension."""

    points = serializers.ListField(child=vector_field(), allow_empty=False)

    def validate_points(self, value):
        if len({len(point) for point in value}) != 1:
            raise serializers.ValidationError('points do not share one dimension')
        return value

    def create(self, validated_data):
        return validated_data['points']


class MappingSerializer(serializers.Serializer):
    """One of ``affine`` (A, b), ``scaling`` (c) or ``registered`` (name)."""

    kind = serializers.ChoiceField(choices=['affine', 'scaling', 'registered'])
    A = serializers.ListField(child=vector_field(), required=False)
    b = vector_field(required=False)
    c = FiniteFloatField(required=False)
    name = serializers.CharField(required=False)

    def validate_name(self, value):
        if value not in MAPPING_REGISTRY:
            raise serializers.ValidationError(
                f"Unknown mapping. Registered mappings: {', '.join(sorted(MAPPING_REGISTRY))}."
            )
        return value

    def validate(self, attrs):
        required = {'affine': ('A', 'b'), 'scaling': ('c',), 'registered': ('name',)}[attrs['kind']]
        missing = [name for name in required if name not in attrs]
        if missing:
            raise serializers.ValidationError({name: ['This field is required.'] for name in missing})
        try:
            if attrs['kind'] == 'affine':
                attrs['mapping'] = AffineMapping(A=attrs['A'], b=attrs['b'])
            elif attrs['kind'] == 'scaling':
                attrs['mapping'] = ScalingMapping(c=attrs['c'])
            else:
                attrs['mapping'] = RegisteredMapping(name=attrs['name'])
        except NormError as exc:
            raise _domain_error(exc)
        return attrs

    def create(self, validated_data):
        return validated_data['mapping']


# =============================================================================
# Report schemas
# =============================================================================

class AxiomTallySerializer(serializers.Serializer):
    name = serializers.CharField()
    checked = serializers.IntegerField()
    violations = serializers.IntegerField()
    worst = FiniteFloatField()


class AxiomReportSerializer(serializers.Serializer):
    n = serializers.IntegerField(source='params.n')
    p = FiniteFloatField(source='params.p')
    d = serializers.IntegerField(source='params.d')
    rel_tol = FiniteFloatField(source='params.rel_tol')
    sample_count = serializers.IntegerField()
    seed = serializers.IntegerField()
    tallies = AxiomTallySerializer(many=True)
    violations = serializers.IntegerField()
    worst_violation = FiniteFloatField()
    passed = serializers.BooleanField()


class WitnessSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    subset = serializers.CharField()
    value = FiniteFloatField()


class VerdictSerializer(serializers.Serializer):
    status = serializers.CharField()
    m = serializers.IntegerField()
    eps = FiniteFloatField()
    witness = WitnessSerializer(allow_null=True)
    tail_values = serializers.SerializerMethodField()

    def get_tail_values(self, obj):
        field = FiniteFloatField()
        return {str(subset): [field.to_representation(v) for v in values] for subset, values in obj.tail_values.items()}


class ConsistencyReportSerializer(serializers.Serializer):
    m1 = serializers.IntegerField()
    m2 = serializers.IntegerField()
    eps = FiniteFloatField()
    agree = serializers.BooleanField()
    defects = serializers.ListField(child=serializers.CharField())
    convergence = serializers.SerializerMethodField()
    cauchy = serializers.SerializerMethodField()

    def get_convergence(self, obj):
        return {str(m): VerdictSerializer(verdict).data for m, verdict in obj.convergence.items()}

    def get_cauchy(self, obj):
        return {str(m): VerdictSerializer(verdict).data for m, verdict in obj.cauchy.items()}


class ImageConvergenceSerializer(serializers.Serializer):
    source = VerdictSerializer()
    image = VerdictSerializer()
    consistent = serializers.BooleanField()


class ContinuityRowSerializer(serializers.Serializer):
    eps = FiniteFloatField()
    delta = FiniteFloatField()
    status = serializers.CharField()
    rays = serializers.IntegerField()
    rays_crossed = serializers.IntegerField()
    reference_delta = FiniteFloatField(allow_null=True)
    meets_reference = serializers.BooleanField(allow_null=True)


class ContinuityReportSerializer(serializers.Serializer):
    l = serializers.IntegerField()  # noqa: E741
    m = serializers.IntegerField()
    a = serializers.ListField(child=FiniteFloatField())
    rows = ContinuityRowSerializer(many=True)
    failed = serializers.BooleanField()


class ContractionEstimateSerializer(serializers.Serializer):
    m = serializers.IntegerField()
    C_hat = FiniteFloatField()
    per_subset_C = serializers.SerializerMethodField()
    pairs_used = serializers.IntegerField()
    is_certified = serializers.BooleanField()
    note = serializers.CharField()

    def get_per_subset_C(self, obj):
        return subset_map(obj.per_subset_C)


class PropagationCounterexampleSerializer(serializers.Serializer):
    kind = serializers.CharField()
    pair_index = serializers.IntegerField()
    subset = serializers.CharField()
    ratio = FiniteFloatField()
    bound = FiniteFloatField()
    x = serializers.ListField(child=FiniteFloatField())
    y = serializers.ListField(child=FiniteFloatField())


class PropagationReportSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    m = serializers.IntegerField()
    C1 = FiniteFloatField()
    Cm = FiniteFloatField()
    Cn = FiniteFloatField()
    pairs_checked = serializers.IntegerField()
    multiplicity = serializers.IntegerField()
    multiplicity_ok = serializers.BooleanField()
    holds = serializers.BooleanField()
    counterexamples = PropagationCounterexampleSerializer(many=True)


class FixedPointResultSerializer(serializers.Serializer):
    """Per-iteration traces are included only when the context sets ``trace``."""

    solution = serializers.ListField(child=FiniteFloatField())
    iterations = serializers.IntegerField()
    converged = serializers.BooleanField()
    residual_per_subset = serializers.SerializerMethodField()
    contraction_constant = FiniteFloatField(allow_null=True)
    certified = serializers.BooleanField()
    first_step_bound = FiniteFloatField()
    projections = serializers.IntegerField()
    final_apriori_bound = serializers.SerializerMethodField()
    apriori_bound_trace = serializers.ListField(child=FiniteFloatField())
    difference_trace = serializers.ListField(child=FiniteFloatField())

    def get_residual_per_subset(self, obj):
        return subset_map(obj.residual_per_subset)

    def get_final_apriori_bound(self, obj):
        if not obj.apriori_bound_trace:
            return None
        return FiniteFloatField().to_representation(obj.apriori_bound_trace[-1])

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if not self.context.get('trace'):
            data.pop('apriori_bound_trace')
            data.pop('difference_trace')
        return data


class UniquenessReportSerializer(serializers.Serializer):
    status = serializers.CharField()
    max_distance = FiniteFloatField()
    threshold = FiniteFloatField()
    iterations = serializers.ListField(child=serializers.IntegerField())
    solutions = serializers.ListField(child=serializers.ListField(child=FiniteFloatField()))


class EquivalenceEntrySerializer(serializers.Serializer):
    check = serializers.CharField()
    d = serializers.IntegerField()
    lower_constant = FiniteFloatField()
    upper_constant = FiniteFloatField()
    lower = FiniteFloatField()
    mid = FiniteFloatField()
    upper = FiniteFloatField()
    slack = FiniteFloatField()
    passed = serializers.BooleanField()


class EquivalenceReportSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    p = FiniteFloatField()
    seed = serializers.IntegerField()
    samples = serializers.IntegerField()
    dims = serializers.ListField(child=serializers.IntegerField())
    checked = serializers.DictField(child=serializers.IntegerField())
    failures = serializers.DictField(child=serializers.IntegerField())
    max_slack = serializers.DictField(child=FiniteFloatField())
    loosest_slack = serializers.DictField(child=FiniteFloatField())
    chain_failures = serializers.IntegerField()
    passed = serializers.BooleanField()
    entries = serializers.DictField(child=serializers.ListField(child=EquivalenceEntrySerializer()))


class SuiteResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    passed = serializers.BooleanField()
    checks = serializers.IntegerField()
    failures = serializers.ListField(child=serializers.CharField())
    details = serializers.DictField()

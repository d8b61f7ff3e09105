import dataclasses
import typing

from marshmallow import Schema, fields, post_load, validate, validates_schema, ValidationError

from fertcast import constants
from fertcast.models.correlate_models import SelectionConfig, SelectionConfigSchema
from fertcast.models.regression_models import LassoConfig, LassoConfigSchema


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    ground_truth: str
    corpus: str
    trends: str
    output_dir: str
    lexicon: typing.Optional[str] = None
    reference_year: int = constants.DEFAULT_REFERENCE_YEAR
    years: typing.Tuple[int, ...] = ()
    variables: typing.Tuple[str, ...] = ()
    top_k: int = constants.DEFAULT_TOP_K
    scale: float = constants.DEFAULT_INTENSITY_SCALE
    ddof: int = constants.DEFAULT_STD_DDOF
    selection: SelectionConfig = SelectionConfig()
    lasso: LassoConfig = LassoConfig()
    single_term_mode: str = constants.SINGLE_TERM_MODE_CV
    jobs: int = 1


@dataclasses.dataclass(frozen=True)
class SynthConfig:
    output_dir: str
    seed: int = 0
    n_regions: int = 51
    n_terms: int = 200
    n_planted: int = 3
    noise_level: float = 0.6
    variables: typing.Tuple[str, ...] = tuple(constants.REFERENCE_VARIABLES.keys())
    years: typing.Tuple[int, ...] = tuple(range(2010, 2016))


class PipelineConfigSchema(Schema):
    ground_truth = fields.String(data_key="ground-truth", required=True)
    corpus = fields.String(required=True)
    trends = fields.String(required=True)
    output_dir = fields.String(data_key="output-dir", required=True)
    lexicon = fields.String(load_default=None, allow_none=True)
    reference_year = fields.Integer(
        data_key="reference-year",
        load_default=constants.DEFAULT_REFERENCE_YEAR,
        validate=validate.Range(min=1900, max=2100),
    )
    years = fields.List(fields.Integer(), load_default=[])
    variables = fields.List(fields.String(), load_default=[])
    top_k = fields.Integer(
        data_key="top-k", load_default=constants.DEFAULT_TOP_K, validate=validate.Range(min=1)
    )
    scale = fields.Float(
        load_default=constants.DEFAULT_INTENSITY_SCALE,
        validate=validate.Range(min=0.0, min_inclusive=False),
    )
    ddof = fields.Integer(load_default=constants.DEFAULT_STD_DDOF, validate=validate.OneOf([0, 1]))
    selection = fields.Nested(SelectionConfigSchema, load_default=lambda: SelectionConfig())
    lasso = fields.Nested(LassoConfigSchema, load_default=lambda: LassoConfig())
    single_term_mode = fields.String(
        data_key="single-term-mode",
        load_default=constants.SINGLE_TERM_MODE_CV,
        validate=validate.OneOf([constants.SINGLE_TERM_MODE_CV, constants.SINGLE_TERM_MODE_TOP]),
    )
    jobs = fields.Integer(load_default=1, validate=validate.Range(min=1))

    @validates_schema
    def validate_years(self, data, **__):
        years = data.get("years") or []
        if years and len(years) < 2:
            raise ValidationError("At least two years are needed for trends", "years")
        if len(set(years)) != len(years):
            raise ValidationError("Duplicated years", "years")

    @post_load
    def make_pipeline_config(self, data, **__):
        data["years"] = tuple(data.get("years") or ())
        data["variables"] = tuple(data.get("variables") or ())
        return PipelineConfig(**data)


class SynthConfigSchema(Schema):
    output_dir = fields.String(data_key="output-dir", required=True)
    seed = fields.Integer(load_default=0)
    n_regions = fields.Integer(
        data_key="regions", load_default=51, validate=validate.Range(min=3, max=99)
    )
    n_terms = fields.Integer(data_key="terms", load_default=200, validate=validate.Range(min=1))
    n_planted = fields.Integer(data_key="planted", load_default=3, validate=validate.Range(min=0))
    noise_level = fields.Float(data_key="noise", load_default=0.6, validate=validate.Range(min=0.0))
    variables = fields.List(
        fields.String(validate=validate.OneOf(list(constants.REFERENCE_VARIABLES.keys()))),
        load_default=lambda: list(constants.REFERENCE_VARIABLES.keys()),
    )
    years = fields.List(fields.Integer(), load_default=lambda: list(range(2010, 2016)))

    @validates_schema
    def validate_counts(self, data, **__):
        variables = data.get("variables") or []
        if not variables:
            raise ValidationError("At least one variable is required", "variables")
        planted = data.get("n_planted", 3) * len(variables)
        if planted > data.get("n_terms", 200):
            raise ValidationError(
                f"{planted} planted terms do not fit in {data.get('n_terms')} terms",
                "planted",
            )
        if len(data.get("years") or []) < 2:
            raise ValidationError("At least two years are required", "years")

    @post_load
    def make_synth_config(self, data, **__):
        data["variables"] = tuple(data["variables"])
        data["years"] = tuple(data["years"])
        return SynthConfig(**data)

import dataclasses
import typing

import numpy as np
from marshmallow import Schema, fields, post_load, validate, validates_schema, ValidationError
from marshmallow_oneofschema import OneOfSchema

from fertcast import constants
from fertcast.exceptions import FertcastException, RegionMismatchException
from fertcast.models.series_models import RegionSeries


@dataclasses.dataclass(frozen=True)
class DesignMatrix:
    """Named rows (regions) and columns (terms); the intercept is implicit."""

    rows: typing.Tuple[str, ...]
    columns: typing.Tuple[str, ...]
    values: np.ndarray = dataclasses.field(repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "columns", tuple(self.columns))
        values = np.array(self.values, dtype=float).reshape(
            len(self.rows), len(self.columns)
        )
        if not np.all(np.isfinite(values)):
            raise FertcastException("Design matrix contains non finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if len(set(self.columns)) != len(self.columns):
            raise FertcastException(f"Duplicated design columns {self.columns}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError as err:
            raise FertcastException(f"Design matrix has no column '{name}'") from err

    def select_columns(self, names: typing.Sequence[str]) -> "DesignMatrix":
        indexes = [self.column_index(name) for name in names]
        return DesignMatrix(self.rows, tuple(names), self.values[:, indexes])

    def without_row(self, region: str) -> "DesignMatrix":
        keep = [index for index, row in enumerate(self.rows) if row != region]
        return DesignMatrix(
            tuple(self.rows[index] for index in keep),
            self.columns,
            self.values[keep, :],
        )

    def only_row(self, region: str) -> "DesignMatrix":
        index = self.rows.index(region)
        return DesignMatrix((region,), self.columns, self.values[index : index + 1, :])

    def target_vector(self, y: RegionSeries) -> np.ndarray:
        if set(y.values.keys()) != set(self.rows):
            raise RegionMismatchException(
                f"Target '{y.variable_name}' regions do not match the design rows",
                set(y.values.keys()) ^ set(self.rows),
            )
        return y.vector(self.rows)

    @classmethod
    def from_series(
        cls,
        series: typing.Sequence[typing.Tuple[str, RegionSeries]],
        rows: typing.Sequence[str] = None,
        check_normalized: bool = True,
    ) -> "DesignMatrix":
        if rows is None:
            rows = series[0][1].regions if series else ()
        columns = [name for name, _ in series]
        values = (
            np.column_stack([data.vector(rows) for _, data in series])
            if series
            else np.zeros((len(rows), 0))
        )
        if check_normalized and series:
            means = values.mean(axis=0)
            stds = values.std(axis=0)
            off = [
                name
                for name, mean, std in zip(columns, means, stds)
                if abs(mean) > 1e-6 or abs(std - 1.0) > 1e-6
            ]
            if off:
                raise FertcastException(f"Design columns are not z-scored: {off}")
        return cls(tuple(rows), tuple(columns), values)


@dataclasses.dataclass(frozen=True)
class FittedModel:
    family: str
    intercept: float
    # Every candidate term, zero coefficients included
    coefficients: typing.Mapping[str, float] = dataclasses.field(default_factory=dict)
    lambda_value: typing.Optional[float] = None
    variable: typing.Optional[str] = None

    def __post_init__(self):
        if self.family not in constants.MODEL_FAMILIES:
            raise FertcastException(f"Unknown model family '{self.family}'")
        if self.family == constants.MODEL_FAMILY_CONSTANT and self.coefficients:
            raise FertcastException("Constant models cannot have coefficients")
        object.__setattr__(
            self,
            "coefficients",
            {str(term): float(coef) for term, coef in self.coefficients.items()},
        )

    @property
    def active_terms(self) -> typing.FrozenSet[str]:
        return frozenset(term for term, coef in self.coefficients.items() if coef != 0.0)

    @property
    def removed_terms(self) -> typing.List[str]:
        return [term for term, coef in self.coefficients.items() if coef == 0.0]


@dataclasses.dataclass(frozen=True)
class LassoConfig:
    grid_size: int = constants.DEFAULT_LAMBDA_POINTS
    ratio: float = constants.DEFAULT_LAMBDA_RATIO
    max_sweeps: int = constants.DEFAULT_LASSO_MAX_SWEEPS
    tolerance: float = constants.DEFAULT_LASSO_TOLERANCE


@dataclasses.dataclass(frozen=True)
class FamilySpec:
    family: str
    lasso: LassoConfig = LassoConfig()
    single_term_mode: str = constants.SINGLE_TERM_MODE_CV


class LassoConfigSchema(Schema):
    grid_size = fields.Integer(
        data_key="lambda-points",
        load_default=constants.DEFAULT_LAMBDA_POINTS,
        validate=validate.Range(min=1),
    )
    ratio = fields.Float(
        data_key="lambda-ratio",
        load_default=constants.DEFAULT_LAMBDA_RATIO,
        validate=validate.Range(min=0.0, max=1.0, min_inclusive=False),
    )
    max_sweeps = fields.Integer(
        data_key="max-sweeps",
        load_default=constants.DEFAULT_LASSO_MAX_SWEEPS,
        validate=validate.Range(min=1),
    )
    tolerance = fields.Float(
        load_default=constants.DEFAULT_LASSO_TOLERANCE,
        validate=validate.Range(min=0.0, min_inclusive=False),
    )

    @post_load
    def make_lasso_config(self, data, **__):
        return LassoConfig(**data)


class BaseModelSchema(Schema):
    variable = fields.String(load_default=None, dump_default=None, allow_none=True)
    intercept = fields.Float(required=True, allow_nan=False)


class ConstantModelSchema(BaseModelSchema):
    @post_load
    def make_constant_model(self, data, **__):
        return FittedModel(family=constants.MODEL_FAMILY_CONSTANT, **data)


class OlsModelSchema(BaseModelSchema):
    coefficients = fields.Dict(
        keys=fields.String(),
        values=fields.Float(allow_nan=False),
        required=True,
    )


class OlsSingleModelSchema(OlsModelSchema):
    @validates_schema
    def validate_single_term(self, data, **__):
        if len(data.get("coefficients", {})) != 1:
            raise ValidationError(
                "Single term models have exactly one coefficient", "coefficients"
            )

    @post_load
    def make_single_model(self, data, **__):
        return FittedModel(family=constants.MODEL_FAMILY_OLS_SINGLE, **data)


class OlsMultiModelSchema(OlsModelSchema):
    @post_load
    def make_multi_model(self, data, **__):
        return FittedModel(family=constants.MODEL_FAMILY_OLS_MULTI, **data)


class LassoModelSchema(OlsModelSchema):
    lambda_value = fields.Float(
        data_key="lambda",
        required=True,
        allow_nan=False,
        validate=validate.Range(min=0.0),
    )

    @post_load
    def make_lasso_model(self, data, **__):
        return FittedModel(family=constants.MODEL_FAMILY_LASSO, **data)


class FittedModelSchema(OneOfSchema):
    type_field = "family"
    type_schemas = {
        constants.MODEL_FAMILY_CONSTANT: ConstantModelSchema,
        constants.MODEL_FAMILY_OLS_SINGLE: OlsSingleModelSchema,
        constants.MODEL_FAMILY_OLS_MULTI: OlsMultiModelSchema,
        constants.MODEL_FAMILY_LASSO: LassoModelSchema,
    }

    def get_obj_type(self, obj):
        if isinstance(obj, FittedModel):
            return obj.family

        raise Exception("Unknown object type: {}".format(obj.__class__.__name__))

import dataclasses
import typing

import numpy as np
from marshmallow import Schema, fields, post_load, validate

from fertcast import constants
from fertcast.models.series_models import RegionSeries, ZScoredSeries


@dataclasses.dataclass(frozen=True)
class CorpusEntry:
    term: str
    raw: RegionSeries
    z: ZScoredSeries


@dataclasses.dataclass(frozen=True)
class TermCorpus:
    entries: typing.Tuple[CorpusEntry, ...]
    region_order: typing.Tuple[str, ...]
    # terms x regions, rows aligned with entries
    z_matrix: np.ndarray = dataclasses.field(repr=False, compare=False)

    def __len__(self):
        return len(self.entries)

    @property
    def terms(self) -> typing.List[str]:
        return [entry.term for entry in self.entries]


@dataclasses.dataclass(frozen=True)
class RankedTerm:
    term: str
    r: float
    z_series: ZScoredSeries


@dataclasses.dataclass(frozen=True)
class Lexicon:
    allow: typing.Tuple[str, ...] = ()
    block: typing.Tuple[str, ...] = ()


@dataclasses.dataclass(frozen=True)
class SelectionConfig:
    max_terms: int = constants.DEFAULT_MAX_TERMS
    lexicon: Lexicon = Lexicon()
    dedup_plural: bool = True
    # 0 disables the threshold
    min_r: float = 0.0


class LexiconSchema(Schema):
    allow = fields.List(
        fields.String(validate=validate.Length(min=1)),
        load_default=[],
        allow_none=True,
    )
    block = fields.List(
        fields.String(validate=validate.Length(min=1)),
        load_default=[],
        allow_none=True,
    )

    @post_load
    def make_lexicon(self, data, **__):
        return Lexicon(
            allow=tuple(stem.lower() for stem in data.get("allow") or []),
            block=tuple(stem.lower() for stem in data.get("block") or []),
        )


class SelectionConfigSchema(Schema):
    max_terms = fields.Integer(
        data_key="max-terms",
        load_default=constants.DEFAULT_MAX_TERMS,
        validate=validate.Range(min=1),
    )
    lexicon = fields.Nested(LexiconSchema, load_default=lambda: Lexicon())
    dedup_plural = fields.Boolean(data_key="dedup-plural", load_default=True)
    min_r = fields.Float(
        data_key="min-r", load_default=0.0, validate=validate.Range(min=-1.0, max=1.0)
    )

    @post_load
    def make_selection_config(self, data, **__):
        return SelectionConfig(**data)


@dataclasses.dataclass(frozen=True)
class CorrelateExportRow:
    """One row of a Correlate style export: z-scored series plus stored r."""

    term: str
    z_series: ZScoredSeries
    r: typing.Optional[float] = None

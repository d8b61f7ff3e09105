"""Exact top-k correlation search over a corpus of per-region term series.

Every corpus entry keeps its z-scored form, so scoring a target against the
whole corpus reduces to one matrix-vector product: for z-scored vectors
``pearson_r(a, b) == dot(z(a), z(b)) / n``.
"""

import logging
import re
import typing

import numpy as np

from fertcast import constants
from fertcast.exceptions import (
    DegenerateSeriesException,
    DuplicateTermException,
    FertcastException,
    RegionMismatchException,
)
from fertcast.models.correlate_models import (
    CorpusEntry,
    CorrelateExportRow,
    Lexicon,
    RankedTerm,
    SelectionConfig,
    TermCorpus,
)
from fertcast.models.series_models import RegionSeries, ZScoredSeries
from fertcast.series import pearson_r, zscore_vector

__logger = logging.getLogger(__name__)

__WORD_SPLIT_REGEX = re.compile("[^\\w]+")


def build_corpus(entries: typing.Sequence[typing.Tuple[str, RegionSeries]]) -> TermCorpus:
    if not entries:
        raise FertcastException("Cannot build a corpus without terms")

    region_set = set(entries[0][1].values.keys())
    seen_terms = set()
    for term, series in entries:
        folded = term.casefold()
        if folded in seen_terms:
            raise DuplicateTermException(term)
        seen_terms.add(folded)
        series_regions = set(series.values.keys())
        if series_regions != region_set:
            raise RegionMismatchException(
                f"Term '{term}' does not cover the corpus regions",
                series_regions ^ region_set,
            )

    region_order = tuple(sorted(region_set))
    corpus_entries = []
    z_rows = []
    for term, series in entries:
        try:
            z_vector = zscore_vector(series.vector(region_order), name=term)
        except DegenerateSeriesException as err:
            raise DegenerateSeriesException(
                term, f"Corpus term '{term}' has a degenerate series"
            ) from err
        corpus_entries.append(
            CorpusEntry(
                term=term,
                raw=series,
                z=ZScoredSeries.from_vector(term, region_order, z_vector),
            )
        )
        z_rows.append(z_vector)

    z_matrix = np.vstack(z_rows)
    z_matrix.setflags(write=False)
    return TermCorpus(
        entries=tuple(corpus_entries), region_order=region_order, z_matrix=z_matrix
    )


def correlate_all(corpus: TermCorpus, target: RegionSeries) -> np.ndarray:
    target.validate_regions()
    target_vector = target.vector(corpus.region_order)
    target_z = zscore_vector(target_vector, name=target.variable_name)
    scores = corpus.z_matrix @ target_z / len(corpus.region_order)
    return np.clip(scores, -1.0, 1.0)


def top_k_correlated(
    corpus: TermCorpus, target: RegionSeries, k: int = constants.DEFAULT_TOP_K
) -> typing.List[RankedTerm]:
    if k < 1:
        raise FertcastException(f"k must be a positive integer, got {k}")

    scores = correlate_all(corpus, target)
    # Descending r, ties by term
    order = sorted(
        range(len(corpus.entries)),
        key=lambda index: (-scores[index], corpus.entries[index].term),
    )
    ranked = [
        RankedTerm(
            term=corpus.entries[index].term,
            r=float(scores[index]),
            z_series=corpus.entries[index].z,
        )
        for index in order[:k]
    ]
    __logger.debug(
        "Scanned %d terms for '%s'. Top term: %s",
        len(corpus),
        target.variable_name,
        ranked[0].term if ranked else None,
    )
    return ranked


def term_words(term: str) -> typing.List[str]:
    return [word for word in __WORD_SPLIT_REGEX.split(term.casefold()) if word]


def is_relevant(term: str, lexicon: Lexicon) -> bool:
    words = term_words(term)
    if any(word.startswith(stem) for word in words for stem in lexicon.block):
        return False
    if not lexicon.allow:
        return True
    return any(word.startswith(stem) for word in words for stem in lexicon.allow)


def __singular_forms(term: str) -> typing.Set[str]:
    forms = set()
    if term.endswith("es"):
        forms.add(term[:-2])
    if term.endswith("s"):
        forms.add(term[:-1])
    return forms


def are_plural_siblings(first: str, second: str) -> bool:
    first = first.casefold().strip()
    second = second.casefold().strip()
    if first == second:
        return False
    return first in __singular_forms(second) or second in __singular_forms(first)


def select_terms(
    ranked: typing.Sequence[RankedTerm], config: SelectionConfig
) -> typing.List[RankedTerm]:
    if any(prev.r < current.r for prev, current in zip(ranked, ranked[1:])):
        raise FertcastException("Ranked terms must be sorted by descending correlation")

    selected: typing.List[RankedTerm] = []
    for candidate in ranked:
        if len(selected) >= config.max_terms:
            break
        if config.min_r and candidate.r < config.min_r:
            __logger.debug("Dropping '%s': r below %s", candidate.term, config.min_r)
            continue
        if not is_relevant(candidate.term, config.lexicon):
            __logger.debug("Dropping '%s': not relevant", candidate.term)
            continue
        if config.dedup_plural and any(
            are_plural_siblings(candidate.term, chosen.term) for chosen in selected
        ):
            __logger.debug("Dropping '%s': plural sibling already chosen", candidate.term)
            continue
        selected.append(candidate)
    return selected


def cross_check_export(
    rows: typing.Sequence[CorrelateExportRow],
    target: RegionSeries,
    tolerance: float = constants.EXPORT_R_TOLERANCE,
) -> typing.Dict[str, float]:
    """Recomputes every stored correlation against ``target``.

    Returns the recomputed values, raising if any stored one is off by more
    than ``tolerance``.
    """
    recomputed = {}
    mismatches = {}
    for row in rows:
        term, stored_r = row.term, row.r
        order = row.z_series.regions
        r_value = pearson_r(row.z_series.vector(order), target.vector(order))
        recomputed[term] = r_value
        if stored_r is not None and abs(stored_r - r_value) > tolerance:
            mismatches[term] = (stored_r, r_value)
    if mismatches:
        raise FertcastException(
            f"Stored correlations do not match the target '{target.variable_name}': {mismatches}"
        )
    return recomputed

import logging
import math
import os
import typing

import numpy as np

from fertcast import constants
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.models.config_models import SynthConfig
from fertcast.models.correlate_models import CorrelateExportRow, Lexicon
from fertcast.models.series_models import FertilityVariable, ZScoredSeries
from fertcast.models.transfer_models import MonthlyTermVolume
from fertcast.series import fertility_intensity, pearson_r, zscore_vector
from fertcast.transfer import national_truth

# Whole words, each starting with a fertility lexicon stem
PLANTED_WORDS = [
    "baby",
    "pregnancy",
    "birth",
    "stroller",
    "potty",
    "nursing",
    "womb",
    "diaper",
    "newborn",
    "toddler",
    "crib",
    "infant",
]
FILLER_WORDS = [
    "weather",
    "recipe",
    "football",
    "guitar",
    "garden",
    "movie",
    "camping",
    "jacket",
    "soccer",
    "tax",
    "pizza",
    "laptop",
]


class SyntheticGenerator:
    """Builds a self-consistent dataset with known planted signal.

    Every output is a pure function of the configuration, seed included.
    """

    __YEARLY_DECLINE = 0.02
    __SEASONALITY = 0.1

    def __init__(self, file_manager: FileManager):
        self._file_manager = file_manager
        self._logger = logging.getLogger(self.__class__.__name__)

    def generate(self, config: SynthConfig) -> typing.Dict[str, typing.Any]:
        if config.n_planted * len(config.variables) > config.n_terms:
            raise FertcastException(
                f"{config.n_planted} planted terms per variable do not fit in "
                f"{config.n_terms} terms"
            )
        if config.n_regions < constants.MIN_REGIONS:
            raise FertcastException(
                f"At least {constants.MIN_REGIONS} regions are required, got {config.n_regions}"
            )
        if len(config.years) < 2:
            raise FertcastException("At least two years are required")

        rng = np.random.default_rng(config.seed)
        regions = [f"R{index:02d}" for index in range(1, config.n_regions + 1)]
        years = sorted(config.years)
        reference_year = years[-1]

        panel = self.__generate_panel(rng, regions, years, config.variables)
        targets = {
            variable.name: fertility_intensity(variable)
            for variable in panel[reference_year]
        }

        rows, planted = self.__generate_corpus(rng, regions, targets, config)
        volumes = self.__generate_volumes(rng, rows, planted, panel, years)

        self._file_manager.create_file_tree(config.output_dir)
        paths = {
            "ground_truth": constants.FILE_NAME_SYNTH_GROUND_TRUTH,
            "corpus": constants.FILE_NAME_SYNTH_CORPUS,
            "trends": constants.FILE_NAME_SYNTH_TRENDS,
            "lexicon": constants.FILE_NAME_SYNTH_LEXICON,
        }
        self._file_manager.write_ground_truth(
            os.path.join(config.output_dir, paths["ground_truth"]), panel
        )
        self._file_manager.write_correlate_export(
            os.path.join(config.output_dir, paths["corpus"]), rows, regions
        )
        self._file_manager.write_trends_monthly(
            os.path.join(config.output_dir, paths["trends"]), volumes
        )
        self._file_manager.write_lexicon(
            os.path.join(config.output_dir, paths["lexicon"]),
            Lexicon(
                allow=tuple(constants.FERTILITY_LEXICON_ALLOW),
                block=tuple(constants.FERTILITY_LEXICON_BLOCK),
            ),
        )

        manifest = {
            "seed": config.seed,
            "parameters": {
                "regions": config.n_regions,
                "terms": config.n_terms,
                "planted": config.n_planted,
                "noise": config.noise_level,
                "variables": list(config.variables),
                "years": years,
                "reference_year": reference_year,
            },
            "files": paths,
            "planted": planted,
        }
        self._file_manager.write_as_json(
            os.path.join(config.output_dir, constants.FILE_NAME_SYNTH_MANIFEST), manifest
        )
        self._logger.info(
            "Generated %d regions, %d terms and %d years into %s",
            config.n_regions,
            config.n_terms,
            len(years),
            config.output_dir,
        )
        return manifest

    def __generate_panel(
        self, rng, regions, years, variables
    ) -> typing.Dict[int, typing.List[FertilityVariable]]:
        reference_year = years[-1]
        women = {region: int(rng.integers(50_000, 3_000_000)) for region in regions}
        reference_rates = {}
        for name in variables:
            mean, std = constants.REFERENCE_VARIABLES[name]
            rates = mean + std * rng.standard_normal(len(regions))
            reference_rates[name] = np.maximum(rates, 0.1 * mean)

        panel = {}
        for year in years:
            # Earlier years sit higher: national fertility declines
            level = 1.0 + self.__YEARLY_DECLINE * (reference_year - year)
            year_women = {
                region: int(round(count * (1.0 - 0.005 * (reference_year - year))))
                for region, count in women.items()
            }
            year_variables = []
            for name in variables:
                jitter = 1.0 + 0.01 * rng.standard_normal(len(regions))
                births = {
                    region: int(
                        round(
                            rate
                            * level
                            * factor
                            * year_women[region]
                            / constants.DEFAULT_INTENSITY_SCALE
                        )
                    )
                    for region, rate, factor in zip(
                        regions, reference_rates[name], jitter
                    )
                }
                year_variables.append(
                    FertilityVariable(name=name, births=births, women_15_50=year_women)
                )
            panel[year] = year_variables
        return panel

    @staticmethod
    def __planted_name(index: int, variable: str, ordinal: int) -> str:
        word = PLANTED_WORDS[index % len(PLANTED_WORDS)]
        return f"{word} {variable.lower()}{ordinal}"

    @staticmethod
    def __filler_name(index: int) -> str:
        first = FILLER_WORDS[index % len(FILLER_WORDS)]
        second = FILLER_WORDS[(index // len(FILLER_WORDS)) % len(FILLER_WORDS)]
        return f"{first} {second} {index:04d}"

    def __generate_corpus(self, rng, regions, targets, config: SynthConfig):
        rows = []
        planted: typing.Dict[str, typing.List[typing.Dict[str, typing.Any]]] = {}
        planted_index = 0
        for name in config.variables:
            target_z = zscore_vector(targets[name].vector(regions), name=name)
            planted[name] = []
            for ordinal in range(1, config.n_planted + 1):
                slope = float(rng.uniform(0.5, 2.0))
                offset = float(rng.uniform(-1.0, 1.0))
                noise = rng.standard_normal(len(regions))
                raw = slope * (target_z + config.noise_level * noise) + offset
                term = self.__planted_name(planted_index, name, ordinal)
                planted_index += 1
                z_values = zscore_vector(raw, name=term)
                r_value = pearson_r(z_values, target_z)
                rows.append(
                    CorrelateExportRow(
                        term=term,
                        z_series=ZScoredSeries.from_vector(term, regions, z_values),
                    )
                )
                planted[name].append(
                    {
                        "term": term,
                        "slope": slope,
                        "offset": offset,
                        "r": r_value,
                        "expected_r": 1.0 / math.sqrt(1.0 + config.noise_level**2),
                    }
                )

        for index in range(config.n_terms - planted_index):
            term = self.__filler_name(index)
            z_values = zscore_vector(rng.standard_normal(len(regions)), name=term)
            rows.append(
                CorrelateExportRow(
                    term=term, z_series=ZScoredSeries.from_vector(term, regions, z_values)
                )
            )
        return rows, planted

    def __generate_volumes(
        self, rng, rows, planted, panel, years
    ) -> typing.List[MonthlyTermVolume]:
        planted_by_term = {
            entry["term"]: (name, entry)
            for name, entries in planted.items()
            for entry in entries
        }
        national = {}
        for name in planted.keys():
            variable_panel = {
                year: next(item for item in panel[year] if item.name == name)
                for year in years
            }
            truth = national_truth(variable_panel)
            national[name] = zscore_vector([truth[year] for year in years], name=name)

        seasonal = 1.0 + self.__SEASONALITY * np.sin(2.0 * np.pi * np.arange(12) / 12.0)
        seasonal = seasonal / seasonal.sum()
        volumes = []
        for row in rows:
            base = float(rng.uniform(1_000.0, 100_000.0))
            if row.term in planted_by_term:
                name, _ = planted_by_term[row.term]
                shape = national[name] + 0.3 * rng.standard_normal(len(years))
            else:
                shape = rng.standard_normal(len(years))
            # Yearly totals stay positive: the shape moves them by at most ~30%
            yearly = base * (1.0 + 0.1 * np.clip(shape, -3.0, 3.0))
            samples = {}
            for year, total in zip(years, yearly):
                monthly = total * seasonal * (1.0 + 0.02 * rng.standard_normal(12))
                for month, value in enumerate(monthly, start=1):
                    samples[(year, month)] = float(max(value, 0.0))
            volumes.append(MonthlyTermVolume(term=row.term, samples=samples))
        return volumes

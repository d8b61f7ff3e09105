import dataclasses
import json
import logging
import os
import pathlib
import re
import typing

import marshmallow.exceptions
import numpy as np
import pandas as pd
import yaml

from fertcast import constants
from fertcast.exceptions import (
    DataFormatException,
    FertcastException,
    FertcastValidationException,
    RegionMismatchException,
)
from fertcast.models.correlate_models import (
    CorrelateExportRow,
    Lexicon,
    LexiconSchema,
    RankedTerm,
)
from fertcast.models.evaluation_models import EvaluationReport
from fertcast.models.regression_models import FittedModel, FittedModelSchema
from fertcast.models.series_models import FertilityVariable, ZScoredSeries
from fertcast.models.transfer_models import MonthlyTermVolume, TrendReport

PathType = typing.Union[str, os.PathLike]


class FileManager:
    """Readers and writers for every file the toolkit consumes or emits.

    All CSVs are UTF-8, comma separated, with a header row. Numbers are
    written with Python's shortest round-trip representation so writing
    and reading back yields identical values.
    """

    class EnhancedJSONEncoder(json.JSONEncoder):
        def default(self, o):
            if dataclasses.is_dataclass(o):
                return dataclasses.asdict(o)
            if isinstance(o, np.generic):
                return o.item()
            return super().default(o)

    __MONTH_REGEX = re.compile("^(\\d{4})-(\\d{2})$")
    __COEFFICIENT_PREFIX = "coef."

    def __init__(self, ddof: int = constants.DEFAULT_STD_DDOF):
        self._ddof = ddof
        self._logger = logging.getLogger(self.__class__.__name__)

    @staticmethod
    def create_file_tree(path: PathType):
        pathlib.Path(path).mkdir(parents=True, exist_ok=True)

    @classmethod
    def write_as_json(cls, path: PathType, content: typing.Dict[str, typing.Any]):
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            json.dump(content, file, indent=2, sort_keys=True, cls=cls.EnhancedJSONEncoder)
            file.write("\n")

    @staticmethod
    def read_yaml_file(path: PathType) -> typing.Dict[str, typing.Any]:
        with open(path, encoding="utf-8") as file:
            return yaml.safe_load(file)

    @staticmethod
    def write_yaml_file(path: PathType, content: typing.Dict[str, typing.Any]):
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            yaml.safe_dump(content, file, sort_keys=True)

    @staticmethod
    def __write_frame(path: PathType, frame: pd.DataFrame):
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")

    def __read_frame(
        self, path: PathType, expected_columns: typing.Sequence[str] = None
    ) -> pd.DataFrame:
        try:
            frame = pd.read_csv(
                path,
                dtype=str,
                keep_default_na=False,
                encoding="utf-8",
                skip_blank_lines=True,
            )
        except pd.errors.EmptyDataError as err:
            raise DataFormatException(path, "File has no header") from err
        except pd.errors.ParserError as err:
            raise DataFormatException(path, f"Malformed CSV: {err}") from err
        frame.columns = [str(column).strip() for column in frame.columns]
        if expected_columns is not None and list(frame.columns) != list(expected_columns):
            raise DataFormatException(
                path,
                f"Unexpected header {list(frame.columns)}, expected {list(expected_columns)}",
                line=1,
            )
        if frame.empty:
            self._logger.warning("%s has no data rows", path)
        return frame

    @staticmethod
    def __parse_float(path, line, column, value) -> float:
        try:
            parsed = float(value)
        except (TypeError, ValueError) as err:
            raise DataFormatException(
                path, f"Column '{column}' is not a number: '{value}'", line=line
            ) from err
        if not np.isfinite(parsed):
            raise DataFormatException(
                path, f"Column '{column}' is not finite: '{value}'", line=line
            )
        return parsed

    def __read_ground_truth_rows(self, path: PathType):
        frame = self.__read_frame(path)
        columns = list(frame.columns)
        with_year = [constants.GROUND_TRUTH_YEAR_COLUMN] + constants.GROUND_TRUTH_COLUMNS
        if columns not in (constants.GROUND_TRUTH_COLUMNS, with_year):
            raise DataFormatException(
                path,
                f"Unexpected header {columns}, expected {constants.GROUND_TRUTH_COLUMNS} "
                f"optionally preceded by '{constants.GROUND_TRUTH_YEAR_COLUMN}'",
                line=1,
            )
        has_year = columns == with_year

        rows = []
        seen = {}
        for index, record in enumerate(frame.to_dict("records")):
            line = index + 2
            year = None
            if has_year:
                try:
                    year = int(record[constants.GROUND_TRUTH_YEAR_COLUMN])
                except ValueError as err:
                    raise DataFormatException(
                        path, f"Invalid year '{record['year']}'", line=line
                    ) from err
            region = record["region"].strip()
            variable = record["variable"].strip()
            if not region or not variable:
                raise DataFormatException(path, "Empty region or variable", line=line)
            births = self.__parse_float(path, line, "births", record["births"])
            women = self.__parse_float(path, line, "women_15_50", record["women_15_50"])
            if births < 0:
                raise DataFormatException(path, "Negative births", line=line)
            if women <= 0:
                raise DataFormatException(path, "Non positive women_15_50", line=line)
            key = (year, region, variable)
            if key in seen:
                raise DataFormatException(
                    path,
                    f"Duplicated ({region}, {variable}) record, first seen at line {seen[key]}",
                    line=line,
                )
            seen[key] = line
            rows.append((year, region, variable, births, women))
        return rows, has_year

    @staticmethod
    def __group_variables(rows) -> typing.List[FertilityVariable]:
        grouped: typing.Dict[str, typing.Tuple[dict, dict]] = {}
        for _, region, variable, births, women in rows:
            births_map, women_map = grouped.setdefault(variable, ({}, {}))
            births_map[region] = births
            women_map[region] = women
        return [
            FertilityVariable(name=name, births=births_map, women_15_50=women_map)
            for name, (births_map, women_map) in grouped.items()
        ]

    def read_ground_truth(
        self, path: PathType, year: int = None
    ) -> typing.List[FertilityVariable]:
        """Variables of one year, in order of first appearance.

        Single year files ignore ``year``; panels with a year column default
        to their latest year.
        """
        self._logger.info("Loading ground truth from %s", path)
        rows, has_year = self.__read_ground_truth_rows(path)
        if has_year and rows:
            year = year if year is not None else max(row[0] for row in rows)
            rows = [row for row in rows if row[0] == year]
            if not rows:
                raise FertcastException(f"Ground truth {path} has no data for {year}")
        return self.__group_variables(rows)

    def read_ground_truth_panel(
        self, path: PathType, required: bool = True
    ) -> typing.Dict[str, typing.Dict[int, FertilityVariable]]:
        """Variable name -> year -> variable, for files with a year column.

        Files without one yield an empty panel unless ``required``.
        """
        rows, has_year = self.__read_ground_truth_rows(path)
        if not has_year and not required:
            return {}
        if not has_year:
            raise DataFormatException(
                path, "Yearly ground truth needs a leading 'year' column", line=1
            )
        panel: typing.Dict[str, typing.Dict[int, FertilityVariable]] = {}
        for year in sorted({row[0] for row in rows}):
            for variable in self.__group_variables([row for row in rows if row[0] == year]):
                panel.setdefault(variable.name, {})[year] = variable
        return panel

    def write_ground_truth(
        self,
        path: PathType,
        variables: typing.Union[
            typing.Sequence[FertilityVariable],
            typing.Mapping[int, typing.Sequence[FertilityVariable]],
        ],
    ):
        records = []
        if isinstance(variables, typing.Mapping):
            columns = [constants.GROUND_TRUTH_YEAR_COLUMN] + constants.GROUND_TRUTH_COLUMNS
            for year, year_variables in sorted(variables.items()):
                for variable in year_variables:
                    for region in sorted(variable.births.keys()):
                        records.append(
                            [
                                year,
                                region,
                                variable.name,
                                variable.births[region],
                                variable.women_15_50[region],
                            ]
                        )
        else:
            columns = constants.GROUND_TRUTH_COLUMNS
            for variable in variables:
                for region in sorted(variable.births.keys()):
                    records.append(
                        [
                            region,
                            variable.name,
                            variable.births[region],
                            variable.women_15_50[region],
                        ]
                    )
        self.__write_frame(path, pd.DataFrame(records, columns=columns))

    def read_correlate_export(
        self, path: PathType, regions: typing.Iterable[str] = None, ddof: int = None
    ) -> typing.List[CorrelateExportRow]:
        """Rows of ``term,r,<region>...``; r may be empty.

        Every row must already be z-scored (under the configured standard
        deviation divisor) within the export tolerance.
        """
        ddof = self._ddof if ddof is None else ddof
        self._logger.info("Loading correlate export from %s", path)
        frame = self.__read_frame(path)
        columns = list(frame.columns)
        if columns[:2] != ["term", "r"] or len(columns) < 3:
            raise DataFormatException(
                path, f"Unexpected header {columns}, expected term,r,<regions>", line=1
            )
        region_columns = columns[2:]
        if len(set(region_columns)) != len(region_columns):
            raise DataFormatException(path, "Duplicated region columns", line=1)
        if regions is not None and set(regions) != set(region_columns):
            raise RegionMismatchException(
                f"Regions of {path} differ from the ground truth",
                set(regions) ^ set(region_columns),
            )

        rows = []
        rejected = {}
        for index, record in enumerate(frame.to_dict("records")):
            line = index + 2
            term = record["term"].strip()
            if not term:
                raise DataFormatException(path, "Empty term", line=line)
            stored_r = (
                self.__parse_float(path, line, "r", record["r"])
                if record["r"].strip()
                else None
            )
            values = np.array(
                [
                    self.__parse_float(path, line, region, record[region])
                    for region in region_columns
                ]
            )
            mean = float(values.mean())
            std = float(values.std(ddof=ddof)) if values.size > ddof else 0.0
            if (
                abs(mean) > constants.EXPORT_ZSCORE_TOLERANCE
                or abs(std - 1.0) > constants.EXPORT_ZSCORE_TOLERANCE
            ):
                rejected[str(line)] = {"term": term, "mean": mean, "std": std}
                continue
            rows.append(
                CorrelateExportRow(
                    term=term,
                    z_series=ZScoredSeries.from_vector(term, region_columns, values),
                    r=stored_r,
                )
            )
        if rejected:
            raise FertcastValidationException(
                f"Rows of {path} are not z-scored (ddof={ddof})", rejected
            )
        return rows

    def write_correlate_export(
        self,
        path: PathType,
        rows: typing.Sequence[typing.Union[CorrelateExportRow, RankedTerm]],
        region_order: typing.Sequence[str],
    ):
        records = []
        for row in rows:
            series = row.z_series
            stored_r = row.r
            records.append(
                [row.term, "" if stored_r is None else stored_r]
                + list(series.vector(region_order))
            )
        self.__write_frame(
            path, pd.DataFrame(records, columns=["term", "r"] + list(region_order))
        )

    def read_trends_monthly(self, path: PathType) -> typing.List[MonthlyTermVolume]:
        self._logger.info("Loading monthly trends from %s", path)
        frame = self.__read_frame(path, constants.TRENDS_COLUMNS)
        samples: typing.Dict[str, typing.Dict[typing.Tuple[int, int], float]] = {}
        seen = {}
        for index, record in enumerate(frame.to_dict("records")):
            line = index + 2
            match = self.__MONTH_REGEX.match(record["month"].strip())
            if not match or not 1 <= int(match.group(2)) <= 12:
                raise DataFormatException(
                    path, f"Invalid month '{record['month']}', expected YYYY-MM", line=line
                )
            term = record["term"].strip()
            if not term:
                raise DataFormatException(path, "Empty term", line=line)
            volume = self.__parse_float(path, line, "volume", record["volume"])
            if volume < 0:
                raise DataFormatException(path, f"Negative volume {volume}", line=line)
            key = (int(match.group(1)), int(match.group(2)))
            if (term, key) in seen:
                raise DataFormatException(
                    path,
                    f"Duplicated ({term}, {record['month']}) sample, first seen at line {seen[(term, key)]}",
                    line=line,
                )
            seen[(term, key)] = line
            samples.setdefault(term, {})[key] = volume
        return [MonthlyTermVolume(term=term, samples=data) for term, data in samples.items()]

    def write_trends_monthly(self, path: PathType, volumes: typing.Sequence[MonthlyTermVolume]):
        records = [
            [f"{year:04d}-{month:02d}", volume.term, value]
            for volume in volumes
            for (year, month), value in sorted(volume.samples.items())
        ]
        self.__write_frame(path, pd.DataFrame(records, columns=constants.TRENDS_COLUMNS))

    def read_lexicon(self, path: PathType) -> Lexicon:
        try:
            return LexiconSchema().load(self.read_yaml_file(path) or {})
        except marshmallow.exceptions.ValidationError as err:
            raise FertcastValidationException(
                f"Validation issues in lexicon {path}", err.messages_dict
            ) from err

    def write_lexicon(self, path: PathType, lexicon: Lexicon):
        self.write_yaml_file(path, {"allow": list(lexicon.allow), "block": list(lexicon.block)})

    def write_model(self, path: PathType, model: FittedModel):
        data = FittedModelSchema().dump(model)
        lines = [f"family={data['family']}"]
        if data.get("variable") is not None:
            lines.append(f"variable={data['variable']}")
        lines.append(f"intercept={data['intercept']!r}")
        if data.get("lambda") is not None:
            lines.append(f"lambda={data['lambda']!r}")
        for term, coefficient in (data.get("coefficients") or {}).items():
            lines.append(f"{self.__COEFFICIENT_PREFIX}{term}={coefficient!r}")
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write("\n".join(lines) + "\n")

    def read_model(self, path: PathType) -> FittedModel:
        data: typing.Dict[str, typing.Any] = {}
        coefficients = {}
        with open(path, encoding="utf-8") as file:
            for line_number, line in enumerate(file, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, separator, value = line.rpartition("=")
                if not separator or not key:
                    raise DataFormatException(path, f"Expected key=value, got '{line}'", line_number)
                if key.startswith(self.__COEFFICIENT_PREFIX):
                    coefficients[key[len(self.__COEFFICIENT_PREFIX) :]] = value
                else:
                    data[key] = value
        if data.get("family") != constants.MODEL_FAMILY_CONSTANT:
            data["coefficients"] = coefficients
        elif coefficients:
            raise DataFormatException(path, "Constant models cannot have coefficients")
        try:
            return FittedModelSchema().load(data)
        except marshmallow.exceptions.ValidationError as err:
            raise FertcastValidationException(
                f"Validation issues in model file {path}", err.messages_dict
            ) from err

    def write_evaluation(
        self,
        path: PathType,
        reports: typing.Sequence[EvaluationReport],
        scale: float = constants.DEFAULT_INTENSITY_SCALE,
    ):
        records = [
            [
                report.variable,
                report.family,
                report.metrics.r,
                report.metrics.rmse * 1000.0 / scale,
                report.metrics.smape_pct,
            ]
            for report in reports
        ]
        self.__write_frame(path, pd.DataFrame(records, columns=constants.EVALUATION_COLUMNS))

    def write_sparsification(self, path: PathType, model: FittedModel):
        records = [
            [model.variable, term, "kept" if coefficient != 0.0 else "removed"]
            for term, coefficient in model.coefficients.items()
        ]
        self.__write_frame(
            path, pd.DataFrame(records, columns=constants.SPARSIFICATION_COLUMNS)
        )

    def write_trends_summary(
        self, path: PathType, reports: typing.Sequence[TrendReport]
    ):
        records = [[report.variable, report.r] for report in reports]
        self.__write_frame(path, pd.DataFrame(records, columns=constants.TREND_COLUMNS))

    def write_plot_data(self, path: PathType, report: TrendReport):
        frame = pd.DataFrame(
            {
                "year": list(report.years),
                "predicted": list(report.predicted),
                "truth": list(report.truth),
                "predicted_rescaled": list(report.predicted_rescaled),
                "truth_rescaled": list(report.truth_rescaled),
            },
            columns=constants.PLOT_COLUMNS,
        )
        self.__write_frame(path, frame)

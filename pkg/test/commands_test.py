import os
from unittest.mock import patch

import pytest

from fertcast import constants
from fertcast.file_manager import FileManager
from fertcast.main import main

_LASSO_ARGS = ["--lambda-points", "10", "--lambda-ratio", "0.01"]


def _main(*argv):
    with patch("sys.argv", ["fertcast", *argv]):
        main()


def _exit_code(*argv):
    with pytest.raises(SystemExit) as err:
        _main(*argv)
    return err.value.code


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("data")
    _main(
        "synth",
        "--quiet",
        "--seed", "3",
        "--regions", "15",
        "--terms", "25",
        "--noise", "0.3",
        "--variables", "Gen",
        "--years", "2012", "2013", "2014", "2015",
        "-d", str(directory),
    )
    return directory


def _target_args(data_dir):
    return [
        "--target", "Gen",
        "--ground-truth", str(data_dir / constants.FILE_NAME_SYNTH_GROUND_TRUTH),
        "--reference-year", "2015",
    ]


class TestCommandChain:
    def test_stage_by_stage(self, data_dir, tmp_path):
        ranked = tmp_path / "ranked.csv"
        selected = tmp_path / "selected.csv"
        model = tmp_path / "model.txt"
        evaluation = tmp_path / "evaluation.csv"

        _main(
            "correlate", "--quiet", *_target_args(data_dir),
            "--corpus", str(data_dir / constants.FILE_NAME_SYNTH_CORPUS),
            "-k", "10", "-o", str(ranked),
        )
        assert len(ranked.read_text().splitlines()) == 11

        _main(
            "select", "--quiet", "--ranked", str(ranked),
            "--lexicon", str(data_dir / constants.FILE_NAME_SYNTH_LEXICON),
            "-o", str(selected),
        )
        terms = [line.split(",")[0] for line in selected.read_text().splitlines()[1:]]
        assert 1 <= len(terms) <= constants.DEFAULT_MAX_TERMS

        _main(
            "fit", "--quiet", *_target_args(data_dir), *_LASSO_ARGS,
            "--family", constants.MODEL_FAMILY_LASSO,
            "--selected", str(selected), "-o", str(model),
        )
        fitted = FileManager().read_model(model)
        assert fitted.family == constants.MODEL_FAMILY_LASSO
        assert set(fitted.coefficients) == set(terms)

        _main(
            "evaluate", "--quiet", "--loocv", *_target_args(data_dir), *_LASSO_ARGS,
            "--selected", str(selected), "-o", str(evaluation),
        )
        families = [line.split(",")[1] for line in evaluation.read_text().splitlines()[1:]]
        assert families == list(constants.MODEL_FAMILIES)

        _main(
            "transfer", "--quiet",
            "--trends", str(data_dir / constants.FILE_NAME_SYNTH_TRENDS),
            "--truth", str(data_dir / constants.FILE_NAME_SYNTH_GROUND_TRUTH),
            "--model", str(model),
            "-d", str(tmp_path / "trend"),
        )
        plot = (tmp_path / "trend" / constants.FILE_NAME_PLOT_DATA).read_text().splitlines()
        assert plot[0] == ",".join(constants.PLOT_COLUMNS)
        assert [line.split(",")[0] for line in plot[1:]] == ["2012", "2013", "2014", "2015"]
        assert os.path.isfile(tmp_path / "trend" / constants.FILE_NAME_TREND)

    def test_run_from_config_file(self, data_dir, tmp_path):
        config = tmp_path / "pipeline.conf"
        config.write_text(
            "\n".join(
                [
                    f"ground-truth = {data_dir / constants.FILE_NAME_SYNTH_GROUND_TRUTH}",
                    f"corpus = {data_dir / constants.FILE_NAME_SYNTH_CORPUS}",
                    f"trends = {data_dir / constants.FILE_NAME_SYNTH_TRENDS}",
                    f"lexicon = {data_dir / constants.FILE_NAME_SYNTH_LEXICON}",
                    "top-k = 10",
                    "lambda-points = 10",
                    "lambda-ratio = 0.01",
                ]
            )
            + "\n",
            encoding="utf-8",
        )
        _main("run", "--quiet", "-c", str(config), "-d", str(tmp_path / "out"))
        assert os.path.isfile(tmp_path / "out" / "Gen" / constants.FILE_NAME_MODEL)
        assert os.path.isfile(tmp_path / "out" / constants.FILE_NAME_TRENDS_SUMMARY)

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(constants.ENV_VAR_OUTPUT_DIR, str(tmp_path / "env"))
        _main("synth", "--quiet", "--regions", "5", "--terms", "4", "--planted", "1",
              "--variables", "Gen", "--years", "2014", "2015")
        assert os.path.isfile(tmp_path / "env" / constants.FILE_NAME_SYNTH_MANIFEST)


class TestExitCodes:
    def test_missing_ground_truth(self, data_dir, tmp_path):
        code = _exit_code(
            "correlate", "--quiet",
            "--target", "Gen",
            "--ground-truth", str(tmp_path / "missing.csv"),
            "--corpus", str(data_dir / constants.FILE_NAME_SYNTH_CORPUS),
            "-o", str(tmp_path / "ranked.csv"),
        )
        assert code == 2

    def test_unknown_variable(self, data_dir, tmp_path):
        code = _exit_code(
            "correlate", "--quiet",
            "--target", "Nope",
            "--ground-truth", str(data_dir / constants.FILE_NAME_SYNTH_GROUND_TRUTH),
            "--corpus", str(data_dir / constants.FILE_NAME_SYNTH_CORPUS),
            "-o", str(tmp_path / "ranked.csv"),
        )
        assert code == 1

    def test_evaluate_needs_loocv(self, data_dir, tmp_path):
        code = _exit_code(
            "evaluate", "--quiet", *_target_args(data_dir),
            "--selected", str(tmp_path / "selected.csv"),
            "-o", str(tmp_path / "evaluation.csv"),
        )
        assert code == 1

    def test_missing_run_input(self, data_dir, tmp_path):
        code = _exit_code(
            "run", "--quiet",
            "--ground-truth", str(data_dir / constants.FILE_NAME_SYNTH_GROUND_TRUTH),
            "--corpus", str(tmp_path / "missing.csv"),
            "--trends", str(data_dir / constants.FILE_NAME_SYNTH_TRENDS),
            "-d", str(tmp_path / "out"),
        )
        assert code == 2

    def test_invalid_synth_options(self, tmp_path):
        code = _exit_code(
            "synth", "--quiet", "--terms", "2", "--planted", "3",
            "--variables", "Gen", "-d", str(tmp_path),
        )
        assert code == 1

    def test_missing_required_option(self):
        assert _exit_code("fit", "--quiet") == 2

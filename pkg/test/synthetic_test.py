import os

import pytest

from fertcast import constants
from fertcast.correlation_search import build_corpus, top_k_correlated
from fertcast.exceptions import FertcastException
from fertcast.file_manager import FileManager
from fertcast.models.config_models import SynthConfig
from fertcast.series import fertility_intensity
from fertcast.synthetic import SyntheticGenerator

_OUTPUT_FILES = [
    constants.FILE_NAME_SYNTH_GROUND_TRUTH,
    constants.FILE_NAME_SYNTH_CORPUS,
    constants.FILE_NAME_SYNTH_TRENDS,
    constants.FILE_NAME_SYNTH_LEXICON,
    constants.FILE_NAME_SYNTH_MANIFEST,
]


def _config(output_dir, **kwargs):
    values = dict(
        output_dir=str(output_dir),
        seed=7,
        n_regions=12,
        n_terms=30,
        n_planted=3,
        noise_level=0.5,
        variables=("Gen", "Teen"),
        years=(2012, 2013, 2014),
    )
    values.update(kwargs)
    return SynthConfig(**values)


class TestSyntheticGenerator:
    def test_writes_every_file(self, tmp_path):
        manifest = SyntheticGenerator(FileManager()).generate(_config(tmp_path))
        for name in _OUTPUT_FILES:
            assert os.path.isfile(tmp_path / name)
        assert manifest["seed"] == 7
        assert manifest["parameters"]["reference_year"] == 2014
        assert sorted(manifest["planted"]) == ["Gen", "Teen"]
        assert all(len(entries) == 3 for entries in manifest["planted"].values())

    def test_same_seed_same_bytes(self, tmp_path):
        generator = SyntheticGenerator(FileManager())
        generator.generate(_config(tmp_path / "first"))
        generator.generate(_config(tmp_path / "second"))
        for name in _OUTPUT_FILES:
            assert (tmp_path / "first" / name).read_bytes() == (
                tmp_path / "second" / name
            ).read_bytes()

    def test_other_seed_other_data(self, tmp_path):
        generator = SyntheticGenerator(FileManager())
        generator.generate(_config(tmp_path / "first"))
        generator.generate(_config(tmp_path / "second", seed=8))
        name = constants.FILE_NAME_SYNTH_CORPUS
        assert (tmp_path / "first" / name).read_bytes() != (
            tmp_path / "second" / name
        ).read_bytes()

    def test_files_are_readable(self, tmp_path):
        config = _config(tmp_path)
        SyntheticGenerator(FileManager()).generate(config)
        file_manager = FileManager()

        panel = file_manager.read_ground_truth_panel(tmp_path / constants.FILE_NAME_SYNTH_GROUND_TRUTH)
        assert sorted(panel) == ["Gen", "Teen"]
        assert list(panel["Gen"]) == [2012, 2013, 2014]
        assert len(panel["Gen"][2014].births) == 12

        rows = file_manager.read_correlate_export(
            tmp_path / constants.FILE_NAME_SYNTH_CORPUS,
            regions=panel["Gen"][2014].births.keys(),
        )
        assert len(rows) == 30
        assert all(row.r is None for row in rows)

        volumes = file_manager.read_trends_monthly(tmp_path / constants.FILE_NAME_SYNTH_TRENDS)
        assert {volume.term for volume in volumes} == {row.term for row in rows}
        assert all(len(volume.samples) == 36 for volume in volumes)

        lexicon = file_manager.read_lexicon(tmp_path / constants.FILE_NAME_SYNTH_LEXICON)
        assert lexicon.allow == tuple(constants.FERTILITY_LEXICON_ALLOW)

    def test_reference_rates_are_plausible(self, tmp_path):
        SyntheticGenerator(FileManager()).generate(
            _config(tmp_path, n_regions=60, variables=("Gen",), n_terms=3)
        )
        variables = FileManager().read_ground_truth(tmp_path / constants.FILE_NAME_SYNTH_GROUND_TRUTH)
        intensity = fertility_intensity(variables[0]).vector()
        mean, std = constants.REFERENCE_VARIABLES["Gen"]
        assert abs(intensity.mean() - mean) < 3 * std
        assert intensity.min() > 0

    def test_noiseless_planted_terms_rank_first(self, tmp_path):
        config = _config(tmp_path, noise_level=0.0, variables=("Gen",), n_regions=20)
        manifest = SyntheticGenerator(FileManager()).generate(config)
        file_manager = FileManager()
        target = fertility_intensity(
            file_manager.read_ground_truth(tmp_path / constants.FILE_NAME_SYNTH_GROUND_TRUTH)[0]
        )
        rows = file_manager.read_correlate_export(tmp_path / constants.FILE_NAME_SYNTH_CORPUS)
        ranked = top_k_correlated(
            build_corpus([(row.term, row.z_series) for row in rows]), target, 3
        )
        planted = {entry["term"] for entry in manifest["planted"]["Gen"]}
        assert {item.term for item in ranked} == planted
        assert all(item.r == pytest.approx(1.0, abs=1e-9) for item in ranked)
        assert all(entry["expected_r"] == 1.0 for entry in manifest["planted"]["Gen"])

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n_terms=5, n_planted=3),
            dict(n_regions=2),
            dict(years=(2014,)),
        ],
    )
    def test_invalid_configuration(self, tmp_path, kwargs):
        with pytest.raises(FertcastException):
            SyntheticGenerator(FileManager()).generate(_config(tmp_path, **kwargs))

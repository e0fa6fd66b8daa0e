import json

import pytest

from goodseq.config import Policy, Settings, configure, get_settings, reset_settings
from goodseq.errors import ConfigurationError
from goodseq.experiment import ExperimentConfig
from goodseq.modone import rational
from goodseq.utils import emit, format_number, json_value, render_csv


class TestSettings:
    def test_defaults(self):
        settings = get_settings()
        assert settings.precision_bits == 256
        assert settings.k_max == 64
        assert settings.tail_tol == 1e-12
        assert settings.threads == 1

    def test_defaults_cover_every_field(self):
        assert get_settings() == Settings()

    def test_environment_reaches_every_setting(self, monkeypatch):
        monkeypatch.setenv("GOODSEQ_EXACT_MODULUS_LIMIT", "4096")
        monkeypatch.setenv("GOODSEQ_SELECTION_WINDOW", "8")
        monkeypatch.setenv("GOODSEQ_H2_TOL", "1e-3")
        monkeypatch.setenv("GOODSEQ_MC_CHUNK", "512")
        reset_settings()
        settings = get_settings()
        assert (settings.exact_modulus_limit, settings.selection_window) == (4096, 8)
        assert (settings.h2_tol, settings.mc_chunk) == (1e-3, 512)

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("GOODSEQ_THREADS", "4")
        monkeypatch.setenv("GOODSEQ_PRECISION_BITS", "320")
        reset_settings()
        assert get_settings().threads == 4
        assert Policy.default().precision_bits == 320

    def test_configure(self):
        assert configure(threads=2).threads == 2
        assert get_settings().threads == 2
        reset_settings()
        assert get_settings() == Settings.from_env()

    def test_policy_overrides_skip_none(self):
        policy = Policy.default().with_overrides(k_max=10, tail_tol=None)
        assert policy.k_max == 10
        assert policy.tail_tol == 1e-12


class TestExperimentConfig:
    def test_precedence(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"family": "geometric:3", "n": 5, "K": 2}), encoding="utf-8")
        config = ExperimentConfig.from_sources(str(path), {"n": 7, "K": None}, ["K=4"])
        assert config.family == "geometric:3"
        assert config.n == 7
        assert config.K == 4

    def test_set_parses_json(self):
        config = ExperimentConfig.from_sources(sets=['N=[81, 729]', "check_blocks=true", "angles=1/3"])
        assert config.N == [81, 729]
        assert config.check_blocks is True
        assert config.angles == ["1/3"]

    def test_family_as_object(self):
        config = ExperimentConfig.from_sources(flags={"family": {"family": "geometric", "base": 5}})
        assert config.modulus().prefix(2) == [5, 25]

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(sets=["colour=red"])

    def test_bad_values(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(flags={"n": 0})
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(flags={"eta": ["102"]})
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(flags={"format": "xml"})
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(sets=["n=abc"])

    def test_bad_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(str(path))
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_sources(str(tmp_path / "missing.json"))

    def test_require(self):
        config = ExperimentConfig.from_sources()
        with pytest.raises(ConfigurationError, match="--family"):
            config.modulus()

    def test_angles_and_grid(self):
        config = ExperimentConfig.from_sources(flags={"angles": ["1/2"], "grid": 3})
        assert config.explicit_angles() == [rational(1, 2), rational(0), rational(1, 3), rational(2, 3)]

    def test_policy(self):
        config = ExperimentConfig.from_sources(flags={"k_max": 20})
        assert config.policy().k_max == 20
        assert config.policy().precision_bits == 256


class TestOutput:
    def test_format_number(self):
        assert format_number(None) == ""
        assert format_number(True) == "true"
        assert format_number(10 ** 30) == str(10 ** 30)
        assert format_number(0.1) == "0.10000000000000001"

    def test_json_value(self):
        assert json_value(2 ** 60) == str(2 ** 60)
        assert json_value(5) == 5
        assert json_value(float("inf")) is None

    def test_render_csv_appends_extra_columns(self):
        text = render_csv(["a", "b"], [{"a": 1, "b": 2, "c": False}])
        assert text == "a,b,c\n1,2,false\n"

    def test_emit_to_file(self, tmp_path):
        target = tmp_path / "out.json"
        emit(["n"], [{"n": 1}], "json", str(target))
        assert json.loads(target.read_text(encoding="utf-8")) == [{"n": 1}]

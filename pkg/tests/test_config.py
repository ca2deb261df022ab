"""Tests for the RunConfig class."""

import sys
from pathlib import Path

import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from matool.config import CONFIG_TEMPLATE, RunConfig, worker_count
from matool.errors import ConfigError


class TestRunConfig:
    """Tests for RunConfig loading."""

    def test_load_basic_config(self, tmp_path):
        """Test loading a basic config file."""
        config_content = """
problem:
  N: 2
  f_preset: ratpow
  f_params: {alpha: 2, beta: 2}

numerics:
  mesh_n: 513
  s_max: 1e3
  lambda_floor: 1.0e-4
"""
        config_file = tmp_path / ".matool.yml"
        config_file.write_text(config_content)

        config = RunConfig.load(config_file)

        assert config.problem.N == 2
        assert config.problem.exponent == 3.0
        assert config.problem.f_params == {"alpha": 2, "beta": 2}
        assert config.numerics.mesh_n == 513
        assert config.numerics.s_max == 1000.0
        assert config.numerics.lambda_floor == 1e-4
        assert config.source == config_file

    def test_template_loads_as_defaults(self, tmp_path, monkeypatch):
        """Test that the init template parses to the built-in defaults."""
        monkeypatch.delenv("MATOOL_OUT", raising=False)
        config_file = tmp_path / ".matool.yml"
        config_file.write_text(CONFIG_TEMPLATE)

        config = RunConfig.load(config_file).validate()

        assert config.to_dict() == RunConfig().to_dict()

    def test_load_expands_env_vars(self, tmp_path, monkeypatch):
        """Test that environment variables are expanded."""
        monkeypatch.setenv("MATOOL_TEST_MESH", "257")
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("numerics:\n  mesh_n: ${MATOOL_TEST_MESH}\n")

        config = RunConfig.load(config_file)

        assert config.numerics.mesh_n == 257

    def test_env_var_default(self, tmp_path, monkeypatch):
        """Test that ${VAR:-default} falls back when VAR is unset."""
        monkeypatch.delenv("MATOOL_OUT", raising=False)
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("output:\n  out_dir: ${MATOOL_OUT:-runs}\n")

        assert RunConfig.load(config_file).output.out_dir == "runs"

    def test_load_file_not_found(self, tmp_path):
        """Test that a missing config file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            RunConfig.load(tmp_path / "nonexistent.yml")

    def test_empty_file_is_defaults(self, tmp_path):
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("")

        assert RunConfig.load(config_file).to_dict() == RunConfig().to_dict()

    def test_malformed_yaml(self, tmp_path):
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("problem: [unclosed\n")

        with pytest.raises(ConfigError, match="Malformed"):
            RunConfig.load(config_file)

    def test_unknown_section(self, tmp_path):
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("plotting:\n  dpi: 300\n")

        with pytest.raises(ConfigError, match="Unknown config sections"):
            RunConfig.load(config_file)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="Unknown keys in 'numerics'"):
            RunConfig.from_dict({"numerics": {"mesh_size": 100}})

    def test_no_file_found_gives_defaults(self, tmp_path, monkeypatch):
        """Test that load() without a file anywhere returns the defaults."""
        monkeypatch.chdir(tmp_path)
        monkeypatch.setattr(RunConfig, "find_config_file", classmethod(lambda cls: None))

        config = RunConfig.load()

        assert config.source is None
        assert config.problem.f_preset == "exponential"


class TestFindConfigFile:
    """Tests for RunConfig.find_config_file."""

    def test_find_config_file_in_current_dir(self, tmp_path, monkeypatch):
        """Test finding config in current directory."""
        config_file = tmp_path / ".matool.yml"
        config_file.write_text("problem:\n  N: 1\n")
        monkeypatch.chdir(tmp_path)

        assert RunConfig.find_config_file() == config_file

    def test_find_config_file_in_parent_dir(self, tmp_path):
        """Test finding config in parent directory."""
        config_file = tmp_path / ".matool.yaml"
        config_file.write_text("problem:\n  N: 1\n")
        subdir = tmp_path / "subdir"
        subdir.mkdir()

        assert RunConfig.find_config_file(subdir) == config_file


# =============================================================================
# Overrides and validation
# =============================================================================


class TestOverrides:
    """Tests for apply_overrides."""

    def test_scalar_values(self):
        config = RunConfig().apply_overrides(
            ["numerics.mesh_n=257", "numerics.s_max=1e2", "problem.f_preset=ratpow"]
        )
        assert config.numerics.mesh_n == 257
        assert config.numerics.s_max == 100.0
        assert config.problem.f_preset == "ratpow"

    def test_mapping_value(self):
        config = RunConfig().apply_overrides(["problem.f_params={alpha: 3}"])
        assert config.problem.f_params == {"alpha": 3}

    @pytest.mark.parametrize("item", ["numerics.mesh_n", "mesh_n=3", "numerics.bogus=1"])
    def test_bad_override(self, item):
        with pytest.raises(ConfigError):
            RunConfig().apply_overrides([item])


class TestValidate:
    """Tests for validate."""

    def test_defaults_valid(self):
        RunConfig().validate()

    @pytest.mark.parametrize(
        ("override", "message"),
        [
            ("problem.N=0", "problem.N"),
            ("problem.p=1.5", "problem.p"),
            ("problem.R=-1", "problem.R"),
            ("numerics.tol_bisect=0", "tol_bisect"),
            ("numerics.s_min=1e5", "s_min"),
            ("numerics.lambda_floor=1e9", "lambda_floor"),
            ("numerics.points_per_decade=2", "points_per_decade"),
            ("output.format=xml", "output.format"),
            ("setlim.window=0", "setlim"),
            ("setlim.sequence=three_gap", "setlim.sequence"),
        ],
    )
    def test_rejects(self, override, message):
        config = RunConfig().apply_overrides([override])
        with pytest.raises(ConfigError, match=message):
            config.validate()

    @pytest.mark.parametrize("name", ["two_gap_head", "two_gap_even", "two_gap_odd"])
    def test_family_sequences_accepted(self, name):
        RunConfig().apply_overrides([f"setlim.sequence={name}"]).validate(solver=False)

    def test_small_mesh_only_for_solvers(self):
        config = RunConfig().apply_overrides(["numerics.mesh_n=16"])
        config.validate(solver=False)
        with pytest.raises(ConfigError, match="mesh_n"):
            config.validate()


class TestWorkerCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("MATOOL_THREADS", "3")
        assert worker_count() == 3

    def test_default_is_bounded(self, monkeypatch):
        monkeypatch.delenv("MATOOL_THREADS", raising=False)
        assert 1 <= worker_count() <= 8

    @pytest.mark.parametrize("raw", ["zero", "0"])
    def test_bad_env(self, monkeypatch, raw):
        monkeypatch.setenv("MATOOL_THREADS", raw)
        with pytest.raises(ConfigError, match="MATOOL_THREADS"):
            worker_count()

"""
Unit tests for TOML run configuration.
"""
import math

from pathlib import Path

import pytest

from aggrefem.config import DEFAULT_DOMAIN
from aggrefem.config import InitialSpec
from aggrefem.config import KernelSpec
from aggrefem.config import RunConfig
from aggrefem.config import load_config
from aggrefem.config import parse_config
from aggrefem.exceptions import ConfigError
from aggrefem.interaction import GaussianKernel
from aggrefem.interaction import ZeroKernel
from aggrefem.laws import PowerLaw
from aggrefem.solver import TimeStepConfig

TINY = """
[domain]
x_min = -1.0
x_max = 1.0
y_min = -1.0
y_max = 1.0
n_square = 2

[kernel]
kind = "zero"

[law]
nu = 0.5
m = 2

[initial]
kind = "gaussian"
value = 1.5
width = 0.25
center = [0.5, -0.5]

[time]
k = 0.05
t_final = 0.3
truncate_in_diffusion = true

[output]
directory = "results"
threads = 1
snapshot_every = 2
snapshot_times = [0.1]
"""


class TestParseConfig:
    """Test parse_config."""

    def test_empty_document_gives_defaults(self):
        """Test every key is optional."""
        config = parse_config("")
        assert config == RunConfig()
        assert config.domain == DEFAULT_DOMAIN
        assert config.n_square == 120
        assert config.time == TimeStepConfig()
        assert config.output_dir == Path('output')
        assert config.threads is None

    def test_full_document(self):
        """Test every section is read."""
        config = parse_config(TINY)
        assert tuple(config.domain) == (-1.0, 1.0, -1.0, 1.0)
        assert config.n_square == 2
        assert config.kernel == KernelSpec(kind='zero')
        assert (config.law.nu, config.law.m) == (0.5, 2.0)
        assert config.initial.center == (0.5, -0.5)
        assert (config.time.k, config.time.t_final) == (0.05, 0.3)
        assert config.time.truncate_in_diffusion
        assert config.output_dir == Path('results')
        assert config.threads == 1

    def test_snapshot_keys_move_to_time(self):
        """Test output snapshot keys configure the time stepper."""
        config = parse_config(TINY)
        assert config.time.snapshot_every == 2
        assert config.time.snapshot_times == (0.1,)

    def test_integers_accepted_for_floats(self):
        """Test TOML integers are read as numbers."""
        assert parse_config("[time]\nt_final = 3\n").time.t_final == 3.0

    @pytest.mark.parametrize('text, path', [
        ("[time]\ngamma = 1.5\n", 'time.gamma'),
        ("[time]\nk = 0.0\n", 'time.k'),
        ("[time]\nfp_max_iters = 0\n", 'time.fp_max_iters'),
        ("[law]\nm = 0.5\n", 'law.m'),
        ("[kernel]\nwidth = -1.0\n", 'kernel.width'),
        ("[kernel]\nkind = \"morse\"\n", 'kernel.kind'),
        ("[initial]\ncenter = [1.0]\n", 'initial.center'),
        ("[domain]\nx_min = 2.0\nx_max = 1.0\n", 'domain.x_max'),
        ("[domain]\nn_square = 0\n", 'domain.n_square'),
        ("[output]\nthreads = 0\n", 'output.threads'),
        ("[output]\nsnapshot_every = -1\n", 'output.snapshot_every'),
    ])
    def test_out_of_range(self, text, path):
        """Test range violations name the field."""
        with pytest.raises(ConfigError, match=path):
            parse_config(text)

    @pytest.mark.parametrize('text, path', [
        ("[time]\nk = \"fast\"\n", 'time.k'),
        ("[time]\nfp_max_iters = 2.5\n", 'time.fp_max_iters'),
        ("[time]\nmonitor_energy = 1\n", 'time.monitor_energy'),
        ("[kernel]\nkind = 3\n", 'kernel.kind'),
        ("[initial]\ncenter = 1.0\n", 'initial.center'),
        ("[output]\nsnapshot_times = [1.0, \"x\"]\n", r'output.snapshot_times\[1\]'),
        ("[domain]\nn_square = true\n", 'domain.n_square'),
        ("time = 1\n", 'time'),
    ])
    def test_wrong_type(self, text, path):
        """Test type errors name the field."""
        with pytest.raises(ConfigError, match=path):
            parse_config(text)

    def test_non_finite_number(self):
        """Test nan and inf are rejected."""
        with pytest.raises(ConfigError, match='time.t_final'):
            parse_config("[time]\nt_final = inf\n")

    def test_unknown_key(self):
        """Test misspelled keys are rejected."""
        with pytest.raises(ConfigError, match='time.gama: unknown key'):
            parse_config("[time]\ngama = 0.5\n")

    def test_unknown_section(self):
        """Test unknown sections are rejected."""
        with pytest.raises(ConfigError, match='mesh: unknown section'):
            parse_config("[mesh]\nn = 3\n")

    def test_malformed_toml(self):
        """Test TOML syntax errors."""
        with pytest.raises(ConfigError, match='^config: '):
            parse_config("[time\nk = 0.1\n")


class TestLoadConfig:
    """Test load_config."""

    def test_missing_file(self, tmp_path):
        """Test an unreadable path."""
        with pytest.raises(ConfigError, match='cannot read config'):
            load_config(tmp_path / 'absent.toml')

    def test_reads_file(self, tmp_path):
        """Test a config file on disk."""
        path = tmp_path / 'run.toml'
        path.write_text(TINY, encoding='utf-8')
        assert load_config(path) == parse_config(TINY)


class TestRunConfig:
    """Test RunConfig builders."""

    def test_builds_reference_objects(self):
        """Test the default selectors."""
        config = RunConfig(n_square=1)
        mesh = config.build_mesh()
        assert mesh.n_elements == 14
        assert isinstance(config.build_kernel(), GaussianKernel)
        assert config.build_kernel().amplitude == pytest.approx(1 / math.pi)
        law = config.build_law()
        assert isinstance(law, PowerLaw) and law(3.0) == pytest.approx(0.9)

    def test_builds_alternatives(self):
        """Test the zero kernel and the initial-data selectors."""
        config = parse_config(TINY)
        assert isinstance(config.build_kernel(), ZeroKernel)
        rho0 = config.build_initial()
        assert float(rho0([0.5, -0.5])) == pytest.approx(1.5)
        constant = InitialSpec(kind='constant', value=2.0).build()
        assert float(constant([[0.0, 0.0]])[0]) == 2.0
        indicator = InitialSpec().build()
        assert float(indicator([3.0, -3.0])) == 0.25
        assert float(indicator([3.5, 0.0])) == 0.0

    def test_replace(self):
        """Test replace revalidates."""
        config = RunConfig()
        assert config.replace(threads=2).threads == 2
        with pytest.raises(ConfigError):
            config.replace(n_square=0)

"""Collection of tests focused on the config module."""

import json

import pytest

from ahres import __version__
from ahres.base import ConfigError
from ahres.config import RunConfig, SweepConfig, parse_config, resolve_threads


class TestParseConfig:
    def test_empty_uses_defaults(self):
        config = parse_config("{}")

        assert config == RunConfig()
        assert config.modes == (0,)
        assert config.absorption.mode == "paper_sigma_dependent"

    def test_minimal(self):
        config = parse_config(json.dumps({"model": {"type": "cylinder"}, "modes": [0, 1], "grid": {"N": 64}}))

        assert config.model.type == "cylinder"
        assert config.modes == (0, 1)
        assert config.grid.N == 64
        assert config.grid.bc == "auto"
        assert config.absorption.mu0 == -0.2

    @pytest.mark.parametrize("text, pointer", [
        ('{"absorbtion": {}}', "/absorbtion"),
        ('{"absorption": {"mu0": 0.1}}', "/absorption/mu0"),
        ('{"absorption": {"mod": "off"}}', "/absorption/mod"),
        ('{"model": {"type": "torus"}}', "/model/type"),
        ('{"model": {"type": "custom"}}', "/model/custom_warp"),
        ('{"grid": {"N": 4}}', "/grid/N"),
        ('{"modes": []}', "/modes"),
        ('{"seed": "a"}', "/seed"),
        ('{"solver": {"s": 1, "window": {"re": [-1, 1], "im": [-5, -4]}}}', "/solver/window/im"),
        ('[1, 2]', ""),
        ('{"model": ', ""),
    ])
    def test_pointer(self, text, pointer):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(text)

        assert excinfo.value.pointer == pointer
        assert excinfo.value.to_dict()["details"]["pointer"] == pointer

    def test_bad_custom_warp(self):
        # w = 1 - mu vanishes inside [mu_left, mu_right] = [-0.5, 2]
        text = json.dumps({"model": {"type": "custom", "custom_warp": [1, -1], "mu_right": 2.0}})

        with pytest.raises(ConfigError) as excinfo:
            parse_config(text)

        assert excinfo.value.pointer == "/model"

    def test_sweep_order(self):
        with pytest.raises(ConfigError):
            SweepConfig(im_sigma=-2, s=2)


class TestProvenance:
    def test_hash_stable(self):
        a = parse_config('{"grid": {"N": 64}, "seed": 3}')
        b = parse_config('{"seed": 3, "grid": {"N": 64, "bc": "auto"}}')

        assert a.hash == b.hash
        assert len(a.hash) == 64
        assert a.hash != RunConfig().hash

    def test_roundtrip(self, default_config):
        assert parse_config(json.dumps(default_config.to_dict())) == default_config

    def test_block(self, default_config):
        block = default_config.provenance(N=128)

        assert block["config_hash"] == default_config.hash
        assert block["version"] == __version__
        assert block["N"] == 128
        assert block["config"]["absorption"]["interior_window"] is None


class TestCheckSweep:
    def test_trapping_refused(self):
        config = parse_config('{"model": {"type": "cylinder"}}')

        with pytest.raises(ConfigError) as excinfo:
            config.check_sweep()

        assert excinfo.value.pointer == "/absorption/interior_window"

    def test_trapping_with_interior_window(self):
        config = parse_config('{"model": {"type": "cylinder"}, "absorption": {"interior_window": [3.0, 3.8]}}')

        config.check_sweep()

    def test_non_trapping(self, default_config):
        default_config.check_sweep()


class TestThreads:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("AHRES_THREADS", raising=False)

        assert resolve_threads() == 1

    def test_env(self, monkeypatch):
        monkeypatch.setenv("AHRES_THREADS", "3")

        assert resolve_threads() == 3
        assert resolve_threads(2) == 2

    def test_all_cores(self, monkeypatch):
        monkeypatch.setattr("os.cpu_count", lambda: 7)

        assert resolve_threads(0) == 7

    @pytest.mark.parametrize("value", ["x", "-1"])
    def test_invalid_env(self, monkeypatch, value):
        monkeypatch.setenv("AHRES_THREADS", value)

        with pytest.raises(ConfigError):
            resolve_threads()

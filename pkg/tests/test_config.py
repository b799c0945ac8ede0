from pathlib import Path

import pytest

from lcsim import config, readout


def write(tmp_path, text):
    p = Path(tmp_path) / "cfg.toml"
    p.write_text(text)
    return p


def test_defaults_validate_with_seed():
    cfg = config.load_config()
    with pytest.raises(config.ConfigError, match="seed"):
        cfg.validate()
    cfg.seed = 1
    cfg.validate()
    assert cfg.experiment.n_qubits == [12] and cfg.experiment.shots == 250_000
    assert cfg.fluctuation.f00 == 0.96 and cfg.fluctuation.delta == [0.01, 0.01]


def test_load_file(tmp_path):
    p = write(tmp_path, """
seed = 7
[experiment]
n_qubits = 4
shots = 1000
noise = "none"
[noise]
cz_phase_std_rad = 0.05
[pulse]
max_iters = 10
""")
    cfg = config.load_config(p).validate()
    assert cfg.experiment.n_qubits == [4] and cfg.noise == {"cz_phase_std_rad": 0.05}
    assert "pulse.max_iters" in cfg.explicit


@pytest.mark.parametrize("text, field", [
    ("seed = 1\n[experiment]\nshots = 0\n", "experiment.shots"),
    ("seed = 1\n[experiment]\nn_qubits = [1]\n", "experiment.n_qubits"),
    ("seed = 1\n[experiment]\ngate_set = 'ISWAP'\n", "experiment.gate_set"),
    ("seed = 1\n[experiment]\nbootstrap = 10\n", "experiment.bootstrap"),
    ("seed = 1\n[fluctuation]\nf00 = 1.5\n", "fluctuation.f00"),
    ("seed = 1\n[fluctuation]\ndelta = [0.01]\n", "fluctuation.delta"),
    ("seed = 1\n[pulse]\ndt_ns = 0\n", "pulse.dt_ns"),
    ("seed = -1\n", "seed"),
    ("seed = 1\nworkers = 0\n", "workers"),
    ("seed = 1\ndevice = 'nope.toml'\n", "device"),
    ("seed = 1\n[experiment]\nfoo = 1\n", "experiment"),
    ("seed = 1\nbar = 2\n", "unknown"),
])
def test_field_level_errors(tmp_path, text, field):
    with pytest.raises(config.ConfigError, match=field.replace(".", r"\.")):
        config.load_config(write(tmp_path, text)).validate()


def test_bad_toml(tmp_path):
    with pytest.raises(config.ConfigError):
        config.load_config(write(tmp_path, "seed = \n"))
    with pytest.raises(config.ConfigError):
        config.load_config(Path(tmp_path) / "missing.toml")


def test_overrides():
    cfg = config.load_config()
    config.apply_override(cfg, "seed=3")
    config.apply_override(cfg, "experiment.n_qubits=5")
    config.apply_override(cfg, "experiment.gate_set=CX")
    config.apply_override(cfg, "noise.zz_rate_mhz=0.1")
    config.apply_override(cfg, "fluctuation.delta=[0.02, 0.0]")
    assert cfg.seed == 3 and cfg.experiment.n_qubits == [5]
    assert cfg.experiment.gate_set == "CX" and cfg.noise["zz_rate_mhz"] == 0.1
    assert cfg.fluctuation.delta == [0.02, 0.0]
    for bad in ("nokey", "x.y=1", "experiment.bogus=1", "a.b.c=1", "bogus=1"):
        with pytest.raises(config.ConfigError):
            config.apply_override(cfg, bad)


def test_pulse_settings_merge():
    cfg = config.load_config()
    dev = readout.bundled_device()
    pc = config.pulse_settings(cfg, dev)
    assert pc.tuned_anharm_mhz == -246.0 and pc.coupling_mhz == 12.0
    config.apply_override(cfg, "pulse.coupling_mhz=10.0")
    assert config.pulse_settings(cfg, dev).coupling_mhz == 10.0


def test_parse_range():
    assert config.parse_range("12") == [12]
    assert config.parse_range("4-6") == [4, 5, 6]
    assert config.parse_range("4,8,12") == [4, 8, 12]
    with pytest.raises(config.ConfigError):
        config.parse_range("a-b")

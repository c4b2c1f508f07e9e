import json
from pathlib import Path

import numpy as np
import pytest

from nlwaves.cli import main
from nlwaves.config import parse_config, parse_number
from nlwaves.errors import ConfigurationError

MINIMAL_STENCIL = """
[kernel]
family = constant
delta = 0.25

[grid]
h = 2^-4
beta = 1
p = 1

[outputs]
dir = {out}
prefix = toy
"""

RUN_TEMPLATE = """
[kernel]
family = constant
delta = 0.25

[grid]
h = 2^-4
beta = 1
p = 1

[time]
tau = 2^-5
T = 0.5
snapshot_times = 0.25, 0.5

[bc]
mode = {mode}

[initial]
preset = {preset}

[outputs]
dir = {out}
prefix = {prefix}
"""


def write_cfg(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_number_forms():
    assert parse_number("2^-5") == 2.0**-5
    assert parse_number("1/8") == 0.125
    assert parse_number("1e-3") == 1e-3
    assert parse_number(" 0.25 ") == 0.25
    with pytest.raises(ConfigurationError):
        parse_number("abc")


def test_unknown_key_is_named(tmp_path):
    cfg = write_cfg(tmp_path, "[kernel]\nfamily = constant\ndelta = 0.25\nwat = 1\n")
    with pytest.raises(ConfigurationError, match="wat"):
        parse_config(cfg)
    cfg2 = write_cfg(tmp_path, "[mystery]\nx = 1\n", "c2.ini")
    with pytest.raises(ConfigurationError, match="mystery"):
        parse_config(cfg2)


def test_cli_stencil_and_cache(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, MINIMAL_STENCIL.format(out=out))
    cache_dir = str(tmp_path / "cache")
    assert main(["stencil", "--config", cfg, "--cache-dir", cache_dir]) == 0
    csv1 = (out / "toy_stencil.csv").read_bytes()
    assert len(list(Path(cache_dir).glob("*.stencil.bin"))) == 1
    # repeated invocation: cache hit, byte-identical CSV
    assert main(["stencil", "--config", cfg, "--cache-dir", cache_dir]) == 0
    assert (out / "toy_stencil.csv").read_bytes() == csv1
    assert "cache_hit=True" in capsys.readouterr().out


def test_cli_malformed_config_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[kernel]\nfamily = constant\ndelta = 0.25\nbogus = 3\n")
    assert main(["stencil", "--config", cfg]) == 2
    assert "bogus" in capsys.readouterr().err


def test_cli_kernels_blocks_and_refusal(tmp_path, capsys):
    out = tmp_path / "out"
    text = RUN_TEMPLATE.format(mode="dtn", preset="zero", out=out, prefix="k")
    # N = 4 toy table
    text = text.replace("T = 0.5", "T = 0.125")
    cfg = write_cfg(tmp_path, text)
    assert main(["kernels", "--config", cfg]) == 0
    assert "blocks=(5," in capsys.readouterr().out

    # explicit P below 2N is refused
    bad = text + "\n[contour]\nP = 4\n"
    cfg2 = write_cfg(tmp_path, bad, "bad.ini")
    assert main(["kernels", "--config", cfg2]) == 2


def test_cli_run_zero_data_and_reproducibility(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, RUN_TEMPLATE.format(mode="dtn", preset="zero", out=out,
                                                  prefix="z"))
    assert main(["run", "--config", cfg, "--cache-dir", str(tmp_path / "c")]) == 0
    snap = (out / "z_snap_t0p5.csv").read_text().splitlines()
    assert snap[0] == "x,u"
    uvals = [float(line.split(",")[1]) for line in snap[1:]]
    assert all(v == 0.0 for v in uvals)

    first = {p.name: p.read_bytes() for p in out.glob("z_*.csv")}
    assert main(["run", "--config", cfg, "--cache-dir", str(tmp_path / "c")]) == 0
    for p in out.glob("z_*.csv"):
        assert p.read_bytes() == first[p.name]
    manifest = json.loads((out / "z_manifest.json").read_text())
    assert "stencil_hash" in manifest and "outputs" in manifest


def test_cli_converge_single_h(tmp_path):
    out = tmp_path / "out"
    text = RUN_TEMPLATE.format(mode="dtn", preset="example1", out=out, prefix="cv")
    text = text.replace("beta = 1", "beta = 2")
    text += "\n"
    text = text.replace("[grid]", "[grid]\nh_ladder = 2^-4\nref_modes = 256\nref_half_width = 4\n")
    cfg = write_cfg(tmp_path, text)
    assert main(["converge", "--config", cfg, "--cache-dir", str(tmp_path / "c")]) == 0
    lines = (out / "cv_rates.csv").read_text().splitlines()
    assert lines[0] == "h,tau,P,l2_error,pair_rate,slope"
    fields = lines[1].split(",")
    assert fields[4] == "" and fields[5] == ""  # rate columns empty for one h
    assert float(fields[3]) > 0.0


def test_cli_converge_worker_pool_matches_serial(tmp_path):
    out = tmp_path / "out"
    text = RUN_TEMPLATE.format(mode="dtn", preset="example1", out=out, prefix="w")
    text = text.replace("beta = 1", "beta = 2")
    text = text.replace("tau = 2^-5", "tau = 2^-8")
    text = text.replace(
        "[grid]", "[grid]\nh_ladder = 2^-3, 2^-4, 2^-5\nref_modes = 512\nref_half_width = 4\n"
    )
    cfg = write_cfg(tmp_path, text)
    assert main(["converge", "--config", cfg, "--cache-dir", str(tmp_path / "c")]) == 0
    serial = (out / "w_rates.csv").read_bytes()
    slope = float(serial.decode().splitlines()[1].split(",")[5])
    assert slope == pytest.approx(2.0, abs=0.3)  # linear interpolation: second order
    assert main(["converge", "--config", cfg, "--cache-dir", str(tmp_path / "c"),
                 "--workers", "2"]) == 0
    assert (out / "w_rates.csv").read_bytes() == serial


def test_cli_compare_bc(tmp_path, capsys):
    out = tmp_path / "out"
    text = RUN_TEMPLATE.format(mode="dtn", preset="example1", out=out, prefix="cb")
    text = text.replace("beta = 1", "beta = 2")
    cfg = write_cfg(tmp_path, text)
    assert main(["compare-bc", "--config", cfg, "--cache-dir", str(tmp_path / "c")]) == 0
    got = capsys.readouterr().out
    assert "dtn=" in got and "zero-dirichlet=" in got
    lines = (out / "cb_reflection.csv").read_text().splitlines()
    assert lines[0] == "n,t,dtn_rel_dev,zero_dirichlet_rel_dev"


@pytest.mark.filterwarnings("ignore::UserWarning")  # lenient CFL mode warns, then blows up
def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "out"
    # tau far beyond the stability bound with nonzero data: blow-up => exit 3
    text = RUN_TEMPLATE.format(mode="zero-dirichlet", preset="example1", out=out, prefix="bang")
    text = text.replace("tau = 2^-5", "tau = 0.4").replace("T = 0.5", "T = 200")
    text = text.replace("snapshot_times = 0.25, 0.5", "snapshot_times =")
    text = text.replace("beta = 1", "beta = 2")
    cfg = write_cfg(tmp_path, text)
    with np.errstate(over="ignore", invalid="ignore"):
        code = main(["run", "--config", cfg])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_cache_corruption_exit_code(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, MINIMAL_STENCIL.format(out=out))
    cache_dir = tmp_path / "cache"
    assert main(["stencil", "--config", cfg, "--cache-dir", str(cache_dir)]) == 0
    victim = next(cache_dir.glob("*.stencil.bin"))
    victim.write_bytes(victim.read_bytes()[:-4])
    assert main(["stencil", "--config", cfg, "--cache-dir", str(cache_dir)]) == 4

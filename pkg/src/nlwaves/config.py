"""Declarative run configuration: INI sections with a closed key schema.

Sections: kernel, grid, time, contour, bc, initial, outputs.  Unknown
sections or keys are configuration errors (sweeps are generated
programmatically; silence on typos is unacceptable).  Numbers accept the
forms "0.25", "1e-3", "1/8" and "2^-5".
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError
from .grid import GridSpec
from .kernels import KernelSpec
from .presets import initial_data
from .solver import ContourParams, WaveProblem
from .timestepper import TimeGrid

SCHEMA = {
    "kernel": {"family", "delta", "nu", "amplitude", "rate", "profile"},
    "grid": {"h", "beta", "d", "p", "quad_tol", "h_ladder", "ref_half_width", "ref_modes"},
    "time": {"tau", "T", "snapshot_times", "tau_ladder"},
    "contour": {"theta", "P", "min_P", "P_ladder"},
    "bc": {"mode", "support_check"},
    "initial": {"preset"},
    "outputs": {"dir", "prefix", "snapshots", "energy", "manifest"},
}


def parse_number(text: str) -> float:
    s = text.strip()
    try:
        if "^" in s:
            base, exp = s.split("^", 1)
            return float(base) ** float(exp)
        if "/" in s:
            num, den = s.split("/", 1)
            return float(num) / float(den)
        return float(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot parse number {text!r}") from exc


def _parse_list(text: str):
    return [parse_number(tok) for tok in text.split(",") if tok.strip()]


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"cannot parse boolean {text!r}")


@dataclass
class RunConfig:
    kernel: KernelSpec
    grid: GridSpec | None
    time: TimeGrid | None
    p: int = 1
    quad_tol: float = 1e-12
    bc_mode: str = "dtn"
    support_check: str = "strict"
    preset: str = "zero"
    contour: ContourParams = field(default_factory=ContourParams)
    snapshot_times: tuple = ()
    h_ladder: tuple = ()
    tau_ladder: tuple = ()
    P_ladder: tuple = ()
    ref_half_width: float = 4.0
    ref_modes: int = 1024
    out_dir: str = "out"
    prefix: str = "run"
    write_snapshots: bool = True
    write_energy: bool = True
    write_manifest: bool = True
    beta: float | None = None
    d: int = 1
    raw_text: str = ""


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (T, P, ...)
    try:
        text = path.read_text()
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse failure: {exc}") from exc

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")

    if "kernel" not in cp:
        raise ConfigurationError("config needs a [kernel] section")
    ks = cp["kernel"]
    gs = cp["grid"] if "grid" in cp else {}
    d = int(parse_number(gs.get("d", "1")))
    kernel_kwargs = dict(
        family=ks.get("family", None),
        delta=parse_number(ks.get("delta", "0")),
        d=d,
    )
    if kernel_kwargs["family"] is None:
        raise ConfigurationError("kernel family is required")
    if "nu" in ks:
        kernel_kwargs["nu"] = parse_number(ks["nu"])
    if "amplitude" in ks:
        kernel_kwargs["amplitude"] = parse_number(ks["amplitude"])
    if "rate" in ks:
        kernel_kwargs["rate"] = parse_number(ks["rate"])
    if "profile" in ks:
        pairs = [tok.split(":") for tok in ks["profile"].split(",")]
        radii = tuple(parse_number(a) for a, _ in pairs)
        values = tuple(parse_number(b) for _, b in pairs)
        kernel_kwargs["profile"] = (radii, values)
    kernel = KernelSpec(**kernel_kwargs)

    grid = None
    beta = None
    if "h" in gs and "beta" in gs:
        beta = parse_number(gs["beta"])
        grid = GridSpec(h=parse_number(gs["h"]), delta=kernel.delta, beta=beta, d=d)
    elif "beta" in gs:
        beta = parse_number(gs["beta"])

    ts = cp["time"] if "time" in cp else {}
    time = None
    if "tau" in ts and "T" in ts:
        time = TimeGrid.from_final_time(parse_number(ts["tau"]), parse_number(ts["T"]))

    cs = cp["contour"] if "contour" in cp else {}
    contour = ContourParams(
        theta=parse_number(cs.get("theta", "1e8")),
        P=int(parse_number(cs["P"])) if "P" in cs else None,
        min_P=int(parse_number(cs.get("min_P", "64"))),
    )

    bs = cp["bc"] if "bc" in cp else {}
    mode = bs.get("mode", "dtn")
    support = bs.get("support_check", "strict")
    if support not in ("strict", "lenient"):
        raise ConfigurationError("support_check must be strict or lenient")

    i_s = cp["initial"] if "initial" in cp else {}
    os_ = cp["outputs"] if "outputs" in cp else {}

    return RunConfig(
        kernel=kernel,
        grid=grid,
        time=time,
        p=int(parse_number(gs.get("p", "1"))),
        quad_tol=parse_number(gs.get("quad_tol", "1e-12")),
        bc_mode=mode,
        support_check=support,
        preset=i_s.get("preset", "zero"),
        contour=contour,
        snapshot_times=tuple(_parse_list(ts.get("snapshot_times", ""))),
        h_ladder=tuple(_parse_list(gs.get("h_ladder", ""))),
        tau_ladder=tuple(_parse_list(ts.get("tau_ladder", ""))),
        P_ladder=tuple(int(v) for v in _parse_list(cs.get("P_ladder", ""))),
        ref_half_width=parse_number(gs.get("ref_half_width", "4")),
        ref_modes=int(parse_number(gs.get("ref_modes", "1024"))),
        out_dir=os_.get("dir", "out"),
        prefix=os_.get("prefix", "run"),
        write_snapshots=_parse_bool(os_.get("snapshots", "true")),
        write_energy=_parse_bool(os_.get("energy", "true")),
        write_manifest=_parse_bool(os_.get("manifest", "true")),
        beta=beta,
        d=d,
        raw_text=text,
    )


def build_problem(cfg: RunConfig) -> WaveProblem:
    if cfg.grid is None:
        raise ConfigurationError("config needs grid h and beta for a run")
    if cfg.time is None:
        raise ConfigurationError("config needs time tau and T for a run")
    phi, psi = initial_data(cfg.preset, cfg.d)
    return WaveProblem(
        kernel=cfg.kernel,
        grid=cfg.grid,
        time=cfg.time,
        phi=phi,
        psi=psi,
        f=None,
        bc_mode=cfg.bc_mode,
        p=cfg.p,
        quad_tol=cfg.quad_tol,
        contour=cfg.contour,
        support_mode=cfg.support_check,
        snapshot_times=cfg.snapshot_times,
    )

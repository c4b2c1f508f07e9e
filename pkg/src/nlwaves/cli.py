"""Command-line front end: stencil | kernels | run | converge | compare-bc.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 cache
corruption.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cache, csvio, diagnostics
from .config import build_problem, parse_config
from .dtn import build_boundary_table
from .errors import CacheCorruptionError, ConfigurationError, DomainError, NlwError
from .grid import GridSpec
from .reference import pseudo_spectral_reference
from .solver import solve, solve_free_space
from .timestepper import TimeGrid, cfl_bound
from .ztransform import contour_for_steps


def _progress_printer(label):
    state = {"last": -1}

    def cb(done, total):
        pct = (100 * done) // total
        if pct >= state["last"] + 10 or done == total:
            state["last"] = pct
            print(f"  {label}: {done}/{total} contour nodes ({pct}%)", flush=True)

    return cb


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_stencil(args) -> int:
    cfg = parse_config(args.config)
    if cfg.grid is None:
        raise ConfigurationError("stencil command needs [grid] h and beta")
    st, hit = cache.load_or_build_stencil(
        cfg.kernel, cfg.grid, cfg.p, cfg.quad_tol, args.cache_dir
    )
    # construction invariants
    assert st.a_at((0,) * st.d) == 0.0
    assert abs(float(st.c.sum())) <= 1e-12 * max(1.0, st.c0)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{cfg.prefix}_stencil.csv"
    cache.stencil_csv(st, csv_path)
    print(f"stencil: L={st.L} p={st.p} d={st.d} |a|_inf={st.a_max:.6g} "
          f"S={st.cfl_const:.6g} shell_max={st.shell_max:.3e} "
          f"cfl_bound={cfl_bound(st):.6g} cache_hit={hit}")
    print(f"wrote {csv_path}")
    return 0


def _contour_for(cfg):
    return cfg.contour.build(cfg.time.n_steps)


def cmd_kernels(args) -> int:
    cfg = parse_config(args.config)
    if cfg.grid is None or cfg.time is None:
        raise ConfigurationError("kernels command needs [grid] and [time]")
    st, _ = cache.load_or_build_stencil(
        cfg.kernel, cfg.grid, cfg.p, cfg.quad_tol, args.cache_dir
    )
    contour = _contour_for(cfg)
    table, hit = cache.load_or_build_table(
        cfg.grid, st, contour, cfg.time.n_steps, cfg.time.tau,
        cache_dir=args.cache_dir, progress=_progress_printer("sampling"),
    )
    print(f"kernel table: N={table.n_steps} blocks={table.blocks.shape} "
          f"P={table.P} rho={table.rho:.6g} size={table.size_bytes} bytes "
          f"max|K~|={np.max(np.abs(table.blocks)):.6g} cache_hit={hit}")
    if args.double_P_check:
        bigger = contour_for_steps(cfg.time.n_steps, theta=cfg.contour.theta, P=2 * contour.P)
        table2 = build_boundary_table(
            cfg.grid, st, bigger, cfg.time.n_steps, cfg.time.tau,
            progress=_progress_printer("doubling check"),
        )
        change = float(np.max(np.abs(table.blocks - table2.blocks)))
        print(f"double-P self-convergence: max |K~(P={contour.P}) - K~(P={2*contour.P})| "
              f"= {change:.3e}")
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{cfg.prefix}_double_P_report.txt").write_text(
            f"P={contour.P}\nP_doubled={2*contour.P}\nmax_change={change:.17g}\n"
        )
    return 0


def _emit_run_outputs(cfg, traj, out_dir: Path, prefix: str):
    written = []
    if cfg.write_snapshots:
        for t in sorted(traj.snapshots):
            u = traj.snapshots[t]
            label = csvio.snapshot_label(t)
            path = out_dir / f"{prefix}_snap_t{label}.csv"
            if cfg.d == 1:
                x = traj.grid.coordinates()[traj.grid.interior_slices[0]]
                csvio.write_snapshot_1d(path, x, u)
            else:
                csvio.write_snapshot_2d(path, u, traj.grid.h, traj.grid.M, t)
            written.append(path)
    if cfg.write_energy and traj.energy:
        path = out_dir / f"{prefix}_energy.csv"
        csvio.write_energy(path, traj.energy, traj.time.tau)
        written.append(path)
    if cfg.write_manifest:
        manifest = dict(traj.manifest)
        manifest["config"] = cfg.raw_text
        manifest["outputs"] = {p.name: _sha256(p) for p in written}
        path = out_dir / f"{prefix}_manifest.json"
        csvio.write_manifest(path, manifest)
        written.append(path)
    return written


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    problem = build_problem(cfg)
    st, _ = cache.load_or_build_stencil(
        cfg.kernel, cfg.grid, cfg.p, cfg.quad_tol, args.cache_dir
    )
    table = None
    if cfg.bc_mode != "zero-dirichlet":
        table, _ = cache.load_or_build_table(
            cfg.grid, st, _contour_for(cfg), cfg.time.n_steps, cfg.time.tau,
            cache_dir=args.cache_dir, progress=_progress_printer("boundary kernels"),
        )
    traj = solve(
        problem, stencil=st, table=table, strict_cfl=args.strict_cfl,
        record_energy=cfg.write_energy,
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = _emit_run_outputs(cfg, traj, out_dir, cfg.prefix)
    for p in written:
        print(f"wrote {p}")
    return 0


def _converge_point(config_path, cache_dir, idx):
    cfg = parse_config(config_path)
    h = cfg.h_ladder[idx]
    tau = cfg.tau_ladder[idx] if cfg.tau_ladder else cfg.time.tau
    grid = GridSpec(h=h, delta=cfg.kernel.delta, beta=cfg.beta, d=cfg.d)
    time = TimeGrid.from_final_time(tau, cfg.time.T)
    contour = cfg.contour
    if cfg.P_ladder:
        from .solver import ContourParams

        contour = ContourParams(theta=cfg.contour.theta, P=cfg.P_ladder[idx])
    problem = build_problem(cfg)
    problem.grid = grid
    problem.time = time
    problem.contour = contour
    problem.snapshot_times = (cfg.time.T,)
    st, _ = cache.load_or_build_stencil(cfg.kernel, grid, cfg.p, cfg.quad_tol, cache_dir)
    table, _ = cache.load_or_build_table(
        grid, st, contour.build(time.n_steps), time.n_steps, time.tau, cache_dir=cache_dir
    ) if cfg.bc_mode != "zero-dirichlet" else (None, False)
    traj = solve(problem, stencil=st, table=table, record_energy=False)
    u_T = traj.snapshots[cfg.time.T]
    x = grid.coordinates()[grid.interior_slices[0]]
    ref = pseudo_spectral_reference(
        cfg.kernel, problem.phi, problem.psi, None, cfg.time.T,
        cfg.ref_half_width, cfg.ref_modes, x,
    )
    err = float(np.sqrt(h * np.sum((u_T - ref) ** 2)))
    used_P = traj.manifest["contour"]["P"] if traj.manifest["contour"] else 0
    return {"h": h, "tau": tau, "P": used_P, "error": err}


def cmd_converge(args) -> int:
    cfg = parse_config(args.config)
    if not cfg.h_ladder:
        raise ConfigurationError("converge command needs grid h_ladder")
    if cfg.d != 1:
        raise ConfigurationError("converge command drives the 1d reference")
    if cfg.tau_ladder and len(cfg.tau_ladder) != len(cfg.h_ladder):
        raise ConfigurationError("tau_ladder and h_ladder lengths differ")
    if cfg.P_ladder and len(cfg.P_ladder) != len(cfg.h_ladder):
        raise ConfigurationError("P_ladder and h_ladder lengths differ")
    idxs = list(range(len(cfg.h_ladder)))
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(
                _converge_point, [args.config] * len(idxs), [args.cache_dir] * len(idxs), idxs
            ))
    else:
        rows = [_converge_point(args.config, args.cache_dir, i) for i in idxs]

    entries = [(r["h"], np.array([r["error"]]), np.array([0.0])) for r in rows]
    # rates from the scalar errors
    hs = [r["h"] for r in rows]
    errs = [r["error"] for r in rows]
    slope = None
    if len(hs) >= 2:
        slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    for i, r in enumerate(rows):
        r["pair_rate"] = (
            None if i == 0
            else float(np.log(errs[i - 1] / errs[i]) / np.log(hs[i - 1] / hs[i]))
        )
        r["slope"] = slope
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg.prefix}_rates.csv"
    csvio.write_rate_table(path, rows)
    print(f"wrote {path}")
    for r in rows:
        print(f"  h={r['h']:.6g} err={r['error']:.6e} pair={r['pair_rate']}")
    print(f"global slope: {slope}")
    return 0


def cmd_compare_bc(args) -> int:
    cfg = parse_config(args.config)
    problem = build_problem(cfg)
    problem.bc_mode = "dtn"
    st, _ = cache.load_or_build_stencil(
        cfg.kernel, cfg.grid, cfg.p, cfg.quad_tol, args.cache_dir
    )
    table, _ = cache.load_or_build_table(
        cfg.grid, st, _contour_for(cfg), cfg.time.n_steps, cfg.time.tau,
        cache_dir=args.cache_dir,
    )
    traj_abc = solve(problem, stencil=st, table=table, record_interior=True,
                     record_energy=False)
    zero_problem = build_problem(cfg)
    zero_problem.bc_mode = "zero-dirichlet"
    traj_zero = solve(zero_problem, stencil=st, record_interior=True, record_energy=False)
    oracle = solve_free_space(build_problem(cfg), record_interior=True)

    dev_abc, max_abc = diagnostics.reflection_coefficient(
        traj_abc.interior, oracle.interior, cfg.grid.h, cfg.d
    )
    dev_zero, max_zero = diagnostics.reflection_coefficient(
        traj_zero.interior, oracle.interior, cfg.grid.h, cfg.d
    )
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{cfg.prefix}_reflection.csv"
    with open(path, "w") as fh:
        fh.write("n,t,dtn_rel_dev,zero_dirichlet_rel_dev\n")
        for n, (da, dz) in enumerate(zip(dev_abc, dev_zero)):
            fh.write(f"{n},{csvio.FLOAT_FMT % (n * cfg.time.tau)},"
                     f"{csvio.FLOAT_FMT % da},{csvio.FLOAT_FMT % dz}\n")
    print(f"wrote {path}")
    print(f"max relative deviation: dtn={max_abc:.3e} zero-dirichlet={max_zero:.3e}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlwaves", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("stencil", cmd_stencil),
        ("kernels", cmd_kernels),
        ("run", cmd_run),
        ("converge", cmd_converge),
        ("compare-bc", cmd_compare_bc),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--cache-dir", default=None)
        p.add_argument("--strict-cfl", action="store_true")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--double-P-check", action="store_true", dest="double_P_check")
        p.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CacheCorruptionError as exc:
        print(f"cache corruption: {exc}", file=sys.stderr)
        return 4
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NlwError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

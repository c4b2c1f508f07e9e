"""Binary caches for stencils and boundary-kernel tables, plus CSV export.

Stencil files: magic, version, (d, p, L), (h, delta, quad_tol), CFL constant,
shell magnitude, kernel key, then the dense a and c tables as little-endian
float64.  Table files: magic, version, stencil hash, grid dims, tau, N, rho,
P, then j-major dense blocks of the kernel table in row-major layer
enumeration order, little-endian float64.  Any structural mismatch raises a
cache-corruption error.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .dtn import BoundaryKernelTable, build_boundary_table
from .errors import CacheCorruptionError
from .grid import GridSpec
from .kernels import KernelSpec
from .stencil import Stencil, build_stencil
from .ztransform import ContourSpec

STENCIL_MAGIC = b"NLWSTN01"
TABLE_MAGIC = b"NLWKTB01"
VERSION = 1


def _read_exact(fh, n, what):
    data = fh.read(n)
    if len(data) != n:
        raise CacheCorruptionError(f"truncated cache file while reading {what}")
    return data


def stencil_cache_key(kernel: KernelSpec, grid: GridSpec, p: int, quad_tol: float) -> str:
    raw = f"{kernel.cache_key()}|h={grid.h!r}|p={p}|d={grid.d}|tol={quad_tol!r}"
    return hashlib.sha256(raw.encode()).hexdigest()[:24]


def write_stencil(path, st: Stencil):
    path = Path(path)
    key = st.kernel_key.encode()
    with open(path, "wb") as fh:
        fh.write(STENCIL_MAGIC)
        fh.write(struct.pack("<IIII", VERSION, st.d, st.p, st.L))
        fh.write(struct.pack("<ddddd", st.h, st.delta, st.quad_tol, st.cfl_const, st.shell_max))
        fh.write(struct.pack("<I", len(key)))
        fh.write(key)
        fh.write(np.ascontiguousarray(st.a, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(st.c, dtype="<f8").tobytes())


def read_stencil(path) -> Stencil:
    path = Path(path)
    with open(path, "rb") as fh:
        if _read_exact(fh, 8, "magic") != STENCIL_MAGIC:
            raise CacheCorruptionError(f"{path} is not a stencil cache file")
        version, d, p, L = struct.unpack("<IIII", _read_exact(fh, 16, "header"))
        if version != VERSION:
            raise CacheCorruptionError(f"unsupported stencil cache version {version}")
        h, delta, quad_tol, S, shell = struct.unpack("<ddddd", _read_exact(fh, 40, "params"))
        (klen,) = struct.unpack("<I", _read_exact(fh, 4, "key length"))
        key = _read_exact(fh, klen, "kernel key").decode()
        count = (2 * L + 1) ** d
        a = np.frombuffer(_read_exact(fh, 8 * count, "a table"), dtype="<f8").reshape(
            (2 * L + 1,) * d
        ).copy()
        c = np.frombuffer(_read_exact(fh, 8 * count, "c table"), dtype="<f8").reshape(
            (2 * L + 1,) * d
        ).copy()
        if fh.read(1):
            raise CacheCorruptionError(f"trailing bytes in {path}")
    a.setflags(write=False)
    c.setflags(write=False)
    return Stencil(
        p=p, L=L, d=d, h=h, delta=delta, a=a, c=c,
        cfl_const=S, shell_max=shell, kernel_key=key, quad_tol=quad_tol,
    )


def stencil_csv(st: Stencil, path):
    """Human-readable export: m-index columns, then a and c."""
    path = Path(path)
    with open(path, "w") as fh:
        if st.d == 1:
            fh.write("m1,a,c\n")
            for m in range(-st.L, st.L + 1):
                fh.write(f"{m},{st.a[m + st.L]:.17g},{st.c[m + st.L]:.17g}\n")
        else:
            fh.write("m1,m2,a,c\n")
            for m1 in range(-st.L, st.L + 1):
                for m2 in range(-st.L, st.L + 1):
                    fh.write(
                        f"{m1},{m2},{st.a[m1 + st.L, m2 + st.L]:.17g},"
                        f"{st.c[m1 + st.L, m2 + st.L]:.17g}\n"
                    )


def load_or_build_stencil(kernel, grid, p, quad_tol, cache_dir=None):
    """Returns (stencil, cache_hit)."""
    if cache_dir is None:
        return build_stencil(kernel, grid, p, quad_tol), False
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"{stencil_cache_key(kernel, grid, p, quad_tol)}.stencil.bin"
    if path.exists():
        return read_stencil(path), True
    st = build_stencil(kernel, grid, p, quad_tol)
    write_stencil(path, st)
    return st, False


def table_cache_key(st: Stencil, grid: GridSpec, contour: ContourSpec, n_steps: int,
                    tau: float) -> str:
    raw = (
        f"{st.content_hash()}|M={grid.M}|L={grid.L}|d={grid.d}|tau={tau!r}"
        f"|N={n_steps}|rho={contour.rho!r}|P={contour.P}"
    )
    return hashlib.sha256(raw.encode()).hexdigest()[:24]


def write_table(path, table: BoundaryKernelTable):
    path = Path(path)
    shash = table.stencil_hash.encode()
    n_ghost, n_inner = table.blocks.shape[1], table.blocks.shape[2]
    with open(path, "wb") as fh:
        fh.write(TABLE_MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(shash)))
        fh.write(shash)
        fh.write(struct.pack("<IIIII", table.d, table.M, table.L, n_ghost, n_inner))
        fh.write(struct.pack("<dIdI", table.tau, table.n_steps, table.rho, table.P))
        fh.write(struct.pack("<I", table.iterations_max))
        fh.write(np.ascontiguousarray(table.blocks, dtype="<f8").tobytes())


def read_table(path) -> BoundaryKernelTable:
    path = Path(path)
    with open(path, "rb") as fh:
        if _read_exact(fh, 8, "magic") != TABLE_MAGIC:
            raise CacheCorruptionError(f"{path} is not a boundary-kernel cache file")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != VERSION:
            raise CacheCorruptionError(f"unsupported table cache version {version}")
        (hlen,) = struct.unpack("<I", _read_exact(fh, 4, "hash length"))
        shash = _read_exact(fh, hlen, "stencil hash").decode()
        d, M, L, n_ghost, n_inner = struct.unpack("<IIIII", _read_exact(fh, 20, "dims"))
        tau, n_steps, rho, P = struct.unpack("<dIdI", _read_exact(fh, 24, "time header"))
        (iterations,) = struct.unpack("<I", _read_exact(fh, 4, "iterations"))
        count = (n_steps + 1) * n_ghost * n_inner
        blocks = np.frombuffer(
            _read_exact(fh, 8 * count, "kernel blocks"), dtype="<f8"
        ).reshape(n_steps + 1, n_ghost, n_inner).copy()
        if fh.read(1):
            raise CacheCorruptionError(f"trailing bytes in {path}")
    return BoundaryKernelTable(
        blocks=blocks, tau=tau, rho=rho, P=P, n_steps=n_steps,
        M=M, L=L, d=d, stencil_hash=shash, iterations_max=iterations,
    )


def load_or_build_table(grid, st, contour, n_steps, tau, cache_dir=None, progress=None):
    """Returns (table, cache_hit)."""
    if cache_dir is None:
        return build_boundary_table(grid, st, contour, n_steps, tau, progress=progress), False
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"{table_cache_key(st, grid, contour, n_steps, tau)}.ktable.bin"
    if path.exists():
        table = read_table(path)
        if table.stencil_hash != st.content_hash():
            raise CacheCorruptionError(f"{path} was built from a different stencil")
        return table, True
    table = build_boundary_table(grid, st, contour, n_steps, tau, progress=progress)
    write_table(path, table)
    return table, False

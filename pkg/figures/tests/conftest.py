from pathlib import Path

import numpy as np
import pytest

ACCEPTANCE_DIR = Path(__file__).resolve().parents[2] / "out" / "acceptance"


def _fmt(x):
    return "%.17g" % x


@pytest.fixture
def snapshot_1d(tmp_path):
    """Schema-conforming synthetic 1d snapshots at three times."""
    paths = []
    x = np.linspace(-2, 2, 65)
    for i, t in enumerate((0.0, 0.5, 1.0)):
        u = np.exp(-8 * (x - 0.5 * t) ** 2) * np.cos(3 * x)
        p = tmp_path / f"snap_t{i}.csv"
        lines = ["x,u"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, u)]
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    return paths


@pytest.fixture
def snapshot_2d(tmp_path):
    """Radially symmetric synthetic 2d snapshots."""
    paths = []
    M, h = 8, 0.125
    x = np.arange(-(M - 1), M) * h
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    for i, t in enumerate((0.1, 0.5, 1.0)):
        u = np.exp(-6 * (X1**2 + X2**2) / (0.3 + t))
        p = tmp_path / f"iso_t{i}.csv"
        rows = [f"# h={_fmt(h)} M={M} t={_fmt(t)}"]
        rows += [",".join(_fmt(v) for v in row) for row in u]
        p.write_text("\n".join(rows) + "\n")
        paths.append(p)
    return paths


@pytest.fixture
def rate_csv(tmp_path):
    p = tmp_path / "rates.csv"
    hs = [2**-3, 2**-4, 2**-5, 2**-6]
    errs = [0.9 * h**2 for h in hs]
    lines = ["h,tau,P,l2_error,pair_rate,slope"]
    for i, (h, e) in enumerate(zip(hs, errs)):
        pr = "" if i == 0 else _fmt(2.0)
        lines.append(f"{_fmt(h)},{_fmt(1e-3)},512,{_fmt(e)},{pr},{_fmt(2.0)}")
    p.write_text("\n".join(lines) + "\n")
    return p

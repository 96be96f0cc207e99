"""Fixtures: synthetic bundles plus one real sweep produced through the
primary CLI (the only interface this package consumes)."""

import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

FAST_CONFIG = """\
[pipeline]
alpha = 0.8

[evolution]
epsilon = 0.5

[grid]
n = 41
"""


def write_wigner_csv(path: Path, x, p, w, im_cross=None):
    im_cross = np.zeros_like(w) if im_cross is None else im_cross
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "p", "w", "re_cross", "im_cross"])
        for i, xv in enumerate(x):
            for j, pv in enumerate(p):
                wr.writerow([xv, pv, w[i, j], 0.0, im_cross[i, j]])


def write_marginal_csv(path: Path, x, marg, im_cross):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "marg_real", "re_cross_marg", "im_cross_marg"])
        for xv, mv, cv in zip(x, marg, im_cross):
            wr.writerow([xv, mv, 0.0, cv])


def synth_panel(kind: str):
    """Vacuum-like (all positive) or odd-cat-like (negative at origin) data."""
    x = np.linspace(-4, 4, 41)
    b2 = x[:, None] ** 2 + x[None, :] ** 2
    if kind == "vacuum":
        w = (2 / np.pi) * np.exp(-2 * b2)
        im = np.zeros_like(w)
    else:
        alpha = 1.5
        n2 = 2 * (1 - np.exp(-2 * alpha ** 2))
        w = (np.exp(-2 * ((x[:, None] - alpha) ** 2 + x[None, :] ** 2))
             + np.exp(-2 * ((x[:, None] + alpha) ** 2 + x[None, :] ** 2))
             - 2 * np.exp(-2 * b2) * np.cos(4 * alpha * x[None, :])) \
            * 2 / (np.pi * n2)
        im = np.exp(-2 * x[:, None] ** 2 - 2 * x[None, :] ** 2) \
            * np.sin(3 * x[:, None])
    return x, w, im


@pytest.fixture()
def synthetic_sweep(tmp_path):
    """2x2 sweep over fake axes (eps x s) with one negative panel."""
    rows = []
    for eps in ("1", "10"):
        for s, kind in (("0.5", "vacuum"), ("1", "odd")):
            h = f"h{eps}x{s.replace('.', 'p')}"
            bundle = tmp_path / h
            bundle.mkdir()
            x, w, im = synth_panel(kind)
            write_wigner_csv(bundle / "wigner.csv", x, x, w, im)
            marg = np.trapezoid(w, x, axis=1)
            imarg = np.trapezoid(im, x, axis=1)
            write_marginal_csv(bundle / "marginal.csv", x, marg, imarg)
            rows.append({"config_hash": h, "epsilon": eps, "s": s,
                         "negativity": "0", "detection_probability": "0.5"})
    with open(tmp_path / "index.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["config_hash", "epsilon", "s",
                                            "negativity", "detection_probability"])
        wr.writeheader()
        wr.writerows(rows)
    return tmp_path


def run_primary_sweep(out_dir: Path, axes: list[str]) -> Path:
    cfg = out_dir / "config.toml"
    cfg.write_text(FAST_CONFIG)
    cmd = [sys.executable, "-m", "kerrcat.cli", "sweep", str(cfg),
           "--out", str(out_dir / "sweep")]
    for ax in axes:
        cmd += ["--axis", ax]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    return out_dir / "sweep"


@pytest.fixture(scope="session")
def fig2_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2")
    return run_primary_sweep(out, ["epsilon=0.25,0.5,1", "s=0.5,1,2"])


@pytest.fixture(scope="session")
def fig3_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig3")
    return run_primary_sweep(out, [
        "regime=resonance,high_frequency",
        "kappa_h=0.45,0.9",
        "theta=3.141592653589793,0.7853981633974483",
    ])

"""Reading kerrcat CSV bundles.

A bundle directory holds wigner.csv (x,p,w,re_cross,im_cross), marginal.csv
(x,marg_real,re_cross_marg,im_cross_marg) and friends; a sweep directory
holds one bundle per grid point plus index.csv mapping axis values to
configuration hashes.  Everything here is read-only."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class BundleError(RuntimeError):
    """Missing or malformed bundle file."""


@dataclass(frozen=True)
class WignerData:
    x: np.ndarray
    p: np.ndarray
    w: np.ndarray          # (nx, np)
    im_cross: np.ndarray   # (nx, np)


@dataclass(frozen=True)
class MarginalData:
    x: np.ndarray
    marg_real: np.ndarray
    re_cross: np.ndarray
    im_cross: np.ndarray


def _read_csv(path: Path, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not path.is_file():
        raise BundleError(f"missing CSV: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise BundleError(f"empty CSV: {path}") from None
        if tuple(header) != columns:
            raise BundleError(f"{path}: expected columns {columns}, got {tuple(header)}")
        rows = list(reader)
    if not rows:
        raise BundleError(f"{path}: no data rows")
    if any(len(r) != len(columns) for r in rows):
        raise BundleError(f"{path}: ragged rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(columns)}


def load_wigner(bundle: Path) -> WignerData:
    cols = _read_csv(Path(bundle) / "wigner.csv",
                     ("x", "p", "w", "re_cross", "im_cross"))
    x = np.unique(cols["x"])
    p = np.unique(cols["p"])
    if x.size * p.size != cols["w"].size:
        raise BundleError(f"{bundle}/wigner.csv: grid is not rectangular")
    shape = (x.size, p.size)
    return WignerData(x, p, cols["w"].reshape(shape),
                      cols["im_cross"].reshape(shape))


def load_marginal(bundle: Path) -> MarginalData:
    cols = _read_csv(Path(bundle) / "marginal.csv",
                     ("x", "marg_real", "re_cross_marg", "im_cross_marg"))
    return MarginalData(cols["x"], cols["marg_real"], cols["re_cross_marg"],
                        cols["im_cross_marg"])


def load_index(sweep_dir: Path) -> list[dict[str, str]]:
    path = Path(sweep_dir) / "index.csv"
    if not path.is_file():
        raise BundleError(f"missing sweep index: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise BundleError(f"{path}: no sweep points")
    return rows


def bundle_for(sweep_dir: Path, row: dict[str, str]) -> Path:
    bundle = Path(sweep_dir) / row["config_hash"]
    if not bundle.is_dir():
        raise BundleError(f"bundle directory missing: {bundle}")
    return bundle

import numpy as np
import pytest

from catfigs import BundleError, load_index, load_marginal, load_wigner
from catfigs.bundles import bundle_for


def test_load_wigner_roundtrip(synthetic_sweep):
    rows = load_index(synthetic_sweep)
    data = load_wigner(bundle_for(synthetic_sweep, rows[0]))
    assert data.w.shape == (41, 41)
    assert data.x.shape == (41,)
    np.testing.assert_allclose(data.w.max(), 2 / np.pi, rtol=1e-3)


def test_load_marginal_roundtrip(synthetic_sweep):
    rows = load_index(synthetic_sweep)
    marg = load_marginal(bundle_for(synthetic_sweep, rows[0]))
    assert marg.x.shape == marg.marg_real.shape == marg.im_cross.shape
    # vacuum-like panel integrates to ~1
    np.testing.assert_allclose(np.trapezoid(marg.marg_real, marg.x), 1.0,
                               atol=5e-3)


def test_missing_csv_raises(tmp_path):
    with pytest.raises(BundleError, match="missing CSV"):
        load_wigner(tmp_path)


def test_wrong_header_raises(tmp_path):
    (tmp_path / "wigner.csv").write_text("a,b,c\n1,2,3\n")
    with pytest.raises(BundleError, match="expected columns"):
        load_wigner(tmp_path)


def test_ragged_rows_raise(tmp_path):
    (tmp_path / "marginal.csv").write_text(
        "x,marg_real,re_cross_marg,im_cross_marg\n0,1,0\n")
    with pytest.raises(BundleError, match="ragged"):
        load_marginal(tmp_path)


def test_missing_index_raises(tmp_path):
    with pytest.raises(BundleError, match="index"):
        load_index(tmp_path)


def test_missing_bundle_dir_raises(synthetic_sweep):
    with pytest.raises(BundleError, match="bundle directory"):
        bundle_for(synthetic_sweep, {"config_hash": "nope"})

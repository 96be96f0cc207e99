import numpy as np
import pytest
from scipy.special import roots_legendre

from kerrcat import (BathSpec, ConvergenceError, CouplingSpec, KernelCoverage,
                     ModeLayout, SpectralDensity, build_kernel,
                     closed_pipeline_state, free_rotation,
                     interaction_picture_position, partial_trace,
                     reduced_cat_state, second_order_propagate)
from kerrcat.dyson import _triangle_integrals
from kerrcat.fock import coherent_state, default_cat_dim


def test_position_operator_t0():
    layout = ModeLayout((("a", 5), ("b", 2), ("c", 2)))
    from kerrcat import embed, ladder_operators
    a, adag = ladder_operators(5)
    x = interaction_picture_position("a", 0.0, layout, 0.3)
    np.testing.assert_allclose(x, embed(a + adag, "a", layout), atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.7, 13.0])
def test_position_operator_hermitian(t):
    layout = ModeLayout((("a", 5), ("b", 2), ("c", 2)))
    x = interaction_picture_position("a", t, layout, 0.05)
    assert np.abs(x - x.conj().T).max() < 1e-14


def test_position_coherent_expectation():
    # <alpha|X(t)|alpha> = 2 |alpha| cos(w t - arg alpha)
    dim = 30
    s = coherent_state(0.8 * np.exp(0.4j), dim)
    layout = s.layout
    w = 0.7
    for t in (0.0, 1.3, 5.0):
        x = interaction_picture_position("a", t, layout, w)
        val = np.real(np.vdot(s.amplitudes, x @ s.amplitudes))
        want = 2 * 0.8 * np.cos(w * t - 0.4)
        np.testing.assert_allclose(val, want, atol=1e-9)


def test_zero_coupling_returns_input(default_layout, even_cat_config,
                                     default_couplings):
    zero = BathSpec(0.45, SpectralDensity(j0=0.0, s=1.0), "hot")
    zeroc = BathSpec(0.9, SpectralDensity(j0=0.0, s=1.0, lambda_cut=2.0), "cold")
    kernels = {"hot": build_kernel(zero, 2.0, n_points=11, spot_check=False),
               "cold": build_kernel(zeroc, 2.0, n_points=11, spot_check=False)}
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    res = second_order_propagate(rho, default_couplings, kernels, 1.5)
    np.testing.assert_array_equal(res.rho.matrix, rho.matrix)
    assert res.trace_defect == 0.0 and res.order_estimate == 0.0


def test_zero_time_returns_input(default_layout, even_cat_config,
                                 default_couplings, kernels_100):
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    res = second_order_propagate(rho, default_couplings, kernels_100, 0.0)
    np.testing.assert_array_equal(res.rho.matrix, rho.matrix)


def test_trace_and_hermiticity(default_layout, even_cat_config,
                               default_couplings, kernels_100):
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    res = second_order_propagate(rho, default_couplings, kernels_100, 10.0)
    m = res.rho.matrix
    assert abs(np.trace(m).real - 1.0) < 1e-10
    assert abs(np.trace(m).imag) < 1e-12
    assert np.abs(m - m.conj().T).max() < 1e-10
    assert abs(res.trace_defect) < 1e-10
    assert res.order_estimate > 0


def test_correction_linear_in_j0(default_layout, even_cat_config,
                                 default_couplings):
    # kernels are linear in J0, so the correction doubles with J0
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    results = {}
    for j0 in (0.05, 0.025):
        hot = BathSpec(0.45, SpectralDensity(j0=j0, s=1.0), "hot")
        cold = BathSpec(0.9, SpectralDensity(j0=j0, s=1.0, lambda_cut=2.0), "cold")
        kernels = {"hot": build_kernel(hot, 2.0), "cold": build_kernel(cold, 2.0)}
        res = second_order_propagate(rho, default_couplings, kernels, 2.0)
        results[j0] = res.rho.matrix - rho.matrix
    ratio = np.linalg.norm(results[0.05]) / np.linalg.norm(results[0.025])
    assert abs(ratio - 2.0) < 0.02


def test_decoupled_mode_b_unchanged(default_layout, even_cat_config, kernels_100):
    # r_ab = 0: the photon-arm mode decouples from the hot bath entirely
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    coup = CouplingSpec.default(r_ab=0.0)
    res = second_order_propagate(rho, coup, kernels_100, 5.0)
    red_before = partial_trace(rho, ["b"]).matrix
    red_after = partial_trace(res.rho, ["b"]).matrix
    assert np.abs(red_after - red_before).max() < 1e-12


def test_most_negative_eigenvalue_small_at_weak_coupling(default_layout,
                                                         even_cat_config,
                                                         default_couplings):
    j0, eps = 1e-3, 1.0
    hot = BathSpec(0.45, SpectralDensity(j0=j0, s=1.0), "hot")
    cold = BathSpec(0.9, SpectralDensity(j0=j0, s=1.0, lambda_cut=2.0), "cold")
    kernels = {"hot": build_kernel(hot, 1.5), "cold": build_kernel(cold, 1.5)}
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    res = second_order_propagate(rho, default_couplings, kernels, eps)
    lam_min = float(np.linalg.eigvalsh(res.rho.matrix).min())
    # perturbative positivity violation is second order in the correction
    assert lam_min > -50.0 * (j0 * eps) ** 2


def test_kernel_coverage_error(default_layout, even_cat_config, default_couplings,
                               hot_bath, cold_bath):
    kernels = {"hot": build_kernel(hot_bath, 1.0, spot_check=False),
               "cold": build_kernel(cold_bath, 1.0, spot_check=False)}
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    with pytest.raises(KernelCoverage):
        second_order_propagate(rho, default_couplings, kernels, 2.0)


def test_convergence_error_when_budget_exhausted(default_layout, even_cat_config,
                                                 default_couplings, kernels_100):
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    with pytest.raises(ConvergenceError):
        second_order_propagate(rho, default_couplings, kernels_100, 100.0,
                               n_time_nodes=2, max_doublings=1)


def triangle_reference(kernel, eps, w1s, w2s, n):
    """Independent route: tensor-product Gauss-Legendre directly on the
    (t2 <= t1) triangle, inner axis mapped onto [0, t1]."""
    x, wt = roots_legendre(n)
    t1 = 0.5 * eps * (x + 1.0)
    wt1 = 0.5 * eps * wt
    total = 0j
    for t1v, w1v in zip(t1, wt1):
        t2 = 0.5 * t1v * (x + 1.0)
        w2 = 0.5 * t1v * wt
        total += w1v * np.sum(w2 * kernel(t1v - t2)
                              * np.exp(1j * (w1s * t1v + w2s * t2)))
    return total


@pytest.mark.parametrize("eps", [1.0, 10.0, 100.0])
def test_triangle_integrals_vs_tensor_quadrature(eps, kernels_100):
    kern = kernels_100["hot"]
    pairs = {(0.01, -0.01), (0.01, 0.01), (0.0, 0.0)}
    got = _triangle_integrals({"hot": kern}, eps, {"hot": pairs}, 128)["hot"]
    n_ref = 256 if eps < 100 else 1024
    for key in pairs:
        ref = triangle_reference(kern, eps, *key, n_ref)
        assert abs(got[key] - ref) < 1e-5 * max(1.0, abs(ref))


def test_free_rotation_coherent(default_layout):
    # rotation sends |alpha> to |alpha e^{-i w t}>
    alpha, w, t = 1.0, 0.01, 50.0
    s = coherent_state(alpha, default_cat_dim(alpha))
    rho = s.density()
    rot = free_rotation(rho, {"a": w}, t)
    target = coherent_state(alpha * np.exp(-1j * w * t), default_cat_dim(alpha))
    fid = np.real(np.vdot(target.amplitudes, rot.matrix @ target.amplitudes))
    assert fid > 1 - 1e-10


def test_reduced_cat_closed_limit(default_layout, even_cat_config):
    # J0 = 0 at finite eps: the detected cat is the freely rotated closed cat
    from kerrcat import apply_bs2_and_detect
    zero_h = BathSpec(0.45, SpectralDensity(j0=0.0, s=1.0), "hot")
    zero_c = BathSpec(0.9, SpectralDensity(j0=0.0, s=1.0, lambda_cut=2.0), "cold")
    kernels = {"hot": build_kernel(zero_h, 10.0, n_points=11, spot_check=False),
               "cold": build_kernel(zero_c, 10.0, n_points=11, spot_check=False)}
    coup = CouplingSpec.default()
    cat = reduced_cat_state(even_cat_config, coup, kernels, 10.0, default_layout)
    psi = closed_pipeline_state(even_cat_config, default_layout)
    rotated = free_rotation(psi.density(), dict(coup.mode_frequencies), 10.0)
    want = apply_bs2_and_detect(rotated, "D1")
    np.testing.assert_allclose(cat.matrix, want.matrix, atol=1e-12)
    np.testing.assert_allclose(cat.metadata["detection_probability"],
                               want.metadata["detection_probability"], rtol=1e-12)


def test_reduced_cat_metadata(default_layout, even_cat_config, default_couplings,
                              kernels_100):
    cat = reduced_cat_state(even_cat_config, default_couplings, kernels_100, 1.0,
                            default_layout)
    for key in ("detection_probability", "cross_part", "epsilon", "trace_defect",
                "order_estimate", "n_time_nodes"):
        assert key in cat.metadata
    assert cat.metadata["epsilon"] == 1.0
    assert abs(cat.trace() - 1.0) < 1e-12


def test_rho_csv_export(tmp_path, default_layout, even_cat_config):
    from kerrcat.dyson import export_rho_csv
    from kerrcat import apply_bs2_and_detect
    rho = closed_pipeline_state(even_cat_config, default_layout).density()
    cat = apply_bs2_and_detect(rho, "D1")
    path = tmp_path / "rho.csv"
    export_rho_csv(cat, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "row,col,re,im"
    dim = default_layout.dim("a")
    assert len(rows) == 1 + dim * dim


def test_swap_baths_changes_output_keeps_oscillation(default_layout,
                                                     even_cat_config,
                                                     kernels_100):
    # exchanging the bath roles alters the state but the cross-marginal
    # oscillation pattern survives
    from kerrcat import GridSpec, momentum_marginal, wigner_from_parity

    def run(swap):
        coup = CouplingSpec.default(swap_baths=swap)
        cat = reduced_cat_state(even_cat_config, coup, kernels_100, 100.0,
                                default_layout)
        wg = wigner_from_parity(cat, GridSpec.default_for(1.0, n=121))
        xs, _, cross = momentum_marginal(wg)
        return cat.matrix, xs, cross.imag

    m0, xs, im0 = run(False)
    m1, _, im1 = run(True)
    assert np.abs(m0 - m1).max() > 1e-3
    for im in (im0, im1):
        band = np.abs(xs) <= 3.0
        v = im[band]
        sg = np.sign(v[np.abs(v) > 1e-6 * np.abs(v).max()])
        assert int(np.sum(sg[1:] != sg[:-1])) >= 2

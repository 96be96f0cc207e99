"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line with its runtime.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time

import numpy as np
import pytest

from kerrcat import (BathSpec, CouplingSpec, DensityOperator, GridSpec,
                     ModeLayout, PipelineConfig, SpectralDensity, build_kernel,
                     closed_pipeline_state, correlation_function,
                     momentum_marginal, negativity_volume, reduced_cat_state,
                     regime_kernel, second_order_propagate,
                     spectral_density_value, wigner_from_parity,
                     wigner_from_weyl)
from kerrcat.fock import coherent_amplitudes, default_cat_dim

DELTA = 0.01
J0 = 0.1
KAPPA_H = 0.45
KAPPA_C = 0.9
LAMBDA_C = 2.0
OHMICITY = (0.5, 1.0, 2.0)


def report(name, ok, t0, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}  ({time.perf_counter() - t0:.1f}s)  {detail}")
    assert ok, f"{name}: {detail}"


def make_baths(s, kappa_h=KAPPA_H, kappa_c=KAPPA_C, j0=J0):
    hot = BathSpec(kappa_h, SpectralDensity(j0=j0, s=s, lambda_cut=1.0), "hot")
    cold = BathSpec(kappa_c, SpectralDensity(j0=j0, s=s, lambda_cut=LAMBDA_C), "cold")
    return hot, cold


def layout_for(alpha):
    return ModeLayout((("a", default_cat_dim(alpha)), ("b", 2), ("c", 2)))


def zero_kernels(tau_max):
    hot = BathSpec(KAPPA_H, SpectralDensity(j0=0.0, s=1.0), "hot")
    cold = BathSpec(KAPPA_C, SpectralDensity(j0=0.0, s=1.0, lambda_cut=LAMBDA_C), "cold")
    return {"hot": build_kernel(hot, tau_max, n_points=11, spot_check=False),
            "cold": build_kernel(cold, tau_max, n_points=11, spot_check=False)}


def analytic_cat_wigner(alpha, phi, xs, ps):
    b = xs[:, None] + 1j * ps[None, :]
    n2 = 2.0 * (1.0 + np.cos(phi) * np.exp(-2.0 * abs(alpha) ** 2))
    w = (np.exp(-2.0 * np.abs(b - alpha) ** 2) + np.exp(-2.0 * np.abs(b + alpha) ** 2)
         + 2.0 * np.exp(-2.0 * np.abs(b) ** 2)
         * np.cos(4.0 * np.imag(b * np.conj(alpha)) + phi))
    return 2.0 / (np.pi * n2) * w


def sign_changes(values, threshold_rel=1e-6):
    v = np.asarray(values)
    keep = np.abs(v) > threshold_rel * np.abs(v).max()
    s = np.sign(v[keep])
    return int(np.sum(s[1:] != s[:-1]))


# ---------------------------------------------------------------------------

def test_closed_system_cat_wigner():
    """W of the detected closed-system cat matches the analytic form."""
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (1.0, 1.5, 2.0):
        layout = layout_for(alpha)
        kernels = zero_kernels(1.0)
        for detector, phi in (("D1", 0.0), ("D2", np.pi)):
            t_case = time.perf_counter()
            cfg = PipelineConfig(alpha=alpha, theta=np.pi, detector=detector)
            cat = reduced_cat_state(cfg, CouplingSpec.default(DELTA), kernels,
                                    0.0, layout)
            grid = GridSpec.default_for(alpha)
            wg = wigner_from_parity(cat, grid)
            want = analytic_cat_wigner(alpha, phi, grid.x_axis, grid.p_axis)
            err = np.abs(wg.values - want).max()
            i0 = grid.n_x // 2
            origin = wg.values[i0, i0]
            w0 = 2 / np.pi if detector == "D1" else -2 / np.pi
            case_t = time.perf_counter() - t_case
            worst = max(worst, err, abs(origin - w0))
            assert err < 1e-6, (alpha, detector, err)
            assert abs(origin - w0) < 1e-6, (alpha, detector, origin)
            assert case_t < 10.0, f"case ({alpha},{detector}) took {case_t:.1f}s"
    report("closed-system cat Wigner vs analytic", worst < 1e-6, t0,
           f"max deviation {worst:.2e}")


def test_route_equivalence():
    """wigner_from_weyl agrees with wigner_from_parity to 1e-6."""
    t0 = time.perf_counter()
    states = []
    for alpha, phi in ((1.0, 0.0), (1.0, np.pi)):
        dim = default_cat_dim(alpha)
        psi = coherent_amplitudes(alpha, dim) + np.exp(1j * phi) * coherent_amplitudes(-alpha, dim)
        psi /= np.linalg.norm(psi)
        states.append((DensityOperator(ModeLayout((("a", dim),)),
                                       np.outer(psi, psi.conj())),
                       GridSpec.default_for(alpha)))
    rng = np.random.default_rng(123)
    for _ in range(5):
        dim = 14
        a = rng.normal(size=(dim, 3)) + 1j * rng.normal(size=(dim, 3))
        m = a @ a.conj().T
        m /= np.trace(m).real
        states.append((DensityOperator(ModeLayout((("a", dim),)), m),
                       GridSpec(-8, 8, 81, -8, 8, 81)))
    worst = 0.0
    for rho, grid in states:
        wp = wigner_from_parity(rho, grid)
        ww = wigner_from_weyl(rho, grid)
        worst = max(worst, float(np.abs(wp.values - ww.values).max()))
    elapsed = time.perf_counter() - t0
    report("Wigner route equivalence (7 states)",
           worst < 1e-6 and elapsed < 60.0, t0, f"max diff {worst:.2e}")


def test_kernel_correctness():
    """chi(0) Gamma-integral, Hermitian symmetry, high-T expansion."""
    t0 = time.perf_counter()
    # zero-temperature Ohmic: chi(0) = J0 lambda^2
    bath0 = BathSpec(1e7, SpectralDensity(j0=J0, s=1.0, lambda_cut=1.0), "hot")
    chi0 = correlation_function(bath0, 0.0)
    ok0 = abs(chi0.real - J0) / J0 < 1e-6 and abs(chi0.imag) < 1e-12
    # Hermitian symmetry
    bath = BathSpec(KAPPA_H, SpectralDensity(j0=J0, s=1.0), "hot")
    sym = max(abs(correlation_function(bath, -tau)
                  - np.conj(correlation_function(bath, tau)))
              for tau in (0.4, 1.7, 6.0))
    # high-temperature coth expansion within 2% for kappa <= 0.05
    from scipy.integrate import quad
    okt = True
    for kappa in (0.02, 0.05):
        hb = BathSpec(kappa, SpectralDensity(j0=J0, s=1.0), "hot")
        for tau in (0.0, 1.0):
            ref = quad(lambda w: spectral_density_value(hb.density, w)
                       / (kappa * w) * np.cos(w * tau), 0.0, 40.0, limit=400)[0]
            got = correlation_function(hb, tau).real
            okt = okt and abs(got - ref) / abs(ref) < 0.02
    elapsed = time.perf_counter() - t0
    report("kernel correctness (Gamma integral, symmetry, high-T)",
           ok0 and sym < 1e-12 and okt and elapsed < 5.0, t0,
           f"chi0 rel {abs(chi0.real - J0) / J0:.2e}, sym {sym:.2e}")


def test_propagator_contract():
    """Trace and Hermiticity preserved across the default parameter sweep."""
    t0 = time.perf_counter()
    worst_tr, worst_h = 0.0, 0.0
    alpha = 1.0
    layout = layout_for(alpha)
    for s in OHMICITY:
        for kappa_h in (0.9, KAPPA_H):
            hot, cold = make_baths(s, kappa_h=kappa_h)
            kernels = {"hot": build_kernel(hot, 100.0),
                       "cold": build_kernel(cold, 100.0)}
            for theta in (np.pi, np.pi / 4):
                rho0 = closed_pipeline_state(
                    PipelineConfig(alpha=alpha, theta=theta), layout).density()
                for eps in (1.0, 10.0, 100.0):
                    res = second_order_propagate(rho0, CouplingSpec.default(DELTA),
                                                 kernels, eps)
                    m = res.rho.matrix
                    worst_tr = max(worst_tr, abs(np.trace(m) - np.trace(rho0.matrix)))
                    worst_h = max(worst_h, float(np.abs(m - m.conj().T).max()))
    elapsed = time.perf_counter() - t0
    report("propagator trace/Hermiticity contract (36 points)",
           worst_tr < 1e-10 and worst_h < 1e-10 and elapsed < 600.0, t0,
           f"trace defect {worst_tr:.2e}, herm defect {worst_h:.2e}")


def test_oracle_equivalence():
    """Perturbative-vs-exact gap scales as J0^2 (4th order in coupling)."""
    t0 = time.perf_counter()
    from kerrcat import discretize_bath, exact_evolve
    from kerrcat.fock import coherent_state
    from kerrcat.oracle import kernel_from_discrete_bath

    gaps = []
    j0_values = (1e-2, 5e-3, 2.5e-3)
    for j0 in j0_values:
        dens = SpectralDensity(j0=j0, s=1.0, lambda_cut=1.0)
        db = discretize_bath(dens, 3, 4.0, mode_dim=3)
        psi = coherent_state(1.0, 10, tau_trunc=1e-6)
        exact, _ = exact_evolve(psi, db, 1.0, system_frequency=DELTA)
        kern = kernel_from_discrete_bath(db, BathSpec(0.9, dens, "hot"), 1.0)
        coup = CouplingSpec(entries=(("a", "hot", 1.0),),
                            mode_frequencies=(("a", DELTA),))
        res = second_order_propagate(psi.density(), coup, {"hot": kern}, 1.0)
        gaps.append(float(np.linalg.norm(exact.matrix - res.rho.matrix)))
    exps = [np.log(ga / gb) / np.log(ja / jb)
            for (ja, ga), (jb, gb) in zip(zip(j0_values, gaps),
                                          list(zip(j0_values, gaps))[1:])]
    ok = all(1.7 <= e <= 2.3 for e in exps)
    elapsed = time.perf_counter() - t0
    report("oracle equivalence (gap exponent in [1.7, 2.3])",
           ok and elapsed < 300.0, t0,
           "exponents " + ", ".join(f"{e:.3f}" for e in exps))


def test_negativity_survival():
    """Negativity stays positive out to eps = 1000 for all Ohmicity classes."""
    t0 = time.perf_counter()
    alpha = 1.0
    layout = layout_for(alpha)
    grid = GridSpec.default_for(alpha)
    cfg = PipelineConfig(alpha=alpha, theta=np.pi)
    details = []
    ok = True
    for s in OHMICITY:
        hot, cold = make_baths(s)
        kernels = {"hot": build_kernel(hot, 1000.0),
                   "cold": build_kernel(cold, 1000.0)}
        negs = {}
        for eps in (1.0, 10.0, 1000.0):
            cat = reduced_cat_state(cfg, CouplingSpec.default(DELTA), kernels,
                                    eps, layout)
            negs[eps] = negativity_volume(wigner_from_parity(cat, grid))
        ok = ok and all(v > 0 for v in negs.values())
        ok = ok and negs[1000.0] > 0.1 * negs[1.0]
        details.append(f"s={s}: " + " ".join(f"n({int(e)})={v:.3f}"
                                             for e, v in negs.items()))
    elapsed = time.perf_counter() - t0
    report("negativity survival to eps=1000 (3 classes)",
           ok and elapsed < 900.0, t0, "; ".join(details))


def test_marginal_oscillations():
    """Cross-term marginal oscillates at eps=100 in every configuration."""
    t0 = time.perf_counter()
    alpha = 1.0
    eps = 100.0
    layout = layout_for(alpha)
    grid = GridSpec.default_for(alpha)
    rot = {"a": DELTA, "b": DELTA, "c": DELTA}
    ok = True
    details = []
    for s in OHMICITY:
        hot, cold = make_baths(s)
        for regime in ("resonance", "high_frequency"):
            if regime == "resonance":
                kernels = {"hot": regime_kernel(hot, regime, DELTA, eps),
                           "cold": regime_kernel(cold, regime, DELTA, eps)}
                coup = CouplingSpec.default(DELTA)
            else:
                kernels = {"hot": build_kernel(hot, eps),
                           "cold": build_kernel(cold, eps)}
                coup = CouplingSpec.default(DELTA).with_frequencies(0.0)
            for theta in (np.pi, np.pi / 4):
                cat = reduced_cat_state(
                    PipelineConfig(alpha=alpha, theta=theta), coup, kernels,
                    eps, layout, rotation_frequencies=rot)
                wg = wigner_from_parity(cat, grid)
                xs, _, cross = momentum_marginal(wg)
                band = (xs >= -(alpha + 2)) & (xs <= alpha + 2)
                n_changes = sign_changes(cross.imag[band])
                ok = ok and n_changes >= 2
                details.append(f"s={s},{regime[:3]},th={theta:.2f}: {n_changes}")
    elapsed = time.perf_counter() - t0
    report("cross-term marginal oscillations (12 configs)",
           ok and elapsed < 900.0, t0, "; ".join(details))


def test_spectral_classification():
    """Fitted small-omega slope of J recovers the Ohmicity exponent."""
    t0 = time.perf_counter()
    worst = 0.0
    for s in OHMICITY:
        d = SpectralDensity(j0=J0, s=s, lambda_cut=1.0)
        w1, w2 = 1e-4, 1e-3
        slope = (np.log(spectral_density_value(d, w2))
                 - np.log(spectral_density_value(d, w1))) / np.log(w2 / w1)
        worst = max(worst, abs(slope - s) / s)
    elapsed = time.perf_counter() - t0
    report("spectral classification slope (1%)",
           worst < 0.01 and elapsed < 1.0, t0, f"worst rel err {worst:.2e}")

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbm.errors import QuadratureError, ValidationError
from qbm.kernels import (
    KernelTable,
    ReservoirSpec,
    kappa,
    kappa_quadrature,
    load_kernel_csv,
    mu,
    mu_quadrature,
    tabulate_kernels,
)

OHMIC = ReservoirSpec("ohmic_exp_cutoff", alpha=0.1, wc=5.0, temperature=0.0)
DRUDE = ReservoirSpec("ohmic_lorentz_drude", alpha=0.1, wc=5.0, temperature=0.0)


def mp_kappa(spec, tau):
    """High-precision independent oracle for the kappa transform."""
    mp.mp.dps = 30
    wc, T = spec.wc, spec.temperature

    def integrand(w):
        if spec.family == "ohmic_exp_cutoff":
            j = w * mp.exp(-w / wc)
        else:
            j = (2 / mp.pi) * w * wc**2 / (wc**2 + w**2)
        if T > 0:
            j *= mp.coth(w / (2 * T))
        return j * mp.cos(w * tau)

    points = [0, 1 / wc, 10 * wc]
    if tau > 0:
        points += list(np.arange(np.pi / (2 * tau), 40 * wc, np.pi / (2 * tau)))
    points = sorted(set(float(p) for p in points)) + [mp.inf]
    return spec.alpha**2 * float(mp.quad(integrand, points))


def test_zero_coupling_kernels_vanish():
    spec = ReservoirSpec("ohmic_exp_cutoff", alpha=0.0, wc=5.0)
    for tau in (0.0, 0.3, 1.0, 7.5):
        assert kappa(spec, tau) == 0.0
        assert mu(spec, tau) == 0.0


def test_kappa_closed_form_anchor_values():
    # alpha^2 * wc^2 at tau=0; zero crossing at tau = 1/wc
    assert kappa(OHMIC, 0.0) == pytest.approx(0.25, abs=1e-15)
    assert kappa(OHMIC, 0.2) == pytest.approx(0.0, abs=1e-15)


def test_mu_closed_form_anchor_values():
    assert mu(OHMIC, 0.0) == 0.0
    assert mu(OHMIC, 0.2) == pytest.approx(0.125, abs=1e-15)
    assert mu(ReservoirSpec("ohmic_exp_cutoff", alpha=0.0, wc=5.0), 1.0) == 0.0


@pytest.mark.parametrize("tau", [0.0, 0.05, 0.2, 0.5, 1.0, 3.7, 11.0, 20.0])
def test_closed_forms_agree_with_quadrature(tau):
    # relative 1e-8 away from the zero crossing, small absolute floor at it
    diff = abs(kappa(OHMIC, tau) - kappa_quadrature(OHMIC, tau))
    assert diff <= max(1e-8 * abs(kappa(OHMIC, tau)), 1e-12)
    assert abs(mu(OHMIC, tau) - mu_quadrature(OHMIC, tau)) <= 1e-9


def test_tabulation_closed_vs_quadrature_on_grid():
    grid = np.linspace(0.0, 20.0, 50)
    closed = np.array([kappa(OHMIC, t) for t in grid])
    quad_path = np.array([kappa_quadrature(OHMIC, t) for t in grid])
    assert np.max(np.abs(closed - quad_path)) < 1e-9


@pytest.mark.parametrize("tau", [0.0, 0.07, 0.9, 2.5, 14.0])
def test_thermal_kappa_against_mp_oracle(tau):
    spec = ReservoirSpec("ohmic_exp_cutoff", alpha=0.1, wc=5.0, temperature=2.0)
    assert kappa(spec, tau) == pytest.approx(mp_kappa(spec, tau), abs=5e-10)


def test_drude_mu_closed_form_against_quadrature():
    for tau in (0.1, 0.5, 2.0):
        assert mu(DRUDE, tau) == pytest.approx(mu_quadrature(DRUDE, tau), abs=1e-11)


def test_drude_kappa_against_exponential_integral_form():
    # independent closed form: Int_0^inf w cos(w tau)/(w^2+a^2) dw
    #   = -(1/2) [e^{a tau} Ei(-a tau) + e^{-a tau} Ei(a tau)]
    from scipy.special import exp1, expi

    for tau in (0.05, 0.4, 2.0, 10.0):
        x = DRUDE.wc * tau
        ref = (
            DRUDE.alpha**2
            * (2.0 / np.pi)
            * DRUDE.wc**2
            * (-0.5)
            * (np.exp(x) * (-exp1(x)) + np.exp(-x) * expi(x))
        )
        assert kappa(DRUDE, tau) == pytest.approx(ref, abs=1e-12)


def test_drude_kappa_diverges_at_zero_lag():
    with pytest.raises(ValidationError):
        kappa(DRUDE, 0.0)
    hot = ReservoirSpec("ohmic_lorentz_drude", alpha=0.1, wc=5.0, temperature=2.0)
    with pytest.raises(ValidationError):
        kappa(hot, 0.0)


def test_negative_lag_rejected():
    with pytest.raises(ValidationError):
        kappa(OHMIC, -0.1)
    with pytest.raises(ValidationError):
        mu(OHMIC, -2.0)


@settings(max_examples=25, deadline=None)
@given(
    alpha=st.floats(1e-3, 2.0),
    # subnormal tau underflows the mu product and spoils the exact ratio
    tau=st.floats(0.0, 20.0, allow_subnormal=False),
    wc=st.floats(0.5, 10.0),
)
def test_kernels_scale_exactly_as_alpha_squared(alpha, tau, wc):
    s1 = ReservoirSpec("ohmic_exp_cutoff", alpha=alpha, wc=wc)
    s2 = ReservoirSpec("ohmic_exp_cutoff", alpha=2.0 * alpha, wc=wc)
    for f in (kappa, mu):
        v1, v2 = f(s1, tau), f(s2, tau)
        if v1 != 0.0:
            assert v2 / v1 == pytest.approx(4.0, rel=1e-12)
        else:
            assert v2 == 0.0


def test_tabulate_zero_coupling_gives_zero_table():
    spec = ReservoirSpec("ohmic_exp_cutoff", alpha=0.0, wc=5.0)
    table = tabulate_kernels(spec, np.linspace(0.0, 3.0, 10))
    assert np.all(table.kappa == 0.0) and np.all(table.mu == 0.0)


def test_tabulated_roundtrip_is_exact_at_nodes():
    grid = np.linspace(0.0, 4.0, 41)
    base = tabulate_kernels(OHMIC, grid)
    spec_tab = ReservoirSpec("tabulated", alpha=0.1, table=base)
    again = tabulate_kernels(spec_tab, grid)
    assert np.array_equal(again.kappa, base.kappa)
    assert np.array_equal(again.mu, base.mu)


def test_tabulated_rejects_out_of_range():
    grid = np.linspace(0.0, 4.0, 41)
    spec_tab = ReservoirSpec("tabulated", alpha=0.1, table=tabulate_kernels(OHMIC, grid))
    with pytest.raises(ValidationError):
        kappa(spec_tab, 5.0)


def test_kernel_table_validation():
    with pytest.raises(ValidationError):
        KernelTable(grid=[0.0, 1.0], kappa=[1.0], mu=[0.0, 0.0])
    with pytest.raises(ValidationError):
        KernelTable(grid=[0.5, 1.0], kappa=[1.0, 1.0], mu=[0.0, 0.0])
    with pytest.raises(ValidationError):
        KernelTable(grid=[0.0, 1.0], kappa=[1.0, 1.0], mu=[0.5, 0.0])
    with pytest.raises(ValidationError):
        KernelTable(grid=[0.0, 1.0, 1.0], kappa=[1.0] * 3, mu=[0.0] * 3)


def test_kernel_csv_roundtrip(tmp_path):
    path = tmp_path / "kern.csv"
    path.write_text("tau,kappa,mu\n0.0,0.25,0.0\n0.5,0.1,0.02\n1.0,0.01,0.001\n")
    table = load_kernel_csv(path)
    assert table.kappa[1] == 0.1
    spec_tab = ReservoirSpec("tabulated", alpha=1.0, table=table)
    # linear interpolation between nodes
    assert kappa(spec_tab, 0.25) == pytest.approx(0.175)
    bad = tmp_path / "bad.csv"
    bad.write_text("time,k,m\n0,1,0\n")
    with pytest.raises(ValidationError):
        load_kernel_csv(bad)


def test_quadrature_error_carries_estimate():
    from qbm.kernels import _checked_quad

    with pytest.raises(QuadratureError) as err:
        _checked_quad(lambda w: np.cos(w**2) / (1.0 + 1e-6 * w), 0.0, None, "test")
    assert err.value.estimate > 0.0

"""Reservoir correlation and susceptibility kernels.

The environment enters the oscillator dynamics only through two real
functions of the time lag tau, both scaling exactly as the squared coupling
alpha**2: the correlation kernel kappa(tau) and the susceptibility kernel
mu(tau).  For a bath with spectral density J(w) at temperature T (units
hbar = k_B = 1, frequencies in omega0, time in 1/omega0) they are the
standard transforms

    kappa(tau) = alpha^2 * Int_0^inf J(w) coth(w/2T) cos(w tau) dw
    mu(tau)    = alpha^2 * Int_0^inf J(w) sin(w tau) dw

with coth -> 1 at T = 0; mu is temperature independent.

Families
--------
ohmic_exp_cutoff
    J(w) = w exp(-w/wc).  Every T = 0 transform is closed-form, and mu is
    closed-form at any T, which makes this family self-verifiable against
    the quadrature path.
ohmic_lorentz_drude
    J(w) = (2/pi) w wc^2 / (wc^2 + w^2).  mu(tau) = alpha^2 wc^2 exp(-wc tau)
    is closed-form; kappa(0) is ultraviolet log-divergent (the integrand
    falls off only as 1/w), so evaluation at tau = 0 is rejected for every
    temperature.
tabulated
    (tau, kappa, mu) samples with linear interpolation.

Quadrature: scipy's QUADPACK adaptive panels.  For rapidly decaying
integrands the oscillatory factor is folded into the integrand below
tau = 1 and handled by the dedicated Fourier-weight routine above; the
slowly decaying Lorentz-Drude integrand always uses the Fourier-weight
routine, whose cycle subdivision is what makes the conditionally convergent
integral usable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from qbm.errors import QuadratureError, ValidationError

OHMIC_EXP_CUTOFF = "ohmic_exp_cutoff"
OHMIC_LORENTZ_DRUDE = "ohmic_lorentz_drude"
TABULATED = "tabulated"
FAMILIES = (OHMIC_EXP_CUTOFF, OHMIC_LORENTZ_DRUDE, TABULATED)

# w*coth(w/2T) is replaced by its 2T limit below this frequency
_COTH_CROSSOVER = 1e-8

# quadrature request and acceptance thresholds
_EPSABS = 1e-14
_EPSREL = 1e-10
_ERR_FLOOR = 1e-10
_ERR_REL = 1e-7


@dataclass(frozen=True)
class KernelTable:
    """Sampled (tau, kappa, mu) triples on a strictly increasing grid."""

    grid: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        kap = np.asarray(self.kappa, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "kappa", kap)
        object.__setattr__(self, "mu", mu)
        if grid.ndim != 1 or grid.size == 0:
            raise ValidationError("kernel table grid must be a non-empty 1-d sequence")
        if len(kap) != len(grid) or len(mu) != len(grid):
            raise ValidationError("kernel table columns must share the grid length")
        if grid[0] != 0.0:
            raise ValidationError("kernel table grid must start at tau = 0")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("kernel table grid must be strictly increasing")
        if abs(mu[0]) > 1e-12:
            raise ValidationError("mu(0) must vanish (sine transform at tau = 0)")
        for name, col in (("kappa", kap), ("mu", mu)):
            if not np.all(np.isfinite(col)):
                raise ValidationError(f"kernel table column {name} contains non-finite values")


@dataclass(frozen=True)
class ReservoirSpec:
    """Reservoir model: family, coupling alpha, cutoff wc, temperature.

    ``table`` carries the samples for the tabulated family and is ignored
    otherwise.
    """

    family: str
    alpha: float
    wc: float = 5.0
    temperature: float = 0.0
    table: KernelTable | None = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(
                f"unknown reservoir family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.alpha < 0:
            raise ValidationError("coupling alpha must be >= 0")
        if self.wc <= 0:
            raise ValidationError("cutoff wc must be > 0")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")
        if self.family == TABULATED and self.table is None:
            raise ValidationError("tabulated family requires a kernel table")


def spectral_density(spec: ReservoirSpec, w):
    """J(w) without the alpha^2 prefactor."""
    w = np.asarray(w, dtype=float)
    if spec.family == OHMIC_EXP_CUTOFF:
        return w * np.exp(-w / spec.wc)
    if spec.family == OHMIC_LORENTZ_DRUDE:
        return (2.0 / np.pi) * w * spec.wc**2 / (spec.wc**2 + w**2)
    raise ValidationError(f"no spectral density for family {spec.family!r}")


def _j_over_w(spec: ReservoirSpec, w: float) -> float:
    if spec.family == OHMIC_EXP_CUTOFF:
        return np.exp(-w / spec.wc)
    return (2.0 / np.pi) * spec.wc**2 / (spec.wc**2 + w**2)


def _checked_quad(func, tau: float, weight: str | None, what: str) -> float:
    """QUADPACK call with convergence check.

    weight None integrates ``func`` as-is on [0, inf); otherwise ``func`` is
    the non-oscillatory factor and QUADPACK applies cos/sin(tau*w).
    """
    if weight is None:
        res = quad(func, 0.0, np.inf, epsabs=_EPSABS, epsrel=_EPSREL, limit=800, full_output=1)
    else:
        res = quad(
            func,
            0.0,
            np.inf,
            weight=weight,
            wvar=tau,
            epsabs=1.5e-13,
            limlst=300,
            limit=600,
            full_output=1,
        )
    value, estimate = res[0], res[1]
    if not np.isfinite(value) or estimate > max(_ERR_FLOOR, _ERR_REL * abs(value)):
        raise QuadratureError(f"quadrature for {what} did not converge at tau={tau:g}", estimate)
    return value


def _kappa_integral(spec: ReservoirSpec, tau: float) -> float:
    """Int_0^inf J(w) coth(w/2T) cos(w tau) dw, alpha^2 not included."""
    T = spec.temperature

    def thermal_factor(w: float) -> float:
        # w*coth(w/2T) -> 2T as w -> 0; substituted analytically to avoid 0/0
        if T == 0.0:
            return w
        if w < _COTH_CROSSOVER:
            return 2.0 * T
        return w / np.tanh(w / (2.0 * T))

    base = lambda w: _j_over_w(spec, w) * thermal_factor(w)

    if spec.family == OHMIC_LORENTZ_DRUDE:
        if tau == 0.0:
            raise ValidationError(
                "kappa(0) is ultraviolet log-divergent for the Lorentz-Drude family; "
                "evaluate at tau > 0"
            )
        return _checked_quad(base, tau, "cos", "kappa")

    if tau == 0.0:
        return _checked_quad(base, tau, None, "kappa")
    if tau < 1.0:
        return _checked_quad(lambda w: base(w) * np.cos(w * tau), tau, None, "kappa")
    return _checked_quad(base, tau, "cos", "kappa")


def _mu_integral(spec: ReservoirSpec, tau: float) -> float:
    """Int_0^inf J(w) sin(w tau) dw, alpha^2 not included."""
    if tau == 0.0:
        return 0.0
    base = lambda w: _j_over_w(spec, w) * w
    if spec.family == OHMIC_LORENTZ_DRUDE:
        return _checked_quad(base, tau, "sin", "mu")
    if tau < 1.0:
        return _checked_quad(lambda w: base(w) * np.sin(w * tau), tau, None, "mu")
    return _checked_quad(base, tau, "sin", "mu")


def kappa_quadrature(spec: ReservoirSpec, tau: float) -> float:
    """kappa(tau) forced through the quadrature path (cross-validation hook)."""
    _require_tau(tau)
    if spec.alpha == 0.0:
        return 0.0
    return spec.alpha**2 * _kappa_integral(spec, tau)


def mu_quadrature(spec: ReservoirSpec, tau: float) -> float:
    """mu(tau) forced through the quadrature path (cross-validation hook)."""
    _require_tau(tau)
    if spec.alpha == 0.0:
        return 0.0
    return spec.alpha**2 * _mu_integral(spec, tau)


def _require_tau(tau: float):
    if not np.isfinite(tau) or tau < 0:
        raise ValidationError("tau must be finite and >= 0")


def kappa(spec: ReservoirSpec, tau: float) -> float:
    """Correlation kernel kappa(tau); closed form where available."""
    _require_tau(tau)
    if spec.family == TABULATED:
        return _interp_table(spec.table, tau, spec.table.kappa)
    if spec.alpha == 0.0:
        return 0.0
    if spec.family == OHMIC_EXP_CUTOFF and spec.temperature == 0.0:
        x2 = (spec.wc * tau) ** 2
        return spec.alpha**2 * spec.wc**2 * (1.0 - x2) / (1.0 + x2) ** 2
    return spec.alpha**2 * _kappa_integral(spec, tau)


def mu(spec: ReservoirSpec, tau: float) -> float:
    """Susceptibility kernel mu(tau); temperature independent."""
    _require_tau(tau)
    if spec.family == TABULATED:
        return _interp_table(spec.table, tau, spec.table.mu)
    if spec.alpha == 0.0 or tau == 0.0:
        return 0.0
    if spec.family == OHMIC_EXP_CUTOFF:
        x2 = (spec.wc * tau) ** 2
        return spec.alpha**2 * 2.0 * spec.wc**3 * tau / (1.0 + x2) ** 2
    if spec.family == OHMIC_LORENTZ_DRUDE:
        return spec.alpha**2 * spec.wc**2 * np.exp(-spec.wc * tau)
    return spec.alpha**2 * _mu_integral(spec, tau)


def _interp_table(table: KernelTable, tau: float, column: np.ndarray) -> float:
    if tau > table.grid[-1]:
        raise ValidationError(
            f"tau={tau:g} outside tabulated kernel range [0, {table.grid[-1]:g}]"
        )
    return float(np.interp(tau, table.grid, column))


def tabulate_kernels(spec: ReservoirSpec, grid) -> KernelTable:
    """Sample kappa and mu on ``grid`` (strictly increasing, starting at 0)."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("grid must be a non-empty 1-d sequence")
    if grid[0] != 0.0:
        raise ValidationError("kernel grid must start at tau = 0")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("kernel grid must be strictly increasing")
    kap = np.array([kappa(spec, t) for t in grid])
    muv = np.array([mu(spec, t) for t in grid])
    return KernelTable(grid=grid, kappa=kap, mu=muv)


def load_kernel_csv(path) -> KernelTable:
    """Read a tabulated kernel from CSV with header ``tau,kappa,mu``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        from qbm.errors import FileError

        raise FileError(f"cannot read kernel CSV {path}: {exc}") from exc
    if not lines or lines[0].replace(" ", "") != "tau,kappa,mu":
        raise ValidationError(f"kernel CSV {path} must start with header 'tau,kappa,mu'")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValidationError(f"kernel CSV {path} line {i}: expected 3 comma-separated values")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValidationError(f"kernel CSV {path} line {i}: {exc}") from exc
    data = np.asarray(rows, dtype=float)
    return KernelTable(grid=data[:, 0], kappa=data[:, 1], mu=data[:, 2])

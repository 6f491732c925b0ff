"""Quantum characteristic functions: initial states, evolution, observables.

Conventions, fixed once and locked by the Fock-space oracle tests:

    chi(z) = tr{ exp(i (p Xhat - x Phat)) rho },   z = (x, p),
    Xhat = (a + a^dag)/sqrt(2),  Phat = (a - a^dag)/(i sqrt(2)).

A Gaussian state is chi(z) = exp(i b.z - z.C.z/2) with b real and C the
real symmetric 2x2 quadratic form.  The derivative map

    <X^n> = (-i)^n d^n chi / dp^n |_0,    <P^n> = (+i)^n d^n chi / dx^n |_0

then gives <X> = b_p, <P> = -b_x, <X^2> = C_pp + b_p^2, <P^2> = C_xx + b_x^2
and <XP+PX> = -2 C_xp - 2 b_x b_p; equivalently C = J V J^T where V is the
physical covariance matrix of (X, P) and J = [[0, -1], [1, 0]].

Evolution multiplies by a Gaussian and contracts the argument:

    chi_t(z) = exp(-z.Wbar(t).z) * chi_0(e^{-Gamma/2} R^{-1}(t) z)

so Gaussian states stay Gaussian with

    b(t) = e^{-Gamma/2} (R^{-1})^T b_0,
    C(t) = 2 Wbar + e^{-Gamma} (R^{-1})^T C_0 R^{-1}.

Non-Gaussian states (Fock, tabulated) get their moments from 4th-order
central differences of chi_t at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import eval_laguerre

from qbm.errors import DomainTooSmallError, NumericalError, ValidationError
from qbm.propagator import PropagatorBundle

_SYMPLECTIC_J = np.array([[0.0, -1.0], [1.0, 0.0]])
_FD_STEP = 1e-4
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class GaussianMoments:
    """Gaussian chi parameters: linear phase b and quadratic form C."""

    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(2)
        c = np.asarray(self.c, dtype=float).reshape(2, 2)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValidationError("Gaussian moments must be finite")
        if abs(c[0, 1] - c[1, 0]) > 1e-12:
            raise ValidationError("Gaussian quadratic form must be symmetric")


def covariance_to_chi_form(v: np.ndarray) -> np.ndarray:
    """Map a physical (X, P) covariance matrix to the chi quadratic form."""
    return _SYMPLECTIC_J @ np.asarray(v, dtype=float) @ _SYMPLECTIC_J.T


@dataclass(frozen=True)
class CoherentState:
    x0: float = 0.0
    p0: float = 0.0

    @property
    def gaussian(self) -> GaussianMoments:
        return GaussianMoments(b=np.array([-self.p0, self.x0]), c=0.5 * np.eye(2))

    def chi0(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return np.exp(-(x**2 + p**2) / 4.0 + 1j * (p * self.x0 - x * self.p0))

    def initial_energy(self, omega0: float) -> float:
        return 0.5 * omega0 * (self.x0**2 + self.p0**2 + 1.0)


@dataclass(frozen=True)
class ThermalState:
    nbar: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ValidationError("thermal occupation nbar must be >= 0")

    @property
    def gaussian(self) -> GaussianMoments:
        return GaussianMoments(b=np.zeros(2), c=0.5 * (2.0 * self.nbar + 1.0) * np.eye(2))

    def chi0(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return np.exp(-(2.0 * self.nbar + 1.0) * (x**2 + p**2) / 4.0) + 0j

    def initial_energy(self, omega0: float) -> float:
        return omega0 * (self.nbar + 0.5)


@dataclass(frozen=True)
class SqueezedVacuum:
    """Squeezed vacuum: position variance e^{-2r}/2 at phi = 0.

    phi rotates the squeezing axis along the free-evolution flow, i.e. the
    state equals exp(-i phi n) S(r) |0> in the Fock construction.
    """

    r_sq: float
    phi: float = 0.0

    def covariance(self) -> np.ndarray:
        rot = np.array(
            [[np.cos(self.phi), np.sin(self.phi)], [-np.sin(self.phi), np.cos(self.phi)]]
        )
        core = 0.5 * np.diag([np.exp(-2.0 * self.r_sq), np.exp(2.0 * self.r_sq)])
        return rot @ core @ rot.T

    @property
    def gaussian(self) -> GaussianMoments:
        return GaussianMoments(b=np.zeros(2), c=covariance_to_chi_form(self.covariance()))

    def chi0(self, x, p):
        g = self.gaussian
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        quad = g.c[0, 0] * x**2 + 2.0 * g.c[0, 1] * x * p + g.c[1, 1] * p**2
        return np.exp(-0.5 * quad) + 0j

    def initial_energy(self, omega0: float) -> float:
        return 0.5 * omega0 * float(np.trace(self.covariance()))


@dataclass(frozen=True)
class FockState:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValidationError("Fock level n must be a non-negative integer")
        object.__setattr__(self, "n", int(self.n))

    gaussian = None

    def chi0(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        z2 = x**2 + p**2
        return np.exp(-z2 / 4.0) * eval_laguerre(self.n, z2 / 2.0) + 0j

    def initial_energy(self, omega0: float) -> float:
        return omega0 * (self.n + 0.5)


class TabulatedChi:
    """chi sampled on a symmetric rectangular (x, p) grid, bilinear inside.

    The node set must be symmetric about the origin so chi(0) = 1 and the
    Hermiticity symmetry chi(z) = conj chi(-z) can be validated on the
    samples themselves.  Evaluation outside the grid raises.
    """

    gaussian = None

    def __init__(self, x_nodes, p_nodes, values):
        x_nodes = np.asarray(x_nodes, dtype=float)
        p_nodes = np.asarray(p_nodes, dtype=float)
        values = np.asarray(values, dtype=complex)
        if values.shape != (len(x_nodes), len(p_nodes)):
            raise ValidationError("chi table shape must be (len(x_nodes), len(p_nodes))")
        for name, nodes in (("x", x_nodes), ("p", p_nodes)):
            if np.any(np.diff(nodes) <= 0):
                raise ValidationError(f"{name} nodes must be strictly increasing")
            if np.max(np.abs(nodes + nodes[::-1])) > 1e-12:
                raise ValidationError(f"{name} nodes must be symmetric about 0")
            if len(nodes) % 2 == 0:
                raise ValidationError(f"{name} nodes must include the origin (odd count)")
        sym = values - np.conj(values[::-1, ::-1])
        if np.max(np.abs(sym)) > 1e-9:
            raise ValidationError("tabulated chi violates chi(z) = conj chi(-z) at the nodes")
        i0, j0 = len(x_nodes) // 2, len(p_nodes) // 2
        if abs(values[i0, j0] - 1.0) > 1e-9:
            raise ValidationError("tabulated chi must satisfy chi(0, 0) = 1")
        self.x_nodes = x_nodes
        self.p_nodes = p_nodes
        self.values = values
        i0, j0 = len(x_nodes) // 2, len(p_nodes) // 2
        # derivative probes must straddle whole cells: inside one cell the
        # bilinear interpolant has no curvature at all
        self.fd_step = float(max(x_nodes[i0 + 1] - x_nodes[i0], p_nodes[j0 + 1] - p_nodes[j0]))
        self._re = RegularGridInterpolator((x_nodes, p_nodes), values.real, method="linear")
        self._im = RegularGridInterpolator((x_nodes, p_nodes), values.imag, method="linear")

    def chi0(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        shape = np.broadcast_shapes(x.shape, p.shape)
        pts = np.column_stack(
            [np.broadcast_to(x, shape).ravel(), np.broadcast_to(p, shape).ravel()]
        )
        try:
            vals = self._re(pts) + 1j * self._im(pts)
        except ValueError as exc:
            raise ValidationError(f"tabulated chi evaluated outside its grid: {exc}") from exc
        return vals.reshape(shape) if shape else complex(vals[0])

    def initial_energy(self, omega0: float):
        return None


STATE_KINDS = ("coherent", "thermal", "squeezed", "fock", "tabulated_chi")


def make_state(kind: str, **params):
    if kind == "coherent":
        return CoherentState(**params)
    if kind == "thermal":
        return ThermalState(**params)
    if kind == "squeezed":
        return SqueezedVacuum(**params)
    if kind == "fock":
        return FockState(**params)
    if kind == "tabulated_chi":
        return TabulatedChi(**params)
    raise ValidationError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}")


def chi0_eval(state, z) -> complex:
    z = np.asarray(z, dtype=float).reshape(2)
    return complex(state.chi0(z[0], z[1]))


def _node(bundle: PropagatorBundle, t_index: int):
    n = len(bundle)
    if not -n <= t_index < n:
        raise ValidationError(f"t_index {t_index} outside grid of length {n}")
    return (
        bundle.big_gamma[t_index],
        bundle.rotations_inv[t_index],
        bundle.w_bar[t_index],
    )


def evolve_chi(bundle: PropagatorBundle, state, z, t_index: int) -> complex:
    """chi_t(z) at one grid node."""
    z = np.asarray(z, dtype=float).reshape(2)
    if not np.all(np.isfinite(z)):
        raise ValidationError("z must be finite")
    big_gamma, rinv, w = _node(bundle, t_index)
    gauss = np.exp(-(z @ w @ z))
    arg = np.exp(-0.5 * big_gamma) * (rinv @ z)
    return float(gauss) * complex(state.chi0(arg[0], arg[1]))


def evolve_chi_grid(bundle: PropagatorBundle, state, t_index: int, x, p):
    """Vectorized chi_t over broadcastable meshes of x and p."""
    big_gamma, rinv, w = _node(bundle, t_index)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    gauss = np.exp(-(w[0, 0] * x**2 + 2.0 * w[0, 1] * x * p + w[1, 1] * p**2))
    scale = np.exp(-0.5 * big_gamma)
    xr = scale * (rinv[0, 0] * x + rinv[0, 1] * p)
    pr = scale * (rinv[1, 0] * x + rinv[1, 1] * p)
    return gauss * state.chi0(xr, pr)


def gaussian_evolve(bundle: PropagatorBundle, g: GaussianMoments, t_index: int) -> GaussianMoments:
    big_gamma, rinv, w = _node(bundle, t_index)
    b_t = np.exp(-0.5 * big_gamma) * (rinv.T @ g.b)
    c_t = 2.0 * w + np.exp(-big_gamma) * (rinv.T @ g.c @ rinv)
    c_t[1, 0] = c_t[0, 1]
    return GaussianMoments(b=b_t, c=c_t)


@dataclass(frozen=True)
class MomentRow:
    mean_x: float
    mean_p: float
    xx: float
    pp: float
    xp_sym: float


@dataclass(frozen=True)
class ObservableSeries:
    grid: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    xx: np.ndarray
    pp: np.ndarray
    xp_sym: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        bad_x = np.any(self.xx < self.mean_x**2 - 1e-10)
        bad_p = np.any(self.pp < self.mean_p**2 - 1e-10)
        if bad_x or bad_p:
            raise NumericalError("variance floor violated: <A^2> < <A>^2 beyond tolerance")


def _moments_from_gaussian(g: GaussianMoments) -> MomentRow:
    b, c = g.b, g.c
    return MomentRow(
        mean_x=b[1],
        mean_p=-b[0],
        xx=c[1, 1] + b[1] ** 2,
        pp=c[0, 0] + b[0] ** 2,
        xp_sym=-2.0 * c[0, 1] - 2.0 * b[0] * b[1],
    )


_STENCIL_OFFSETS = np.array([2.0, 1.0, -1.0, -2.0])
_STENCIL_WEIGHTS = np.array([-1.0, 8.0, -8.0, 1.0])


def _moments_fd(chi, h: float = _FD_STEP) -> MomentRow:
    """Moments from 4th-order central differences of chi at the origin."""

    def check_real(value: complex, what: str) -> float:
        if abs(value.imag) > _IMAG_TOL:
            raise NumericalError(
                f"imaginary residue {value.imag:.2e} in {what}: phase-space "
                "convention mismatch between state and derivative map"
            )
        return value.real

    px = [chi(o * h, 0.0) for o in _STENCIL_OFFSETS]
    pp_ = [chi(0.0, o * h) for o in _STENCIL_OFFSETS]
    chi0 = chi(0.0, 0.0)

    d_x = np.dot(_STENCIL_WEIGHTS, px) / (12.0 * h)
    d_p = np.dot(_STENCIL_WEIGHTS, pp_) / (12.0 * h)
    d_xx = (-px[0] + 16 * px[1] - 30 * chi0 + 16 * px[2] - px[3]) / (12.0 * h**2)
    d_pp = (-pp_[0] + 16 * pp_[1] - 30 * chi0 + 16 * pp_[2] - pp_[3]) / (12.0 * h**2)
    d_xp = sum(
        wx * wp * chi(ox * h, op * h)
        for ox, wx in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
        for op, wp in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
    ) / (12.0 * h) ** 2

    return MomentRow(
        mean_x=check_real(-1j * d_p, "<X>"),
        mean_p=check_real(1j * d_x, "<P>"),
        xx=check_real(-d_pp, "<X^2>"),
        pp=check_real(-d_xx, "<P^2>"),
        xp_sym=check_real(2.0 * d_xp, "<XP+PX>"),
    )


def moments(bundle: PropagatorBundle, state, t_index: int, method: str = "auto") -> MomentRow:
    """First and second moments at one node.

    Gaussian states use the closed-form moment map; anything else falls back
    to finite differences of chi_t.  ``method='fd'`` forces the generic path
    (used to cross-check the closed form).
    """
    if method not in ("auto", "gaussian", "fd"):
        raise ValidationError(f"unknown moment method {method!r}")
    g = getattr(state, "gaussian", None)
    if method in ("auto", "gaussian") and g is not None:
        return _moments_from_gaussian(gaussian_evolve(bundle, g, t_index))
    if method == "gaussian":
        raise ValidationError("state has no Gaussian parametrization")
    h = _FD_STEP
    table_step = getattr(state, "fd_step", None)
    if table_step is not None:
        # argument contraction e^{-Gamma/2} shrinks probes in table coordinates
        h = max(h, table_step * float(np.exp(0.5 * bundle.big_gamma[t_index])))
    return _moments_fd(lambda x, p: evolve_chi(bundle, state, (x, p), t_index), h)


def observable_series(bundle: PropagatorBundle, state, method: str = "auto") -> ObservableSeries:
    """Moment trajectories over the whole grid; energy is moment-based."""
    g = getattr(state, "gaussian", None)
    if method in ("auto", "gaussian") and g is not None:
        scale = np.exp(-0.5 * bundle.big_gamma)
        b_t = scale[:, None] * np.einsum("nji,j->ni", bundle.rotations_inv, g.b)
        c_t = 2.0 * bundle.w_bar + (scale**2)[:, None, None] * np.einsum(
            "nji,jk,nkl->nil", bundle.rotations_inv, g.c, bundle.rotations_inv
        )
        mean_x = b_t[:, 1]
        mean_p = -b_t[:, 0]
        xx = c_t[:, 1, 1] + b_t[:, 1] ** 2
        pp = c_t[:, 0, 0] + b_t[:, 0] ** 2
        xp_sym = -2.0 * c_t[:, 0, 1] - 2.0 * b_t[:, 0] * b_t[:, 1]
    else:
        rows = [moments(bundle, state, i, method="fd") for i in range(len(bundle))]
        mean_x = np.array([r.mean_x for r in rows])
        mean_p = np.array([r.mean_p for r in rows])
        xx = np.array([r.xx for r in rows])
        pp = np.array([r.pp for r in rows])
        xp_sym = np.array([r.xp_sym for r in rows])
    energy = 0.5 * bundle.omega0 * (xx + pp)
    return ObservableSeries(
        grid=bundle.grid,
        mean_x=mean_x,
        mean_p=mean_p,
        xx=xx,
        pp=pp,
        xp_sym=xp_sym,
        energy=energy,
    )


@dataclass(frozen=True)
class EnergyResult:
    value: float
    method: str  # "closed_form" or "moments"


def initial_energy(bundle: PropagatorBundle, state) -> float:
    """<H0> at t = 0; finite differences when no closed form exists."""
    e0 = state.initial_energy(bundle.omega0)
    if e0 is None:
        row = moments(bundle, state, 0, method="fd")
        e0 = 0.5 * bundle.omega0 * (row.xx + row.pp)
    return e0


def mean_energy(bundle: PropagatorBundle, state, t_index: int) -> EnergyResult:
    """<H0>_t with H0 = (omega0/2)(X^2 + P^2).

    In the rwa and norenorm modes the closed form
    e^{-Gamma} <H0>_0 + omega0 * tr Wbar applies (tr Wbar = delta_gamma in
    rwa); the full mode has no such form and falls back to moments.
    """
    if bundle.mode in ("rwa", "norenorm"):
        e0 = initial_energy(bundle, state)
        value = (
            np.exp(-bundle.big_gamma[t_index]) * e0
            + bundle.omega0 * bundle.delta_gamma[t_index]
        )
        return EnergyResult(value=float(value), method="closed_form")
    row = moments(bundle, state, t_index)
    return EnergyResult(value=0.5 * bundle.omega0 * (row.xx + row.pp), method="moments")


def energy_closed_series(bundle: PropagatorBundle, state) -> np.ndarray:
    """Closed-form energy over the grid (rwa / norenorm bundles)."""
    if bundle.mode not in ("rwa", "norenorm"):
        raise ValidationError("closed-form energy applies to rwa and norenorm bundles only")
    e0 = initial_energy(bundle, state)
    return np.exp(-bundle.big_gamma) * e0 + bundle.omega0 * bundle.delta_gamma


def rwa_energy_series(bundle: PropagatorBundle, coeffs, state) -> np.ndarray:
    """Rotating-wave closed-form energy, usable alongside any bundle."""
    from qbm.propagator import delta_gamma_series

    e0 = initial_energy(bundle, state)
    return np.exp(-bundle.big_gamma) * e0 + bundle.omega0 * delta_gamma_series(coeffs)


def rwa_moment_gaps(bundle: PropagatorBundle, t_index: int) -> tuple[float, float, float]:
    """Second-moment gaps relative to the rotating-wave solution.

    From a norenorm bundle the counter-rotating terms shift the second
    moments by (d<X^2>, d<P^2>, d<XP+PX>) = (-lambda, +lambda, -2*theta);
    only the sigma_z / sigma_x components of Wbar enter, so the gaps track
    the oscillating part of the diffusion matrix node by node.
    """
    if bundle.mode == "rwa":
        return (0.0, 0.0, 0.0)
    if bundle.mode != "norenorm":
        raise ValidationError("moment gaps are defined for norenorm bundles")
    lam = float(bundle.lam[t_index])
    theta = float(bundle.theta[t_index])
    return (-lam, lam, -2.0 * theta)


def wigner(
    bundle: PropagatorBundle,
    state,
    t_index: int,
    q_grid,
    p_grid,
    *,
    z_points: int = 256,
    z_extent: float | None = None,
):
    """Wigner function on the given phase-space grid.

    Symplectic Fourier transform of chi_t,
    W(u) = (2 pi)^{-2} Int chi_t(z) exp(-i u.J.z) d^2 z, discretized by a
    separable trapezoid on a square z-grid.  The extent is grown until
    |chi_t| < 1e-12 on the boundary (non-decaying chi raises).
    """
    q_grid = np.asarray(q_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    if q_grid.ndim != 1 or p_grid.ndim != 1:
        raise ValidationError("phase-space grids must be 1-d")

    decay_tol = 1e-12
    extents = [z_extent] if z_extent is not None else [8.0 * 2**k for k in range(4)]
    chi_vals = None
    for ext in extents:
        zx = np.linspace(-ext, ext, z_points)
        zp = np.linspace(-ext, ext, z_points)
        chi_vals = evolve_chi_grid(bundle, state, t_index, zx[:, None], zp[None, :])
        boundary = max(
            np.max(np.abs(chi_vals[0, :])),
            np.max(np.abs(chi_vals[-1, :])),
            np.max(np.abs(chi_vals[:, 0])),
            np.max(np.abs(chi_vals[:, -1])),
        )
        if boundary < decay_tol:
            break
    else:
        raise DomainTooSmallError(
            f"chi_t has not decayed below {decay_tol:g} at |z| = {extents[-1]:g}; "
            f"pass z_extent > {2 * extents[-1]:g} explicitly if the state allows it"
        )

    wx = np.full(z_points, zx[1] - zx[0])
    wx[0] = wx[-1] = 0.5 * (zx[1] - zx[0])
    wp = np.full(z_points, zp[1] - zp[0])
    wp[0] = wp[-1] = 0.5 * (zp[1] - zp[0])

    # W[q, p_out] = (2pi)^-2 sum_{x,pz} chi(x,pz) e^{-i p_out x} e^{+i q pz} wx wp
    phase_q = np.exp(1j * np.outer(zp, q_grid)) * wp[:, None]  # (zp, q)
    phase_p = np.exp(-1j * np.outer(p_grid, zx)) * wx[None, :]  # (p, zx)
    field = (phase_p @ (chi_vals @ phase_q)).T / (2.0 * np.pi) ** 2  # (q, p)
    max_imag = np.max(np.abs(field.imag))
    if max_imag > 1e-8:
        raise NumericalError(f"Wigner transform has imaginary residue {max_imag:.2e}")
    return field.real

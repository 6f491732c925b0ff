"""Gaussian part of the evolution: diffusion matrices and the mode bundles.

The evolved characteristic function is chi_t(z) = exp(-z^T Wbar(t) z) *
chi_0(exp(-Gamma/2) R^{-1}(t) z), so everything a consumer needs per time
node is the damping exponent Gamma, the 2x2 matrix R and the symmetric 2x2
diffusion matrix Wbar.  Three bundle modes:

full
    Exact R from the fundamental solutions;
    Wbar = e^{-Gamma} (R^{-1})^T W R^{-1} with
    W(t) = Int_0^t e^{Gamma(t1)} R^T(t1) M(t1) R(t1) dt1 and
    M = [[delta_bar, -pi/2], [-pi/2, 0]].
norenorm
    R replaced by the pure rotation; Wbar keeps the counter-rotating
    2*omega0 oscillations:
    Wbar ~= e^{-Gamma} Int_0^t e^{Gamma(t1)} [ delta_bar/2 * I
            + delta_bar/2 * C2(t-t1) - pi/2 * S2(t-t1) ] dt1
    with the traceless oscillation matrices
    C2(t) = [[cos 2w0 t, -sin 2w0 t], [-sin 2w0 t, -cos 2w0 t]],
    S2(t) = [[sin 2w0 t,  cos 2w0 t], [ cos 2w0 t, -sin 2w0 t]].
rwa
    Counter-rotating terms averaged away: Wbar = (delta_gamma/2) I with
    delta_gamma(t) = e^{-Gamma} Int_0^t e^{Gamma(t1)} delta_bar(t1) dt1.

The scalars (delta_gamma, lambda, theta) are the I / sigma_z / sigma_x
components of Wbar; the norenorm bracket is traceless apart from the
identity term, so tr Wbar = delta_gamma there and the mean energy cannot see
the counter-rotating terms.

All cumulative integrals use the same trapezoid rule as the coefficient
table, so the norenorm trace identity holds to rounding, not just to
quadrature order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from qbm.coefficients import CoefficientTable
from qbm.errors import ValidationError
from qbm.homogeneous import (
    approx_rotation,
    build_rotation,
    invert_rotation,
    solve_fundamental,
)
from qbm.kernels import ReservoirSpec, tabulate_kernels

MODES = ("full", "norenorm", "rwa")


@dataclass(frozen=True)
class PropagatorBundle:
    """Everything needed to evaluate chi_t at every grid node, one mode."""

    grid: np.ndarray
    mode: str
    omega0: float
    big_gamma: np.ndarray  # (n,)
    rotations: np.ndarray  # (n, 2, 2)
    rotations_inv: np.ndarray  # (n, 2, 2)
    w_bar: np.ndarray  # (n, 2, 2), symmetric
    delta_gamma: np.ndarray  # (n,)
    lam: np.ndarray  # (n,) sigma_z component of w_bar
    theta: np.ndarray  # (n,) sigma_x component of w_bar

    def __len__(self):
        return len(self.grid)


def m_matrix(coeffs: CoefficientTable, t_index: int) -> np.ndarray:
    """Diffusion quadratic-form matrix at one node."""
    d = coeffs.delta_bar[t_index]
    p = coeffs.pi[t_index]
    return np.array([[d, -0.5 * p], [-0.5 * p, 0.0]])


def m_matrices(coeffs: CoefficientTable) -> np.ndarray:
    m = np.zeros((len(coeffs.grid), 2, 2))
    m[:, 0, 0] = coeffs.delta_bar
    m[:, 0, 1] = -0.5 * coeffs.pi
    m[:, 1, 0] = -0.5 * coeffs.pi
    return m


def _cum_matrix(integrand: np.ndarray, grid: np.ndarray) -> np.ndarray:
    out = np.empty_like(integrand)
    for i in range(2):
        for j in range(2):
            out[:, i, j] = cumulative_trapezoid(integrand[:, i, j], grid, initial=0.0)
    return out


def _symmetrize(mats: np.ndarray) -> np.ndarray:
    sym = 0.5 * (mats + np.swapaxes(mats, -1, -2))
    # exact symmetry: mirror one triangle onto the other
    sym[..., 1, 0] = sym[..., 0, 1]
    return sym


def w_matrix(coeffs: CoefficientTable, rotations: np.ndarray) -> np.ndarray:
    """Cumulative integral of e^{Gamma} R^T M R on the shared grid."""
    if rotations.shape[0] != len(coeffs.grid):
        raise ValidationError("rotations and coefficient table must share the grid")
    m = m_matrices(coeffs)
    integrand = np.einsum("nji,njk,nkl->nil", rotations, m, rotations)
    integrand *= np.exp(coeffs.big_gamma)[:, None, None]
    return _symmetrize(_cum_matrix(integrand, coeffs.grid))


def w_bar_matrix(w: np.ndarray, rotations_inv: np.ndarray, big_gamma: np.ndarray) -> np.ndarray:
    """Congruence transform e^{-Gamma} (R^{-1})^T W R^{-1}."""
    out = np.einsum("nji,njk,nkl->nil", rotations_inv, w, rotations_inv)
    out *= np.exp(-big_gamma)[:, None, None]
    return _symmetrize(out)


def delta_gamma_series(coeffs: CoefficientTable) -> np.ndarray:
    acc = cumulative_trapezoid(np.exp(coeffs.big_gamma) * coeffs.delta_bar, coeffs.grid, initial=0.0)
    return np.exp(-coeffs.big_gamma) * acc


def w_bar_no_renorm(coeffs: CoefficientTable, omega0: float) -> np.ndarray:
    """Rotation-approximation Wbar including the 2*omega0 oscillating terms.

    The convolution kernel C2/S2(t - t1) is split by angle addition into
    cumulative integrals over t1 (exactly equivalent under the shared
    trapezoid rule, and a single pass instead of one integral per node).
    """
    grid = coeffs.grid
    eg = np.exp(coeffs.big_gamma)
    c2 = np.cos(2.0 * omega0 * grid)
    s2 = np.sin(2.0 * omega0 * grid)

    def cum(values):
        return cumulative_trapezoid(values, grid, initial=0.0)

    a_c = cum(eg * coeffs.delta_bar * c2)
    a_s = cum(eg * coeffs.delta_bar * s2)
    b_c = cum(eg * coeffs.pi * c2)
    b_s = cum(eg * coeffs.pi * s2)
    d = cum(eg * coeffs.delta_bar)

    ca = c2 * a_c + s2 * a_s  # Int e^G delta_bar cos 2w0(t-t1)
    sa = s2 * a_c - c2 * a_s  # Int e^G delta_bar sin 2w0(t-t1)
    cb = c2 * b_c + s2 * b_s  # Int e^G pi cos 2w0(t-t1)
    sb = s2 * b_c - c2 * b_s  # Int e^G pi sin 2w0(t-t1)

    emg = np.exp(-coeffs.big_gamma)
    w = np.empty((len(grid), 2, 2))
    w[:, 0, 0] = 0.5 * emg * (d + ca - sb)
    w[:, 1, 1] = 0.5 * emg * (d - ca + sb)
    w[:, 0, 1] = -0.5 * emg * (sa + cb)
    w[:, 1, 0] = w[:, 0, 1]
    return w


def lambda_theta(w_bar_node: np.ndarray) -> tuple[float, float, float]:
    """(delta_gamma, lambda, theta) components of one symmetric 2x2 node."""
    w = np.asarray(w_bar_node, dtype=float)
    if w.shape != (2, 2):
        raise ValidationError("expected a single 2x2 matrix")
    if abs(w[0, 1] - w[1, 0]) > 1e-12:
        raise ValidationError("diffusion matrix must be symmetric to 1e-12")
    return float(w[0, 0] + w[1, 1]), float(w[0, 0] - w[1, 1]), float(2.0 * w[0, 1])


def lambda_theta_series(w_bar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return w_bar[:, 0, 0] - w_bar[:, 1, 1], 2.0 * w_bar[:, 0, 1]


def build_propagator(
    spec: ReservoirSpec,
    grid,
    mode: str = "full",
    omega0: float = 1.0,
    *,
    coeffs: CoefficientTable | None = None,
) -> PropagatorBundle:
    """Assemble the per-mode bundle from a reservoir spec and time grid.

    Passing a precomputed coefficient table skips the kernel quadrature,
    which the CLI uses to share one table across modes.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if coeffs is None:
        coeffs = _default_coefficients(spec, grid, omega0)
    grid = coeffs.grid

    if mode == "full":
        fund = solve_fundamental(coeffs)
        rot = build_rotation(fund, coeffs)
        rot_inv = invert_rotation(rot)
        w_bar = w_bar_matrix(w_matrix(coeffs, rot), rot_inv, coeffs.big_gamma)
    else:
        rot = approx_rotation(omega0, grid)
        rot_inv = invert_rotation(rot)
        if mode == "norenorm":
            w_bar = w_bar_no_renorm(coeffs, omega0)
        else:
            half_dg = 0.5 * delta_gamma_series(coeffs)
            w_bar = np.zeros((len(grid), 2, 2))
            w_bar[:, 0, 0] = half_dg
            w_bar[:, 1, 1] = half_dg

    dg = w_bar[:, 0, 0] + w_bar[:, 1, 1]
    lam, theta = lambda_theta_series(w_bar)
    return PropagatorBundle(
        grid=grid,
        mode=mode,
        omega0=omega0,
        big_gamma=coeffs.big_gamma,
        rotations=rot,
        rotations_inv=rot_inv,
        w_bar=w_bar,
        delta_gamma=dg,
        lam=lam,
        theta=theta,
    )


def _default_coefficients(spec: ReservoirSpec, grid, omega0: float) -> CoefficientTable:
    from qbm.coefficients import compute_coefficients

    table = tabulate_kernels(spec, np.asarray(grid, dtype=float))
    return compute_coefficients(table, omega0)


PROPAGATOR_CSV_COLUMNS = "t,big_gamma,R11,R12,R21,R22,W11,W12,W22,delta_gamma,lambda,theta"


def write_propagator_csv(bundle: PropagatorBundle, path) -> None:
    from qbm.runio import write_csv

    r = bundle.rotations
    w = bundle.w_bar
    columns = np.column_stack(
        [
            bundle.grid,
            bundle.big_gamma,
            r[:, 0, 0],
            r[:, 0, 1],
            r[:, 1, 0],
            r[:, 1, 1],
            w[:, 0, 0],
            w[:, 0, 1],
            w[:, 1, 1],
            bundle.delta_gamma,
            bundle.lam,
            bundle.theta,
        ]
    )
    write_csv(path, PROPAGATOR_CSV_COLUMNS, columns)

"""Pipeline orchestration: one config in, CSV artifacts out.

Modes run independently off a shared coefficient table, so a multi-mode run
costs one kernel tabulation.  When the oracle mode is requested alongside
analytic modes, each analytic mode gets a matching brute-force integration
and ``diff_report.txt`` collects the max deviation per observable.  Plain
``observables.csv`` / ``oracle_observables.csv`` / ``propagator.csv`` mirror
the first mode of the run; mode-suffixed copies are always written.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from qbm import oracle as oracle_mod
from qbm import qcf
from qbm.coefficients import compute_coefficients, write_coefficients_csv
from qbm.config import RunConfig
from qbm.errors import FileError, ValidationError
from qbm.homogeneous import solve_fundamental, write_rotation_csv
from qbm.kernels import tabulate_kernels
from qbm.propagator import build_propagator, delta_gamma_series, write_propagator_csv
from qbm.runio import write_csv

OBSERVABLES_CSV_COLUMNS = "t,mean_x,mean_p,xx,pp,xp_sym,energy,energy_rwa,lambda,theta"
DIFF_OBSERVABLES = ("mean_x", "mean_p", "xx", "pp", "xp_sym", "energy")


@dataclass
class RunResult:
    output_dir: str
    files: list = field(default_factory=list)
    diffs: dict = field(default_factory=dict)


def build_grid(dt: float, t_max: float) -> np.ndarray:
    n = int(np.ceil(t_max / dt - 1e-9))
    return dt * np.arange(n + 1)


def _observables_matrix(bundle, series, energy, energy_rwa):
    return np.column_stack(
        [
            bundle.grid,
            series.mean_x,
            series.mean_p,
            series.xx,
            series.pp,
            series.xp_sym,
            energy,
            energy_rwa,
            bundle.lam,
            bundle.theta,
        ]
    )


def run(config: RunConfig) -> RunResult:
    """Execute every requested mode and write the artifact files."""
    outdir = config.output_dir
    try:
        os.makedirs(outdir, exist_ok=True)
        probe = os.path.join(outdir, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        raise FileError(f"output directory {outdir!r} is not writable: {exc}") from exc

    result = RunResult(output_dir=outdir)

    def emit(name, writer):
        path = os.path.join(outdir, name)
        writer(path)
        result.files.append(path)

    grid = build_grid(config.dt, config.t_max)
    kernels = tabulate_kernels(config.reservoir, grid)
    coeffs = compute_coefficients(kernels, config.omega0)
    emit("coefficients.csv", lambda p: write_coefficients_csv(coeffs, p))

    # observed-but-not-assumed properties collected along the run
    report_lines = [
        f"gamma_nonnegative {bool(np.all(coeffs.gamma >= 0))}",
        f"big_gamma_nondecreasing {bool(np.all(np.diff(coeffs.big_gamma) >= 0))}",
    ]

    analytic_modes = [m for m in config.modes if m != "oracle"]
    oracle_requested = "oracle" in config.modes
    oracle_modes = analytic_modes if analytic_modes else ["full"]

    bundles = {}
    analytic_series = {}
    for mode in analytic_modes:
        bundle = build_propagator(config.reservoir, grid, mode, config.omega0, coeffs=coeffs)
        bundles[mode] = bundle
        min_eig = float(np.min(np.linalg.eigvalsh(bundle.w_bar)))
        report_lines.append(f"w_bar_min_eigenvalue[{mode}] {min_eig:.17g}")
        series = qcf.observable_series(bundle, config.state)
        analytic_series[mode] = series
        if mode == "full":
            energy = series.energy
        else:
            energy = qcf.energy_closed_series(bundle, config.state)
        energy_rwa = np.exp(-bundle.big_gamma) * qcf.initial_energy(bundle, config.state) + (
            bundle.omega0 * delta_gamma_series(coeffs)
        )
        matrix = _observables_matrix(bundle, series, energy, energy_rwa)
        emit(f"observables_{mode}.csv", lambda p, m=matrix: write_csv(p, OBSERVABLES_CSV_COLUMNS, m))
        if mode == analytic_modes[0]:
            emit("observables.csv", lambda p, m=matrix: write_csv(p, OBSERVABLES_CSV_COLUMNS, m))
        emit(f"propagator_{mode}.csv", lambda p, b=bundle: write_propagator_csv(b, p))
        if mode == analytic_modes[0]:
            emit("propagator.csv", lambda p, b=bundle: write_propagator_csv(b, p))
        if mode == "full":
            fund = solve_fundamental(coeffs)
            emit("rotation.csv", lambda p: write_rotation_csv(fund, coeffs, p))

    if oracle_requested:
        ops = oracle_mod.fock_operators(config.oracle_dim, config.omega0)
        rho0 = oracle_mod.to_density_matrix(config.state, config.oracle_dim)
        diff_lines = []
        for mode in oracle_modes:
            traj = oracle_mod.integrate(
                rho0,
                coeffs,
                mode,
                ops=ops,
                leakage_threshold=config.leakage_threshold,
            )
            report_lines.append(
                f"oracle[{mode}] trace_error {traj.trace_error:.3e} "
                f"herm_drift {traj.herm_drift:.3e} max_leakage {traj.max_leakage:.3e}"
            )
            bundle = bundles.get(mode)
            if bundle is not None:
                e0 = traj.energy[0]
                energy_rwa = np.exp(-bundle.big_gamma) * e0 + bundle.omega0 * delta_gamma_series(
                    coeffs
                )
                lam, theta = bundle.lam, bundle.theta
            else:
                energy_rwa = np.full(len(grid), np.nan)
                lam = theta = np.full(len(grid), np.nan)
            matrix = np.column_stack(
                [
                    traj.grid,
                    traj.mean_x,
                    traj.mean_p,
                    traj.xx,
                    traj.pp,
                    traj.xp_sym,
                    traj.energy,
                    energy_rwa,
                    lam,
                    theta,
                ]
            )
            emit(
                f"oracle_observables_{mode}.csv",
                lambda p, m=matrix: write_csv(p, OBSERVABLES_CSV_COLUMNS, m),
            )
            if mode == oracle_modes[0]:
                emit(
                    "oracle_observables.csv",
                    lambda p, m=matrix: write_csv(p, OBSERVABLES_CSV_COLUMNS, m),
                )
            if mode in analytic_series:
                series = analytic_series[mode]
                diffs = {
                    name: float(np.max(np.abs(getattr(series, name) - getattr(traj, name))))
                    for name in DIFF_OBSERVABLES
                }
                result.diffs[mode] = diffs
                diff_lines.append(f"mode={mode}")
                diff_lines.extend(f"{name} {value:.17g}" for name, value in diffs.items())
        if diff_lines:
            path = os.path.join(outdir, "diff_report.txt")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("# max absolute deviation, analytic vs oracle, per observable\n")
                fh.write("\n".join(diff_lines) + "\n")
            result.files.append(path)

    if config.wigner_enabled:
        if analytic_modes:
            bundle = bundles[analytic_modes[0]]
        else:
            bundle = build_propagator(
                config.reservoir, grid, "full", config.omega0, coeffs=coeffs
            )
        axis = np.linspace(-config.wigner_extent, config.wigner_extent, config.wigner_points)
        for t_req in config.wigner_times:
            index = int(np.argmin(np.abs(grid - t_req)))
            field_vals = qcf.wigner(bundle, config.state, index, axis, axis)
            rows = np.column_stack(
                [
                    np.repeat(axis, len(axis)),
                    np.tile(axis, len(axis)),
                    field_vals.reshape(-1),
                ]
            )
            emit(f"wigner_t{index}.csv", lambda p, r=rows: write_csv(p, "q,p,w", r))

    report_path = os.path.join(outdir, "run_report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("# monitored run properties (observed, not assumed)\n")
        fh.write("\n".join(report_lines) + "\n")
    result.files.append(report_path)

    return result


ELLIPSE_CSV_COLUMNS = "theta_deg,x,p,x_circle,p_circle"


def ellipse_points(r_over_w0: float, gamma_over_w0: float, n_points: int = 360):
    """Constant-energy locus of the renormalized oscillator Hamiltonian.

    The quadratic form (1 - r/w0) x^2 + 2 (gamma/w0) x p + p^2 = 1 is the
    perturbed version of the unit circle traced by the bare oscillator; its
    area is pi/sqrt(det Q), and the gamma cross term tilts the axes.  Points
    are the image of the uniformly sampled unit circle under Q^{-1/2}.
    """
    if abs(r_over_w0) >= 1 or abs(gamma_over_w0) >= 1:
        raise ValidationError("ellipse inputs must satisfy |r/w0| < 1 and |gamma/w0| < 1")
    q = np.array([[1.0 - r_over_w0, gamma_over_w0], [gamma_over_w0, 1.0]])
    det = np.linalg.det(q)
    if det <= 0 or np.trace(q) <= 0:
        raise ValidationError(
            f"quadratic form is not elliptic (det={det:.3g}); no closed energy contour"
        )
    evals, evecs = np.linalg.eigh(q)
    q_inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    theta = np.deg2rad(np.arange(n_points, dtype=float))
    circle = np.stack([np.cos(theta), np.sin(theta)])
    pts = q_inv_sqrt @ circle
    return theta, pts, circle


def emit_ellipse(r_over_w0: float, gamma_over_w0: float, path) -> None:
    theta, pts, circle = ellipse_points(r_over_w0, gamma_over_w0)
    rows = np.column_stack([np.rad2deg(theta), pts[0], pts[1], circle[0], circle[1]])
    write_csv(path, ELLIPSE_CSV_COLUMNS, rows)

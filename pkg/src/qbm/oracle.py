"""Brute-force verifier on a truncated Fock basis.

Everything the analytic pipeline claims is re-derivable here the slow way:
X and P as dense matrices, the commutator (S) and anticommutator (Sigma)
superoperators as explicit d^2 x d^2 linear maps on column-vectorized
operators, the master equation integrated step by step, and the
superoperator algebra checked numerically.

The master equation in all its variants is

    d rho/dt = -i [Hbar_0(t), rho] - D(t) rho + gamma(t) (N + 2) rho

    Hbar_0 = (w0/2)(X^2 + P^2) - (r/2) X^2 + (gamma/2)(XP + PX)
    D      = delta_bar [X,[X,.]] - pi [X,[P,.]]
    N      = -(i/2) ( {P, [X, .]} - {X, [P, .]} )

with mode variants: ``full`` as above; ``norenorm`` drops r and gamma inside
Hbar_0 (bare oscillator) but keeps the dissipators; ``rwa`` additionally
replaces D by (delta_bar/2)([X,[X,.]] + [P,[P,.]]); ``unitary`` keeps only
the -i[Hbar_0, .] term (rotation-law checks).

Truncation hygiene: states must stay away from the top of the basis (the
leakage monitor aborts otherwise), and algebra residuals are measured on
interior matrix blocks where the truncated ladder operators act exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qbm.coefficients import CoefficientTable
from qbm.errors import LeakageError, TruncationError, ValidationError

INTERIOR_MARGIN = 5  # test operators / residuals live on levels 0 .. d-1-margin
_WEYL_WINDOW_TOP = 14  # fixed window so the Weyl residual shrinks as d grows


@dataclass(frozen=True)
class FockOperators:
    d: int
    a: np.ndarray
    x: np.ndarray
    p: np.ndarray
    # cached products used by the master-equation right-hand side
    x2: np.ndarray = field(repr=False, default=None)
    p2: np.ndarray = field(repr=False, default=None)
    xppx: np.ndarray = field(repr=False, default=None)
    h0: np.ndarray = field(repr=False, default=None)


def fock_operators(d: int, omega0: float = 1.0) -> FockOperators:
    if d < 8:
        raise ValidationError("Fock truncation needs d >= 8")
    a = np.zeros((d, d), dtype=complex)
    ns = np.sqrt(np.arange(1, d, dtype=float))
    a[np.arange(d - 1), np.arange(1, d)] = ns
    ad = a.conj().T
    x = (a + ad) / np.sqrt(2.0)
    p = (a - ad) / (1j * np.sqrt(2.0))
    x2 = x @ x
    p2 = p @ p
    return FockOperators(
        d=d,
        a=a,
        x=x,
        p=p,
        x2=x2,
        p2=p2,
        xppx=x @ p + p @ x,
        h0=0.5 * omega0 * (x2 + p2),
    )


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, order="F")


@dataclass(frozen=True)
class SuperMap:
    """Dense linear map on column-vectorized d x d operators."""

    mat: np.ndarray
    kind: str  # "S", "Sigma", "N" or "composite"
    d: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.mat @ vec(rho), self.d)


def s_type(a: np.ndarray) -> np.ndarray:
    """Matrix of rho -> [a, rho] on column-stacked operators."""
    d = a.shape[0]
    eye = np.eye(d)
    return np.kron(eye, a) - np.kron(a.T, eye)


def sigma_type(a: np.ndarray) -> np.ndarray:
    """Matrix of rho -> {a, rho}."""
    d = a.shape[0]
    eye = np.eye(d)
    return np.kron(eye, a) + np.kron(a.T, eye)


@dataclass(frozen=True)
class SuperOps:
    xs: SuperMap
    ps: SuperMap
    xsig: SuperMap
    psig: SuperMap
    n: SuperMap


def build_superops(ops: FockOperators) -> SuperOps:
    d = ops.d
    xs = s_type(ops.x)
    ps = s_type(ops.p)
    xsig = sigma_type(ops.x)
    psig = sigma_type(ops.p)
    n = -0.5j * (psig @ xs - xsig @ ps)
    return SuperOps(
        xs=SuperMap(xs, "S", d),
        ps=SuperMap(ps, "S", d),
        xsig=SuperMap(xsig, "Sigma", d),
        psig=SuperMap(psig, "Sigma", d),
        n=SuperMap(n, "N", d),
    )


MODES = ("full", "norenorm", "rwa", "unitary")


def _hamiltonian(ops: FockOperators, r: float, gamma: float, mode: str) -> np.ndarray:
    if mode in ("full", "unitary"):
        return ops.h0 - 0.5 * r * ops.x2 + 0.5 * gamma * ops.xppx
    return ops.h0


def generator(coeffs_at_t: dict, ops: FockOperators, mode: str) -> SuperMap:
    """The full d^2 x d^2 generator at one time (for algebra-level checks)."""
    if mode not in MODES:
        raise ValidationError(f"unknown oracle mode {mode!r}; expected one of {MODES}")
    dbar = coeffs_at_t.get("delta_bar", 0.0)
    piv = coeffs_at_t.get("pi", 0.0)
    r = coeffs_at_t.get("r", 0.0)
    gam = coeffs_at_t.get("gamma", 0.0)

    h = _hamiltonian(ops, r, gam, mode)
    mat = -1j * s_type(h)
    if mode == "unitary":
        return SuperMap(mat, "composite", ops.d)

    xs = s_type(ops.x)
    ps = s_type(ops.p)
    if mode == "rwa":
        mat -= 0.5 * dbar * (xs @ xs + ps @ ps)
    else:
        mat -= dbar * (xs @ xs) - piv * (xs @ ps)
    if gam != 0.0:
        nmat = -0.5j * (sigma_type(ops.p) @ xs - sigma_type(ops.x) @ ps)
        mat += gam * (nmat + 2.0 * np.eye(ops.d**2))
    return SuperMap(mat, "composite", ops.d)


def _rhs(rho, dbar, piv, r, gam, ops: FockOperators, mode: str):
    h = _hamiltonian(ops, r, gam, mode)
    out = -1j * (h @ rho - rho @ h)
    if mode == "unitary":
        return out
    x, p = ops.x, ops.p
    cx = x @ rho - rho @ x
    cp = p @ rho - rho @ p
    if mode == "rwa":
        out -= 0.5 * dbar * ((x @ cx - cx @ x) + (p @ cp - cp @ p))
    else:
        out -= dbar * (x @ cx - cx @ x) - piv * (x @ cp - cp @ x)
    n_rho = -0.5j * ((p @ cx + cx @ p) - (x @ cp + cp @ x))
    out += gam * (n_rho + 2.0 * rho)
    return out


@dataclass
class OracleTrajectory:
    grid: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    xx: np.ndarray
    pp: np.ndarray
    xp_sym: np.ndarray
    energy: np.ndarray
    trace_error: float
    herm_drift: float
    max_leakage: float
    rho_final: np.ndarray


def observables_from_rho(rho: np.ndarray, ops: FockOperators, omega0: float = 1.0) -> dict:
    mean_x = np.trace(ops.x @ rho).real
    mean_p = np.trace(ops.p @ rho).real
    xx = np.trace(ops.x2 @ rho).real
    pp = np.trace(ops.p2 @ rho).real
    xp_sym = np.trace(ops.xppx @ rho).real
    return {
        "mean_x": mean_x,
        "mean_p": mean_p,
        "xx": xx,
        "pp": pp,
        "xp_sym": xp_sym,
        "energy": 0.5 * omega0 * (xx + pp),
    }


def integrate(
    rho0: np.ndarray,
    coeffs: CoefficientTable,
    mode: str,
    *,
    ops: FockOperators | None = None,
    leakage_threshold: float = 1e-6,
    grid: np.ndarray | None = None,
) -> OracleTrajectory:
    """RK4 integration of the master equation on the coefficient grid.

    Coefficients at half-steps come from linear interpolation, rho is
    re-hermitized each step with the drift recorded, and population in the
    top three levels above the threshold aborts the run.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown oracle mode {mode!r}")
    rho = np.array(rho0, dtype=complex)
    d = rho.shape[0]
    if ops is None:
        ops = fock_operators(d, coeffs.omega0)
    if ops.d != d:
        raise ValidationError("operator dimension does not match rho")
    t = coeffs.grid if grid is None else np.asarray(grid, dtype=float)
    if grid is not None and not np.array_equal(t, coeffs.grid[: len(t)]):
        raise ValidationError("custom grid must be a prefix of the coefficient grid")
    n = len(t)

    names = ("delta_bar", "pi", "r", "gamma")
    node_vals = {k: getattr(coeffs, k)[:n] for k in names}
    mid_vals = {k: 0.5 * (node_vals[k][:-1] + node_vals[k][1:]) for k in names}

    series = {k: np.empty(n) for k in ("mean_x", "mean_p", "xx", "pp", "xp_sym", "energy")}
    trace_err = 0.0
    herm_drift = 0.0
    max_leak = 0.0

    def record(i, rho):
        row = observables_from_rho(rho, ops, coeffs.omega0)
        for k, v in row.items():
            series[k][i] = v

    def leakage(rho) -> float:
        return float(np.sum(np.diag(rho).real[-3:]))

    lk = leakage(rho)
    if lk > leakage_threshold:
        raise LeakageError(
            f"initial state already leaks {lk:.2e} into the top levels; increase d beyond {d}"
        )
    max_leak = lk
    record(0, rho)

    for i in range(n - 1):
        h = t[i + 1] - t[i]
        c0 = tuple(node_vals[k][i] for k in names)
        cm = tuple(mid_vals[k][i] for k in names)
        c1 = tuple(node_vals[k][i + 1] for k in names)
        k1 = _rhs(rho, *c0, ops, mode)
        k2 = _rhs(rho + 0.5 * h * k1, *cm, ops, mode)
        k3 = _rhs(rho + 0.5 * h * k2, *cm, ops, mode)
        k4 = _rhs(rho + h * k3, *c1, ops, mode)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        drift = np.max(np.abs(rho - rho.conj().T))
        herm_drift = max(herm_drift, drift)
        rho = 0.5 * (rho + rho.conj().T)

        lk = leakage(rho)
        max_leak = max(max_leak, lk)
        if lk > leakage_threshold:
            raise LeakageError(
                f"truncation leakage {lk:.2e} exceeded {leakage_threshold:.2e} at "
                f"t={t[i + 1]:g}; increase the oracle dimension beyond {d}"
            )
        trace_err = max(trace_err, abs(np.trace(rho).real - 1.0))
        record(i + 1, rho)

    return OracleTrajectory(
        grid=t,
        mean_x=series["mean_x"],
        mean_p=series["mean_p"],
        xx=series["xx"],
        pp=series["pp"],
        xp_sym=series["xp_sym"],
        energy=series["energy"],
        trace_error=trace_err,
        herm_drift=herm_drift,
        max_leakage=max_leak,
        rho_final=rho,
    )


# ---------------------------------------------------------------------------
# initial states


def to_density_matrix(state, d: int) -> np.ndarray:
    """Truncated density matrix for a qcf initial state (renormalized)."""
    from qbm import qcf

    if isinstance(state, qcf.CoherentState):
        alpha = (state.x0 + 1j * state.p0) / np.sqrt(2.0)
        n = np.arange(d)
        from scipy.special import gammaln

        amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1.0)) * np.abs(alpha) ** n
        phase = np.exp(1j * n * np.angle(alpha)) if alpha != 0 else np.ones(d)
        psi = amp * phase
        rho = np.outer(psi, psi.conj())
    elif isinstance(state, qcf.ThermalState):
        nb = state.nbar
        if nb == 0:
            rho = np.zeros((d, d), dtype=complex)
            rho[0, 0] = 1.0
        else:
            w = (nb / (nb + 1.0)) ** np.arange(d) / (nb + 1.0)
            rho = np.diag(w).astype(complex)
    elif isinstance(state, qcf.FockState):
        if state.n >= d - INTERIOR_MARGIN:
            raise ValidationError(f"Fock level {state.n} too close to truncation d={d}")
        rho = np.zeros((d, d), dtype=complex)
        rho[state.n, state.n] = 1.0
    elif isinstance(state, qcf.SqueezedVacuum):
        from scipy.linalg import expm

        ops = fock_operators(d)
        a, ad = ops.a, ops.a.conj().T
        squeeze = expm(0.5 * state.r_sq * (a @ a - ad @ ad))
        rotate = expm(-1j * state.phi * (ad @ a))
        psi = rotate @ squeeze @ np.eye(d, 1, dtype=complex).ravel()
        rho = np.outer(psi, psi.conj())
    else:
        raise ValidationError(
            f"no Fock-space representation for state {type(state).__name__}"
        )
    tr = np.trace(rho).real
    return rho / tr


# ---------------------------------------------------------------------------
# characteristic function from rho


def chi_from_rho(rho: np.ndarray, ops: FockOperators, z) -> complex:
    """tr{ exp(i (p X - x P)) rho } with a truncation-headroom guard."""
    z = np.asarray(z, dtype=float).reshape(2)
    x, p = z
    d = ops.d
    pops = np.clip(np.diag(rho).real, 0.0, None)
    tail = np.cumsum(pops[::-1])[::-1]
    occupied = np.nonzero(tail > 1e-10)[0]
    n_eff = int(occupied[-1]) if len(occupied) else 0
    # displaced-state headroom: population around n_eff moves up by the
    # coherent load |z|^2/2 with Poissonian spread; five widths of margin
    # keeps the truncated Weyl exponential accurate past 1e-8
    load = n_eff + 0.5 * (x**2 + p**2)
    if load + 5.0 * np.sqrt(load + 1.0) > d - 1:
        raise TruncationError(
            f"|z|={np.hypot(x, p):.3g} displaces past the truncation at d={d}; "
            f"need roughly d > {int(load + 5 * np.sqrt(load + 1) + 1)}"
        )
    herm = p * ops.x - x * ops.p
    evals, evecs = np.linalg.eigh(herm)
    weyl = (evecs * np.exp(1j * evals)) @ evecs.conj().T
    return complex(np.einsum("ij,ji->", weyl, rho))


# ---------------------------------------------------------------------------
# superoperator algebra suite


@dataclass(frozen=True)
class AlgebraCheck:
    name: str
    residual: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class AlgebraReport:
    d: int
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        for c in self.checks:
            yield f"{c.name:24s} residual={c.residual:.3e} threshold={c.threshold:.1e} {'pass' if c.passed else 'FAIL'}"

    def __getitem__(self, name: str) -> AlgebraCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _interior_max(m: np.ndarray, top: int) -> float:
    block = m[: top + 1, : top + 1]
    return float(np.max(np.abs(block)))


def _comm(a, b):
    return a @ b - b @ a


def _acomm(a, b):
    return a @ b + b @ a


def _apply_n(x, p, sigma):
    return -0.5j * (_acomm(p, _comm(x, sigma)) - _acomm(x, _comm(p, sigma)))


def algebra_suite(d: int, *, weyl_z=(1.5, 1.5), seed: int = 7) -> AlgebraReport:
    """Numerical check of the commutator/anticommutator superoperator algebra.

    All identities are applied to Hermitian test operators supported on
    levels 0..d-6, where the truncated ladder algebra is exact, and the
    residuals of the ladder-built eigenrelations are read off the same
    interior block.  The Weyl eigenoperator residual is measured on a fixed
    window (levels 0..14) whose distance from the truncation edge grows
    with d, so it is the one residual that genuinely shrinks with d: its
    size is set by how much the truncated Weyl exponential at amplitude |z|
    differs from the true one inside the window.
    """
    if d < 20:
        raise ValidationError("algebra suite needs d >= 20")
    ops = fock_operators(d)
    x, p = ops.x, ops.p
    top = d - 1 - INTERIOR_MARGIN
    rng = np.random.default_rng(seed)

    def interior_test_op() -> np.ndarray:
        m = rng.normal(size=(top + 1, top + 1)) + 1j * rng.normal(size=(top + 1, top + 1))
        m = 0.5 * (m + m.conj().T)
        out = np.zeros((d, d), dtype=complex)
        out[: top + 1, : top + 1] = m / np.max(np.abs(m))
        return out

    sig1 = interior_test_op()
    sig2 = interior_test_op()
    checks = []

    def add(name, residual, threshold):
        checks.append(AlgebraCheck(name, float(residual), threshold, residual < threshold))

    eye = np.eye(d, dtype=complex)
    add("s_on_identity", np.max(np.abs(_comm(x, eye))), 1e-12)
    add("sigma_on_identity", np.max(np.abs(_acomm(x, eye) - 2.0 * x)), 1e-12)

    for name, sig in (("a", sig1), ("b", sig2)):
        r1 = _comm(x, _comm(p, sig)) - _comm(p, _comm(x, sig))
        add(f"comm_xs_ps_{name}", np.max(np.abs(r1)), 1e-10)
        r2 = _comm(x, _acomm(p, sig)) - _acomm(p, _comm(x, sig)) - 2j * sig
        add(f"comm_xs_psig_{name}", np.max(np.abs(r2)), 1e-10)
        r3 = _acomm(x, _comm(p, sig)) - _comm(p, _acomm(x, sig)) - 2j * sig
        add(f"comm_xsig_ps_{name}", np.max(np.abs(r3)), 1e-10)

    for label, op in (("x", x), ("p", p)):
        r = _comm(op, _acomm(op, sig1)) - _comm(op @ op, sig1)
        add(f"square_{label}", np.max(np.abs(r)), 1e-10)

    # degree-counting eigenrelations, interior entries only: the corrupted
    # band of truncated powers stays near the truncation edge for n <= 3
    wx, wp = 0.7, -0.4
    mix = wp * x - wx * p
    for label, base in (("x", x), ("p", p), ("mix", mix)):
        worst = 0.0
        power = np.eye(d, dtype=complex)
        for n_pow in range(1, 4):
            power = power @ base
            res = _apply_n(x, p, power) - n_pow * power
            worst = max(worst, _interior_max(res, top))
        add(f"n_eigen_{label}", worst, 1e-10)

    # Weyl eigenrelation on the fixed interior window
    zx, zp = weyl_z
    herm = zp * x - zx * p
    evals, evecs = np.linalg.eigh(herm)
    weyl = (evecs * np.exp(-1j * evals)) @ evecs.conj().T
    window = min(_WEYL_WINDOW_TOP, top)
    res_x = _comm(x, weyl) + zx * weyl
    res_p = _comm(p, weyl) + zp * weyl
    weyl_residual = max(_interior_max(res_x, window), _interior_max(res_p, window))
    add("weyl_eigen", weyl_residual, _weyl_bound(d, window, zx, zp))

    # invariance of the damping counter under quadratic Hamiltonians
    r_test, gamma_test = 0.1, 0.05
    h = _hamiltonian(ops, r_test, gamma_test, "full")
    res = _apply_n(x, p, _comm(h, sig1)) - _comm(h, _apply_n(x, p, sig1))
    add("n_comm_hamiltonian", np.max(np.abs(res)), 1e-8)

    mbar = np.array([[0.3, -0.05], [-0.05, 0.1]])

    def dbar_apply(sig):
        return (
            mbar[0, 0] * _comm(x, _comm(x, sig))
            + mbar[0, 1] * (_comm(x, _comm(p, sig)) + _comm(p, _comm(x, sig)))
            + mbar[1, 1] * _comm(p, _comm(p, sig))
        )

    res = (
        _apply_n(x, p, dbar_apply(sig1))
        - dbar_apply(_apply_n(x, p, sig1))
        + 2.0 * dbar_apply(sig1)
    )
    add("n_comm_diffusion", np.max(np.abs(res)), 1e-8)

    coeff_row = {"delta_bar": 0.3, "pi": 0.1, "r": 0.1, "gamma": 0.05}
    worst = 0.0
    for mode in ("full", "norenorm", "rwa"):
        out = _rhs(sig1, coeff_row["delta_bar"], coeff_row["pi"], coeff_row["r"],
                   coeff_row["gamma"], ops, mode)
        worst = max(worst, abs(np.trace(out)))
    add("generator_traceless", worst, 1e-10)

    return AlgebraReport(d=d, checks=tuple(checks))


def _weyl_bound(d: int, window: int, zx: float, zp: float) -> float:
    """Heuristic truncation bound for the Weyl eigenrelation residual.

    The displaced-state amplitude connecting the measurement window to the
    truncation edge controls the corruption; a Poisson-tail estimate with a
    generous prefactor serves as the pass threshold.
    """
    lam = 0.5 * (zx**2 + zp**2)
    gap = max(d - 1 - window, 1)
    log_amp = 0.5 * (gap * np.log(max(lam, 1e-300)) - _log_factorial(gap) - lam)
    bound = 1e4 * np.sqrt(d) * np.exp(2.0 * min(log_amp, 0.0))
    return float(max(bound, 3e-11))


def _log_factorial(k: int) -> float:
    from scipy.special import gammaln

    return float(gammaln(k + 1.0))


def write_algebra_report(report: AlgebraReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# superoperator algebra suite, d={report.d}\n")
        for line in report.lines():
            fh.write(line + "\n")

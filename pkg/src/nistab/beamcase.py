"""Slewing flexible-arm benchmark: transcendental beam model and modal data.

The plant is a uniform Euler-Bernoulli beam pinned to a motor hub (inertia
I_h) at x = 0 and free at x = L, with a piezoelectric actuator/sensor pair
spanning the full length.  Inputs are the hub torque tau and the actuator
voltage V_a; outputs are the hub angle theta and the sensor voltage V_s.  In
the Laplace domain the deflection satisfies

    Y''''(x, s) - beta^4 Y(x, s) = 0,      beta^4(s) = -mu s^2 / (EI),

with boundary conditions Y(0) = 0,  EI Y''(0) - I_h s^2 Y'(0) + tau = 0 and
zero total moment/shear at the free tip; the actuator enters as equal and
opposite edge moments C_a V_a at the patch ends.  Every frequency response is
obtained by solving that two-point boundary-value problem numerically with a
fundamental system of the fourth-order operator (matrix-exponential
propagation at moderate beta L, a decaying-exponential basis beyond, where
the raw propagation would lose all precision to cosh^2 cancellation).

Calibration
-----------
The nominal physical constants of the benchmark arm do not reproduce its
published modal data: the tabulated resonance frequencies require the
bending stiffness EI to be divided by 100, and the published rigid-body
compliance (lim s^2 G_11 = 0.1407) additionally fixes a common scale on the
inertial quantities.  The defaults below therefore apply two documented
calibration factors (`inertia_scale`, applied to rho*A, I_h and EI alike,
and the extra 1/100 on EI); with them the model reproduces the benchmark
frequencies to better than 1e-5 relative.  The voltage channel gain (equal
actuator and sensor constants) is calibrated against the published first
flexible-mode coefficient.  All factors can be overridden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    InsufficientRangeError,
    NistabError,
    NotARootError,
    SingularAtSError,
)
from .ltimodel import ModalModel

__all__ = [
    "BeamParameters",
    "BeamTransferSample",
    "beam_tf",
    "d_of_s",
    "find_modal_roots",
    "modal_residue",
    "finite_dim_approx",
    "emit_residue_scan",
]

#: common scale on rho*A, I_h and EI fixing the rigid-body compliance
INERTIA_SCALE = 2.0108554

#: additional stiffness correction: tabulated frequencies need EI/100
STIFFNESS_CORRECTION = 0.01

#: actuator = sensor voltage constant (calibrated, see module docstring)
VOLTAGE_GAIN = 0.5481628

#: |beta*L| above which the propagation basis switches to decaying exponentials
_BASIS_SWITCH = 6.0


@dataclass(frozen=True)
class BeamParameters:
    """Physical constants of the slewing arm plus model calibration factors.

    The first nine fields are the nominal physical values (SI units except
    where noted: density is printed in its source's mixed unit, capacitance
    in uF/m^2); the calibration fields are described in the module docstring.
    """

    Ih: float = 0.0348            # hub inertia, N m s^2
    l: float = 2.0                # beam length, m
    rho: float = 2712.6           # density (source prints Kg/m^2)
    A: float = 483.87e-6          # cross-section area, m^2
    E: float = 69.0e9             # Young's modulus, N/m^2
    I: float = 1.63e-9            # area moment of inertia, m^4
    k31: float = -0.340           # piezo coupling coefficient
    C: float = 68.35              # capacitance, uF/m^2
    ts: float = 3.05e-4           # piezo thickness, m
    inertia_scale: float = INERTIA_SCALE
    stiffness_correction: float = STIFFNESS_CORRECTION
    voltage_gain: float = VOLTAGE_GAIN

    @property
    def mu(self) -> float:
        """Effective mass per unit length rho*A (calibrated)."""
        return self.inertia_scale * self.rho * self.A

    @property
    def EI(self) -> float:
        """Effective bending stiffness (calibrated)."""
        return self.inertia_scale * self.stiffness_correction * self.E * self.I

    @property
    def hub_inertia(self) -> float:
        """Effective hub inertia (calibrated)."""
        return self.inertia_scale * self.Ih

    @property
    def total_inertia(self) -> float:
        """Rigid-body inertia about the hub: I_h + mu l^3 / 3."""
        return self.hub_inertia + self.mu * self.l ** 3 / 3.0

    def to_dict(self) -> dict:
        return {
            "Ih": self.Ih, "l": self.l, "rho": self.rho, "A": self.A,
            "E": self.E, "I": self.I, "k31": self.k31, "C": self.C,
            "ts": self.ts, "inertia_scale": self.inertia_scale,
            "stiffness_correction": self.stiffness_correction,
            "voltage_gain": self.voltage_gain,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BeamParameters":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise DimensionError(f"unknown beam parameter keys: {sorted(bad)}")
        vals = {k: float(v) for k, v in d.items()}
        return cls(**vals)


@dataclass(frozen=True)
class BeamTransferSample:
    """One frequency-response sample of the 2x2 arm transfer matrix."""

    s: complex
    G: np.ndarray          # inputs (tau, V_a) -> outputs (theta, V_s)
    D_value: complex       # closed-form characteristic function at s


def _beta(p: BeamParameters, s: complex) -> complex:
    """Principal fourth root of -mu s^2 / EI; Re(beta) >= 0 always."""
    b = (-p.mu * s * s / p.EI + 0j) ** 0.25
    return -b if b.real < 0 else b


def d_of_s(p: BeamParameters, s: complex) -> complex:
    """Closed-form characteristic function whose imaginary-axis zeros are
    the flexible resonances:

        D(s) = 4 b EI [ mu (cos(bl) sinh(bl) - cosh(bl) sin(bl))
                        - b^3 I_h (1 + cos(bl) cosh(bl)) ],   b = beta(s).

    D(0) = 0 (the rigid-body double pole) and D(jw) is real for real w.
    """
    b = _beta(p, s)
    bl = b * p.l
    term = (p.mu * (np.cos(bl) * np.sinh(bl) - np.cosh(bl) * np.sin(bl))
            - b ** 3 * p.hub_inertia * (1.0 + np.cos(bl) * np.cosh(bl)))
    return 4.0 * b * p.EI * term


def _d_reduced(p: BeamParameters, w) -> np.ndarray:
    """D(jw) / cosh(beta l): same zeros, no overflow, vectorized over w."""
    w = np.asarray(w, dtype=float)
    b = (p.mu * w * w / p.EI) ** 0.25
    bl = b * p.l
    t = np.tanh(bl)
    sech = 1.0 / np.cosh(np.minimum(bl, 700.0))
    term = (p.mu * (np.cos(bl) * t - np.sin(bl))
            - b ** 3 * p.hub_inertia * (sech + np.cos(bl)))
    return 4.0 * b * p.EI * term


def _solve_boundary(p: BeamParameters, s: complex):
    """Solve the beam BVP for unit tau and unit V_a inputs.

    Returns ((theta_tau, vs_tau), (theta_va, vs_va)) where vs are raw slope
    differences Y'(l) - Y'(0); the voltage constants are applied by the
    caller.  Raises SingularAtSError when s sits on a modal root.
    """
    EI, Ih, L = p.EI, p.hub_inertia, p.l
    beta = _beta(p, s)
    ca = p.voltage_gain

    if abs(beta * L) <= _BASIS_SWITCH:
        # propagate the state (Y, Y', Y'', Y''') with the matrix exponential
        Abar = np.zeros((4, 4), dtype=complex)
        Abar[0, 1] = Abar[1, 2] = Abar[2, 3] = 1.0
        Abar[3, 0] = beta ** 4
        Phi = scipy.linalg.expm(Abar * L)

        def solve(tau, Va):
            # unknowns: Z(0-)[1:4]; Z(0+) = Z(0-) + [0,0,ca*Va/EI,0].
            # In pre-jump variables the hub balance reduces to
            # EI Y''(0-) - Ih s^2 Y'(0) = -tau (the patch moment cancels).
            M = np.zeros((3, 3), dtype=complex)
            rhs = np.zeros(3, dtype=complex)
            M[0] = [-Ih * s * s, EI, 0.0]
            rhs[0] = -tau
            M[1] = Phi[2, 1:4]
            rhs[1] = ca * Va / EI - Phi[2, 2] * ca * Va / EI
            M[2] = Phi[3, 1:4]
            rhs[2] = -Phi[3, 2] * ca * Va / EI
            r = np.abs(M).max(axis=1)
            if np.any(r == 0.0):
                raise SingularAtSError("degenerate boundary system")
            M, rhs = M / r[:, None], rhs / r
            try:
                v = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularAtSError(f"boundary system singular at s = {s}") from exc
            z0 = np.array([0.0, v[0], v[1], v[2]], dtype=complex)
            z0[2] += ca * Va / EI
            zL = Phi @ z0
            return v[0], zL[1] - v[0]
    else:
        # decaying-exponential basis: Y = a sin(bx) + b0 cos(bx)
        #                                 + pe e^{-bx} + qe e^{b(x-L)}
        bl = beta * L
        El = np.exp(-bl)
        S, Co = np.sin(bl), np.cos(bl)
        R1 = np.array([0, 1, 1, El], dtype=complex)                  # Y(0)
        Yp0 = np.array([1, 0, -1, El], dtype=complex)                # Y'(0)/b
        Ypp0 = np.array([0, -1, 1, El], dtype=complex)               # Y''(0)/b^2
        YppL = np.array([-S, -Co, El, 1], dtype=complex)             # Y''(L)/b^2
        YpppL = np.array([-Co, S, -El, 1], dtype=complex)            # Y'''(L)/b^3
        YpL = np.array([Co, -S, -El, 1], dtype=complex)              # Y'(L)/b
        M = np.vstack([
            R1,
            EI * beta ** 2 * Ypp0 - Ih * s * s * beta * Yp0,
            YppL,
            YpppL,
        ])
        r = np.abs(M).max(axis=1)
        M = M / r[:, None]

        def solve(tau, Va):
            rhs = np.array([
                0.0,
                -tau + ca * Va,
                ca * Va / (EI * beta ** 2),
                0.0,
            ], dtype=complex) / r
            try:
                c = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularAtSError(f"boundary system singular at s = {s}") from exc
            theta = beta * (Yp0 @ c)
            slope_diff = beta * (YpL @ c) - theta
            return theta, slope_diff

    return solve(1.0, 0.0), solve(0.0, 1.0)


def beam_tf(p: BeamParameters, s: complex, x1: float = 0.0,
            x2: float | None = None) -> BeamTransferSample:
    """Evaluate the 2x2 arm transfer matrix at s by solving the beam BVP.

    Only the full-span actuator/sensor configuration (x1 = 0, x2 = l) is
    supported; it is the configuration the benchmark fixes.

    Raises
    ------
    SingularAtSError
        When s coincides with a modal root (the boundary system is singular).
    """
    x2 = p.l if x2 is None else x2
    if x1 != 0.0 or x2 != p.l:
        raise NistabError("only full-span patches (x1 = 0, x2 = l) are supported")
    if s == 0:
        raise SingularAtSError("s = 0 is the rigid-body double pole")
    (th_t, sd_t), (th_v, sd_v) = _solve_boundary(p, s)
    cs = p.voltage_gain
    G = np.array([[th_t, th_v], [cs * sd_t, cs * sd_v]], dtype=complex)
    return BeamTransferSample(s=s, G=G, D_value=d_of_s(p, s))


def find_modal_roots(p: BeamParameters, count: int,
                     omega_max: float | None = None,
                     scan_step: float = 0.01) -> np.ndarray:
    """First `count` positive imaginary-axis roots of D, ascending.

    Sign-change bracketing of w -> D(jw) on a uniform grid (default step
    0.01 rad/s) refined by Brent bisection to 1e-10 relative.  The rigid
    pole at w = 0 is not included.

    Raises
    ------
    InsufficientRangeError
        If fewer than `count` roots lie below `omega_max`.
    """
    if count < 1:
        raise DimensionError("count must be at least 1")
    cap = omega_max
    lo = scan_step
    hi = 64.0 if cap is None else cap
    roots: list[float] = []
    while True:
        grid = np.arange(lo, hi + scan_step, scan_step)
        vals = _d_reduced(p, grid)
        sign = np.sign(vals)
        idx = np.where(sign[:-1] * sign[1:] < 0)[0]
        from scipy.optimize import brentq

        for i in idx:
            w = brentq(lambda x: float(_d_reduced(p, x)), grid[i], grid[i + 1],
                       xtol=1e-12, rtol=1e-12)
            roots.append(w)
            if len(roots) >= count:
                return np.array(roots[:count])
        if cap is not None:
            raise InsufficientRangeError(
                f"only {len(roots)} roots below omega_max = {cap}")
        lo, hi = hi, hi * 2.0
        if hi > 1e6:
            raise InsufficientRangeError("no further roots found below 1e6 rad/s")


def _nearest_root(p: BeamParameters, omega0: float) -> float:
    """Refine omega0 to the nearest root; NotARootError if none is close."""
    tol = 1e-6 * max(1.0, omega0)
    span = 5e-4 * max(1.0, omega0)
    from scipy.optimize import brentq

    a, b = omega0 - span, omega0 + span
    fa, fb = float(_d_reduced(p, a)), float(_d_reduced(p, b))
    if fa * fb > 0:
        raise NotARootError(f"{omega0} is not within {span:.2e} of a root of D")
    w = brentq(lambda x: float(_d_reduced(p, x)), a, b, xtol=1e-13, rtol=1e-13)
    if abs(w - omega0) > tol:
        raise NotARootError(
            f"nearest root {w:.9f} is {abs(w - omega0):.2e} away from {omega0}")
    return w


def _numerator_at(p: BeamParameters, w: float, h: float) -> np.ndarray:
    """N(jw) = G(jw) D(jw) extrapolated onto w (which may be a root).

    Two-sided evaluation with one h^2 Richardson step.
    """
    def avg(hh):
        Np = beam_tf(p, 1j * (w + hh)).G * d_of_s(p, 1j * (w + hh))
        Nm = beam_tf(p, 1j * (w - hh)).G * d_of_s(p, 1j * (w - hh))
        return 0.5 * (Np + Nm)

    N1, N2 = avg(h), avg(0.5 * h)
    return np.real((4.0 * N2 - N1) / 3.0)


def _d_prime(p: BeamParameters, w: float, h: float) -> float:
    """dD(jw)/dw by central differences of the closed form."""
    d1 = (d_of_s(p, 1j * (w + h)) - d_of_s(p, 1j * (w - h))) / (2.0 * h)
    d2 = (d_of_s(p, 1j * (w + 0.5 * h)) - d_of_s(p, 1j * (w - 0.5 * h))) / h
    return float(np.real((4.0 * d2 - d1) / 3.0))


def modal_residue(p: BeamParameters, omega0: float) -> np.ndarray:
    """Residue K = lim_{s->jw0} (s - jw0) j G(s) at a flexible resonance.

    Computed as K = -N(jw0) / D'(w0) with the numerator matrix
    N = G * D extrapolated onto the root and D' a central difference of the
    closed form.  For this colocated lossless model K is real symmetric PSD
    of rank one.

    Raises
    ------
    NotARootError
        If omega0 is not (within 1e-6 relative) a root of D.
    """
    w = _nearest_root(p, omega0)
    h = 1e-5 * max(1.0, w)
    K = -_numerator_at(p, w, h) / _d_prime(p, w, h)
    return 0.5 * (K + K.T)


def finite_dim_approx(p: BeamParameters, n: int) -> ModalModel:
    """Rational approximation keeping the rigid mode and first n resonances.

        G_f(s) = C_0 / s^2 + sum_{i=1..n} C_i / (s^2 + p_i^2)

    with coefficients from the partial-fraction rule
    C_i = N(j p_i) / (k prod_{j != i} (p_j^2 - p_i^2)).  The scalar k matches
    the product denominator to D at a reference frequency w0 = p_1 / 100 in
    the rigid-body-dominated band, which pins the double-pole coefficient C_0
    to the true lim s^2 G(s) up to O((w0/p_1)^2); w0 and k are recorded in
    ``meta``.
    """
    if n < 1:
        raise DimensionError("need at least one flexible mode")
    poles = find_modal_roots(p, n)
    w0 = float(poles[0] / 100.0)
    denom0 = (-w0 ** 2) * np.prod(poles ** 2 - w0 ** 2)
    k = float(np.real(d_of_s(p, 1j * w0))) / denom0

    # N(jw) = G D is even and analytic through w = 0: one Richardson step
    # on a root-free pair of small frequencies reaches ~1e-7 relative
    def n_of(w):
        return np.real(beam_tf(p, 1j * w).G * d_of_s(p, 1j * w))

    N0 = (4.0 * n_of(w0) - n_of(2.0 * w0)) / 3.0
    C0 = N0 / (k * np.prod(poles ** 2))
    C0 = 0.5 * (C0 + C0.T)
    # the rigid coefficient is PSD of rank one; shave extrapolation dust
    ew, V = np.linalg.eigh(C0)
    if ew[0] < 0.0 and abs(ew[0]) <= 1e-6 * max(abs(ew[-1]), 1e-300):
        C0 = (V * np.clip(ew, 0.0, None)) @ V.T
        C0 = 0.5 * (C0 + C0.T)

    terms = []
    for i, pi in enumerate(poles):
        others = np.delete(poles, i)
        prod = np.prod(others ** 2 - pi ** 2) * (0.0 - pi ** 2)
        Ni = _numerator_at(p, float(pi), 1e-5 * max(1.0, pi))
        Ci = Ni / (k * prod)
        terms.append((float(pi), 0.5 * (Ci + Ci.T)))

    return ModalModel(m=2, terms=tuple(terms), g2=C0,
                      meta={"k": k, "omega0": w0, "n_modes": n})


def emit_residue_scan(p: BeamParameters, gamma: float,
                      omegas: np.ndarray) -> list[tuple[float, float]]:
    """Table of (w, min eig of D'(jw)^2 K(jw) + gamma D(jw)^2).

    With K(jw) = -N(jw)/D'(w), the scanned matrix equals
    -D'(w) N(jw) + gamma D(jw)^2 I, which is smooth through the modal roots
    (where the second term vanishes and the first reduces to D'^2 K >= 0)
    and dominated by the positive gamma term elsewhere.  Grid points that
    collide with a root of D are nudged off it.
    """
    out = []
    for w in np.asarray(omegas, dtype=float):
        if w <= 0.0:
            continue
        try:
            G = beam_tf(p, 1j * w).G
        except SingularAtSError:
            w = w * (1.0 + 1e-7)
            G = beam_tf(p, 1j * w).G
        D = complex(d_of_s(p, 1j * w))
        h = 1e-5 * max(1.0, w)
        dp = _d_prime(p, w, h)
        Q = -dp * np.real(G * D) + gamma * abs(D) ** 2 * np.eye(2)
        Q = 0.5 * (Q + Q.T)
        out.append((float(w), float(np.linalg.eigvalsh(Q)[0])))
    return out

"""Free-body stability machinery: block realizations, Laurent data, verdicts.

This is the analytical core of the package.  For a strictly proper NI plant
G(s) interconnected in positive feedback with an SNI controller Gbar(s), the
internal-stability question is decided purely from

  * the leading Laurent coefficients of G about s = 0,

        G(s) = G2/s^2 + G1/s + G0 + O(s),

  * the controller DC gain Gbar(0),

through a family of necessary-and-sufficient sign conditions.  Which member
of the family applies depends on whether G2 and/or G1 vanish and on rank
relations between them and G0; :func:`stability_verdict` performs that
dispatch and reports every measured margin.  :func:`direct_stability` is the
independent eigenvalue oracle, and :func:`montecarlo_agreement` drives both
against randomly generated plant/controller pairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    G2ZeroError,
    IllConditionedTransformError,
    JordanBlockTooLargeError,
    LimitDivergentError,
    NistabError,
    NotMinimalError,
    NotStrictlyProperError,
    SingularInnerError,
)
from .ircsynth import make_irc
from .ltimodel import (
    ModalModel,
    StateSpaceModel,
    closed_loop,
    eval_tf,
    is_hurwitz,
    is_minimal,
    minimality_margin,
    modal_to_ss,
    spectral_abscissa,
)
from .matrixcore import (
    classify_definiteness,
    full_rank_factor,
    nullspace_contained,
    numerical_rank,
    psd_sqrt,
    symmetrize,
)
from .niclass import FrequencyGrid, classify_ni, classify_sni

__all__ = [
    "BlockDiagonalRealization",
    "LaurentCoefficients",
    "LaurentMethod",
    "Outcome",
    "Theorem",
    "Branch",
    "StabilityVerdict",
    "VerdictOptions",
    "to_block_diagonal",
    "laurent_coefficients",
    "projector_p",
    "build_f_matrix",
    "stability_verdict",
    "direct_stability",
    "montecarlo_agreement",
    "MonteCarloReport",
    "random_ni_plant",
    "random_sni_controller",
]

#: relative cutoff treating an eigenvalue of A as zero
ZERO_EIG_RTOL = 1e-7

#: ||Gi|| <= ZERO_COEFF_RTOL * (1 + ||G0||) counts as a vanishing coefficient
ZERO_COEFF_RTOL = 1e-8

#: strict inequalities satisfied by less than this (relative) are "boundary"
BOUNDARY_BAND = 1e-7

#: similarity transforms with condition number above this are rejected
TRANSFORM_COND_LIMIT = 1e8


# --------------------------------------------------------------------------
# block-diagonal realization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockDiagonalRealization:
    """Realization split as A = diag(A1, 0, A3) with A3 = [[0, I], [0, 0]].

    A1 (n1 x n1) is nonsingular and carries the oscillatory/decaying part;
    the n2 zero states carry simple origin poles; the k Jordan pairs carry
    double origin poles.  T is the similarity transform from the original
    state basis into this one.
    """

    A1: np.ndarray
    B1: np.ndarray
    C1: np.ndarray
    B2: np.ndarray
    C2: np.ndarray
    B3a: np.ndarray
    B3b: np.ndarray
    C3a: np.ndarray
    C3b: np.ndarray
    T: np.ndarray
    original: StateSpaceModel

    @property
    def n1(self) -> int:
        return self.A1.shape[0]

    @property
    def n2(self) -> int:
        return self.B2.shape[0]

    @property
    def k(self) -> int:
        return self.B3b.shape[0]

    @property
    def m(self) -> int:
        return self.original.m

    def to_model(self) -> StateSpaceModel:
        n1, n2, k, m = self.n1, self.n2, self.k, self.m
        A = np.zeros((n1 + n2 + 2 * k, n1 + n2 + 2 * k))
        A[:n1, :n1] = self.A1
        A[n1 + n2:n1 + n2 + k, n1 + n2 + k:] = np.eye(k)
        B = np.vstack([self.B1, self.B2, self.B3a, self.B3b])
        C = np.hstack([self.C1, self.C2, self.C3a, self.C3b])
        return StateSpaceModel(A, B, C, np.zeros((m, m)))


def _orth_complement_within(null_basis: np.ndarray, spanned: np.ndarray,
                            want: int) -> np.ndarray:
    """`want` directions of span(null_basis) orthogonal to span(spanned)."""
    if want == 0:
        return np.zeros((null_basis.shape[0], 0))
    if spanned.shape[1] == 0:
        return null_basis[:, :want]
    Q, _ = np.linalg.qr(spanned)
    proj = null_basis - Q @ (Q.T @ null_basis)
    U, s, _ = np.linalg.svd(proj, full_matrices=False)
    return U[:, :want]


def to_block_diagonal(model: StateSpaceModel) -> BlockDiagonalRealization:
    """Transform a minimal strictly proper model into free-body block form.

    The nonzero-eigenvalue invariant subspace is split off with a sorted real
    Schur form plus a Sylvester decoupling; the remaining (numerically
    nilpotent) block is reduced to exact Jordan structure of orders one and
    two.  Zero eigenvalues with Jordan blocks of order three or more are
    rejected, since no NI transfer matrix can produce them.

    Raises
    ------
    NotMinimalError, NotStrictlyProperError
    JordanBlockTooLargeError
        Origin pole of order three or more.
    IllConditionedTransformError
        Transform condition number above 1e8, or the transformed model fails
        to reproduce the original transfer matrix.
    """
    if not model.strictly_proper():
        raise NotStrictlyProperError("block-diagonal form requires D = 0")
    if not is_minimal(model):
        raise NotMinimalError("block-diagonal form requires a minimal realization")

    n = model.n
    A = np.asarray(model.A)
    ztol = ZERO_EIG_RTOL * max(1.0, np.linalg.norm(A, 2))

    S, Z, n1 = scipy.linalg.schur(
        A, output="real", sort=lambda re, im: re * re + im * im > ztol * ztol
    )
    n0 = n - n1
    S1, S12, S0 = S[:n1, :n1], S[:n1, n1:], S[n1:, n1:]

    if n0 == 0:
        W = Z
        Ablocks = (S1, np.zeros((0, 0)), np.zeros((0, 0)))
        k = n2 = 0
    else:
        if np.linalg.norm(S0 @ S0, 2) > ztol * max(1.0, np.linalg.norm(S0, 2)) ** 2 * 10.0:
            raise JordanBlockTooLargeError(
                "origin pole of order >= 3: not realizable by an NI system"
            )
        if n1 > 0:
            X = scipy.linalg.solve_sylvester(S1, -S0, -S12)
        else:
            X = np.zeros((0, n0))
        # rank of the nilpotent block = number of order-two Jordan pairs
        U, sv, Vt = np.linalg.svd(S0)
        k = int(np.sum(sv > ztol))
        n2 = n0 - 2 * k
        if n2 < 0:
            raise JordanBlockTooLargeError("inconsistent nilpotent structure")
        chain_b = Vt[:k].T                      # S0 maps these ...
        chain_a = S0 @ chain_b                  # ... onto these (exactly)
        null_basis = Vt[k:].T                   # null space of S0
        singles = _orth_complement_within(null_basis, chain_a, n2)
        Z0 = np.hstack([singles, chain_a, chain_b])
        T2 = np.block([[np.eye(n1), X], [np.zeros((n0, n1)), np.eye(n0)]])
        W = Z @ T2 @ scipy.linalg.block_diag(np.eye(n1), Z0)
        Ablocks = (S1, np.zeros((n2, n2)), None)

    condW = np.linalg.cond(W)
    if not np.isfinite(condW) or condW > TRANSFORM_COND_LIMIT:
        raise IllConditionedTransformError(
            f"transform condition number {condW:.2e} exceeds {TRANSFORM_COND_LIMIT:.0e}"
        )

    Bt = np.linalg.solve(W, model.B)
    Ct = model.C @ W

    B1, B2 = Bt[:n1], Bt[n1:n1 + n2]
    B3a, B3b = Bt[n1 + n2:n1 + n2 + k], Bt[n1 + n2 + k:]
    C1, C2 = Ct[:, :n1], Ct[:, n1:n1 + n2]
    C3a, C3b = Ct[:, n1 + n2:n1 + n2 + k], Ct[:, n1 + n2 + k:]

    real = BlockDiagonalRealization(
        A1=S[:n1, :n1], B1=B1, C1=C1, B2=B2, C2=C2,
        B3a=B3a, B3b=B3b, C3a=C3a, C3b=C3b, T=W, original=model,
    )

    # the exact-zero clipping above must not have moved the transfer matrix
    rng = np.random.default_rng(0)
    scale = max(1.0, np.linalg.norm(A, 2))
    clipped = real.to_model()
    for _ in range(4):
        s = complex(rng.normal(), rng.normal()) * scale + 0.5 * scale * (1 + 1j)
        ref = eval_tf(model, s)
        got = eval_tf(clipped, s)
        if np.linalg.norm(got - ref) > 1e-8 * max(1.0, np.linalg.norm(ref)):
            raise IllConditionedTransformError(
                "transformed realization failed transfer-matrix round trip"
            )
    return real


# --------------------------------------------------------------------------
# Laurent coefficients
# --------------------------------------------------------------------------


class LaurentMethod(enum.Enum):
    REALIZATION = "realization"
    NUMERIC_LIMIT = "numeric_limit"


@dataclass(frozen=True)
class LaurentCoefficients:
    """Leading coefficients G(s) = G2/s^2 + G1/s + G0 + O(s) near the origin.

    ``method`` identifies the primary route; the numeric-limit values are
    retained for cross-checking along with their mutual disagreement.
    """

    G0: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    method: LaurentMethod
    numeric: tuple | None = None
    agreement: float | None = None


def laurent_coefficients(model: StateSpaceModel,
                         cross_check: bool = True) -> LaurentCoefficients:
    """Laurent data of a minimal strictly proper model about s = 0.

    Primary route reads the coefficients off the block-diagonal realization
    (G2 = C3a B3b, G1 = C2 B2 + C3a B3a + C3b B3b, G0 = -C1 A1^-1 B1); the
    secondary route extracts the limits of s^2 G(s) numerically along real
    s -> 0+.  The three leading coefficients are recovered simultaneously
    from a polynomial fit of s^2 G(s) on a coarse geometric sample set inside
    the expansion radius: extracting them one at a time by repeated
    subtraction would amplify the near-double-pole evaluation noise by the
    square of the smallest sample and cannot stay reliable for ill-scaled
    realizations.  The measured disagreement is stored on the result
    (typically below 1e-8); disagreement beyond 1e-3, which no
    conditioning artifact produces, raises.
    """
    real = to_block_diagonal(model)
    G2 = real.C3a @ real.B3b
    G1 = real.C2 @ real.B2 + real.C3a @ real.B3a + real.C3b @ real.B3b
    if real.n1 > 0:
        G0 = -real.C1 @ np.linalg.solve(real.A1, real.B1)
    else:
        G0 = np.zeros((model.m, model.m))

    numeric = None
    agreement = None
    if cross_check:
        # expansion radius is the closest nonzero pole; evaluating far below
        # it trades truncation for solve conditioning (~1/eps^2 near the
        # origin pole) and loses the budget the cross-check needs
        if real.n1:
            radius = float(np.min(np.abs(np.linalg.eigvals(real.A1))))
        else:
            radius = 10.0
        G0n, G1n, G2n, resid = _laurent_numeric_limits(model, max(0.12 * radius, 1e-6))
        scale = 1.0 + max(np.linalg.norm(M) for M in (G0, G1, G2))
        if resid > 1e-4 * scale:
            raise LimitDivergentError(
                f"numeric Laurent limits failed to settle (fit residual {resid:.2e})"
            )
        numeric = (G0n, G1n, G2n)
        agreement = float(
            max(
                np.linalg.norm(numeric[0] - G0),
                np.linalg.norm(numeric[1] - G1),
                np.linalg.norm(numeric[2] - G2),
            )
            / scale
        )
        if agreement > 1e-3:
            raise NistabError(
                f"Laurent routes disagree by {agreement:.2e} (relative); "
                "realization or limits are unreliable for this model"
            )
    return LaurentCoefficients(G0=G0, G1=G1, G2=G2,
                               method=LaurentMethod.REALIZATION,
                               numeric=numeric, agreement=agreement)


def _laurent_numeric_limits(model: StateSpaceModel, eps0: float, degree: int = 9,
                            samples: int = 24):
    """Leading Laurent data from F(e) = e^2 G(e) sampled on [eps0/12, eps0].

    Least-squares fit of F by a degree-`degree` polynomial in t = e/eps0;
    the first three coefficients are the limits of s^2 G, s(G - G2/s^2) and
    (G - G2/s^2 - G1/s).  Returns (G0, G1, G2, fit_residual).
    """
    m = model.m
    t = np.geomspace(1.0 / 12.0, 1.0, samples)
    F = np.stack([
        np.real((e * e) * eval_tf(model, complex(e))).ravel() for e in eps0 * t
    ])
    V = np.vander(t, degree + 1, increasing=True)
    coef, _res, _rank, _sv = np.linalg.lstsq(V, F, rcond=None)
    resid = float(np.linalg.norm(V @ coef - F) / np.sqrt(samples))
    G2n = coef[0].reshape(m, m)
    G1n = coef[1].reshape(m, m) / eps0
    G0n = coef[2].reshape(m, m) / eps0 ** 2
    return G0n, G1n, G2n, resid


# --------------------------------------------------------------------------
# projector and Hankel subspace matrix
# --------------------------------------------------------------------------


def projector_p(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """X - X Y (Y' X Y)^-1 Y' X, the oblique reduction used by the verdicts.

    Annihilates range(Y) from the right (P(X, Y) @ Y = 0) and depends on Y
    only through its range.  A zero-width Y returns X unchanged.

    Raises
    ------
    SingularInnerError
        If Y' X Y is numerically singular.
    """
    X = symmetrize(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if Y.shape[0] != X.shape[0]:
        raise SingularInnerError(
            f"Y has {Y.shape[0]} rows, X is {X.shape[0]}x{X.shape[1]}")
    if Y.shape[1] == 0:
        return X
    inner = Y.T @ X @ Y
    smin = np.linalg.svd(inner, compute_uv=False)[-1]
    if smin <= 1e-12 * max(1.0, np.linalg.norm(inner, 2)):
        raise SingularInnerError("Y' X Y is numerically singular")
    P = X - X @ Y @ np.linalg.solve(inner, Y.T @ X)
    return 0.5 * (P + P.T)


def build_f_matrix(L: LaurentCoefficients) -> np.ndarray:
    """Subspace matrix F from the SVD of the block-Hankel [[G1, G2], [G2, 0]].

    The Hankel matrix is factored as U V1' with U = H1 S; splitting U into
    its top and bottom m rows U1, U2, the columns of F = U1 Vhat2 span the
    output directions excited by the free-body states, where Vhat2 is an
    orthonormal basis of the null space of U1' U2.

    Raises
    ------
    G2ZeroError
        The construction needs G2 != 0 (use the single-pole route otherwise).
    """
    m = L.G2.shape[0]
    if np.linalg.norm(L.G2) == 0.0:
        raise G2ZeroError("F construction requires a nonzero double-pole coefficient")
    Gamma = np.block([[L.G1, L.G2], [L.G2, np.zeros((m, m))]])
    H, sv, _Vt = np.linalg.svd(Gamma)
    cutoff = 2 * m * np.finfo(float).eps * sv[0]
    ntil = int(np.sum(sv > cutoff))
    U = H[:, :ntil] * sv[:ntil]
    U1, U2 = U[:m, :], U[m:, :]
    M = U1.T @ U2
    Um, sm, Vmt = np.linalg.svd(M)
    cut2 = ntil * np.finfo(float).eps * (sm[0] if sm.size and sm[0] > 0 else 1.0)
    # the compressed map is nilpotent, so a relative cutoff on its own scale
    # must be guarded against the Hankel scale as well
    cut2 = max(cut2, 1e-9 * sv[0])
    r = int(np.sum(sm > cut2))
    Vhat2 = Vmt[r:].T
    return U1 @ Vhat2


# --------------------------------------------------------------------------
# verdicts
# --------------------------------------------------------------------------


class Outcome(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"
    PRECONDITION_FAILED = "precondition_failed"
    BOUNDARY = "boundary"


class Theorem(enum.Enum):
    """Which member of the condition family decided the verdict."""

    DC_GAIN = "dc_gain"                          # no free body motion
    DOUBLE_POLE_GENERAL = "double_pole_general"  # G2 != 0, any G1
    DOUBLE_POLE = "double_pole"                  # G2 != 0, G1 = 0
    DOUBLE_POLE_RANGE = "double_pole_range"      # null(G2) inside null(G0')
    SINGLE_POLE = "single_pole"                  # G1 != 0, G2 = 0
    SINGLE_POLE_RANGE = "single_pole_range"      # null(G1') inside null(G0')
    FULL_RANK_FREE_BODY = "full_rank_free_body"  # Gbar(0) < 0 test
    NONE = "none"


class Branch(enum.Enum):
    PSD = "psd"
    NSD = "nsd"
    NULLSPACE_SHORTCUT = "nullspace_shortcut"
    INVERTIBLE = "invertible"
    NONE = "none"


@dataclass(frozen=True)
class VerdictOptions:
    grid: FrequencyGrid = field(default_factory=FrequencyGrid)
    zero_coeff_rtol: float = ZERO_COEFF_RTOL
    boundary_band: float = BOUNDARY_BAND
    hurwitz_margin: float = 1e-8
    run_oracle: bool = False
    skip_ni_check: bool = False


@dataclass
class StabilityVerdict:
    """Internal-stability decision plus every measured condition value."""

    outcome: Outcome
    theorem_used: Theorem
    branch: Branch
    condition_values: dict
    reason: str = ""
    oracle_agrees: bool | None = None
    laurent: LaurentCoefficients | None = None

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "theorem_used": self.theorem_used.value,
            "branch": self.branch.value,
            "condition_values": {k: float(v) for k, v in self.condition_values.items()},
            "reason": self.reason,
            "oracle_agrees": self.oracle_agrees,
            "tolerances": {
                "zero_coeff_rtol": ZERO_COEFF_RTOL,
                "boundary_band": BOUNDARY_BAND,
            },
        }


class _Conditions:
    """Accumulates strict-inequality checks with a shared boundary band."""

    def __init__(self, band: float):
        self.band = band
        self.values: dict[str, float] = {}
        self.all_hold = True
        self.boundary = False

    def strict_neg_definite(self, name: str, M: np.ndarray) -> None:
        """Require M < 0; records the largest eigenvalue."""
        top = float(np.linalg.eigvalsh(symmetrize(M))[-1]) if M.size else -np.inf
        self.values[name] = top
        scale = self.band * (1.0 + abs(top) + np.linalg.norm(M))
        if M.size == 0:
            return
        if abs(top) <= scale:
            self.boundary = True
        elif top > 0.0:
            self.all_hold = False

    def strict_pos_definite(self, name: str, M: np.ndarray) -> None:
        """Require M > 0; records the smallest eigenvalue."""
        bot = float(np.linalg.eigvalsh(symmetrize(M))[0]) if M.size else np.inf
        self.values[name] = bot
        scale = self.band * (1.0 + abs(bot) + np.linalg.norm(M))
        if M.size == 0:
            return
        if abs(bot) <= scale:
            self.boundary = True
        elif bot < 0.0:
            self.all_hold = False

    def nonsingular(self, name: str, M: np.ndarray) -> None:
        """Require det(M) != 0; records the smallest singular value."""
        smin = float(np.linalg.svd(M, compute_uv=False)[-1]) if M.size else 1.0
        self.values[name] = smin
        if M.size and smin <= self.band * max(1.0, np.linalg.norm(M, 2)):
            self.boundary = True

    def less_than_one(self, name: str, value: float) -> None:
        """Require value < 1."""
        self.values[name] = value
        if abs(value - 1.0) <= self.band * (1.0 + abs(value)):
            self.boundary = True
        elif value > 1.0:
            self.all_hold = False


def _verdict_from(conds: _Conditions, theorem: Theorem, branch: Branch,
                  laurent: LaurentCoefficients | None) -> StabilityVerdict:
    if conds.boundary:
        outcome = Outcome.BOUNDARY
        reason = "a decisive quantity sits inside the tolerance band"
    elif conds.all_hold:
        outcome, reason = Outcome.STABLE, ""
    else:
        outcome, reason = Outcome.UNSTABLE, ""
    return StabilityVerdict(outcome=outcome, theorem_used=theorem, branch=branch,
                            condition_values=conds.values, reason=reason,
                            laurent=laurent)


def _precondition_failed(reason: str, laurent=None, values=None) -> StabilityVerdict:
    return StabilityVerdict(
        outcome=Outcome.PRECONDITION_FAILED, theorem_used=Theorem.NONE,
        branch=Branch.NONE, condition_values=values or {}, reason=reason,
        laurent=laurent,
    )


def stability_verdict(G: StateSpaceModel, Gbar: StateSpaceModel,
                      opts: VerdictOptions | None = None) -> StabilityVerdict:
    """Decide internal stability of the positive feedback loop [G, Gbar].

    G must be NI and Gbar SNI (checked unless ``opts.skip_ni_check``); free
    body content additionally requires G strictly proper.  The decision is
    exact (necessary and sufficient) whenever the relevant reduced matrix is
    sign semidefinite; an indefinite reduction yields INCONCLUSIVE, and any
    decisive quantity inside the tolerance band yields BOUNDARY rather than a
    guess.
    """
    opts = opts or VerdictOptions()

    if not opts.skip_ni_check:
        ni = classify_ni(G, opts.grid)
        if not ni.is_ni:
            return _precondition_failed(
                "plant is not negative imaginary: " + "; ".join(ni.reasons))
        sni = classify_sni(Gbar, opts.grid)
        if not sni.is_sni:
            return _precondition_failed(
                "controller is not strictly negative imaginary: " + "; ".join(sni.reasons))

    Gbar0 = eval_tf(Gbar, 0.0).real
    ztol = ZERO_EIG_RTOL * max(1.0, np.linalg.norm(G.A, 2)) if G.n else 0.0
    has_origin_pole = G.n > 0 and bool(
        np.any(np.abs(np.linalg.eigvals(G.A)) <= ztol))

    if not has_origin_pole:
        G0 = eval_tf(G, 0.0).real
        conds = _Conditions(opts.boundary_band)
        eigs = np.linalg.eigvals(G0 @ Gbar0)
        if np.max(np.abs(eigs.imag)) > 1e-7 * (1.0 + np.max(np.abs(eigs))):
            return _precondition_failed(
                "dc gain product has non-real eigenvalues; models are not NI/SNI consistent")
        conds.less_than_one("dc_gain_lambda_max", float(np.max(eigs.real)))
        verdict = _verdict_from(conds, Theorem.DC_GAIN, Branch.NONE, None)
        return _attach_oracle(verdict, G, Gbar, opts)

    if not G.strictly_proper():
        return _precondition_failed(
            "free-body analysis requires a strictly proper plant")

    L = laurent_coefficients(G)
    scale0 = 1.0 + np.linalg.norm(L.G0)
    g2_zero = np.linalg.norm(L.G2) <= opts.zero_coeff_rtol * scale0
    g1_zero = np.linalg.norm(L.G1) <= opts.zero_coeff_rtol * scale0

    if g2_zero and g1_zero:
        return _precondition_failed(
            "origin pole detected but both Laurent coefficients vanish "
            "(numerically inconsistent model)", laurent=L)

    if not g2_zero and g1_zero:
        verdict = _double_pole_no_friction(L, Gbar0, opts)
    elif not g2_zero:
        verdict = _double_pole_general(L, Gbar0, opts)
    else:
        verdict = _single_pole(L, Gbar0, opts)
    return _attach_oracle(verdict, G, Gbar, opts)


def _attach_oracle(verdict: StabilityVerdict, G, Gbar, opts) -> StabilityVerdict:
    if opts.run_oracle and verdict.outcome in (Outcome.STABLE, Outcome.UNSTABLE):
        hurwitz = direct_stability(G, Gbar, opts.hurwitz_margin)
        verdict.oracle_agrees = bool(hurwitz == (verdict.outcome is Outcome.STABLE))
    return verdict


def _double_pole_no_friction(L, Gbar0, opts) -> StabilityVerdict:
    """G2 != 0, G1 = 0: definite, range-shortcut, or sign-split conditions."""
    J = full_rank_factor(L.G2).J
    g2_def = classify_definiteness(L.G2)
    conds = _Conditions(opts.boundary_band)

    if g2_def.is_pd:
        conds.strict_neg_definite("controller_dc_max_eig", Gbar0)
        return _verdict_from(conds, Theorem.FULL_RANK_FREE_BODY, Branch.INVERTIBLE, L)

    if nullspace_contained(L.G2, L.G0.T):
        conds.strict_neg_definite("j_gram_max_eig", J.T @ Gbar0 @ J)
        return _verdict_from(conds, Theorem.DOUBLE_POLE_RANGE,
                             Branch.NULLSPACE_SHORTCUT, L)

    inner = J.T @ Gbar0 @ J
    smin = np.linalg.svd(inner, compute_uv=False)[-1]
    if smin <= 1e-12 * max(1.0, np.linalg.norm(inner, 2)):
        return _precondition_failed("J' Gbar(0) J is singular", laurent=L,
                                    values={"j_gram_min_sv": float(smin)})
    N2 = projector_p(Gbar0, J)
    n2_def = classify_definiteness(N2)
    conds.strict_neg_definite("j_gram_max_eig", inner)

    if n2_def.kind.value == "zero" or n2_def.is_nsd:
        Ntil = psd_sqrt(-N2)
        conds.nonsingular("nsd_branch_min_sv",
                          np.eye(L.G0.shape[0]) + Ntil @ L.G0 @ Ntil)
        return _verdict_from(conds, Theorem.DOUBLE_POLE, Branch.NSD, L)
    if n2_def.is_psd:
        Nh = psd_sqrt(N2)
        conds.strict_pos_definite("psd_branch_min_eig",
                                  np.eye(L.G0.shape[0]) - Nh @ L.G0 @ Nh)
        return _verdict_from(conds, Theorem.DOUBLE_POLE, Branch.PSD, L)
    return StabilityVerdict(
        outcome=Outcome.INCONCLUSIVE, theorem_used=Theorem.DOUBLE_POLE,
        branch=Branch.NONE, condition_values=conds.values,
        reason=f"reduced controller gain is indefinite "
               f"(eigenvalues in [{n2_def.min_eig:.3e}, {n2_def.max_eig:.3e}])",
        laurent=L)


def _double_pole_general(L, Gbar0, opts) -> StabilityVerdict:
    """G2 != 0 and G1 != 0: Hankel subspace matrix F decides."""
    J = full_rank_factor(L.G2).J
    F = build_f_matrix(L)
    m = L.G0.shape[0]
    conds = _Conditions(opts.boundary_band)

    inner = F.T @ Gbar0 @ F
    if inner.size:
        smin = np.linalg.svd(inner, compute_uv=False)[-1]
        if smin <= 1e-12 * max(1.0, np.linalg.norm(inner, 2)):
            return _precondition_failed("F' Gbar(0) F is singular", laurent=L,
                                        values={"f_gram_min_sv": float(smin)})
    Nf = projector_p(Gbar0, F)
    nf_def = classify_definiteness(Nf)
    conds.strict_neg_definite("f_gram_max_eig", inner)

    JtJ = J.T @ J
    friction = L.G1 @ J @ np.linalg.solve(JtJ @ JtJ, J.T @ L.G1.T)

    if nf_def.kind.value == "zero" or nf_def.is_nsd:
        Ntil = psd_sqrt(-Nf)
        conds.nonsingular(
            "nsd_branch_min_sv",
            np.eye(m) + Ntil @ L.G0 @ Ntil + Ntil @ friction @ Ntil)
        return _verdict_from(conds, Theorem.DOUBLE_POLE_GENERAL, Branch.NSD, L)
    if nf_def.is_psd:
        Nh = psd_sqrt(Nf)
        conds.strict_pos_definite(
            "psd_branch_min_eig",
            np.eye(m) - Nh @ L.G0 @ Nh - Nh @ friction @ Nh)
        return _verdict_from(conds, Theorem.DOUBLE_POLE_GENERAL, Branch.PSD, L)
    return StabilityVerdict(
        outcome=Outcome.INCONCLUSIVE, theorem_used=Theorem.DOUBLE_POLE_GENERAL,
        branch=Branch.NONE, condition_values=conds.values,
        reason=f"reduced controller gain is indefinite "
               f"(eigenvalues in [{nf_def.min_eig:.3e}, {nf_def.max_eig:.3e}])",
        laurent=L)


def _single_pole(L, Gbar0, opts) -> StabilityVerdict:
    """G2 = 0, G1 != 0: thin SVD factor of G1 takes the role of F."""
    m = L.G0.shape[0]
    conds = _Conditions(opts.boundary_band)

    if numerical_rank(L.G1) == m:
        conds.strict_neg_definite("controller_dc_max_eig", Gbar0)
        return _verdict_from(conds, Theorem.FULL_RANK_FREE_BODY, Branch.INVERTIBLE, L)

    U, sv, _Vt = np.linalg.svd(L.G1)
    r = int(np.sum(sv > m * np.finfo(float).eps * sv[0]))
    F1 = U[:, :r] * sv[:r]

    if nullspace_contained(L.G1.T, L.G0.T):
        conds.strict_neg_definite("f1_gram_max_eig", F1.T @ Gbar0 @ F1)
        return _verdict_from(conds, Theorem.SINGLE_POLE_RANGE,
                             Branch.NULLSPACE_SHORTCUT, L)

    inner = F1.T @ Gbar0 @ F1
    smin = np.linalg.svd(inner, compute_uv=False)[-1]
    if smin <= 1e-12 * max(1.0, np.linalg.norm(inner, 2)):
        return _precondition_failed("F1' Gbar(0) F1 is singular", laurent=L,
                                    values={"f1_gram_min_sv": float(smin)})
    N1 = projector_p(Gbar0, F1)
    n1_def = classify_definiteness(N1)
    conds.strict_neg_definite("f1_gram_max_eig", inner)

    if n1_def.kind.value == "zero" or n1_def.is_nsd:
        Ntil = psd_sqrt(-N1)
        conds.nonsingular("nsd_branch_min_sv", np.eye(m) + Ntil @ L.G0 @ Ntil)
        return _verdict_from(conds, Theorem.SINGLE_POLE, Branch.NSD, L)
    if n1_def.is_psd:
        Nh = psd_sqrt(N1)
        conds.strict_pos_definite("psd_branch_min_eig",
                                  np.eye(m) - Nh @ L.G0 @ Nh)
        return _verdict_from(conds, Theorem.SINGLE_POLE, Branch.PSD, L)
    return StabilityVerdict(
        outcome=Outcome.INCONCLUSIVE, theorem_used=Theorem.SINGLE_POLE,
        branch=Branch.NONE, condition_values=conds.values,
        reason=f"reduced controller gain is indefinite "
               f"(eigenvalues in [{n1_def.min_eig:.3e}, {n1_def.max_eig:.3e}])",
        laurent=L)


def direct_stability(G: StateSpaceModel, Gbar: StateSpaceModel,
                     margin: float = 1e-8) -> bool:
    """Theorem-independent oracle: is the closed-loop state matrix Hurwitz."""
    return is_hurwitz(closed_loop(G, Gbar).Abreve, margin)


# --------------------------------------------------------------------------
# random model generation and Monte-Carlo agreement
# --------------------------------------------------------------------------

_FAMILIES = ("dc_gain", "double_pd", "double", "double_range",
             "mixed", "single", "single_inv", "single_range")


def _random_psd(rng, m: int, rank: int | None = None, scale: float = 1.0):
    r = rank if rank is not None else m
    W = rng.normal(size=(m, r))
    return scale * (W @ W.T) / max(r, 1)


def random_ni_plant(rng: np.random.Generator, family: str, m: int | None = None):
    """Random NI plant in modal form, structured to land in one dispatch family.

    The modal form sum of PSD coefficient terms plus PSD 1/s and 1/s^2 terms
    is NI by construction, so no rejection sampling is needed for the NI
    property itself; draws are only repeated (rarely) when the realized model
    sits too close to the minimality rank cutoff to analyze reliably.
    """
    for _ in range(50):
        model, mm = _draw_ni_plant(rng, family, m)
        if minimality_margin(model) > 50.0:
            return model, mm
    raise NistabError(f"could not draw a comfortably minimal {family!r} plant")


def _draw_ni_plant(rng: np.random.Generator, family: str, m: int | None = None):
    m = m if m is not None else int(rng.integers(1, 4))
    n_modes = int(rng.integers(1, 4))
    poles = np.sort(rng.uniform(0.5, 20.0, size=n_modes))
    # spread poles so the realization stays comfortably minimal
    poles += np.arange(n_modes) * 0.25

    g1 = g2 = None
    k = int(rng.integers(1, m + 1))
    J = rng.normal(size=(m, k))

    def modal_coeffs(inside=None):
        out = []
        for p in poles:
            if inside is None:
                C = _random_psd(rng, m, rank=int(rng.integers(1, m + 1)))
            else:
                r = inside.shape[1]
                C = inside @ _random_psd(rng, r) @ inside.T
            out.append((p, C))
        return out

    if family == "dc_gain":
        terms = modal_coeffs()
    elif family == "double_pd":
        g2 = _random_psd(rng, m) + 0.05 * np.eye(m)
        terms = modal_coeffs()
    elif family == "double":
        k = min(k, max(1, m - 1))
        J = J[:, :k]
        g2 = J @ J.T
        terms = modal_coeffs()
    elif family == "double_range":
        k = min(k, max(1, m - 1))
        J = J[:, :k]
        g2 = J @ J.T
        terms = modal_coeffs(inside=J)
    elif family == "mixed":
        g2 = J @ J.T
        g1 = _random_psd(rng, m, rank=int(rng.integers(1, m + 1)))
        terms = modal_coeffs()
    elif family == "single":
        r = min(int(rng.integers(1, m + 1)), max(1, m - 1))
        g1 = _random_psd(rng, m, rank=r)
        terms = modal_coeffs()
    elif family == "single_inv":
        g1 = _random_psd(rng, m) + 0.05 * np.eye(m)
        terms = modal_coeffs()
    elif family == "single_range":
        r = min(int(rng.integers(1, m + 1)), max(1, m - 1))
        W = rng.normal(size=(m, r))
        g1 = W @ W.T
        terms = modal_coeffs(inside=W)
    else:
        raise ValueError(f"unknown family {family!r}")
    mm = ModalModel(m=m, terms=tuple(terms), g1=g1, g2=g2,
                    meta={"family": family})
    return modal_to_ss(mm), mm


def random_sni_controller(rng: np.random.Generator, m: int):
    """Random IRC controller; SNI by construction for PD Gamma, Phi."""
    Gamma = _random_psd(rng, m) + 0.2 * np.eye(m)
    Phi = _random_psd(rng, m) + 0.2 * np.eye(m)
    mode = rng.integers(0, 3)
    base = _random_psd(rng, m)
    if mode == 0:        # Gbar(0) strongly negative definite
        Delta = np.linalg.inv(Phi) + base + 0.2 * np.eye(m)
    elif mode == 1:      # Gbar(0) positive definite
        Delta = -base - 0.2 * np.eye(m)
    else:                # sign-mixed
        S = rng.normal(size=(m, m))
        Delta = 0.5 * (S + S.T)
    return make_irc(Gamma, Phi, Delta)


@dataclass
class MonteCarloReport:
    count: int
    applicable: int
    agreements: int
    boundary: int
    inconclusive: int
    precondition_failed: int
    disagreements: list
    by_theorem: dict

    @property
    def agreement_fraction(self) -> float:
        return 1.0 if self.applicable == 0 else self.agreements / self.applicable

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "applicable": self.applicable,
            "agreements": self.agreements,
            "boundary": self.boundary,
            "inconclusive": self.inconclusive,
            "precondition_failed": self.precondition_failed,
            "agreement_fraction": self.agreement_fraction,
            "by_theorem": dict(self.by_theorem),
            "disagreements": [
                {"trial": t, "family": fam, "outcome": out} for (t, fam, out) in self.disagreements
            ],
        }


def montecarlo_agreement(count: int, seed: int = 0,
                         families: tuple = _FAMILIES,
                         opts: VerdictOptions | None = None) -> MonteCarloReport:
    """Check verdicts against the eigenvalue oracle on random NI/SNI pairs.

    Every decisive (STABLE/UNSTABLE) verdict must match
    :func:`direct_stability`; BOUNDARY and INCONCLUSIVE trials are tallied
    but excluded from the agreement fraction, as is any trial whose
    closed-loop spectral abscissa is itself inside the margin band.
    """
    opts = opts or VerdictOptions(skip_ni_check=True)
    rng = np.random.default_rng(seed)
    applicable = agreements = boundary = inconclusive = prefailed = 0
    disagreements: list = []
    by_theorem: dict[str, int] = {}

    for trial in range(count):
        family = families[trial % len(families)]
        trial_rng = np.random.default_rng(rng.integers(0, 2 ** 63))
        plant, mm = random_ni_plant(trial_rng, family)
        ctrl = random_sni_controller(trial_rng, plant.m)
        verdict = stability_verdict(plant, ctrl.realization, opts)

        if verdict.outcome is Outcome.BOUNDARY:
            boundary += 1
            continue
        if verdict.outcome is Outcome.INCONCLUSIVE:
            inconclusive += 1
            continue
        if verdict.outcome is Outcome.PRECONDITION_FAILED:
            prefailed += 1
            continue

        cl = closed_loop(plant, ctrl.realization)
        alpha = spectral_abscissa(cl.Abreve)
        if abs(alpha) <= 1e-7 * max(1.0, np.linalg.norm(cl.Abreve, 2)):
            boundary += 1          # oracle itself is marginal; not decidable
            continue
        applicable += 1
        key = f"{verdict.theorem_used.value}/{verdict.branch.value}"
        by_theorem[key] = by_theorem.get(key, 0) + 1
        if (alpha < 0.0) == (verdict.outcome is Outcome.STABLE):
            agreements += 1
        else:
            disagreements.append((trial, family, verdict.outcome.value))

    return MonteCarloReport(
        count=count, applicable=applicable, agreements=agreements,
        boundary=boundary, inconclusive=inconclusive,
        precondition_failed=prefailed, disagreements=disagreements,
        by_theorem=by_theorem,
    )

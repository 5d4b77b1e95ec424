"""Separability of Gaussian states from their covariance matrix

A QCM V on A|B is separable iff some real γ_A satisfies

    iΩ_A ⪯ γ_A ⪯ N = V_A − X (V_B − iΩ_B)⁻¹ Xᵀ,

and then γ_B = V_B − Xᵀ(V_A − γ_A)⁻¹X completes V ⪰ γ_A ⊕ γ_B. The
interval is solved exactly for one mode on A and by a projection engine
otherwise. All witnesses are mode-wise.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import List, Optional

import numpy as np
from scipy.linalg import block_diag

from gaussep.exceptions import ConditioningError, DomainError
from gaussep.matrix_analysis import HermitianMatrix
from gaussep.settings import resolve_solver, resolve_tolerances
from gaussep.symplectic import (
    ModeLayout, Ordering, QCM, is_ppt, is_qcm, omega, reorder, symplectic_spectrum,
    williamson
)
from gaussep.utils import min_eigenvalue, psd_part, realify, spectral_norm, symmetrize

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


class Verdict(str, Enum):
    SEPARABLE = "separable"
    ENTANGLED = "entangled"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class MatrixInterval:
    """Hermitian bounds M ⪯ · ⪯ N for a real symmetric unknown"""
    lower: HermitianMatrix
    upper: HermitianMatrix

    def __post_init__(self):
        lower = HermitianMatrix.coerce(self.lower)
        upper = HermitianMatrix.coerce(self.upper)
        if lower.dim != upper.dim:
            raise DomainError("Interval bounds differ in size")
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @property
    def dim(self):
        return self.lower.dim

    def scale(self):
        return max(1.0, self.lower.norm(), self.upper.norm())

    def margin(self, gamma):
        """min(λmin(γ − M), λmin(N − γ))"""
        gamma = HermitianMatrix(gamma)
        return min((gamma - self.lower).min_eigenvalue(), (self.upper - gamma).min_eigenvalue())

    def contains(self, gamma, atol):
        return self.margin(gamma) >= -atol


@dataclass(eq=False)
class DualCertificate:
    """PSD pair (Y, Z) on the realified space proving that no real γ in
    the structure subspace has L ⪯ γ ⪯ U at the given level"""
    level: float
    gap: float
    Y: np.ndarray
    Z: np.ndarray
    group_sizes: List[int]

    def to_json(self):
        return {
            'level': self.level,
            'gap': self.gap,
            'Y': self.Y.tolist(),
            'Z': self.Z.tolist(),
            'group_sizes': list(self.group_sizes),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            float(data['level']), float(data['gap']),
            np.asarray(data['Y'], dtype=float), np.asarray(data['Z'], dtype=float),
            [int(g) for g in data['group_sizes']],
        )


@dataclass(eq=False)
class SeparabilityCert:
    verdict: Verdict
    method: str
    layout: ModeLayout
    group_sizes: List[int]
    gammas: List[np.ndarray] = field(default_factory=list)
    pt_min_symplectic_eigenvalue: Optional[float] = None
    pt_modes: Optional[List[int]] = None
    margin: Optional[float] = None
    dual: Optional[DualCertificate] = None
    epsilon: float = 0.0
    notes: List[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def separable(self):
        return self.verdict == Verdict.SEPARABLE

    @property
    def entangled(self):
        return self.verdict == Verdict.ENTANGLED

    @property
    def distillable(self):
        return self.entangled and self.dual is None

    @property
    def gamma_a(self):
        if not self.gammas:
            return None
        return block_diag(*self.gammas[:-1])

    @property
    def gamma_b(self):
        return self.gammas[-1] if self.gammas else None

    @property
    def witness_kind(self):
        if self.separable:
            return "marginals"
        if self.entangled:
            return "dual" if self.dual is not None else "ppt_violation"
        return "margin"


@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    reasons: List[str]
    gap: Optional[float] = None


def as_modewise(V):
    if not isinstance(V, QCM):
        raise DomainError("Expected a QCM")
    return reorder(V, Ordering.MODEWISE)


def _require_valid(V, tol):
    validity = is_qcm(V, tol=tol)
    if not validity.valid:
        raise DomainError(
            f"Input is not a valid QCM (minimum eigenvalue of V + iΩ {validity.min_eigenvalue:.6g})"
        )


def upper_bound(V, epsilon=0.0, conjugate=False, tol=None):
    """N = V_A − X(V_B + εI − iΩ_B)⁻¹Xᵀ; with conjugate=True the +iΩ_B version,
    which is the complex conjugate of N"""
    tol = resolve_tolerances(tol)
    if epsilon < 0:
        raise DomainError("Regularization epsilon must be non-negative")
    V = as_modewise(V)
    layout = V.layout
    if layout.m < 1 or layout.n < 1:
        raise DomainError("upper_bound needs two non-empty parties")
    v_a, v_b, x = V.v_a, V.v_b, V.x
    if not np.any(x):
        return HermitianMatrix(v_a)

    sign = 1.0 if conjugate else -1.0
    block = HermitianMatrix(v_b + epsilon * np.eye(len(v_b)), sign * omega(layout.n))
    w, u = np.linalg.eigh(block.realified)
    threshold = tol.psd * max(V.norm(), _TINY)
    if epsilon == 0 and w[0] < threshold:
        raise ConditioningError(
            f"V_B − iΩ_B is singular within tolerance (minimum eigenvalue {w[0]:.3g});"
            " retry with epsilon > 0",
            min_eigenvalue=float(w[0]), threshold=threshold,
        )
    if epsilon > 0 and w[0] < 0.5 * epsilon:
        raise ConditioningError(
            f"V_B + εI − iΩ_B is not positive (minimum eigenvalue {w[0]:.3g}, ε = {epsilon:.3g});"
            " retry with a larger epsilon",
            min_eigenvalue=float(w[0]), threshold=0.5 * epsilon,
        )
    inverse = HermitianMatrix.from_realified((u / w) @ u.T)
    return HermitianMatrix(v_a - x @ inverse.re @ x.T, -(x @ inverse.im @ x.T))


def upper_bound_with_retry(V, config=None, conjugate=False, tol=None):
    """upper_bound at the configured ε, then at τ_psd·‖V‖ and ×10 per retry

    Returns (N, ε used).
    """
    tol = resolve_tolerances(tol)
    config = resolve_solver(config)
    first = tol.psd * max(V.norm(), _TINY)
    attempts = [config.epsilon] + [
        max(config.epsilon, first) * 10 ** i for i in range(config.epsilon_retries + 1)
    ]
    for epsilon in attempts:
        try:
            return upper_bound(V, epsilon, conjugate=conjugate, tol=tol), epsilon
        except ConditioningError as error:
            logger.debug("upper_bound at epsilon=%.3g failed: %s", epsilon, error)
            last = error
    raise last


@dataclass(frozen=True, eq=False)
class IntervalFeasibility:
    feasible: bool
    R: Optional[np.ndarray]
    lowest: float
    lowest_conjugate: float


def interval_feasibility_2x2(M, N, tol=None):
    """Real symmetric R with M ⪯ R ⪯ N exists iff M ⪯ N and M ⪯ N*

    The witness lies on the segment from M (or M*) to N (or N*), at the point
    where the imaginary off-diagonal entry vanishes.
    """
    tol = resolve_tolerances(tol)
    M = HermitianMatrix.coerce(M)
    N = HermitianMatrix.coerce(N)
    if M.dim != 2 or N.dim != 2:
        raise DomainError("interval_feasibility_2x2 needs 2×2 matrices")

    atol = tol.verdict * max(1.0, M.norm(), N.norm())
    lowest = (N - M).min_eigenvalue()
    lowest_conjugate = (N.conj() - M).min_eigenvalue()
    if lowest < -atol or lowest_conjugate < -atol:
        return IntervalFeasibility(False, None, lowest, lowest_conjugate)

    m12 = M.im[0, 1]
    n12 = N.im[0, 1]
    lower = M.conj() if m12 < 0 else M
    upper = N.conj() if n12 > 0 else N
    total = abs(m12) + abs(n12)
    p = 0.0 if total == 0 else abs(n12) / total
    R = symmetrize(p * lower.re + (1 - p) * upper.re)
    return IntervalFeasibility(True, R, lowest, lowest_conjugate)


def _embed_gammas(gammas):
    return block_diag(*gammas)


def recover_gamma_b(V, gamma_a, tol=None):
    """Schur-complement supremum V_B − Xᵀ(V_A − γ_A + εI)⁻¹X, floored to a QCM

    ε = max(τ_psd, τ_psd − λmin(V_A − γ_A)/‖V‖)·‖V‖ keeps the inverted block
    positive; symplectic eigenvalues below 1 are raised to 1.
    """
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    scale = max(V.norm(), _TINY)
    difference = symmetrize(V.v_a - gamma_a)
    epsilon = max(tol.psd * scale, tol.psd * scale - min_eigenvalue(difference))
    inner = np.linalg.inv(difference + epsilon * np.eye(len(difference)))
    gamma_b = symmetrize(V.v_b - V.x.T @ inner @ V.x)

    layout = ModeLayout(V.layout.n)
    try:
        nu = symplectic_spectrum(gamma_b, tol)
    except DomainError:
        logger.warning("Recovered γ_B is not positive definite")
        return gamma_b
    if nu[-1] >= 1:
        return gamma_b
    try:
        decomposition = williamson(QCM(gamma_b, layout), tol)
    except (ConditioningError, DomainError):
        logger.warning("Could not floor recovered γ_B (symplectic minimum %.6g)", nu[-1])
        return gamma_b
    logger.debug("Raising %d symplectic eigenvalue(s) of γ_B to 1", int(np.sum(nu < 1)))
    return decomposition.with_spectrum(np.maximum(decomposition.nu, 1.0))


def trivial_cert(V, method, tol):
    _require_valid(V, tol)
    return SeparabilityCert(
        Verdict.SEPARABLE, method, V.layout, [V.modes], gammas=[np.array(V.mat)],
        notes=["single party: trivially separable"]
    )


def entangled_by_ppt(V, ppt, group_sizes, method="ppt", pt_modes=None):
    return SeparabilityCert(
        Verdict.ENTANGLED, method, V.layout, group_sizes,
        pt_min_symplectic_eigenvalue=ppt.min_symplectic_eigenvalue, pt_modes=pt_modes,
    )


def finish_separable(V, gammas, method, group_sizes, tol, margin=None, epsilon=0.0,
                     pt_min=None, notes=None):
    """Assemble a separable certificate; downgrade to inconclusive if it fails validation"""
    cert = SeparabilityCert(
        Verdict.SEPARABLE, method, V.layout, group_sizes, gammas=gammas,
        pt_min_symplectic_eigenvalue=pt_min, margin=margin, epsilon=epsilon,
        notes=list(notes or []),
    )
    check = validate_certificate(V, cert, tol)
    if not check.ok:
        logger.info("Certificate from %s failed validation: %s", method, "; ".join(check.reasons))
        cert.verdict = Verdict.INCONCLUSIVE
        cert.notes.extend(check.reasons)
        cert.gammas = []
    return cert


def separability_1vn(V, tol=None, config=None):
    """Exact decision for one mode on one side: separable iff PPT"""
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    layout = V.layout
    if layout.m == 0 or layout.n == 0:
        return trivial_cert(V, "single_party", tol)
    if layout.m != 1:
        if layout.n == 1:
            swapped = separability_1vn(V.swap_parties(), tol, config)
            swapped.layout = layout
            swapped.group_sizes = [layout.m, layout.n]
            swapped.gammas = swapped.gammas[::-1]
            return swapped
        raise DomainError(f"separability_1vn needs m = 1 or n = 1, got {layout.m} vs {layout.n}")

    ppt = is_ppt(V, tol)
    if not ppt.ppt:
        return entangled_by_ppt(V, ppt, [layout.m, layout.n])

    N, epsilon = upper_bound_with_retry(V, config, conjugate=True, tol=tol)
    M = HermitianMatrix(np.zeros((2, 2)), omega(1))
    interval = interval_feasibility_2x2(M, N, tol)
    if not interval.feasible:
        return SeparabilityCert(
            Verdict.INCONCLUSIVE, "interval_2x2", layout, [1, layout.n],
            pt_min_symplectic_eigenvalue=ppt.min_symplectic_eigenvalue,
            margin=min(interval.lowest, interval.lowest_conjugate), epsilon=epsilon,
            notes=["PPT but the 2×2 interval test failed numerically"],
        )
    gamma_a = interval.R
    gamma_b = recover_gamma_b(V, gamma_a, tol)
    return finish_separable(
        V, [gamma_a, gamma_b], "interval_2x2", [1, layout.n], tol,
        margin=MatrixInterval(M, N).margin(gamma_a), epsilon=epsilon,
        pt_min=ppt.min_symplectic_eigenvalue,
    )


class IntervalStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNDECIDED = "undecided"


@dataclass(eq=False)
class IntervalResult:
    status: IntervalStatus
    gamma: Optional[np.ndarray]
    margin: float
    upper_margin: float
    dual: Optional[DualCertificate] = None
    levels: int = 0
    iterations: int = 0


class _IntervalEngine:
    """Bisection on t over Dykstra projections onto

        C1 = {G ⪰ L + tI},  C2 = {G ⪯ U − tI},  C3 = realified real symmetric
                                                  (block diagonal per group)

    in the realified space; L, U are the realified interval bounds.
    """

    def __init__(self, interval, group_sizes, config, tol):
        self.interval = interval
        self.config = config
        self.tol = tol
        self.d = interval.dim
        self.group_sizes = list(group_sizes)
        if 2 * sum(self.group_sizes) != self.d:
            raise DomainError(f"Groups {self.group_sizes} do not cover {self.d // 2} modes")
        self.mask = block_diag(*[np.ones((2 * g, 2 * g)) for g in self.group_sizes])
        self.lower = interval.lower.realified
        self.upper = interval.upper.realified
        self.scale = interval.scale()
        self.bound = np.sqrt(2 * self.d)
        self.iterations = 0

    def project(self, G):
        d = self.d
        s = self.mask * symmetrize((G[:d, :d] + G[d:, d:]) / 2)
        return realify(s)

    def margin(self, G):
        return min(min_eigenvalue(G - self.lower), min_eigenvalue(self.upper - G))

    def dual_gap(self, p1, p2, level):
        Y = psd_part(-p1)
        Z = psd_part(p2)
        total = np.linalg.norm(Y) + np.linalg.norm(Z)
        if total == 0:
            return None
        Y, Z = Y / total, Z / total
        lower = self.lower + level * np.eye(2 * self.d)
        upper = self.upper - level * np.eye(2 * self.d)
        radius = self.bound * max(spectral_norm(lower), spectral_norm(upper))
        gap = np.sum(Y * lower) - np.sum(Z * upper) - np.linalg.norm(self.project(Y - Z)) * radius
        if gap > self.tol.alg * radius:
            return DualCertificate(float(level), float(gap), Y, Z, self.group_sizes)
        return None

    def dykstra(self, start, level, target):
        """Returns (point or None, dual or None); point has margin ≥ target"""
        eye = np.eye(2 * self.d)
        lower = self.lower + level * eye
        upper = self.upper - level * eye
        x = start.copy()
        p1 = np.zeros_like(x)
        p2 = np.zeros_like(x)
        p3 = np.zeros_like(x)
        best = -np.inf
        best_at = 0
        check_every = self.config.certificate_check_every

        for iteration in range(1, self.config.max_iterations + 1):
            y = x + p1
            x1 = lower + psd_part(y - lower)
            p1 = y - x1
            y = x1 + p2
            x2 = upper - psd_part(upper - y)
            p2 = y - x2
            y = x2 + p3
            x = self.project(y)
            p3 = y - x
            self.iterations += 1

            if iteration <= 10 or iteration % 10 == 0:
                current = self.margin(x)
                if current >= target:
                    return x, None
                if current > best + 1e-3 * abs(level - target) + _TINY:
                    best, best_at = current, iteration
                elif iteration - best_at > self.config.stall_window:
                    logger.debug("Dykstra stalled at level %.3g after %d sweeps", level, iteration)
                    break
            if iteration % check_every == 0:
                dual = self.dual_gap(p1, p2, level)
                if dual is not None:
                    return None, dual
        return None, self.dual_gap(p1, p2, level)

    def candidates(self):
        re_upper = self.interval.upper.re
        yield self.mask * symmetrize(re_upper)
        yield self.mask * symmetrize(re_upper / 2)
        yield np.eye(self.d)

    def solve(self):
        tol = self.tol
        certify_level = -tol.verdict * self.scale
        upper_margin = min_eigenvalue(self.upper - self.lower) / 2

        best_gamma, lo = None, -np.inf
        for gamma in self.candidates():
            value = self.margin(realify(gamma))
            if value > lo:
                best_gamma, lo = gamma, value
        hi = upper_margin
        dual = None
        levels = 0

        if hi < certify_level:
            # N − M itself has a negative direction
            dual = self._spectral_dual(certify_level)

        while dual is None and levels < self.config.bisection_depth:
            if lo >= -0.1 * tol.verdict * self.scale or hi - lo <= 0.01 * tol.verdict * self.scale:
                break
            levels += 1
            level = (lo + hi) / 2
            target = min(0.0, (lo + level) / 2)
            point, level_dual = self.dykstra(realify(best_gamma), level, target)
            if point is not None:
                value = self.margin(point)
                if value > lo:
                    lo = value
                    best_gamma = point[:self.d, :self.d].copy()
                logger.debug("Level %.6g reached, margin %.6g", level, value)
                continue
            hi = level
            if level_dual is not None and level <= certify_level:
                dual = level_dual
            logger.debug("Level %.6g not reached", level)

        if dual is None and lo < certify_level and hi <= certify_level:
            _, dual = self.dykstra(realify(best_gamma), certify_level, np.inf)

        if lo >= certify_level:
            status = IntervalStatus.FEASIBLE
        elif dual is not None:
            status = IntervalStatus.INFEASIBLE
        else:
            status = IntervalStatus.UNDECIDED
        return IntervalResult(
            status, best_gamma, float(lo), float(upper_margin), dual, levels, self.iterations
        )

    def _spectral_dual(self, level):
        w, u = np.linalg.eigh(symmetrize(self.upper - self.lower))
        v = u[:, 0]
        Y = np.outer(v, v) / 2
        lower = self.lower + level * np.eye(2 * self.d)
        upper = self.upper - level * np.eye(2 * self.d)
        gap = np.sum(Y * lower) - np.sum(Y * upper)
        if gap > 0:
            return DualCertificate(float(level), float(gap), Y, Y.copy(), self.group_sizes)
        return None


def solve_interval(interval, group_sizes=None, config=None, tol=None):
    """Maximize t with γ − M ⪰ tI and N − γ ⪰ tI over real symmetric γ,
    block diagonal over group_sizes (in modes)"""
    tol = resolve_tolerances(tol)
    config = resolve_solver(config)
    if not isinstance(interval, MatrixInterval):
        raise DomainError("solve_interval expects a MatrixInterval")
    if group_sizes is None:
        group_sizes = [interval.dim // 2]
    return _IntervalEngine(interval, group_sizes, config, tol).solve()


def _engine_cert(V, a_groups, method, tol, config, pt_min):
    layout = V.layout
    N, epsilon = upper_bound_with_retry(V, config, tol=tol)
    M = HermitianMatrix(np.zeros((2 * layout.m, 2 * layout.m)), omega(layout.m))
    result = solve_interval(MatrixInterval(M, N), a_groups, config, tol)
    group_sizes = list(a_groups) + [layout.n]
    logger.debug(
        "Interval engine: %s, margin %.3g after %d levels / %d sweeps",
        result.status.value, result.margin, result.levels, result.iterations
    )

    if result.status == IntervalStatus.FEASIBLE:
        gamma_a = symmetrize(result.gamma)
        gamma_b = recover_gamma_b(V, gamma_a, tol)
        offsets = np.cumsum([0] + [2 * g for g in a_groups])
        gammas = [gamma_a[lo:hi, lo:hi].copy() for lo, hi in zip(offsets[:-1], offsets[1:])]
        return finish_separable(
            V, gammas + [gamma_b], method, group_sizes, tol,
            margin=result.margin, epsilon=epsilon, pt_min=pt_min,
        )
    if result.status == IntervalStatus.INFEASIBLE:
        return SeparabilityCert(
            Verdict.ENTANGLED, method, layout, group_sizes,
            pt_min_symplectic_eigenvalue=pt_min, margin=result.margin, dual=result.dual,
            epsilon=epsilon, notes=["PPT entangled candidate: certified by dual residual"],
        )
    return SeparabilityCert(
        Verdict.INCONCLUSIVE, method, layout, group_sizes,
        pt_min_symplectic_eigenvalue=pt_min, margin=result.margin, epsilon=epsilon,
        notes=[f"no decision after {result.levels} bisection levels"],
    )


def separability_general(V, config=None, tol=None):
    tol = resolve_tolerances(tol)
    config = resolve_solver(config)
    V = as_modewise(V)
    if V.layout.m == 0 or V.layout.n == 0:
        return trivial_cert(V, "single_party", tol)

    ppt = is_ppt(V, tol)
    if not ppt.ppt:
        return entangled_by_ppt(V, ppt, [V.layout.m, V.layout.n])
    return _engine_cert(V, [V.layout.m], "engine", tol, config, ppt.min_symplectic_eigenvalue)


def full_separability(V, groups, config=None, tol=None):
    """Separability into k groups of consecutive modes (sizes in `groups`)"""
    tol = resolve_tolerances(tol)
    config = resolve_solver(config)
    groups = [int(g) for g in groups]
    V = as_modewise(V)
    if len(groups) < 2 or min(groups) < 1:
        raise DomainError(f"Need at least two non-empty groups, got {groups}")
    if sum(groups) != V.modes:
        raise DomainError(f"Groups {groups} do not partition {V.modes} modes")

    V = V.regroup(sum(groups[:-1]))
    if len(groups) == 2:
        return separability_general(V, config, tol)

    _require_valid(V, tol)
    offsets = np.cumsum([0] + groups)
    lowest = np.inf
    for start, stop in zip(offsets[:-1], offsets[1:]):
        modes = list(range(start, stop))
        ppt = is_ppt(V, tol, modes=modes)
        lowest = min(lowest, ppt.min_symplectic_eigenvalue)
        if not ppt.ppt:
            return entangled_by_ppt(V, ppt, groups, method="ppt_cut", pt_modes=modes)
    return _engine_cert(V, groups[:-1], "engine", tol, config, float(lowest))


def validate_certificate(V, cert, tol=None):
    """Re-check a certificate against V with no help from the solver"""
    tol = resolve_tolerances(tol)
    reasons = []
    V = as_modewise(V)
    if sum(cert.group_sizes) != V.modes:
        return CertificateCheck(False, ["group sizes do not match the state"])
    scale = V.norm()

    if cert.verdict == Verdict.SEPARABLE:
        if len(cert.gammas) != len(cert.group_sizes):
            return CertificateCheck(False, ["one witness per group is required"])
        for index, (gamma, size) in enumerate(zip(cert.gammas, cert.group_sizes)):
            gamma = np.asarray(gamma, dtype=float)
            if gamma.shape != (2 * size, 2 * size):
                return CertificateCheck(False, [f"witness {index} has shape {gamma.shape}"])
            validity = is_qcm(symmetrize(gamma), ModeLayout(size), tol)
            if not validity.valid:
                reasons.append(
                    f"witness {index} is not a QCM (min eigenvalue {validity.min_eigenvalue:.3g})"
                )
        gap = min_eigenvalue(V.mat - _embed_gammas([symmetrize(g) for g in cert.gammas]))
        if gap < -tol.verdict * scale:
            reasons.append(f"V − ⊕γ has eigenvalue {gap:.3g}")
        return CertificateCheck(not reasons, reasons, gap)

    if cert.verdict == Verdict.ENTANGLED:
        if cert.dual is not None:
            return _validate_dual(V, cert, tol)
        layout = V.layout if cert.pt_modes else V.regroup(V.modes - cert.group_sizes[-1]).layout
        state = QCM(V.mat, layout)
        ppt = is_ppt(state, tol, modes=cert.pt_modes)
        if ppt.ppt:
            reasons.append("partial transpose is a valid QCM")
        reported = cert.pt_min_symplectic_eigenvalue
        if reported is None or reported >= 1 - tol.verdict:
            reasons.append("reported PT symplectic eigenvalue is not below 1")
        elif abs(reported - ppt.min_symplectic_eigenvalue) > tol.alg * max(1.0, scale):
            reasons.append("reported PT symplectic eigenvalue does not match")
        return CertificateCheck(not reasons, reasons, ppt.min_symplectic_eigenvalue)

    return CertificateCheck(True, [])


def _validate_dual(V, cert, tol):
    dual = cert.dual
    reasons = []
    if dual.level > 0:
        reasons.append("dual certificate level must not be positive")
    for name, mat in (('Y', dual.Y), ('Z', dual.Z)):
        if min_eigenvalue(mat) < -tol.alg * max(1.0, spectral_norm(mat)):
            reasons.append(f"{name} is not positive semidefinite")
    state = V.regroup(sum(dual.group_sizes))
    try:
        N = upper_bound(state, cert.epsilon, tol=tol)
    except ConditioningError as error:
        return CertificateCheck(False, [str(error)])
    m = state.layout.m
    interval = MatrixInterval(HermitianMatrix(np.zeros((2 * m, 2 * m)), omega(m)), N)
    engine = _IntervalEngine(interval, dual.group_sizes, resolve_solver(), tol)
    lower = engine.lower + dual.level * np.eye(4 * m)
    upper = engine.upper - dual.level * np.eye(4 * m)
    radius = engine.bound * max(spectral_norm(lower), spectral_norm(upper))
    gap = (np.sum(dual.Y * lower) - np.sum(dual.Z * upper)
           - np.linalg.norm(engine.project(dual.Y - dual.Z)) * radius)
    if gap <= 0:
        reasons.append(f"dual gap {gap:.3g} is not positive")
    return CertificateCheck(not reasons, reasons, float(gap))

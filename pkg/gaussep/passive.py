"""Passive (orthogonal-symplectic) transformations and absolute separability

A passive K acts on the annihilation operators a = (x + ip)/√2 as a ↦ U·a,
so in position-momentum ordering K = [[Re U, −Im U], [Im U, Re U]].
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import List, Optional

import numpy as np
import scipy.linalg

from gaussep.exceptions import DomainError
from gaussep.settings import resolve_tolerances, settings
from gaussep.symplectic import (
    ModeLayout, Ordering, QCM, is_ppt, is_qcm, reorder, symplectic_spectrum
)
from gaussep.utils import realify, spectral_norm, symmetrize, min_eigenvalue

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PassiveTransform:
    """U stored realified; K is mode-wise"""
    unitary_realified: np.ndarray
    K: np.ndarray

    @property
    def modes(self):
        return self.K.shape[0] // 2

    @property
    def U(self):
        n = self.modes
        return self.unitary_realified[:n, :n] + 1j * self.unitary_realified[n:, :n]

    @property
    def K_position_momentum(self):
        return self.unitary_realified

    def apply(self, V):
        return passive_congruence(V, self)


def passive_from_unitary(U, tol=None):
    tol = resolve_tolerances(tol)
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError(f"Unitary must be square, got shape {U.shape}")
    n = U.shape[0]
    deviation = float(np.linalg.norm(U @ U.conj().T - np.eye(n)))
    if deviation > tol.alg:
        raise DomainError(f"Matrix is not unitary (‖UU† − I‖_F = {deviation:.3g})")

    k_pm = realify(U.real, U.imag)
    perm = ModeLayout(n, 0, Ordering.POSITION_MOMENTUM).permutation_to(Ordering.MODEWISE)
    return PassiveTransform(k_pm, k_pm[np.ix_(perm, perm)])


def haar_unitary(seed, n):
    """Haar-distributed unitary: QR of a complex Gaussian matrix with the
    phases of R's diagonal moved into Q"""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = scipy.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_passive(seed, n):
    if n < 1:
        raise DomainError("A passive transform needs at least one mode")
    return passive_from_unitary(haar_unitary(seed, n))


def passive_congruence(V, K):
    """K V Kᵀ, keeping V's layout"""
    if isinstance(K, PassiveTransform):
        K = K.K
    mw = reorder(V, Ordering.MODEWISE)
    if K.shape != mw.mat.shape:
        raise DomainError(f"Transform of size {K.shape[0]} does not fit {V.modes} modes")
    return reorder(QCM(K @ mw.mat @ K.T, mw.layout), V.layout.ordering)


def sympl_vs_ordinary_check(A, tol=None):
    """Both sides of ν1(A)² ≥ λ1(A)·λ2(A), ν1 the smallest symplectic eigenvalue"""
    tol = resolve_tolerances(tol)
    nu = symplectic_spectrum(A, tol)
    mat = A.mat if isinstance(A, QCM) else np.asarray(A, dtype=float)
    lam = np.linalg.eigvalsh(symmetrize(mat))
    return float(nu[-1] ** 2), float(lam[0] * lam[1])


class AbsVerdict(str, Enum):
    ABSOLUTELY_SEPARABLE = "absolutely_separable"
    NOT_ABSOLUTE = "not_absolute"


@dataclass(eq=False)
class AbsSepCert:
    lambda1: float
    lambda2: float
    verdict: AbsVerdict
    layout: ModeLayout
    k: Optional[float] = None
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    p: Optional[float] = None
    gamma_a: Optional[np.ndarray] = None
    gamma_b: Optional[np.ndarray] = None
    identity_residual: float = 0.0
    min_gap: Optional[float] = None

    @property
    def product(self):
        return self.lambda1 * self.lambda2

    @property
    def absolutely_separable(self):
        return self.verdict == AbsVerdict.ABSOLUTELY_SEPARABLE

    @property
    def gammas(self):
        if self.gamma_a is None:
            return []
        return [self.gamma_a, self.gamma_b]


def _unit_or_first(vec):
    norm = np.linalg.norm(vec)
    if norm > 0:
        return vec / norm
    unit = np.zeros_like(vec)
    unit[0] = 1.0
    return unit


def absolute_separability(V, tol=None):
    """Decide λ1λ2 ≥ 1 and build marginal witnesses γ_A, γ_B (mode-wise)"""
    tol = resolve_tolerances(tol)
    validity = is_qcm(V, tol=tol)
    if not validity.valid:
        raise DomainError(
            f"Input is not a valid QCM (minimum eigenvalue of V + iΩ {validity.min_eigenvalue:.6g})"
        )
    V = reorder(V, Ordering.MODEWISE)
    layout = V.layout
    if layout.m < 1 or layout.n < 1:
        raise DomainError("Absolute separability needs two non-empty parties")

    lam, vecs = np.linalg.eigh(V.mat)
    lambda1, lambda2 = float(lam[0]), float(lam[1])
    if lambda1 * lambda2 < 1 - tol.verdict:
        return AbsSepCert(lambda1, lambda2, AbsVerdict.NOT_ABSOLUTE, layout)

    a_idx = layout.party_indices('A')
    b_idx = layout.party_indices('B')
    cert = AbsSepCert(lambda1, lambda2, AbsVerdict.ABSOLUTELY_SEPARABLE, layout)

    if lambda1 >= 1:
        cert.gamma_a = np.eye(len(a_idx))
        cert.gamma_b = np.eye(len(b_idx))
    else:
        k = lambda1
        x = vecs[:, 0]
        p = float(np.clip(x[a_idx] @ x[a_idx], 0.0, 1.0))
        y = _unit_or_first(x[a_idx])
        z = _unit_or_first(x[b_idx])
        cert.k, cert.x, cert.y, cert.z, cert.p = k, x, y, z, p
        cert.gamma_a = symmetrize(k * np.outer(y, y) + (np.eye(len(y)) - np.outer(y, y)) / k)
        cert.gamma_b = symmetrize(k * np.outer(z, z) + (np.eye(len(z)) - np.outer(z, z)) / k)
        cert.identity_residual = identity_residual(
            layout, k, x, y, z, cert.gamma_a, cert.gamma_b
        )
        if min_eigenvalue(V.mat - _k_floor(k, x)) < -tol.verdict * spectral_norm(V.mat):
            logger.warning("V does not dominate k·xxᵀ + (1/k)(1 − xxᵀ)")

    cert.min_gap = min_eigenvalue(V.mat - _embed(layout, cert.gamma_a, cert.gamma_b))
    return cert


def _k_floor(k, x):
    return k * np.outer(x, x) + (np.eye(len(x)) - np.outer(x, x)) / k


def identity_residual(layout, k, x, y, z, gamma_a, gamma_b):
    """‖k·xxᵀ + (1 − xxᵀ)/k − γ_A⊕γ_B − (1/k − k)·wwᵀ‖, w = √(1−p)·y ⊕ −√p·z"""
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    a_idx = layout.party_indices('A')
    b_idx = layout.party_indices('B')
    if x.shape != (layout.dim,) or y.shape != (len(a_idx),) or z.shape != (len(b_idx),):
        raise DomainError("k-certificate vectors do not match the layout")
    p = float(np.clip(x[a_idx] @ x[a_idx], 0.0, 1.0))
    w = np.zeros(layout.dim)
    w[a_idx] = np.sqrt(1 - p) * y
    w[b_idx] = -np.sqrt(p) * z
    difference = _k_floor(k, x) - _embed(layout, gamma_a, gamma_b)
    return float(np.linalg.norm(difference - (1 / k - k) * np.outer(w, w)))


def _embed(layout, gamma_a, gamma_b):
    full = np.zeros((layout.dim, layout.dim))
    a_idx = layout.party_indices('A')
    b_idx = layout.party_indices('B')
    full[np.ix_(a_idx, a_idx)] = gamma_a
    full[np.ix_(b_idx, b_idx)] = gamma_b
    return full


def abs_cert_is_valid(V, cert, tol=None):
    """Independent re-check of an absolutely separable certificate"""
    tol = resolve_tolerances(tol)
    if not cert.absolutely_separable:
        return False
    V = reorder(V, Ordering.MODEWISE)
    layout = V.layout
    if not is_qcm(cert.gamma_a, ModeLayout(layout.m), tol).valid:
        return False
    if not is_qcm(cert.gamma_b, ModeLayout(layout.n), tol).valid:
        return False
    if cert.k is not None:
        if cert.x is None or cert.y is None or cert.z is None:
            return False
        try:
            residual = identity_residual(
                layout, cert.k, cert.x, cert.y, cert.z, cert.gamma_a, cert.gamma_b
            )
        except DomainError:
            return False
        if residual > tol.alg * max(1.0, 1 / cert.k):
            return False
    gap = min_eigenvalue(V.mat - _embed(layout, cert.gamma_a, cert.gamma_b))
    return gap >= -tol.verdict * spectral_norm(V.mat)


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    ppt: bool
    min_pt_symplectic_eigenvalue: float
    verdict: AbsVerdict
    certified: bool


@dataclass
class OrbitReport:
    trials: int
    seed: Optional[int]
    verdict: AbsVerdict
    product: float
    min_pt_symplectic_eigenvalue: float = float('inf')
    non_ppt_trials: List[int] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def entangling_trial(self):
        """First sampled transform that made the state non-PPT, if any"""
        return self.non_ppt_trials[0] if self.non_ppt_trials else None

    def to_json(self):
        return {
            'trials': self.trials,
            'seed': self.seed,
            'verdict': self.verdict.value,
            'lambda_product': self.product,
            'min_pt_symplectic_eigenvalue': self.min_pt_symplectic_eigenvalue,
            'non_ppt_trials': self.non_ppt_trials,
            'violations': self.violations,
        }


def passive_orbit_check(V, trials=None, seed=None, workers=None, tol=None):
    """Sample random passive K and look at K V Kᵀ

    Absolutely separable inputs must stay PPT and certified on every sample;
    for the others the search for an entangling K is best effort and
    "none found" is only reported.
    """
    tol = resolve_tolerances(tol)
    if trials is None:
        trials = settings['orbit']['trials']
    if seed is None:
        seed = settings['orbit']['seed']
    if workers is None:
        workers = settings['orbit']['workers']

    base = absolute_separability(V, tol)
    children = np.random.SeedSequence(seed).spawn(trials)

    def run_trial(index):
        transform = random_passive(children[index], V.modes)
        moved = passive_congruence(V, transform)
        ppt = is_ppt(moved, tol)
        cert = absolute_separability(moved, tol)
        certified = cert.absolutely_separable and abs_cert_is_valid(moved, cert, tol)
        return TrialOutcome(index, ppt.ppt, ppt.min_symplectic_eigenvalue, cert.verdict, certified)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run_trial, range(trials)))
    else:
        outcomes = [run_trial(index) for index in range(trials)]

    report = OrbitReport(trials, seed, base.verdict, base.product)
    for outcome in outcomes:
        report.min_pt_symplectic_eigenvalue = min(
            report.min_pt_symplectic_eigenvalue, outcome.min_pt_symplectic_eigenvalue
        )
        if not outcome.ppt:
            report.non_ppt_trials.append(outcome.index)
        if outcome.verdict != base.verdict:
            report.violations.append(f"trial {outcome.index}: verdict changed to {outcome.verdict.value}")
        if base.absolutely_separable:
            if not outcome.ppt:
                report.violations.append(f"trial {outcome.index}: not PPT")
            if not outcome.certified:
                report.violations.append(f"trial {outcome.index}: certificate failed")

    if not base.absolutely_separable and not report.non_ppt_trials:
        logger.info("No entangling passive transform found in %d trials", trials)
    return report

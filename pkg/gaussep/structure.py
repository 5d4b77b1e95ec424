"""Structure-exploiting separability routes

- PT-invariant states are separable, with γ_A read off the upper bound.
- Mono-symmetric states localize onto a 1 vs n problem plus uncorrelated
  single-mode spectators.
- Isotropic states (degenerate symplectic spectrum) get their witnesses
  from geometric means of the blocks of the rescaled pure QCM.
"""
from dataclasses import dataclass
from itertools import permutations
import logging
from typing import List

import numpy as np
from scipy.linalg import block_diag

from gaussep.exceptions import DomainError
from gaussep.matrix_analysis import geometric_mean, spd_inv
from gaussep.separability import (
    as_modewise, entangled_by_ppt, finish_separable, recover_gamma_b, separability_1vn,
    separability_general, trivial_cert, upper_bound_with_retry
)
from gaussep.settings import resolve_tolerances, settings
from gaussep.symplectic import (
    ModeLayout, Ordering, PartialTransposeMask, QCM, TMSVParams, is_ppt, omega, reorder,
    symplectic_spectrum
)
from gaussep.utils import min_eigenvalue, symmetrize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PTInvariance:
    invariant: bool
    deviation: float

    def __bool__(self):
        return self.invariant


def _theta_b(layout):
    return PartialTransposeMask.for_modes(ModeLayout(0, layout.n)).theta


def is_pt_invariant(V, tol=None):
    """X = XΘ_B and V_B = Θ_B V_B Θ_B"""
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    if V.layout.n < 1:
        raise DomainError("PT invariance needs n >= 1")
    theta = _theta_b(V.layout)
    deviation = max(
        np.linalg.norm(V.x - V.x * theta[None, :]),
        np.linalg.norm(V.v_b - theta[:, None] * V.v_b * theta[None, :]),
    )
    return PTInvariance(bool(deviation <= tol.alg * V.norm()), float(deviation))


def separability_pt_invariant(V, tol=None, config=None):
    """γ_A = V_A − X(V_B − iΩ_B)⁻¹Xᵀ, which is real for PT-invariant V"""
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    invariance = is_pt_invariant(V, tol)
    if not invariance:
        raise DomainError(f"State is not invariant under partial transposition "
                          f"(deviation {invariance.deviation:.3g})")
    N, epsilon = upper_bound_with_retry(V, config, tol=tol)
    residue = N.imag_norm()
    if residue > tol.alg * V.norm():
        logger.warning("Upper bound of a PT-invariant state has imaginary part %.3g", residue)
    gamma_a = N.re
    gamma_b = recover_gamma_b(V, gamma_a, tol)
    cert = finish_separable(
        V, [gamma_a, gamma_b], "pt_invariant", [V.layout.m, V.layout.n], tol,
        epsilon=epsilon, notes=[f"imaginary residue {residue:.3g}"],
    )
    cert.details['imaginary_residue'] = residue
    return cert


def pt_average(V):
    """(V + V^{T_B})/2; PT-invariant, and a QCM whenever V is PPT"""
    V = as_modewise(V)
    mask = PartialTransposeMask.for_modes(V.layout)
    return QCM((V.mat + mask.apply(V).mat) / 2, V.layout)


@dataclass(eq=False)
class MonoSymmetricBlocks:
    """V_A has α on the diagonal and ε off it; X has the same κ_j in every row"""
    alpha: np.ndarray
    eps: np.ndarray
    kappas: List[np.ndarray]
    detected: bool
    deviation: float
    m: int

    def assemble(self):
        """(V_A, X) rebuilt from the averaged blocks"""
        m = self.m
        v_a = np.kron(np.eye(m), self.alpha - self.eps) + np.kron(np.ones((m, m)), self.eps)
        x = np.kron(np.ones((m, 1)), np.hstack(self.kappas)) if self.kappas else np.zeros((2 * m, 0))
        return v_a, x


def _blocks(mat, rows, cols):
    return mat.reshape(rows, 2, cols, 2).transpose(0, 2, 1, 3)


def detect_mono_symmetry(V, tol=None):
    if tol is None:
        tol = settings['structure']['mono_symmetry_tol']
    V = as_modewise(V)
    m, n = V.layout.m, V.layout.n
    if m < 2:
        raise DomainError("Mono-symmetry needs m >= 2")

    va = _blocks(V.v_a, m, m)
    x = _blocks(V.x, m, n)
    diagonal = np.array([va[i, i] for i in range(m)])
    off = np.array([va[i, j] for i in range(m) for j in range(m) if i != j])
    alpha = symmetrize(diagonal.mean(axis=0))
    eps = symmetrize(off.mean(axis=0))
    kappas = [x[:, j].mean(axis=0) for j in range(n)]

    deviation = max(
        max(np.linalg.norm(block - alpha) for block in diagonal),
        max(np.linalg.norm(block - eps) for block in off),
        max((np.linalg.norm(x[i, j] - kappas[j]) for i in range(m) for j in range(n)), default=0.0),
    )
    detected = bool(deviation <= tol * V.norm())
    return MonoSymmetricBlocks(alpha, eps, kappas, detected, float(deviation), m)


def householder_plus(m):
    """Orthogonal symmetric O with O|+⟩ = |1⟩, |+⟩ = (1, ..., 1)/√m"""
    plus = np.ones(m) / np.sqrt(m)
    u = plus - np.eye(m)[0]
    norm2 = u @ u
    if norm2 == 0:
        return np.eye(m)
    return np.eye(m) - 2 * np.outer(u, u) / norm2


@dataclass(eq=False)
class LocalizationResult:
    S_A: np.ndarray
    reduced: QCM
    spectators: List[np.ndarray]
    residual: float
    transformed: np.ndarray

    def lift(self, gamma_a1):
        """γ_A on the original modes from the witness of the localized mode"""
        inner = block_diag(gamma_a1, *self.spectators)
        return symmetrize(self.S_A.T @ inner @ self.S_A)


def localize(V, blocks, party='A'):
    """Congruence by O⊗1₂ on one party, splitting off the other m − 1 modes
    as uncorrelated spectators

    With party='B' the state is swapped first, so blocks must come from
    V.swap_parties() and the result lists the localized party first.
    """
    V = as_modewise(V)
    if party == 'B':
        V = V.swap_parties()
    if not blocks.detected:
        raise DomainError("State is not mono-symmetric on party A")
    layout = V.layout
    m, n = layout.m, layout.n
    s_a = np.kron(householder_plus(m), np.eye(2))
    full = block_diag(s_a, np.eye(2 * n))
    transformed = symmetrize(full @ V.mat @ full.T)

    keep = np.concatenate([np.arange(2), np.arange(2 * m, 2 * (m + n))])
    reduced = QCM(transformed[np.ix_(keep, keep)], ModeLayout(1, n))
    spectators = [symmetrize(transformed[2 * i:2 * i + 2, 2 * i:2 * i + 2]) for i in range(1, m)]

    rebuilt = np.zeros_like(transformed)
    rebuilt[np.ix_(keep, keep)] = reduced.mat
    for i, block in enumerate(spectators, start=1):
        rebuilt[2 * i:2 * i + 2, 2 * i:2 * i + 2] = block
    residual = float(np.linalg.norm(transformed - rebuilt))
    return LocalizationResult(s_a, reduced, spectators, residual, transformed)


def _is_bi_symmetric(V):
    if V.layout.n < 2:
        return False
    return detect_mono_symmetry(V.swap_parties()).detected


def separability_mono_symmetric(V, tol=None, config=None):
    """Localize and decide the 1 vs n problem; separable iff PPT"""
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    if V.layout.m == 0 or V.layout.n == 0:
        return trivial_cert(V, "single_party", tol)
    if V.layout.m == 1:
        return separability_1vn(V, tol, config)
    blocks = detect_mono_symmetry(V)
    if not blocks.detected:
        raise DomainError(f"State is not mono-symmetric (deviation {blocks.deviation:.3g})")

    group_sizes = [V.layout.m, V.layout.n]
    ppt = is_ppt(V, tol)
    if not ppt.ppt:
        return entangled_by_ppt(V, ppt, group_sizes, method="mono_symmetric")

    local = localize(V, blocks)
    reduced = local.reduced
    b_local = None
    if _is_bi_symmetric(V):
        swapped = reduced.swap_parties()
        b_local = localize(swapped, detect_mono_symmetry(swapped))
        inner = separability_1vn(b_local.reduced, tol, config)
        if inner.separable:
            gamma_b1, gamma_a1 = inner.gammas
            gamma_b = b_local.lift(gamma_b1)
    else:
        inner = separability_1vn(reduced, tol, config)
        if inner.separable:
            gamma_a1, gamma_b = inner.gammas

    if not inner.separable:
        inner.layout = V.layout
        inner.group_sizes = group_sizes
        inner.gammas = []
        inner.method = "mono_symmetric"
        inner.notes.append("localized 1 vs n problem was not certified")
        return inner

    cert = finish_separable(
        V, [local.lift(gamma_a1), gamma_b], "mono_symmetric", group_sizes, tol,
        pt_min=ppt.min_symplectic_eigenvalue, epsilon=inner.epsilon,
        notes=["bi-symmetric"] if b_local is not None else None,
    )
    cert.details['localization_residual'] = local.residual
    return cert


@dataclass(frozen=True)
class Isotropy:
    isotropic: bool
    nu: float
    spread: float

    def __bool__(self):
        return self.isotropic


def is_isotropic(V, tol=None):
    if tol is None:
        tol = settings['structure']['isotropy_tol']
    nu = symplectic_spectrum(V)
    mean = float(np.mean(nu))
    spread = float(np.max(np.abs(nu - mean)))
    return Isotropy(spread <= tol * mean, mean, spread)


@dataclass(eq=False)
class IsotropicCert:
    nu: float
    g: float
    P: np.ndarray
    Q: np.ndarray
    gamma_a: np.ndarray
    gamma_b: np.ndarray


def _local_pure_mean(block, modes):
    """P#(Ω P⁻¹ Ωᵀ) in local position-momentum ordering, returned mode-wise"""
    layout = ModeLayout(modes, 0, Ordering.POSITION_MOMENTUM)
    om = omega(layout)
    gamma = geometric_mean(block, om @ spd_inv(block) @ om.T)
    perm = layout.permutation_to(Ordering.MODEWISE)
    return gamma[np.ix_(perm, perm)]


def isotropic_witness(V, tol=None):
    """Blocks of the pure QCM gV = V/ν and the geometric-mean marginals"""
    tol = resolve_tolerances(tol)
    iso = is_isotropic(V)
    g = 1 / iso.nu
    scaled = reorder(QCM(g * as_modewise(V).mat, as_modewise(V).layout), Ordering.POSITION_MOMENTUM)
    P = scaled.v_a
    Q = scaled.v_b
    return IsotropicCert(
        iso.nu, g, P, Q,
        _local_pure_mean(P, V.layout.m), _local_pure_mean(Q, V.layout.n),
    )


def separability_isotropic(V, tol=None, config=None):
    tol = resolve_tolerances(tol)
    V = as_modewise(V)
    iso = is_isotropic(V)
    if not iso:
        raise DomainError(f"State is not isotropic (spread {iso.spread:.3g})")
    if V.layout.m == 0 or V.layout.n == 0:
        return trivial_cert(V, "single_party", tol)

    group_sizes = [V.layout.m, V.layout.n]
    ppt = is_ppt(V, tol)
    if not ppt.ppt:
        return entangled_by_ppt(V, ppt, group_sizes, method="isotropic")

    scaled = V.mat / iso.nu
    if not is_pure_by_inverse(QCM(scaled, V.layout), tol):
        logger.warning("Rescaled isotropic state is not pure, using the general engine")
        return separability_general(V, config, tol)

    witness = isotropic_witness(V, tol)
    cert = finish_separable(
        V, [witness.gamma_a, witness.gamma_b], "isotropic", group_sizes, tol,
        pt_min=ppt.min_symplectic_eigenvalue,
    )
    cert.details['nu'] = iso.nu
    return cert


def is_pure_by_inverse(V, tol=None):
    """V = ΩV⁻¹Ωᵀ"""
    tol = resolve_tolerances(tol)
    om = omega(V.layout)
    residual = np.linalg.norm(V.mat - om @ spd_inv(V.mat, tol) @ om.T)
    return bool(residual <= tol.alg * V.norm())


def purify(A, layout=None):
    """A#(ΩA⁻¹Ωᵀ): a pure QCM for every A > 0"""
    if isinstance(A, QCM):
        layout, A = A.layout, A.mat
    if layout is None:
        layout = ModeLayout(len(A) // 2)
    om = omega(layout)
    return geometric_mean(A, om @ spd_inv(A) @ om.T)


def heisenberg_gap(V, layout=None):
    """min eig(V − V#(ΩᵀV⁻¹Ω)); non-negative exactly for valid QCMs"""
    if isinstance(V, QCM):
        layout, V = V.layout, V.mat
    if layout is None:
        layout = ModeLayout(len(V) // 2)
    om = omega(layout)
    return min_eigenvalue(V - geometric_mean(V, om.T @ spd_inv(V) @ om))


def pure_normal_form(rs, extra_b=0, extra_a=0):
    """⊕_j tmsv(r_j) with A_j paired to B_j, padded with vacua"""
    pairs = len(rs)
    m, n = pairs + extra_a, pairs + extra_b
    layout = ModeLayout(m, n)
    mat = np.eye(layout.dim)
    zeta = np.diag([1.0, -1.0])
    for j, r in enumerate(rs):
        params = TMSVParams(r)
        a = slice(2 * j, 2 * j + 2)
        b = slice(2 * (m + j), 2 * (m + j) + 2)
        mat[a, a] = params.c * np.eye(2)
        mat[b, b] = params.c * np.eye(2)
        mat[a, b] = params.s * zeta
        mat[b, a] = params.s * zeta
    return QCM(mat, layout)


def marginal_symplectic_spectra(V):
    V = as_modewise(V)
    return symplectic_spectrum(V.party('A')), symplectic_spectrum(V.party('B'))


def symmetrize_modes(V, party='A'):
    """Average of V over every permutation of one party's modes"""
    V = as_modewise(V)
    if party == 'B':
        return symmetrize_modes(V.swap_parties(), 'A').swap_parties()
    m = V.layout.m
    total = np.zeros_like(V.mat)
    count = 0
    for order in permutations(range(m)):
        modes = list(order) + list(range(m, V.modes))
        idx = np.array([i for j in modes for i in (2 * j, 2 * j + 1)])
        total += V.mat[np.ix_(idx, idx)]
        count += 1
    return QCM(total / count, V.layout)

"""Canonical-operator bookkeeping, symplectic forms, QCM validity, Williamson
decomposition, partial transposition and state constructors

Mode-wise ordering (x1, p1, x2, p2, ...) is canonical. The position-momentum
ordering (x1, ..., xk, p1, ..., pk) is global over all k = m + n modes, so a
party block taken from it is again in (local) position-momentum ordering.
"""
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np
from scipy.linalg import block_diag

from gaussep.exceptions import ConditioningError, DomainError
from gaussep.settings import resolve_tolerances, settings
from gaussep.utils import antisymmetrize, realify, spectral_norm, symmetrize

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


class Ordering(str, Enum):
    MODEWISE = "modewise"
    POSITION_MOMENTUM = "position_momentum"


@dataclass(frozen=True)
class ModeLayout:
    m: int
    n: int = 0
    ordering: Ordering = Ordering.MODEWISE

    def __post_init__(self):
        object.__setattr__(self, 'ordering', Ordering(self.ordering))
        if self.m < 0 or self.n < 0:
            raise DomainError(f"Mode counts must be non-negative, got m={self.m}, n={self.n}")
        if self.m + self.n < 1:
            raise DomainError("A layout needs at least one mode")

    @property
    def modes(self):
        return self.m + self.n

    @property
    def dim(self):
        return 2 * self.modes

    def x_index(self, mode):
        if self.ordering == Ordering.MODEWISE:
            return 2 * mode
        return mode

    def p_index(self, mode):
        if self.ordering == Ordering.MODEWISE:
            return 2 * mode + 1
        return self.modes + mode

    def mode_indices(self, modes):
        """Coordinate indices of a set of modes, in this layout's ordering"""
        modes = sorted(modes)
        if self.ordering == Ordering.MODEWISE:
            return np.array([i for j in modes for i in (2 * j, 2 * j + 1)], dtype=int)
        return np.array(
            [self.x_index(j) for j in modes] + [self.p_index(j) for j in modes],
            dtype=int
        )

    def party_modes(self, party):
        if party == 'A':
            return range(self.m)
        if party == 'B':
            return range(self.m, self.modes)
        raise DomainError(f"Unknown party '{party}', expected 'A' or 'B'")

    def party_indices(self, party):
        return self.mode_indices(self.party_modes(party))

    def party_layout(self, party):
        count = self.m if party == 'A' else self.n
        return ModeLayout(count, 0, self.ordering)

    def with_ordering(self, ordering):
        return ModeLayout(self.m, self.n, ordering)

    def regroup(self, m):
        """Same modes with the first m assigned to party A"""
        return ModeLayout(m, self.modes - m, self.ordering)

    def permutation_to(self, ordering):
        """Index array perm with V_target = V[perm][:, perm]"""
        target = self.with_ordering(ordering)
        perm = np.empty(self.dim, dtype=int)
        for mode in range(self.modes):
            perm[target.x_index(mode)] = self.x_index(mode)
            perm[target.p_index(mode)] = self.p_index(mode)
        return perm

    def permutation_matrix(self, ordering):
        """P with V_target = P V Pᵀ"""
        perm = self.permutation_to(ordering)
        return np.eye(self.dim)[perm]

    def to_json(self):
        return {'m': self.m, 'n': self.n, 'ordering': self.ordering.value}


def omega(layout):
    """Symplectic form of the layout: Ω[x_j, p_j] = 1, Ω[p_j, x_j] = −1"""
    if isinstance(layout, int):
        layout = ModeLayout(layout)
    om = np.zeros((layout.dim, layout.dim))
    xs = [layout.x_index(j) for j in range(layout.modes)]
    ps = [layout.p_index(j) for j in range(layout.modes)]
    om[xs, ps] = 1.0
    om[ps, xs] = -1.0
    return om


def _check_positive(mat, tol, what="covariance matrix"):
    lowest = float(np.linalg.eigvalsh(mat)[0])
    if lowest <= tol.psd * max(spectral_norm(mat), _TINY):
        raise DomainError(
            f"{what} is not positive definite (minimum eigenvalue {lowest:.6g})"
        )


@dataclass(frozen=True, eq=False)
class QCM:
    """Real symmetric positive matrix with a mode partition A|B"""
    mat: np.ndarray
    layout: ModeLayout

    def __post_init__(self):
        mat = np.array(self.mat, dtype=float)
        if mat.shape != (self.layout.dim, self.layout.dim):
            raise DomainError(
                f"Matrix of shape {mat.shape} does not fit {self.layout.modes} modes"
            )
        if not np.all(np.isfinite(mat)):
            raise DomainError("Matrix contains non-finite entries")
        mat = symmetrize(mat)
        _check_positive(mat, settings.tolerances)
        mat.setflags(write=False)
        object.__setattr__(self, 'mat', mat)

    @property
    def dim(self):
        return self.layout.dim

    @property
    def modes(self):
        return self.layout.modes

    def norm(self):
        return spectral_norm(self.mat)

    def block(self, rows, cols):
        return self.mat[np.ix_(self.layout.party_indices(rows), self.layout.party_indices(cols))]

    @property
    def v_a(self):
        return self.block('A', 'A')

    @property
    def v_b(self):
        return self.block('B', 'B')

    @property
    def x(self):
        return self.block('A', 'B')

    def party(self, party):
        """Marginal QCM of one party"""
        return QCM(self.block(party, party), self.layout.party_layout(party))

    def in_ordering(self, ordering):
        return reorder(self, ordering)

    def mode_wise(self):
        return reorder(self, Ordering.MODEWISE)

    def regroup(self, m):
        return QCM(self.mat, self.layout.regroup(m))

    def swap_parties(self):
        """Same state with party B listed first"""
        layout = self.layout
        order = list(layout.party_modes('B')) + list(layout.party_modes('A'))
        perm = np.empty(layout.dim, dtype=int)
        for new, old in enumerate(order):
            perm[layout.x_index(new)] = layout.x_index(old)
            perm[layout.p_index(new)] = layout.p_index(old)
        return QCM(self.mat[np.ix_(perm, perm)], ModeLayout(layout.n, layout.m, layout.ordering))

    def __repr__(self):
        return f"QCM(m={self.layout.m}, n={self.layout.n}, ordering={self.layout.ordering.value})"


def reorder(V, target):
    target = Ordering(target)
    if V.layout.ordering == target:
        return V
    perm = V.layout.permutation_to(target)
    return QCM(V.mat[np.ix_(perm, perm)], V.layout.with_ordering(target))


def _matrix_and_layout(V, layout=None):
    if isinstance(V, QCM):
        return V.mat, V.layout
    mat = np.asarray(V, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
        raise DomainError(f"Expected a square matrix of even size, got shape {mat.shape}")
    if layout is None:
        layout = ModeLayout(mat.shape[0] // 2)
    if mat.shape[0] != layout.dim:
        raise DomainError(f"Matrix of shape {mat.shape} does not fit {layout.modes} modes")
    return mat, layout


@dataclass(frozen=True)
class QCMValidity:
    valid: bool
    min_eigenvalue: float

    def __bool__(self):
        return self.valid


def is_qcm(V, layout=None, tol=None):
    """Heisenberg check V + iΩ ⪰ 0 on the realification [[V, −Ω], [Ω, V]]"""
    tol = resolve_tolerances(tol)
    mat, layout = _matrix_and_layout(V, layout)
    if not np.all(np.isfinite(mat)):
        raise DomainError("Matrix contains non-finite entries")
    scale = max(spectral_norm(mat), _TINY)
    asymmetry = spectral_norm(mat - mat.T)
    if asymmetry > tol.alg * scale:
        raise DomainError(f"Matrix is not symmetric (‖V − Vᵀ‖ = {asymmetry:.3g})")
    mat = symmetrize(mat)
    lowest = float(np.linalg.eigvalsh(realify(mat, omega(layout)))[0])
    return QCMValidity(lowest >= -tol.psd * scale, lowest)


def symplectic_spectrum(V, tol=None):
    """Symplectic eigenvalues, non-increasing, each pair reported once"""
    tol = resolve_tolerances(tol)
    mat, layout = _matrix_and_layout(V)
    mat = symmetrize(mat)
    _check_positive(mat, tol)
    w, u = np.linalg.eigh(mat)
    root = (u * np.sqrt(w)) @ u.T
    b = antisymmetrize(root @ omega(layout) @ root)
    # −b² = bᵀb has every ν² twice
    squares = np.linalg.eigvalsh(symmetrize(b.T @ b))[::-1]
    squares = (squares[0::2] + squares[1::2]) / 2
    return np.sqrt(np.maximum(squares, 0.0))


@dataclass(frozen=True, eq=False)
class WilliamsonDecomposition:
    """S V Sᵀ = diag(ν1, ν1, ..., νk, νk); S maps the input coordinates to
    mode-wise Williamson coordinates"""
    S: np.ndarray
    nu: np.ndarray

    @property
    def normal_form(self):
        return np.diag(np.repeat(self.nu, 2))

    def symplectic_residual(self, layout):
        """‖S Ω Sᵀ − Ω_modewise‖_F"""
        target = omega(layout.with_ordering(Ordering.MODEWISE))
        return float(np.linalg.norm(self.S @ omega(layout) @ self.S.T - target))

    def diagonalization_residual(self, mat):
        return float(np.linalg.norm(self.S @ mat @ self.S.T - self.normal_form))

    def with_spectrum(self, nu):
        """The matrix S⁻¹ diag(ν⊗(1,1)) S⁻ᵀ for a replacement spectrum"""
        s_inv = np.linalg.inv(self.S)
        return symmetrize(s_inv @ np.diag(np.repeat(nu, 2)) @ s_inv.T)


def _clusters(values, gap):
    """Split ascending values into clusters of even size separated by > gap"""
    clusters = []
    start = 0
    for i in range(1, len(values) + 1):
        end_of_run = i == len(values) or values[i] - values[i - 1] > gap
        if end_of_run and (i - start) % 2 == 0:
            clusters.append((start, i))
            start = i
    return clusters


def williamson(V, tol=None):
    """Williamson normal form through the real symmetric eigenproblem of −A²,
    A = V^{−1/2} Ω V^{−1/2}

    Inside each (near-)degenerate eigenvalue cluster the canonical pairs
    (b, a) with b = A·a / ‖A·a‖ are built by Gram–Schmidt, so eigenvectors of
    different symplectic eigenvalues are never mixed.
    """
    tol = resolve_tolerances(tol)
    mat, layout = _matrix_and_layout(V)
    mat = symmetrize(mat)
    perm = layout.permutation_to(Ordering.MODEWISE)
    mw = mat[np.ix_(perm, perm)]

    w, u = np.linalg.eigh(mw)
    threshold = tol.psd * max(spectral_norm(mw), _TINY)
    if w[0] < threshold:
        raise ConditioningError(
            f"Williamson decomposition needs V > 0 (minimum eigenvalue {w[0]:.3g}"
            f" < {threshold:.3g})",
            min_eigenvalue=float(w[0]), threshold=threshold,
        )
    inv_half = (u / np.sqrt(w)) @ u.T
    a = antisymmetrize(inv_half @ omega(layout.modes) @ inv_half)
    d2, basis = np.linalg.eigh(symmetrize(a.T @ a))

    gap = max(tol.alg, 1e-12) * max(d2[-1], _TINY)
    columns = []
    dvals = []
    for start, stop in _clusters(d2, gap):
        if stop - start > 2:
            logger.debug("Degenerate symplectic eigenvalue cluster of size %d", (stop - start) // 2)
        candidates = basis[:, start:stop]
        chosen = []
        for _ in range((stop - start) // 2):
            residuals = candidates - sum(
                (np.outer(c, c) for c in chosen), np.zeros((len(mw), len(mw)))
            ) @ candidates
            best = int(np.argmax(np.linalg.norm(residuals, axis=0)))
            vec_a = residuals[:, best]
            vec_a = vec_a / np.linalg.norm(vec_a)
            vec_b = a @ vec_a
            d = float(np.linalg.norm(vec_b))
            for c in chosen:
                vec_b = vec_b - (c @ vec_b) * c
            vec_b = vec_b / np.linalg.norm(vec_b)
            chosen.extend([vec_a, vec_b])
            columns.extend([vec_b, vec_a])
            dvals.append(d)

    z = np.column_stack(columns)
    nu = 1 / np.asarray(dvals)
    order = np.argsort(-nu, kind='stable')
    nu = nu[order]
    z = z[:, np.repeat(2 * order, 2) + np.tile([0, 1], len(order))]
    s_mw = np.sqrt(np.repeat(nu, 2))[:, None] * (z.T @ inv_half)
    # back to the caller's coordinates: rows stay mode-wise
    s = np.empty_like(s_mw)
    s[:, perm] = s_mw
    return WilliamsonDecomposition(s, nu)


def is_symplectic(S, layout, tol=None):
    tol = resolve_tolerances(tol)
    om = omega(layout)
    return bool(np.linalg.norm(S @ om @ S.T - om) <= tol.alg * max(1.0, spectral_norm(S) ** 2))


@dataclass(frozen=True, eq=False)
class PartialTransposeMask:
    """Θ: diagonal ±1 flipping the momenta of the transposed modes"""
    layout: ModeLayout
    theta: np.ndarray

    @classmethod
    def for_modes(cls, layout, modes=None):
        if modes is None:
            if layout.n < 1:
                raise DomainError("Partial transposition of party B needs n >= 1")
            modes = layout.party_modes('B')
        modes = list(modes)
        if not modes or min(modes) < 0 or max(modes) >= layout.modes:
            raise DomainError(f"Invalid modes to transpose: {modes}")
        theta = np.ones(layout.dim)
        theta[[layout.p_index(j) for j in modes]] = -1.0
        return cls(layout, theta)

    @property
    def matrix(self):
        return np.diag(self.theta)

    def apply(self, V):
        return QCM(self.theta[:, None] * V.mat * self.theta[None, :], V.layout)


def partial_transpose(V, modes=None):
    """Θ V Θ, by default over all modes of party B"""
    return PartialTransposeMask.for_modes(V.layout, modes).apply(V)


@dataclass(frozen=True)
class PPTResult:
    ppt: bool
    min_symplectic_eigenvalue: float

    @property
    def distillable(self):
        # PPT violation and distillability coincide for Gaussian states
        return not self.ppt

    def __bool__(self):
        return self.ppt


def is_ppt(V, tol=None, modes=None):
    tol = resolve_tolerances(tol)
    validity = is_qcm(V, tol=tol)
    if not validity.valid:
        raise DomainError(
            f"Input is not a valid QCM (minimum eigenvalue of V + iΩ {validity.min_eigenvalue:.6g})"
        )
    transposed = partial_transpose(V, modes)
    lowest = float(symplectic_spectrum(transposed, tol)[-1])
    return PPTResult(lowest >= 1 - tol.verdict, lowest)


def is_pure(V, tol=None):
    """VΩVΩ = −1"""
    tol = resolve_tolerances(tol)
    mat, layout = _matrix_and_layout(V)
    om = omega(layout)
    residual = np.linalg.norm(mat @ om @ mat @ om + np.eye(layout.dim))
    return bool(residual <= tol.alg * max(1.0, spectral_norm(mat) ** 2))


@dataclass(frozen=True)
class TMSVParams:
    r: float

    @property
    def c(self):
        return float(np.cosh(2 * self.r))

    @property
    def s(self):
        return float(np.sinh(2 * self.r))


def tmsv(r):
    """Two-mode squeezed vacuum [[c·1, s·ζ], [s·ζ, c·1]], ζ = diag(1, −1)"""
    params = TMSVParams(r)
    c, s = params.c, params.s
    zeta = np.diag([1.0, -1.0])
    mat = np.block([[c * np.eye(2), s * zeta], [s * zeta, c * np.eye(2)]])
    return QCM(mat, ModeLayout(1, 1))


def thermal(nu, m=1, n=0):
    if nu < 1:
        raise DomainError(f"Thermal states need nu >= 1, got {nu}")
    layout = ModeLayout(m, n)
    return QCM(nu * np.eye(layout.dim), layout)


def vacuum(m=1, n=0):
    return thermal(1.0, m, n)


def direct_sum(*states, m=None):
    """⊕ of mode-wise QCMs; the first m modes form party A (default: the first state)"""
    if not states:
        raise DomainError("direct_sum needs at least one state")
    blocks = [state.mode_wise().mat for state in states]
    modes = sum(state.modes for state in states)
    if m is None:
        m = states[0].modes
    return QCM(block_diag(*blocks), ModeLayout(m, modes - m))


def squeezer(r):
    return np.diag([np.exp(r), np.exp(-r)])


def random_qcm(seed, layout, nu_max=None, squeeze_max=None):
    """V = S diag(ν⊗(1,1)) Sᵀ with S = K1 · ⊕squeezers · K2

    nu_max=None gives a pure state. K1, K2 are Haar-random passive transforms.
    """
    from gaussep.passive import random_passive

    if squeeze_max is None:
        squeeze_max = settings['random']['squeeze_max']
    if squeeze_max < 0:
        raise DomainError("squeeze_max must be non-negative")
    if nu_max is not None and nu_max < 1:
        raise DomainError("nu_max must be at least 1")

    rng = np.random.default_rng(seed)
    modes = layout.modes
    k1 = random_passive(rng, modes).K
    k2 = random_passive(rng, modes).K
    r = rng.uniform(-squeeze_max, squeeze_max, size=modes)
    nu = np.ones(modes) if nu_max is None else rng.uniform(1.0, nu_max, size=modes)

    s = k1 @ block_diag(*[squeezer(rj) for rj in r]) @ k2
    mat = s @ np.diag(np.repeat(nu, 2)) @ s.T
    V = QCM(mat, layout.with_ordering(Ordering.MODEWISE))
    return reorder(V, layout.ordering)

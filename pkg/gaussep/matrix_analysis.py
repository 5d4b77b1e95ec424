"""Schur complements and matrix means on real symmetric / Hermitian matrices

Hermitian matrices are carried as (real, imaginary) pairs and every spectral
question is answered on their realification, so only real symmetric
eigensolvers are needed.
"""
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np

from gaussep.exceptions import ConditioningError, DomainError
from gaussep.settings import resolve_tolerances
from gaussep.utils import (
    antisymmetrize, cadjoint, cmatmul, realify, spectral_norm, symmetrize
)

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Hermitian matrix re + i·im with re symmetric and im antisymmetric"""
    re: np.ndarray
    im: np.ndarray = None

    def __post_init__(self):
        re = np.atleast_2d(np.asarray(self.re, dtype=float))
        if re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise DomainError(f"Hermitian matrix must be square, got shape {re.shape}")
        im = np.zeros_like(re) if self.im is None else np.asarray(self.im, dtype=float)
        if im.shape != re.shape:
            raise DomainError("Real and imaginary parts differ in shape")
        object.__setattr__(self, 're', symmetrize(re))
        object.__setattr__(self, 'im', antisymmetrize(im))

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        value = np.asarray(value)
        if np.iscomplexobj(value):
            return cls(value.real, value.imag)
        return cls(value)

    @classmethod
    def from_realified(cls, mat):
        mat = np.asarray(mat, dtype=float)
        d = mat.shape[0] // 2
        return cls(
            (mat[:d, :d] + mat[d:, d:]) / 2,
            (mat[d:, :d] - mat[:d, d:]) / 2,
        )

    @property
    def dim(self):
        return self.re.shape[0]

    @property
    def realified(self):
        return realify(self.re, self.im)

    def conj(self):
        return HermitianMatrix(self.re, -self.im)

    def principal(self, rows):
        """Principal submatrix on the index set rows"""
        idx = np.ix_(rows, rows)
        return HermitianMatrix(self.re[idx], self.im[idx])

    def block(self, rows, cols):
        """Off-diagonal block as a (Re, Im) pair"""
        idx = np.ix_(rows, cols)
        return self.re[idx], self.im[idx]

    def eigvalsh(self):
        # every eigenvalue of the realification appears twice
        return np.linalg.eigvalsh(self.realified)[::2]

    def min_eigenvalue(self):
        return float(self.eigvalsh()[0])

    def norm(self):
        return spectral_norm(self.realified)

    def imag_norm(self):
        return spectral_norm(self.im)

    def is_real(self, atol=0.0):
        return bool(np.max(np.abs(self.im), initial=0.0) <= atol)

    def to_complex(self):
        return self.re + 1j * self.im

    def __add__(self, other):
        other = HermitianMatrix.coerce(other)
        return HermitianMatrix(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = HermitianMatrix.coerce(other)
        return HermitianMatrix(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return HermitianMatrix(-self.re, -self.im)

    def __mul__(self, scalar):
        return HermitianMatrix(scalar * self.re, scalar * self.im)

    __rmul__ = __mul__

    def shifted(self, t):
        """self + t·I"""
        return HermitianMatrix(self.re + t * np.eye(self.dim), self.im)

    def to_json(self):
        return {'re': self.re.tolist(), 'im': self.im.tolist()}


@dataclass(frozen=True)
class HermitianPair:
    """The two arguments of a matrix mean"""
    first: HermitianMatrix
    second: HermitianMatrix

    def __post_init__(self):
        first = HermitianMatrix.coerce(self.first)
        second = HermitianMatrix.coerce(self.second)
        if first.dim != second.dim:
            raise DomainError(
                f"Matrices of a pair must have equal size, got {first.dim} and {second.dim}"
            )
        object.__setattr__(self, 'first', first)
        object.__setattr__(self, 'second', second)

    @property
    def is_real(self):
        return self.first.is_real() and self.second.is_real()

    @property
    def realified(self):
        return self.first.realified, self.second.realified


@dataclass(frozen=True)
class BlockPartition:
    """M = [[A, X], [Y, B]] with A the leading split×split block"""
    split: int

    def check(self, dim):
        if not 1 <= self.split < dim:
            raise DomainError(
                f"Split index {self.split} must satisfy 1 <= split < {dim}"
            )

    def indices(self, dim):
        self.check(dim)
        return np.arange(self.split), np.arange(self.split, dim)


class Positivity(str, Enum):
    POS_DEF = "pos_def"
    PSD = "psd"
    INDEFINITE = "indefinite"


def _eigh_floored(mat, tol, what="matrix"):
    """Symmetric eigendecomposition with eigenvalues floored at tol.psd·‖mat‖

    Raises DomainError when the matrix is clearly not positive.
    """
    mat = symmetrize(mat)
    w, u = np.linalg.eigh(mat)
    floor = tol.psd * max(spectral_norm(mat), _TINY)
    info = {'min_eigenvalue': float(w[0]), 'floor': floor, 'floored': 0}
    if w[0] < -floor:
        raise DomainError(
            f"{what} is not positive definite (minimum eigenvalue {w[0]:.6g})"
        )
    low = w < floor
    if np.any(low):
        info['floored'] = int(np.sum(low))
        logger.warning(
            "Flooring %d eigenvalue(s) of %s at %.3g", info['floored'], what, floor
        )
        w = np.where(low, floor, w)
    return w, u, info


def _spectral_function(mat, func, tol, what, return_info):
    w, u, info = _eigh_floored(mat, tol, what)
    result = symmetrize((u * func(w)) @ u.T)
    if return_info:
        return result, info
    return result


def spd_sqrt(mat, tol=None, return_info=False):
    return _spectral_function(mat, np.sqrt, resolve_tolerances(tol), "matrix", return_info)


def spd_inv_sqrt(mat, tol=None, return_info=False):
    return _spectral_function(
        mat, lambda w: 1 / np.sqrt(w), resolve_tolerances(tol), "matrix", return_info
    )


def spd_inv(mat, tol=None, return_info=False):
    return _spectral_function(
        mat, lambda w: 1 / w, resolve_tolerances(tol), "matrix", return_info
    )


def hermitian_inverse(mat, tol=None, epsilon=0.0):
    """Inverse of a (possibly indefinite) Hermitian matrix as a HermitianMatrix

    Raises ConditioningError when an eigenvalue of mat + epsilon·I has modulus
    below tol.psd·‖mat‖ and epsilon is zero.
    """
    tol = resolve_tolerances(tol)
    mat = HermitianMatrix.coerce(mat).shifted(epsilon)
    w, u = np.linalg.eigh(mat.realified)
    threshold = tol.psd * max(mat.norm(), _TINY)
    smallest = float(np.min(np.abs(w)))
    if smallest <= (threshold if epsilon == 0 else 0.0):
        raise ConditioningError(
            f"Block is singular within tolerance (smallest |eigenvalue| {smallest:.3g}"
            f" <= {threshold:.3g}); retry with epsilon > 0",
            min_eigenvalue=smallest, threshold=threshold,
        )
    return HermitianMatrix.from_realified((u / w) @ u.T)


def classify_by_eigenvalues(mat, tol=None):
    tol = resolve_tolerances(tol)
    mat = HermitianMatrix.coerce(mat)
    threshold = tol.psd * max(mat.norm(), _TINY)
    lowest = mat.min_eigenvalue()
    if lowest > threshold:
        return Positivity.POS_DEF
    if lowest >= -threshold:
        return Positivity.PSD
    return Positivity.INDEFINITE


def schur_complement(mat, partition, epsilon=0.0, tol=None):
    """M/A = B − X†(A + εI)⁻¹X

    Real input gives a real ndarray back, Hermitian input a HermitianMatrix.
    """
    if epsilon < 0:
        raise DomainError("Regularization epsilon must be non-negative")
    tol = resolve_tolerances(tol)
    was_hermitian = isinstance(mat, HermitianMatrix) or np.iscomplexobj(mat)
    herm = HermitianMatrix.coerce(mat)
    a_idx, b_idx = partition.indices(herm.dim)

    a_inv = hermitian_inverse(herm.principal(a_idx), tol=tol, epsilon=epsilon)
    x = herm.block(a_idx, b_idx)
    correction = cmatmul(cadjoint(x), cmatmul((a_inv.re, a_inv.im), x))
    b = herm.principal(b_idx)
    result = HermitianMatrix(b.re - correction[0], b.im - correction[1])
    if was_hermitian:
        return result
    return result.re


def positivity_via_schur(mat, partition, tol=None):
    """Classify H through its A block and its Schur complement

    pos_def iff A > 0 and H/A > 0; otherwise psd iff A ⪰ 0 and the
    ε-regularized complement B − X†(A+εI)⁻¹X ⪰ 0 at ε = tol.psd·‖H‖.
    """
    tol = resolve_tolerances(tol)
    herm = HermitianMatrix.coerce(mat)
    a_idx, _ = partition.indices(herm.dim)
    threshold = tol.psd * max(herm.norm(), _TINY)
    lowest_a = herm.principal(a_idx).min_eigenvalue()

    verdict = None
    if lowest_a > threshold:
        complement = schur_complement(herm, partition, tol=tol)
        if complement.min_eigenvalue() > threshold:
            verdict = Positivity.POS_DEF
    if verdict is None:
        if lowest_a < -threshold:
            verdict = Positivity.INDEFINITE
        else:
            complement = schur_complement(herm, partition, epsilon=threshold, tol=tol)
            if complement.min_eigenvalue() >= -threshold:
                verdict = Positivity.PSD
            else:
                verdict = Positivity.INDEFINITE

    direct = classify_by_eigenvalues(herm, tol)
    if direct != verdict:
        logger.debug(
            "Schur classification %s differs from eigenvalue classification %s",
            verdict.value, direct.value
        )
    return verdict


def lower_block_positivity(mat, partition, lower_block, tol=None):
    """Classification of H − 0⊕B̃"""
    herm = HermitianMatrix.coerce(mat)
    _, b_idx = partition.indices(herm.dim)
    lower_block = HermitianMatrix.coerce(lower_block)
    re = herm.re.copy()
    im = herm.im.copy()
    re[np.ix_(b_idx, b_idx)] -= lower_block.re
    im[np.ix_(b_idx, b_idx)] -= lower_block.im
    return classify_by_eigenvalues(HermitianMatrix(re, im), tol)


def _random_psd(rng, dim, complex_valued):
    g = rng.standard_normal((dim, dim))
    if complex_valued:
        gi = rng.standard_normal((dim, dim))
        p = HermitianMatrix(g @ g.T + gi @ gi.T, gi @ g.T - g @ gi.T)
    else:
        p = HermitianMatrix(g @ g.T)
    return p * (1 / p.norm())


def schur_is_supremum_check(mat, partition, trials=100, seed=0, delta=1e-3, tol=None):
    """Property check that H/A is the largest B̃ with H ⪰ 0⊕B̃

    Candidates H/A − δ(I + P) must keep H − 0⊕B̃ positive definite, candidates
    H/A + δP must break positivity (P random PSD of unit norm, δ relative
    to ‖H‖).
    """
    tol = resolve_tolerances(tol)
    herm = HermitianMatrix.coerce(mat)
    complement = schur_complement(herm, partition, tol=tol)
    rng = np.random.default_rng(seed)
    step = delta * herm.norm()
    complex_valued = not herm.is_real()

    for trial in range(trials):
        p = _random_psd(rng, complement.dim, complex_valued)
        below = complement.shifted(-step) - p * step
        above = complement + p * step
        if lower_block_positivity(herm, partition, below, tol) != Positivity.POS_DEF:
            logger.debug("Trial %d: candidate below H/A rejected", trial)
            return False
        if lower_block_positivity(herm, partition, above, tol) != Positivity.INDEFINITE:
            logger.debug("Trial %d: candidate above H/A accepted", trial)
            return False
    return True


def _unpack_means(a, b):
    if isinstance(a, (HermitianMatrix, HermitianPair)) or isinstance(b, HermitianMatrix):
        pair = a if isinstance(a, HermitianPair) else HermitianPair(a, b)
        ar, br = pair.realified
        return ar, br, True
    return symmetrize(a), symmetrize(b), False


def _pack_mean(mat, hermitian):
    if hermitian:
        return HermitianMatrix.from_realified(mat)
    return symmetrize(mat)


def arithmetic_mean(a, b=None):
    a, b, hermitian = _unpack_means(a, b)
    return _pack_mean((a + b) / 2, hermitian)


def harmonic_mean(a, b=None, tol=None, return_info=False):
    """A!B = 2(A⁻¹ + B⁻¹)⁻¹"""
    tol = resolve_tolerances(tol)
    a, b, hermitian = _unpack_means(a, b)
    a_inv, info_a = _spectral_function(a, lambda w: 1 / w, tol, "first argument", True)
    b_inv, info_b = _spectral_function(b, lambda w: 1 / w, tol, "second argument", True)
    result = 2 * np.linalg.inv(a_inv + b_inv)
    result = _pack_mean(result, hermitian)
    if return_info:
        return result, {'first': info_a, 'second': info_b}
    return result


def parallel_sum(a, b=None, tol=None):
    """A − A(A+B)⁻¹A, one half of the harmonic mean"""
    tol = resolve_tolerances(tol)
    a, b, hermitian = _unpack_means(a, b)
    s_inv = _spectral_function(a + b, lambda w: 1 / w, tol, "sum", False)
    return _pack_mean(a - a @ s_inv @ a, hermitian)


def geometric_mean(a, b=None, tol=None, return_info=False):
    """A#B = A^{1/2} (A^{−1/2} B A^{−1/2})^{1/2} A^{1/2}"""
    tol = resolve_tolerances(tol)
    a, b, hermitian = _unpack_means(a, b)
    w, u, info_a = _eigh_floored(a, tol, "first argument")
    _, _, info_b = _eigh_floored(b, tol, "second argument")
    a_half = symmetrize((u * np.sqrt(w)) @ u.T)
    a_inv_half = symmetrize((u / np.sqrt(w)) @ u.T)
    inner, info_inner = _spectral_function(
        a_inv_half @ b @ a_inv_half, np.sqrt, tol, "congruence", True
    )
    result = _pack_mean(a_half @ inner @ a_half, hermitian)
    if return_info:
        return result, {'first': info_a, 'second': info_b, 'inner': info_inner}
    return result


def mean_identity_check(a, b=None, tol=None):
    """‖A#B − ((A+B)/2)#(A!B)‖_F"""
    a, b, hermitian = _unpack_means(a, b)
    lhs = geometric_mean(a, b, tol=tol)
    rhs = geometric_mean(arithmetic_mean(a, b), harmonic_mean(a, b, tol=tol), tol=tol)
    residual = float(np.linalg.norm(lhs - rhs))
    # the realification doubles every squared entry
    return residual / np.sqrt(2) if hermitian else residual

from copy import deepcopy
import hashlib
import json

import numpy as np


def merge_deep_dicts(d1, d2):
    merged = deepcopy(d1)
    for k, v in d2.items():
        if k not in merged or not isinstance(v, dict):
            merged[k] = v
        else:
            merged[k] = merge_deep_dicts(merged[k], v)
    return merged


def symmetrize(mat):
    mat = np.asarray(mat, dtype=float)
    return (mat + mat.T) / 2


def antisymmetrize(mat):
    mat = np.asarray(mat, dtype=float)
    return (mat - mat.T) / 2


def spectral_norm(mat):
    """Largest singular value; 0 for empty matrices"""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def realify(re, im=None):
    """Real 2d×2d form [[Re, −Im], [Im, Re]] of the complex matrix Re + i·Im

    Realification is a *-homomorphism: products, inverses, adjoints and
    spectral functions can be evaluated on the real form and read back from
    its left column of blocks. A Hermitian matrix becomes real symmetric with
    every eigenvalue doubled.
    """
    re = np.asarray(re, dtype=float)
    if im is None:
        im = np.zeros_like(re)
    im = np.asarray(im, dtype=float)
    return np.block([[re, -im], [im, re]])


def derealify(mat):
    """Inverse of realify: returns the pair (Re, Im)"""
    mat = np.asarray(mat, dtype=float)
    d = mat.shape[0] // 2
    return mat[:d, :d].copy(), mat[d:, :d].copy()


def cmatmul(a, b):
    """Product of two complex matrices given as (Re, Im) pairs"""
    ar, ai = a
    br, bi = b
    return ar @ br - ai @ bi, ar @ bi + ai @ br


def cadjoint(a):
    ar, ai = a
    return ar.T, -ai.T


def psd_part(mat):
    """Projection of a real symmetric matrix onto the PSD cone (Frobenius)"""
    w, u = np.linalg.eigh(symmetrize(mat))
    return symmetrize((u * np.maximum(w, 0.0)) @ u.T)


def min_eigenvalue(mat):
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return float('inf')
    return float(np.linalg.eigvalsh(symmetrize(mat))[0])


def matrix_digest(mat, **extra):
    """sha256 of a float64 matrix plus a few descriptive fields"""
    hasher = hashlib.sha256()
    hasher.update(np.ascontiguousarray(mat, dtype='<f8').tobytes())
    hasher.update(json.dumps(extra, sort_keys=True).encode())
    return hasher.hexdigest()

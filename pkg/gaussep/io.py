"""Reading and writing QCM and certificate files

Both are versioned JSON documents, see docs/file_format.md. Floats are
written with their shortest round-trip repr, so save/load is bit exact.
"""
from dataclasses import dataclass, field
import json
import logging
from typing import Optional

import numpy as np

from gaussep.exceptions import DomainError, FileFormatError, UnsupportedVersionError
from gaussep.passive import AbsSepCert, AbsVerdict, abs_cert_is_valid
from gaussep.separability import (
    CertificateCheck, DualCertificate, SeparabilityCert, Verdict, validate_certificate
)
from gaussep.settings import Tolerances, resolve_tolerances
from gaussep.symplectic import ModeLayout, Ordering, QCM, is_qcm, reorder
from gaussep.utils import matrix_digest, symmetrize

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(eq=False)
class QCMFile:
    """A matrix with its layout, not necessarily a valid QCM"""
    matrix: np.ndarray
    layout: ModeLayout
    metadata: dict = field(default_factory=dict)

    @property
    def qcm(self):
        return QCM(self.matrix, self.layout)

    @classmethod
    def from_qcm(cls, V, metadata=None):
        return cls(np.array(V.mat), V.layout, dict(metadata or {}))

    def digest(self):
        mw = _modewise_matrix(self.matrix, self.layout)
        return matrix_digest(mw, m=self.layout.m, n=self.layout.n)

    def to_json(self):
        return {
            'kind': 'qcm',
            'schema_version': SCHEMA_VERSION,
            'm': self.layout.m,
            'n': self.layout.n,
            'ordering': self.layout.ordering.value,
            'matrix': [float(v) for v in np.asarray(self.matrix, dtype=float).ravel()],
            'metadata': self.metadata,
        }


@dataclass(eq=False)
class CertFile:
    certificate: object
    source: QCMFile
    tolerances: Tolerances
    tool_version: Optional[str] = None

    @property
    def kind(self):
        return 'abs_certificate' if isinstance(self.certificate, AbsSepCert) else 'certificate'


def _modewise_matrix(mat, layout):
    if layout.ordering == Ordering.MODEWISE:
        return np.asarray(mat, dtype=float)
    perm = layout.permutation_to(Ordering.MODEWISE)
    return np.asarray(mat, dtype=float)[np.ix_(perm, perm)]


def _read_text(source):
    if hasattr(source, 'read'):
        return source.read()
    with open(source, 'r', encoding='utf-8') as stream:
        return stream.read()


def _write_text(target, text):
    if hasattr(target, 'write'):
        target.write(text)
        return
    with open(target, 'w', encoding='utf-8') as stream:
        stream.write(text)


def _parse(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        offset = len(text[:error.pos].encode('utf-8'))
        raise FileFormatError(f"Malformed document: {error.msg}", offset=offset)


def _require(document, key, kind):
    if key not in document:
        raise FileFormatError(f"{kind} document has no '{key}' field")
    return document[key]


def _check_header(document, kind):
    if not isinstance(document, dict):
        raise FileFormatError("Top level of the document must be an object")
    found = document.get('kind', kind)
    if found != kind:
        raise FileFormatError(f"Expected a '{kind}' document, found '{found}'")
    version = _require(document, 'schema_version', kind)
    if not isinstance(version, int) or isinstance(version, bool):
        raise FileFormatError(f"schema_version must be an integer, got {version!r}")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(
            f"Unsupported schema_version {version} (this version reads {SCHEMA_VERSION})"
        )


def _matrix_from(values, dim, what):
    try:
        mat = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise FileFormatError(f"{what} must contain only numbers")
    if mat.size != dim * dim:
        raise FileFormatError(f"{what} has {mat.size} entries, expected {dim * dim}")
    return mat.reshape(dim, dim)


def qcm_from_json(document):
    _check_header(document, 'qcm')
    try:
        m = int(_require(document, 'm', 'qcm'))
        n = int(_require(document, 'n', 'qcm'))
        layout = ModeLayout(m, n, document.get('ordering', Ordering.MODEWISE.value))
    except (TypeError, ValueError) as error:
        raise FileFormatError(f"Invalid layout: {error}")
    mat = _matrix_from(_require(document, 'matrix', 'qcm'), layout.dim, "matrix")
    if not np.all(np.isfinite(mat)):
        raise FileFormatError("matrix contains non-finite entries")
    asymmetry = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
    if asymmetry > 0:
        logger.debug("Symmetrizing loaded matrix (max asymmetry %.3g)", asymmetry)
        mat = symmetrize(mat)
    validity = is_qcm(mat, layout)
    if not validity.valid:
        logger.warning(
            "Loaded matrix is not a valid QCM (minimum eigenvalue of V + iΩ %.6g)",
            validity.min_eigenvalue
        )
    return QCMFile(mat, layout, dict(document.get('metadata') or {}))


def load_qcm(source):
    return qcm_from_json(_parse(_read_text(source)))


def save_qcm(V, target, metadata=None):
    """V is a QCM or a QCMFile; target a path or a text stream"""
    qcm_file = V if isinstance(V, QCMFile) else QCMFile.from_qcm(V, metadata)
    _write_text(target, json.dumps(qcm_file.to_json(), indent=2) + "\n")


def _flat(mat):
    return [float(v) for v in np.asarray(mat, dtype=float).ravel()]


def _square(values, what):
    values = np.asarray(values, dtype=float)
    dim = int(round(np.sqrt(values.size)))
    return _matrix_from(values, dim, what)


def _vector(values, size, what):
    values = np.asarray(values, dtype=float)
    if values.shape != (size,):
        raise FileFormatError(f"{what} must have {size} entries, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise FileFormatError(f"{what} has non-finite entries")
    return values


def _optional_float(value):
    return None if value is None else float(value)


def _separability_to_json(cert):
    return {
        'verdict': cert.verdict.value,
        'method': cert.method,
        'group_sizes': list(cert.group_sizes),
        'gammas': [_flat(gamma) for gamma in cert.gammas],
        'margin': _optional_float(cert.margin),
        'pt_min_symplectic_eigenvalue': _optional_float(cert.pt_min_symplectic_eigenvalue),
        'pt_modes': cert.pt_modes,
        'epsilon': float(cert.epsilon),
        'dual': cert.dual.to_json() if cert.dual is not None else None,
        'notes': list(cert.notes),
        'details': {key: float(value) for key, value in cert.details.items()},
    }


def _separability_from_json(data, layout):
    try:
        verdict = Verdict(data['verdict'])
        gammas = [_square(values, f"gamma {i}") for i, values in enumerate(data.get('gammas', []))]
        dual = data.get('dual')
        return SeparabilityCert(
            verdict, str(data.get('method', '')), layout,
            [int(g) for g in data['group_sizes']], gammas=gammas,
            pt_min_symplectic_eigenvalue=_optional_float(data.get('pt_min_symplectic_eigenvalue')),
            pt_modes=data.get('pt_modes'),
            margin=_optional_float(data.get('margin')),
            dual=DualCertificate.from_json(dual) if dual is not None else None,
            epsilon=float(data.get('epsilon', 0.0)),
            notes=list(data.get('notes', [])),
            details=dict(data.get('details', {})),
        )
    except (KeyError, TypeError, ValueError) as error:
        raise FileFormatError(f"Invalid certificate: {error}")


def _abs_to_json(cert):
    return {
        'verdict': cert.verdict.value,
        'lambda1': cert.lambda1,
        'lambda2': cert.lambda2,
        'k': _optional_float(cert.k),
        'p': _optional_float(cert.p),
        'gamma_a': _flat(cert.gamma_a) if cert.gamma_a is not None else None,
        'gamma_b': _flat(cert.gamma_b) if cert.gamma_b is not None else None,
        'x': _flat(cert.x) if cert.x is not None else None,
        'y': _flat(cert.y) if cert.y is not None else None,
        'z': _flat(cert.z) if cert.z is not None else None,
        'identity_residual': cert.identity_residual,
        'min_gap': _optional_float(cert.min_gap),
    }


def _abs_from_json(data, layout):
    try:
        cert = AbsSepCert(
            float(data['lambda1']), float(data['lambda2']), AbsVerdict(data['verdict']), layout,
            k=_optional_float(data.get('k')), p=_optional_float(data.get('p')),
            identity_residual=float(data.get('identity_residual', 0.0)),
            min_gap=_optional_float(data.get('min_gap')),
        )
        if data.get('gamma_a') is not None:
            cert.gamma_a = _square(data['gamma_a'], "gamma_a")
            cert.gamma_b = _square(data['gamma_b'], "gamma_b")
        for name, size in (('x', layout.dim), ('y', 2 * layout.m), ('z', 2 * layout.n)):
            if data.get(name) is not None:
                setattr(cert, name, _vector(data[name], size, name))
        return cert
    except (KeyError, TypeError, ValueError) as error:
        raise FileFormatError(f"Invalid certificate: {error}")


def certificate_to_json(cert, V, tol=None):
    from gaussep import __version__

    tol = resolve_tolerances(tol)
    source = QCMFile.from_qcm(reorder(V, Ordering.MODEWISE))
    body = _abs_to_json(cert) if isinstance(cert, AbsSepCert) else _separability_to_json(cert)
    return {
        'kind': 'abs_certificate' if isinstance(cert, AbsSepCert) else 'certificate',
        'schema_version': SCHEMA_VERSION,
        'tool_version': __version__,
        'tolerances': {'psd': tol.psd, 'alg': tol.alg, 'verdict': tol.verdict},
        'input': source.to_json(),
        'input_digest': source.digest(),
        'certificate': body,
    }


def certificate_from_json(document):
    if not isinstance(document, dict):
        raise FileFormatError("Top level of the document must be an object")
    kind = document.get('kind')
    if kind not in ('certificate', 'abs_certificate'):
        raise FileFormatError(f"Expected a certificate document, found '{kind}'")
    _check_header(document, kind)

    source = qcm_from_json(_require(document, 'input', kind))
    digest = _require(document, 'input_digest', kind)
    if digest != source.digest():
        raise FileFormatError("input_digest does not match the embedded matrix")
    try:
        tolerances = Tolerances(**{
            key: float(value) for key, value in _require(document, 'tolerances', kind).items()
        })
    except (TypeError, ValueError) as error:
        raise FileFormatError(f"Invalid tolerances: {error}")

    body = _require(document, 'certificate', kind)
    if not isinstance(body, dict):
        raise FileFormatError("certificate must be an object")
    if kind == 'abs_certificate':
        cert = _abs_from_json(body, source.layout)
    else:
        cert = _separability_from_json(body, source.layout)
    return CertFile(cert, source, tolerances, document.get('tool_version'))


def save_certificate(cert, V, target, tol=None):
    _write_text(target, json.dumps(certificate_to_json(cert, V, tol), indent=2) + "\n")


def load_certificate(source):
    return certificate_from_json(_parse(_read_text(source)))


def revalidate(source, tol=None):
    """Re-check a certificate file using nothing but its own contents"""
    cert_file = source if isinstance(source, CertFile) else load_certificate(source)
    tol = cert_file.tolerances if tol is None else tol
    try:
        V = cert_file.source.qcm
    except DomainError as error:
        return CertificateCheck(False, [f"embedded input is not a covariance matrix: {error}"])

    cert = cert_file.certificate
    if isinstance(cert, AbsSepCert):
        if not cert.absolutely_separable:
            lam = np.linalg.eigvalsh(V.mat)
            ok = lam[0] * lam[1] < 1 - tol.verdict
            return CertificateCheck(ok, [] if ok else ["λ1·λ2 is not below 1"])
        ok = abs_cert_is_valid(V, cert, tol)
        return CertificateCheck(ok, [] if ok else ["k-certificate identity or V ⪰ γ_A ⊕ γ_B fails"])
    return validate_certificate(V, cert, tol)

import io
import json
from pathlib import Path

import numpy as np
import pytest

from gaussep.exceptions import FileFormatError, UnsupportedVersionError
from gaussep.io import (
    QCMFile, certificate_to_json, load_certificate, load_qcm, qcm_from_json, revalidate,
    save_certificate, save_qcm
)
from gaussep.passive import absolute_separability
from gaussep.separability import (
    DualCertificate, SeparabilityCert, Verdict, separability_1vn, upper_bound,
    validate_certificate
)
from gaussep.settings import Tolerances, settings
from gaussep.symplectic import (
    ModeLayout, Ordering, QCM, is_ppt, omega, reorder, thermal, tmsv
)
from gaussep.utils import realify


def qcm_document(V, **changes):
    document = QCMFile.from_qcm(V).to_json()
    document.update(changes)
    return document


def roundtrip_certificate(cert, V, tol=None):
    buffer = io.StringIO()
    save_certificate(cert, V, buffer, tol)
    buffer.seek(0)
    return load_certificate(buffer)


def trace_bound_certificate(V):
    """Entangled verdict for a phase-symmetric 1 vs 1 state

    A real γ with iΩ ⪯ γ ⪯ N needs tr γ/2 ≥ 1 and tr γ/2 ≤ λmin(N); the
    projectors onto the eigenvectors of iΩ turn the clash into a dual pair.
    """
    N = upper_bound(V)
    upper = N.re + 1j * N.im
    M = 1j * omega(1)
    projectors = [(np.eye(2) + M) / 2, (np.eye(2) - M) / 2]
    below = min(projectors, key=lambda P: np.trace(P @ upper).real)
    Y = realify(projectors[0].real, projectors[0].imag)
    Z = realify(below.real, below.imag)
    gap = 2 * (1 - np.trace(below @ upper).real)
    return SeparabilityCert(
        Verdict.ENTANGLED, "engine", V.layout, [1, 1],
        pt_min_symplectic_eigenvalue=is_ppt(V).min_symplectic_eigenvalue,
        dual=DualCertificate(0.0, float(gap), Y, Z, [1]),
    )


class TestQCMFiles:
    def test_save_and_load_are_bit_exact(self, random_2v2, tmp_path):
        path = tmp_path / "state.json"
        save_qcm(random_2v2, str(path), {'origin': 'test'})
        loaded = load_qcm(str(path))
        assert np.array_equal(loaded.matrix, random_2v2.mat)
        assert loaded.layout == random_2v2.layout
        assert loaded.metadata == {'origin': 'test'}

    def test_position_momentum_file(self, random_2v2):
        pm = reorder(random_2v2, Ordering.POSITION_MOMENTUM)
        loaded = qcm_from_json(QCMFile.from_qcm(pm).to_json())
        assert loaded.layout.ordering == Ordering.POSITION_MOMENTUM
        assert loaded.digest() == QCMFile.from_qcm(random_2v2).digest()

    def test_truncated_document(self, noisy_tmsv):
        text = json.dumps(qcm_document(noisy_tmsv))[:60]
        with pytest.raises(FileFormatError) as error:
            load_qcm(io.StringIO(text))
        assert error.value.offset is not None
        assert "byte offset" in str(error.value)

    def test_future_schema_version(self, noisy_tmsv):
        with pytest.raises(UnsupportedVersionError):
            qcm_from_json(qcm_document(noisy_tmsv, schema_version=2))

    @pytest.mark.parametrize("changes", [
        {'kind': 'certificate'},
        {'schema_version': "1"},
        {'matrix': [1.0, 0.0, 0.0]},
        {'matrix': [1.0, "x", 0.0, 1.0]},
        {'m': -1},
        {'ordering': 'diagonal'},
    ])
    def test_malformed_documents(self, changes):
        with pytest.raises(FileFormatError):
            qcm_from_json(qcm_document(thermal(2.0), **changes))

    def test_non_finite_entries(self):
        text = json.dumps(qcm_document(thermal(2.0), matrix=[float('nan'), 0.0, 0.0, 1.0]))
        with pytest.raises(FileFormatError):
            load_qcm(io.StringIO(text))

    def test_invalid_qcm_loads_with_warning(self, caplog):
        document = qcm_document(thermal(2.0), matrix=[0.5, 0.0, 0.0, 0.5])
        loaded = qcm_from_json(document)
        assert np.allclose(loaded.matrix, 0.5 * np.eye(2))
        assert "not a valid QCM" in caplog.text

    def test_asymmetric_matrix_is_symmetrized(self):
        loaded = qcm_from_json(qcm_document(thermal(2.0), matrix=[2.0, 0.2, 0.0, 2.0]))
        assert np.allclose(loaded.matrix, [[2.0, 0.1], [0.1, 2.0]])


class TestCertificateFiles:
    def test_separable_certificate(self, noisy_tmsv):
        cert = separability_1vn(noisy_tmsv)
        loaded = roundtrip_certificate(cert, noisy_tmsv)
        assert loaded.kind == 'certificate'
        assert loaded.certificate.verdict == cert.verdict
        assert np.array_equal(loaded.certificate.gammas[0], cert.gammas[0])
        assert revalidate(loaded).ok

    def test_entangled_certificate(self, entangled_tmsv):
        loaded = roundtrip_certificate(separability_1vn(entangled_tmsv), entangled_tmsv)
        assert loaded.certificate.entangled
        assert revalidate(loaded).ok

    def test_absolute_certificates(self, entangled_tmsv):
        V = thermal(1.5, 1, 1)
        loaded = roundtrip_certificate(absolute_separability(V), V)
        assert loaded.kind == 'abs_certificate'
        assert revalidate(loaded).ok
        loaded = roundtrip_certificate(absolute_separability(entangled_tmsv), entangled_tmsv)
        assert not loaded.certificate.absolutely_separable
        assert revalidate(loaded).ok

    def test_tolerances_travel_with_the_file(self, noisy_tmsv):
        tol = Tolerances(psd=1e-10, alg=1e-9, verdict=1e-8)
        loaded = roundtrip_certificate(separability_1vn(noisy_tmsv), noisy_tmsv, tol)
        assert loaded.tolerances == tol

    def test_digest_mismatch(self, noisy_tmsv):
        document = certificate_to_json(separability_1vn(noisy_tmsv), noisy_tmsv)
        document['input']['matrix'][0] += 1.0
        with pytest.raises(FileFormatError, match="input_digest"):
            load_certificate(io.StringIO(json.dumps(document)))

    def test_tampered_witness(self, noisy_tmsv):
        document = certificate_to_json(separability_1vn(noisy_tmsv), noisy_tmsv)
        document['certificate']['gammas'][0] = [10 * v for v in document['certificate']['gammas'][0]]
        check = revalidate(io.StringIO(json.dumps(document)))
        assert not check.ok

    def test_legacy_certificate(self, noisy_tmsv):
        document = certificate_to_json(separability_1vn(noisy_tmsv), noisy_tmsv)
        document['schema_version'] = 0
        with pytest.raises(UnsupportedVersionError):
            load_certificate(io.StringIO(json.dumps(document)))

    def test_file_on_disk(self, noisy_tmsv, tmp_path):
        path = str(tmp_path / "cert.json")
        save_certificate(separability_1vn(noisy_tmsv), noisy_tmsv, path)
        assert revalidate(path).ok

    def test_layout_is_restored(self):
        V = thermal(1.5, 1, 2)
        loaded = roundtrip_certificate(separability_1vn(V), V)
        assert loaded.source.layout == ModeLayout(1, 2)
        assert loaded.certificate.group_sizes == [1, 2]

    def test_dual_certificate(self):
        V = QCM(1.5 * tmsv(1.0).mat, ModeLayout(1, 1))
        cert = trace_bound_certificate(V)
        assert cert.dual.gap > 0
        assert validate_certificate(V, cert).ok
        loaded = roundtrip_certificate(cert, V)
        assert loaded.certificate.witness_kind == "dual"
        assert np.array_equal(loaded.certificate.dual.Y, cert.dual.Y)
        assert loaded.certificate.dual.group_sizes == [1]
        assert revalidate(loaded).ok

    def test_dual_with_positive_level(self):
        V = QCM(1.5 * tmsv(1.0).mat, ModeLayout(1, 1))
        document = certificate_to_json(trace_bound_certificate(V), V)
        document['certificate']['dual']['level'] = 0.5
        check = revalidate(io.StringIO(json.dumps(document)))
        assert not check.ok

    def test_dual_does_not_fit_a_separable_state(self, noisy_tmsv):
        cert = trace_bound_certificate(noisy_tmsv)
        assert cert.dual.gap <= 0
        check = validate_certificate(noisy_tmsv, cert)
        assert not check.ok
        assert any("dual gap" in reason for reason in check.reasons)

    def test_k_certificate_vectors(self):
        V = QCM(np.diag([0.8, 1.5, 1.3, 1.3]), ModeLayout(1, 1))
        cert = absolute_separability(V)
        assert cert.k == pytest.approx(0.8)
        loaded = roundtrip_certificate(cert, V)
        assert np.array_equal(loaded.certificate.x, cert.x)
        assert np.array_equal(loaded.certificate.z, cert.z)
        assert revalidate(loaded).ok

    @pytest.mark.parametrize("tamper", ["scale_x", "drop_x", "short_y"])
    def test_k_certificate_identity_is_recomputed(self, tamper):
        V = QCM(np.diag([0.8, 1.5, 1.3, 1.3]), ModeLayout(1, 1))
        document = certificate_to_json(absolute_separability(V), V)
        body = document['certificate']
        if tamper == "scale_x":
            body['x'] = [2 * v for v in body['x']]
        elif tamper == "drop_x":
            body['x'] = None
        else:
            body['y'] = body['y'][:1]
            with pytest.raises(FileFormatError):
                load_certificate(io.StringIO(json.dumps(document)))
            return
        assert not revalidate(io.StringIO(json.dumps(document))).ok


class TestDemoFiles:
    demo = Path(__file__).resolve().parents[2] / "demo"

    def test_tmsv(self):
        V = load_qcm(str(self.demo / "tmsv-0.5.json")).qcm
        assert np.allclose(V.mat, tmsv(0.5).mat)
        assert not is_ppt(V).ppt

    def test_thermal_product(self):
        V = load_qcm(str(self.demo / "thermal-product.json")).qcm
        assert V.layout == ModeLayout(1, 2)
        assert np.array_equal(V.mat, thermal(2.0, 1, 2).mat)

    def test_config(self):
        settings.load_from(str(self.demo / "strict-tolerances.yaml"))
        assert settings.tolerances.verdict == 1e-9
        assert settings.solver.max_iterations == 20000

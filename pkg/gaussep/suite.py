"""Reproducible property suites over random and constructed states

Each case draws its own samples from a child of one SeedSequence, so the
report is identical for a given seed no matter how many workers run it.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import time
from typing import List

import numpy as np

from gaussep.exceptions import GaussepError
from gaussep.matrix_analysis import geometric_mean, mean_identity_check
from gaussep.passive import (
    abs_cert_is_valid, absolute_separability, passive_congruence, random_passive,
    sympl_vs_ordinary_check
)
from gaussep.routing import decide_separability
from gaussep.separability import (
    Verdict, separability_general, validate_certificate
)
from gaussep.settings import resolve_tolerances, settings
from gaussep.structure import (
    detect_mono_symmetry, heisenberg_gap, localize, pt_average,
    separability_isotropic, separability_mono_symmetric, separability_pt_invariant,
    symmetrize_modes
)
from gaussep.symplectic import (
    ModeLayout, QCM, is_ppt, is_qcm, random_qcm, symplectic_spectrum, tmsv, williamson
)

logger = logging.getLogger(__name__)


@dataclass
class CaseResult:
    name: str
    samples: int = 0
    failures: List[str] = field(default_factory=list)
    inconclusive: int = 0
    skipped: int = 0
    seconds: float = 0.0

    @property
    def passed(self):
        return not self.failures

    def to_json(self):
        return {
            'name': self.name,
            'samples': self.samples,
            'passed': self.passed,
            'failures': self.failures,
            'inconclusive': self.inconclusive,
            'skipped': self.skipped,
            'seconds': self.seconds,
        }


@dataclass
class SuiteReport:
    seed: int
    scale: float
    cases: List[CaseResult]

    @property
    def passed(self):
        return all(case.passed for case in self.cases)

    def to_json(self):
        return {
            'seed': self.seed,
            'scale': self.scale,
            'passed': self.passed,
            'cases': [case.to_json() for case in self.cases],
        }


def _random_spd(rng, dim):
    g = rng.standard_normal((dim, dim))
    return g @ g.T + 0.1 * np.eye(dim)


def _check_cert(result, V, cert, tol, label):
    if cert.verdict == Verdict.INCONCLUSIVE:
        result.inconclusive += 1
        return
    check = validate_certificate(V, cert, tol)
    if not check.ok:
        result.failures.append(f"{label}: certificate rejected ({'; '.join(check.reasons)})")


def one_vs_n_equivalence(rng, count, tol, config):
    """PPT and the general engine agree whenever one side has a single mode"""
    result = CaseResult('one_vs_n_equivalence')
    for index in range(count):
        n = int(rng.integers(1, 5))
        V = random_qcm(rng, ModeLayout(1, n), nu_max=3.0, squeeze_max=1.5)
        ppt = is_ppt(V, tol)
        cert = separability_general(V, config, tol)
        result.samples += 1
        _check_cert(result, V, cert, tol, f"sample {index}")
        if cert.verdict != Verdict.INCONCLUSIVE and cert.separable != ppt.ppt:
            result.failures.append(f"sample {index}: PPT={ppt.ppt} but engine said {cert.verdict.value}")
    if result.inconclusive > 0.02 * max(result.samples, 1):
        result.failures.append(f"{result.inconclusive} inconclusive out of {result.samples}")
    return result


def certificate_soundness(rng, count, tol, config):
    result = CaseResult('certificate_soundness')
    for index in range(count):
        m, n = (int(k) for k in rng.integers(1, 3, size=2))
        V = random_qcm(rng, ModeLayout(m, n), nu_max=3.0)
        cert = decide_separability(V, tol=tol, config=config)
        result.samples += 1
        _check_cert(result, V, cert, tol, f"sample {index}")
        if cert.entangled and cert.dual is None:
            if cert.pt_min_symplectic_eigenvalue >= 1 - tol.verdict:
                result.failures.append(f"sample {index}: PPT witness not below 1")
    return result


def mean_identity(rng, count, tol, config):
    result = CaseResult('mean_identity')
    for index in range(count):
        dim = int(rng.integers(2, 13))
        a, b = _random_spd(rng, dim), _random_spd(rng, dim)
        residual = mean_identity_check(a, b, tol)
        reference = np.linalg.norm(geometric_mean(a, b, tol))
        result.samples += 1
        if residual > tol.alg * reference:
            result.failures.append(f"sample {index}: residual {residual:.3g}")
    return result


def heisenberg_biconditional(rng, count, tol, config):
    """V is a QCM exactly when V ⪰ V#(ΩᵀV⁻¹Ω)"""
    result = CaseResult('heisenberg_biconditional')
    for index in range(count):
        modes = int(rng.integers(1, 5))
        V = random_qcm(rng, ModeLayout(modes), nu_max=2.0).mat
        if index % 2:
            V = V * rng.uniform(0.3, 0.95)
        scale = np.linalg.norm(V, 2)
        validity = is_qcm(V, tol=tol)
        gap = heisenberg_gap(V)
        if abs(gap) <= tol.verdict * scale or abs(validity.min_eigenvalue) <= tol.verdict * scale:
            result.skipped += 1
            continue
        result.samples += 1
        if validity.valid != (gap >= 0):
            result.failures.append(f"sample {index}: is_qcm={validity.valid}, gap {gap:.3g}")
    return result


def symplectic_vs_ordinary(rng, count, tol, config):
    result = CaseResult('symplectic_vs_ordinary')
    for index in range(count):
        dim = 2 * int(rng.integers(1, 11))
        A = _random_spd(rng, dim)
        nu_sq, product = sympl_vs_ordinary_check(A, tol)
        result.samples += 1
        if nu_sq < product - tol.alg * np.linalg.norm(A, 2) ** 2:
            result.failures.append(f"sample {index}: ν₁² = {nu_sq:.6g} < λ₁λ₂ = {product:.6g}")
    return result


def isotropic_threshold(rng, count, tol, config):
    """ν·tmsv(r) is separable exactly when ν ≥ e^{2r}"""
    result = CaseResult('isotropic_threshold')
    side = max(2, int(np.sqrt(count)))
    for nu in np.linspace(1.0, 3.0, side):
        for r in np.linspace(0.0, 1.0, side):
            threshold = np.exp(2 * r)
            if abs(nu - threshold) <= 1e-6 * threshold:
                result.skipped += 1
                continue
            V = QCM(nu * tmsv(r).mat, ModeLayout(1, 1))
            cert = separability_isotropic(V, tol, config)
            result.samples += 1
            _check_cert(result, V, cert, tol, f"ν={nu:.3f}, r={r:.3f}")
            if cert.verdict != Verdict.INCONCLUSIVE and cert.separable != (nu > threshold):
                result.failures.append(f"ν={nu:.3f}, r={r:.3f}: {cert.verdict.value}")
    return result


def localization(rng, count, tol, config):
    result = CaseResult('localization')
    for index in range(count):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(1, 3))
        V = symmetrize_modes(random_qcm(rng, ModeLayout(m, n), nu_max=3.0, squeeze_max=0.8))
        blocks = detect_mono_symmetry(V)
        result.samples += 1
        if not blocks.detected:
            result.failures.append(f"sample {index}: symmetrized state not detected")
            continue
        local = localize(V, blocks)
        if local.residual > tol.alg * V.norm():
            result.failures.append(f"sample {index}: localization residual {local.residual:.3g}")
        lifted = separability_mono_symmetric(V, tol, config)
        _check_cert(result, V, lifted, tol, f"sample {index}")
        direct = separability_general(V, config, tol)
        decided = Verdict.INCONCLUSIVE not in (lifted.verdict, direct.verdict)
        if decided and lifted.verdict != direct.verdict:
            result.failures.append(
                f"sample {index}: localized {lifted.verdict.value}, engine {direct.verdict.value}"
            )
    return result


def pt_invariant(rng, count, tol, config):
    result = CaseResult('pt_invariant')
    for index in range(count):
        m, n = (int(k) for k in rng.integers(1, 3, size=2))
        V = random_qcm(rng, ModeLayout(m, n), nu_max=3.0, squeeze_max=0.5)
        if not is_ppt(V, tol).ppt:
            result.skipped += 1
            continue
        W = pt_average(V)
        cert = separability_pt_invariant(W, tol, config)
        result.samples += 1
        if not cert.separable:
            result.failures.append(f"sample {index}: {cert.verdict.value}")
            continue
        _check_cert(result, W, cert, tol, f"sample {index}")
        if cert.details['imaginary_residue'] > tol.alg * W.norm():
            result.failures.append(
                f"sample {index}: imaginary residue {cert.details['imaginary_residue']:.3g}"
            )
    return result


def passive_orbits(rng, count, tol, config, orbit=50):
    result = CaseResult('passive_orbits')
    for index in range(count):
        modes = int(rng.integers(2, 5))
        m = int(rng.integers(1, modes))
        V = random_qcm(rng, ModeLayout(m, modes - m), nu_max=3.0)
        base = absolute_separability(V, tol)
        result.samples += 1
        for trial in range(max(1, orbit)):
            moved = passive_congruence(V, random_passive(rng, modes))
            cert = absolute_separability(moved, tol)
            if cert.verdict != base.verdict:
                result.failures.append(f"sample {index}, trial {trial}: verdict changed")
                break
            if cert.absolutely_separable and not abs_cert_is_valid(moved, cert, tol):
                result.failures.append(f"sample {index}, trial {trial}: certificate rejected")
                break
    for r in (0.1, 0.5, 1.0):
        if absolute_separability(tmsv(r), tol).absolutely_separable:
            result.failures.append(f"tmsv({r}) reported absolutely separable")
    return result


def williamson_roundtrip(rng, count, tol, config):
    result = CaseResult('williamson_roundtrip')
    for index in range(count):
        modes = int(rng.integers(1, 9))
        layout = ModeLayout(modes)
        planted = np.sort(rng.uniform(1.0, 4.0, size=modes))[::-1]
        V = random_qcm(rng, layout, squeeze_max=0.5)
        decomposition = williamson(V, tol)
        V = QCM(decomposition.with_spectrum(planted), layout)
        decomposition = williamson(V, tol)
        scale = max(1.0, V.norm())
        result.samples += 1
        if decomposition.symplectic_residual(layout) > tol.alg * scale:
            result.failures.append(f"sample {index}: symplectic residual too large")
        if decomposition.diagonalization_residual(V.mat) > tol.alg * scale:
            result.failures.append(f"sample {index}: diagonalization residual too large")
        if np.max(np.abs(symplectic_spectrum(V, tol) - planted)) > tol.alg * scale:
            result.failures.append(f"sample {index}: planted spectrum not recovered")
    return result


# full sample counts; the runner multiplies them by `scale`
CASES = {
    'one_vs_n_equivalence': (one_vs_n_equivalence, 2000),
    'certificate_soundness': (certificate_soundness, 500),
    'mean_identity': (mean_identity, 1000),
    'heisenberg_biconditional': (heisenberg_biconditional, 1000),
    'symplectic_vs_ordinary': (symplectic_vs_ordinary, 10000),
    'isotropic_threshold': (isotropic_threshold, 400),
    'localization': (localization, 500),
    'pt_invariant': (pt_invariant, 200),
    'passive_orbits': (passive_orbits, 500),
    'williamson_roundtrip': (williamson_roundtrip, 1000),
}


def run_case(name, seed, count, tol=None, config=None):
    tol = resolve_tolerances(tol)
    config = settings.solver if config is None else config
    func, _ = CASES[name]
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    try:
        result = func(rng, count, tol, config)
    except GaussepError as error:
        logger.exception("Case %s aborted", name)
        result = CaseResult(name, failures=[f"aborted: {error}"])
    result.seconds = time.perf_counter() - start
    return result


def run_suite(seed=0, scale=0.05, workers=1, cases=None, tol=None, config=None):
    names = list(CASES) if cases is None else list(cases)
    unknown = [name for name in names if name not in CASES]
    if unknown:
        raise KeyError(f"Unknown suite case(s): {', '.join(unknown)}")
    children = np.random.SeedSequence(seed).spawn(len(CASES))
    seeds = dict(zip(CASES, children))

    def run(name):
        count = max(1, int(round(CASES[name][1] * scale)))
        logger.info("Running %s on %d samples", name, count)
        return run_case(name, seeds[name], count, tol, config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, names))
    else:
        results = [run(name) for name in names]
    return SuiteReport(seed, scale, results)

"""Pick the cheapest exact separability route for a state

Order: PT-invariant, mono-symmetric (either party), isotropic, one mode on
a side, general engine. The general engine stays authoritative: forcing it
with engine="general" skips every fast path.
"""
import logging

from gaussep.exceptions import DomainError
from gaussep.separability import (
    as_modewise, separability_1vn, separability_general, trivial_cert
)
from gaussep.settings import resolve_tolerances
from gaussep.structure import (
    detect_mono_symmetry, is_isotropic, is_pt_invariant, separability_isotropic,
    separability_mono_symmetric, separability_pt_invariant
)

logger = logging.getLogger(__name__)

ENGINES = ('auto', 'general', 'pt_invariant', 'mono_symmetric', 'isotropic', '1vn')


def _swapped_back(cert, layout):
    cert.layout = layout
    cert.group_sizes = [layout.m, layout.n]
    cert.gammas = cert.gammas[::-1]
    return cert


def _mono_symmetric_party(V):
    if V.layout.m >= 2 and detect_mono_symmetry(V).detected:
        return 'A'
    if V.layout.n >= 2 and detect_mono_symmetry(V.swap_parties()).detected:
        return 'B'
    return None


def _mono_symmetric_route(V, tol, config):
    party = _mono_symmetric_party(V)
    if party is None:
        raise DomainError("State is not mono-symmetric on either party")
    if party == 'A':
        return separability_mono_symmetric(V, tol, config)
    cert = separability_mono_symmetric(V.swap_parties(), tol, config)
    return _swapped_back(cert, V.layout)


def applicable_routes(V, tol=None):
    """Every fast path whose precondition holds for V, in routing order"""
    V = as_modewise(V)
    layout = V.layout
    routes = []
    if is_pt_invariant(V, tol):
        routes.append('pt_invariant')
    if _mono_symmetric_party(V) is not None:
        routes.append('mono_symmetric')
    if is_isotropic(V):
        routes.append('isotropic')
    if layout.m == 1 or layout.n == 1:
        routes.append('1vn')
    return routes


def decide_separability(V, engine='auto', tol=None, config=None):
    tol = resolve_tolerances(tol)
    if engine not in ENGINES:
        raise DomainError(f"Unknown engine '{engine}', expected one of {', '.join(ENGINES)}")
    V = as_modewise(V)
    if V.layout.m == 0 or V.layout.n == 0:
        return trivial_cert(V, "single_party", tol)

    if engine == 'general':
        return separability_general(V, config, tol)
    if engine == 'auto':
        routes = applicable_routes(V, tol)
        engine = routes[0] if routes else 'general'
        logger.debug("Routing %r through %s (applicable: %s)", V, engine, routes or 'none')

    if engine == 'pt_invariant':
        return separability_pt_invariant(V, tol, config)
    if engine == 'mono_symmetric':
        return _mono_symmetric_route(V, tol, config)
    if engine == 'isotropic':
        return separability_isotropic(V, tol, config)
    if engine == '1vn':
        return separability_1vn(V, tol, config)
    return separability_general(V, config, tol)

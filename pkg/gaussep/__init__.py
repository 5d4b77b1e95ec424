__version__ = '0.3.0'

import sys

from gaussep.exceptions import (
    ConditioningError, ConfigError, DomainError, FileFormatError, GaussepError,
    UnsupportedVersionError, UsageError
)
from gaussep.settings import settings
from gaussep.symplectic import (
    ModeLayout, Ordering, QCM, direct_sum, is_ppt, is_pure, is_qcm, omega, partial_transpose,
    random_qcm, symplectic_spectrum, thermal, tmsv, vacuum, williamson
)
from gaussep.separability import (
    SeparabilityCert, Verdict, full_separability, separability_1vn, separability_general,
    upper_bound, validate_certificate
)
from gaussep.structure import (
    localize, separability_isotropic, separability_mono_symmetric, separability_pt_invariant
)
from gaussep.passive import absolute_separability, passive_from_unitary, passive_orbit_check
from gaussep.routing import decide_separability
from gaussep.io import load_certificate, load_qcm, revalidate, save_certificate, save_qcm


def run_app():
    from gaussep.cli import cli_dispatch
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == '__main__':
    run_app()

import time
from dataclasses import dataclass

import pytest

from yamabe_clusters.core import params_from_D


@dataclass
class PsiCase:
    params: object
    psi: object
    constants: object
    seconds: float


@pytest.fixture(scope="session")
def psi_case_n5():
    """The n = 5, D = 2 boundary-layer solve and f constants, built once per session."""
    from yamabe_clusters.correction import f_constants, psi_mode_solve

    t0 = time.perf_counter()
    p = params_from_D(5, 2.0)
    psi = psi_mode_solve(p)
    fc = f_constants(p, psi=psi)
    return PsiCase(p, psi, fc, time.perf_counter() - t0)

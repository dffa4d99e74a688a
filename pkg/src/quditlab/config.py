"""Tolerance constants and backend selection."""

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-9
    hermitian: float = 1e-10
    normalization: float = 1e-12
    psd: float = 1e-9
    commute: float = 1e-9
    amplitude: float = 1e-12
    probability: float = 1e-9
    sdp_gap: float = 1e-8
    sdp_feas: float = 1e-9
    certificate: float = 1e-6


TOL = Tolerances()


def jit_enabled():
    """True unless QUDITLAB_JIT is set to 0/false/no or numba is missing."""
    flag = os.environ.get("QUDITLAB_JIT", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def worker_count():
    """Pool size for sweeps, from QUDITLAB_WORKERS (default 1)."""
    try:
        return max(1, int(os.environ.get("QUDITLAB_WORKERS", "1")))
    except ValueError:
        return 1

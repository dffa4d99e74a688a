"""Key rates of the entanglement-based d-dimensional BB84 protocol.

Alice and Bob measure in the computational or Fourier basis and keep the
matched-basis rounds, so every rate carries a sifting factor 1/2. The error
model is isotropic: a fraction F of sifted rounds agree and the errors are
spread evenly over the other d - 1 outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .correlations import CorrelationTable
from .errors import InvalidInput

SIFTING = 0.5
ATTACKS = ("individual", "coherent")


@dataclass(frozen=True)
class KeyRateResult:
    d: int
    F: float
    qber: float
    I_AB: float
    I_AE: float
    R_sk: float
    attack: str

    def to_json(self):
        return {"d": self.d, "F": self.F, "qber": self.qber, "I_AB": self.I_AB, "I_AE": self.I_AE,
                "R_sk": self.R_sk, "attack": self.attack}


def _check(F, d):
    if int(d) != d or d < 2:
        raise InvalidInput(f"d must be an integer >= 2, got {d}")
    if not 0 < F <= 1:
        raise InvalidInput(f"F must lie in (0, 1], got {F}")


def _xlog2(x):
    return x * np.log2(x) if x > 0 else 0.0


def _info(F, d):
    # log2 d + F log2 F + (1 - F) log2((1 - F)/(d - 1)), with 0 log 0 = 0
    e = 1.0 - F
    val = np.log2(d) + _xlog2(F) + (_xlog2(e) - e * np.log2(d - 1) if e > 0 else 0.0)
    return float(max(val, 0.0))


def mutual_information(F, d) -> float:
    """Alice-Bob mutual information in bits for matched-basis fidelity F."""
    _check(F, d)
    return _info(F, d)


def eve_fidelity(F, d) -> float:
    """Eve's guessing fidelity under the optimal symmetric individual attack.

    The attack is the phase-covariant cloner that leaves Bob with fidelity F in
    both bases; Eve's copy then has F/d + (d-1)(1-F)/d + 2 sqrt((d-1)F(1-F))/d.
    """
    _check(F, d)
    return float(F / d + (d - 1) * (1 - F) / d + 2 / d * np.sqrt((d - 1) * F * (1 - F)))


def eve_information(F, d, attack="individual") -> float:
    if attack == "individual":
        if F < 1 / d:
            return float(np.log2(d))
        return _info(min(1.0, eve_fidelity(F, d)), d)
    if attack == "coherent":
        # the coherent bound leaves Alice-Bob with I_AB - (log2 d - I_AB)
        return float(np.log2(d) - mutual_information(F, d))
    raise InvalidInput(f"unknown attack {attack!r}; expected one of {ATTACKS}")


def key_rate(F, d, attack="individual") -> KeyRateResult:
    """R_sk = (I_AB - I_AE) / 2 bits per coincidence."""
    _check(F, d)
    iab = mutual_information(F, d)
    iae = eve_information(F, d, attack)
    return KeyRateResult(int(d), float(F), float(1 - F), iab, iae, SIFTING * (iab - iae), attack)


def qber_threshold(d, attack="individual") -> float:
    """QBER in percent at which R_sk crosses zero."""
    if attack not in ATTACKS:
        raise InvalidInput(f"unknown attack {attack!r}; expected one of {ATTACKS}")
    f = lambda F: key_rate(F, d, attack).R_sk
    F0 = brentq(f, 1 / d + 1e-9, 1 - 1e-12, xtol=1e-14)
    return 100 * (1 - F0)


def fidelity_from_table(table: CorrelationTable) -> float:
    """Average matched-basis agreement sum_a p(aa|xx) over the shared settings."""
    m = min(table.settings)
    return float(np.mean([np.trace(table.p[:, :, x, x]) for x in range(m)]))

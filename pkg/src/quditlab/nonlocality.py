"""Bell functionals for two settings and d outcomes per party.

Every functional is linear in p(ab|xy), so each is stored as a real weight
tensor W[a, b, x, y] with value = sum W * p. The same tensors feed the
deterministic-strategy enumeration that certifies classical bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import basis_from_vectors, entangled_state, maximally_entangled
from .correlations import CorrelationTable, born_probabilities, bootstrap_errors
from .errors import DegenerateBounds, InvalidDimension, InvalidTable, TrivialRegime

THETA = (0.25, 0.75)
ZETA = (0.5, 1.0)


@dataclass(frozen=True)
class BellResult:
    value: float
    classical_bound: float
    tsirelson: float
    relative_violation: float
    std: float | None = None
    name: str = ""

    def to_json(self):
        return {
            "inequality": self.name,
            "value": self.value,
            "classical_bound": self.classical_bound,
            "tsirelson": self.tsirelson,
            "relative_violation": self.relative_violation,
            "std": self.std,
        }


@dataclass(frozen=True)
class BellMeasurementSettings:
    d: int
    theta_x: tuple
    zeta_y: tuple
    a_l: np.ndarray
    alpha_k: np.ndarray
    beta_k: np.ndarray


def _check_d(d):
    if int(d) != d or d < 2:
        raise InvalidDimension(f"d must be an integer >= 2, got {d}")
    return int(d)


def _g(x, d):
    return 1.0 / np.tan(np.pi * (x + 0.25) / d)


def satwap_settings(d) -> BellMeasurementSettings:
    d = _check_d(d)
    ell = np.arange(1, d)
    omega = np.exp(2j * np.pi / d)
    a_l = omega ** ((2 * ell - d) / 8) / np.sqrt(2)
    k = np.arange(d // 2)
    t = (-1) ** d * np.tan(np.pi / (4 * d))
    alpha = (_g(k, d) + t) / (2 * d)
    beta = (_g(k + 0.5, d) - t) / (2 * d)
    return BellMeasurementSettings(d, THETA, ZETA, a_l, alpha, beta)


def satwap_bases(d):
    """Optimal projective bases: (alice[0], alice[1]), (bob[0], bob[1])."""
    d = _check_d(d)
    k = np.arange(d)
    alice = []
    for th in THETA:
        vecs = np.exp(2j * np.pi * np.outer(k - th, k) / d) / np.sqrt(d)  # row a
        alice.append(basis_from_vectors(vecs))
    bob = []
    for ze in ZETA:
        vecs = np.exp(2j * np.pi * np.outer(-k + ze, k) / d) / np.sqrt(d)  # row b
        bob.append(basis_from_vectors(vecs))
    return tuple(alice), tuple(bob)


def satwap_classical_bound(d):
    d = _check_d(d)
    return 0.5 * (3 / np.tan(np.pi / (4 * d)) - 1 / np.tan(3 * np.pi / (4 * d))) - 2


def satwap_quantum_max(d):
    return 2.0 * _check_d(d) - 2


@lru_cache(maxsize=None)
def _satwap_weights(d):
    s = satwap_settings(d)
    omega = np.exp(2j * np.pi / d)
    diff = np.subtract.outer(np.arange(d), np.arange(d))  # a - b
    W = np.zeros((d, d, 2, 2))
    for i, ell in enumerate(range(1, d)):
        # <A^l B^(d-l)> = sum_ab omega^(l (a - b)) p(ab)
        base = omega ** (ell * diff)
        a = s.a_l[i]
        W[:, :, 0, 0] += np.real(a * base)
        W[:, :, 0, 1] += np.real(np.conj(a) * omega**ell * base)
        W[:, :, 1, 1] += np.real(a * base)
        W[:, :, 1, 0] += np.real(np.conj(a) * base)
    W.flags.writeable = False
    return W


def satwap_weights(d):
    """Weight tensor of the correlator-form SATWAP expression."""
    return _satwap_weights(_check_d(d))


def _diff_weight(d, x, y, alice_minus_bob, shift):
    """Indicator of A_x = B_y + shift (alice_minus_bob) or B_y = A_x + shift."""
    W = np.zeros((d, d, 2, 2))
    a, b = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    diff = (a - b) if alice_minus_bob else (b - a)
    W[:, :, x, y] = (np.mod(diff - shift, d) == 0).astype(float)
    return W


def pq_weights(d, k):
    """Weight tensors of P_k and Q_k."""
    P = (_diff_weight(d, 0, 0, True, k) + _diff_weight(d, 1, 0, False, k)
         + _diff_weight(d, 1, 1, True, k) + _diff_weight(d, 0, 1, False, k + 1))
    Q = (_diff_weight(d, 0, 0, True, -k - 1) + _diff_weight(d, 1, 0, False, -k - 1)
         + _diff_weight(d, 1, 1, True, -k - 1) + _diff_weight(d, 0, 1, False, -k))
    return P, Q


def probability_form_weights(d, alpha, beta):
    W = np.zeros((d, d, 2, 2))
    for k, (a, b) in enumerate(zip(alpha, beta)):
        P, Q = pq_weights(d, k)
        W += a * P - b * Q
    return W


@lru_cache(maxsize=None)
def _cglmp_weights(d):
    k = np.arange(d // 2)
    c = 1 - 2 * k / (d - 1)
    W = probability_form_weights(d, c, c)
    W.flags.writeable = False
    return W


def cglmp_weights(d):
    return _cglmp_weights(_check_d(d))


def qutrit_family_weights(xi):
    P, Q = pq_weights(3, 0)
    return P - xi * Q


def evaluate(weights, table: CorrelationTable) -> float:
    return float(np.sum(weights * table.p))


def _check_table(table: CorrelationTable, d=None):
    if table.settings != (2, 2):
        raise InvalidTable(f"expected 2x2 settings, got {table.settings}")
    if table.d < 2:
        raise InvalidTable("need at least two outcomes")
    if d is not None and table.d != d:
        raise InvalidDimension(f"expected d={d} outcomes, got {table.d}")


def _with_errors(table, fn, errors, resamples, seed):
    if not errors or table.counts is None:
        return None
    return bootstrap_errors(table, fn, resamples=resamples, seed=seed)[1]


def relative_violation(result: BellResult) -> float:
    """(value - C) / (Q - C)."""
    span = result.tsirelson - result.classical_bound
    if not np.isfinite(span) or span <= 0:
        raise DegenerateBounds("tsirelson value must exceed the classical bound")
    return (result.value - result.classical_bound) / span


def _result(name, value, c, q, std):
    rel = (value - c) / (q - c) if np.isfinite(q) and q > c else float("nan")
    return BellResult(float(value), float(c), float(q), float(rel), std, name)


def satwap_value(table: CorrelationTable, errors=False, resamples=200, seed=0) -> BellResult:
    """Correlator-form SATWAP value with classical bound and 2d - 2 maximum."""
    _check_table(table)
    d = table.d
    W = satwap_weights(d)
    std = _with_errors(table, lambda t: evaluate(W, t), errors, resamples, seed)
    return _result("satwap", evaluate(W, table), satwap_classical_bound(d), satwap_quantum_max(d), std)


def satwap_probability_form(table: CorrelationTable) -> float:
    """sum_k alpha_k P_k - beta_k Q_k with the SATWAP coefficients."""
    _check_table(table)
    s = satwap_settings(table.d)
    return evaluate(probability_form_weights(table.d, s.alpha_k, s.beta_k), table)


@lru_cache(maxsize=None)
def cglmp_reference_value(d):
    """CGLMP value of |psi+_d> measured in the SATWAP bases."""
    return evaluate(cglmp_weights(d), ideal_table(d))


def cglmp_value(table: CorrelationTable, errors=False, resamples=200, seed=0) -> BellResult:
    """CGLMP value; bound 2, reference value from the maximally entangled state."""
    _check_table(table)
    d = table.d
    W = cglmp_weights(d)
    std = _with_errors(table, lambda t: evaluate(W, t), errors, resamples, seed)
    return _result("cglmp", evaluate(W, table), 2.0, cglmp_reference_value(d), std)


def qutrit_classical_bound(xi):
    """Local deterministic maximum of P_0 - xi Q_0 (continuous in xi)."""
    if xi <= -1:
        return -4.0 * xi
    if xi <= 1:
        return 3.0 - xi
    return 2.0


def qutrit_family_max(xi):
    """(gamma_plus, I_max) of the optimal partially entangled qutrit state."""
    if xi <= -1:
        raise TrivialRegime("for xi <= -1 the family is not violated by quantum states")
    gamma = (np.sqrt(4 * xi**2 + 4 * xi + 25) - 2 * xi - 1) / (2 * np.sqrt(3))
    imax = (5 - 2 * xi + np.sqrt(25 + 4 * (xi + 1) * xi)) / 3
    return float(gamma), float(imax)


def qutrit_family_closed_form(xi, gamma):
    """Value of the family on (|00> + g|11> + |22>)/norm in the SATWAP bases."""
    return 4 * (3 + gamma * (2 * np.sqrt(3) + gamma - xi * gamma)) / (3 * (2 + gamma**2))


def qutrit_family_value(table: CorrelationTable, xi, errors=False, resamples=200, seed=0) -> BellResult:
    """I_3(xi) = P_0 - xi Q_0 on a qutrit table."""
    if table.d != 3:
        raise InvalidDimension(f"qutrit family needs d=3, got {table.d}")
    _check_table(table, 3)
    W = qutrit_family_weights(xi)
    std = _with_errors(table, lambda t: evaluate(W, t), errors, resamples, seed)
    q = qutrit_family_max(xi)[1] if xi > -1 else float("nan")
    return _result("qutrit", evaluate(W, table), qutrit_classical_bound(xi), q, std)


def lhv_bound(weights, use_jit=None) -> float:
    """Maximum over deterministic local strategies."""
    w = np.ascontiguousarray(np.asarray(weights, dtype=float))
    return float(_kernels.kernel("lhv_max", use_jit)(w))


def partially_entangled_qutrit(gamma):
    return entangled_state([1.0, gamma, 1.0])


def ideal_table(d, state=None) -> CorrelationTable:
    """Exact table of `state` (default |psi+_d>) in the SATWAP bases."""
    alice, bob = satwap_bases(d)
    state = maximally_entangled(d) if state is None else state
    return born_probabilities(state, alice, bob)

import numpy as np
import pytest

from quditlab.core import maximally_entangled, werner
from quditlab.correlations import CorrelationTable, born_probabilities, deterministic_table, mix_tables, sample_counts, uniform_table
from quditlab.errors import DegenerateBounds, InvalidDimension, InvalidTable, TrivialRegime
from quditlab.nonlocality import (
    BellResult, cglmp_value, cglmp_weights, evaluate, ideal_table, lhv_bound, partially_entangled_qutrit,
    probability_form_weights, qutrit_classical_bound, qutrit_family_closed_form, qutrit_family_max,
    qutrit_family_value, qutrit_family_weights, relative_violation, satwap_bases, satwap_classical_bound,
    satwap_probability_form, satwap_settings, satwap_value, satwap_weights,
)

# I_d = Ctilde_d / d + w_d, fitted on 100 random tables (seed 0) and frozen
AFFINE_OFFSET = {2: 1.414213562373095, 3: 0.48803387171258517, 4: 0.5994561836898296, 5: 0.3366462238701857,
                 6: 0.37721749919579906, 7: 0.25352201717139655, 8: 0.2746228508392914}
TABLE_BOUNDS = {2: 1.414, 3: 3.098, 4: 4.793, 5: 6.489, 6: 8.187, 7: 9.884, 8: 11.581}
CGLMP_IDEAL = {2: 2.828, 3: 2.873, 4: 2.896, 5: 2.910, 6: 2.920, 7: 2.927, 8: 2.932}


def random_table(rng, d):
    p = rng.random((d, d, 2, 2))
    return CorrelationTable(p / p.sum(axis=(0, 1), keepdims=True))


@pytest.mark.parametrize("d", range(2, 9))
def test_bases_orthonormal(d):
    for basis in sum(satwap_bases(d), ()):
        v = basis.vectors
        assert np.allclose(v @ v.conj().T, np.eye(d), atol=1e-12)
    s = satwap_settings(d)
    assert np.allclose(np.abs(s.a_l), 1 / np.sqrt(2))


@pytest.mark.parametrize("d", range(2, 9))
def test_quantum_saturation(d):
    r = satwap_value(ideal_table(d))
    assert r.value == pytest.approx(2 * d - 2, abs=1e-8)
    assert r.tsirelson == 2 * d - 2
    assert r.classical_bound == pytest.approx(TABLE_BOUNDS[d], abs=5e-4)
    assert r.relative_violation == pytest.approx(1)


@pytest.mark.parametrize("d", range(2, 9))
def test_cglmp_reference_values(d):
    r = cglmp_value(ideal_table(d))
    assert r.value == pytest.approx(CGLMP_IDEAL[d], abs=1e-3)
    assert r.classical_bound == 2.0


def test_uniform_table_zero():
    for d in (2, 3, 5):
        assert abs(satwap_value(uniform_table(d)).value) < 1e-12


def test_werner_linearity_oracle():
    alice, bob = satwap_bases(2)
    t = born_probabilities(werner(maximally_entangled(2), 0.95), alice, bob)
    assert satwap_value(t).value == pytest.approx(0.95 * 2, abs=1e-12)


def test_linearity(rng):
    for d in (2, 4):
        t1, t2 = random_table(rng, d), random_table(rng, d)
        v = 0.37
        lhs = satwap_value(mix_tables(v, t1, t2)).value
        assert lhs == pytest.approx(v * satwap_value(t1).value + (1 - v) * satwap_value(t2).value, abs=1e-12)


@pytest.mark.parametrize("d", range(2, 9))
def test_probability_form_affine(rng, d):
    tables = [random_table(rng, d) for _ in range(100)]
    x = np.array([satwap_value(t).value for t in tables])
    y = np.array([satwap_probability_form(t) for t in tables])
    M = np.c_[x, np.ones_like(x)]
    (u, w), *_ = np.linalg.lstsq(M, y, rcond=None)
    assert np.max(np.abs(M @ [u, w] - y)) < 1e-9
    assert u == pytest.approx(1 / d, abs=1e-10)
    assert w == pytest.approx(AFFINE_OFFSET[d], abs=1e-9)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_probability_form_flat_table(d):
    s = satwap_settings(d)
    expect = np.sum(np.asarray(s.alpha_k) - np.asarray(s.beta_k)) * 4 / d
    assert satwap_probability_form(uniform_table(d)) == pytest.approx(expect, abs=1e-12)


def test_qutrit_family_affine_to_satwap(rng):
    xi = (np.sqrt(3) - 1) / 2
    tables = [random_table(rng, 3) for _ in range(100)]
    x = np.array([satwap_value(t).value for t in tables])
    y = np.array([qutrit_family_value(t, xi).value for t in tables])
    M = np.c_[x, np.ones_like(x)]
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    assert np.max(np.abs(M @ coef - y)) < 1e-9
    assert coef == pytest.approx([0.5773502691896258, 0.8452994616207485], abs=1e-9)


@pytest.mark.parametrize("d", [2, 3])
def test_lhv_bounds_small_d(d):
    assert lhv_bound(satwap_weights(d)) == pytest.approx(satwap_classical_bound(d), abs=1e-9)
    assert lhv_bound(cglmp_weights(d)) == pytest.approx(2.0, abs=1e-9)


def test_lhv_deterministic_d2():
    s = satwap_settings(2)
    W = probability_form_weights(2, s.alpha_k, s.beta_k)
    best = max(evaluate(W, deterministic_table(2, [a0, a1], [b0, b1]))
               for a0 in range(2) for a1 in range(2) for b0 in range(2) for b1 in range(2))
    assert best == pytest.approx(lhv_bound(W))
    assert best == pytest.approx(satwap_classical_bound(2) / 2 + AFFINE_OFFSET[2], abs=1e-9)


def test_lhv_backends_agree():
    W = satwap_weights(5)
    assert lhv_bound(W, use_jit=False) == pytest.approx(lhv_bound(W, use_jit=True), abs=1e-12)


@pytest.mark.parametrize("xi", np.linspace(-3, 3, 13))
def test_qutrit_classical_bound_enumeration(xi):
    assert qutrit_classical_bound(xi) == pytest.approx(lhv_bound(qutrit_family_weights(xi)), abs=1e-9)


@pytest.mark.parametrize("xi, gamma, value", [
    (1.0, 0.7923, 2.9149), ((np.sqrt(3) - 1) / 2, 1.0, 3.1547), (0.6451, 0.9, 3.0392)])
def test_qutrit_family_values(xi, gamma, value):
    table = ideal_table(3, partially_entangled_qutrit(gamma))
    r = qutrit_family_value(table, xi)
    assert r.value == pytest.approx(value, abs=1e-4)
    assert r.value == pytest.approx(qutrit_family_closed_form(xi, gamma), abs=1e-10)


def test_qutrit_family_max():
    g, imax = qutrit_family_max(1.0)
    assert g == pytest.approx((np.sqrt(11) - np.sqrt(3)) / 2, abs=1e-12)
    assert imax == pytest.approx(qutrit_family_closed_form(1.0, g), abs=1e-12)
    assert qutrit_family_max((np.sqrt(3) - 1) / 2)[0] == pytest.approx(1.0, abs=1e-12)
    g, _ = qutrit_family_max(0.6451)
    assert g == pytest.approx(0.9, abs=1e-3)
    grid = np.linspace(0.01, 3, 30001)
    assert grid[np.argmax(qutrit_family_closed_form(0.6451, grid))] == pytest.approx(g, abs=1e-3)
    with pytest.raises(TrivialRegime):
        qutrit_family_max(-1.0)


def test_relative_violation():
    r = BellResult(3.978, 3.098, 4.0, 0.0)
    assert relative_violation(r) == pytest.approx(0.976, abs=5e-4)
    assert relative_violation(BellResult(3.098, 3.098, 4.0, 0.0)) == 0
    assert relative_violation(BellResult(4.0, 3.098, 4.0, 0.0)) == 1
    with pytest.raises(DegenerateBounds):
        relative_violation(BellResult(1.0, 2.0, 2.0, 0.0))


def test_errors():
    with pytest.raises(InvalidDimension):
        satwap_bases(1)
    with pytest.raises(InvalidTable):
        satwap_value(uniform_table(3, 3, 2))
    with pytest.raises(InvalidDimension):
        qutrit_family_value(uniform_table(4), 1.0)


def test_bootstrap_error_reported():
    r = satwap_value(sample_counts(ideal_table(2), 10**4, seed=0), errors=True, resamples=200)
    assert r.std == pytest.approx(0.01, rel=0.3)
    assert satwap_value(ideal_table(2), errors=True).std is None

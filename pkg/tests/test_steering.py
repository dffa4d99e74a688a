import numpy as np
import pytest

from quditlab.core import DensityMatrix, computational_basis, maximally_entangled, partial_trace, werner
from quditlab.errors import DimMismatch, Infeasible, InvalidDimension, InvalidInput, InvalidTable
from quditlab.reference import load
from quditlab.steering import (
    Assemblage, alice_default_bases, explicit_eve_strategy, lhs_bound, lhs_bound_check, local_randomness,
    random_basis, random_separable_state, steered_assemblage, steering_bases, steering_value,
)

LHS_TABLE = {2: 1.707, 4: 1.5, 6: 1.408, 8: 1.354, 10: 1.316, 12: 1.289, 14: 1.267, 15: 1.258}


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_bases_mutually_unbiased(d):
    z, f = steering_bases(d)
    overlaps = np.abs(z.vectors.conj() @ f.vectors.T) ** 2
    assert np.allclose(overlaps, 1 / d, atol=1e-12)


def test_fourier_projectors_d4():
    _, f = steering_bases(4)
    for l in range(4):
        v = np.exp(-2j * np.pi * np.arange(4) * l / 4) / 2
        assert np.allclose(f.projectors[l], np.outer(v, v.conj()), atol=1e-12)


def test_d2_fourier_is_plus_minus():
    _, f = steering_bases(2)
    assert np.allclose(f.projectors[0], np.full((2, 2), 0.5))
    assert np.allclose(f.projectors[1], [[0.5, -0.5], [-0.5, 0.5]])


def test_assemblage_partial_trace_oracle():
    d = 3
    rho = maximally_entangled(d).density()
    z = computational_basis(d)
    a = steered_assemblage(rho, [z, z])
    for k in range(d):
        M = np.kron(z.projectors[k], np.eye(d))
        oracle = partial_trace(DensityMatrix(d * d, M @ rho.matrix), "A", (d, d)).matrix
        assert np.allclose(a.sigma[0, k], oracle, atol=1e-12)
        assert np.allclose(a.sigma[0, k], z.projectors[k].T / d, atol=1e-12)
    a.validate()


def test_assemblage_product_state_unsteerable(rng):
    rb = random_separable_state(2, rng, terms=1)
    a = steered_assemblage(rb, alice_default_bases(2))
    rho_b = a.sigma[0].sum(axis=0)
    for x in range(2):
        for s in a.sigma[x]:
            tr = np.trace(s).real
            assert np.allclose(s, tr * rho_b, atol=1e-10)


def test_assemblage_linear_in_visibility():
    psi = maximally_entangled(2)
    bases = alice_default_bases(2)
    s0 = steered_assemblage(werner(psi, 0.0), bases).sigma
    s1 = steered_assemblage(werner(psi, 1.0), bases).sigma
    assert np.allclose(steered_assemblage(werner(psi, 0.9), bases).sigma, 0.9 * s1 + 0.1 * s0, atol=1e-12)
    with pytest.raises(DimMismatch):
        steered_assemblage(werner(maximally_entangled(3), 1.0), bases)


def test_assemblage_validation():
    with pytest.raises(InvalidInput):
        Assemblage(np.zeros((2, 2, 2)))
    sig = np.zeros((2, 2, 2, 2))
    sig[0, 0] = np.diag([1, 0])
    sig[1, 0] = np.diag([0, 1])
    with pytest.raises(InvalidInput):
        Assemblage(sig).validate()


@pytest.mark.parametrize("d", range(2, 16))
def test_ideal_beta(d):
    r = steering_value(steered_assemblage(maximally_entangled(d).density(), alice_default_bases(d)))
    assert r.beta == pytest.approx(2, abs=1e-9)
    assert r.lhs_bound == pytest.approx(1 + 1 / np.sqrt(d))


def test_lhs_bounds_table():
    for d, v in LHS_TABLE.items():
        assert lhs_bound(d) == pytest.approx(v, abs=5e-4)
    with pytest.raises(InvalidDimension):
        lhs_bound(1)


def test_maximally_mixed_and_product():
    for d in (2, 3, 5):
        mixed = DensityMatrix(d * d, np.eye(d * d) / d**2)
        assert steering_value(steered_assemblage(mixed, alice_default_bases(d))).beta == pytest.approx(2 / d)
        v = np.zeros(d * d)
        v[0] = 1
        prod = DensityMatrix(d * d, np.outer(v, v))
        beta = steering_value(steered_assemblage(prod, alice_default_bases(d))).beta
        assert beta == pytest.approx(1 + 1 / d) and beta <= lhs_bound(d)


def test_separable_states_never_exceed(rng):
    states = [random_separable_state(2, rng) for _ in range(10**4)]
    report = lhs_bound_check(states)
    assert report["ok"] and report["max_beta"] <= lhs_bound(2) + 1e-9


def test_separable_states_random_alice_bases(rng):
    for d in (3, 4):
        states = [random_separable_state(d, rng) for _ in range(200)]
        bases = (random_basis(d, rng), random_basis(d, rng))
        assert lhs_bound_check(states, bases)["max_beta"] <= lhs_bound(d) + 1e-9


def test_steering_value_rejects_bad_settings():
    z = computational_basis(2)
    with pytest.raises(InvalidTable):
        steering_value(steered_assemblage(maximally_entangled(2).density(), [z, z, z]))
    with pytest.raises(InvalidInput):
        steering_value("nope")


@pytest.mark.parametrize("d, expect", [(2, 1.0), (3, np.log2(3)), (4, 2.0)])
def test_randomness_ideal(d, expect):
    r = local_randomness(d=d, beta_obs=2.0)
    assert r.min_entropy_bits == pytest.approx(expect, abs=0.02)
    assert r.guessing_probability >= 1 / d - 1e-9


@pytest.mark.parametrize("d", [2, 3])
def test_randomness_at_lhs_bound(d):
    r = local_randomness(d=d, beta_obs=lhs_bound(d))
    assert r.min_entropy_bits == pytest.approx(0, abs=0.02)


@pytest.mark.parametrize("d", [2, 3])
def test_randomness_monotone(d):
    grid = np.linspace(lhs_bound(d), 2, 10)
    h = [local_randomness(d=d, beta_obs=b).min_entropy_bits for b in grid]
    assert all(b >= a - 1e-6 for a, b in zip(h, h[1:]))


def test_randomness_certificate_and_errors():
    r = local_randomness(d=2, beta_obs=1.9)
    c = r.certificate
    assert c["primal_residual"] < 1e-6 and c["dual_residual"] < 1e-6 and c["relative_gap"] < 1e-6
    with pytest.raises(Infeasible):
        local_randomness(d=2, beta_obs=2.5)
    with pytest.raises(InvalidInput):
        local_randomness(d=5, beta_obs=2.0)
    with pytest.raises(InvalidInput):
        local_randomness(d=2)


def test_randomness_from_assemblage():
    a = steered_assemblage(maximally_entangled(2).density(), alice_default_bases(2))
    assert local_randomness(a).min_entropy_bits == pytest.approx(1.0, abs=0.02)


@pytest.mark.parametrize("d", [2, 3])
def test_explicit_eve_strategy_lower_bound(d):
    # any concrete Eve strategy lower-bounds the optimal guessing probability
    for t in np.linspace(0.05, (d - 1) / d, 6):
        a, pg = explicit_eve_strategy(d, t)
        a.validate()
        beta = steering_value(a).beta
        r = local_randomness(d=d, beta_obs=beta, x_star=0)
        assert r.guessing_probability >= pg - 1e-6


@pytest.mark.parametrize("d", [2, 4, 6])
def test_randomness_table_rows(d):
    # the measured steering values map into the tabulated randomness interval
    beta = load("steering").lookup("d", "beta")[d]
    row = {r[0]: r for r in load("randomness_1sdi").rows}[d]
    h = local_randomness(d=d, beta_obs=beta, allow_large=True).min_entropy_bits
    assert row[1] <= h <= row[3]
    if d > 2:
        assert h == pytest.approx(row[2], abs=1e-3)

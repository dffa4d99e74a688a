import numpy as np
import pytest

from quditlab.core import maximally_entangled, werner
from quditlab.correlations import born_probabilities
from quditlab.errors import InvalidInput
from quditlab.qkd import eve_fidelity, eve_information, fidelity_from_table, key_rate, mutual_information, qber_threshold
from quditlab.reference import load
from quditlab.steering import steering_bases


def test_mutual_information_examples():
    assert mutual_information(1.0, 8) == pytest.approx(3.0)
    assert mutual_information(1 / 5, 5) == pytest.approx(0, abs=1e-12)
    assert mutual_information(0.9978, 2) == pytest.approx(0.9774, abs=1e-4)
    with pytest.raises(InvalidInput):
        mutual_information(1.2, 2)
    with pytest.raises(InvalidInput):
        mutual_information(0.9, 1)


@pytest.mark.parametrize("d, rate", [(2, 0.5), (4, 1.0), (8, 1.5), (14, 1.903)])
def test_ideal_rates(d, rate):
    for attack in ("individual", "coherent"):
        # printed to three decimals; log2(14)/2 = 1.90368
        assert key_rate(1.0, d, attack).R_sk == pytest.approx(rate, abs=1e-3)


def test_measured_d2_rate():
    assert key_rate(0.9978, 2, "individual").R_sk == pytest.approx(0.477, abs=0.02)


def test_thresholds_match_table():
    rows = load("qkd").rows
    for d, *_ in rows:
        ref = {r[0]: r for r in rows}[d]
        assert qber_threshold(int(d), "individual") == pytest.approx(ref[6], abs=0.5)
        assert qber_threshold(int(d), "coherent") == pytest.approx(ref[5], abs=0.5)
    assert qber_threshold(8, "coherent") == pytest.approx(24.70, abs=0.01)


def test_coherent_rates_match_measured():
    for d, fid, _, _, _, _, _, _, rate, err in load("qkd").rows:
        assert key_rate(fid / 100, int(d), "coherent").R_sk == pytest.approx(rate, abs=3 * err + 1e-3)


@pytest.mark.parametrize("d", [2, 3, 8])
def test_monotone_in_fidelity(d):
    F = np.linspace(1 / d + 1e-6, 1, 200)
    iab = [mutual_information(f, d) for f in F]
    assert np.all(np.diff(iab) > 0)
    for attack in ("individual", "coherent"):
        r = [key_rate(f, d, attack).R_sk for f in F]
        assert np.all(np.diff(r) >= -1e-12)


def test_eve_bounds():
    for d in (2, 5):
        for F in np.linspace(1 / d, 1, 11):
            fe = eve_fidelity(F, d)
            assert 1 / d - 1e-12 <= fe <= 1 + 1e-12
            assert 0 <= eve_information(F, d) <= np.log2(d) + 1e-12
    assert eve_fidelity(1.0, 3) == pytest.approx(1 / 3)
    with pytest.raises(InvalidInput):
        eve_information(0.9, 2, "collective")
    with pytest.raises(InvalidInput):
        qber_threshold(2, "collective")


def test_fidelity_from_table():
    d = 4
    bases = steering_bases(d)
    t = born_probabilities(werner(maximally_entangled(d), 0.9), [bases[0]], [bases[0]])
    assert fidelity_from_table(t) == pytest.approx(0.9 + 0.1 / d)
    r = key_rate(fidelity_from_table(t), d)
    assert r.qber == pytest.approx(1 - r.F) and set(r.to_json()) >= {"I_AB", "I_AE", "R_sk"}

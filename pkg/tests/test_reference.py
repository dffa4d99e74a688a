import hashlib

import pytest

from quditlab import reference
from quditlab.errors import InvalidInput
from quditlab.reference import DATASETS, compare_with_reference, load


def test_all_datasets_load_with_checksums():
    man = reference.manifest()
    for name in DATASETS:
        ds = load(name)
        assert ds.id == name and ds.sha256 == man[name]
        assert all(len(r) == len(ds.columns) for r in ds.rows)


def test_tampered_file_rejected(monkeypatch):
    raw = reference._raw("table1")
    orig = reference._raw
    monkeypatch.setattr(reference, "_raw", lambda n: raw.replace(b"2.81", b"2.91") if n == "table1" else orig(n))
    with pytest.raises(InvalidInput):
        load("table1")
    assert hashlib.sha256(raw).hexdigest() == reference.manifest()["table1"]


def test_unknown_dataset():
    with pytest.raises(InvalidInput):
        load("nope")
    with pytest.raises(InvalidInput):
        load("table1").column("missing")


def test_compare_modes():
    ds = load("table1")
    res = {"table": "table1", "key": "d", "column": "satwap_ideal", "values": {2: 2.0, 3: 4.0005}}
    ok = compare_with_reference(res, ds, tolerance=1e-3)
    assert ok["passed"] is True and ok["rows"][1]["delta"] == pytest.approx(5e-4)
    bad = compare_with_reference(res, ds, tolerance=1e-4)
    assert bad["passed"] is False and [r["pass"] for r in bad["rows"]] == [True, False]
    note = compare_with_reference(res, ds)
    assert note["passed"] is None and note["rows"][0]["pass"] is None
    with pytest.raises(InvalidInput):
        compare_with_reference(dict(res, table="qkd"), ds)
    with pytest.raises(InvalidInput):
        compare_with_reference(dict(res, values={99: 1.0}), ds)


def test_lookup():
    assert load("steering").lookup("d", "beta_lhs")[15.0] == pytest.approx(1.258)

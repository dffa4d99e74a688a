"""Published reference tables shipped with the package, pinned by checksum."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import InvalidInput

DATASETS = ("table1", "witness", "steering", "randomness_1sdi", "randomness_di", "qkd", "di_qkd",
            "selftest_s1", "selftest_s2")


@dataclass(frozen=True)
class ReferenceDataset:
    id: str
    description: str
    columns: tuple
    rows: tuple
    sha256: str

    def column(self, name):
        if name not in self.columns:
            raise InvalidInput(f"dataset {self.id} has no column {name!r}")
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def lookup(self, key_column, value_column):
        return dict(zip(self.column(key_column).tolist(), self.column(value_column).tolist()))


def _raw(name):
    return resources.files("quditlab").joinpath("data", f"{name}.json").read_bytes()


def manifest():
    return json.loads(_raw("manifest"))


def load(name) -> ReferenceDataset:
    """Load a dataset and check it against the pinned manifest checksum."""
    if name not in DATASETS:
        raise InvalidInput(f"unknown dataset {name!r}; known: {', '.join(DATASETS)}")
    raw = _raw(name)
    digest = hashlib.sha256(raw).hexdigest()
    if digest != manifest()[name]:
        raise InvalidInput(f"checksum mismatch for dataset {name}")
    obj = json.loads(raw)
    return ReferenceDataset(obj["id"], obj["description"], tuple(obj["columns"]),
                            tuple(tuple(r) for r in obj["rows"]), digest)


def compare_with_reference(results, dataset: ReferenceDataset, tolerance=None):
    """Per-row deltas of computed values against one reference column.

    `results` is {"table": id, "key": key column, "column": reference column,
    "values": {key: value}}. Without a tolerance the report only annotates
    deltas and `passed` is None.
    """
    if results.get("table") != dataset.id:
        raise InvalidInput(f"results are for {results.get('table')!r}, dataset is {dataset.id!r}")
    ref = dataset.lookup(results.get("key", "d"), results["column"])
    rows = []
    for key, value in results["values"].items():
        k = float(key)
        if k not in ref:
            raise InvalidInput(f"dataset {dataset.id} has no row {key}")
        delta = float(value) - ref[k]
        ok = None if tolerance is None else bool(abs(delta) <= tolerance)
        rows.append({"key": k, "value": float(value), "reference": ref[k], "delta": delta, "pass": ok})
    passed = None if tolerance is None else all(r["pass"] for r in rows)
    return {"table": dataset.id, "column": results["column"], "tolerance": tolerance, "rows": rows, "passed": passed}

"""Joint outcome statistics p(ab|xy), photon-counting simulation, correlators."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .circuit import NoiseModel
from .config import TOL
from .core import MeasurementBasis, as_density
from .errors import DimMismatch, InvalidIndex, InvalidTable, MissingCounts


@dataclass(frozen=True)
class CorrelationTable:
    """p[a, b, x, y] with optional raw coincidence counts of the same shape."""

    p: np.ndarray
    counts: np.ndarray | None = None
    shots_per_setting: int = 0

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 4 or p.shape[0] != p.shape[1]:
            raise InvalidTable(f"expected p[a,b,x,y] with square outcome axes, got {p.shape}")
        if np.any(p < -TOL.probability):
            raise InvalidTable("negative probabilities")
        sums = p.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1)) > TOL.probability:
            raise InvalidTable("each setting must be normalized")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)
        if self.counts is not None:
            c = np.array(self.counts, dtype=np.int64)
            if c.shape != p.shape:
                raise InvalidTable("counts shape does not match probabilities")
            c.flags.writeable = False
            object.__setattr__(self, "counts", c)

    @property
    def d(self):
        return self.p.shape[0]

    @property
    def settings(self):
        return self.p.shape[2], self.p.shape[3]

    def alice_marginal(self, x, y):
        return self.p[:, :, x, y].sum(axis=1)

    def bob_marginal(self, x, y):
        return self.p[:, :, x, y].sum(axis=0)

    def to_json(self):
        d, (ma, mb) = self.d, self.settings
        return {
            "d": d,
            "mA": ma,
            "mB": mb,
            "p": self.p.tolist(),
            "counts": None if self.counts is None else self.counts.tolist(),
            "shots": int(self.shots_per_setting),
        }

    @classmethod
    def from_json(cls, obj):
        p = np.asarray(obj["p"], float)
        if p.shape != (obj["d"], obj["d"], obj["mA"], obj["mB"]):
            raise InvalidTable("declared sizes do not match p")
        counts = obj.get("counts")
        return cls(p, None if counts is None else np.asarray(counts), int(obj.get("shots", 0)))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["x", "y", "a", "b", "p", "count"])
        d, (ma, mb) = self.d, self.settings
        for x in range(ma):
            for y in range(mb):
                for a in range(d):
                    for b in range(d):
                        c = "" if self.counts is None else int(self.counts[a, b, x, y])
                        w.writerow([x, y, a, b, repr(float(self.p[a, b, x, y])), c])
        return buf.getvalue()


def table_from_counts(counts, shots_per_setting=0) -> CorrelationTable:
    counts = np.asarray(counts, dtype=np.int64)
    tot = counts.sum(axis=(0, 1), keepdims=True)
    if np.any(tot == 0):
        raise InvalidTable("a setting recorded no coincidences")
    return CorrelationTable(counts / tot, counts, shots_per_setting)


def born_probabilities(rho, alice_bases: Sequence[MeasurementBasis], bob_bases: Sequence[MeasurementBasis]):
    """Exact table p(ab|xy) = Tr[rho (M_a|x (x) M_b|y)], renormalized per setting."""
    rho = as_density(rho)
    da, db = alice_bases[0].dim, bob_bases[0].dim
    if rho.dim != da * db:
        raise DimMismatch(f"state dim {rho.dim} != {da}*{db}")
    if any(len(b) != len(alice_bases[0]) for b in list(alice_bases) + list(bob_bases)):
        raise DimMismatch("all bases must have the same number of outcomes")
    r = rho.matrix.reshape(da, db, da, db)
    ma = np.stack([b.projectors for b in alice_bases])  # (x, a, k, i)
    mb = np.stack([b.projectors for b in bob_bases])    # (y, b, l, j)
    p = np.einsum("ijkl,xaki,yblj->abxy", r, ma, mb, optimize=True).real
    p[(p < 0) & (p > -1e-12)] = 0.0
    p = np.clip(p, 0, None)
    return CorrelationTable(p / p.sum(axis=(0, 1), keepdims=True))


def _setting_stream(seed, x, y):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(x), int(y)]))


def sample_counts(table: CorrelationTable, shots_per_setting, noise: NoiseModel | None = None,
                  seed=0, use_jit=None) -> CorrelationTable:
    """Poisson coincidence counts N_ab ~ Poisson(shots p(ab|xy) eta_a eta_b).

    Each setting draws from its own stream derived from (seed, x, y), so the
    result does not depend on iteration order or backend.
    """
    if shots_per_setting <= 0:
        raise ValueError("shots_per_setting must be positive")
    d, (ma, mb) = table.d, table.settings
    eta = (noise or NoiseModel()).transmission(d)
    att = np.outer(eta, eta)
    poisson = _kernels.kernel("poisson", use_jit)
    counts = np.zeros((d, d, ma, mb), dtype=np.int64)
    for x in range(ma):
        for y in range(mb):
            rng = _setting_stream(seed, x, y)
            u = rng.random(d * d)
            z = rng.standard_normal(d * d)
            lam = (shots_per_setting * table.p[:, :, x, y] * att).ravel()
            counts[:, :, x, y] = poisson(np.ascontiguousarray(lam), u, z).reshape(d, d)
    return table_from_counts(counts, shots_per_setting)


def generalized_correlator(table: CorrelationTable, x, y, k, l) -> complex:
    """<A_x^k B_y^l> = sum_ab omega^(a k + b l) p(ab|xy), omega = exp(2 pi i / d)."""
    d = table.d
    if not (0 <= k < d and 0 <= l < d):
        raise InvalidIndex(f"powers must lie in 0..{d - 1}")
    ma, mb = table.settings
    if not (0 <= x < ma and 0 <= y < mb):
        raise InvalidIndex("setting index out of range")
    idx = np.arange(d)
    phase = np.exp(2j * np.pi * (np.outer(idx * k, np.ones(d)) + np.outer(np.ones(d), idx * l)) / d)
    return complex(np.sum(phase * table.p[:, :, x, y]))


def correlator_matrix(table: CorrelationTable) -> np.ndarray:
    """All correlators C[k, l, x, y] at once (2D discrete Fourier transform)."""
    d = table.d
    # sum_ab w^(ak+bl) p = d^2 * ifft2 over (a, b)
    return np.fft.ifft2(table.p, axes=(0, 1)) * d * d


def no_signaling_zscore(table: CorrelationTable) -> float:
    """Largest marginal discrepancy across the other party's settings in std units.

    For exact tables (no counts) returns the raw discrepancy instead.
    """
    d, (ma, mb) = table.d, table.settings
    worst = 0.0
    for side in (0, 1):
        m_own, m_other = (ma, mb) if side == 0 else (mb, ma)
        for s in range(m_own):
            margs, errs = [], []
            for t in range(m_other):
                x, y = (s, t) if side == 0 else (t, s)
                sl = table.p[:, :, x, y].sum(axis=1 - side)
                margs.append(sl)
                if table.counts is not None:
                    n = table.counts[:, :, x, y].sum()
                    errs.append(np.sqrt(np.clip(sl * (1 - sl), 1e-12, None) / n))
            for i in range(m_other):
                for j in range(i + 1, m_other):
                    diff = np.abs(margs[i] - margs[j])
                    if errs:
                        diff = diff / np.sqrt(errs[i] ** 2 + errs[j] ** 2)
                    worst = max(worst, float(diff.max()))
    return worst


def bootstrap_errors(table: CorrelationTable, statistic: Callable[[CorrelationTable], float],
                     resamples=200, seed=0, use_jit=None):
    """Parametric bootstrap: redraw every count from Poisson(count)."""
    if table.counts is None:
        raise MissingCounts("bootstrap needs a table with counts")
    poisson = _kernels.kernel("poisson", use_jit)
    lam = np.ascontiguousarray(table.counts.ravel().astype(float))
    vals = np.empty(resamples)
    for r in range(resamples):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB0075, r]))
        c = poisson(lam, rng.random(lam.size), rng.standard_normal(lam.size)).reshape(table.counts.shape)
        tot = c.sum(axis=(0, 1), keepdims=True)
        tot[tot == 0] = 1
        vals[r] = statistic(CorrelationTable(np.where(c.sum(axis=(0, 1), keepdims=True) == 0,
                                                      table.p, c / tot), c, table.shots_per_setting))
    return float(vals.mean()), float(vals.std(ddof=1)) if resamples > 1 else 0.0


def mix_tables(v, t1: CorrelationTable, t2: CorrelationTable) -> CorrelationTable:
    return CorrelationTable(v * t1.p + (1 - v) * t2.p)


def uniform_table(d, ma=2, mb=2) -> CorrelationTable:
    return CorrelationTable(np.full((d, d, ma, mb), 1.0 / d**2))


def deterministic_table(d, alice, bob) -> CorrelationTable:
    """Local deterministic table: outcome alice[x] and bob[y] with certainty."""
    p = np.zeros((d, d, len(alice), len(bob)))
    for x, a in enumerate(alice):
        for y, b in enumerate(bob):
            p[a, b, x, y] = 1.0
    return CorrelationTable(p)

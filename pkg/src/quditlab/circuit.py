"""Triangular Mach-Zehnder mesh: projector compilation, assembly, noise.

Mode indices are 0-based. Every MZI pairs the surviving modes of two
adjacent blocks; the phase shifter sits on the lower-index mode by default
(layout="lower") or on the higher-index mode (layout="upper").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .core import MeasurementBasis, PureState, as_density, basis_from_vectors, make_pure_state, DensityMatrix
from .errors import DegenerateElimination, InvalidInput, InvalidState

TWO_PI = 2 * np.pi

M_BS = np.array([[1j, 1], [1, 1j]], dtype=complex) / np.sqrt(2)


def m_ps(phi):
    """Phase shifter on the second mode of a (NoPS, PS) pair."""
    return np.diag([1.0, np.exp(1j * phi)])


def m_mzi(theta):
    """Mach-Zehnder: beamsplitter, internal phase, beamsplitter."""
    return M_BS @ m_ps(theta) @ M_BS


def canonical_phase(x):
    return np.mod(np.asarray(x, dtype=float), TWO_PI)


def mzi_elimination(amplitudes, k_ps, k_nops, k_cross, strict=True):
    """Null mode k_cross with one MZI acting on (k_nops, k_ps).

    Returns (theta, phi, new_amplitudes, degenerate). The transformation
    applied is M_MZI(theta) @ M_PS(phi) on the (NoPS, PS) pair.
    """
    if k_cross not in (k_ps, k_nops):
        raise InvalidInput("k_cross must be one of the two MZI modes")
    a = np.array(amplitudes, dtype=complex, copy=True)
    if not np.all(np.isfinite(a)):
        raise InvalidState("amplitudes must be finite")
    u, w = a[k_nops], a[k_ps]
    degenerate = abs(u) == 0 and abs(w) == 0
    if degenerate:
        if strict:
            raise DegenerateElimination("both amplitudes are zero")
        return 0.0, 0.0, a, True
    if k_cross == k_ps:
        theta = 2 * np.arctan2(abs(u), abs(w))
        phi = np.angle(u) - np.angle(w)
    else:
        theta = 2 * np.arctan2(abs(w), abs(u))
        phi = np.angle(u) - np.angle(w) + np.pi
    out = m_mzi(theta) @ m_ps(phi) @ np.array([u, w])
    out[0 if k_cross == k_nops else 1] = 0.0
    a[k_nops], a[k_ps] = out
    return float(canonical_phase(theta)), float(canonical_phase(phi)), a, False


@dataclass(frozen=True)
class MeshPlan:
    """Firing order of the MZIs for a given size, k0 and layout."""

    dim: int
    k0: int
    layout: str
    layers: tuple        # layer number (1-based) per MZI
    index: tuple         # position within layer (1-based)
    nops: np.ndarray
    ps: np.ndarray
    cross: np.ndarray
    keep: np.ndarray
    ps_lo: np.ndarray
    ps_hi: np.ndarray


_PLANS = {}


def mesh_plan(dim, k0=None, layout="lower") -> MeshPlan:
    n_layers = int(round(np.log2(dim)))
    if dim < 2 or 2 ** n_layers != dim:
        raise InvalidInput(f"mesh size must be a power of two >= 2, got {dim}")
    k0 = dim // 2 if k0 is None else int(k0)
    if not 0 <= k0 < dim:
        raise InvalidInput(f"k0={k0} outside 0..{dim - 1}")
    if layout not in ("lower", "upper"):
        raise InvalidInput("layout must be 'lower' or 'upper'")
    key = (dim, k0, layout)
    if key in _PLANS:
        return _PLANS[key]
    survivor = list(range(dim))  # survivor per block at the current level
    rows = []
    for n in range(1, n_layers + 1):
        size = 2 ** n
        nxt = []
        for i in range(dim // size):
            lo_blk, hi_blk = i * size, i * size + size // 2
            s_lo, s_hi = survivor[2 * i], survivor[2 * i + 1]
            if lo_blk <= k0 < lo_blk + size:
                keep = s_lo if k0 < hi_blk else s_hi
            elif lo_blk + size <= k0:
                keep = s_hi
            else:
                keep = s_lo
            cross = s_hi if keep == s_lo else s_lo
            if layout == "lower":
                ps, nops, ps_range = s_lo, s_hi, (lo_blk, hi_blk)
            else:
                ps, nops, ps_range = s_hi, s_lo, (hi_blk, lo_blk + size)
            rows.append((n, i + 1, nops, ps, cross, keep, ps_range[0], ps_range[1]))
            nxt.append(keep)
        survivor = nxt
    cols = list(zip(*rows))
    plan = MeshPlan(
        dim, k0, layout, tuple(cols[0]), tuple(cols[1]),
        *(np.array(c, dtype=np.int64) for c in cols[2:]),
    )
    _PLANS[key] = plan
    return plan


@dataclass(frozen=True)
class PhaseSettings:
    """Compiled mesh: one theta per MZI (firing order) and one phase per input."""

    dim: int
    mzi_phases: np.ndarray
    input_phases: np.ndarray
    k0: int
    layout: str = "lower"
    logical_dim: int | None = None
    degenerate: bool = False

    def __post_init__(self):
        th = canonical_phase(self.mzi_phases)
        ph = canonical_phase(self.input_phases)
        if th.size != self.dim - 1 or ph.size != self.dim:
            raise InvalidInput("phase counts do not match mesh size")
        if not (np.all(np.isfinite(th)) and np.all(np.isfinite(ph))):
            raise InvalidInput("phases must be finite")
        th.flags.writeable = False
        ph.flags.writeable = False
        object.__setattr__(self, "mzi_phases", th)
        object.__setattr__(self, "input_phases", ph)
        if self.logical_dim is None:
            object.__setattr__(self, "logical_dim", self.dim)

    @property
    def plan(self):
        return mesh_plan(self.dim, self.k0, self.layout)

    def layer(self, n):
        """Thetas of layer n (1-based)."""
        mask = np.array(self.plan.layers) == n
        return self.mzi_phases[mask]

    def to_json(self):
        p = self.plan
        return {
            "dim": self.dim,
            "logical_dim": self.logical_dim,
            "k0": self.k0,
            "layout": self.layout,
            "mzi_phases": [[int(l), int(i), float(t)] for l, i, t in zip(p.layers, p.index, self.mzi_phases)],
            "input_phases": [float(x) for x in self.input_phases],
        }

    @classmethod
    def from_json(cls, obj):
        dim = int(obj["dim"])
        plan = mesh_plan(dim, obj.get("k0"), obj.get("layout", "lower"))
        lookup = {(int(l), int(i)): float(t) for l, i, t in obj["mzi_phases"]}
        thetas = [lookup[(l, i)] for l, i in zip(plan.layers, plan.index)]
        return cls(dim, np.array(thetas), np.array(obj["input_phases"], float), plan.k0,
                   plan.layout, obj.get("logical_dim", dim))


def _pad(vec):
    vec = np.asarray(vec, dtype=complex)
    d = vec.shape[-1]
    D = max(2, 1 << (d - 1).bit_length())
    if D == d:
        return vec
    pad = np.zeros(vec.shape[:-1] + (D,), dtype=complex)
    pad[..., :d] = vec
    return pad


def triangular_phases_batch(states, k0=None, layout="lower", use_jit=None):
    """Compile many states (rows) at once; returns a list of PhaseSettings."""
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    d = states.shape[1]
    norms = np.linalg.norm(states, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(states)):
        raise InvalidState("states must be finite and nonzero")
    amps = _pad(states / norms[:, None])
    plan = mesh_plan(amps.shape[1], k0, layout)
    fn = _kernels.kernel("compile", use_jit)
    thetas, phis, degen = fn(
        np.ascontiguousarray(amps), plan.cross, plan.keep,
        plan.ps == plan.cross, plan.ps_lo, plan.ps_hi,
    )
    return [
        PhaseSettings(plan.dim, thetas[r], phis[r], plan.k0, layout, d, bool(degen[r]))
        for r in range(amps.shape[0])
    ]


def triangular_phases(psi, k0=None, layout="lower", use_jit=None) -> PhaseSettings:
    """Phases that route `psi` entirely onto detector mode k0."""
    vec = psi.amplitudes if isinstance(psi, PureState) else psi
    return triangular_phases_batch(np.asarray(vec)[None, :], k0, layout, use_jit)[0]


def network_unitary(settings: PhaseSettings) -> np.ndarray:
    """L_N ... L_1 diag(exp(i phi)) for the compiled mesh."""
    plan = settings.plan
    U = np.diag(np.exp(1j * settings.input_phases))
    for j in range(plan.nops.size):
        a, b = plan.nops[j], plan.ps[j]
        m = m_mzi(settings.mzi_phases[j])
        rows = U[[a, b], :]
        U[[a, b], :] = m @ rows
    return U


def layer_amplitudes(settings: PhaseSettings, psi):
    """Amplitudes after the input phases and after each complete layer."""
    plan = settings.plan
    vec = _pad(psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, complex))
    a = np.exp(1j * settings.input_phases) * vec
    out = [a.copy()]
    layers = np.array(plan.layers)
    for n in range(1, int(layers.max()) + 1):
        for j in np.flatnonzero(layers == n):
            i, k = plan.nops[j], plan.ps[j]
            a[[i, k]] = m_mzi(settings.mzi_phases[j]) @ a[[i, k]]
        out.append(a.copy())
    return out


def projector_vector(settings: PhaseSettings) -> np.ndarray:
    """v = U^dagger |k0>, truncated to the logical (unpadded) modes."""
    U = network_unitary(settings)
    return U[settings.k0, :].conj()[: settings.logical_dim]


def projector_from_settings(settings: PhaseSettings) -> np.ndarray:
    v = projector_vector(settings)
    return np.outer(v, v.conj())


def compile_basis(basis: MeasurementBasis, k0=None, layout="lower"):
    """Compile every rank-one element of a basis; one PhaseSettings per outcome."""
    if basis.vectors is None:
        raise InvalidInput("basis has no rank-one generators")
    return triangular_phases_batch(basis.vectors, k0, layout)


def jitter_settings(settings: PhaseSettings, sigma, rng) -> PhaseSettings:
    if sigma == 0:
        return settings
    th = settings.mzi_phases + rng.normal(0, sigma, settings.mzi_phases.size)
    ph = settings.input_phases + rng.normal(0, sigma, settings.input_phases.size)
    return PhaseSettings(settings.dim, th, ph, settings.k0, settings.layout, settings.logical_dim)


@dataclass(frozen=True)
class NoiseModel:
    werner_visibility: float = 1.0
    phase_jitter_sigma: float = 0.0
    mode_loss: tuple = field(default=())

    def __post_init__(self):
        if not 0 <= self.werner_visibility <= 1:
            raise InvalidInput("werner_visibility must lie in [0, 1]")
        if self.phase_jitter_sigma < 0:
            raise InvalidInput("phase_jitter_sigma must be >= 0")
        loss = tuple(float(x) for x in self.mode_loss)
        if any(not 0 <= x <= 1 for x in loss):
            raise InvalidInput("mode transmissions must lie in [0, 1]")
        object.__setattr__(self, "mode_loss", loss)

    @staticmethod
    def db_to_transmission(db):
        return 10 ** (-np.asarray(db, float) / 10)

    def transmission(self, d):
        """Per-outcome transmission vector of length d (1 when unset)."""
        if not self.mode_loss:
            return np.ones(d)
        t = np.ones(d)
        n = min(d, len(self.mode_loss))
        t[:n] = self.mode_loss[:n]
        return t

    @property
    def is_ideal(self):
        return (self.werner_visibility == 1 and self.phase_jitter_sigma == 0
                and all(x == 1 for x in self.mode_loss))

    @classmethod
    def parse(cls, text):
        """Parse 'werner:v=0.9,jitter:s=0.01,loss:db=3' (each part optional)."""
        kw = {}
        if not text:
            return cls()
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                kind, rest = part.split(":", 1)
                key, val = rest.split("=", 1)
            except ValueError:
                raise InvalidInput(f"cannot parse noise term {part!r}") from None
            kind = kind.strip().lower()
            if kind == "werner" and key == "v":
                kw["werner_visibility"] = float(val)
            elif kind == "jitter" and key == "s":
                kw["phase_jitter_sigma"] = float(val)
            elif kind == "loss" and key in ("eta", "db"):
                vals = [float(x) for x in val.split("/")]
                if key == "db":
                    vals = list(cls.db_to_transmission(vals))
                kw["mode_loss"] = tuple(vals)
            else:
                raise InvalidInput(f"unknown noise term {part!r}")
        return cls(**kw)


def apply_noise(rho, noise: NoiseModel, bases: Sequence[MeasurementBasis] = (), rng=None):
    """Werner-mix the state and jitter every compiled phase of every basis.

    Jittered bases are rebuilt from the perturbed meshes and are in general
    no longer orthogonal, so they are returned unvalidated.
    """
    rho = as_density(rho)
    v = noise.werner_visibility
    m = v * rho.matrix + (1 - v) * np.eye(rho.dim) / rho.dim
    out_rho = DensityMatrix(rho.dim, m)
    if noise.phase_jitter_sigma == 0 or not bases:
        return out_rho, list(bases)
    rng = np.random.default_rng() if rng is None else rng
    out = []
    for basis in bases:
        vecs = []
        for s in compile_basis(basis):
            vecs.append(projector_vector(jitter_settings(s, noise.phase_jitter_sigma, rng)))
        vecs = np.array(vecs)
        proj = np.einsum("ki,kj->kij", vecs, vecs.conj())
        out.append(MeasurementBasis(basis.dim, proj, vectors=vecs))
    return out_rho, out


def rhom_fringe(phase, indistinguishability):
    """Single-photon and two-photon fringes versus interferometer phase.

    Returns (classical_rate, quantum_rate, visibility) where the visibility
    is (N_max - N_min)/(N_max + N_min) of the two-photon fringe.
    """
    mu = float(indistinguishability)
    if not 0 <= mu <= 1:
        raise InvalidInput("indistinguishability must lie in [0, 1]")
    phase = np.asarray(phase, dtype=float)
    classical = (1 + np.cos(phase)) / 2
    quantum = (1 + mu * np.cos(2 * phase)) / 2
    grid = (1 + mu * np.cos(2 * np.linspace(0, np.pi, 721))) / 2
    visibility = (grid.max() - grid.min()) / (grid.max() + grid.min())
    return classical, quantum, float(visibility)


def statistical_fidelity(p, q):
    """Classical (Bhattacharyya) overlap sum_i sqrt(p_i q_i)."""
    from .errors import DimMismatch

    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimMismatch("distributions have different lengths")
    for r in (p, q):
        if np.any(r < -1e-12) or abs(r.sum() - 1) > 1e-9:
            raise InvalidInput("inputs must be normalized distributions")
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))))


def detection_probability(settings: PhaseSettings, psi) -> float:
    vec = _pad(psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, complex))
    vec = vec / np.linalg.norm(vec)
    return float(abs(network_unitary(settings)[settings.k0] @ vec) ** 2)


def fourier_state(d, ell) -> PureState:
    k = np.arange(d)
    return make_pure_state(np.exp(2j * np.pi * k * ell / d))

"""Quantum-state primitives: pure states, density matrices, projective bases."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import TOL
from .errors import DimMismatch, InvalidState, NotCommuting

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def _frozen(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PureState:
    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(np.asarray(self.amplitudes, dtype=complex)))

    def projector(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self):
        return DensityMatrix(self.dim, self.projector())

    def to_json(self):
        return {"dim": self.dim, "re": self.amplitudes.real.tolist(), "im": self.amplitudes.imag.tolist()}

    @classmethod
    def from_json(cls, obj):
        vec = np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float)
        if vec.size != int(obj["dim"]):
            raise DimMismatch(f"dim {obj['dim']} does not match {vec.size} amplitudes")
        return make_pure_state(vec)


@dataclass(frozen=True)
class DensityMatrix:
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise DimMismatch(f"matrix shape {m.shape} does not match dim {self.dim}")
        object.__setattr__(self, "matrix", _frozen(m))

    def to_json(self):
        m = self.matrix
        return {"dim": self.dim, "re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}

    @classmethod
    def from_json(cls, obj):
        d = int(obj["dim"])
        m = (np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float)).reshape(d, d)
        return density_matrix(m)


@dataclass(frozen=True)
class MeasurementBasis:
    """Ordered projectors for one measurement setting.

    `vectors` holds the rank-one generators when available (row k spans
    projector k). `eigenvalues` carries the eigenvalue tuple of each outcome
    for bases built from commuting observables.
    """

    dim: int
    projectors: np.ndarray
    vectors: np.ndarray | None = None
    eigenvalues: tuple | None = None
    labels: tuple = field(default=())

    def __post_init__(self):
        p = np.asarray(self.projectors, dtype=complex)
        if p.ndim != 3 or p.shape[1:] != (self.dim, self.dim):
            raise DimMismatch(f"projector stack shape {p.shape} does not match dim {self.dim}")
        object.__setattr__(self, "projectors", _frozen(p))
        if self.vectors is not None:
            object.__setattr__(self, "vectors", _frozen(np.asarray(self.vectors, dtype=complex)))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(p.shape[0])))

    def __len__(self):
        return self.projectors.shape[0]

    def validate(self, tol=TOL.hermitian):
        """Raise InvalidState unless projectors are a complete orthogonal set."""
        p = self.projectors
        for k, pk in enumerate(p):
            if np.max(np.abs(pk - pk.conj().T)) > tol:
                raise InvalidState(f"projector {k} is not Hermitian")
            if np.max(np.abs(pk @ pk - pk)) > tol:
                raise InvalidState(f"projector {k} is not idempotent")
        if np.max(np.abs(p.sum(axis=0) - np.eye(self.dim))) > tol:
            raise InvalidState("projectors do not sum to identity")
        for i in range(len(p)):
            for j in range(i + 1, len(p)):
                if np.max(np.abs(p[i] @ p[j])) > tol:
                    raise InvalidState(f"projectors {i} and {j} are not orthogonal")
        return self

    def to_json(self):
        p = self.projectors
        return {"dim": self.dim, "re": p.real.ravel().tolist(), "im": p.imag.ravel().tolist()}

    @classmethod
    def from_json(cls, obj):
        d = int(obj["dim"])
        p = (np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float)).reshape(-1, d, d)
        return cls(d, p).validate()


def make_pure_state(amplitudes) -> PureState:
    """Normalized copy of `amplitudes`; relative phases are preserved."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidState("amplitudes must be finite and non-empty")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvalidState("zero vector is not a state")
    return PureState(v.size, v / norm)


def entangled_state(c) -> PureState:
    """Sum_k c_k |k>|k>, normalized, on a d*d space."""
    c = np.asarray(c, dtype=complex).ravel()
    d = c.size
    v = np.zeros(d * d, dtype=complex)
    v[np.arange(d) * (d + 1)] = c
    return make_pure_state(v)


def maximally_entangled(d) -> PureState:
    return entangled_state(np.ones(d))


def density_matrix(matrix, tol=TOL.hermitian) -> DensityMatrix:
    """Validated density matrix (Hermitian, unit trace, PSD)."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"density matrix must be square, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidState("non-finite entries")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise InvalidState("matrix is not Hermitian")
    if abs(np.trace(m) - 1) > tol:
        raise InvalidState(f"trace {np.trace(m).real:.3g} != 1")
    m = (m + m.conj().T) / 2
    if np.linalg.eigvalsh(m)[0] < -TOL.psd:
        raise InvalidState("matrix is not positive semidefinite")
    return DensityMatrix(m.shape[0], m)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density()
    return density_matrix(state)


def werner(psi: PureState, v: float) -> DensityMatrix:
    """v |psi><psi| + (1 - v) I / dim."""
    return DensityMatrix(psi.dim, v * psi.projector() + (1 - v) * np.eye(psi.dim) / psi.dim)


def fidelity(rho, psi: PureState) -> float:
    """<psi| rho |psi>."""
    rho = as_density(rho)
    if rho.dim != psi.dim:
        raise DimMismatch(f"state dims differ: {rho.dim} vs {psi.dim}")
    a = psi.amplitudes
    return float(np.real(a.conj() @ rho.matrix @ a))


def _split_dims(dim, dims):
    if dims is None:
        da = int(round(np.sqrt(dim)))
        if da * da != dim:
            raise DimMismatch(f"dimension {dim} is not a square; pass dims explicitly")
        return da, da
    da, db = dims
    if da * db != dim:
        raise DimMismatch(f"dims {dims} do not factor {dim}")
    return int(da), int(db)


def partial_trace(rho, side="A", dims=None) -> DensityMatrix:
    """Trace out subsystem `side` ('A' or 'B') of a bipartite state."""
    rho = as_density(rho)
    da, db = _split_dims(rho.dim, dims)
    t = rho.matrix.reshape(da, db, da, db)
    if side in ("A", "a", 0):
        out = np.einsum("ijik->jk", t)
    elif side in ("B", "b", 1):
        out = np.einsum("ijkj->ik", t)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    out = (out + out.conj().T) / 2
    return DensityMatrix(out.shape[0], out)


def fix_phase(vectors, tol=1e-9):
    """Rotate each row so its first non-negligible amplitude is real positive."""
    v = np.array(vectors, dtype=complex, copy=True)
    for row in v:
        idx = np.flatnonzero(np.abs(row) > tol)
        if idx.size:
            row *= np.exp(-1j * np.angle(row[idx[0]]))
    return v


def basis_from_vectors(vectors, validate=True, eigenvalues=None) -> MeasurementBasis:
    """Projective basis from row vectors (normalized, rank-one projectors)."""
    v = np.asarray(vectors, dtype=complex)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    proj = np.einsum("ki,kj->kij", v, v.conj())
    basis = MeasurementBasis(v.shape[1], proj, vectors=v, eigenvalues=eigenvalues)
    return basis.validate() if validate else basis


def computational_basis(d) -> MeasurementBasis:
    return basis_from_vectors(np.eye(d))


def pauli_string(label: str, sign=1) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. 'XZ' -> X (x) Z."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, _PAULI[ch])
    return sign * out


def _refine(ops, vecs, tol):
    """Split a subspace (columns of vecs) into joint eigenspaces of ops."""
    groups = [vecs]
    for op in ops:
        nxt = []
        for g in groups:
            if g.shape[1] == 1:
                nxt.append(g)
                continue
            sub = g.conj().T @ op @ g
            w, u = np.linalg.eigh((sub + sub.conj().T) / 2)
            rot = g @ u
            start = 0
            for k in range(1, len(w) + 1):
                if k == len(w) or w[k] - w[k - 1] > tol:
                    nxt.append(rot[:, start:k])
                    start = k
        groups = nxt
    return np.concatenate(groups, axis=1)


def common_eigenbasis(ops: Sequence[np.ndarray], tol=TOL.commute) -> MeasurementBasis:
    """Basis diagonalizing every operator in a commuting Hermitian family.

    Outcomes are ordered by descending lexicographic eigenvalue tuple, so a
    single Pauli Z yields |0> (eigenvalue +1) first.
    """
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if not ops:
        raise ValueError("need at least one operator")
    dim = ops[0].shape[0]
    for o in ops:
        if o.shape != (dim, dim):
            raise DimMismatch("operators have different shapes")
        if np.max(np.abs(o - o.conj().T)) > tol:
            raise InvalidState("operators must be Hermitian")
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if np.max(np.abs(ops[i] @ ops[j] - ops[j] @ ops[i])) > tol:
                raise NotCommuting(f"operators {i} and {j} do not commute")
    coeffs = np.random.default_rng(20240917).uniform(0.5, 1.5, len(ops))
    mix = sum(c * o for c, o in zip(coeffs, ops))
    _, vecs = np.linalg.eigh((mix + mix.conj().T) / 2)
    vecs = _refine(ops, vecs, 1e-7)
    # Gram-Schmidt cleanup keeps the basis orthonormal to machine precision.
    vecs, _ = np.linalg.qr(vecs)
    rows = fix_phase(vecs.T)
    eig = np.array([[np.real(r.conj() @ o @ r) for o in ops] for r in rows])
    eig_r = np.round(eig, 8)
    first_nz = [int(np.flatnonzero(np.abs(r) > 1e-9)[0]) for r in rows]
    order = sorted(range(len(rows)), key=lambda k: (tuple(-eig_r[k]), first_nz[k]))
    rows = rows[order]
    eig = eig[order]
    tuples = tuple(tuple(float(np.round(x, 12)) + 0.0 for x in e) for e in eig)
    return basis_from_vectors(rows, eigenvalues=tuples)


def random_density(d, rng, rank=None) -> DensityMatrix:
    """Random density matrix from a Ginibre ensemble."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityMatrix(d, m / np.trace(m).real)


def haar_state(d, rng) -> PureState:
    return make_pure_state(rng.normal(size=d) + 1j * rng.normal(size=d))


def dumps(obj) -> str:
    return json.dumps(obj.to_json())

"""State tomography of bipartite qudits: compressed sensing and linear inversion.

Measured observables are Heisenberg-Weyl products X^p Z^q (x) X^r Z^s. They
are unitary rather than Hermitian, so each one is measured in its
eigenbasis and its expectation Tr[w rho] is the complex eigenvalue-weighted
average of the outcome frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from .circuit import projector_vector, triangular_phases_batch
from .core import DensityMatrix, as_density
from .errors import IncompleteData, Infeasible, InvalidDimension, InvalidInput, NumericalFailure
from .sdp import Constraint, SdpProblem, SolverOptions, solve_sdp


@dataclass(frozen=True)
class WeylOperator:
    """X^p Z^q (x) X^r Z^s with its product eigenbasis (rows of `vectors`)."""

    label: tuple
    matrix: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class TomographyJob:
    """Sampled operators and their statistics.

    `y[i]` is the measured Tr[w_i rho]; `frequencies[i]` the eigenbasis outcome
    frequencies it came from; `shots[i]` is 0 in infinite-shot mode.
    """

    d_local: int
    labels: tuple
    y: np.ndarray
    frequencies: np.ndarray
    shots: np.ndarray
    epsilon: float | None = None
    method: str = "cs"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.labels) < 1:
            raise InvalidInput("need at least one measured operator")
        if self.method not in ("cs", "linear"):
            raise InvalidInput(f"unknown method {self.method!r}")
        f = np.asarray(self.frequencies, float)
        if np.any(f < -1e-12) or np.any(f > 1 + 1e-12):
            raise InvalidInput("frequencies must lie in [0, 1]")

    @property
    def operators(self):
        return [weyl_operator(self.d_local, lab) for lab in self.labels]

    def noise_radius(self, c=1.0, floor=1e-7):
        """eps = c sqrt(sum_i 1/N_i), or `floor` without shot noise."""
        n = np.asarray(self.shots, float)
        if np.any(n <= 0):
            return floor
        return max(floor, c * float(np.sqrt(np.sum(1.0 / n))))

    def to_json(self):
        return {
            "d_local": self.d_local,
            "labels": [list(lab) for lab in self.labels],
            "y_re": np.real(self.y).tolist(),
            "y_im": np.imag(self.y).tolist(),
            "shots": [int(n) for n in self.shots],
            "epsilon": self.epsilon,
            "method": self.method,
        }


def _shift_clock(d):
    X = np.roll(np.eye(d), 1, axis=0)  # X|k> = |k+1>
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


@lru_cache(maxsize=None)
def _local(d, p, q):
    X, Z = _shift_clock(d)
    w = np.linalg.matrix_power(X, p) @ np.linalg.matrix_power(Z, q)
    # w is normal, so its complex Schur form is diagonal
    T, U = scipy.linalg.schur(w, output="complex")
    return w, np.diag(T).copy(), U.T.copy()


def weyl_operator(d, label) -> WeylOperator:
    p, q, r, s = (int(v) % d for v in label)
    wa, la, va = _local(d, p, q)
    wb, lb, vb = _local(d, r, s)
    vecs = np.einsum("ia,jb->ijab", va, vb).reshape(d * d, d * d)
    return WeylOperator((p, q, r, s), np.kron(wa, wb), np.outer(la, lb).ravel(), vecs)


def _local_dim(d_total):
    d = math.isqrt(int(d_total))
    if d < 2 or d * d != d_total:
        raise InvalidDimension(f"d_total must be a square d^2 with d >= 2, got {d_total}")
    return d


def operator_labels(d_local):
    """All (p, q, r, s) in lexicographic order; (0, 0, 0, 0) is the identity."""
    d = int(d_local)
    return [(p, q, r, s) for p in range(d) for q in range(d) for r in range(d) for s in range(d)]


def operator_basis(d_total):
    """Heisenberg-Weyl family orthonormal under Tr[w_i^dag w_j] / d_total."""
    d = _local_dim(d_total)
    return [weyl_operator(d, lab) for lab in operator_labels(d)]


def sample_labels(d_local, m, seed=0):
    """m operators drawn without replacement; beyond the full family it cycles."""
    labels = operator_labels(d_local)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x70A0]))
    order = rng.permutation(len(labels))
    return [labels[order[i % len(labels)]] for i in range(int(m))]


def _mesh_vectors(vectors):
    # route each rank-one projector through the compiled interferometer mesh
    settings = triangular_phases_batch(vectors)
    return np.array([projector_vector(s) for s in settings])


def measure_operators(rho, labels, shots=0, seed=0, simulate_mesh=False, method="cs") -> TomographyJob:
    """Measure each operator in its eigenbasis.

    shots=0 gives exact frequencies. With shots > 0 every operator gets its
    own multinomial draw from a stream derived from (seed, index).
    """
    rho = as_density(rho)
    d = _local_dim(rho.dim)
    freqs, ys = [], []
    for i, lab in enumerate(labels):
        op = weyl_operator(d, lab)
        vecs = op.vectors
        if simulate_mesh:
            va = _mesh_vectors(_local(d, op.label[0], op.label[1])[2])
            vb = _mesh_vectors(_local(d, op.label[2], op.label[3])[2])
            vecs = np.einsum("ia,jb->ijab", va, vb).reshape(d * d, d * d)
        p = np.einsum("ka,ab,kb->k", vecs.conj(), rho.matrix, vecs).real
        p = np.clip(p, 0, None)
        p /= p.sum()
        if shots:
            rng = np.random.default_rng(np.random.SeedSequence([int(seed), i]))
            p = rng.multinomial(int(shots), p) / shots
        freqs.append(p)
        ys.append(np.dot(op.eigenvalues, p))
    n = np.full(len(labels), int(shots))
    return TomographyJob(d, tuple(tuple(lab) for lab in labels), np.array(ys), np.array(freqs), n, method=method)


def _real_rows(job: TomographyJob):
    """Hermitian coefficient matrices A_r and targets y_r with <A_r, X> = y_r."""
    mats, rhs = [], []
    for op, y in zip(job.operators, job.y):
        w = op.matrix
        # Tr[w X] = <(w + w^dag)/2, X> + i <(w - w^dag)/(2i), X>  for Hermitian X
        mats.append((w + w.conj().T) / 2)
        rhs.append(y.real)
        im = (w - w.conj().T) / 2j
        if np.max(np.abs(im)) > 0:
            mats.append(im)
            rhs.append(y.imag)
    return mats, np.array(rhs)


def cs_problem(job: TomographyJob, epsilon) -> SdpProblem:
    """min Tr X  s.t.  X >= 0,  ||A(X) - y||_2 <= epsilon."""
    D = job.d_local**2
    mats, rhs = _real_rows(job)
    n = len(mats) + 1
    cons = []
    e0 = np.zeros(n)
    e0[0] = 1.0
    cons.append(Constraint({1: e0}, float(epsilon)))
    for r, (a, y) in enumerate(zip(mats, rhs)):
        e = np.zeros(n)
        e[r + 1] = 1.0
        cons.append(Constraint({0: a, 1: e}, float(y)))
    return SdpProblem([D, ("soc", n)], [np.eye(D), None], cons, "min")


def cs_reconstruct(job: TomographyJob, epsilon=None, c=1.0, options=None) -> DensityMatrix:
    """Trace minimization over the PSD cone inside the data ball, renormalized."""
    eps = job.epsilon if epsilon is None else epsilon
    if eps is None:
        eps = job.noise_radius(c)
    sol = solve_sdp(cs_problem(job, eps), options or SolverOptions())
    if sol.status == "Infeasible":
        raise Infeasible(f"no PSD matrix within eps={eps:g} of the data")
    if not sol.ok:
        raise NumericalFailure(f"CS solve ended with status {sol.status}",
                               {"primal": sol.primal_residual, "dual": sol.dual_residual, "gap": sol.relative_gap})
    X = np.asarray(sol.X[0])
    X = (X + X.conj().T) / 2
    w, v = np.linalg.eigh(X)
    X = (v * np.clip(w, 0, None)) @ v.conj().T
    tr = np.trace(X).real
    if tr <= 0:
        raise NumericalFailure("reconstruction has zero trace", {"trace": tr})
    return DensityMatrix(X.shape[0], X / tr)


def project_to_density(h):
    """Frobenius-nearest trace-one PSD matrix (eigenvalues onto the simplex)."""
    h = (np.asarray(h) + np.asarray(h).conj().T) / 2
    w, v = np.linalg.eigh(h)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, len(u) + 1)
    rho_idx = np.nonzero(u - css / k > 0)[0][-1]
    lam = np.clip(w - css[rho_idx] / (rho_idx + 1), 0, None)
    return DensityMatrix(h.shape[0], (v * lam) @ v.conj().T)


def linear_inversion(job: TomographyJob, tol=1e-10) -> DensityMatrix:
    """Least-squares solution of Tr[w_i rho] = y_i, then the nearest density matrix."""
    D = job.d_local**2
    # Tr[w rho] = vec(w^T) . vec(rho)
    A = np.array([op.matrix.T.ravel() for op in job.operators])
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size < D * D or sv[-1] < tol * sv[0]:
        raise IncompleteData(f"design has rank {int(np.sum(sv > tol * sv[0]))} < {D * D}")
    x, *_ = np.linalg.lstsq(A, job.y, rcond=None)
    return project_to_density(x.reshape(D, D))


def reconstruct(job: TomographyJob, **kwargs) -> DensityMatrix:
    return cs_reconstruct(job, **kwargs) if job.method == "cs" else linear_inversion(job)

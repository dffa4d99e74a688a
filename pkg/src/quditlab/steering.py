"""EPR steering with characterized Bob measurements and one-sided
device-independent randomness from the observed steering value."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .core import DensityMatrix, MeasurementBasis, as_density, basis_from_vectors, computational_basis
from .correlations import CorrelationTable
from .errors import DimMismatch, Infeasible, InvalidDimension, InvalidInput, InvalidTable, NumericalFailure
from .sdp import Constraint, SdpProblem, SolverOptions, certify, solve_sdp

MAX_DEFAULT_DIM = 4


def _check_d(d):
    if int(d) != d or d < 2:
        raise InvalidDimension(f"d must be an integer >= 2, got {d}")
    return int(d)


def fourier_vectors(d, sign=1):
    """Rows |l> = sum_k exp(sign 2 pi i k l / d)|k> / sqrt(d)."""
    k = np.arange(d)
    return np.exp(sign * 2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def steering_bases(d):
    """Bob's characterized settings: computational, and Fourier with index -l."""
    d = _check_d(d)
    return computational_basis(d), basis_from_vectors(fourier_vectors(d, -1))


def alice_default_bases(d):
    """Alice settings reaching beta = 2 on |psi+_d> (transposes of Bob's)."""
    d = _check_d(d)
    return computational_basis(d), basis_from_vectors(fourier_vectors(d, 1))


def lhs_bound(d):
    return 1 + 1 / np.sqrt(_check_d(d))


@dataclass(frozen=True)
class Assemblage:
    """sigma[x, a] = p(a|x) rho_{a|x} (unnormalized d x d blocks)."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma, dtype=complex)
        if s.ndim != 4 or s.shape[2] != s.shape[3]:
            raise InvalidInput("sigma must have shape (m, outcomes, d, d)")
        s.flags.writeable = False
        object.__setattr__(self, "sigma", s)

    @property
    def d(self):
        return self.sigma.shape[2]

    @property
    def settings(self):
        return self.sigma.shape[0]

    def validate(self, tol=TOL.structural):
        s = self.sigma
        tr = np.einsum("xaii->x", s).real
        if np.max(np.abs(tr - 1)) > tol:
            raise InvalidInput("each setting must be normalized")
        red = s.sum(axis=1)
        if np.max(np.abs(red - red[0])) > tol:
            raise InvalidInput("assemblage is signaling")
        for blk in s.reshape(-1, self.d, self.d):
            if np.linalg.eigvalsh((blk + blk.conj().T) / 2)[0] < -tol:
                raise InvalidInput("assemblage elements must be PSD")
        return self


@dataclass(frozen=True)
class SteeringResult:
    beta: float
    lhs_bound: float
    quantum_max: float = 2.0
    std: float | None = None

    def to_json(self):
        return {"beta": self.beta, "lhs_bound": self.lhs_bound, "quantum_max": self.quantum_max, "std": self.std}


@dataclass(frozen=True)
class RandomnessResult:
    guessing_probability: float
    min_entropy_bits: float
    certificate: dict
    x_star: int

    def to_json(self):
        return {"guessing_probability": self.guessing_probability, "min_entropy_bits": self.min_entropy_bits,
                "x_star": self.x_star, "certificate": self.certificate}


def steered_assemblage(rho, alice_bases) -> Assemblage:
    """sigma_{a|x} = Tr_A[(M_{a|x} (x) I) rho]."""
    rho = as_density(rho)
    da = alice_bases[0].dim
    if rho.dim % da:
        raise DimMismatch(f"state dim {rho.dim} not divisible by {da}")
    db = rho.dim // da
    r = rho.matrix.reshape(da, db, da, db)
    M = np.stack([b.projectors for b in alice_bases])  # (x, a, k, i)
    sigma = np.einsum("xaki,ijkl->xajl", M, r)
    sigma = (sigma + np.conj(np.swapaxes(sigma, 2, 3))) / 2
    return Assemblage(sigma)


def _bob_projectors(d):
    return np.stack([b.projectors for b in steering_bases(d)])


def steering_value(data, bob_bases=None) -> SteeringResult:
    """beta = sum_{x,a} Tr[M_{a|x} sigma_{a|x}] from an assemblage or a table."""
    if isinstance(data, CorrelationTable):
        if data.settings != (2, 2):
            raise InvalidTable("steering needs two settings per side")
        d = data.d
        beta = float(sum(np.trace(data.p[:, :, x, x]) for x in range(2)))
        return SteeringResult(beta, lhs_bound(d))
    if not isinstance(data, Assemblage):
        raise InvalidInput("expected an Assemblage or CorrelationTable")
    d = data.d
    if data.settings != 2:
        raise InvalidTable("steering needs two settings")
    M = np.stack([b.projectors for b in bob_bases]) if bob_bases else _bob_projectors(d)
    if M.shape[:2] != data.sigma.shape[:2]:
        raise InvalidTable("Bob's bases do not match the assemblage settings")
    beta = float(np.einsum("xaij,xaji->", M, data.sigma).real)
    return SteeringResult(beta, lhs_bound(d))


def random_separable_state(d, rng, terms=3) -> DensityMatrix:
    """Convex mixture of random pure product states."""
    w = rng.dirichlet(np.ones(terms))
    m = np.zeros((d * d, d * d), dtype=complex)
    for wi in w:
        a = rng.normal(size=d) + 1j * rng.normal(size=d)
        b = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b))
        m += wi * np.outer(v, v.conj())
    return DensityMatrix(d * d, m)


def random_basis(d, rng) -> MeasurementBasis:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return basis_from_vectors(q.T)


def lhs_bound_check(states, alice_bases=None, tol=1e-9):
    """Largest beta over separable inputs; raises if any exceeds 1 + 1/sqrt(d).

    `alice_bases` may be a fixed pair or a list of pairs (one per state).
    """
    best = -np.inf
    d = None
    for i, rho in enumerate(states):
        rho = as_density(rho)
        d = int(round(np.sqrt(rho.dim)))
        if alice_bases is None:
            bases = alice_default_bases(d)
        elif isinstance(alice_bases[0], MeasurementBasis):
            bases = alice_bases
        else:
            bases = alice_bases[i]
        beta = steering_value(steered_assemblage(rho, bases)).beta
        best = max(best, beta)
    bound = lhs_bound(d)
    if best > bound + tol:
        raise AssertionError(f"separable state reached beta={best:.12f} above {bound:.12f}")
    return {"max_beta": float(best), "bound": float(bound), "count": len(states), "ok": True}


def _hermitian_basis(d):
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j], e[j, i] = 1j, -1j
            out.append(e)
    return out


def guessing_problem(d, beta_obs, x_star) -> SdpProblem:
    """Eve's optimal guess of Alice's outcome for setting x_star.

    Blocks sigma_{a,e|x}, ordered by (x, a, e); e is Eve's guess.
    """
    M = _bob_projectors(d)

    def idx(x, a, e):
        return (x * d + a) * d + e

    nblk = 2 * d * d
    eye = np.eye(d)
    if beta_obs >= 2 - 1e-12:
        return _face_problem(d, M, x_star, idx)
    objective = [None] * nblk
    for a in range(d):
        objective[idx(x_star, a, a)] = eye
    cons = [Constraint({idx(x, a, e): M[x, a] for x in range(2) for a in range(d) for e in range(d)}, beta_obs)]
    for e in range(d):
        for g in _hermitian_basis(d):
            coeffs = {idx(0, a, e): g for a in range(d)}
            coeffs.update({idx(1, a, e): -g for a in range(d)})
            cons.append(Constraint(coeffs, 0.0))
    # x=1 normalization follows from no-signaling
    cons.append(Constraint({idx(0, a, e): eye for a in range(d) for e in range(d)}, 1.0))
    return SdpProblem([d] * nblk, objective, cons, "max")


def _face_problem(d, M, x_star, idx):
    """The beta = 2 program restricted to its optimal face.

    Tr[M_{a|x} sigma] = Tr[sigma] forces sigma_{a,e|x} = q_{a,e|x} M_{a|x}
    with q >= 0, so the blocks become scalars and the program regains a
    strictly feasible point.
    """
    nblk = 2 * d * d
    one = np.ones(1)
    objective = [None] * nblk
    for a in range(d):
        objective[idx(x_star, a, a)] = one
    cons = []
    for e in range(d):
        for g in _hermitian_basis(d):
            coeffs = {idx(0, a, e): np.real([np.trace(g @ M[0, a])]) for a in range(d)}
            coeffs.update({idx(1, a, e): -np.real([np.trace(g @ M[1, a])]) for a in range(d)})
            cons.append(Constraint(coeffs, 0.0))
    cons.append(Constraint({idx(0, a, e): one for a in range(d) for e in range(d)}, 1.0))
    return SdpProblem([("nonneg", 1)] * nblk, objective, cons, "max")


def local_randomness(assemblage=None, beta_obs=None, x_star=None, d=None,
                     allow_large=False, options: SolverOptions | None = None) -> RandomnessResult:
    """Guessing probability certified by the steering value alone.

    beta_obs defaults to the steering value of `assemblage`. With x_star
    None the worst case over both settings is returned.
    """
    if assemblage is not None:
        d = assemblage.d
        if beta_obs is None:
            beta_obs = steering_value(assemblage).beta
    if d is None or beta_obs is None:
        raise InvalidInput("need an assemblage or both d and beta_obs")
    d = _check_d(d)
    if d > MAX_DEFAULT_DIM and not allow_large:
        raise InvalidInput(f"randomness SDP limited to d <= {MAX_DEFAULT_DIM}; pass allow_large=True")
    if beta_obs > 2 + 1e-9:
        raise Infeasible(f"beta_obs={beta_obs} exceeds the quantum maximum 2")
    beta_obs = min(float(beta_obs), 2.0)
    if options is None and d > MAX_DEFAULT_DIM:
        options = SolverOptions(gap_tol=1e-6, feas_tol=1e-7)
    xs = [0, 1] if x_star is None else [int(x_star)]
    best = None
    for x in xs:
        prob = guessing_problem(d, beta_obs, x)
        sol = solve_sdp(prob, options)
        cert = certify(sol, prob)
        if sol.status == "Infeasible":
            raise Infeasible(f"no assemblage reaches beta={beta_obs}")
        if not sol.ok or not cert.ok:
            raise NumericalFailure(
                f"randomness SDP failed ({sol.status})",
                {"primal": cert.primal_residual, "dual": cert.dual_residual, "gap": cert.relative_gap},
            )
        pg = min(max(sol.objective_value, 1.0 / d), 1.0)
        info = {"status": sol.status, "primal_residual": cert.primal_residual,
                "dual_residual": cert.dual_residual, "relative_gap": cert.relative_gap,
                "iterations": sol.iterations}
        if best is None or pg > best[0]:
            best = (pg, info, x)
    pg, info, x = best
    return RandomnessResult(pg, float(max(0.0, -np.log2(pg))), info, x)


def explicit_eve_strategy(d, t):
    """Assemblage and guessing probability of a concrete Eve strategy.

    With probability 1/d Eve prepares sqrt(1-t)|ee> + sqrt(t/(d-1)) sum_{k!=e}|kk>
    and guesses e for Alice's computational outcome.
    """
    alice = alice_default_bases(d)
    total = np.zeros((2, d, d, d), dtype=complex)
    for e in range(d):
        c = np.full(d, np.sqrt(t / (d - 1)))
        c[e] = np.sqrt(1 - t)
        v = np.zeros(d * d, dtype=complex)
        v[np.arange(d) * (d + 1)] = c
        total += steered_assemblage(DensityMatrix(d * d, np.outer(v, v.conj())), alice).sigma / d
    return Assemblage(total), 1 - t

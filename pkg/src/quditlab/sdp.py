"""Dense semidefinite programs with verifiable certificates.

Problems are block structured: Hermitian PSD blocks, second-order cones and
nonnegative orthants. The solver is a homogeneous self-dual primal-dual
interior-point method with Nesterov-Todd scaling and Mehrotra
predictor-corrector steps. Complex Hermitian blocks are solved through the
real embedding [[Re X, -Im X], [Im X, Re X]], which is invisible to callers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import TOL
from .errors import InvalidInput

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
NUMERICAL_FAILURE = "NumericalFailure"


# ------------------------------------------------------------------ problem


@dataclass
class Constraint:
    """sum_j <A_j, X_j> = rhs; `coeffs` maps block index -> A_j."""

    coeffs: dict
    rhs: float


@dataclass
class SdpProblem:
    """min/max sum_j <C_j, X_j> subject to linear equalities.

    `blocks` entries are either an int n (n x n Hermitian PSD block) or a
    tuple ("soc", n) / ("nonneg", n). PSD coefficients are n x n Hermitian
    matrices; cone coefficients are real vectors of length n. Missing
    objective entries are zero.
    """

    blocks: list
    objective: list
    constraints: list = field(default_factory=list)
    sense: str = "min"

    def __post_init__(self):
        self.blocks = [_norm_block(b) for b in self.blocks]
        if len(self.objective) != len(self.blocks):
            raise InvalidInput("objective needs one entry per block (None for zero)")
        if self.sense not in ("min", "max"):
            raise InvalidInput("sense must be 'min' or 'max'")
        for j, c in enumerate(self.objective):
            if c is not None:
                _check_coeff(self.blocks[j], c)
        for con in self.constraints:
            for j, a in con.coeffs.items():
                if not 0 <= j < len(self.blocks):
                    raise InvalidInput(f"constraint refers to missing block {j}")
                _check_coeff(self.blocks[j], a)

    def add(self, coeffs, rhs):
        for j, a in coeffs.items():
            _check_coeff(self.blocks[j], a)
        self.constraints.append(Constraint(dict(coeffs), float(rhs)))

    def to_json(self):
        def enc(a):
            a = np.asarray(a)
            return {"shape": list(a.shape), "re": a.real.ravel().tolist(), "im": a.imag.ravel().tolist()}

        return {
            "blocks": [list(b) for b in self.blocks],
            "objective": [None if c is None else enc(c) for c in self.objective],
            "constraints": [{"coeffs": {str(j): enc(a) for j, a in con.coeffs.items()}, "rhs": con.rhs}
                            for con in self.constraints],
            "sense": self.sense,
        }

    @classmethod
    def from_json(cls, obj):
        def dec(o):
            a = np.asarray(o["re"]) + 1j * np.asarray(o["im"])
            a = a.reshape(o["shape"])
            return a if np.any(a.imag) else a.real

        blocks = [tuple(b) for b in obj["blocks"]]
        objective = [None if c is None else dec(c) for c in obj["objective"]]
        cons = [Constraint({int(j): dec(a) for j, a in c["coeffs"].items()}, c["rhs"]) for c in obj["constraints"]]
        return cls(blocks, objective, cons, obj["sense"])

    def dumps(self):
        return json.dumps(self.to_json())


def _norm_block(b):
    if isinstance(b, (int, np.integer)):
        return ("psd", int(b))
    kind, n = b
    if kind not in ("psd", "soc", "nonneg"):
        raise InvalidInput(f"unknown block kind {kind!r}")
    if int(n) < 1:
        raise InvalidInput("block sizes must be positive")
    return (kind, int(n))


def _check_coeff(block, a):
    kind, n = block
    a = np.asarray(a)
    if kind == "psd":
        if a.shape != (n, n):
            raise InvalidInput(f"PSD coefficient must be {n}x{n}, got {a.shape}")
        if np.max(np.abs(a - a.conj().T), initial=0) > 1e-9 * (1 + np.max(np.abs(a), initial=0)):
            raise InvalidInput("PSD coefficients must be Hermitian")
    else:
        if a.shape != (n,) or np.any(np.abs(np.imag(a)) > 0):
            raise InvalidInput(f"{kind} coefficient must be a real vector of length {n}")


@dataclass
class SdpSolution:
    status: str
    X: list
    y: np.ndarray
    S: list
    objective_value: float
    dual_value: float
    primal_residual: float
    dual_residual: float
    relative_gap: float
    iterations: int

    @property
    def ok(self):
        return self.status == OPTIMAL


@dataclass
class Certificate:
    primal_residual: float
    primal_cone_violation: float
    dual_residual: float
    dual_cone_violation: float
    relative_gap: float
    tolerance: float
    flags: list

    @property
    def ok(self):
        return not self.flags


# --------------------------------------------------------- vectorization


class _Svec:
    """Isometric vectorization of real symmetric n x n matrices."""

    def __init__(self, n):
        self.n = n
        self.rows, self.cols = np.tril_indices(n)
        self.scale = np.where(self.rows == self.cols, 1.0, np.sqrt(2.0))
        self.size = self.rows.size

    def vec(self, m):
        return m[..., self.rows, self.cols] * self.scale

    def mat(self, v):
        out = np.zeros(v.shape[:-1] + (self.n, self.n))
        vals = v / self.scale
        out[..., self.rows, self.cols] = vals
        out[..., self.cols, self.rows] = vals
        return out


def _embed(a):
    """Real embedding of a Hermitian matrix, halved so <A~, Y> = <A, X>."""
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]]) / 2


def _unembed(y):
    n = y.shape[0] // 2
    return (y[:n, :n] + y[n:, n:]) / 2 + 1j * (y[n:, :n] - y[:n, n:]) / 2


@dataclass
class _Cone:
    kind: str
    start: int
    stop: int
    n: int              # matrix size (psd) or vector length
    svec: _Svec | None = None

    @property
    def degree(self):
        return 1 if self.kind == "soc" else self.n


# ------------------------------------------------------------ cone algebra


def _identity(cone):
    if cone.kind == "psd":
        return cone.svec.vec(np.eye(cone.n))
    e = np.zeros(cone.n) if cone.kind == "soc" else np.ones(cone.n)
    if cone.kind == "soc":
        e[0] = 1.0
    return e


def _psd_factor(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(m)
        return v * np.sqrt(np.clip(w, 1e-300, None))


class _Scaling:
    """Nesterov-Todd scaling of one cone at the pair (x, s)."""

    def __init__(self, cone, x, s):
        self.cone = cone
        k = cone.kind
        if k == "nonneg":
            self.w = np.sqrt(x / s)
            self.lam = np.sqrt(x * s)
        elif k == "soc":
            J = np.ones(cone.n)
            J[1:] = -1
            self.J = J
            xn = np.sqrt(max(x[0] ** 2 - x[1:] @ x[1:], 1e-300))
            sn = np.sqrt(max(s[0] ** 2 - s[1:] @ s[1:], 1e-300))
            xb, sb = x / xn, s / sn
            gam = np.sqrt((1 + xb @ sb) / 2)
            wb = (xb + J * sb) / (2 * gam)
            e = np.zeros(cone.n)
            e[0] = 1
            v = (wb + e) / np.sqrt(2 * (wb[0] + 1))
            beta = np.sqrt(xn / sn)
            self.W = beta * (2 * np.outer(v, v) - np.diag(J))
            self.Winv = (2 * np.outer(J * v, J * v) - np.diag(J)) / beta
            self.lam = self.W @ s
        else:
            sv = cone.svec
            X, S = sv.mat(x), sv.mat(s)
            lx, ls = _psd_factor(X), _psd_factor(S)
            u, lam, vt = np.linalg.svd(ls.T @ lx)
            lam = np.clip(lam, 1e-300, None)
            self.R = lx @ vt.T / np.sqrt(lam)
            # R^-1 = Lam^-1/2 U^T Ls^T avoids inverting a near-singular R
            self.Rinv = (u.T @ ls.T) / np.sqrt(lam)[:, None]
            self.Wm = self.R @ self.R.T
            self.lam_diag = lam
            self.lam = sv.vec(np.diag(lam))

    # x-space -> scaled space
    def scale_x(self, u):
        k = self.cone.kind
        if k == "nonneg":
            return u / self.w
        if k == "soc":
            return self.Winv @ u
        sv = self.cone.svec
        return sv.vec(self.Rinv @ sv.mat(u) @ self.Rinv.T)

    def scale_s(self, v):
        k = self.cone.kind
        if k == "nonneg":
            return v * self.w
        if k == "soc":
            return self.W @ v
        sv = self.cone.svec
        return sv.vec(self.R.T @ sv.mat(v) @ self.R)

    def unscale_s(self, v):
        k = self.cone.kind
        if k == "nonneg":
            return v / self.w
        if k == "soc":
            return self.Winv @ v
        sv = self.cone.svec
        return sv.vec(self.Rinv.T @ sv.mat(v) @ self.Rinv)

    def hinv_rows(self, a):
        """Apply H^-1 (dual -> primal scaling) to every row of a."""
        k = self.cone.kind
        if k == "nonneg":
            return a * self.w ** 2
        if k == "soc":
            return a @ (self.W @ self.W)
        sv = self.cone.svec
        m = sv.mat(a)
        return sv.vec(self.Wm @ m @ self.Wm)

    def jordan(self, u, v):
        k = self.cone.kind
        if k == "nonneg":
            return u * v
        if k == "soc":
            return np.concatenate([[u @ v], u[0] * v[1:] + v[0] * u[1:]])
        sv = self.cone.svec
        U, V = sv.mat(u), sv.mat(v)
        return sv.vec((U @ V + V @ U) / 2)

    def lam_solve(self, r):
        """D with lam o D = r."""
        k = self.cone.kind
        lam = self.lam
        if k == "nonneg":
            return r / lam
        if k == "soc":
            det = lam[0] ** 2 - lam[1:] @ lam[1:]
            d0 = (lam[0] * r[0] - lam[1:] @ r[1:]) / det
            return np.concatenate([[d0], (r[1:] - d0 * lam[1:]) / lam[0]])
        sv = self.cone.svec
        ld = self.lam_diag
        return sv.vec(2 * sv.mat(r) / np.add.outer(ld, ld))

    def max_step(self, d):
        """Largest alpha with lam + alpha d in the cone (inf if unbounded)."""
        k = self.cone.kind
        lam = self.lam
        if k == "nonneg":
            neg = d < 0
            return np.min(-lam[neg] / d[neg]) if np.any(neg) else np.inf
        if k == "soc":
            return _soc_step(lam, d)
        sv = self.cone.svec
        s = 1 / np.sqrt(self.lam_diag)
        m = sv.mat(d) * np.outer(s, s)
        mn = np.linalg.eigvalsh(m)[0]
        return -1 / mn if mn < 0 else np.inf


def _soc_step(lam, d):
    a = d[0] ** 2 - d[1:] @ d[1:]
    b = lam[0] * d[0] - lam[1:] @ d[1:]
    c = lam[0] ** 2 - lam[1:] @ lam[1:]
    # f(alpha) = a alpha^2 + 2 b alpha + c must stay >= 0 with lam0 + alpha d0 >= 0
    roots = []
    if abs(a) < 1e-300:
        if b < 0:
            roots.append(-c / (2 * b))
    else:
        disc = b * b - a * c
        if disc >= 0:
            sq = np.sqrt(disc)
            for r in ((-b - sq) / a, (-b + sq) / a):
                if r > 0:
                    roots.append(r)
    if d[0] < 0:
        roots.append(-lam[0] / d[0])
    return min(roots) if roots else np.inf


# ------------------------------------------------------------- assembly


class _Standard:
    """Real standard form min c.x s.t. A x = b, x in K."""

    def __init__(self, problem: SdpProblem):
        self.problem = problem
        self.cones = []
        self.complex_block = []
        start = 0
        for j, (kind, n) in enumerate(problem.blocks):
            if kind == "psd":
                cplx = self._is_complex(j)
                size = 2 * n if cplx else n
                sv = _Svec(size)
                cone = _Cone("psd", start, start + sv.size, size, sv)
            else:
                cplx = False
                cone = _Cone(kind, start, start + n, n)
            self.cones.append(cone)
            self.complex_block.append(cplx)
            start = cone.stop
        self.N = start
        sign = -1.0 if problem.sense == "max" else 1.0
        self.c = np.zeros(self.N)
        for j, cj in enumerate(problem.objective):
            if cj is not None:
                self.c[self.cones[j].start:self.cones[j].stop] = sign * self._vec(j, cj)
        m = len(problem.constraints)
        self.A = np.zeros((m, self.N))
        self.b = np.array([con.rhs for con in problem.constraints], dtype=float)
        for i, con in enumerate(problem.constraints):
            for j, a in con.coeffs.items():
                self.A[i, self.cones[j].start:self.cones[j].stop] += self._vec(j, a)

    def _is_complex(self, j):
        mats = [self.problem.objective[j]] + [c.coeffs.get(j) for c in self.problem.constraints]
        return any(m is not None and np.any(np.abs(np.imag(m)) > 0) for m in mats)

    def _vec(self, j, a):
        cone = self.cones[j]
        if cone.kind != "psd":
            return np.asarray(a, dtype=float)
        a = np.asarray(a)
        if self.complex_block[j]:
            a = _embed(a.astype(complex))
        else:
            a = np.real(a)
        return cone.svec.vec((a + a.T) / 2)

    def unpack(self, v):
        out = []
        for j, cone in enumerate(self.cones):
            seg = v[cone.start:cone.stop]
            if cone.kind == "psd":
                m = cone.svec.mat(seg)
                out.append(_unembed(m) if self.complex_block[j] else m)
            else:
                out.append(seg.copy())
        return out


def _independent_rows(A, b, tol=1e-10):
    """Indices of a maximal independent row set; raises on inconsistency."""
    m = A.shape[0]
    if m == 0:
        return np.arange(0), True
    _, r, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(diag[0], 1e-300))) if diag.size else 0
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(m), keep)
    consistent = True
    if drop.size:
        coef, *_ = np.linalg.lstsq(A[keep].T, A[drop].T, rcond=None)
        mismatch = np.abs(b[drop] - coef.T @ b[keep])
        consistent = bool(np.all(mismatch <= 1e-8 * (1 + np.abs(b).max())))
    return keep, consistent


@dataclass(frozen=True)
class SolverOptions:
    gap_tol: float = TOL.sdp_gap
    feas_tol: float = TOL.sdp_feas
    infeas_tol: float = 1e-8
    max_iter: int = 150
    step_fraction: float = 0.99
    verbose: bool = False
    accept_gap: float = 9e-7


def solve_sdp(problem: SdpProblem, tolerances: SolverOptions | None = None) -> SdpSolution:
    """Solve `problem`; the status is one of Optimal, Infeasible, Unbounded,
    NumericalFailure. Deterministic for identical inputs."""
    opts = tolerances or SolverOptions()
    std = _Standard(problem)
    A, b, c = std.A, std.b, std.c
    m_full = A.shape[0]
    keep, consistent = _independent_rows(A, b)
    if not consistent:
        return _failure(std, INFEASIBLE, m_full, 0)
    A, b = A[keep], b[keep]
    norms = np.linalg.norm(A, axis=1)
    norms[norms == 0] = 1.0
    A = A / norms[:, None]
    b = b / norms
    status, x, y, s, tau, kappa, it, info = _hsd(A, b, c, std.cones, opts)
    y_full = np.zeros(m_full)
    sign = -1.0 if problem.sense == "max" else 1.0
    if status == OPTIMAL or (status == NUMERICAL_FAILURE and tau > 0):
        xs, ys, ss = x / tau, y / tau, s / tau
    else:
        xs, ys, ss = x, y, s
    y_full[keep] = ys / norms
    pobj = sign * float(c @ xs)
    dobj = sign * float(b @ ys)
    return SdpSolution(
        status, std.unpack(xs), sign * y_full, std.unpack(ss), pobj, dobj,
        info["pres"], info["dres"], info["gap"], it,
    )


def _failure(std, status, m, it):
    z = np.zeros(std.N)
    return SdpSolution(status, std.unpack(z), np.zeros(m), std.unpack(z), float("nan"), float("nan"),
                       float("inf"), float("inf"), float("inf"), it)


def _hsd(A, b, c, cones, opts):
    m, N = A.shape
    x = np.concatenate([_identity(k) for k in cones])
    s = x.copy()
    y = np.zeros(m)
    tau = kappa = 1.0
    nu = sum(k.degree for k in cones)
    nb = 1 + np.linalg.norm(b)
    nc = 1 + np.linalg.norm(c)
    info = {"pres": np.inf, "dres": np.inf, "gap": np.inf}
    best = None
    status = NUMERICAL_FAILURE
    for it in range(opts.max_iter + 1):
        rp = b * tau - A @ x
        rd = c * tau - A.T @ y - s
        pobj, dobj = c @ x, b @ y
        rg = kappa + pobj - dobj
        mu = (x @ s + tau * kappa) / (nu + 1)
        pres = np.linalg.norm(rp) / tau / nb
        dres = np.linalg.norm(rd) / tau / nc
        gap = abs(pobj - dobj) / tau / (1 + abs(pobj / tau) + abs(dobj / tau))
        info = {"pres": float(pres), "dres": float(dres), "gap": float(gap)}
        if opts.verbose:
            print(f"{it:3d} pobj={pobj / tau:+.9e} dobj={dobj / tau:+.9e} pres={pres:.1e} "
                  f"dres={dres:.1e} gap={gap:.1e} tau={tau:.1e} kappa={kappa:.1e} mu={mu:.1e}")
        if best is None or max(pres, dres, gap) < best[0]:
            best = (max(pres, dres, gap), x.copy(), y.copy(), s.copy(), tau, kappa, dict(info))
        if pres < opts.feas_tol and dres < opts.feas_tol and gap < opts.gap_tol:
            return OPTIMAL, x, y, s, tau, kappa, it, info
        if dobj > 0 and np.linalg.norm(A.T @ y + s) / dobj < opts.infeas_tol:
            return INFEASIBLE, x, y, s, tau, kappa, it, info
        if pobj < 0 and np.linalg.norm(A @ x) / -pobj < opts.infeas_tol:
            return UNBOUNDED, x, y, s, tau, kappa, it, info
        if it == opts.max_iter:
            break
        try:
            step = _newton_step(A, b, c, cones, x, y, s, tau, kappa, rp, rd, rg, mu, opts)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError):
            break
        if step is None:
            break
        x, y, s, tau, kappa = step
    # fall back to the best iterate if it is accurate enough for a certificate
    _, x, y, s, tau, kappa, info = best
    # Problems without a strictly feasible point (e.g. a constraint pinned to
    # its extreme value) stall near sqrt(eps); accept the best iterate when it
    # still meets the certificate tolerance.
    if info["pres"] < 1e-7 and info["dres"] < 1e-7 and info["gap"] < opts.accept_gap:
        return OPTIMAL, x, y, s, tau, kappa, it, info
    return status, x, y, s, tau, kappa, it, info


def _segments(v, cones):
    return [v[k.start:k.stop] for k in cones]


def _newton_step(A, b, c, cones, x, y, s, tau, kappa, rp, rd, rg, mu, opts):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _newton_core(A, b, c, cones, x, y, s, tau, kappa, rp, rd, rg, mu, opts)


def _newton_core(A, b, c, cones, x, y, s, tau, kappa, rp, rd, rg, mu, opts):
    scal = [_Scaling(k, xs, ss) for k, xs, ss in zip(cones, _segments(x, cones), _segments(s, cones))]
    lam = [sc.lam for sc in scal]

    def hinv_rows(mat):
        out = np.empty_like(mat)
        for k, sc in zip(cones, scal):
            out[..., k.start:k.stop] = sc.hinv_rows(mat[..., k.start:k.stop])
        return out

    HA = hinv_rows(A)
    M = A @ HA.T
    M = (M + M.T) / 2
    try:
        factor = scipy.linalg.cho_factor(M)
    except np.linalg.LinAlgError:
        reg = 1e-12 * (1 + np.abs(np.diag(M)).max())
        factor = scipy.linalg.cho_factor(M + reg * np.eye(M.shape[0]))

    def msolve(r):
        return scipy.linalg.cho_solve(factor, r)

    Hc = hinv_rows(c[None, :])[0]
    y2 = msolve(b + A @ Hc)
    x2 = HA.T @ y2 - Hc
    denom = b @ y2 - c @ x2 + kappa / tau

    def direction(rhs_c, rhs_tk, eta):
        D = [sc.lam_solve(r) for sc, r in zip(scal, rhs_c)]
        uD = np.concatenate([sc.unscale_s(d) for sc, d in zip(scal, D)])
        q = hinv_rows((uD - eta * rd)[None, :])[0]
        y1 = msolve(eta * rp - A @ q)
        x1 = HA.T @ y1 + q
        dtau = (eta * rg - b @ y1 + c @ x1 + rhs_tk / tau) / denom
        dy = y1 + y2 * dtau
        dx = x1 + x2 * dtau
        # ds from the dual equation keeps the linear residuals exact even when
        # the scaling is computed near the cone boundary
        ds = eta * rd - A.T @ dy + c * dtau
        dxs = [sc.scale_x(seg) for sc, seg in zip(scal, _segments(dx, cones))]
        dss = [sc.scale_s(seg) for sc, seg in zip(scal, _segments(ds, cones))]
        dkappa = (rhs_tk - kappa * dtau) / tau
        return dx, dy, ds, dtau, dkappa, dxs, dss

    def max_alpha(dxs, dss, dtau, dkappa):
        a = np.inf
        for sc, u, v in zip(scal, dxs, dss):
            a = min(a, sc.max_step(u), sc.max_step(v))
        if dtau < 0:
            a = min(a, -tau / dtau)
        if dkappa < 0:
            a = min(a, -kappa / dkappa)
        return a

    # predictor
    rhs = [-sc.jordan(l, l) for sc, l in zip(scal, lam)]
    dx, dy, ds, dtau, dkappa, dxs, dss = direction(rhs, -tau * kappa, 1.0)
    alpha_aff = min(1.0, max_alpha(dxs, dss, dtau, dkappa))
    sigma = (1 - alpha_aff) ** 3
    # corrector
    rhs = []
    for sc, l, u, v in zip(scal, lam, dxs, dss):
        r = -sc.jordan(l, l) - sc.jordan(u, v) + sigma * mu * _identity(sc.cone)
        rhs.append(r)
    rhs_tk = -tau * kappa - dtau * dkappa + sigma * mu
    dx, dy, ds, dtau, dkappa, dxs, dss = direction(rhs, rhs_tk, 1 - sigma)
    alpha = min(1.0, opts.step_fraction * max_alpha(dxs, dss, dtau, dkappa))
    if not np.isfinite(alpha) or alpha < 1e-12:
        return None
    if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy)) and np.all(np.isfinite(ds))):
        return None
    return x + alpha * dx, y + alpha * dy, s + alpha * ds, tau + alpha * dtau, kappa + alpha * dkappa


# ----------------------------------------------------------- certificate


def _cone_violation(block, v):
    kind, _ = block
    if kind == "psd":
        h = (v + v.conj().T) / 2
        return max(0.0, -float(np.linalg.eigvalsh(h)[0]))
    v = np.real(v)
    if kind == "soc":
        return max(0.0, float(np.linalg.norm(v[1:]) - v[0]))
    return max(0.0, -float(v.min()))


def _inner(block, a, x):
    if block[0] == "psd":
        return float(np.real(np.sum(np.conj(a) * x)))
    return float(np.dot(np.real(a), np.real(x)))


def certify(solution: SdpSolution, problem: SdpProblem, tol=TOL.certificate) -> Certificate:
    """Recompute residuals from the original problem data and the solution."""
    blocks = problem.blocks
    X = solution.X
    b = np.array([con.rhs for con in problem.constraints], dtype=float)
    ax = np.array([sum(_inner(blocks[j], a, X[j]) for j, a in con.coeffs.items())
                   for con in problem.constraints], dtype=float)
    pres = float(np.linalg.norm(ax - b) / (1 + np.linalg.norm(b))) if b.size else 0.0
    pcone = max((_cone_violation(bl, xj) for bl, xj in zip(blocks, X)), default=0.0)
    sign = -1.0 if problem.sense == "max" else 1.0
    cnorm = 1.0
    dcone = 0.0
    for j, bl in enumerate(blocks):
        cj = problem.objective[j]
        zero = np.zeros((bl[1], bl[1]) if bl[0] == "psd" else bl[1])
        sj = np.asarray(zero if cj is None else cj, dtype=complex) * sign
        cnorm = max(cnorm, float(np.abs(sj).max(initial=0)))
        for i, con in enumerate(problem.constraints):
            if j in con.coeffs:
                sj = sj - sign * solution.y[i] * np.asarray(con.coeffs[j])
        dcone = max(dcone, _cone_violation(bl, sj if bl[0] == "psd" else np.real(sj)))
    dres = dcone / (1 + cnorm)
    pobj = sum(_inner(bl, cj, xj) for bl, cj, xj in zip(blocks, problem.objective, X) if cj is not None)
    dobj = float(b @ solution.y) if b.size else 0.0
    gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
    flags = []
    if not np.isfinite(pres) or pres > tol:
        flags.append("primal_residual")
    if pcone > tol:
        flags.append("primal_cone")
    if not np.isfinite(dres) or dres > tol:
        flags.append("dual_residual")
    if not np.isfinite(gap) or gap > tol:
        flags.append("relative_gap")
    return Certificate(pres, pcone, dres, dcone, gap, tol, flags)

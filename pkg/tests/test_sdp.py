import json

import numpy as np
import pytest

from quditlab.errors import InvalidInput
from quditlab.sdp import Constraint, SdpProblem, SolverOptions, certify, solve_sdp
from quditlab.steering import guessing_problem


def e11(n=2):
    a = np.zeros((n, n))
    a[0, 0] = 1
    return a


def test_min_trace_fixed_corner():
    p = SdpProblem([2], [np.eye(2)], [Constraint({0: e11()}, 1.0)])
    s = solve_sdp(p)
    assert s.ok
    assert s.objective_value == pytest.approx(1, abs=1e-7)
    assert np.allclose(s.X[0], np.diag([1, 0]), atol=1e-6)
    assert certify(s, p).ok


def test_max_top_eigenvalue():
    p = SdpProblem([2], [np.diag([1.0, -1.0])], [Constraint({0: np.eye(2)}, 1.0)], "max")
    s = solve_sdp(p)
    assert s.ok and s.objective_value == pytest.approx(1, abs=1e-7)


def test_infeasible():
    p = SdpProblem([2], [np.eye(2)], [Constraint({0: e11()}, -1.0)])
    assert solve_sdp(p).status == "Infeasible"


def test_unbounded():
    p = SdpProblem([2], [-np.eye(2)], [Constraint({0: e11()}, 1.0)])
    assert solve_sdp(p).status == "Unbounded"


def test_second_order_cone():
    # min t s.t. (t, x1, x2) in SOC, x1 = 3, x2 = 4  ->  t = 5
    p = SdpProblem([("soc", 3)], [np.array([1.0, 0, 0])],
                   [Constraint({0: np.array([0.0, 1, 0])}, 3.0), Constraint({0: np.array([0.0, 0, 1])}, 4.0)])
    s = solve_sdp(p)
    assert s.ok and s.objective_value == pytest.approx(5, abs=1e-6)


def test_nonneg_lp():
    # max x0 + 2 x1 s.t. x0 + x1 = 1, x >= 0
    p = SdpProblem([("nonneg", 2)], [np.array([1.0, 2.0])], [Constraint({0: np.ones(2)}, 1.0)], "max")
    s = solve_sdp(p)
    assert s.ok and s.objective_value == pytest.approx(2, abs=1e-6)


def test_complex_hermitian_block():
    # max Re <psi|X|psi>-type objective: top eigenvalue of a complex Hermitian C
    C = np.array([[1.0, 1j], [-1j, 1.0]])
    p = SdpProblem([2], [C], [Constraint({0: np.eye(2)}, 1.0)], "max")
    s = solve_sdp(p)
    assert s.ok and s.objective_value == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-6)
    assert np.iscomplexobj(s.X[0]) and np.abs(s.X[0][0, 1]) > 0.4


def test_randomness_instance():
    s = solve_sdp(guessing_problem(2, 2.0, 0))
    assert s.ok and s.objective_value == pytest.approx(0.5, abs=1e-3)


def test_certify_flags_perturbation(rng):
    p = SdpProblem([3], [np.eye(3)], [Constraint({0: e11(3)}, 1.0), Constraint({0: np.ones((3, 3))}, 2.0)])
    s = solve_sdp(p)
    c = certify(s, p)
    assert c.ok
    assert max(c.primal_residual, c.dual_residual, c.relative_gap) < 1e-6
    noise = rng.normal(scale=1e-3, size=(3, 3))
    s.X[0] = s.X[0] + (noise + noise.T) / 2
    bad = certify(s, p)
    assert not bad.ok and bad.primal_residual > 1e-4


def test_validation():
    with pytest.raises(InvalidInput):
        SdpProblem([2], [np.array([[0, 1], [0, 0]])])
    with pytest.raises(InvalidInput):
        SdpProblem([2], [None], [Constraint({1: np.eye(2)}, 1.0)])
    with pytest.raises(InvalidInput):
        SdpProblem([("cube", 2)], [None])
    with pytest.raises(InvalidInput):
        SdpProblem([2], [np.eye(2)], sense="minimize")


def random_problem(rng, n=4, m=5, complex_=False):
    def herm():
        a = rng.normal(size=(n, n)) + (1j * rng.normal(size=(n, n)) if complex_ else 0)
        return (a + a.conj().T) / 2

    g = rng.normal(size=(n, n)) + (1j * rng.normal(size=(n, n)) if complex_ else 0)
    x0 = g @ g.conj().T + np.eye(n)
    A = [herm() for _ in range(m)]
    b = [float(np.real(np.trace(a @ x0))) for a in A]
    c = herm() + n * np.eye(n)  # positive definite objective keeps the problem bounded
    return SdpProblem([n], [c], [Constraint({0: a}, bi) for a, bi in zip(A, b)]), c, A, b


@pytest.mark.parametrize("complex_", [False, True])
def test_cvxpy_cross_check(rng, complex_):
    cp = pytest.importorskip("cvxpy")
    for _ in range(5):
        prob, c, A, b = random_problem(rng, complex_=complex_)
        s = solve_sdp(prob)
        assert s.ok and certify(s, prob).ok
        X = cp.Variable((4, 4), hermitian=True) if complex_ else cp.Variable((4, 4), symmetric=True)
        re = cp.real if complex_ else (lambda e: e)
        cons = [X >> 0] + [re(cp.trace(a @ X)) == bi for a, bi in zip(A, b)]
        ref = cp.Problem(cp.Minimize(re(cp.trace(c @ X))), cons)
        ref.solve()
        assert s.objective_value == pytest.approx(ref.value, rel=1e-5, abs=1e-5)


def test_scaling_invariance(rng):
    prob, c, A, b = random_problem(rng)
    base = solve_sdp(prob).objective_value
    scaled = SdpProblem([4], [7.0 * c], [Constraint({0: 3.0 * a}, 3.0 * bi) for a, bi in zip(A, b)])
    assert solve_sdp(scaled).objective_value == pytest.approx(7 * base, rel=1e-6)


def test_determinism_and_json(rng):
    prob, *_ = random_problem(rng, complex_=True)
    s1, s2 = solve_sdp(prob), solve_sdp(prob)
    assert s1.objective_value == s2.objective_value and np.array_equal(s1.X[0], s2.X[0])
    back = SdpProblem.from_json(json.loads(prob.dumps()))
    assert back.dumps() == prob.dumps()
    assert solve_sdp(back).objective_value == pytest.approx(s1.objective_value, abs=1e-9)


def test_weak_duality(rng):
    for _ in range(5):
        prob, *_ = random_problem(rng)
        s = solve_sdp(prob)
        # primal min >= dual value up to the reported gap
        assert s.objective_value >= s.dual_value - 1e-6 * (1 + abs(s.objective_value))
        assert s.relative_gap < 1e-6


def test_options_limit_iterations(rng):
    prob, *_ = random_problem(rng)
    s = solve_sdp(prob, SolverOptions(max_iter=2))
    assert s.status == "NumericalFailure" and s.iterations <= 2

"""Device-independent lower bounds on the local dimension.

f_{y,y',x}(p) = sum_{b,b'} (sum_a sqrt(p(ab|xy) p(ab'|xy')))^2 upper bounds
the best value reachable with local dimension D, and it equals 1/D at best,
so 1/f is a certified lower bound on the dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import NoiseModel
from .core import MeasurementBasis, PureState, basis_from_vectors, common_eigenbasis, \
    computational_basis, make_pure_state, maximally_entangled, pauli_string, werner
from .correlations import CorrelationTable, born_probabilities, sample_counts
from .errors import InvalidDimension, InvalidIndex, InvalidInput

# Signed Mermin-Peres square; rows multiply to +I, columns to -I.
MAGIC_SQUARE = (
    ((1, "IZ"), (1, "ZI"), (1, "ZZ")),
    ((1, "XI"), (1, "IX"), (1, "XX")),
    ((-1, "XZ"), (-1, "ZX"), (1, "YY")),
)
PENTAGRAM_L3 = ((1, "ZII"), (1, "IZI"), (1, "IIZ"), (1, "ZZZ"))
PENTAGRAM_L5 = ((1, "ZZZ"), (1, "ZXX"), (1, "XZX"), (1, "XXZ"))


@dataclass(frozen=True)
class WitnessResult:
    f_value: float
    D: float
    certified_dim: int
    settings_used: tuple

    def to_json(self):
        return {"f": self.f_value, "D": self.D, "certified_dim": self.certified_dim,
                "settings": list(self.settings_used)}


@dataclass(frozen=True)
class GameStrategy:
    """State, bases and +/- answer strings of a nonlocal game strategy.

    `alice_bases`/`bob_bases` map a setting label to a basis; answer strings
    list, per outcome, the eigenvalue signs of the operators of that setting.
    `settings` is the (y, y', x) label triple used by the witness. Parities
    map each setting to the required sign product of every game copy.
    """

    name: str
    state: PureState
    alice_bases: dict
    bob_bases: dict
    alice_answers: dict
    bob_answers: dict
    settings: tuple
    alice_parity: dict
    bob_parity: dict

    def table(self, rho=None) -> CorrelationTable:
        """Exact table with Alice setting x and Bob settings (y, y')."""
        y, y2, x = self.settings
        rho = self.state if rho is None else rho
        return born_probabilities(rho, [self.alice_bases[x]], [self.bob_bases[y], self.bob_bases[y2]])

    def check_parity(self):
        for answers, parity in ((self.alice_answers, self.alice_parity), (self.bob_answers, self.bob_parity)):
            for key, strings in answers.items():
                want = parity[key]
                width = len(strings[0]) // len(want)
                for s in strings:
                    for i, sign in enumerate(want):
                        chunk = s[i * width:(i + 1) * width]
                        if np.prod([1 if c == "+" else -1 for c in chunk]) != sign:
                            return False
        return True


def witness_bound(table: CorrelationTable, y, y2, x, labels=None) -> WitnessResult:
    """f_{y,y',x}, D = 1/f and the certified dimension ceil(D).

    y, y2 and x index the table's settings (0-based); `labels` is stored in
    the result instead of the indices when given.
    """
    ma, mb = table.settings
    if not (0 <= x < ma and 0 <= y < mb and 0 <= y2 < mb):
        raise InvalidIndex(f"settings ({y}, {y2}, {x}) not present in a {ma}x{mb} table")
    s1 = np.sqrt(np.clip(table.p[:, :, x, y], 0, None))
    s2 = np.sqrt(np.clip(table.p[:, :, x, y2], 0, None))
    f = float(np.sum((s1.T @ s2) ** 2))
    D = 1.0 / f
    # guard against ceil(4.0000000001) from floating round-off
    dim = max(1, math.ceil(D - 1e-9))
    return WitnessResult(f, D, dim, tuple(labels) if labels else (y, y2, x))


def _ops(signed):
    return [pauli_string(label, sign) for sign, label in signed]


def _product_ops(groups):
    """Operators of several independent copies acting on the joint register."""
    sizes = [2 ** len(g[0][1]) for g in groups]
    out = []
    for i, g in enumerate(groups):
        left = int(np.prod(sizes[:i]))
        right = int(np.prod(sizes[i + 1:]))
        for op in _ops(g):
            out.append(np.kron(np.kron(np.eye(left), op), np.eye(right)))
    return out


def _signs(basis: MeasurementBasis):
    return tuple("".join("+" if v > 0 else "-" for v in tup) for tup in basis.eigenvalues)


def _bob_side(basis: MeasurementBasis) -> MeasurementBasis:
    # For |psi+> Alice's result |a> steers Bob to |a*>, so Bob measures the
    # conjugated eigenvectors to reproduce the operator correlations.
    return basis_from_vectors(basis.vectors.conj(), eigenvalues=basis.eigenvalues)


def _strategy(name, dim, alice_sets, bob_sets, settings, alice_parity, bob_parity):
    alice = {k: common_eigenbasis(_product_ops(v)) for k, v in alice_sets.items()}
    bob = {k: _bob_side(common_eigenbasis(_product_ops(v))) for k, v in bob_sets.items()}
    return GameStrategy(
        name, maximally_entangled(dim), alice, bob,
        {k: _signs(b) for k, b in alice.items()}, {k: _signs(b) for k, b in bob.items()},
        settings, alice_parity, bob_parity,
    )


def magic_square_strategy() -> GameStrategy:
    """|psi+_4>; Alice row 1, Bob columns 1 and 2 of the signed square."""
    rows = MAGIC_SQUARE
    cols = tuple(tuple(rows[r][c] for r in range(3)) for c in range(3))
    return _strategy(
        "magic_square", 4,
        {1: [rows[0]]}, {1: [cols[0]], 2: [cols[1]]},
        (1, 2, 1), {1: (1,)}, {1: (-1,), 2: (-1,)},
    )


def magic_pentagram_strategy() -> GameStrategy:
    """|psi+_8>; Alice line 3, Bob lines 3 and 5 of the pentagram."""
    return _strategy(
        "magic_pentagram", 8,
        {3: [PENTAGRAM_L3]}, {3: [PENTAGRAM_L3], 5: [PENTAGRAM_L5]},
        (3, 5, 3), {3: (1,)}, {3: (1,), 5: (-1,)},
    )


def two_copy_square_strategy() -> GameStrategy:
    """Two magic squares in parallel on |psi+_16>."""
    rows = MAGIC_SQUARE
    cols = tuple(tuple(rows[r][c] for r in range(3)) for c in range(3))
    return _strategy(
        "two_copy_square", 16,
        {(1, 1): [rows[0], rows[0]]},
        {(1, 1): [cols[0], cols[0]], (2, 2): [cols[1], cols[1]]},
        ((1, 1), (2, 2), (1, 1)), {(1, 1): (1, 1)}, {(1, 1): (-1, -1), (2, 2): (-1, -1)},
    )


def embed_state(d, host) -> PureState:
    """sum_{k<d} |kk>/sqrt(d) inside a host x host register."""
    if d < 1 or d > host:
        raise InvalidDimension(f"cannot embed d={d} in host dimension {host}")
    v = np.zeros(host * host, dtype=complex)
    v[np.arange(d) * (host + 1)] = 1.0
    return make_pure_state(v)


def host_strategy(d) -> GameStrategy:
    """Smallest game strategy whose register holds a d-level system."""
    if d <= 4:
        return magic_square_strategy()
    if d <= 8:
        return magic_pentagram_strategy()
    if d <= 16:
        return two_copy_square_strategy()
    raise InvalidDimension(f"scenario I supports d <= 16, got {d}")


def scenario_table(scenario, d, noise: NoiseModel | None = None, shots=0, seed=0) -> tuple:
    """Table and (y, y', x) indices for scenario I (game) or II (computational)."""
    noise = noise or NoiseModel()
    if scenario in ("I", 1, "1"):
        strat = host_strategy(d)
        psi = embed_state(d, int(round(np.sqrt(strat.state.dim))))
        rho = werner(psi, noise.werner_visibility)
        table = strat.table(rho)
        labels = strat.settings
    elif scenario in ("II", 2, "2"):
        if d < 2:
            raise InvalidDimension("d must be >= 2")
        comp = computational_basis(d)
        rho = werner(maximally_entangled(d), noise.werner_visibility)
        table = born_probabilities(rho, [comp], [comp])
        table = CorrelationTable(np.concatenate([table.p, table.p], axis=3))
        labels = (1, 1, 1)
    else:
        raise InvalidInput(f"unknown scenario {scenario!r}")
    if shots:
        table = sample_counts(table, shots, noise, seed)
    return table, (0, 1, 0), labels


def certify_dimension(scenario, d, noise=None, shots=0, seed=0) -> WitnessResult:
    table, idx, labels = scenario_table(scenario, d, noise, shots, seed)
    return witness_bound(table, *idx, labels=labels)

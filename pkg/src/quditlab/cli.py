"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
Results are written as JSON (sorted keys, no timestamps) or RFC-4180 CSV, so
the same arguments and seed always give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import nonlocality, qkd, reference, steering, tomography, witness
from .circuit import NoiseModel, apply_noise, compile_basis, fourier_state, triangular_phases
from .config import worker_count
from .core import PureState, computational_basis, entangled_state, fidelity, make_pure_state, maximally_entangled, \
    werner, basis_from_vectors
from .correlations import CorrelationTable, born_probabilities, sample_counts
from .errors import InvalidInput, QuditLabError
from .sdp import SolverOptions

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ config


@dataclass
class ExperimentConfig:
    """One CLI invocation as data; `params` holds subcommand-specific flags."""

    subcommand: str
    d: int | None = None
    shots: int = 0
    noise: str = ""
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, obj):
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise InvalidInput(f"unknown config keys: {sorted(extra)}")
        if "subcommand" not in obj:
            raise InvalidInput("config needs a subcommand")
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    def validate(self):
        if self.subcommand not in SUBCOMMANDS or self.subcommand == "run":
            raise InvalidInput(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("json", "csv"):
            raise InvalidInput("format must be json or csv")
        bad = set(self.tolerances) - {"gap_tol", "feas_tol", "max_iter"}
        if bad:
            raise InvalidInput(f"unknown solver tolerances: {sorted(bad)}")
        if self.shots < 0:
            raise InvalidInput("shots must be >= 0")
        NoiseModel.parse(self.noise)

    def argv(self):
        out = self.subcommand.split()
        params = dict(self.params)
        if self.subcommand == "reproduce":
            out.append(str(params.pop("table", "")))
        if self.d is not None:
            out += ["--d", str(self.d)]
        if self.subcommand not in ("qkd", "circuit compile", "reproduce"):
            out += ["--shots", str(self.shots), "--seed", str(self.seed)]
            if self.noise:
                out += ["--noise", self.noise]
        for k, v in self.tolerances.items():
            out += [f"--{k.replace('_', '-')}", str(v)]
        if self.output:
            out += ["--out", self.output]
        out += ["--format", self.format]
        for k, v in params.items():
            flag = f"--{k.replace('_', '-')}"
            if v is True:
                out.append(flag)
            elif v is not False and v is not None:
                out += [flag, str(v)]
        return out


def run(config: ExperimentConfig) -> int:
    config.validate()
    return main(config.argv())


# ------------------------------------------------------------------ helpers


def _map(fn, items):
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _dump_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _dump_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf)  # RFC 4180: CRLF, minimal quoting
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solver_options(args):
    kw = {k: getattr(args, k) for k in ("gap_tol", "feas_tol", "max_iter") if getattr(args, k, None) is not None}
    return SolverOptions(**kw) if kw else None


def _noisy_table(state, alice, bob, args):
    noise = NoiseModel.parse(args.noise)
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0x1177]))
    rho, bases = apply_noise(state, noise, list(alice) + list(bob), rng)
    table = born_probabilities(rho, bases[:len(alice)], bases[len(alice):])
    if args.shots:
        table = sample_counts(table, args.shots, noise, args.seed)
    return table


def _table_output(args, payload, table):
    if args.format == "csv":
        return table.to_csv()
    return _dump_json(payload)


# ------------------------------------------------------------------ commands


def cmd_bell(args):
    if args.inequality == "xi":
        args.inequality = "qutrit"
    if args.inequality == "qutrit":
        if args.d not in (None, 3):
            raise InvalidInput("the qutrit family needs d=3")
        args.d = 3
        gamma = args.gamma if args.gamma is not None else nonlocality.qutrit_family_max(args.xi)[0]
        state = nonlocality.partially_entangled_qutrit(gamma)
    else:
        args.d = 2 if args.d is None else args.d
        state = maximally_entangled(args.d)
    alice, bob = nonlocality.satwap_bases(args.d)
    table = _noisy_table(state, alice, bob, args)
    errors = args.shots > 0 and not args.no_errors
    kw = dict(errors=errors, resamples=args.resamples, seed=args.seed)
    if args.inequality == "satwap":
        res = nonlocality.satwap_value(table, **kw)
    elif args.inequality == "cglmp":
        res = nonlocality.cglmp_value(table, **kw)
    else:
        res = nonlocality.qutrit_family_value(table, args.xi, **kw)
    payload = {**res.to_json(), "d": args.d, "shots": args.shots, "seed": args.seed, "noise": args.noise}
    return _table_output(args, payload, table)


def cmd_witness(args):
    res = witness.certify_dimension(args.scenario, args.d, NoiseModel.parse(args.noise), args.shots, args.seed)
    return _dump_json({**res.to_json(), "scenario": args.scenario, "d": args.d, "shots": args.shots,
                       "seed": args.seed, "noise": args.noise})


def _steering_table(args):
    return _noisy_table(maximally_entangled(args.d), steering.alice_default_bases(args.d),
                        steering.steering_bases(args.d), args)


def cmd_steering(args):
    table = _steering_table(args)
    res = steering.steering_value(table)
    std = None
    if args.shots and not args.no_errors:
        from .correlations import bootstrap_errors
        std = bootstrap_errors(table, lambda t: steering.steering_value(t).beta, args.resamples, args.seed)[1]
    payload = {**res.to_json(), "std": std, "violation": res.beta - res.lhs_bound, "d": args.d,
               "shots": args.shots, "seed": args.seed, "noise": args.noise}
    return _table_output(args, payload, table)


def cmd_randomness(args):
    beta = args.beta
    if beta is None:
        beta = steering.steering_value(_steering_table(args)).beta
    res = steering.local_randomness(beta_obs=beta, d=args.d, x_star=args.x_star,
                                    allow_large=args.allow_large, options=_solver_options(args))
    return _dump_json({**res.to_json(), "beta": beta, "d": args.d})


def cmd_tomo(args):
    d = args.d
    target = maximally_entangled(d) if args.gamma is None else entangled_state([float(g) for g in args.gamma.split(",")])
    if target.dim != d * d:
        raise InvalidInput("target state does not match --d")
    rho = werner(target, NoiseModel.parse(args.noise).werner_visibility)
    m = args.ops if args.ops else d**4
    labels = tomography.sample_labels(d, m, args.seed) if args.ops else tomography.operator_labels(d)
    job = tomography.measure_operators(rho, labels, args.shots, args.seed, simulate_mesh=args.mesh, method=args.method)
    if args.method == "cs":
        est = tomography.cs_reconstruct(job, c=args.eps_c, options=_solver_options(args))
    else:
        est = tomography.linear_inversion(job)
    return _dump_json({"density": est.to_json(), "fidelity": fidelity(est, target), "method": args.method,
                       "ops": m, "shots": args.shots, "seed": args.seed, "d": d})


def cmd_qkd(args):
    if args.from_table:
        with open(args.from_table) as fh:
            table = CorrelationTable.from_json(json.load(fh))
        F, d = qkd.fidelity_from_table(table), table.d
    else:
        if args.fidelity is None or args.d is None:
            raise InvalidInput("give --d and --fidelity, or --from-table")
        F, d = args.fidelity, args.d
    res = qkd.key_rate(F, d, args.attack)
    return _dump_json({**res.to_json(), "qber_threshold": qkd.qber_threshold(d, args.attack)})


def _parse_vector(text):
    try:
        return np.array([complex(t.strip().replace(" ", "")) for t in text.split(",")])
    except ValueError:
        raise InvalidInput(f"cannot parse amplitudes {text!r}") from None


def cmd_circuit(args):
    if args.state:
        with open(args.state) as fh:
            psi = PureState.from_json(json.load(fh))
        settings = [triangular_phases(psi, args.k0, args.layout)]
    elif args.vector:
        settings = [triangular_phases(make_pure_state(_parse_vector(args.vector)), args.k0, args.layout)]
    else:
        if args.d is None:
            raise InvalidInput("give --state, --vector, or --d with --basis")
        if args.basis == "computational":
            basis = computational_basis(args.d)
        else:
            basis = basis_from_vectors(np.array([fourier_state(args.d, l).amplitudes for l in range(args.d)]))
        settings = compile_basis(basis, args.k0, args.layout)
    return _dump_json({"settings": [s.to_json() for s in settings]})


# ------------------------------------------------------------------ reproduce


def _table1_row(d):
    ideal = nonlocality.ideal_table(d)
    return [d, 2.0, nonlocality.cglmp_value(ideal).value, nonlocality.satwap_classical_bound(d),
            nonlocality.satwap_value(ideal).value]


def _steering_row(d):
    table = born_probabilities(maximally_entangled(d), steering.alice_default_bases(d), steering.steering_bases(d))
    return [d, steering.lhs_bound(d), steering.steering_value(table).beta]


def _witness_row(d):
    return [d, witness.certify_dimension("I", d).D if d <= 16 else float("nan"), witness.certify_dimension("II", d).D]


def _qkd_row(d):
    return [d, qkd.key_rate(1.0, d).R_sk, qkd.qber_threshold(d, "coherent"), qkd.qber_threshold(d, "individual")]


def _selftest_row(xi):
    gamma, imax = nonlocality.qutrit_family_max(xi)
    table = nonlocality.ideal_table(3, nonlocality.partially_entangled_qutrit(gamma))
    return [xi, gamma, imax, nonlocality.qutrit_family_value(table, xi).value, nonlocality.qutrit_classical_bound(xi)]


def _randomness_row(d):
    res = steering.local_randomness(beta_obs=2.0, d=d)
    return [d, 2.0, res.guessing_probability, res.min_entropy_bits]


REPRODUCE = {
    "table1": (["d", "cglmp_bound", "cglmp_ideal", "satwap_bound", "satwap_ideal"], _table1_row, range(2, 9)),
    "steering": (["d", "beta_lhs", "beta_ideal"], _steering_row, (2, 4, 6, 8, 10, 12, 14, 15)),
    "witness": (["d", "D_scenario_I", "D_scenario_II"], _witness_row, (4, 6, 8, 10, 12, 14, 15)),
    "qkd": (["d", "rate_ideal", "qber_coherent", "qber_individual"], _qkd_row, (2, 4, 8, 14)),
    "selftest": (["xi", "gamma_plus", "I_max", "I_simulated", "classical_bound"], _selftest_row,
                 (1.0, 0.6451, (np.sqrt(3) - 1) / 2)),
    "randomness": (["d", "beta", "guessing_probability", "min_entropy_bits"], _randomness_row, (2, 3, 4)),
}

# (reproduced column, reference dataset, reference column, tolerance)
CHECKS = {
    "table1": [("cglmp_ideal", "table1", "cglmp_ideal", 1e-3), ("satwap_ideal", "table1", "satwap_ideal", 1e-3),
               ("satwap_bound", "table1", "satwap_bound", 5e-4)],
    "steering": [("beta_lhs", "steering", "beta_lhs", 5e-4)],
    "witness": [("D_scenario_I", "witness", "scenario_I", None), ("D_scenario_II", "witness", "scenario_II", None)],
    "qkd": [("rate_ideal", "qkd", "rate_ideal", 1e-3), ("qber_individual", "qkd", "qber_individual", 5e-3),
            ("qber_coherent", "qkd", "qber_coherent", 5e-3)],
}


def reproduce(name):
    header, fn, keys = REPRODUCE[name]
    return header, _map(fn, keys)


def cmd_reproduce(args):
    header, rows = reproduce(args.table)
    if args.compare:
        reports = []
        for col, ds, ref_col, tol in CHECKS.get(args.table, []):
            i = header.index(col)
            values = {r[0]: r[i] for r in rows}
            reports.append(reference.compare_with_reference(
                {"table": ds, "key": "d", "column": ref_col, "values": values}, reference.load(ds), tol))
        text = _dump_json({"table": args.table, "reports": reports})
        failed = any(r["passed"] is False for r in reports)
        _emit(args, text)
        return EXIT_USAGE if failed else EXIT_OK
    if args.format == "json":
        return _dump_json({"table": args.table, "columns": header, "rows": rows})
    return _dump_csv(header, rows)


def cmd_run(args):
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    return run(cfg)


# ------------------------------------------------------------------ parser


def _common(p, sampling=True):
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    if sampling:
        p.add_argument("--shots", type=int, default=0, help="shots per setting; 0 = exact probabilities")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--noise", default="", help="e.g. 'werner:v=0.95,jitter:s=0.01,loss:db=1/2'")


def _errors(p):
    p.add_argument("--resamples", type=int, default=200, help="bootstrap resamples")
    p.add_argument("--no-errors", action="store_true", help="skip the bootstrap")


def _solver(p):
    p.add_argument("--gap-tol", type=float)
    p.add_argument("--feas-tol", type=float)
    p.add_argument("--max-iter", type=int)


def build_parser():
    parser = _Parser(prog="quditlab", description="Qudit entanglement simulation and certification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bell", help="Bell functional values")
    p.add_argument("--d", type=int, help="outcomes per party (default 2, or 3 for the qutrit family)")
    p.add_argument("--inequality", choices=("satwap", "cglmp", "qutrit", "xi"), default="satwap",
                   help="'xi' is an alias of 'qutrit'")
    p.add_argument("--xi", type=float, default=1.0, help="qutrit family parameter")
    p.add_argument("--gamma", type=float, help="qutrit state parameter (default: optimal for xi)")
    _common(p)
    _errors(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("witness", help="device-independent dimension witness")
    p.add_argument("--scenario", choices=("I", "II"), default="I")
    p.add_argument("--d", type=int, default=4)
    _common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("steering", help="steering value beta_d")
    p.add_argument("--d", type=int, default=2)
    _common(p)
    _errors(p)
    p.set_defaults(func=cmd_steering)

    p = sub.add_parser("randomness", help="one-sided DI randomness from a steering value")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--beta", type=float, help="observed beta (default: simulate it)")
    p.add_argument("--x-star", type=int, choices=(0, 1))
    p.add_argument("--allow-large", action="store_true", help="permit d > 4")
    _common(p)
    _solver(p)
    p.set_defaults(func=cmd_randomness)

    p = sub.add_parser("tomo", help="state tomography")
    p.add_argument("--d", type=int, default=2, help="local dimension")
    p.add_argument("--ops", type=int, default=0, help="sampled operators (0 = full family)")
    p.add_argument("--method", choices=("cs", "linear"), default="cs")
    p.add_argument("--gamma", help="target Schmidt coefficients, comma separated (default |psi+>)")
    p.add_argument("--eps-c", type=float, default=1.0, help="noise radius constant c")
    p.add_argument("--mesh", action="store_true", help="route measurements through compiled meshes")
    _common(p)
    _solver(p)
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("qkd", help="BB84-type key rate")
    p.add_argument("--d", type=int)
    p.add_argument("--fidelity", type=float)
    p.add_argument("--from-table", help="correlation table JSON with matched-basis settings")
    p.add_argument("--attack", choices=qkd.ATTACKS, default="individual")
    _common(p, sampling=False)
    p.set_defaults(func=cmd_qkd)

    p = sub.add_parser("circuit", help="photonic mesh tools")
    csub = p.add_subparsers(dest="circuit_command", required=True, parser_class=_Parser)
    c = csub.add_parser("compile", help="phase settings for a vector or a basis")
    c.add_argument("--state", help="PureState JSON file")
    c.add_argument("--vector", help="comma separated complex amplitudes, e.g. '1,1j'")
    c.add_argument("--d", type=int)
    c.add_argument("--basis", choices=("computational", "fourier"), default="fourier")
    c.add_argument("--k0", type=int)
    c.add_argument("--layout", choices=("lower", "upper"), default="lower")
    _common(c, sampling=False)
    c.set_defaults(func=cmd_circuit)

    p = sub.add_parser("reproduce", help="regenerate a reference table from ideal simulations")
    p.add_argument("table", choices=sorted(REPRODUCE))
    p.add_argument("--compare", action="store_true", help="report deltas against the shipped reference data")
    p.add_argument("--d", type=int, help=argparse.SUPPRESS)
    _common(p, sampling=False)
    p.set_defaults(func=cmd_reproduce, format="csv")

    p = sub.add_parser("run", help="run an ExperimentConfig JSON file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)
    return parser


SUBCOMMANDS = ("bell", "witness", "steering", "randomness", "tomo", "qkd", "circuit compile", "reproduce", "run")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except QuditLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(e, RuntimeError) else EXIT_USAGE
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(out, int):
        return out
    _emit(args, out)
    return EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

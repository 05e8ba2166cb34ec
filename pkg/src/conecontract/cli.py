"""Command-line interface.

Exit codes: 0 computed / certified, 1 refuted, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import certify as C
from .linalg import ConvergenceError
from .measures import (conic_measure, conic_measure_limit_oracle, conic_measure_wp_sup,
                       matrix_measure)
from .models import (ComparisonSpec, HopfieldNetwork, InputSignal, SeparableSystem,
                     hopfield_certificate, hopfield_equilibrium, iss_envelope, load_model,
                     matrosov_certify, separable_contraction)
from .models.hopfield import NoCertificateError
from .models.loader import ModelFormatError
from .normcore import DimensionError, NormSpec, as_matrix, weighted_norms
from .odesim import HypothesisViolation, IntegrationError, VectorField, flow
from .reports import to_jsonable

EXIT_OK, EXIT_REFUTED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

CONDITIONS = (
    "jacobian_conic_measure", "ordered_one_sided_lipschitz", "one_sided_lipschitz",
    "dini_contraction", "trajectory_contraction", "l1_eta_monotone", "linf_eta_monotone",
    "l1_eta_positive", "linf_eta_positive", "equilibrium_one_sided", "factored_conic_measure",
    "separable", "comparison_small_gain",
)


class InputError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def parse_p(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    try:
        p = float(t)
    except ValueError as exc:
        raise InputError(f"bad --p value {text!r}") from exc
    if not p >= 1:
        raise InputError("--p must be >= 1 or 'inf'")
    return p


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except ValueError as exc:
        raise InputError(f"bad vector {text!r}") from exc


def build_norm(p: float, weight: str) -> NormSpec:
    """``identity``, ``diag:<csv>`` or ``general:<json file>``."""
    if weight == "identity":
        return NormSpec.identity(p)
    kind, _, rest = weight.partition(":")
    if kind == "diag":
        return NormSpec.diag(p, parse_vector(rest))
    if kind == "general":
        return NormSpec.general(p, _read_matrix(rest))
    raise InputError(f"--weight must be identity, diag:<csv> or general:<file>, got {weight!r}")


def _read_json(path: str) -> Any:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return json.loads(text)


def _read_matrix(path: str) -> np.ndarray:
    data = _read_json(path)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("A"))
    return as_matrix(data)


def parse_box(text: str | None, n: int, default=(0.0, 1.0)) -> C.Box:
    """``lo:hi`` (same bounds per coordinate) or ``lo1,lo2:hi1,hi2``."""
    if text is None:
        return C.Box(np.full(n, default[0]), np.full(n, default[1]))
    lo, _, hi = text.partition(":")
    lo_v, hi_v = parse_vector(lo), parse_vector(hi)
    lo_v = np.full(n, lo_v[0]) if lo_v.size == 1 else lo_v
    hi_v = np.full(n, hi_v[0]) if hi_v.size == 1 else hi_v
    return C.Box(lo_v, hi_v)


# ------------------------------------------------------------------ output

def emit(args, payload: dict | str, csv_text: str | None = None) -> None:
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands

def cmd_measure(args) -> int:
    data = _read_json(args.matrix)
    ns_from_file = None
    if isinstance(data, dict):
        if "norm" in data:
            ns_from_file = NormSpec.from_dict(data["norm"])
        data = data.get("matrix", data.get("A"))
    A = as_matrix(data)
    ns = ns_from_file if ns_from_file is not None and args.p is None else \
        build_norm(parse_p(args.p or "2"), args.weight)
    mu = matrix_measure(A, ns, args.seed)
    mp = conic_measure(A, ns, args.seed)
    out = {"mu": mu.value, "mu_method": mu.method, "mu_plus": mp.value, "method": mp.method,
           "bound": mp.bound, "norm": ns.to_dict(), "seed": args.seed}
    if mp.bound != "exact":
        out["mu_plus_sampled_lower"] = conic_measure_wp_sup(A, ns, args.seed).value
    if args.oracle:
        oracle = conic_measure_limit_oracle(A, ns, seed=args.seed, n_samples=args.samples)
        out["oracle"] = oracle.value
        out["oracle_gap"] = abs(oracle.value - mp.value)
        out["oracle_flags"] = oracle.evidence["flags"]
    emit(args, out)
    return EXIT_OK


def _vector_field(model) -> VectorField:
    return model if isinstance(model, VectorField) else model.vector_field()


def _default_pairs(box: C.Box, rng, k: int = 5):
    pairs = []
    for _ in range(k):
        y = box.uniform(rng, 1)[0]
        x = y + rng.uniform(0, 1, box.n) * (box.hi - y)
        pairs.append((x, y))
    return pairs


def cmd_certify(args) -> int:
    model = load_model(args.model)
    hopfield_auto = isinstance(model, HopfieldNetwork) and args.condition is None
    if args.rate is None and not hopfield_auto and args.condition not in ("jacobian_conic_measure",):
        raise InputError("--rate is required for this condition")
    rng = np.random.default_rng(args.seed)
    p = parse_p(args.p or "2")
    b = args.rate
    if hopfield_auto:
        hc = hopfield_certificate(model, p, horizon=args.horizon, n_samples=args.samples,
                                  seed=args.seed)
        out = hc.to_dict()
        out["seed"] = args.seed
        emit(args, out)
        return EXIT_OK if hc.passed else EXIT_REFUTED
    if isinstance(model, ComparisonSpec):
        ns = build_norm(p, args.weight)
        box = parse_box(args.box, model.n)
        # the certificate is phrased with c = -b > 0
        cert = matrosov_certify(model, ns, -b, box, n_samples=args.samples, seed=args.seed)
        emit(args, cert.to_dict())
        return EXIT_OK if cert.passed else EXIT_REFUTED
    cond = args.condition or "jacobian_conic_measure"
    if cond not in CONDITIONS:
        raise InputError(f"unknown condition {cond!r}; choose from {', '.join(CONDITIONS)}")
    ns = build_norm(p, args.weight)
    vf = _vector_field(model)
    box = parse_box(args.box, vf.n)
    kw = dict(seed=args.seed)
    if cond == "separable":
        if not isinstance(model, SeparableSystem):
            raise InputError("condition 'separable' needs a separable model")
        cert = separable_contraction(model, ns, -b, box, n_samples=args.samples, seed=args.seed)
    elif cond == "jacobian_conic_measure":
        cert = C.certify_jacobian_conic(vf, box, ns, b, n_random=args.samples, **kw)
    elif cond in ("ordered_one_sided_lipschitz", "one_sided_lipschitz"):
        cert = C.check_one_sided_lipschitz(vf, ns, b, box, cond.startswith("ordered"),
                                           n_pairs=args.samples, **kw)
    elif cond == "dini_contraction":
        cert = C.check_dini_contraction(vf, ns, b, _default_pairs(box, rng), args.horizon)
    elif cond == "trajectory_contraction":
        cert = C.check_trajectory_contraction(vf, ns, b, _default_pairs(box, rng), args.horizon,
                                              domain=box)
    elif cond in ("l1_eta_monotone", "l1_eta_positive", "linf_eta_monotone", "linf_eta_positive"):
        if ns.weight != "diag":
            raise InputError("the eta conditions need --weight diag:<csv>")
        fn = C.check_l1_eta if cond.startswith("l1") else C.check_linf_eta
        cert = fn(vf, ns.data, b, cond.endswith("monotone"), box, n_samples=args.samples, **kw)
    elif cond == "equilibrium_one_sided":
        cert = C.check_equilibrium_contraction(vf, ns, b, box, n_samples=args.samples, **kw)
    else:
        cert = C.check_factored_conic(vf, ns, b, box, n_samples=args.samples, **kw)
    emit(args, cert.to_dict())
    return EXIT_OK if cert.passed else EXIT_REFUTED


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    vf = _vector_field(model)
    ns = build_norm(parse_p(args.p or "2"), args.weight)
    x0s = [parse_vector(s) for s in (args.x0 or [])] or [np.zeros(vf.n)]
    for x0 in x0s:
        if x0.size != vf.n:
            raise InputError(f"initial condition has dimension {x0.size}, model has {vf.n}")
    if len(x0s) == 1:
        tr = flow(vf, 0.0, x0s[0], args.horizon)
        extra = {"dini": _dini_trace(tr.t, tr.norm_trace(ns))}
        payload = {"t": tr.t, "x": tr.x, "norm": tr.norm_trace(ns), "seed": args.seed}
        emit(args, payload, tr.to_csv(ns, extra))
        return EXIT_OK
    # joint simulation of all initial conditions on one grid
    n, k = vf.n, len(x0s)

    def rhs(t, z):
        return np.concatenate([vf.f(t, z[i * n:(i + 1) * n]) for i in range(k)])

    tr = flow(VectorField(n * k, rhs), 0.0, np.concatenate(x0s), args.horizon)
    d = weighted_norms(tr.x[:, :n] - tr.x[:, n:2 * n], ns)
    extra = {"distance": d, "dini": _dini_trace(tr.t, d)}
    if args.rate is not None:
        extra["envelope"] = d[0] * np.exp(args.rate * (tr.t - tr.t[0]))
    lines = ["t," + ",".join(f"x{j + 1}_{i + 1}" for i in range(k) for j in range(n)) + ","
             + ",".join(extra)]
    for r in range(tr.t.size):
        vals = [repr(float(tr.t[r]))] + [repr(float(v)) for v in tr.x[r]]
        vals += [repr(float(col[r])) for col in extra.values()]
        lines.append(",".join(vals))
    payload = {"t": tr.t, "states": [tr.x[:, i * n:(i + 1) * n] for i in range(k)], **extra,
               "seed": args.seed}
    emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def _dini_trace(t, d):
    """Forward-difference slope of a trace (last entry repeats)."""
    if t.size < 2:
        return np.zeros_like(d)
    s = np.diff(d) / np.diff(t)
    return np.append(s, s[-1])


def cmd_hopfield(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, HopfieldNetwork):
        raise InputError("hopfield needs a model of type 'hopfield'")
    p = parse_p(args.p or "2")
    try:
        hc = hopfield_certificate(model, p, horizon=args.horizon, n_samples=args.samples,
                                  seed=args.seed)
    except NoCertificateError as exc:
        emit(args, {"verdict": "no-certificate", "reason": str(exc), "seed": args.seed})
        return EXIT_REFUTED
    out = hc.to_dict()
    out["seed"] = args.seed
    if args.equilibrium is not None:
        eq = hopfield_equilibrium(model, parse_vector(args.equilibrium), p, seed=args.seed)
        out["equilibrium"] = eq.to_dict()
    emit(args, out)
    return EXIT_OK if hc.passed else EXIT_REFUTED


def cmd_iss(args) -> int:
    """Certify a gains-mode comparison model and check its ISS envelope on the
    comparison system itself driven by ``--input`` (constant, csv)."""
    model = load_model(args.model)
    if not isinstance(model, ComparisonSpec):
        raise InputError("iss needs a model of type 'comparison'")
    if args.rate is None or args.rate <= 0:
        raise InputError("--rate c > 0 is required")
    ns = build_norm(parse_p(args.p or "1"), args.weight)
    c = args.rate
    box = parse_box(args.box, model.n, (0.0, 3.0))
    cert = matrosov_certify(model, ns, c, box, n_samples=args.samples, seed=args.seed)
    if not cert.passed:
        emit(args, {"certificate": cert.to_dict(), "seed": args.seed})
        return EXIT_REFUTED
    u = parse_vector(args.input) if args.input else np.zeros(model.n)
    gu = model.input_gain(u)
    v0 = parse_vector(args.x0[0]) if args.x0 else np.ones(model.n)
    vf = VectorField(model.n, lambda t, v: model.field(v) + gu)
    tr = flow(vf, 0.0, v0, args.horizon)
    env = iss_envelope(model, ns, c, tr.t, tr.x, np.tile(gu, (tr.t.size, 1)), x_norms=tr.x,
                       certificate=cert)
    out = {"certificate": cert.to_dict(), "envelope_check": env.report.to_dict(),
           "L": env.L, "seed": args.seed}
    cols = {f"envelope{i + 1}": env.envelope[:, i] for i in range(model.n)}
    cols["storage_bound"] = env.v_bound
    emit(args, out, tr.to_csv(ns, cols))
    return EXIT_OK if env.passed else EXIT_REFUTED


def cmd_selftest(args) -> int:
    from .acceptance import run_suite

    results = run_suite(quick=args.quick, seed=args.seed, mutate_closed_forms=args.mutate_closed_forms,
                        echo=lambda line: print(line, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.out:
        Path(args.out).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_REFUTED


# ------------------------------------------------------------------ main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", default=None, help="norm exponent: a number >= 1 or 'inf' (default 2; 1 for iss)")
    common.add_argument("--weight", default="identity",
                        help="identity | diag:<comma-separated eta> | general:<JSON matrix file>")
    common.add_argument("--rate", type=float, default=None,
                        help="claimed rate b (certify, simulate) or c > 0 (iss)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--samples", type=int, default=1000, help="sample count (default 1000)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--oracle", action="store_true", help="cross-check with the limit oracle")

    ap = argparse.ArgumentParser(prog="conecontract", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="matrix measure and conic measure")
    m.add_argument("matrix", help="JSON matrix file ('-' for stdin); may hold {'matrix', 'norm'}")
    m.set_defaults(func=cmd_measure)

    c = sub.add_parser("certify", parents=[common], help="check a contraction condition")
    c.add_argument("model", help="model JSON file")
    c.add_argument("--condition", default=None, help=f"one of: {', '.join(CONDITIONS)}")
    c.add_argument("--box", default=None, help="domain 'lo:hi' or 'lo1,..:hi1,..' (default 0:1)")
    c.add_argument("--horizon", type=float, default=10.0)
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("simulate", parents=[common], help="integrate a model")
    s.add_argument("model")
    s.add_argument("--x0", action="append", help="initial condition as csv (repeatable)")
    s.add_argument("--horizon", type=float, default=10.0)
    s.set_defaults(func=cmd_simulate)

    h = sub.add_parser("hopfield", parents=[common], help="Perron-weighted Hopfield certificate")
    h.add_argument("model")
    h.add_argument("--equilibrium", default=None, help="constant input I* (csv) for the equilibrium")
    h.add_argument("--horizon", type=float, default=10.0)
    h.set_defaults(func=cmd_hopfield)

    i = sub.add_parser("iss", parents=[common], help="comparison certificate and ISS envelope")
    i.add_argument("model")
    i.add_argument("--x0", action="append", help="initial storage values (csv)")
    i.add_argument("--input", default=None, help="constant input magnitudes (csv)")
    i.add_argument("--box", default=None)
    i.add_argument("--horizon", type=float, default=10.0)
    i.set_defaults(func=cmd_iss)

    t = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    t.add_argument("--quick", action="store_true", help="reduced subset with fewer samples")
    t.add_argument("--mutate-closed-forms", type=float, default=None, help=argparse.SUPPRESS)
    t.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelFormatError, DimensionError, FileNotFoundError,
            json.JSONDecodeError, HypothesisViolation, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

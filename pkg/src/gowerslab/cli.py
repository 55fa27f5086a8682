"""Command-line harness: config-driven, deterministic, golden-file checked.

Experiments are JSON configs; each run writes a JSON result record (and
optionally CSV rows for the norm family) that embeds the certificate data
needed to re-verify its postcondition offline: complement pairs,
cross-section tables, split residuals, cut-norm witnesses.

Exit codes: 0 success, 2 config/validation error, 3 cost-cap abort,
4 postcondition or hypothesis failure (e.g. a non-coprime split request),
1 golden-suite mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from fractions import Fraction

from . import __version__
from .errors import CapExceeded, ConfigError, CoprimalityError, PostconditionError
from .groups import (
    FinAbGroup,
    Homomorphism,
    Subgroup,
    complemented_enlarge,
    complemented_hull,
    find_complement,
    mtorsion_complemented_shrink,
    primary_decompose,
)
from .harmonics import (
    GroupFunction,
    box_norm_4cycle,
    correlation,
    cut_norm_lower,
    gowers_norm,
    obstruction_check,
    phase,
    project_phase,
)
from .instances import (
    bilinear_function,
    random_bounded_function,
    random_cocycle,
    random_unimodular_function,
)
from .nilcube import (
    Cocycle,
    FilteredGroupNilspace,
    factor_average,
    coboundary,
    cube_set,
    enumerate_morphisms,
    is_cocycle,
    rooted_factor_average,
    split_cocycle,
)
from .polymaps import PolyMap, polynomial_cross_section

CONFIG_SCHEMA = "gowerslab/config-1"
RESULT_SCHEMA = "gowerslab/result-1"
GOLDEN_SCHEMA = "gowerslab/goldens-1"

COMMANDS = (
    "norm",
    "cutnorm",
    "boxnorm",
    "complement",
    "shrink",
    "crosssection",
    "project",
    "obstruct",
    "avg-split",
    "cocycle-split",
    "morphisms",
    "decompose",
)

DEFAULT_CAP = 2**30
DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# config plumbing


def _need(params: dict, key: str, kind=None):
    if key not in params:
        raise ConfigError(f"missing required field 'params.{key}'")
    v = params[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"field 'params.{key}' has the wrong type")
    return v


def _group(spec) -> FinAbGroup:
    if not isinstance(spec, list) or not all(isinstance(m, int) and m >= 1 for m in spec):
        raise ConfigError(f"group literal must be a list of orders, got {spec!r}")
    return FinAbGroup(tuple(spec))


def _nilspace(spec) -> FilteredGroupNilspace:
    try:
        return FilteredGroupNilspace(tuple((int(m), int(d)) for m, d in spec))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"nilspace literal must be a list of [order, degree] pairs: {e}")


def _function(spec, G: FinAbGroup, rng_seed) -> GroupFunction:
    import random

    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("function spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "ones":
        return GroupFunction.ones(G)
    if kind == "values":
        vals = spec.get("values")
        if not isinstance(vals, list) or len(vals) != G.order:
            raise ConfigError("'values' must list one [re, im] pair per element")
        return GroupFunction(G, [complex(re, im) for re, im in vals])
    if kind == "phases":
        ph = spec.get("phases")
        if not isinstance(ph, list) or len(ph) != G.order:
            raise ConfigError("'phases' must list one [num, den] pair per element")
        return GroupFunction.from_phases(G, [Fraction(n, d) for n, d in ph])
    if kind == "character":
        t = spec.get("t", [0] * G.ncoords)
        if not isinstance(t, list) or len(t) != G.ncoords:
            raise ConfigError("'t' must list one integer per group coordinate")
        return GroupFunction.character(G, t)
    if kind == "bilinear":
        l = spec.get("l")
        if not isinstance(l, int) or l < 1:
            raise ConfigError("'bilinear' needs a positive integer 'l'")
        f = bilinear_function(l)
        if f.group != G:
            raise ConfigError("bilinear function lives on Z_2^(2l); group mismatch")
        return f
    if kind in ("random_unimodular", "random_bounded"):
        if rng_seed is None:
            raise ConfigError("a seed is mandatory for randomized function sources")
        rng = random.Random(rng_seed)
        if kind == "random_unimodular":
            return random_unimodular_function(rng, G)
        return random_bounded_function(rng, G)
    raise ConfigError(f"unknown function kind {kind!r}")


def _subgroup(G: FinAbGroup, gens_spec) -> Subgroup:
    if not isinstance(gens_spec, list):
        raise ConfigError("subgroup generators must be a list of coordinate lists")
    try:
        return Subgroup.from_generators(G, [tuple(g) for g in gens_spec])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad subgroup generators: {e}")


def _hom(domain: FinAbGroup, codomain: FinAbGroup, matrix) -> Homomorphism:
    try:
        return Homomorphism(domain, codomain, matrix)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad homomorphism matrix: {e}")


def _zvals(values) -> list:
    return [list(v.coords) for v in values]


def _cocycle_from_config(params: dict, seed) -> tuple[Cocycle, int, dict]:
    import random

    y1 = _nilspace(_need(params, "y1", list))
    y2 = _nilspace(_need(params, "y2", list))
    Z = _group(_need(params, "z", list))
    k = _need(params, "k", int)
    dim = k + 1
    X = y1.product(y2)
    spec = _need(params, "cocycle", dict)
    kind = spec.get("kind")
    meta: dict = {"y1": list(y1.factors), "y2": list(y2.factors), "z": list(Z.orders), "k": k}
    if kind == "random":
        if seed is None:
            raise ConfigError("a seed is mandatory for the random cocycle family")
        rho, _, _ = random_cocycle(random.Random(seed), y1, y2, Z, dim)
    elif kind == "coboundary":
        g = spec.get("g")
        if not isinstance(g, list) or len(g) != X.group.order:
            raise ConfigError("'g' must list one value per point of Y1 x Y2")
        rho = coboundary(X, Z, dim, [tuple(v) for v in g])
    elif kind == "table":
        vals = spec.get("values")
        cs = cube_set(X, dim)
        if not isinstance(vals, list) or len(vals) != len(cs.members):
            raise ConfigError(
                f"'values' must list one value per cube ({len(cs.members)} expected, "
                "in sorted carrier order)"
            )
        table = {q: Z.element(tuple(v)) for q, v in zip(cs.members, vals)}
        rho = Cocycle(X, Z, dim, table)
    else:
        raise ConfigError(f"unknown cocycle kind {kind!r}")
    return rho, y1.group.ncoords, meta


# ---------------------------------------------------------------------------
# command runners: each returns (inputs_summary, outputs, csv_rows)


def _run_norm(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    order = _need(params, "order", int)
    f = _function(_need(params, "function", dict), G, seed)
    value = gowers_norm(f, order, cap=cap)
    inputs = {"group": list(G.orders), "order": order, "function_kind": params["function"]["kind"]}
    outputs = {"value": value, "exact_input": f.is_exact()}
    return inputs, outputs, [("gowers", order, value)]


def _run_boxnorm(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    split = _need(params, "split", int)
    f = _function(_need(params, "function", dict), G, seed)
    value = box_norm_4cycle(f, split)
    inputs = {"group": list(G.orders), "split": split, "function_kind": params["function"]["kind"]}
    return inputs, {"value": value}, [("box4", split, value)]


def _run_cutnorm(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    d = _need(params, "d", int)
    restarts = params.get("restarts", 8)
    iters = params.get("iters", 25)
    if seed is None:
        raise ConfigError("a seed is mandatory for cut-norm maximization")
    f = _function(_need(params, "function", dict), G, seed)
    res = cut_norm_lower(f, d, restarts=restarts, iters=iters, seed=seed)
    witnesses = {
        ",".join(map(str, blk)): [[float(v.real), float(v.imag)] for v in w.reshape(-1)]
        for blk, w in res.witnesses.items()
    }
    inputs = {"group": list(G.orders), "d": d, "restarts": restarts, "iters": iters}
    outputs = {"value": res.value, "witnesses": witnesses}
    return inputs, outputs, [("cut", d, res.value)]


def _run_complement(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    H = _subgroup(G, _need(params, "generators", list))
    K = find_complement(H, cap=cap)
    inputs = {"group": list(G.orders), "generators": [list(g.coords) for g in H.generators], "subgroup_order": H.order}
    outputs: dict = {}
    if K is None:
        outputs["complement"] = None
        if G.is_pgroup():
            if len(H.generators) == 1:
                Hh, Kh = complemented_hull(H.generators[0])
            else:
                Hh, Kh = complemented_enlarge(H)
            outputs["complemented_hull"] = {
                "generators": _zvals(Hh.generators),
                "order": Hh.order,
                "complement_generators": _zvals(Kh.generators),
                "complement_order": Kh.order,
            }
    else:
        outputs["complement"] = {"generators": _zvals(K.generators), "order": K.order}
    return inputs, outputs, []


def _run_shrink(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    H = _subgroup(G, _need(params, "generators", list))
    Hp, K = mtorsion_complemented_shrink(H)
    inputs = {"group": list(G.orders), "generators": [list(g.coords) for g in H.generators], "index": H.index}
    outputs = {
        "shrunk_generators": _zvals(Hp.generators),
        "shrunk_order": Hp.order,
        "shrunk_index": Hp.index,
        "complement_generators": _zvals(K.generators),
        "complement_order": K.order,
    }
    return inputs, outputs, []


def _run_crosssection(params, seed, cap, tol):
    B = _group(_need(params, "domain", list))
    A = _group(_need(params, "codomain", list))
    tau = _hom(B, A, _need(params, "matrix", list))
    if not tau.is_surjective():
        raise ConfigError("the homomorphism is not surjective")
    iota = polynomial_cross_section(tau)
    inputs = {"domain": list(B.orders), "codomain": list(A.orders), "matrix": [list(r) for r in tau.matrix]}
    outputs = {
        "degree": iota.degree,
        "table": [list(r) for r in iota.table],
        "torsions": [A.torsion, B.torsion],
    }
    return inputs, outputs, []


def _phase_poly(params) -> PolyMap:
    B = _group(_need(params, "domain", list))
    N = _need(params, "phase_modulus", int)
    table = _need(params, "phase_table", list)
    if len(table) != B.order:
        raise ConfigError("'phase_table' must list one residue per domain element")
    P = PolyMap(B, FinAbGroup((N,)), tuple((int(v),) for v in table))
    if P.degree is None:
        raise ConfigError("the phase table is not polynomial of any degree")
    return P


def _run_project(params, seed, cap, tol):
    phi = _phase_poly(params)
    A = _group(_need(params, "codomain", list))
    tau = _hom(phi.domain, A, _need(params, "matrix", list))
    pp = project_phase(phi, tau)
    inputs = {
        "domain": list(phi.domain.orders),
        "codomain": list(A.orders),
        "phase_modulus": pp.modulus,
        "degree": pp.degree,
    }
    outputs = {
        "values": [[float(v.real), float(v.imag)] for v in pp.function.values],
        "fiber_size": pp.fiber_size,
        "torsion": list(pp.torsion),
        "rank_preserving": pp.rank_preserving,
    }
    return inputs, outputs, []


def _run_obstruct(params, seed, cap, tol):
    phi = _phase_poly(params)
    A = _group(_need(params, "codomain", list))
    tau = _hom(phi.domain, A, _need(params, "matrix", list))
    pp = project_phase(phi, tau)
    f = _function(_need(params, "function", dict), A, seed)
    order = params.get("order")
    rep = obstruction_check(f, pp, order=order, tol=tol)
    inputs = {
        "domain": list(phi.domain.orders),
        "codomain": list(A.orders),
        "degree": pp.degree,
        "order": rep.order,
    }
    outputs = {"correlation": rep.correlation, "norm": rep.norm, "margin": rep.margin}
    return inputs, outputs, [("obstruction", rep.order, rep.norm)]


def _run_avg_split(params, seed, cap, tol):
    rho, split, meta = _cocycle_from_config(params, seed)
    E = factor_average(rho, split)
    Ep = rooted_factor_average(rho, split)
    members = rho.carrier.members
    outputs = {
        "cube_count": len(members),
        "e_values": _zvals(E.table[q] for q in members),
        "eprime_values": _zvals(Ep[q] for q in members),
        "e_is_cocycle": True,
    }
    return meta, outputs, []


def _run_cocycle_split(params, seed, cap, tol):
    rho, split, meta = _cocycle_from_config(params, seed)
    res = split_cocycle(rho, split)
    members = rho.carrier.members
    X = rho.nilspace
    residual_max = max(
        (max(v.coords, default=0) for v in res.residual.values()), default=0
    )
    outputs = {
        "cube_count": len(members),
        "kappa_values": _zvals(res.kappa.table[q] for q in members),
        "g": _zvals(res.g[x.coords] for x in X.group.elements()),
        "residual_max": residual_max,
        "residual_all_zero": all(v.is_zero() for v in res.residual.values()),
    }
    return meta, outputs, []


def _run_morphisms(params, seed, cap, tol):
    X = _nilspace(_need(params, "x", list))
    Y = _nilspace(_need(params, "y", list))
    morphs = enumerate_morphisms(X, Y, cap=cap)
    inputs = {"x": list(X.factors), "y": list(Y.factors)}
    outputs = {
        "count": len(morphs),
        "tables": [[list(v) for v in t] for t in morphs],
        "constants": sum(1 for t in morphs if len(set(t)) == 1),
    }
    return inputs, outputs, []


def _run_decompose(params, seed, cap, tol):
    G = _group(_need(params, "group", list))
    dec = primary_decompose(G)
    inputs = {"group": list(G.orders)}
    outputs = {
        "primes": list(dec.primes),
        "components": {str(p): list(dec.components[p].orders) for p in dec.primes},
        "iso_matrix": [list(r) for r in dec.iso.matrix],
        "iso_inverse_matrix": [list(r) for r in dec.iso_inv.matrix],
    }
    return inputs, outputs, []


_RUNNERS = {
    "norm": _run_norm,
    "cutnorm": _run_cutnorm,
    "boxnorm": _run_boxnorm,
    "complement": _run_complement,
    "shrink": _run_shrink,
    "crosssection": _run_crosssection,
    "project": _run_project,
    "obstruct": _run_obstruct,
    "avg-split": _run_avg_split,
    "cocycle-split": _run_cocycle_split,
    "morphisms": _run_morphisms,
    "decompose": _run_decompose,
}


def run(config: dict) -> tuple[dict, list]:
    """Execute one experiment config; returns (result record, csv rows)."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    if config.get("schema", CONFIG_SCHEMA) != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported config schema {config.get('schema')!r}")
    command = config.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")
    params = config.get("params")
    if not isinstance(params, dict):
        raise ConfigError("missing 'params' object")
    seed = config.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("'seed' must be an integer")
    cap = config.get("cap", DEFAULT_CAP)
    tol = config.get("tolerance", DEFAULT_TOL)
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    t0 = time.perf_counter()
    inputs, outputs, norm_rows = _RUNNERS[command](params, seed, cap, tol)
    runtime_ms = (time.perf_counter() - t0) * 1000.0

    record = {
        "schema": RESULT_SCHEMA,
        "library_version": __version__,
        "command": command,
        "config_digest": digest,
        "seed": seed,
        "inputs": inputs,
        "outputs": outputs,
        "runtime_ms": runtime_ms,
    }
    csv_rows = [
        (digest[:12], kind, k, value, runtime_ms) for kind, k, value in norm_rows
    ]
    return record, csv_rows


# ---------------------------------------------------------------------------
# golden suite


def _goldens_path() -> str:
    return os.path.join(os.path.dirname(__file__), "goldens.json")


def _golden_cases() -> dict:
    """One callable per stored golden value; each returns the computed value."""
    from .polymaps import cyclic_lift

    def hull_z3z27():
        G = FinAbGroup((3, 27))
        H, K = complemented_hull(G.element((1, 3)))
        return {"order": H.order, "complement_order": K.order}

    def find_complement_z3z27():
        G = FinAbGroup((3, 27))
        return find_complement(Subgroup.from_generators(G, [(1, 3)])) is not None

    def degree_lift_z3_z9():
        return PolyMap(FinAbGroup((3,)), FinAbGroup((9,)), ((0,), (1,), (2,))).degree

    def nonpoly_z3_z6():
        return PolyMap(FinAbGroup((3,)), FinAbGroup((6,)), ((0,), (1,), (5,))).degree

    def cyclic_lift_degree():
        return cyclic_lift(3, 1, 2).degree

    def cross_section_z9_z3():
        tau = Homomorphism(FinAbGroup((9,)), FinAbGroup((3,)), [[1]])
        return polynomial_cross_section(tau).degree

    def u3(l):
        return lambda: gowers_norm(bilinear_function(l), 3)

    def box(l):
        return lambda: box_norm_4cycle(bilinear_function(l), l)

    def cli_boxnorm_l2():
        cfg = {
            "schema": CONFIG_SCHEMA,
            "command": "boxnorm",
            "params": {
                "group": [2, 2, 2, 2],
                "split": 2,
                "function": {"kind": "bilinear", "l": 2},
            },
        }
        record, _ = run(cfg)
        return record["outputs"]["value"]

    def cli_complement_z3z27():
        cfg = {
            "schema": CONFIG_SCHEMA,
            "command": "complement",
            "params": {"group": [3, 27], "generators": [[1, 3]]},
        }
        record, _ = run(cfg)
        out = record["outputs"]
        return {
            "complement": out["complement"],
            "hull_order": out["complemented_hull"]["order"],
        }

    return {
        "find_complement_z3z27": find_complement_z3z27,
        "complemented_hull_z3z27": hull_z3z27,
        "degree_lift_z3_to_z9": degree_lift_z3_z9,
        "nonpolynomial_z3_to_z6": nonpoly_z3_z6,
        "cyclic_lift_3_1_2_degree": cyclic_lift_degree,
        "cross_section_z9_z3_degree": cross_section_z9_z3,
        "gowers_u3_bilinear_l1": u3(1),
        "gowers_u3_bilinear_l2": u3(2),
        "gowers_u3_bilinear_l3": u3(3),
        "box_norm_bilinear_l1": box(1),
        "box_norm_bilinear_l2": box(2),
        "box_norm_bilinear_l3": box(3),
        "cli_boxnorm_bilinear_l2": cli_boxnorm_l2,
        "cli_complement_z3z27": cli_complement_z3z27,
    }


def _match(expected, actual, tol: float) -> bool:
    if isinstance(expected, dict):
        return (
            isinstance(actual, dict)
            and expected.keys() == actual.keys()
            and all(_match(expected[k], actual[k], tol) for k in expected)
        )
    if isinstance(expected, float):
        return isinstance(actual, (int, float)) and abs(expected - actual) <= tol
    return expected == actual


def golden_suite(*, filter_name: str | None = None, golden_path: str | None = None) -> dict:
    """Run every stored golden case and compare against the golden file."""
    path = golden_path or _goldens_path()
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != GOLDEN_SCHEMA:
        raise ConfigError(f"unsupported golden schema in {path}")
    cases = _golden_cases()
    report = {"cases": [], "all_pass": True}
    for name, spec in sorted(data["cases"].items()):
        if filter_name is not None and filter_name != name:
            continue
        if name not in cases:
            report["cases"].append({"name": name, "pass": False, "error": "unknown case"})
            report["all_pass"] = False
            continue
        t0 = time.perf_counter()
        actual = cases[name]()
        dt = (time.perf_counter() - t0) * 1000.0
        ok = _match(spec["expected"], actual, spec.get("tolerance", 0.0))
        report["cases"].append(
            {
                "name": name,
                "pass": ok,
                "expected": spec["expected"],
                "actual": actual,
                "runtime_ms": dt,
            }
        )
        if not ok:
            report["all_pass"] = False
    if filter_name is not None and not report["cases"]:
        raise ConfigError(f"no golden case named {filter_name!r}")
    return report


# ---------------------------------------------------------------------------
# entry point


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(record: dict, csv_rows: list, args) -> None:
    text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        lines = ["instance_id,kind,k,value,runtime_ms"]
        lines += [f"{i},{kind},{k},{v!r},{ms:.3f}" for i, kind, k, v, ms in csv_rows]
        csv_text = "\n".join(lines) + "\n"
        if args.out:
            _atomic_write(args.out + ".csv", csv_text)
        else:
            sys.stdout.write(csv_text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gowerslab",
        description="Exact desk-scale experiments in higher-order Fourier analysis",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a '{name}' experiment from a config")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", help="write the result record to this path")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--cap", type=int, help="override the cost cap")
        p.add_argument("--tolerance", type=float, help="override the tolerance")
        p.add_argument("--csv", action="store_true", help="also emit CSV rows")
    g = sub.add_parser("golden", help="run the golden suite of worked examples")
    g.add_argument("--filter", help="run a single golden case by name")
    g.add_argument("--golden-file", help="use an alternative golden file")

    args = parser.parse_args(argv)
    try:
        if args.subcommand == "golden":
            report = golden_suite(filter_name=args.filter, golden_path=args.golden_file)
            for case in report["cases"]:
                status = "PASS" if case["pass"] else "FAIL"
                line = f"[{status}] {case['name']}"
                if not case["pass"]:
                    line += f"  expected={case.get('expected')!r} actual={case.get('actual')!r}"
                print(line)
            print("golden suite:", "all pass" if report["all_pass"] else "FAILURES")
            return 0 if report["all_pass"] else 1

        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        if config.get("command", args.subcommand) != args.subcommand:
            raise ConfigError(
                f"config command {config.get('command')!r} does not match "
                f"subcommand {args.subcommand!r}"
            )
        config["command"] = args.subcommand
        if args.seed is not None:
            config["seed"] = args.seed
        if args.cap is not None:
            config["cap"] = args.cap
        if args.tolerance is not None:
            config["tolerance"] = args.tolerance
        record, csv_rows = run(config)
        _emit(record, csv_rows, args)
        return 0
    except CapExceeded as e:
        print(f"cost cap exceeded: {e}", file=sys.stderr)
        return 3
    except (PostconditionError, CoprimalityError) as e:
        print(f"postcondition failure: {e}", file=sys.stderr)
        return 4
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

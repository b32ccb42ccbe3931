"""Configuration-driven experiment runner.

Experiments are flat text files of ``dotted.key = value`` lines (values are
JSON scalars/arrays; bare words are strings).  One experiment per file.
Reports are JSON with a fixed field set; the process exit code encodes the
verdict so suites double as CI gates:

    0 PASS, 1 FAIL, 2 INCONCLUSIVE, 3 configuration/precondition error.

Subcommands: gen, check-demi, stop, bound, verify, clt, slln, oracle, suite.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import asymptotics, bounds, generators as gen, oracle, registry
from .core import CHUNK_PATHS, DEFAULT_TOLERANCE_Z, FAIL, INCONCLUSIVE, PASS, derive_stream
from .registry import PreconditionError
from .stopping import StoppingRule, capped, deterministic, first_passage_down, first_passage_up

__all__ = ["main", "parse_config_text", "run", "run_suite"]

_EXIT = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}


def _fmt(x: float) -> str:
    """All numeric CLI output uses 12 significant digits."""
    return f"{float(x):.12g}"


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict:
    """Parse ``dotted.key = value`` lines into a nested dict."""
    root: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PreconditionError("config", f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise PreconditionError("config", f"line {lineno}: empty key")
        try:
            parsed = json.loads(value.strip())
        except json.JSONDecodeError:
            parsed = value.strip()
        node = root
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise PreconditionError(key, "conflicts with a scalar key")
        if parts[-1] in node:
            raise PreconditionError(key, "duplicate key")
        node[parts[-1]] = parsed
    return root


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    theorem_id: str
    generator: dict | None
    stopping: dict | None
    stopping2: dict | None
    params: dict
    mode: str
    paths: int
    seed: int
    tolerance_z: float


def config_from_dict(doc: dict) -> ExperimentConfig:
    if "seed" not in doc:
        raise PreconditionError("seed", "required")
    if "theorem_id" not in doc:
        raise PreconditionError("theorem_id", "required")
    mode = doc.get("mode", "exact")
    if mode not in ("exact", "monte_carlo"):
        raise PreconditionError("mode", "must be 'exact' or 'monte_carlo'")
    return ExperimentConfig(
        experiment_id=str(doc.get("experiment_id", doc["theorem_id"])),
        theorem_id=str(doc["theorem_id"]),
        generator=doc.get("generator"),
        stopping=doc.get("stopping"),
        stopping2=doc.get("stopping2"),
        params=dict(doc.get("params", {})),
        mode=mode,
        paths=int(doc.get("paths", 100_000)),
        seed=int(doc["seed"]),
        tolerance_z=float(doc.get("tolerance_z", DEFAULT_TOLERANCE_Z)),
    )


def _law_from(d: dict, prefix: str) -> gen.IncrementLaw:
    name = d.get("law")
    if name is None:
        raise PreconditionError(f"{prefix}.law", "required")
    if name == "rademacher":
        return gen.rademacher()
    if name == "bernoulli":
        if "p" not in d:
            raise PreconditionError(f"{prefix}.p", "required")
        return gen.bernoulli(float(d["p"]))
    if name == "uniform":
        if "a" not in d or "b" not in d:
            raise PreconditionError(f"{prefix}.a/b", "required")
        return gen.uniform(float(d["a"]), float(d["b"]))
    raise PreconditionError(f"{prefix}.law", f"unknown law {name!r}")


def _cov_from(d: dict, n: int) -> np.ndarray:
    kind = d.get("kind")
    if kind == "matrix":
        return np.asarray(d["matrix"], dtype=np.float64)
    var = float(d.get("var", 1.0))
    if kind == "diagonal":
        return var * np.eye(n)
    rho = float(d.get("rho", 0.0))
    if kind == "equicorrelated":
        return var * ((1.0 - rho) * np.eye(n) + rho * np.ones((n, n)))
    if kind == "ar1":
        idx = np.arange(n)
        return var * rho ** np.abs(idx[:, None] - idx[None, :])
    raise PreconditionError(
        "generator.cov.kind", "must be diagonal, equicorrelated, ar1, or matrix"
    )


def build_generator_spec(d: dict) -> gen.GeneratorSpec:
    if not isinstance(d, dict):
        raise PreconditionError("generator", "must be a table of dotted keys")
    family = d.get("family")
    if family is None:
        raise PreconditionError("generator.family", "required")
    if "horizon" not in d:
        raise PreconditionError("generator.horizon", "required")
    horizon = int(d["horizon"])
    offset = float(d.get("offset", 0.0))
    try:
        if family == "iid":
            return gen.GeneratorSpec("iid", horizon, law=_law_from(d, "generator"), offset=offset)
        if family == "moving_sum":
            if "weights" not in d:
                raise PreconditionError("generator.weights", "required")
            return gen.GeneratorSpec(
                "moving_sum",
                horizon,
                law=_law_from(d, "generator"),
                weights=tuple(float(w) for w in d["weights"]),
                offset=offset,
            )
        if family == "gaussian_assoc":
            if "cov" not in d:
                raise PreconditionError("generator.cov", "required")
            return gen.GeneratorSpec(
                "gaussian_assoc", horizon, covariance=_cov_from(d["cov"], horizon), offset=offset
            )
        if family == "shared_shock":
            base = d.get("base")
            shock = d.get("shock")
            if not isinstance(base, dict) or not isinstance(shock, dict):
                raise PreconditionError("generator.base/shock", "required")
            return gen.GeneratorSpec(
                "shared_shock",
                horizon,
                law=_law_from(base, "generator.base"),
                shock=_law_from(shock, "generator.shock"),
                offset=offset,
            )
        if family == "centered_partial_sum":
            inner = d.get("inner")
            if not isinstance(inner, dict):
                raise PreconditionError("generator.inner", "required")
            inner_spec = build_generator_spec({**inner, "horizon": horizon})
            return gen.GeneratorSpec(
                "centered_partial_sum", horizon, inner=inner_spec, offset=offset
            )
        if family == "adversarial_sign_flip":
            law = _law_from(d, "generator") if "law" in d else gen.rademacher()
            return gen.GeneratorSpec("adversarial_sign_flip", horizon, law=law)
    except ValueError as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError("generator", str(exc)) from exc
    raise PreconditionError("generator.family", f"unknown family {family!r}")


def build_rule(d: dict, field: str = "stopping") -> StoppingRule:
    if not isinstance(d, dict):
        raise PreconditionError(field, "must be a table of dotted keys")
    kind = d.get("kind")
    if kind is None:
        raise PreconditionError(f"{field}.kind", "required")
    try:
        if kind == "first_passage_up":
            rule = first_passage_up(float(d["threshold"]))
        elif kind == "first_passage_down":
            rule = first_passage_down(float(d["threshold"]))
        elif kind == "deterministic":
            rule = deterministic(int(d["step"]), d.get("direction", "nondecreasing"))
        else:
            raise PreconditionError(
                f"{field}.kind",
                "must be first_passage_up, first_passage_down, or deterministic "
                "(user rules are library-only)",
            )
    except KeyError as exc:
        raise PreconditionError(f"{field}.{exc.args[0]}", "required") from exc
    if "cap" in d:
        rule = capped(rule, int(d["cap"]))
    return rule


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _json_safe(x: float | None):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return None  # strict JSON has no Infinity
    return x


def report_dict(config: ExperimentConfig, report, runtime_ms: float) -> dict:
    return {
        "experiment_id": config.experiment_id,
        "theorem_id": report.theorem_id,
        "generator": config.generator,
        "params": config.params,
        "mode": "exact" if config.mode == "exact" else f"monte_carlo({config.paths})",
        "seed": config.seed,
        "lhs": {"mean": report.lhs.mean, "stderr": _json_safe(report.lhs.stderr)},
        "rhs": report.rhs,
        "direction": report.direction,
        "z_margin": _json_safe(report.z_margin),
        "verdict": report.verdict,
        "exact": report.exact,
        "runtime_ms": runtime_ms,
    }


def _write_json(path: str, payload: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        _write_json(out, payload)
    else:
        print(text)


def _error_exit(exc: PreconditionError, out: str | None = None) -> int:
    payload = {"error": {"field": exc.name, "message": exc.message}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return 3


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


def run(config: ExperimentConfig):
    """Dispatch one experiment to the registry; returns (report, dict, extras)."""
    spec = build_generator_spec(config.generator) if config.generator else None
    rule = build_rule(config.stopping) if config.stopping else None
    rule2 = build_rule(config.stopping2, "stopping2") if config.stopping2 else None
    t0 = time.perf_counter()
    report, results, extras = registry.verify_detailed(
        config.theorem_id,
        spec,
        rule=rule,
        rule2=rule2,
        params=config.params,
        mode=config.mode,
        paths=config.paths,
        seed=config.seed,
        tolerance_z=config.tolerance_z,
    )
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return report, report_dict(config, report, runtime_ms), extras


def _load_config(path: str, args) -> ExperimentConfig:
    with open(path) as fh:
        doc = parse_config_text(fh.read())
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "paths", None) is not None:
        doc["paths"] = args.paths
    return config_from_dict(doc)


def _dump_paths_csv(spec: gen.GeneratorSpec, n_paths: int, seed: int, out) -> None:
    out.write("path_id,step,value\n")
    done = 0
    chunk = 0
    while done < n_paths:
        m = min(CHUNK_PATHS, n_paths - done)
        block = gen.sample_paths(spec, m, derive_stream(seed, chunk))
        for i in range(m):
            pid = done + i
            for step in range(block.shape[1]):
                out.write(f"{pid},{step + 1},{_fmt(block[i, step])}\n")
        done += m
        chunk += 1


def _cmd_verify(args, forced_theorem: str | None = None) -> int:
    try:
        config = _load_config(args.config, args)
        if forced_theorem is not None:
            variant = config.params.get("variant", "demimartingale")
            tid = {"demimartingale": "Def1.2-demi", "demisubmartingale": "Def1.2-demisub"}.get(
                variant
            )
            if tid is None:
                raise PreconditionError("params.variant", "demimartingale or demisubmartingale")
            config = ExperimentConfig(**{**config.__dict__, "theorem_id": tid})
        report, payload, extras = run(config)
    except PreconditionError as exc:
        return _error_exit(exc)
    except ValueError as exc:
        return _error_exit(PreconditionError("experiment", str(exc)))
    _emit(payload, args.out)
    for name, extra in extras.items():
        z = "n/a" if extra.z_margin is None else _fmt(extra.z_margin)
        print(f"# {name}: {extra.verdict} (z_margin {z})", file=sys.stderr)
    if args.dump_paths and config.mode == "monte_carlo" and config.generator:
        spec = build_generator_spec(config.generator)
        dump_file = (args.out or "paths") + ".csv"
        with open(dump_file, "w") as fh:
            _dump_paths_csv(spec, config.paths, config.seed, fh)
    return _EXIT[report.verdict]


def _cmd_gen(args) -> int:
    try:
        config = _load_config(args.config, args)
        if config.generator is None:
            raise PreconditionError("generator", "required")
        spec = build_generator_spec(config.generator)
    except PreconditionError as exc:
        return _error_exit(exc)
    if args.dump_paths:
        if args.out:
            with open(args.out, "w") as fh:
                _dump_paths_csv(spec, config.paths, config.seed, fh)
        else:
            _dump_paths_csv(spec, config.paths, config.seed, sys.stdout)
        return 0
    ens = gen.generate(spec, config.paths, config.seed)
    s_n = ens.values[:, -1]
    print(f"generator_id: {ens.generator_id}")
    print(f"paths: {ens.n_paths}")
    print(f"horizon: {ens.horizon}")
    print(f"E[S_n]: {_fmt(s_n.mean())} +- {_fmt(s_n.std(ddof=1) / math.sqrt(len(s_n)))}")
    try:
        print(f"V_n (exact): {_fmt(gen.v_n(spec))}")
    except ValueError:
        pass
    return 0


def _cmd_stop(args) -> int:
    try:
        config = _load_config(args.config, args)
        if config.generator is None or config.stopping is None:
            raise PreconditionError("config", "generator and stopping required")
        spec = build_generator_spec(config.generator)
        rule = build_rule(config.stopping)
    except PreconditionError as exc:
        return _error_exit(exc)
    ens = gen.generate(spec, config.paths, config.seed)
    tau = rule.tau_batch(ens.values)
    stopped = tau != -1
    print(f"rule: {rule.label}")
    print(f"P(stopped): {_fmt(stopped.mean())}")
    if stopped.any():
        t = tau[stopped]
        s_tau = ens.values[np.flatnonzero(stopped), t - 1]
        print(f"E[tau | stopped]: {_fmt(t.mean())}")
        print(f"E[S_tau | stopped]: {_fmt(s_tau.mean())}")
    return 0


_BOUNDS = {
    "phi": (bounds.phi, ("u",)),
    "phi_bound": (bounds.phi_bound, ("u",)),
    "h1": (bounds.h1, ("u",)),
    "h1_lower": (bounds.h1_lower, ("u",)),
    "psi_sup": (bounds.psi_sup, ("t", "V", "C")),
    "mgf_log_bound": (bounds.mgf_log_bound, ("lambda", "C", "EX2")),
    "bernstein_tail": (bounds.bernstein_tail, ("t", "V", "C")),
    "doob_max_bound": (bounds.doob_max_bound, ("ES1", "lambda")),
    "lp_max_bound": (bounds.lp_max_bound, ("p", "M", "ES1")),
    "moment_bound": (bounds.moment_bound, ("p", "V")),
}


def _cmd_bound(args) -> int:
    name = args.name
    if name not in _BOUNDS:
        print(
            json.dumps({"error": {"field": "bound", "message": f"unknown bound {name!r}"}}),
            file=sys.stderr,
        )
        return 3
    fn, argnames = _BOUNDS[name]
    kv = {}
    for pair in args.values:
        key, _, value = pair.partition("=")
        kv[key] = float(value)
    try:
        fargs = [kv[a] for a in argnames]
    except KeyError as exc:
        print(
            json.dumps({"error": {"field": exc.args[0], "message": "required"}}),
            file=sys.stderr,
        )
        return 3
    try:
        value = fn(*fargs)
    except ValueError as exc:
        print(json.dumps({"error": {"field": name, "message": str(exc)}}), file=sys.stderr)
        return 3
    inputs = " ".join(f"{a}={_fmt(v)}" for a, v in zip(argnames, fargs))
    print(f"{name}({inputs}) = {_fmt(value)}")
    return 0


def _cmd_oracle(args) -> int:
    try:
        config = _load_config(args.config, args)
        if config.generator is None:
            raise PreconditionError("generator", "required")
        spec = build_generator_spec(config.generator)
        chain = gen.to_chain(spec)
    except PreconditionError as exc:
        return _error_exit(exc)
    except ValueError as exc:
        return _error_exit(PreconditionError("generator", str(exc)))
    stats = oracle.fold_expectations(
        chain,
        lambda p: [
            p[:, -1],
            np.abs(p[:, -1]),
            p[:, -1] ** 2,
            np.ones(p.shape[0]),
        ],
    )
    print(f"outcomes: {chain.outcome_count}")
    print(f"total_probability: {_fmt(stats[3])}")
    print(f"E[S_n]: {_fmt(stats[0])}")
    print(f"E[|S_n|]: {_fmt(stats[1])}")
    print(f"E[S_n^2]: {_fmt(stats[2])}")
    if "t" in config.params:
        t = float(config.params["t"])
        (tail,) = oracle.fold_expectations(
            chain, lambda p: [(p[:, -1] >= t).astype(np.float64)]
        )
        print(f"P(S_n >= {_fmt(t)}): {_fmt(tail)}")
    return 0


def _cmd_clt(args) -> int:
    try:
        config = _load_config(args.config, args)
        if config.generator is None:
            raise PreconditionError("generator", "required")
        if "n_grid" not in config.params:
            raise PreconditionError("params.n_grid", "required")
        spec = build_generator_spec(config.generator)
        diags = asymptotics.clt_diagnose(
            spec, config.params["n_grid"], config.paths, config.seed
        )
    except PreconditionError as exc:
        return _error_exit(exc)
    except ValueError as exc:
        return _error_exit(PreconditionError("clt", str(exc)))
    lines = ["n,sigma_n,V_n,ratio_cubed,ks_distance,ecf_distance,sigma_exact"]
    for d in diags:
        lines.append(
            f"{d.n},{_fmt(d.sigma_n)},{_fmt(d.V_n)},{_fmt(d.ratio_cubed)},"
            f"{_fmt(d.ks_distance)},{_fmt(d.ecf_distance)},{int(d.sigma_exact)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    trend = asymptotics.ratio_cubed_decreasing(diags)
    print(f"# ratio_cubed decreasing along grid: {str(trend).lower()}", file=sys.stderr)
    return 0


def _cmd_slln(args) -> int:
    try:
        config = _load_config(args.config, args)
        if config.generator is None:
            raise PreconditionError("generator", "required")
        for key in ("r", "epsilon", "n_grid"):
            if key not in config.params:
                raise PreconditionError(f"params.{key}", "required")
        spec = build_generator_spec(config.generator)
        diag = asymptotics.complete_convergence_diagnose(
            spec,
            float(config.params["r"]),
            float(config.params["epsilon"]),
            config.params["n_grid"],
            config.paths,
            config.seed,
            tolerance_z=config.tolerance_z,
        )
    except PreconditionError as exc:
        return _error_exit(exc)
    except ValueError as exc:
        return _error_exit(PreconditionError("slln", str(exc)))
    lines = ["n,tail,stderr,envelope,vn_over_nr,partial_sum,within_envelope,exact"]
    for rec, ps in zip(diag.tail_estimates, diag.partial_sum):
        lines.append(
            f"{rec.n},{_fmt(rec.estimate)},{_fmt(rec.stderr)},{_fmt(rec.envelope)},"
            f"{_fmt(rec.vn_over_nr)},{_fmt(ps)},{int(rec.within_envelope)},{int(rec.exact)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"# geometric_fit slope: {_fmt(diag.geometric_fit)}", file=sys.stderr)
    return 0 if all(r.within_envelope for r in diag.tail_estimates) else 1


def run_suite(directory: str, out: str | None = None) -> int:
    """Run every *.cfg experiment in a directory; aggregate verdicts."""
    paths = sorted(
        os.path.join(directory, f)
        for f in os.listdir(directory)
        if f.endswith(".cfg")
    )
    rows = []
    seen_ids = set()
    for cfg_path in paths:
        name = os.path.basename(cfg_path)
        t0 = time.perf_counter()
        try:
            with open(cfg_path) as fh:
                config = config_from_dict(parse_config_text(fh.read()))
            if config.experiment_id in seen_ids:
                raise PreconditionError("experiment_id", f"duplicate {config.experiment_id!r}")
            seen_ids.add(config.experiment_id)
            report, payload, _ = run(config)
            rows.append(
                {
                    "experiment_id": config.experiment_id,
                    "theorem_id": report.theorem_id,
                    "verdict": report.verdict,
                    "z_margin": _json_safe(report.z_margin),
                    "runtime_ms": payload["runtime_ms"],
                    "file": name,
                }
            )
        except (PreconditionError, ValueError, OSError) as exc:
            rows.append(
                {
                    "experiment_id": name,
                    "theorem_id": None,
                    "verdict": "ERROR",
                    "z_margin": None,
                    "runtime_ms": (time.perf_counter() - t0) * 1000.0,
                    "file": name,
                    "message": str(exc),
                }
            )
    counts = {"PASS": 0, "FAIL": 0, "INCONCLUSIVE": 0, "ERROR": 0}
    for row in rows:
        counts[row["verdict"]] += 1
        z = "n/a" if row["z_margin"] is None else _fmt(row["z_margin"])
        print(
            f"{row['verdict']:<12} {str(row['theorem_id'] or '-'):<24} "
            f"z={z:<16} {row['experiment_id']}"
        )
    print(
        f"# {counts['PASS']} pass, {counts['FAIL']} fail, "
        f"{counts['INCONCLUSIVE']} inconclusive, {counts['ERROR']} error"
    )
    if out:
        _write_json(out, {"experiments": rows, "counts": counts})
    if counts["FAIL"]:
        return 1
    if counts["ERROR"]:
        return 3
    if counts["INCONCLUSIVE"]:
        return 2
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--paths", type=int, default=None, help="override config paths")
    p.add_argument("--out", default=None, help="output file")
    p.add_argument("--dump-paths", action="store_true", help="write per-path CSV")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="demimart",
        description="verification harness for demimartingale inequalities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "check-demi", "gen", "stop", "oracle", "clt", "slln"):
        _add_common(sub.add_parser(name))
    pb = sub.add_parser("bound")
    pb.add_argument("name", help="bound name, e.g. bernstein_tail")
    pb.add_argument("values", nargs="*", help="key=value inputs")
    ps = sub.add_parser("suite")
    ps.add_argument("directory", help="directory of *.cfg experiments")
    ps.add_argument("--out", default=None, help="aggregate JSON output")
    args = parser.parse_args(argv)

    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "check-demi":
        return _cmd_verify(args, forced_theorem="Def1.2")
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "stop":
        return _cmd_stop(args)
    if args.command == "bound":
        return _cmd_bound(args)
    if args.command == "oracle":
        return _cmd_oracle(args)
    if args.command == "clt":
        return _cmd_clt(args)
    if args.command == "slln":
        return _cmd_slln(args)
    if args.command == "suite":
        return run_suite(args.directory, args.out)
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())

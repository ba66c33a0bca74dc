"""Command-line entry point: one subcommand per verification cluster.

Exit codes: 0 success (and studies whose pass flag is true), 1 a study or
verification failed, 2 usage/config errors.  Diagnostics go to stderr, data
to files or stdout.  Parameter precedence: flags > config file > defaults;
the config file (TOML or JSON, flat mapping of parameter names) is taken
from --config or the DARBLAT_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

CONFIG_ENV = "DARBLAT_CONFIG"

_RANDOMIZED = {"verify-darboux", "truncation-study", "closeness-scaling",
               "simulate", "compare-flows"}


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, "rb") as fh:
        if path.endswith(".toml"):
            try:
                import tomllib  # py311+
            except ModuleNotFoundError:
                import tomli as tomllib
            return tomllib.load(fh)
        return json.load(fh)


class _Merged:
    """flags > config file > defaults, tracking where each value came from."""

    def __init__(self, ns: argparse.Namespace, config: dict, defaults: dict):
        self.ns = vars(ns)
        self.config = config
        self.defaults = defaults

    def get(self, key, required: bool = False):
        flag = self.ns.get(key)
        if flag is not None:
            return flag
        if key in self.config:
            return self.config[key]
        if key in self.defaults:
            return self.defaults[key]
        if required:
            raise SystemExit(_usage_error(f"missing required parameter --{key.replace('_', '-')}"))
        return None

    def explicit(self, key) -> bool:
        return self.ns.get(key) is not None or key in self.config


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _emit(obj, out_path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="darblat",
        description="Darboux standardization and dNLS-like normal forms "
                    "for AL/Salerno lattices")
    p.add_argument("--config", help=f"TOML/JSON config file (or ${CONFIG_ENV})")
    p.add_argument("--ci", action="store_true",
                   help="CI mode: randomized subcommands require an explicit seed")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    nf = sub.add_parser("normal-form", help="transform the lattice Hamiltonian "
                                            "by the truncated inverse Lie series")
    nf.add_argument("--model", choices=["salerno", "al"])
    nf.add_argument("--K", type=int)
    nf.add_argument("--L", type=int)
    nf.add_argument("--degree", type=int)
    nf.add_argument("--sites", type=int)
    nf.add_argument("--out")

    vd = sub.add_parser("verify-darboux", help="Monte Carlo residual of the "
                                               "symplectic pullback identity")
    vd.add_argument("--nu", type=float)
    vd.add_argument("--rho", type=float)
    vd.add_argument("--samples", type=int)
    vd.add_argument("--seed", type=int)
    vd.add_argument("--tol", type=float)
    vd.add_argument("--direction", choices=["inverse", "forward"])
    vd.add_argument("--out")

    ts = sub.add_parser("truncation-study", help="residual degree/slope of the "
                                                 "truncated Lie series of P")
    cs = sub.add_parser("closeness-scaling", help="flow-distance exponents "
                                                  "between a model and its normal form")
    for q in (ts, cs):
        q.add_argument("--rho-grid", type=float, nargs="+", dest="rho_grid")
        q.add_argument("--nu", type=float)
        q.add_argument("--gamma", type=float)
        q.add_argument("--sites", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--tol", type=float)
        q.add_argument("--jobs", type=int)
        q.add_argument("--out", help="report path; .csv/.json by extension")
    ts.add_argument("--K-range", type=int, nargs="+", dest="K_range")
    ts.add_argument("--L", type=int)
    cs.add_argument("--pair", choices=["salerno-z0", "salerno-z1", "al-z0", "all"])
    cs.add_argument("--eps", type=float, help="fixed eps for the al-z0 pair")

    sim = sub.add_parser("simulate", help="integrate one trajectory, write CSV")
    sim.add_argument("--model", choices=["dnls", "al", "salerno", "z0", "z1"])
    sim.add_argument("--nu", type=float)
    sim.add_argument("--gamma", type=float)
    sim.add_argument("--eps", type=float)
    sim.add_argument("--sites", type=int)
    sim.add_argument("--bc", choices=["periodic", "fixed"])
    sim.add_argument("--rho", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--t-end", type=float, dest="t_end")
    sim.add_argument("--tol", type=float)
    sim.add_argument("--samples", type=int)
    sim.add_argument("--out", help="trajectory CSV path (default stdout)")

    cf = sub.add_parser("compare-flows", help="max distance between two model flows")
    cf.add_argument("--model-a", dest="model_a",
                    choices=["dnls", "al", "salerno", "z0", "z1"])
    cf.add_argument("--model-b", dest="model_b",
                    choices=["dnls", "al", "salerno", "z0", "z1"])
    cf.add_argument("--nu", type=float)
    cf.add_argument("--gamma", type=float)
    cf.add_argument("--eps", type=float)
    cf.add_argument("--sites", type=int)
    cf.add_argument("--bc", choices=["periodic", "fixed"])
    cf.add_argument("--rho", type=float)
    cf.add_argument("--seed", type=int)
    cf.add_argument("--horizon", type=float)
    cf.add_argument("--tol", type=float)
    cf.add_argument("--transport", choices=["none", "darboux"])
    cf.add_argument("--out", help="deviation-curve CSV path")

    eb = sub.add_parser("error-budget", help="Lie-series bounds from majorants")
    eb.add_argument("--rho", type=float)
    eb.add_argument("--K", type=int)
    eb.add_argument("--d1", type=float)
    eb.add_argument("--d2", type=float)
    eb.add_argument("--delta", type=float)
    eb.add_argument("--T", type=float, dest="big_t")
    eb.add_argument("--f-majorant", type=float, dest="f_majorant")
    eb.add_argument("--x-majorant", type=float, dest="x_majorant")
    eb.add_argument("--y-majorant", type=float, dest="y_majorant")
    eb.add_argument("--nu", type=float,
                    help="derive delta=T=1/(2 nu rho^2) and default majorants")
    eb.add_argument("--out")
    return p


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------

def _cmd_normal_form(m: _Merged) -> int:
    from darblat.lieseries import per_site_formula, transform_H

    model = m.get("model", required=True)
    K = int(m.get("K", required=True))
    L = m.get("L")
    degree = int(m.get("degree", required=True))
    sites = int(m.get("sites", required=True))
    poly = transform_H(model, K, None if L is None else int(L), degree, sites)
    formula = per_site_formula(poly, sites)
    _emit({
        "model": model, "K": K, "L": L, "degree": degree, "sites": sites,
        "terms": poly.to_json_terms(),
        "per_site_formula": formula,
    }, m.get("out"))
    print(formula, file=sys.stderr)
    return 0


def _cmd_verify_darboux(m: _Merged) -> int:
    from darblat.moser import pullback_residual_sweep

    report = pullback_residual_sweep(
        nu=float(m.get("nu", required=True)),
        rho=float(m.get("rho", required=True)),
        samples=int(m.get("samples") or 100),
        seed=int(m.get("seed") if m.get("seed") is not None else 0),
        tol=float(m.get("tol") or 1e-10),
        direction=m.get("direction") or "inverse",
    )
    _emit(report, m.get("out"))
    return 0 if report["pass"] else 1


def _study_config(m: _Merged):
    from darblat.experiments import StudyConfig

    kw = {}
    for key in ("rho_grid", "K_range", "L", "nu", "gamma", "sites", "seed",
                "tol", "jobs", "eps_fixed"):
        v = m.get(key)
        if v is not None:
            kw[key] = tuple(v) if key in ("rho_grid", "K_range") else v
    if m.get("eps") is not None:  # CLI spelling of eps_fixed
        kw["eps_fixed"] = m.get("eps")
    if "jobs" not in kw:
        kw["jobs"] = os.cpu_count() or 1
    return StudyConfig(**kw)


def _write_report(report, m: _Merged) -> None:
    from darblat.experiments import emit_report

    out = m.get("out")
    if out:
        fmt = "csv" if out.endswith(".csv") else "json"
        emit_report(report, fmt, out)
    else:
        sys.stdout.write(emit_report(report, "json").decode())


def _cmd_truncation_study(m: _Merged) -> int:
    from darblat.experiments import truncation_study

    table = truncation_study(_study_config(m))
    _write_report(table, m)
    return 0 if table.passed else 1


def _cmd_closeness_scaling(m: _Merged) -> int:
    from darblat.experiments import PAIRS, closeness_scaling

    cfg = _study_config(m)
    choice = m.get("pair") or "all"
    pairs = PAIRS if choice == "all" else (choice,)
    ok = True
    for i, pair in enumerate(pairs):
        report = closeness_scaling(cfg, pair)
        ok = ok and report.passed
        out = m.get("out")
        if out and len(pairs) > 1:
            stem, dot, ext = out.rpartition(".")
            path = f"{stem}-{pair}{dot}{ext}" if dot else f"{out}-{pair}"
        else:
            path = out
        if path:
            from darblat.experiments import emit_report
            emit_report(report, "csv" if path.endswith(".csv") else "json", path)
        else:
            from darblat.experiments import emit_report
            sys.stdout.write(emit_report(report, "json").decode())
    return 0 if ok else 1


def _traj_csv(traj, out_path: str | None) -> None:
    n = traj.states[0].n
    cols = ["t"] + [f"x_{j}" for j in range(n)] + [f"y_{j}" for j in range(n)] \
        + ["H", "P_or_norm"]
    lines = [",".join(cols)]
    charge = traj.P_values if traj.P_values is not None else traj.norm_values
    for k, t in enumerate(traj.times):
        st = traj.states[k]
        row = [repr(float(t))] + [repr(float(v)) for v in st.x] \
            + [repr(float(v)) for v in st.y] \
            + [repr(float(traj.H_values[k])), repr(float(charge[k]))]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _initial_state(m: _Merged):
    from darblat.lattice import random_direction, state_on_sphere

    sites = int(m.get("sites") or 8)
    rho = float(m.get("rho") if m.get("rho") is not None else 0.1)
    seed = int(m.get("seed") if m.get("seed") is not None else 0)
    bc = m.get("bc") or "periodic"
    return state_on_sphere(rho, random_direction(sites, seed), bc)


def _cmd_simulate(m: _Merged) -> int:
    from darblat.lattice import ModelParams, integrate

    params = ModelParams(
        model=m.get("model", required=True),
        nu=float(m.get("nu") or 0.0),
        gamma=float(m.get("gamma") or 0.0),
        eps=float(m.get("eps") or 0.0),
    )
    traj = integrate(params, _initial_state(m),
                     t_end=float(m.get("t_end") or 10.0),
                     tol=float(m.get("tol") or 1e-10),
                     n_samples=int(m.get("samples") or 257))
    _traj_csv(traj, m.get("out"))
    return 0


def _cmd_compare_flows(m: _Merged) -> int:
    from darblat.lattice import ModelParams, compare_flows

    nu = float(m.get("nu") or 0.0)
    gamma = float(m.get("gamma") or 0.0)
    eps = float(m.get("eps") or 0.0)
    model_a = m.get("model_a", required=True)
    model_b = m.get("model_b", required=True)
    pa = ModelParams(model_a, nu=nu, gamma=0.0 if model_a == "al" else gamma, eps=eps)
    pb = ModelParams(model_b, nu=nu, gamma=0.0 if model_b == "al" else gamma, eps=eps)
    curve = compare_flows(pa, pb, _initial_state(m),
                          horizon=float(m.get("horizon") or 10.0),
                          transport=m.get("transport") or "none",
                          tol=float(m.get("tol") or 1e-10))
    out = m.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write("t,distance\n")
            for t, d in zip(curve.times, curve.distances):
                fh.write(f"{t!r},{d!r}\n")
    _emit({"max_deviation": curve.max, "samples": int(curve.times.size)}, None)
    return 0


def _cmd_error_budget(m: _Merged) -> int:
    from dataclasses import asdict

    from darblat.lieseries import (default_domain, error_budget,
                                   moser_field_majorant, p_majorant)

    rho = float(m.get("rho", required=True))
    K = int(m.get("K", required=True))
    nu = m.get("nu")
    delta = m.get("delta")
    big_t = m.get("big_t")
    f_maj = m.get("f_majorant")
    x_maj = m.get("x_majorant")
    if nu is not None:
        nu = float(nu)
        if delta is None:
            delta = default_domain(nu, rho)
        if big_t is None:
            big_t = delta
        if f_maj is None:
            f_maj = p_majorant(rho, nu)
        if x_maj is None:
            x_maj = moser_field_majorant(rho, nu)
    if delta is None or big_t is None or f_maj is None or x_maj is None:
        return _usage_error("error-budget needs either --nu or explicit "
                            "--delta/--T/--f-majorant/--x-majorant")
    budget = error_budget(
        f_majorant=float(f_maj), X_majorant=float(x_maj), rho=rho,
        delta=float(delta), T=float(big_t),
        d1=float(m.get("d1") or 0.25), d2=float(m.get("d2") or 0.25),
        K=K,
        Y_majorant=None if m.get("y_majorant") is None else float(m.get("y_majorant")),
    )
    _emit(asdict(budget), m.get("out"))
    return 0


_HANDLERS = {
    "normal-form": _cmd_normal_form,
    "verify-darboux": _cmd_verify_darboux,
    "truncation-study": _cmd_truncation_study,
    "closeness-scaling": _cmd_closeness_scaling,
    "simulate": _cmd_simulate,
    "compare-flows": _cmd_compare_flows,
    "error-budget": _cmd_error_budget,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = _load_config(ns.config)
    except (OSError, ValueError) as exc:
        return _usage_error(f"cannot read config: {exc}")
    merged = _Merged(ns, config, {})
    if ns.ci and ns.command in _RANDOMIZED and not merged.explicit("seed"):
        return _usage_error(f"--seed is mandatory for {ns.command} in --ci mode")
    try:
        return _HANDLERS[ns.command](merged)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        return _usage_error(str(exc))
    except Exception as exc:  # runtime failures: blow-ups, singularities
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

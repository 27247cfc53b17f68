"""Command-line front end.

Exit codes: 0 success, 1 a check failed (the report is still written),
2 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import __version__
from .io import (InputError, amplified_from_json, amplified_to_json, element_from_json, element_to_json,
                 estimate_to_json, load_json, map_from_json, map_to_json)
from .lp import check_exponent, lp_norm
from .separating import (DecompositionError, NotJordanError, NotSeparatingError, decompose_bijective,
                         extract_yeadon, inverse_analysis, is_separating, jordan_split, kernel_summand)
from .suites import (SCHEMA_VERSION, ExampleParams, SuiteReport, run_example, suite_degree_detection,
                     suite_direct_maps, suite_main_theorems, suite_subhomogeneous_bounds)
from .valued import (cb_norm_estimate, check_special_identities, s1_bounded_norm_estimate, s1_norm_lower,
                     s1_norm_upper)

log = logging.getLogger("nclp")


class CommandResult:
    """Result fields plus pass/fail checks, rendered as JSON or CSV."""

    def __init__(self, command: str, params: dict, seed: int | None):
        self.report = SuiteReport(command, params, seed if seed is not None else 0)
        self.report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.fields: dict = {}

    def check(self, instance: str, name: str, measured, bound, ok: bool):
        self.report.add(instance, name, measured, bound, ok)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_json(self) -> str:
        d = self.report.to_dict()
        d.pop("data")
        d.pop("suite")
        d["command"] = self.report.suite
        d.update(self.fields)
        return json.dumps(d, indent=2, sort_keys=True, default=_default)

    def to_csv(self) -> str:
        return self.report.to_csv()


def _default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _suite_output(rep: SuiteReport) -> SuiteReport:
    return rep


# verbs ------------------------------------------------------------------------------

def cmd_norm(a) -> CommandResult:
    x = element_from_json(load_json(a.element))
    p = check_exponent(a.p)
    res = CommandResult("norm", {"p": p, "element": a.element}, None)
    res.fields["value"] = lp_norm(x, p)
    res.check("x", "norm", res.fields["value"], None, True)
    return res


def cmd_s1norm(a) -> CommandResult:
    X = amplified_from_json(load_json(a.amplified))
    p = check_exponent(a.p)
    res = CommandResult("s1norm", {"p": p, "amplified": a.amplified, "restarts": a.restarts}, a.seed)
    up = s1_norm_upper(X, p, restarts=a.restarts, seed=a.seed)
    lo = max(up.lower, s1_norm_lower(X, p, seed=a.seed, factorization=up.factorization))
    res.fields.update({"upper": up.value, "lower": lo, "converged": up.converged,
                       "iterations": up.iterations, "factorization_residual": up.factorization.residual(X)})
    res.check("X", "lower <= upper", lo, up.value, lo <= up.value)
    return res


def _load_map(a):
    T = map_from_json(load_json(a.map))
    if getattr(a, "p", None) is not None:
        T = T.with_p(check_exponent(a.p))
    return T


def _estimate(a, fn: Callable, name: str) -> CommandResult:
    T = _load_map(a)
    m_max = a.m_max or 2 * max(T.source.sizes)
    est = fn(T, m_max=m_max, restarts=a.restarts, seed=a.seed)
    res = CommandResult(name, {"p": T.p, "map": a.map, "m_max": m_max, "restarts": a.restarts}, a.seed)
    res.fields.update(estimate_to_json(est))
    ok = est.upper is None or est.lower <= est.upper * (1 + 1e-9)
    res.check("T", "lower <= upper", est.lower, est.upper, ok)
    return res


def cmd_cbnorm(a) -> CommandResult:
    return _estimate(a, cb_norm_estimate, "cbnorm")


def cmd_s1bound(a) -> CommandResult:
    return _estimate(a, s1_bounded_norm_estimate, "s1bound")


def cmd_yeadon(a) -> CommandResult:
    T = _load_map(a)
    res = CommandResult("yeadon", {"map": a.map, "p": T.p}, a.seed)
    sep = is_separating(T, seed=a.seed)
    res.fields["separating"] = sep.separating
    res.fields["reason"] = sep.reason
    if sep.separating:
        tri = sep.triple
        res.fields.update({"w": element_to_json(tri.w), "B": element_to_json(tri.B), "J": map_to_json(tri.J),
                           "kind": tri.kind, "residuals": tri.residuals})
    elif sep.witness is not None:
        res.fields["witness"] = [element_to_json(sep.witness[0]), element_to_json(sep.witness[1])]
    res.check("T", "separating", float(sep.separating), 1.0, sep.separating)
    return res


def cmd_split(a) -> CommandResult:
    J = _load_map(a)
    if a.extract:
        J = extract_yeadon(J).J
    sp = jordan_split(J, seed=a.seed)
    res = CommandResult("split", {"map": a.map, "extract": a.extract}, a.seed)
    res.fields.update({"e": element_to_json(sp.e), "f": element_to_json(sp.f),
                       "central": [kind for _, kind in sp.central]})
    res.check("J", "jordan split", None, None, True)
    return res


def cmd_decompose(a) -> CommandResult:
    T = _load_map(a)
    sp = decompose_bijective(T)
    res = CommandResult("decompose", {"map": a.map, "p": T.p}, a.seed)
    res.fields.update({"alpha_corners": sp.direct_corners, "beta_corners": sp.anti_corners,
                       "alpha": element_to_json(sp.alpha), "beta": element_to_json(sp.beta),
                       "checks": sp.checks})
    res.check("T", "reassembly", sp.checks["reassembly"], 1e-8, True)
    return res


def cmd_inverse(a) -> CommandResult:
    T = _load_map(a)
    rep = inverse_analysis(T, seed=a.seed)
    res = CommandResult("inverse", {"map": a.map, "p": T.p}, a.seed)
    res.fields.update({"inverse": map_to_json(rep.Tinv), "separating": rep.separating,
                       "j_inverse_matches": rep.j_inverse_matches, "twisted_matches": rep.twisted_matches,
                       "residuals": rep.residuals})
    res.check("Tinv", "separating", float(rep.separating), 1.0, rep.separating)
    res.check("Tinv", "J' = J^-1", rep.residuals.get("JprimeJ_minus_id"), 1e-8, rep.j_inverse_matches)
    return res


def cmd_kernel(a) -> CommandResult:
    T = _load_map(a)
    ks = kernel_summand(T)
    res = CommandResult("kernel", {"map": a.map}, a.seed)
    res.fields.update({"kernel_corners": ks.kernel_corners, "M0": element_to_json(ks.M0),
                       "complement": element_to_json(ks.complement), "checks": ks.checks})
    res.check("T", "kernel is a central summand", ks.checks["kernel_vanishing"], 1e-8, True)
    return res


def cmd_degree(a) -> CommandResult:
    p = check_exponent(a.p)
    N = suite_degree_detection(a.K, p, a.branch)
    res = CommandResult("degree", {"K": a.K, "p": p, "branch": a.branch}, None)
    res.fields["N"] = N
    res.check("K", "degree", N, None, True)
    return res


def cmd_verify(a):
    if a.suite == "subhomogeneous":
        return suite_subhomogeneous_bounds(a.N, check_exponent(a.p), samples=a.samples, seed=a.seed)
    if a.suite == "direct":
        return suite_direct_maps(check_exponent(a.p), trials=a.trials, seed=a.seed)
    if a.suite == "main":
        return suite_main_theorems(check_exponent(a.p), trials=a.trials, seed=a.seed)
    if a.suite == "identities":
        rep = check_special_identities(a.N, a.m, check_exponent(a.p), samples=a.samples, seed=a.seed)
        res = CommandResult("identities", {"n": a.N, "m": a.m, "p": a.p, "samples": a.samples}, a.seed)
        res.check(f"n={a.N},m={a.m}", "Sp transposition identity", rep.cb_max_rel, 1e-8, rep.cb_max_rel <= 1e-8)
        res.check(f"n={a.N},m={a.m}", "S1 transposition identity", rep.s1_max_rel, 1e-3, rep.s1_max_rel <= 1e-3)
        return res
    raise InputError(f"unknown suite {a.suite!r}")


def cmd_example(a):
    return run_example(ExampleParams(a.p, a.eps, n_max=a.nmax, m_max=a.mmax, seed=a.seed))


# parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nclp", description="Separating maps on noncommutative L^p spaces")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--csv", action="store_true", help="CSV summary instead of JSON")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("norm", parents=[common], help="L^p norm of an element")
    s.add_argument("--element", required=True)
    s.add_argument("--p", type=float, required=True)
    s.set_defaults(fn=cmd_norm)

    s = sub.add_parser("s1norm", parents=[common], help="S^1-valued norm bracket of an amplified element")
    s.add_argument("--amplified", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--restarts", type=int, default=8)
    s.set_defaults(fn=cmd_s1norm)

    for verb, fn, desc in (("cbnorm", cmd_cbnorm, "completely bounded norm estimate"),
                           ("s1bound", cmd_s1bound, "S^1-bounded norm estimate")):
        s = sub.add_parser(verb, parents=[common], help=desc)
        s.add_argument("--map", required=True)
        s.add_argument("--p", type=float)
        s.add_argument("--m-max", type=int, default=None, help="default: 2 x largest block size")
        s.add_argument("--restarts", type=int, default=8)
        s.set_defaults(fn=fn)

    for verb, fn, desc in (("yeadon", cmd_yeadon, "separating test and Yeadon triple"),
                           ("decompose", cmd_decompose, "direct / anti-direct split of a bijective map"),
                           ("inverse", cmd_inverse, "inverse of a bijective separating map"),
                           ("kernel", cmd_kernel, "kernel summand of a separating map")):
        s = sub.add_parser(verb, parents=[common], help=desc)
        s.add_argument("--map", required=True)
        s.add_argument("--p", type=float)
        s.set_defaults(fn=fn)

    s = sub.add_parser("split", parents=[common], help="split a Jordan map into direct and anti-direct parts")
    s.add_argument("--map", required=True)
    s.add_argument("--p", type=float)
    s.add_argument("--extract", action="store_true", help="treat the map as T and split its Yeadon J")
    s.set_defaults(fn=cmd_split)

    s = sub.add_parser("degree", parents=[common], help="degree bound from a transposition constant")
    s.add_argument("--K", type=float, required=True)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--branch", choices=["cb", "S1"], default="cb")
    s.set_defaults(fn=cmd_degree)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=["subhomogeneous", "direct", "main", "identities"])
    s.add_argument("--N", type=int, default=2)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--trials", type=int, default=5)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("example", parents=[common], help="the truncated non-decomposable example")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--nmax", type=int, default=4)
    s.add_argument("--mmax", type=int, default=2)
    s.set_defaults(fn=cmd_example)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        result = a.fn(a)
    except (InputError, ValueError, KeyError) as exc:
        if isinstance(exc, (NotSeparatingError, NotJordanError, DecompositionError)):
            return _emit_failure(a, exc)
        print(f"nclp: input error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, CommandResult):
        result.report.runtime = time.perf_counter() - t0
    text = result.to_csv() if a.csv else result.to_json()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0 if result.passed else 1


def _emit_failure(a, exc: Exception) -> int:
    """A structural check failed (not separating, not decomposable): report and exit 1."""
    params = {k: v for k, v in vars(a).items() if k not in ("fn",) and not callable(v)}
    res = CommandResult(a.verb, params, getattr(a, "seed", 0))
    res.fields["error"] = str(exc)
    res.check("input", type(exc).__name__, getattr(exc, "residual", None), None, False)
    text = res.to_csv() if a.csv else res.to_json()
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

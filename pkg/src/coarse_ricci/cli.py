"""Command-line front end.

Exit codes: 0 success (or envelope/bound holds), 1 envelope or bound
violated, 2 invalid input or unmet hypothesis.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .contraction import contraction_grid, inf_equality_tolerance, verify_contraction
from .curvature import check_concavity, curvature_profile, time_grid, CurvatureProfile
from .errors import CoarseRicciError, NotReversible
from .gallery import FlowExample, flow_curvature, flow_space, flow_table, parse_gallery
from .markov_core import Generator, Measure, check_reversible, dump_chain_spec, load_chain_spec, semigroup_rows, stationary_measure
from .spectral import additive_symmetrization_gap, operator_norm_decay, spectral_gap, check_lichnerowicz
from .transport import wasserstein1, write_plan_csv

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


@dataclass
class AnalysisConfig:
    input: str | None = None
    gallery: str | None = None
    t_min: float | None = None
    t_max: float | None = None
    grid_density: int = 48
    w1_tol: float = 1e-9
    exp_tol: float = 1e-12
    eig_tol: float = 1e-6
    output_format: str = "json"
    out: str | None = None
    seed: int = 0

    def validate(self):
        if (self.input is None) == (self.gallery is None):
            raise ValueError("exactly one of --input and --gallery is required")
        if self.t_min is not None and self.t_max is not None and not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t-min < t-max")
        if self.t_min is not None and self.t_min <= 0 or self.t_max is not None and self.t_max <= 0:
            raise ValueError("times must be positive")
        if self.grid_density < 8:
            raise ValueError("grid density must be at least 8")
        if self.output_format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        return self

    def grid(self, flow: bool = False):
        lo = self.t_min if self.t_min is not None else (1e-12 if flow else 1e-6)
        hi = self.t_max if self.t_max is not None else (1e-2 if flow else 1e-1)
        return time_grid(lo, hi, self.grid_density)


def load_process(cfg: AnalysisConfig):
    if cfg.input is not None:
        return load_chain_spec(cfg.input)
    return parse_gallery(cfg.gallery, seed=cfg.seed)


def _orbit_pairs(cfg: AnalysisConfig, gen: Generator):
    # circle walk is rotation invariant: pairs (0, k) represent every pair class
    if cfg.gallery and cfg.gallery.split(":")[0] == "circle":
        return [(0, k) for k in range(1, gen.n // 2 + 1)]
    return None


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else str(v)


def profile_to_dict(prof: CurvatureProfile, samples: bool = True) -> dict:
    lab = prof.space.labels
    pairs = []
    for (x, y), e in sorted(prof.estimates.items()):
        row = {
            "x": lab[x], "y": lab[y], "d": e.distance,
            "kappa_low": e.kappa_low, "kappa_high": e.kappa_high, "spread": e.spread,
            "extrapolated": _num(e.extrapolated), "lower_bound": _num(e.lower_bound),
        }
        if samples:
            row.update(t=e.times.tolist(), r=e.r.tolist(), w1=e.w1.tolist())
        pairs.append(row)
    return {
        "global_K": prof.global_K,
        "global_K_high": prof.global_K_high,
        "max_spread": prof.max_spread,
        "metric_checked": prof.space.checked,
        "reduced": prof.reduced,
        "pairs": pairs,
        **prof.meta,
    }


PROFILE_COLUMNS = ["x_label", "y_label", "d", "kappa_low", "kappa_high", "extrapolated", "lower_bound"]


def _profile_csv(prof: CurvatureProfile) -> str:
    lab = prof.space.labels
    rows = [
        (lab[x], lab[y], e.distance, e.kappa_low, e.kappa_high,
         "" if e.extrapolated is None else e.extrapolated,
         "" if e.lower_bound is None else e.lower_bound)
        for (x, y), e in sorted(prof.estimates.items())
    ]
    return _csv(PROFILE_COLUMNS, rows)


def _flow_report(cfg: AnalysisConfig, flow: FlowExample):
    grid = cfg.grid(flow=True)
    space = flow_space(flow)
    pts = flow.anchor_points
    est = {}
    for a, b in [(0, 1), (1, 2), (0, 2)]:
        e = flow_curvature(flow, (pts[a], pts[b]), grid)
        est[(a, b)] = e
    prof = CurvatureProfile(space, est, min(e.kappa_low for e in est.values()), rate_scale=0.0)
    low_viol = check_concavity(prof, which="low", tol=1e-6)
    high_viol = check_concavity(prof, which="high", tol=1e-6)
    return prof, low_viol, high_viol


def cmd_curvature(cfg: AnalysisConfig) -> int:
    proc = load_process(cfg)
    if isinstance(proc, FlowExample):
        prof, low_viol, high_viol = _flow_report(cfg, proc)
        if cfg.output_format == "csv":
            text = _profile_csv(prof)
        else:
            doc = profile_to_dict(prof)
            doc["concavity_violations"] = {
                "kappa_low": [list(v) for v in low_viol],
                "kappa_high": [list(v) for v in high_viol],
            }
            text = json.dumps(doc, indent=1) + "\n"
        _emit(text, cfg.out)
        return EXIT_OK
    prof = curvature_profile(proc, cfg.grid(), pairs=_orbit_pairs(cfg, proc))
    if cfg.output_format == "csv":
        text = _profile_csv(prof)
    else:
        doc = profile_to_dict(prof)
        doc["backend"] = kernels.BACKEND
        doc["inf_equality"] = {
            "inf_low": prof.global_K, "inf_high": prof.global_K_high,
            "tolerance": inf_equality_tolerance(prof.global_K),
        }
        text = json.dumps(doc, indent=1) + "\n"
    _emit(text, cfg.out)
    print(f"global_K = {prof.global_K:.9g} (window spread {prof.max_spread:.3g})", file=sys.stderr)
    return EXIT_OK


def _resolve_K(cfg: AnalysisConfig, gen: Generator, K: str) -> float:
    if str(K).lower() == "auto":
        # conservative end of the estimate: min over pairs of the window minimum
        return curvature_profile(gen, cfg.grid(), pairs=_orbit_pairs(cfg, gen), extrapolate=False).global_K
    return float(K)


def cmd_contraction(cfg: AnalysisConfig, K="auto") -> int:
    gen = load_process(cfg)
    if not isinstance(gen, Generator):
        raise ValueError("contraction needs a Markov generator, not the flow example")
    Kval = _resolve_K(cfg, gen, K)
    rep = verify_contraction(gen, Kval, contraction_grid(Kval), tol=cfg.exp_tol)
    lab = gen.space.labels
    if cfg.output_format == "csv":
        rows = [(lab[c.pair[0]], lab[c.pair[1]], c.t, c.lhs, c.rhs, c.margin) for c in rep.checks]
        text = _csv(["x_label", "y_label", "t", "w1", "envelope", "margin"], rows)
    else:
        text = json.dumps({
            "K": rep.K, "passed": rep.passed, "worst_margin": rep.worst_margin,
            "tolerance": rep.tolerance, "metric_checked": gen.space.checked,
            "checks": [
                {"x": lab[c.pair[0]], "y": lab[c.pair[1]], "t": c.t, "w1": c.lhs,
                 "envelope": c.rhs, "margin": c.margin}
                for c in rep.checks
            ],
        }, indent=1) + "\n"
    _emit(text, cfg.out)
    print(f"K = {rep.K:.9g}; worst margins:", file=sys.stderr)
    for c in rep.worst(5):
        print(f"  ({lab[c.pair[0]]}, {lab[c.pair[1]]}) t={c.t:.4g} margin={c.margin:.3e}", file=sys.stderr)
    print("PASS" if rep.passed else "FAIL", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_spectral(cfg: AnalysisConfig, K="auto") -> int:
    gen = load_process(cfg)
    if not isinstance(gen, Generator):
        raise ValueError("spectral needs a Markov generator, not the flow example")
    pi = stationary_measure(gen)
    if not check_reversible(gen, pi):
        g = additive_symmetrization_gap(gen, pi)
        raise NotReversible(
            "generator is not reversible; the curvature bound does not apply "
            f"(additive-symmetrization gap, for information only: {g:.6g})"
        )
    rep = spectral_gap(gen, pi)
    Kval = _resolve_K(cfg, gen, K)
    ok = check_lichnerowicz(rep.gap, Kval)
    grid = np.geomspace(0.01, 2.0 / max(Kval, 0.1), 10)
    decay, decay_ok = operator_norm_decay(gen, pi, max(Kval, 0.0), grid, tol=cfg.exp_tol)
    if cfg.output_format == "csv":
        rows = [("eigenvalue", k, float(v), "") for k, v in enumerate(rep.eigenvalues)]
        rows += [("norm_decay", t, nrm, env) for t, nrm, env in decay]
        text = _csv(["series", "x", "value", "envelope"], rows)
    else:
        text = json.dumps({
            "eigenvalues": rep.eigenvalues.tolist(), "gap": rep.gap, "K": Kval,
            "bound_satisfied": ok, "skipped": ok is None, "residual": rep.residual,
            "norm_decay": [{"t": t, "norm": nrm, "envelope": env} for t, nrm, env in decay],
            "norm_decay_ok": decay_ok,
        }, indent=1) + "\n"
    _emit(text, cfg.out)
    msg = "skipped (K <= 0)" if ok is None else ("PASS" if ok else "FAIL")
    print(f"gap = {rep.gap:.9g}, K = {Kval:.9g}: {msg}", file=sys.stderr)
    return EXIT_FAIL if ok is False else EXIT_OK


def cmd_export(cfg: AnalysisConfig) -> int:
    proc = load_process(cfg)
    if isinstance(proc, FlowExample):
        _emit(_csv(["t", "f"], flow_table(proc)), cfg.out)
        return EXIT_OK
    if cfg.out is None:
        from .markov_core import generator_to_spec

        sys.stdout.write(json.dumps(generator_to_spec(proc), indent=1) + "\n")
    else:
        d = os.path.dirname(os.path.abspath(cfg.out))
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
        os.close(fd)
        dump_chain_spec(proc, tmp)
        os.replace(tmp, cfg.out)
    return EXIT_OK


def cmd_plan(cfg: AnalysisConfig, x, y, t: float) -> int:
    gen = load_process(cfg)
    if not isinstance(gen, Generator):
        raise ValueError("plan needs a Markov generator")
    sp = gen.space
    i, j = sp.index(x), sp.index(y)
    P = semigroup_rows(gen, t, [i, j], cfg.exp_tol)
    plan = wasserstein1(Measure(P[0]), Measure(P[1]), sp)
    if cfg.output_format == "csv":
        buf = io.StringIO()
        write_plan_csv(plan, sp, buf)
        text = buf.getvalue()
    else:
        from .transport import plan_rows

        text = json.dumps({"w1": plan.cost, "plan": [list(r) for r in plan_rows(plan, sp)]}, indent=1) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", metavar="PATH", help="chain-spec JSON document")
    src.add_argument("--gallery", metavar="SPEC", help="dyadic:N | circle:N | random:n:seed | flow")
    common.add_argument("--t-min", type=float)
    common.add_argument("--t-max", type=float)
    common.add_argument("--grid-density", type=int, default=48, help="samples per 2*pi of ln t")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="coarse-ricci", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("curvature", parents=[common], help="curvature profile")
    for name in ("contraction", "spectral"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--K", default="auto", metavar="VALUE|auto")
    sub.add_parser("export", parents=[common], help="write a gallery process as chain-spec JSON")
    pl = sub.add_parser("plan", parents=[common], help="optimal plan between P_x^t and P_y^t")
    pl.add_argument("--x", required=True)
    pl.add_argument("--y", required=True)
    pl.add_argument("--t", type=float, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    cfg = AnalysisConfig(
        input=args.input, gallery=args.gallery, t_min=args.t_min, t_max=args.t_max,
        grid_density=args.grid_density, output_format=args.format, out=args.out, seed=args.seed,
    )
    try:
        cfg.validate()
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            if args.command == "curvature":
                return cmd_curvature(cfg)
            if args.command == "contraction":
                if str(args.K).lower() != "auto":
                    float(args.K)
                return cmd_contraction(cfg, args.K)
            if args.command == "spectral":
                if str(args.K).lower() != "auto":
                    float(args.K)
                return cmd_spectral(cfg, args.K)
            if args.command == "export":
                return cmd_export(cfg)
            if args.command == "plan":
                return cmd_plan(cfg, args.x, args.y, args.t)
    except (CoarseRicciError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

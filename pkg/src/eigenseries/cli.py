"""Command-line front end: spectrum, evolution, and convergence studies.

Every run emits a single JSON report with a stable set of top-level keys
(unused blocks are null) so downstream tooling can rely on the schema.
Exit codes: 0 success, 1 input error, 2 solver failure (the report is still
written, with failure markers).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from .errors import EigenSeriesError, InvalidSpec
from .hamiltonian import (
    DEFAULT_GAP_TOL,
    DEFAULT_TOL_HERM,
    HermitianMatrix,
    ModelSpec,
    generate_model,
    split,
)
from .evolution import evolution_series, propagate
from .oracle import dense_eig, expm_minus_iHt
from .solver import SolveConfig, eigenvalue_series_eq19, rs_perturbation, solve_spectrum

_CONFIG_KEYS = {
    "root_tol": float,
    "continuation_steps": int,
    "kernel": str,
    "L": int,
    "eq19_max_m": int,
    "q_form": str,
    "jobs": int,
    "gap_tol": float,
    "tol_herm": float,
}

_DEFAULTS = {
    "root_tol": 1e-12,
    "continuation_steps": 8,
    "kernel": "resolvent",
    "L": 30,
    "eq19_max_m": 8,
    "q_form": "closed",
    "jobs": 1,
    "gap_tol": DEFAULT_GAP_TOL,
    "tol_herm": DEFAULT_TOL_HERM,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenseries",
        description="Series-solution eigensolver and propagator for finite Hermitian matrices",
    )
    parser.add_argument("--version", action="version", version=f"eigenseries {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        src = p.add_argument_group("input")
        src.add_argument("--input", metavar="FILE", help="matrix JSON file {dim, re, im}")
        src.add_argument("--model", choices=("two_level", "chain", "banded_random"))
        src.add_argument("--dim", type=int, default=None)
        src.add_argument("--delta", type=float, default=1.0, help="level spacing (models)")
        src.add_argument("--lambda", dest="lam", type=float, default=0.1, help="coupling strength (models)")
        src.add_argument("--bandwidth", type=int, default=2, help="band width (banded_random)")
        src.add_argument("--seed", type=int, default=0, help="rng seed (banded_random)")
        src.add_argument("--symmetrize", action="store_true", help="average H with its adjoint instead of rejecting")
        solver = p.add_argument_group("solver")
        solver.add_argument("--root-tol", dest="root_tol", type=float, default=None)
        solver.add_argument("--continuation-steps", dest="continuation_steps", type=int, default=None)
        solver.add_argument("--kernel", choices=("resolvent", "series"), default=None)
        solver.add_argument("--L", dest="L", type=int, default=None, help="series truncation order")
        solver.add_argument("--eq19-max-m", dest="eq19_max_m", type=int, default=None)
        solver.add_argument("--q-form", dest="q_form", choices=("closed", "series"), default=None)
        solver.add_argument("--jobs", type=int, default=None, help="parallel per-level solves")
        solver.add_argument("--gap-tol", dest="gap_tol", type=float, default=None)
        solver.add_argument("--tol-herm", dest="tol_herm", type=float, default=None)
        out = p.add_argument_group("output")
        out.add_argument("--config", metavar="FILE", help="JSON config; flags override it")
        out.add_argument("--out", metavar="FILE", help="write the JSON report here (default stdout)")
        out.add_argument("--csv", metavar="FILE", help="also write a CSV table")

    p_spec = sub.add_parser("spectrum", help="solve every level and compare with the dense oracle")
    add_common(p_spec)

    p_evo = sub.add_parser("evolve", help="propagate a state with the coupling-order expansion")
    add_common(p_evo)
    p_evo.add_argument("--psi0", required=True, help="comma-separated amplitudes, e.g. '1,0' or '0.6,0.8j'")
    p_evo.add_argument("--t", type=float, required=True)

    p_conv = sub.add_parser("convergence", help="truncation/coupling error study against the oracle")
    add_common(p_conv)
    p_conv.add_argument("--orders", default="2,4,8", help="comma-separated eq19 truncation orders")
    p_conv.add_argument(
        "--lambdas",
        default="0.01,0.02,0.04,0.08",
        help="comma-separated couplings (models) or coupling scale factors (file input)",
    )
    return parser


def _resolve_config(args) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidSpec(f"config file: {exc}") from None
        for key, value in doc.items():
            if key not in _CONFIG_KEYS:
                raise InvalidSpec(f"config file: unknown key {key!r}")
            cfg[key] = _CONFIG_KEYS[key](value)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _solve_config(cfg: dict) -> SolveConfig:
    return SolveConfig(
        root_tol=cfg["root_tol"],
        continuation_steps=cfg["continuation_steps"],
        eq19_max_m=cfg["eq19_max_m"],
        q_form=cfg["q_form"],
        kernel=cfg["kernel"],
        series_order=cfg["L"],
    )


def _load_input(args, cfg):
    if bool(args.input) == bool(args.model):
        raise InvalidSpec("exactly one of --input FILE or --model NAME is required")
    if args.input:
        with open(args.input, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        try:
            with open(args.input, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"input file: not valid JSON: {exc}") from None
        h = HermitianMatrix.from_jsonable(obj, tol_herm=cfg["tol_herm"], symmetrize=args.symmetrize)
        desc = {"kind": "file", "path": args.input, "sha256": digest, "model": None}
    else:
        dim = args.dim if args.dim is not None else (2 if args.model == "two_level" else 4)
        spec = ModelSpec(
            family=args.model, dim=dim, delta=args.delta, lam=args.lam,
            bandwidth=args.bandwidth, seed=args.seed,
        )
        h = generate_model(spec)
        desc = {
            "kind": "model",
            "path": None,
            "sha256": None,
            "model": {
                "family": spec.family, "dim": spec.dim, "delta": spec.delta,
                "lambda": spec.lam, "bandwidth": spec.bandwidth, "seed": spec.seed,
            },
        }
    desc["dim"] = h.dim
    desc["matrix"] = h.to_jsonable()
    return h, desc


def _report_skeleton(desc, cfg) -> dict:
    return {
        "version": __version__,
        "input": desc,
        "config": cfg,
        "levels": None,
        "oracle": None,
        "evolution": None,
        "convergence": None,
        "timings": {},
    }


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, allow_nan=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _phase_aligned_distance(v: np.ndarray, u: np.ndarray) -> float:
    overlap = np.vdot(u, v)
    if abs(overlap) == 0:
        return float(np.linalg.norm(v - u))
    return float(np.linalg.norm(v * (np.conj(overlap) / abs(overlap)) - u))


def _spectrum_payload(h, s, cfg):
    scfg = _solve_config(cfg)
    t0 = time.perf_counter()
    result = solve_spectrum(s, scfg, jobs=cfg["jobs"])
    solve_elapsed = time.perf_counter() - t0
    t0 = time.perf_counter()
    dec = dense_eig(h)
    oracle_elapsed = time.perf_counter() - t0

    solved = [p for p in result.pairs if p is not None]
    order = np.argsort([p.energy for p in solved], kind="stable") if solved else []
    energy_errs, vector_errs = [], []
    oracle_energy_of = {}
    if len(solved) == s.dim:
        for rank, idx in enumerate(order):
            pair = solved[idx]
            oracle_energy_of[pair.gamma] = float(dec.values[rank])
            energy_errs.append(abs(pair.energy - dec.values[rank]))
            vector_errs.append(_phase_aligned_distance(pair.normalized(), dec.vectors[:, rank]))

    levels_block = []
    for gamma in range(s.dim):
        pair = result.pairs[gamma]
        if pair is None:
            err = next(f for f in result.failures if f[0] == gamma)
            levels_block.append({
                "gamma": gamma, "failed": True, "error": err[1], "message": err[2],
                "E0": float(s.levels[gamma]), "energy": None, "rs2": None,
                "oracle_energy": None, "abs_err_vs_oracle": None, "residual": None,
                "iterations": None, "method": None, "diagnostics": None,
            })
            continue
        levels_block.append({
            "gamma": gamma,
            "failed": False,
            "error": None,
            "message": None,
            "E0": float(s.levels[gamma]),
            "energy": pair.energy,
            "rs2": rs_perturbation(s, gamma, 2),
            "oracle_energy": oracle_energy_of.get(gamma),
            "abs_err_vs_oracle": (abs(pair.energy - oracle_energy_of[gamma])
                                  if gamma in oracle_energy_of else None),
            "residual": pair.residual,
            "iterations": pair.iterations,
            "method": pair.method,
            "diagnostics": _jsonable(pair.diagnostics),
        })

    oracle_block = {
        "values": dec.values.tolist(),
        "max_abs_energy_diff": max(energy_errs) if energy_errs else None,
        "max_vector_distance": max(vector_errs) if vector_errs else None,
        "spectrum_diagnostics": _jsonable(result.diagnostics),
    }
    timings = {"solve_s": solve_elapsed, "oracle_s": oracle_elapsed}
    return result, levels_block, oracle_block, timings


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _cmd_spectrum(args) -> int:
    cfg = _resolve_config(args)
    h, desc = _load_input(args, cfg)
    report = _report_skeleton(desc, cfg)
    exit_code = 0
    try:
        s = split(h, gap_tol=cfg["gap_tol"])
        result, levels_block, oracle_block, timings = _spectrum_payload(h, s, cfg)
        report["levels"] = levels_block
        report["oracle"] = oracle_block
        report["timings"] = timings
        if result.failures:
            exit_code = 2
    except EigenSeriesError as exc:
        report["levels"] = []
        report["oracle"] = {"error": type(exc).__name__, "message": str(exc)}
        exit_code = 2
    _emit(report, args)
    if args.csv and report["levels"] is not None:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gamma", "E0", "energy", "rs2", "oracle", "residual"])
            for row in report["levels"]:
                writer.writerow([
                    row["gamma"], row["E0"], row["energy"], row["rs2"],
                    row["oracle_energy"], row["residual"],
                ])
    return exit_code


def _parse_psi0(text: str, dim: int) -> np.ndarray:
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    try:
        vec = np.array([complex(p) for p in parts], dtype=np.complex128)
    except ValueError:
        raise InvalidSpec(f"--psi0: could not parse {text!r} as complex amplitudes") from None
    if vec.shape[0] != dim:
        raise InvalidSpec(f"--psi0 has {vec.shape[0]} entries, matrix dim is {dim}")
    if np.linalg.norm(vec) == 0:
        raise InvalidSpec("--psi0 must be nonzero")
    return vec


def _cmd_evolve(args) -> int:
    cfg = _resolve_config(args)
    h, desc = _load_input(args, cfg)
    psi0 = _parse_psi0(args.psi0, h.dim)
    report = _report_skeleton(desc, cfg)
    exit_code = 0
    try:
        s = split(h, gap_tol=cfg["gap_tol"])
        t0 = time.perf_counter()
        prop = propagate(s, psi0, args.t, order=cfg["L"])
        elapsed = time.perf_counter() - t0
        u_exact = expm_minus_iHt(h, args.t)
        psi_exact = u_exact @ psi0
        report["evolution"] = {
            "t": args.t,
            "L": cfg["L"],
            "psi0": {"re": psi0.real.tolist(), "im": psi0.imag.tolist()},
            "psi": {"re": prop.psi.real.tolist(), "im": prop.psi.imag.tolist()},
            "oracle_psi": {"re": psi_exact.real.tolist(), "im": psi_exact.imag.tolist()},
            "per_order_norms": prop.per_order_norms.tolist(),
            "deviation_2norm": float(np.linalg.norm(prop.psi - psi_exact)),
            "unitarity_defect": prop.series.unitarity_defect,
            "converged": prop.converged,
        }
        report["timings"] = {"evolve_s": elapsed}
    except EigenSeriesError as exc:
        report["evolution"] = {"error": type(exc).__name__, "message": str(exc)}
        exit_code = 2
    _emit(report, args)
    return exit_code


def _parse_grid(text: str, caster, flag: str):
    try:
        values = [caster(p.strip()) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise InvalidSpec(f"{flag}: could not parse {text!r}") from None
    if not values:
        raise InvalidSpec(f"{flag}: empty grid")
    return values


def _cmd_convergence(args) -> int:
    cfg = _resolve_config(args)
    orders = _parse_grid(args.orders, int, "--orders")
    lambdas = _parse_grid(args.lambdas, float, "--lambdas")
    h0, desc = _load_input(args, cfg)
    report = _report_skeleton(desc, cfg)
    rows = []
    exit_code = 0
    t0 = time.perf_counter()
    try:
        for lam in lambdas:
            if args.model:
                dim = args.dim if args.dim is not None else (2 if args.model == "two_level" else 4)
                h = generate_model(ModelSpec(
                    family=args.model, dim=dim, delta=args.delta, lam=lam,
                    bandwidth=args.bandwidth, seed=args.seed,
                ))
                s = split(h, gap_tol=cfg["gap_tol"])
            else:
                base = split(h0, gap_tol=cfg["gap_tol"])
                s = base.scaled(lam)
                h = s.reconstruct()
            dec = dense_eig(h)
            scfg = _solve_config(cfg)
            spec_result = solve_spectrum(s, scfg, jobs=cfg["jobs"])
            solved = [p for p in spec_result.pairs if p is not None]
            if len(solved) != s.dim:
                exit_code = 2
                for gamma, name, message in spec_result.failures:
                    rows.append({"lambda": lam, "gamma": gamma, "method": "fixed_point",
                                 "truncation": None, "abs_err": None, "converged": False,
                                 "error": name, "message": message})
                continue
            order_map = np.argsort([p.energy for p in solved], kind="stable")
            oracle_of = {}
            for rank, idx in enumerate(order_map):
                oracle_of[solved[idx].gamma] = float(dec.values[rank])
            for pair in solved:
                gamma = pair.gamma
                oracle_e = oracle_of[gamma]
                rows.append({"lambda": lam, "gamma": gamma, "method": "fixed_point",
                             "truncation": None, "abs_err": abs(pair.energy - oracle_e),
                             "converged": True, "error": None, "message": None})
                rows.append({"lambda": lam, "gamma": gamma, "method": "rs2",
                             "truncation": 2,
                             "abs_err": abs(rs_perturbation(s, gamma, 2) - oracle_e),
                             "converged": True, "error": None, "message": None})
                for m in orders:
                    scfg_m = SolveConfig(
                        root_tol=cfg["root_tol"], continuation_steps=cfg["continuation_steps"],
                        eq19_max_m=m, q_form=cfg["q_form"], kernel=cfg["kernel"],
                        series_order=cfg["L"],
                    )
                    res = eigenvalue_series_eq19(s, gamma, scfg_m)
                    rows.append({"lambda": lam, "gamma": gamma, "method": "series_eq19",
                                 "truncation": m, "abs_err": abs(res.value - oracle_e),
                                 "converged": bool(res.converged), "error": None,
                                 "message": None})
    except EigenSeriesError as exc:
        report["convergence"] = {"error": type(exc).__name__, "message": str(exc), "rows": rows}
        exit_code = 2
        _emit(report, args)
        return exit_code

    slopes = {}
    gammas = sorted({r["gamma"] for r in rows if r["method"] == "rs2"})
    for gamma in gammas:
        pts = [(r["lambda"], r["abs_err"]) for r in rows
               if r["method"] == "rs2" and r["gamma"] == gamma and r["abs_err"]]
        if len(pts) >= 2:
            lx = np.log([p[0] for p in pts])
            ly = np.log([p[1] for p in pts])
            slopes[str(gamma)] = float(np.polyfit(lx, ly, 1)[0])
        else:
            slopes[str(gamma)] = None
    report["convergence"] = {
        "lambdas": lambdas, "orders": orders, "rows": rows, "rs2_loglog_slopes": slopes,
    }
    report["timings"] = {"convergence_s": time.perf_counter() - t0}
    _emit(report, args)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "gamma", "method", "truncation", "abs_err", "converged"])
            for r in rows:
                writer.writerow([r["lambda"], r["gamma"], r["method"], r["truncation"],
                                 r["abs_err"], r["converged"]])
    return exit_code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map to the input-error code
        return 0 if exc.code in (0, None) else 1
    handlers = {"spectrum": _cmd_spectrum, "evolve": _cmd_evolve, "convergence": _cmd_convergence}
    try:
        return handlers[args.command](args)
    except (InvalidSpec, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EigenSeriesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())

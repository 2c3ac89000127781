"""Batch experiment runner.

Subcommands: converge-energy, converge-det, chain-map, kas-cohomology, and
identities.  Each parses a flat config, builds backends and kernels, runs the
requested sweep or suite, and writes a CSV report with a JSON sidecar.  Exit
code 0 when every pass rule holds, 1 on any failure, 2 on config errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import forms, kernels
from .config import ConfigError, ExperimentConfig, load_config
from .fixtures import backend_for_sweep_point, build_backend, build_kernel, fixture_function, make_fixture
from .identities import run_all, run_rational_spotcheck
from .kas import TupleCapExceeded, kas_cohomology_dims
from .report import Report


def _schedule(cfg: ExperimentConfig) -> tuple[str, tuple]:
    if cfg.sweep_param is not None:
        return cfg.sweep_param, cfg.sweep_values
    if cfg.kernel is None:
        raise ConfigError("command needs a kernel spec or a sweep")
    params = cfg.kernel.params
    if len(params) != 1:
        raise ConfigError(f"kernel spec must have exactly one parameter, got {params}")
    ((name, value),) = params.items()
    return name, (float(value),)


def _errors_decreasing(errs) -> bool:
    return all(a > b or (a == 0.0 and b == 0.0) for a, b in zip(errs, errs[1:]))


def _map_schedule(cfg: ExperimentConfig, points, fn):
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, points))
    return [fn(pt) for pt in points]


def run_converge_energy(cfg: ExperimentConfig) -> Report:
    """Kernel energies against the backend Dirichlet energy along a schedule."""
    param, values = _schedule(cfg)
    fixtures = cfg.fixtures or ("sin",)
    report = Report("converge-energy", cfg.resolved())
    failures = []
    for fixture in fixtures:
        def point(value):
            t0 = time.perf_counter()
            backend = backend_for_sweep_point(cfg.backend, cfg.kernel.name, param, value, values)
            kernel = build_kernel(cfg.kernel, backend, {param: value})
            f = fixture_function(fixture, backend, cfg.seed)
            nl = kernels.energy_theta(f, kernel)
            loc = backend.dirichlet_energy(f)
            return nl, loc, (time.perf_counter() - t0) * 1e3

        results = _map_schedule(cfg, values, point)
        errs = []
        for value, (nl, loc, ms) in zip(values, results):
            row = report.add_row(f"{fixture}:{param}={value:g}", nl, loc, ms)
            errs.append(row.rel_err)
        if cfg.require_monotone and not _errors_decreasing(errs):
            failures.append(f"{fixture}: errors not strictly decreasing: {errs}")
        if cfg.max_final_rel_err is not None and errs[-1] > cfg.max_final_rel_err:
            failures.append(f"{fixture}: final rel err {errs[-1]:g} > {cfg.max_final_rel_err:g}")
    report.summary = {"pass": not failures, "failures": failures}
    return report


def run_converge_det(cfg: ExperimentConfig) -> Report:
    """Degree-p nonlocal pairings against the local Gram-determinant target."""
    if cfg.p < 1:
        raise ConfigError("converge-det needs p >= 1")
    param, values = _schedule(cfg)
    fixtures = cfg.fixtures or ("sin",)
    report = Report("converge-det", cfg.resolved())
    failures = []
    for fixture in fixtures:
        def point(value):
            t0 = time.perf_counter()
            backend = backend_for_sweep_point(cfg.backend, cfg.kernel.name, param, value, values)
            kernel = build_kernel(cfg.kernel, backend, {param: value})
            F, H = make_fixture(fixture, backend, cfg.p, cfg.seed)
            nl = kernels.nonlocal_inner_total(F, H, [kernel] * cfg.p, cfg.eps)
            loc = forms.form_l2_inner(forms.localize(F), forms.localize(H))
            return nl, loc, (time.perf_counter() - t0) * 1e3

        results = _map_schedule(cfg, values, point)
        errs = []
        for value, (nl, loc, ms) in zip(values, results):
            row = report.add_row(f"{fixture}:{param}={value:g}", nl, loc, ms)
            errs.append(row.rel_err)
        if cfg.require_monotone and not _errors_decreasing(errs):
            failures.append(f"{fixture}: errors not strictly decreasing: {errs}")
        if cfg.max_final_rel_err is not None and errs[-1] > cfg.max_final_rel_err:
            failures.append(f"{fixture}: final rel err {errs[-1]:g} > {cfg.max_final_rel_err:g}")
    if cfg.stagger and len(values) >= 2 and cfg.p >= 2:
        agreement = _staggered_agreement(cfg, param, values, fixtures[0])
        report.summary["stagger"] = agreement
        if agreement["max_rel_disagreement"] > 0.01:
            failures.append(f"staggered schedules disagree by {agreement['max_rel_disagreement']:g}")
    report.summary.update({"pass": not failures, "failures": failures})
    return report


def _staggered_agreement(cfg: ExperimentConfig, param, values, fixture):
    """Refine the kernel slots one step apart, in both orders, and compare.

    The degree-p pairing is symmetric under permuting the kernel slots, so the
    two staggered schedules must agree; this is the finite shadow of the
    iterated-limit order independence.
    """
    worst = 0.0
    pairs = []
    for a, b in zip(values, values[1:]):
        fine = b if abs(b) < abs(a) else a
        backend = backend_for_sweep_point(cfg.backend, cfg.kernel.name, param, fine, values)
        ka = build_kernel(cfg.kernel, backend, {param: a})
        kb = build_kernel(cfg.kernel, backend, {param: b})
        F, H = make_fixture(fixture, backend, cfg.p, cfg.seed)
        slots_ab = [ka, kb] + [kb] * (cfg.p - 2)
        slots_ba = [kb, ka] + [kb] * (cfg.p - 2)
        vab = kernels.nonlocal_inner_total(F, H, slots_ab, cfg.eps)
        vba = kernels.nonlocal_inner_total(F, H, slots_ba, cfg.eps)
        denom = max(abs(vab), abs(vba), 1e-300)
        rel = abs(vab - vba) / denom
        pairs.append({"pair": [a, b], "value_ab": vab, "value_ba": vba, "rel": rel})
        worst = max(worst, rel)
    return {"pairs": pairs, "max_rel_disagreement": worst}


def run_chain_map(cfg: ExperimentConfig) -> Report:
    """Chain-map residuals per fixture, plus cancelling-pair well-definedness."""
    backend = build_backend(cfg.backend)
    fixtures = cfg.fixtures or ("sin",)
    report = Report("chain-map", cfg.resolved())
    failures = []
    for fixture in fixtures:
        t0 = time.perf_counter()
        F, _ = make_fixture(fixture, backend, cfg.p, cfg.seed)
        res = forms.chain_map_residual(F)
        report.add_row(f"residual:{fixture}", res, 0.0, (time.perf_counter() - t0) * 1e3)
        if res > 1e-12:
            failures.append(f"{fixture}: chain-map residual {res:g} > 1e-12")
    if cfg.p == 2:
        t0 = time.perf_counter()
        Fnull, _ = make_fixture("cancel-pair", backend, 2, cfg.seed)
        norm = forms.form_l2_norm(forms.localize(Fnull))
        report.add_row("cancel-pair-form-norm", norm, 0.0, (time.perf_counter() - t0) * 1e3)
        if norm != 0.0:
            failures.append(f"cancelling pair has nonzero form norm {norm:g}")
        if cfg.kernel is not None:
            param, values = _schedule(cfg)
            for value in values:
                t0 = time.perf_counter()
                pt_backend = backend_for_sweep_point(cfg.backend, cfg.kernel.name, param, value, values)
                kernel = build_kernel(cfg.kernel, pt_backend, {param: value})
                Fn, _ = make_fixture("cancel-pair", pt_backend, 2, cfg.seed)
                nl = kernels.nonlocal_inner_total(Fn, Fn, [kernel] * 2, cfg.eps)
                report.add_row(
                    f"cancel-pair-nonlocal:{param}={value:g}",
                    nl,
                    0.0,
                    (time.perf_counter() - t0) * 1e3,
                )
    report.summary = {"pass": not failures, "failures": failures}
    return report


def run_kas_cohomology(cfg: ExperimentConfig) -> Report:
    """Cohomology dimensions across an eps schedule."""
    backend = build_backend(cfg.backend)
    if cfg.sweep_param is not None and cfg.sweep_param != "eps":
        raise ConfigError("kas-cohomology sweeps the parameter `eps`")
    eps_values = cfg.sweep_values if cfg.sweep_param else (cfg.eps,)
    report = Report("kas-cohomology", cfg.resolved())
    failures = []
    dims_by_eps = {}
    for eps in eps_values:
        t0 = time.perf_counter()
        try:
            dims = kas_cohomology_dims(backend, eps, cfg.p, cap=cfg.tuple_cap)
        except TupleCapExceeded as exc:
            failures.append(str(exc))
            break
        ms = (time.perf_counter() - t0) * 1e3
        dims_by_eps[f"{eps:g}"] = dims
        for k, dim in enumerate(dims):
            report.add_row(f"eps={eps:g}:H{k}", dim, dim, ms / len(dims))
    report.summary = {"pass": not failures, "failures": failures, "dims": dims_by_eps}
    return report


def run_identities(cfg: ExperimentConfig) -> Report:
    """All exact identity suites on seeded random fixtures."""
    report = Report("identities", cfg.resolved())
    failures = []
    for result in run_all(fixtures=cfg.identity_fixtures, seed=cfg.seed):
        t0 = time.perf_counter()
        report.add_row(result.name, result.max_residual, 0.0, (time.perf_counter() - t0) * 1e3)
        if result.max_residual > 1e-12:
            failures.append(f"{result.name}: residual {result.max_residual:g}")
    rational_ok = run_rational_spotcheck(seed=cfg.seed)
    report.add_row("rational-spotcheck", 0.0 if rational_ok else 1.0, 0.0, 0.0)
    if not rational_ok:
        failures.append("rational spot check failed")
    report.summary = {"pass": not failures, "failures": failures}
    return report


COMMANDS = {
    "converge-energy": run_converge_energy,
    "converge-det": run_converge_det,
    "chain-map": run_chain_map,
    "kas-cohomology": run_kas_cohomology,
    "identities": run_identities,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kaslocal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="experiment config file")
        cmd.add_argument("--out", default=None, help="output base path (.csv/.json)")
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--threads", type=int, default=None, help="sweep-point parallelism")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        cfg.validate()
        report = COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_base = args.out or cfg.out or args.command.replace("-", "_")
    csv_path, json_path = report.write(out_base)
    status = "PASS" if report.passed else "FAIL"
    print(f"{args.command}: {status} ({len(report.rows)} rows) -> {csv_path}, {json_path}")
    for failure in report.summary.get("failures", []):
        print(f"  failure: {failure}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())

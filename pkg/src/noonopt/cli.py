"""Command-line entry point.

Subcommands: validate | scan | train | qfi | wigner | multistart | report.
Exit codes: 0 success, 1 validation/run failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import circuit, fock, metrology, optimizer, reporting, wigner
from . import dualnum as dn

LEAKAGE_TOL = 1e-3
TWO_PATH_TOL = 1e-6
# amplitude-normalized peak CFI over N^2 at the standard working point
NORM_RATIO_ANCHORS = {2: {(1, 1): 0.999, (2, 0): 0.962}}
NORM_RATIO_TOL = 0.02
NORM_RATIO_SANITY = (0.90, 1.05)


def _check(report: list, name: str, ok: bool, detail: str) -> bool:
    report.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def validate_checks(n: int, lite: bool = False) -> tuple[bool, list]:
    """Engine checks at the standard working point for one N."""
    params, c = circuit.afek_init(n)
    report = []
    ok = True

    probe = circuit.prepare_probe(params, c)
    leak = 1.0 - probe.norm_squared()
    ok &= _check(report, "source leakage", leak < LEAKAGE_TOL,
                 f"1 - |probe|^2 = {leak:.3e} (tol {LEAKAGE_TOL})")

    gamma = float(np.exp(params.log_gamma))
    alpha = float(np.sqrt(gamma * params.r))
    pre = fock.tensor_product(
        fock.coherent_amplitudes(alpha, c),
        fock.squeezed_vacuum_amplitudes(params.r, c),
        c,
    )
    chi = params.phi1 + circuit.BS1_PHASE_OFFSET
    blocked = fock.beamsplitter(pre, params.theta1, chi)
    dense = fock.beamsplitter_dense(pre, params.theta1, chi)
    diff = np.abs(dn.value(blocked.amps) - dense.amps)
    two_path = float(diff.max() / np.abs(dense.amps).max())
    ok &= _check(report, "two-path beamsplitter", two_path < TWO_PATH_TOL,
                 f"max normalized error {two_path:.3e} (tol {TWO_PATH_TOL})")

    scans = {}
    for pattern in circuit.pattern_set(n):
        scan = metrology.scan_fringe(params, pattern, c)
        scans[pattern] = scan
        dominant, ratio = metrology.fft_fringe_check(scan)
        good = dominant == n and (n != 2 or ratio < 0.01)
        ok &= _check(report, f"fringe FFT {pattern}", good,
                     f"dominant {dominant}/{n}, harmonic ratio {ratio:.2e}")

    if not lite:
        anchors = NORM_RATIO_ANCHORS.get(n, {})
        for pattern, scan in scans.items():
            fn = metrology.f_peak_norm(scan)
            if fn == "n/a":
                ok &= _check(report, f"norm-CFI ratio {pattern}", True,
                             "flat fringe, flagged n/a")
                continue
            ratio = fn / n**2
            if pattern in anchors:
                target = anchors[pattern]
                good = abs(ratio - target) <= NORM_RATIO_TOL
                detail = f"F_norm/N^2 = {ratio:.4f}, expected {target} +/- {NORM_RATIO_TOL}"
            else:
                good = NORM_RATIO_SANITY[0] <= ratio <= NORM_RATIO_SANITY[1]
                detail = f"F_norm/N^2 = {ratio:.4f}, sanity band {NORM_RATIO_SANITY}"
            ok &= _check(report, f"norm-CFI ratio {pattern}", good, detail)

    return bool(ok), report


def fringe_table(params, patterns, c: int, m: int):
    """(phis, probs, cfis) dicts for CSV output."""
    phis = metrology.phase_grid(m)
    probs = circuit.pattern_probabilities(params, patterns, phis, c)
    cfis = {p: metrology._cfi_curve(phis, probs[p]) for p in patterns}
    return phis, probs, cfis


def cmd_validate(args) -> int:
    ok, report = validate_checks(args.n)
    print(f"validation, N={args.n}")
    for line in report:
        print("  " + line)
    return 0 if ok else 1


def cmd_scan(args) -> int:
    cfg = reporting.RunConfig.from_file(args.config, args.n)
    params, c = circuit.afek_init(cfg.n_total)
    c = cfg.cutoff or c
    patterns = list(circuit.pattern_set(cfg.n_total))
    phis, probs, cfis = fringe_table(params, patterns, c, cfg.scan_points)
    out = Path(args.out or f"runs/n{cfg.n_total}")
    out.mkdir(parents=True, exist_ok=True)
    reporting.write_fringes_csv(out / "fringes_afek.csv", phis, probs, cfis, patterns)
    metrics = optimizer.ground_truth_metrics(params, cfg.n_total, c)
    reporting.json_write(out / "scan.json", {
        "run": {"n_total": cfg.n_total, "cutoff": c},
        "metrics": {reporting.pattern_key(p): metrics[p] for p in patterns},
    })
    for p in patterns:
        m = metrics[p]
        print(f"N={cfg.n_total} {p}: f_peak_raw={m['f_peak_raw']:.4f} "
              f"f_peak_norm={m['f_peak_norm']} p_max={m['p_max']:.4f}")
    print(f"wrote {out / 'fringes_afek.csv'}")
    return 0


def cmd_train(args) -> int:
    cfg = reporting.RunConfig.from_file(args.config, args.n)
    if args.seed is not None:
        cfg.seed = args.seed
    n = cfg.n_total
    c = cfg.resolved_cutoff()

    ok, report = validate_checks(n, lite=True)
    for line in report:
        print("  " + line)
    if not ok:
        print("engine validation failed; not training")
        return 1

    weights = optimizer.calibrate_weights(n, c)
    trace, final = optimizer.train(n, cfg.adam, c, weights=weights)
    params, _ = circuit.afek_init(n)
    patterns = list(circuit.pattern_set(n))

    bundle = reporting.ResultsBundle(
        config=cfg,
        patterns=patterns,
        afek_params=params.to_vector(),
        trained_params=final.to_vector(),
        afek_metrics=trace.init_metrics,
        trained_metrics={p: trace.final_metrics[p] for p in patterns},
        efficiency_afek=vars(metrology.efficiency_metrics(params, n, c)),
        efficiency_trained=vars(metrology.efficiency_metrics(final, n, c)),
        weights=weights.weights,
        losses=trace.losses,
        trace_params=trace.params,
        fringes_afek=fringe_table(params, patterns, c, cfg.scan_points),
        fringes_trained=fringe_table(final, patterns, c, cfg.scan_points),
    )
    out = Path(args.out or f"runs/n{n}")
    bundle.save(out)
    for key, delta in bundle.deltas().items():
        parts = ", ".join(f"{k} {v:+.1f}%" for k, v in delta.items())
        print(f"N={n} ({key}): {parts}")
    print(f"wrote {out / 'summary.json'}")
    return 0


def cmd_qfi(args) -> int:
    ns = [args.n] if args.n else [2, 3, 4, 5]
    for n in ns:
        params, c = circuit.afek_init(n)
        q = float(dn.value(metrology.qfi_probe(params, c)))
        line = f"N={n}: qfi_afek={q:.6f}"
        if args.out and (Path(args.out) / "summary.json").exists():
            s = reporting.json_read(Path(args.out) / "summary.json")
            if s["run"]["n_total"] == n:
                trained = circuit.CircuitParams.from_vector(
                    [s["params"]["trained"][k] for k in circuit.PARAM_NAMES])
                qt = float(dn.value(metrology.qfi_probe(trained, c)))
                line += f" qfi_trained={qt:.6f}"
        print(line)
    return 0


def cmd_wigner(args) -> int:
    n = args.n or 2
    params, c = circuit.afek_init(n)
    if args.which == "trained":
        summary = Path(args.out or f"runs/n{n}") / "summary.json"
        if not summary.exists():
            print(f"no trained parameters at {summary}; run train first")
            return 1
        s = reporting.json_read(summary)
        params = circuit.CircuitParams.from_vector(
            [s["params"]["trained"][k] for k in circuit.PARAM_NAMES])

    # kernel sanity: vacuum value at the origin
    vac = np.zeros((4, 4), dtype=complex)
    vac[0, 0] = 1.0
    w0 = wigner.wigner(vac, np.array([0.0]), np.array([0.0])).values[0, 0]
    if abs(w0 - 1.0 / (2 * np.pi)) > 1e-8:
        print(f"vacuum kernel check failed: W(0,0) = {w0}")
        return 1

    probe = circuit.prepare_probe(params, c)
    rho = fock.partial_trace(probe, keep=args.mode)
    cfg = reporting.RunConfig.from_file(args.config, n)
    result, grid = wigner.negativity_volume(rho, cfg.wigner_extent, cfg.wigner_points)
    out = Path(args.out or f"runs/n{n}")
    out.mkdir(parents=True, exist_ok=True)
    stem = f"wigner_{args.which}_mode{args.mode}"
    reporting.write_wigner_csv(out / f"{stem}.csv", grid)
    reporting.json_write(out / f"{stem}.json", {
        "n_total": n, "which": args.which, "mode": args.mode,
        "negativity": result.volume, "extent": result.extent,
        "points": result.points, "integral": grid.integral(),
        "trace": float(np.trace(rho).real),
    })
    print(f"N={n} {args.which} mode {args.mode}: negativity={result.volume:.6e} "
          f"(extent {result.extent}, {result.points} pts)")
    print(f"wrote {out / (stem + '.csv')}")
    return 0


def cmd_multistart(args) -> int:
    n = args.n or 2
    cfg = reporting.RunConfig.from_file(args.config, n)
    seed = args.seed if args.seed is not None else cfg.seed
    c = cfg.resolved_cutoff()
    weights = optimizer.calibrate_weights(n, c)
    trace, _ = optimizer.train(n, cfg.adam, c, weights=weights)
    lead = circuit.pattern_set(n)[0]
    reference = trace.final_metrics[lead]["f_peak_raw"]
    runs = optimizer.multi_start(n, args.seeds, cfg.adam, seed=seed, c=c)
    records = [{"seed": s, "f_peak_raw": v, "relative": v / reference}
               for s, v in runs]
    within = [abs(r["relative"] - 1.0) <= 0.15 for r in records]
    out = Path(args.out or f"runs/n{n}")
    out.mkdir(parents=True, exist_ok=True)
    reporting.json_write(out / "multistart.json", {
        "n_total": n, "base_seed": seed, "pattern": reporting.pattern_key(lead),
        "afek_final": reference, "runs": records,
        "fraction_within_15pct": (sum(within) / len(within)) if within else None,
    })
    print(f"N={n} multistart, {args.seeds} seeds, reference {reference:.4f}")
    for rec in records:
        print(f"  seed {rec['seed']}: {rec['f_peak_raw']:.4f} "
              f"({100 * (rec['relative'] - 1):+.1f}%)")
    if within:
        print(f"within 15%: {sum(within)}/{len(within)}")
    return 0


def cmd_report(args) -> int:
    out = Path(args.out or f"runs/n{args.n or 2}")
    summary_path = out / "summary.json"
    if not summary_path.exists():
        print(f"no run summary at {summary_path}; run train first")
        return 1
    summary = reporting.json_read(summary_path)
    rep = reporting.feasibility_report(summary, args.f_rep, args.n_c, args.eta_loss)
    reporting.json_write(out / "report.json", rep)
    n = summary["run"]["n_total"]
    print(f"feasibility, N={n} (f_rep={args.f_rep:g} Hz, n_c={args.n_c:g} events, "
          f"eta_loss={args.eta_loss:g})")
    t = rep["total"]
    print(f"  total P_sel: {t['afek_seconds']:.1f} s -> {t['trained_seconds']:.1f} s "
          f"(speedup {t['speedup']:.1f}x)")
    for key, times in rep["per_pattern"].items():
        print(f"  pattern {key}: {times['afek_seconds']:.1f} s -> "
              f"{times['trained_seconds']:.1f} s")
    print(f"  events-per-pulse ratio {rep['events_rate_ratio']:.1f}, "
          f"phase-uncertainty improvement {rep['phase_uncertainty_improvement']:.2f}x")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noonopt",
        description="Differentiable Fock-space simulator and CFI optimizer "
                    "for adaptive NOON-state interferometry.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, choices=[2, 3, 4, 5], default=None,
                        help="total photon number (default 2, or all for qfi)")
    common.add_argument("--out", default=None,
                        help="run directory (default runs/nN)")
    common.add_argument("--config", default=None,
                        help="JSON config overriding protocol defaults "
                             "(M=400, K=8, beta=50, eps-frac=0.05, Adam "
                             "lr=0.02/b1=0.9/b2=0.999/eps=1e-8/100 steps)")
    common.add_argument("--seed", type=int, default=None,
                        help="base random seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="engine checks at the standard working point")
    p.set_defaults(func=cmd_validate, n=2)

    p = sub.add_parser("scan", parents=[common],
                       help="fringe scan and ground-truth CFI at the working point")
    p.set_defaults(func=cmd_scan, n=2)

    p = sub.add_parser("train", parents=[common],
                       help="full calibrate/train/evaluate pipeline")
    p.set_defaults(func=cmd_train, n=2)

    p = sub.add_parser("qfi", parents=[common],
                       help="quantum Fisher information of the probe")
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("wigner", parents=[common],
                       help="probe-marginal Wigner grid and negativity")
    p.add_argument("--which", choices=["afek", "trained"], default="afek")
    p.add_argument("--mode", type=int, choices=[0, 1], default=0)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("multistart", parents=[common],
                       help="random-initialization robustness study")
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_multistart)

    p = sub.add_parser("report", parents=[common],
                       help="acquisition-time feasibility report from a run")
    p.add_argument("--f-rep", type=float, default=1e4, help="pulse rate in Hz")
    p.add_argument("--n-c", type=float, default=1e4,
                   help="required selected-event count")
    p.add_argument("--eta-loss", type=float, default=0.0,
                   help="per-photon loss probability")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

``hanle-obe run`` executes a scan from a configuration file or a bundled
scenario and writes CSV; ``hanle-obe presets list`` shows what ships in the
package; ``hanle-obe check`` runs a fast self-test of the physics anchors.
Exit codes: 0 ok, 1 configuration error, 2 solver error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .angular import DomainError
from .config import (
    ConfigError,
    available_presets,
    load_preset_config,
    parse_config,
    run_scenario,
    write_csv,
)
from .obe import SolverError

_PRESET_NOTES = {
    "fig2_low": "Rb-87 2->3, linear pol., low intensity: narrow bright peak",
    "fig2_high": "Rb-87 2->3, linear pol., saturated: no narrow peak",
    "fig3_low": "Rb-85 3->4, linear pol., low intensity, absorption signal",
    "fig3_high": "Rb-85 3->4, linear pol., saturated, absorption signal",
    "fig4": "Rb-87 open 1->2, time-integrated fluorescence, flat around B=0",
    "fig5_low": "Cs 4->5, linear pol., low intensity: narrow bright peak",
    "fig5_high": "Cs 4->5, linear pol., beyond low saturation: reversed shape",
}


def _cmd_run(args) -> int:
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
            return 3
        cfg = parse_config(text)
    else:
        cfg = load_preset_config(args.preset)
    scan = run_scenario(cfg, workers=args.threads)
    if args.out is None:
        _print_csv(scan)
        return 0
    write_csv(scan, args.out)
    print(f"wrote {scan.npoints} points to {args.out}", file=sys.stderr)
    return 0


def _print_csv(scan) -> None:
    import io

    from .config import _fmt, _scan_columns

    cfg = scan.meta.config
    buf = io.StringIO()
    buf.write("# hanle-obe lineshape scan\n")
    for line in cfg.to_text().splitlines():
        buf.write("# " + line + "\n")
    headers, columns = _scan_columns(scan, cfg)
    buf.write(",".join(headers) + "\n")
    for row in zip(*columns):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    sys.stdout.write(buf.getvalue())


def _cmd_presets(args) -> int:
    if args.action == "list":
        for name in available_presets():
            print(f"{name:12s} {_PRESET_NOTES.get(name, '')}".rstrip())
    return 0


def _cmd_check(_args) -> int:
    """Fast physics self-test (a subset of the package's acceptance suite)."""
    from . import analytic
    from .obe import build_liouvillian, rotate_basis, steady_state
    from .system import (
        FieldConfig,
        LevelSpec,
        Polarization,
        build_system,
        get_preset,
        rabi_for_saturation,
    )

    failures = 0

    def report(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        failures += 0 if ok else 1

    # two-level reduction
    tl = build_system(LevelSpec(0, 0, 0, 0.0), LevelSpec(1, 0, 1, 1.0))
    om, det = 0.3, 0.4
    rho = steady_state(build_liouvillian(tl, FieldConfig(Polarization.SIGMA_PLUS, om, det), 0.0))
    expected = (om**2 / 4) / (det**2 + 0.25 + om**2 / 2)
    err = abs(rho.excited_population - expected)
    report("two-level reduction", err < 1e-10, f"|err| = {err:.1e}")

    # low-saturation anchors on the closed 1->2 model system
    model = get_preset("model_1_2_closed")
    fld = FieldConfig(Polarization.LINEAR_X, rabi_for_saturation(1e-3), 0.0)
    rho = steady_state(build_liouvillian(model, fld, 0.0))
    c_r = rho.edge_ground_coherence.real
    report("ground coherence 5/34", abs(c_r - 5 / 34) / (5 / 34) < 0.02, f"C_r = {c_r:.6f}")
    pops = rotate_basis(rho, model, np.pi / 2).ground_populations
    err = np.max(np.abs(pops - np.array([4 / 17, 9 / 17, 4 / 17])))
    report("natural-basis populations", err < 1e-3, f"max err = {err:.1e}")

    # saturated fluorescence
    rb = get_preset("rb87_2_3")
    rho = steady_state(build_liouvillian(rb, FieldConfig(Polarization.LINEAR_X, 10.0, 0.0), 0.0))
    report(
        "saturated fluorescence ~ 1/2",
        0.49 <= rho.excited_population <= 0.50,
        f"Pi_e = {rho.excited_population:.4f}",
    )

    # analytic rate equations: steady state nulls the derivatives
    params = analytic.PumpParams.from_drive(0.2, 0.3, 0.05)
    rhs = analytic.rate_rhs(analytic.steady_state_ground(params), params)
    report("analytic steady state", max(abs(v) for v in rhs) < 1e-12)

    print("self-test:", "OK" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hanle-obe",
        description="Hanle lineshape scans from the optical Bloch equations "
        "of one F_g -> F_e transition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scan and emit CSV")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="scenario configuration file")
    source.add_argument(
        "--preset", help="bundled scenario name (see 'presets list')"
    )
    run.add_argument("--out", help="output CSV path (default: stdout)")
    run.add_argument("--threads", type=int, default=None, help="parallel scan workers")
    run.set_defaults(func=_cmd_run)

    presets = sub.add_parser("presets", help="inspect bundled scenarios")
    presets.add_argument("action", choices=["list"])
    presets.set_defaults(func=_cmd_presets)

    check = sub.add_parser("check", help="fast physics self-test")
    check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())

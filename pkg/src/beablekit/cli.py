"""Command-line scenario runner.

Subcommands reproduce the package's toy-model results and audit model files:

* ``kent-toy``   regime table (JSON) and beable field (CSV) for the
                 single-system superposition toy;
* ``kent-bell``  micro-level hidden-variable model of the two-wing toy,
                 its locality audit, and the observable-level OI residual;
* ``singlet``    orthodox single-λ singlet model, audit, and CHSH;
* ``pilot-wave`` equilibrium-ensemble statistics of the guidance toy;
* ``audit``      locality audit of a model JSON file;
* ``bell-bound`` CHSH over a population of random compliant models.

All output is deterministic given flags and seed: reruns are byte-identical.
Exit codes: 0 success, 1 an audited condition failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import beables, locality, models, toyqm

_CSV_HINT = "csv output is only available for kent-toy (the beable field)"


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _toy_config(args: argparse.Namespace, bell: bool) -> toyqm.ToyConfig:
    extra = {}
    if bell:
        extra = {"x3": args.x3, "x4": args.x4, "t_right": args.t_right}
    return toyqm.ToyConfig(
        a=args.a, b=args.b, x1=args.x1, x2=args.x2, t1=args.t1, T=args.T,
        mass=args.mass, **extra,
    )


def _cmd_kent_toy(args: argparse.Namespace) -> int:
    config = _toy_config(args, bell=False)
    bs = toyqm.build_single_system(config)
    if args.world == "sample":
        fc = toyqm.sample_world(bs, args.seed)
    else:
        fc = toyqm.enumerate_worlds(bs)[0 if args.world == "first" else 1]
    table = beables.regime_table(config, fc.branch_index, dx=args.tol, tol=args.tol)

    field_csv = None
    if args.format == "csv" or args.field_out is not None:
        grid = beables.GridSpec(
            t_min=args.grid_t_min if args.grid_t_min is not None else 0.5,
            t_max=args.grid_t_max if args.grid_t_max is not None else config.T - 0.5,
            nt=args.grid_nt,
            x_min=args.grid_x_min if args.grid_x_min is not None else config.x1 - 10.0,
            x_max=args.grid_x_max if args.grid_x_max is not None else config.x2 + 10.0,
            nx=args.grid_nx,
        )
        field_csv = beables.beable_field(bs, fc, grid, dx=args.tol, tol=args.tol).to_csv()
    if args.field_out is not None:
        _emit(field_csv, args.field_out)

    if args.format == "csv":
        _emit(field_csv, args.out)
        return 0
    payload = {
        "scenario": "kent-toy",
        "config": config.to_dict(),
        "world": {
            "selection": args.world,
            "seed": args.seed if args.world == "sample" else None,
            "branch_index": fc.branch_index,
            "probability": fc.probability,
        },
        "regime_table": table.to_dict(),
    }
    _emit(_dump(payload), args.out)
    return 0


def _cmd_kent_bell(args: argparse.Namespace) -> int:
    config = _toy_config(args, bell=True)
    bs = toyqm.build_bell(config)
    model = locality.kentian_micro_model(bs)
    if args.model_out is not None:
        _emit(model.to_json() + "\n", args.model_out)
    report = locality.audit_model(model, tol=args.tol)
    stats = locality.observable_stats(model)
    payload = {
        "scenario": "kent-bell",
        "config": config.to_dict(),
        "measure": [float(w) for w in model.measures[0, 0]],
        "audit": report.to_dict(),
        "observable": stats.to_dict(),
        "observable_oi_residual": locality.kentian_observable_oi_residual(bs),
    }
    _emit(_dump(payload), args.out)
    return 0


def _cmd_singlet(args: argparse.Namespace) -> int:
    model = models.singlet_hv_model(args.a1, args.a2, args.b1, args.b2)
    if args.model_out is not None:
        _emit(model.to_json() + "\n", args.model_out)
    report = locality.audit_model(model, tol=args.tol)
    stats = locality.observable_stats(model)
    payload = {
        "scenario": "singlet",
        "angles": {"a1": args.a1, "a2": args.a2, "b1": args.b1, "b2": args.b2},
        "audit": report.to_dict(),
        "observable": stats.to_dict(),
    }
    _emit(_dump(payload), args.out)
    return 0


def _cmd_pilot_wave(args: argparse.Namespace) -> int:
    cfg = models.PWConfig(
        packet_width=args.sigma,
        separation_speed=args.speed,
        wavenumber=args.wavenumber,
        dt=args.dt,
        t_max=args.t_max,
        t_impulse_left=args.impulse_left,
        t_impulse_right=args.impulse_right,
    )
    if args.model_out is not None:
        model = models.pilot_wave_hv_model(
            cfg, args.grid_a1, args.grid_a2, args.grid_b1, args.grid_b2,
            grid_n=args.grid_n,
        )
        _emit(model.to_json() + "\n", args.model_out)
    stats = models.pw_equilibrium_stats(cfg, args.a, args.b, args.n_samples, args.seed)
    payload = {
        "scenario": "pilot-wave",
        "config": {
            "packet_width": cfg.packet_width,
            "separation_speed": cfg.separation_speed,
            "wavenumber": cfg.wavenumber,
            "dt": cfg.dt,
            "t_max": cfg.t_max,
            "t_impulse_left": cfg.t_impulse_left,
            "t_impulse_right": cfg.t_impulse_right,
        },
        "seed": args.seed,
        "born_correlator": models.born_correlator(models.singlet(), args.a, args.b),
        "stats": stats.to_dict(),
    }
    _emit(_dump(payload), args.out)
    return 0


def _cmd_audit(args: argparse.Namespace) -> int:
    with open(args.model) as fh:
        text = fh.read()
    model = locality.FiniteHVModel.from_json(text)
    report = locality.audit_model(model, tol=args.tol)
    stats = locality.observable_stats(model)
    payload = {
        "scenario": "audit",
        "model": args.model,
        "audit": report.to_dict(),
        "observable": stats.to_dict(),
    }
    _emit(_dump(payload), args.out)
    return 0 if report.all_ok else 1


def _cmd_bell_bound(args: argparse.Namespace) -> int:
    if args.n_models < 1:
        raise ValueError("n-models must be >= 1")
    values = []
    for i in range(args.n_models):
        model = locality.random_compliant_model(args.seed + i, n_lambda=args.n_lambda)
        values.append(float(locality.observable_stats(model).chsh))
    bound = 2.0 + 1e-9
    passed = max(values) <= bound
    payload = {
        "scenario": "bell-bound",
        "n_models": args.n_models,
        "seed": args.seed,
        "n_lambda": args.n_lambda,
        "bound": bound,
        "max_chsh": max(values),
        "chsh_values": values,
        "pass": passed,
    }
    _emit(_dump(payload), args.out)
    return 0 if passed else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--tol", type=float, default=1e-9, help="audit/evaluation tolerance")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="payload format (csv only carries the kent-toy beable field)")


def _add_toy_geometry(p: argparse.ArgumentParser, bell: bool) -> None:
    p.add_argument("--a", type=float, default=0.6, help="first-branch amplitude")
    p.add_argument("--b", type=float, default=0.8, help="second-branch amplitude")
    p.add_argument("--x1", type=float, default=0.0)
    p.add_argument("--x2", type=float, default=4.0)
    p.add_argument("--t1", type=float, default=5.0)
    p.add_argument("--T", type=float, default=300.0 if bell else 100.0,
                   help="final-surface time")
    p.add_argument("--mass", type=float, default=1.0)
    if bell:
        p.add_argument("--x3", type=float, default=100.0)
        p.add_argument("--x4", type=float, default=104.0)
        p.add_argument("--t-right", dest="t_right", type=float, default=None,
                       help="right-wing measurement time (default: t1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beablekit",
        description="Toy-model scenarios and locality audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kent-toy", help="single-system beable regime table and field")
    _add_toy_geometry(p, bell=False)
    p.add_argument("--world", choices=("first", "second", "sample"), default="first",
                   help="which outcome's final condition to select")
    p.add_argument("--seed", type=int, default=0, help="seed for --world sample")
    p.add_argument("--field-out", default=None, help="also write the field CSV here")
    p.add_argument("--grid-t-min", type=float, default=None)
    p.add_argument("--grid-t-max", type=float, default=None)
    p.add_argument("--grid-nt", type=int, default=50)
    p.add_argument("--grid-x-min", type=float, default=None)
    p.add_argument("--grid-x-max", type=float, default=None)
    p.add_argument("--grid-nx", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=_cmd_kent_toy)

    p = sub.add_parser("kent-bell", help="two-wing micro model and its audit")
    _add_toy_geometry(p, bell=True)
    p.add_argument("--model-out", default=None, help="write the model JSON here")
    _add_common(p)
    p.set_defaults(func=_cmd_kent_bell)

    p = sub.add_parser("singlet", help="orthodox singlet model audit and CHSH")
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--a2", type=float, default=math.pi / 2.0)
    p.add_argument("--b1", type=float, default=math.pi / 4.0)
    p.add_argument("--b2", type=float, default=3.0 * math.pi / 4.0)
    p.add_argument("--model-out", default=None, help="write the model JSON here")
    _add_common(p)
    p.set_defaults(func=_cmd_singlet)

    p = sub.add_parser("pilot-wave", help="guidance-toy equilibrium statistics")
    p.add_argument("--a", type=float, default=0.0, help="left setting")
    p.add_argument("--b", type=float, default=math.pi / 4.0, help="right setting")
    p.add_argument("--n-samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0, help="packet width")
    p.add_argument("--speed", type=float, default=1.0, help="half-packet drift speed")
    p.add_argument("--wavenumber", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    p.add_argument("--impulse-left", type=float, default=0.0)
    p.add_argument("--impulse-right", type=float, default=0.0)
    p.add_argument("--model-out", default=None,
                   help="write a configuration-grid hidden-variable model here")
    p.add_argument("--grid-n", type=int, default=12,
                   help="grid size per axis for --model-out")
    p.add_argument("--grid-a1", type=float, default=0.0,
                   help="first left setting for --model-out tables")
    p.add_argument("--grid-a2", type=float, default=math.pi / 2.0,
                   help="second left setting for --model-out tables")
    p.add_argument("--grid-b1", type=float, default=math.pi / 4.0,
                   help="first right setting for --model-out tables")
    p.add_argument("--grid-b2", type=float, default=3.0 * math.pi / 4.0,
                   help="second right setting for --model-out tables")
    _add_common(p)
    p.set_defaults(func=_cmd_pilot_wave)

    p = sub.add_parser("audit", help="audit a model JSON file")
    p.add_argument("model", help="path to a model JSON file")
    _add_common(p)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("bell-bound", help="CHSH over random compliant models")
    p.add_argument("--n-models", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-lambda", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=_cmd_bell_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "kent-toy" and getattr(args, "format", "json") == "csv":
        print(f"error: {_CSV_HINT}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed model JSON: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

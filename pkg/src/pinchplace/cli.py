"""Command-line front end.

Exit codes: 0 success, 1 computation or validation failure, 2 usage error.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .baseline import fixed_rate_noma, fixed_rate_tdma
from .config import (
    load_config,
    load_users,
    parse_frequency,
    parse_point,
    parse_power_dbm,
    parse_power_w,
    parse_users,
)
from .exceptions import PinchingError
from .experiments import SCHEMES, ScenarioConfig, run_fig2, run_fig3, run_power_sweep, write_table
from .model import ServiceArea, SystemParams
from .noma import place_noma, sum_rate_noma
from .oma_multi import place_multi, sum_rate_tdma_multi
from .oma_single import place_single, sum_rate_tdma_single
from .oracles import run_validate


def _typed(fn, what: str):
    def convert(text: str):
        try:
            return fn(text)
        except (ValueError, TypeError) as exc:
            raise argparse.ArgumentTypeError(f"invalid {what} {text!r}: {exc}")

    convert.__name__ = what
    return convert


def _list_of(fn, what: str):
    return _typed(lambda s: tuple(fn(p.strip()) for p in s.split(",") if p.strip()), what)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError("must be >= 1")
    return value


def _add_system_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system")
    g.add_argument("--fc", type=_typed(parse_frequency, "frequency"),
                   help="carrier frequency, e.g. 28e9 or 28GHz (default 28 GHz)")
    g.add_argument("--sigma2", type=_typed(parse_power_w, "power"),
                   help="noise power, e.g. -90dBm or 1e-12 (watts); default -90 dBm")
    g.add_argument("--neff", type=_typed(float, "refractive index"),
                   help="effective refractive index of the waveguide (default 1.4)")
    g.add_argument("--height", type=_typed(float, "height"),
                   help="waveguide height d in meters (default 3)")
    g.add_argument("--lx", type=_typed(float, "length"), help="area half length along x")
    g.add_argument("--ly", type=_typed(float, "length"), help="area half length along y")


def _add_user_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--users", type=_typed(parse_users, "user list"),
                   help='users as "x,y;x,y;..." in meters')
    g.add_argument("--users-file", help="file with one x,y pair per line")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="scenario file (key = value lines)")
    p.add_argument("--seed", type=_typed(lambda s: int(s, 0), "seed"))
    p.add_argument("--trials", type=_typed(_positive_int, "trial count"))
    p.add_argument("--users-count", dest="user_count", type=_typed(_positive_int, "user count"))
    p.add_argument("--target-rate", type=_typed(float, "rate"), help="NOMA minimum rate R_t")
    p.add_argument("--jobs", type=_typed(_positive_int, "job count"), help="worker processes")
    p.add_argument("--out", help="CSV destination (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchplace",
        description="Closed-form pinching-antenna placement and sum-rate simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("place-single", help="antenna position for each TDMA user")
    _add_user_flags(p)
    _add_system_flags(p)

    p = sub.add_parser("place-multi", help="phase-aligned positions of N antennas per user")
    _add_user_flags(p)
    p.add_argument("--antennas", "-N", type=_typed(_positive_int, "antenna count"), required=True)
    _add_system_flags(p)

    p = sub.add_parser("place-noma", help="single NOMA antenna position (centroid)")
    _add_user_flags(p)
    _add_system_flags(p)

    p = sub.add_parser("rate", help="sum rate of one scheme for a given user set")
    _add_user_flags(p)
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--power", type=_typed(parse_power_w, "power"), required=True,
                   help="transmit power, e.g. 30dBm or 1 (watts)")
    p.add_argument("--antennas", "-N", type=_typed(_positive_int, "antenna count"), default=1)
    p.add_argument("--target-rate", type=_typed(float, "rate"), default=1.0)
    _add_system_flags(p)

    p = sub.add_parser("fig2", help="sum rate vs transmit power, one antenna")
    _add_run_flags(p)
    p.add_argument("--powers", type=_list_of(parse_power_dbm, "power list"),
                   help="comma-separated sweep in dBm")
    _add_system_flags(p)

    p = sub.add_parser("fig3", help="sum rate vs square area size, N antennas")
    _add_run_flags(p)
    p.add_argument("--antenna-counts", type=_list_of(_positive_int, "antenna list"))
    p.add_argument("--half-lengths", type=_list_of(float, "length list"),
                   help="comma-separated area half lengths in meters")
    p.add_argument("--power", type=_typed(parse_power_dbm, "power"),
                   help="transmit power (bare numbers are dBm)")
    _add_system_flags(p)

    p = sub.add_parser("sweep", help="sum rate vs transmit power for any schemes")
    _add_run_flags(p)
    p.add_argument("--schemes", type=_list_of(str, "scheme list"))
    p.add_argument("--antennas", "-N", type=_typed(_positive_int, "antenna count"))
    p.add_argument("--powers", type=_list_of(parse_power_dbm, "power list"))
    _add_system_flags(p)

    p = sub.add_parser("validate", help="run the randomized oracle suites")
    p.add_argument("--depth", choices=("quick", "full"), default="quick")
    p.add_argument("--seed", type=_typed(lambda s: int(s, 0), "seed"), default=0)
    return parser


def _join_negative_values(argv: Sequence[str], parser: argparse.ArgumentParser) -> list[str]:
    """Turn ``--flag -90dBm`` into ``--flag=-90dBm`` so argparse keeps the value."""
    known = set()
    for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
        known.update(action._option_string_actions)  # noqa: SLF001
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (
            tok.startswith("--") and "=" not in tok and tok in known
            and nxt is not None and nxt.startswith("-") and nxt not in known
            and len(nxt) > 1
        ):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _system(args, base_area: ServiceArea | None = None,
            base_params: SystemParams | None = None) -> tuple[ServiceArea, SystemParams]:
    area = base_area or ServiceArea()
    if args.lx is not None or args.ly is not None:
        area = ServiceArea(
            args.lx if args.lx is not None else area.half_length_x_m,
            args.ly if args.ly is not None else area.half_length_y_m,
        )
    params = base_params or SystemParams()
    changes = {
        k: v for k, v in (
            ("carrier_frequency_hz", args.fc),
            ("noise_power_w", args.sigma2),
            ("refractive_index", args.neff),
            ("antenna_height_m", args.height),
        ) if v is not None
    }
    params = replace(params, **changes).for_area(area)
    return area, params


def _users(args):
    if args.users is not None:
        return args.users
    return load_users(args.users_file)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_place_single(args) -> int:
    area, params = _system(args)
    users = _users(args)
    _emit([
        {"user": list(u.as_tuple()), "pin": list(place_single(u, area, params).as_tuple())}
        for u in users
    ])
    return 0


def _cmd_place_multi(args) -> int:
    area, params = _system(args)
    out = []
    for u in _users(args):
        pl = place_multi(u, args.antennas, area, params)
        out.append({
            "user": list(u.as_tuple()),
            "base": list(pl.base_position.as_tuple()),
            "offsets_m": list(pl.offsets),
            "positions": [list(p.as_tuple()) for p in pl.positions],
        })
    _emit(out)
    return 0


def _cmd_place_noma(args) -> int:
    area, params = _system(args)
    pin = place_noma(_users(args), area, params)
    _emit({"x_pin": pin.x, "pin": list(pin.as_tuple())})
    return 0


def _cmd_rate(args) -> int:
    area, params = _system(args)
    users = _users(args)
    p = args.power
    result: dict = {"scheme": args.scheme, "tx_power_w": p}
    if args.scheme == "tdma-pinch":
        total, _ = sum_rate_tdma_single(users, p, area, params)
    elif args.scheme == "tdma-fixed":
        total = fixed_rate_tdma(users, p, params)
    elif args.scheme == "tdma-pinch-multi":
        total, _ = sum_rate_tdma_multi(users, p, args.antennas, area, params)
        result["n_antennas"] = args.antennas
    elif args.scheme == "noma-pinch":
        total, pin, alloc = sum_rate_noma(users, p, args.target_rate, area, params)
        result["x_pin"] = pin.x
        result["powers_w"] = alloc.by_user()
    else:
        total = fixed_rate_noma(users, p, args.target_rate, params)
    result["sum_rate_bps_hz"] = total
    _emit(result)
    return 0


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    area, params = _system(args, cfg.area, cfg.params)
    changes = {"area": area, "params": params}
    for flag, key in (
        ("seed", "master_seed"),
        ("trials", "trial_count"),
        ("user_count", "user_count"),
        ("target_rate", "target_rate"),
        ("jobs", "n_jobs"),
        ("powers", "tx_power_sweep_dbm"),
        ("antenna_counts", "antenna_counts"),
        ("half_lengths", "half_length_sweep_m"),
        ("schemes", "schemes"),
        ("antennas", "antenna_count"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    if getattr(args, "power", None) is not None:
        changes["fig3_tx_power_dbm"] = args.power
    return replace(cfg, **changes)


def _write(table, args) -> int:
    if args.out:
        write_table(table, args.out)
    else:
        write_table(table, sys.stdout)
    return 0


def _cmd_fig2(args) -> int:
    return _write(run_fig2(_scenario(args)), args)


def _cmd_fig3(args) -> int:
    return _write(run_fig3(_scenario(args)), args)


def _cmd_sweep(args) -> int:
    return _write(run_power_sweep(_scenario(args)), args)


def _cmd_validate(args) -> int:
    report = run_validate(args.depth, seed=args.seed)
    return 0 if report.ok else 1


_COMMANDS = {
    "place-single": _cmd_place_single,
    "place-multi": _cmd_place_multi,
    "place-noma": _cmd_place_noma,
    "rate": _cmd_rate,
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    return parser.parse_args(_join_negative_values(argv, parser))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        # scenario files are parsed before any computation starts
        if getattr(args, "config", None):
            load_config(args.config)
        return _COMMANDS[args.command](args)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, PinchingError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except PinchingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end for the fidelity sweeps and gate diagnostics.

Subcommands mirror the library runners: the three named decoherence
sweeps, user-assembled schedules, holonomy diagnostics, and recipe
inspection.  Sweeps print CSV to stdout unless ``--out`` names a file.

Exit codes: 0 success, 2 configuration problem, 3 numerical invariant
breach (including a failed cyclicity check), 4 no exact segment closure
within the winding bound.
"""

from __future__ import annotations

import argparse
import math
import sys

from .device import ConfigError, load_lattice
from .engine import InvariantError
from .scenarios import (
    DEFAULT_CONFIG,
    MODES,
    SCENARIO_DEFAULT_MODE,
    ScenarioSpec,
    holonomy_check,
    named_recipes,
    recipes_subsystem,
    run_scenario,
    scenario_model,
)
from .synthesis import UnsolvableDurationError, load_recipe, serialize_recipe

CYCLIC_FLOOR = 0.99

_SWEEPS = (
    ("fig2", "fig2_up", "conditional phase gate sweep"),
    ("fig3", "fig3_swaplike", "mediated two-target exchange sweep"),
    ("fig4", "fig4_sequence", "three-gate state-transfer sequence sweep"),
)
_ALIASES = {short: full for short, full, _ in _SWEEPS}


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _parse_kappa_khz(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--kappa-khz wants comma separated numbers, got {text!r}") from None
    return tuple(2.0e3 * math.pi * v for v in values)


def _scenario_name(word: str) -> str:
    name = _ALIASES.get(word, word)
    if name not in _ALIASES.values():
        raise ConfigError(f"unknown scenario {word!r}; pick one of {sorted(_ALIASES)}")
    return name


def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="TOML lattice description (default: built-in reference lattice)")
    parser.add_argument("--mode", choices=MODES,
                        help="propagation model (default: the scenario's pinned mode)")
    parser.add_argument("--kappa-khz", metavar="LIST",
                        help="comma separated sweep values in kHz (default: 0,1,...,10)")
    parser.add_argument("--out", metavar="PATH", help="CSV destination (default: stdout)")
    parser.add_argument("--grid-1q", type=int, default=1001, metavar="N",
                        help="input-family size for single-target scoring (default: 1001)")
    parser.add_argument("--grid-2q", type=int, default=100, metavar="N",
                        help="per-axis input grid for two-target scoring (default: 100)")
    parser.add_argument("--max-windings", type=int, default=10, metavar="N",
                        help="search bound for the path-closure solver (default: 10)")
    parser.add_argument("--sqrt2-relaxation", action="store_true",
                        help="bosonic sqrt(2) weight on the upper relaxation rung")


def _spec_from_args(name: str, args: argparse.Namespace, recipes=()) -> ScenarioSpec:
    kwargs = dict(
        name=name,
        grid_1q=args.grid_1q,
        grid_2q=args.grid_2q,
        max_windings=args.max_windings,
        sqrt2_relaxation=args.sqrt2_relaxation,
        recipes=tuple(recipes),
        out_path=args.out,
    )
    if args.config is not None:
        kwargs["config_text"] = _read_text(args.config)
    if args.mode is not None:
        kwargs["mode"] = args.mode
    if args.kappa_khz is not None:
        kwargs["kappa_grid"] = _parse_kappa_khz(args.kappa_khz)
    return ScenarioSpec(**kwargs)


def _cmd_sweep(args: argparse.Namespace) -> int:
    recipes = tuple(load_recipe(_read_text(p)) for p in getattr(args, "recipe", ()) or ())
    spec = _spec_from_args(args.scenario_name, args, recipes)
    curve = run_scenario(spec)
    _emit(curve.to_csv(), args.out)
    return 0


def _cmd_check_holonomy(args: argparse.Namespace) -> int:
    config = _read_text(args.config) if args.config is not None else None
    if args.recipe:
        recipes = tuple(load_recipe(_read_text(p)) for p in args.recipe)
        model = recipes_subsystem(load_lattice(config or DEFAULT_CONFIG), recipes)
        mode = args.mode or "effective"
    elif args.scenario is not None:
        name = _scenario_name(args.scenario)
        model = scenario_model(name, config)
        recipes = named_recipes(name, model, args.max_windings)
        mode = args.mode or SCENARIO_DEFAULT_MODE[name]
    else:
        raise ConfigError("check-holonomy needs a scenario name or at least one --recipe")

    report = holonomy_check(recipes, model, mode)
    for row in report["recipes"]:
        print(
            f"{row['kind']} {'-'.join(row['targets'])} via {row['auxiliary']}: "
            f"php_max={row['php_max_rad_s']:.3e} rad/s "
            f"cyclic={row['cyclic_overlap']:.12f} "
            f"aux_ground={row['aux_ground_population']:.12f}"
        )
    passed = report["cyclic_min"] >= CYCLIC_FLOOR
    print(
        f"mode={report['mode']} cyclic_min={report['cyclic_min']:.12f} "
        f"aux_ground_min={report['aux_ground_min']:.12f} "
        f"-> {'OK' if passed else 'FAIL'}"
    )
    return 0 if passed else 3


def _cmd_recipe_dump(args: argparse.Namespace) -> int:
    config = _read_text(args.config) if args.config is not None else None
    name = _scenario_name(args.scenario)
    model = scenario_model(name, config)
    recipes = named_recipes(name, model, args.max_windings)
    parts = []
    for i, recipe in enumerate(recipes):
        head = (f"# gate {i + 1}/{len(recipes)}: {recipe.kind} on "
                f"{'-'.join(recipe.targets)} via {recipe.auxiliary}\n")
        parts.append(head + serialize_recipe(recipe))
    _emit("\n".join(parts), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holosim",
        description="Decoherence sweeps and diagnostics for holonomic transmon gates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for short, full, blurb in _SWEEPS:
        p = sub.add_parser(short, help=blurb)
        _add_sweep_flags(p)
        p.set_defaults(handler=_cmd_sweep, scenario_name=full)

    p = sub.add_parser("custom", help="sweep a user-assembled recipe schedule")
    _add_sweep_flags(p)
    p.add_argument("--recipe", action="append", default=[], metavar="PATH",
                   help="recipe TOML, repeatable, applied in order (none: identity)")
    p.set_defaults(handler=_cmd_sweep, scenario_name="custom")

    p = sub.add_parser("check-holonomy",
                       help="geometric-evolution diagnostics; fails if cyclicity < 0.99")
    p.add_argument("scenario", nargs="?", help="named scenario (fig2, fig3 or fig4)")
    p.add_argument("--recipe", action="append", default=[], metavar="PATH",
                   help="check recipe files instead of a named scenario")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--max-windings", type=int, default=10, metavar="N")
    p.set_defaults(handler=_cmd_check_holonomy)

    p = sub.add_parser("recipe-dump", help="print a named scenario's gate recipes as TOML")
    p.add_argument("scenario", help="named scenario (fig2, fig3 or fig4)")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--max-windings", type=int, default=10, metavar="N")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(handler=_cmd_recipe_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UnsolvableDurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line surface.

Subcommands: ``plan``, ``execute``, ``ablate``, ``oracle``, ``replay``.
Exit codes: 0 success, 1 runtime failure, 2 invalid config / capacity error,
3 replay divergence. The output directory can be overridden with the
``BLOCKPLAN_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import RunConfig, apply_overrides, config_to_dict, load_config
from .errors import BlockplanError, CapacityError, ConfigError
from .harness import AblationGrid, brute_force_oracle, scaling_suite
from .runs import episode_records, plan_records, plan_summary_line
from .seeding import derive
from .tracing import digest, first_divergence, read_trace, write_trace
from .world import sample_initial_state


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg = apply_overrides(cfg, [f"seeds=[{int(args.seed)}]"])
    return cfg


def _outdir(cfg: RunConfig) -> str:
    out = os.environ.get("BLOCKPLAN_OUT", cfg.output_dir)
    os.makedirs(out, exist_ok=True)
    return out


def _header_config(cfg: RunConfig, mode: str, seed: int) -> dict:
    return {"run": config_to_dict(cfg), "mode": mode, "seed": seed}


def cmd_plan(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    seed = cfg.seeds[0]
    records = plan_records(cfg, seed)
    path = os.path.join(out, f"plan_{seed}.jsonl")
    write_trace(path, _header_config(cfg, "plan", seed), records)
    print(plan_summary_line(records))
    print(f"trace written to {path}")
    return 0


def cmd_execute(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    rows = ["seed,reward,completed,steps_used,replan_count"]
    for seed in cfg.seeds:
        records = episode_records(cfg, seed)
        end = records[-1]
        rows.append(
            f"{seed},{end['reward']},{int(end['completed'])},"
            f"{end['steps_used']},{end['replan_count']}"
        )
        path = os.path.join(out, f"episode_{seed}.jsonl")
        write_trace(path, _header_config(cfg, "execute", seed), records)
    csv_path = os.path.join(out, "episodes.csv")
    with open(csv_path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print("\n".join(rows))
    print(f"summary written to {csv_path}")
    return 0


def _parse_cells(spec: str, default_horizon: int) -> tuple[tuple[int, int, int, int], ...]:
    cells = []
    for part in spec.split(";"):
        nums = [int(x) for x in part.split(",")]
        if len(nums) == 3:
            nums.append(default_horizon)
        if len(nums) != 4:
            raise ConfigError(f"cell must be B,A,D[,H]: {part!r}")
        cells.append(tuple(nums))
    return tuple(cells)


def cmd_ablate(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    cells = _parse_cells(args.cells, cfg.planner.horizon)
    grid = AblationGrid(
        cells=cells, episodes_per_cell=args.episodes, seed_base=cfg.seeds[0]
    )
    summary = scaling_suite(
        grid,
        cfg.task.goal(),
        base_cfg=cfg.planner,
        n_blocks=cfg.n_blocks,
        wcfg=cfg.world,
        mcfg=cfg.model,
        faults=cfg.faults,
    )
    summary.config_hash = digest(config_to_dict(cfg))
    csv_path = os.path.join(out, "ablation.csv")
    with open(csv_path, "w") as fh:
        fh.write("\n".join(summary.csv_lines()) + "\n")
    for column in ("naive_success", "replay_success"):
        curve = os.path.join(out, f"ablation_{column}.dat")
        with open(curve, "w") as fh:
            for i, row in enumerate(summary.rows):
                fh.write(f"{i} {getattr(row, column):.4f}\n")
    print("\n".join(summary.csv_lines()))
    print(f"results written to {csv_path}")
    return 0


def cmd_oracle(args) -> int:
    cfg = _load(args)
    goal = cfg.task.goal()
    x0 = sample_initial_state(cfg.n_blocks, derive(cfg.seeds[0]), cfg.world)
    value, seq = brute_force_oracle(
        x0, goal, args.horizon, cfg.world, cfg.model, enumeration_cap=args.cap
    )
    print(f"oracle value over horizon {args.horizon}: {value}")
    for a in seq:
        print(f"  {a.text(x0)}")
    return 0


def cmd_replay(args) -> int:
    stored = read_trace(args.trace)
    header = stored[0]
    from .config import config_from_dict

    cfg = config_from_dict(header["config"]["run"])
    mode = header["config"]["mode"]
    seed = int(header["config"]["seed"])
    if mode == "plan":
        regenerated = plan_records(cfg, seed)
    elif mode == "execute":
        regenerated = episode_records(cfg, seed)
    else:
        raise ConfigError(f"unknown trace mode {mode!r}")
    # Compare against stored records, skipping the header (ordinal 0).
    stored_body = [{k: v for k, v in r.items() if k != "ordinal"} for r in stored[1:]]
    div = first_divergence(stored_body, regenerated)
    if div is not None:
        print(f"replay divergence at ordinal {div + 1}", file=sys.stderr)
        return 3
    print(f"replay verified: {len(stored_body)} records match")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockplan",
        description="Tree-search planning over model rollouts on a block tabletop",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a JSON run configuration")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override a config field by dotted path (repeatable)",
        )
        p.add_argument("--seed", type=int, help="replace the seed list with one seed")

    p = sub.add_parser("plan", help="generate one plan and write its trace")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("execute", help="run closed-loop episodes over the seed list")
    common(p)
    p.set_defaults(func=cmd_execute)

    p = sub.add_parser("ablate", help="sweep planner budgets and write CSV + plot data")
    common(p)
    p.add_argument(
        "--cells",
        default="1,1,1;1,1,4;1,4,4;2,4,4",
        help="semicolon-separated B,A,D[,H] tuples",
    )
    p.add_argument("--episodes", type=int, default=100)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("oracle", help="exhaustive search value on a micro-instance")
    common(p)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--cap", type=int, default=500_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replay", help="re-simulate a trace and verify it byte-for-byte")
    p.add_argument("trace", help="path to a previously written trace file")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapacityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BlockplanError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

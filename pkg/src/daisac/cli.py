"""Command-line entry point: train, eval, sweep, gen-scenario."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .rl.checkpoint import load_checkpoint
from .rl.taylor_td import TaylorTdAgent
from .sim.config import ScenarioConfig, desk_preset, dump_config, load_config, paper_preset
from .sim.engine import SCHEMES, Simulation, agent_config
from .sim.experiments import AXES, evaluate, export_evaluation, mean_qoe, run_training, sweep, warm_up
from .sim.metrics import ConservationMonitor
from .sim.outputs import write_csv
from .sim.scenario import generate_scenario

log = logging.getLogger("daisac")


def _config(args) -> ScenarioConfig:
    base = paper_preset() if args.preset == "paper" else desk_preset()
    cfg = load_config(args.config, base) if args.config else base
    overrides = {"seed": args.seed}
    if getattr(args, "episodes", None) is not None:
        overrides["n_episodes"] = args.episodes
    return cfg.replace(**overrides)


def _report_monitor(monitor: ConservationMonitor):
    if monitor.clean:
        log.info("conservation: %d allocations checked, no violations", monitor.checked)
    else:
        log.warning("conservation: %d violations in %d allocations", len(monitor.violations), monitor.checked)


def _agent(cfg, args, monitor):
    if args.checkpoint:
        return load_checkpoint(args.checkpoint, TaylorTdAgent(agent_config(cfg), seed=cfg.seed))
    log.info("no checkpoint given: training an agent first")
    return run_training(cfg, cfg.seed, monitor=monitor).agent


def cmd_train(args):
    cfg = _config(args)
    monitor = ConservationMonitor()
    res = run_training(cfg, cfg.seed, out_dir=args.out, monitor=monitor, log=log.debug)
    first, last = res.phase_means()
    print(f"episodes {len(res.episodes)}  first-phase reward {first:.4f}  final-phase reward {last:.4f}")
    dump_config(Path(args.out) / "config.ini", cfg)
    _report_monitor(monitor)
    return 0 if monitor.clean else 1


def cmd_eval(args):
    cfg = _config(args)
    monitor = ConservationMonitor()
    schemes = (args.scheme,) if args.scheme else SCHEMES
    agent = _agent(cfg, args, monitor) if "proposed" in schemes else None
    sim = Simulation(cfg, cfg.seed, agent, monitor)
    warm_up(sim)
    results = evaluate(sim, schemes)
    export_evaluation(args.out, results)
    for scheme, eps in results.items():
        crb = sum(m.crb_ok for m in eps) / max(1, sum(m.crb_total for m in eps))
        print(f"{scheme:12s} mean QoE {mean_qoe(eps):.4f}  CRB satisfaction {crb:.3f}")
    _report_monitor(monitor)
    return 0 if monitor.clean else 1


def cmd_sweep(args):
    cfg = _config(args)
    monitor = ConservationMonitor()
    schemes = (args.scheme,) if args.scheme else SCHEMES
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    agents = {}
    if "proposed" in schemes and args.checkpoint:
        agents[cfg.seed] = load_checkpoint(args.checkpoint, TaylorTdAgent(agent_config(cfg), seed=cfg.seed))
    table = sweep(cfg, args.axis, values, seeds=(cfg.seed,), agents=agents, retrain=args.retrain,
                  schemes=schemes, monitor=monitor, out_dir=args.out)
    for r in table:
        print(f"{r.axis}={r.value:.6g}  {r.scheme:12s} {r.mean_qoe:.4f} +- {r.std_qoe:.4f}")
    _report_monitor(monitor)
    return 0 if monitor.clean else 1


def cmd_gen_scenario(args):
    cfg = _config(args)
    sc = generate_scenario(cfg, cfg.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(out / "config.ini", cfg)
    write_csv(out / "users.csv", ("user", "cell", "velocity_kmh", "principle", "swipe_prob", "file_mb_low",
                                  "file_mb_high"),
              [(u.user_id, u.cell, u.velocity_kmh, u.principle, u.swipe_prob, *u.file_size_mb) for u in sc.users])
    tr = sc.episode(0)
    rows = []
    for t in range(cfg.n_slots):
        for k in range(cfg.n_users):
            rows.append((t, k, tr.distance_m[t, k], tr.speed_kmh[t, k], tr.env_complexity[t, k],
                         tr.behavior_dynamics[t, k], tr.file_size_mb[t, k], tr.comm_gain[t, k],
                         tr.sensing_gain[t, k]))
    write_csv(out / "trace.csv", ("slot", "user", "distance_m", "speed_kmh", "env_complexity", "behavior_dynamics",
                                  "file_size_mb", "comm_gain", "sensing_gain"), rows)
    print(f"{cfg.n_users} users, {cfg.n_slots} slots written to {out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="daisac", description="ISAC resource management with digital-agent QoE models")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="scenario config file (INI with unit suffixes)")
        sp.add_argument("--preset", choices=("desk", "paper"), default="desk")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--scheme", choices=SCHEMES, help="restrict to one scheme (default: all)")

    sp = sub.add_parser("train", help="train the group agent and write the reward curve")
    common(sp)
    sp.add_argument("--episodes", type=int, help="override the episode count")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate schemes on held-out traces")
    common(sp)
    sp.add_argument("--checkpoint", help="trained agent (trains one if omitted)")
    sp.add_argument("--episodes", type=int, help="training episodes when no checkpoint is given")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="mean QoE per scheme along one parameter axis")
    common(sp)
    sp.add_argument("--axis", choices=AXES, required=True)
    sp.add_argument("--values", required=True, help="comma list; unit suffixes allowed (e.g. 50MHz,100MHz)")
    sp.add_argument("--checkpoint", help="trained agent reused at every value")
    sp.add_argument("--retrain", action="store_true", help="train a fresh agent at every value")
    sp.add_argument("--episodes", type=int, help="training episodes for agents trained here")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gen-scenario", help="write the user population and one episode trace")
    common(sp)
    sp.set_defaults(func=cmd_gen_scenario)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

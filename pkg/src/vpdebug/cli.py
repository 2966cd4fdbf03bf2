"""Command-line entry point: ``vpdebug <subcommand>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from vpdebug.dsl.parser import DslSyntaxError
from vpdebug.harness import datasets
from vpdebug.harness.config import Config, load_config
from vpdebug.harness.metrics import is_box
from vpdebug.world.scene import SceneStore


def _store(args) -> SceneStore:
    return SceneStore(args.scene_dir) if args.scene_dir else datasets.default_store()


def _parse_gt(text: str):
    """Ground truth from the command line: a JSON box or a plain answer."""
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        return text
    return value if is_box(value) else text


def cmd_run(args, cfg: Config) -> int:
    from vpdebug.runtime.interpreter import execute_or_syntax_error
    from vpdebug.runtime.trace import render_feedback

    source = Path(args.program).read_text(encoding="utf-8")
    outcome = execute_or_syntax_error(source, _store(args).get_many(args.scene), cfg.budgets.step_limit)
    sys.stdout.write(render_feedback(outcome, cfg.budgets.feedback_tokens).text)
    return 0 if outcome.ok else 1


def cmd_trace(args, cfg: Config) -> int:
    from vpdebug.runtime.interpreter import execute
    from vpdebug.runtime.trace import render_feedback

    path = args.program or datasets.golden_program_path()
    scenes = args.scene or [datasets.GOLDEN_SCENE_ID]
    outcome = execute(Path(path).read_text(encoding="utf-8"), _store(args).get_many(scenes), cfg.budgets.step_limit)
    sys.stdout.write(render_feedback(outcome, cfg.budgets.feedback_tokens).text)
    if args.events:
        Path(args.events).write_text(outcome.events_jsonl(), encoding="utf-8")
    return 0


def cmd_inject(args, cfg: Config) -> int:
    from vpdebug.inject.pipeline import run_injection, train_infill_model
    from vpdebug.inject.records import dumps_jsonl
    from vpdebug.inject.sampling import MaskBestConfig
    from vpdebug.model.remote import RemoteModel

    pool = datasets.load_pool(args.pool or datasets.pool_correct_path())
    if cfg.endpoints.model:
        model = RemoteModel(cfg.endpoints.model, cfg.budgets.timeout, cfg.budgets.retries)
        vocab = model.vocabulary()
    else:
        vocab, model = train_infill_model([p.program for p in pool])
    mode = args.mode or cfg.inject.mode
    mb = MaskBestConfig(
        th=cfg.inject.th if args.th is None else args.th,
        max_masked=cfg.inject.max_masked if args.max_masked is None else args.max_masked,
        max_tokens=cfg.budgets.max_tokens,
        seed=cfg.seeds.inject if args.seed is None else args.seed,
    )
    attempts = cfg.inject.attempts if args.attempts is None else args.attempts
    report = run_injection(pool, _store(args), model, vocab, mb, mode, attempts)
    text = dumps_jsonl(r.to_dict() for r in report.records)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"mode={mode} injected={report.n_injected}/{report.n_pool} rate={report.rate:.1f}%", file=sys.stderr)
    return 0


def cmd_dataset_gen(args, cfg: Config) -> int:
    from vpdebug.inject.records import dumps_jsonl, serialize_training_records

    records = datasets.load_records(args.records)
    natural = datasets.load_pool(args.natural) if args.natural else []
    critic, refiner = serialize_training_records(records, natural, _store(args), cfg.budgets.feedback_tokens)
    Path(args.critic_out).write_text(dumps_jsonl(critic), encoding="utf-8")
    Path(args.refiner_out).write_text(dumps_jsonl(refiner), encoding="utf-8")
    print(f"critic rows={len(critic)} refiner rows={len(refiner)}", file=sys.stderr)
    return 0


def _debug_cfg(args, cfg: Config):
    from vpdebug.loop.debug import DebugSessionConfig

    return DebugSessionConfig(
        threshold=cfg.debug.threshold if args.threshold is None else args.threshold,
        max_steps=cfg.debug.max_steps if args.max_steps is None else args.max_steps,
        containment=args.containment or cfg.debug.containment,
        feedback_budget=cfg.budgets.feedback_tokens,
        step_limit=cfg.budgets.step_limit,
    )


def _remote_backends(cfg: Config):
    from vpdebug.loop.backends import RemoteCritic, RemoteRefiner

    if not cfg.endpoints.critic or not cfg.endpoints.refiner:
        raise SystemExit("remote backend needs critic and refiner endpoints (config file or VPDEBUG_*_ENDPOINT)")
    return (
        RemoteCritic(cfg.endpoints.critic, cfg.budgets.timeout, cfg.budgets.retries),
        RemoteRefiner(cfg.endpoints.refiner, cfg.budgets.timeout, cfg.budgets.retries),
    )


def cmd_debug(args, cfg: Config) -> int:
    from vpdebug.harness.evaluate import Sample, oracle_for_sample
    from vpdebug.loop.debug import DebugSessionAborted, run_debug_loop

    if args.records:
        matches = [r for r in datasets.load_records(args.records) if r.id == args.id]
        if not matches:
            raise SystemExit(f"no record with id {args.id!r}")
        sample = Sample.from_record(matches[0])
    else:
        if not (args.program and args.scene and args.ground_truth is not None):
            raise SystemExit("give --records/--id, or --program with --scene and --ground-truth")
        gt = _parse_gt(args.ground_truth)
        sample = Sample(
            "cli", "", tuple(args.scene), gt, Path(args.program).read_text(encoding="utf-8"),
            "grounding" if is_box(gt) else "qa",
        )
    scenes = _store(args).get_many(sample.scene_ids)
    critic, refiner = _remote_backends(cfg) if args.backend == "remote" else oracle_for_sample(sample, scenes)
    try:
        transcript = run_debug_loop(sample.program, scenes, critic, refiner, _debug_cfg(args, cfg))
    except DebugSessionAborted as e:
        print(e.transcript.to_json())
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(transcript.to_json())
    return 0


def cmd_eval(args, cfg: Config) -> int:
    from vpdebug.harness.evaluate import Sample, evaluate, oracle_for_sample

    if args.records:
        dataset = [Sample.from_record(r) for r in datasets.load_records(args.records)]
    else:
        dataset = [Sample.from_pool_entry(p) for p in datasets.load_pool(args.pool or datasets.pool_correct_path())]
    max_steps = cfg.debug.max_steps if args.max_steps is None else args.max_steps
    if args.backend == "remote":
        remote = _remote_backends(cfg)
        backends = lambda sample, scenes: remote
    else:
        backends = oracle_for_sample
    dcfg = _debug_cfg(argparse.Namespace(threshold=args.threshold, max_steps=max(max_steps, 1), containment=None), cfg)
    report = evaluate(dataset, _store(args), max_steps, dcfg, backends, args.workers)
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    sys.stdout.write(report.table())
    print("error sources: " + json.dumps(report.error_sources), file=sys.stderr)
    return 0


def cmd_stats(args, cfg: Config) -> int:
    from vpdebug.harness.stats import StatsRow, dataset_stats, render_table

    injected = {}
    for item in args.records or []:
        mode, _, value = item.partition("=")
        if not value:
            raise SystemExit(f"--records expects MODE=PATH or MODE=COUNT, got {item!r}")
        injected[mode] = value
    if args.n_correct is not None:
        counts = {m: int(v) for m, v in injected.items()}
        row = StatsRow(args.name, args.n_incorrect or 0, args.n_correct, counts)
    else:
        row = dataset_stats(
            args.name,
            args.pool_correct or datasets.pool_correct_path(),
            args.pool_incorrect or datasets.pool_incorrect_path(),
            injected,
        )
    sys.stdout.write(render_table([row]))
    return 0


def cmd_serve_mock(args, cfg: Config) -> int:
    from vpdebug.harness.server import MockServer, RecordOracle
    from vpdebug.inject.pipeline import train_infill_model

    pool = datasets.load_pool(args.pool or datasets.pool_correct_path())
    vocab, model = train_infill_model([p.program for p in pool])
    oracle = RecordOracle(datasets.load_records(args.records) if args.records else [])
    server = MockServer(args.host, args.port, model, vocab, oracle.critic, oracle.refine)
    print(f"serving on {server.url}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vpdebug", description="Visual program execution, error injection and debugging.")
    p.add_argument("--config", help="JSON settings file (see README)")
    p.add_argument("--scene-dir", help="directory of <image_id>.json scene fixtures (default: bundled)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="execute one program and print its feedback")
    s.add_argument("program")
    s.add_argument("--scene", action="append", required=True, help="scene id; repeat for several images")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("trace", help="print the golden feedback (or that of --program)")
    s.add_argument("--program")
    s.add_argument("--scene", action="append")
    s.add_argument("--events", help="also write trace events as JSONL to this path")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("inject", help="inject errors into a pool of correct programs")
    s.add_argument("--pool", help="pool JSONL (default: bundled corpus)")
    s.add_argument("--out", help="DatasetRecord JSONL output (default: stdout)")
    s.add_argument("--mode", choices=("greedy", "mask-best"))
    s.add_argument("--th", type=float)
    s.add_argument("--max-masked", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--attempts", type=int)
    s.set_defaults(func=cmd_inject)

    s = sub.add_parser("dataset-gen", help="turn DatasetRecords into critic and refiner training JSONL")
    s.add_argument("--records", required=True)
    s.add_argument("--natural", help="pool JSONL of naturally generated programs")
    s.add_argument("--critic-out", required=True)
    s.add_argument("--refiner-out", required=True)
    s.set_defaults(func=cmd_dataset_gen)

    def loop_flags(s):
        s.add_argument("--backend", choices=("oracle", "remote"), default="oracle")
        s.add_argument("--threshold", type=float)
        s.add_argument("--max-steps", type=int)

    s = sub.add_parser("debug", help="run one sample through the critic-refiner loop")
    s.add_argument("--records")
    s.add_argument("--id")
    s.add_argument("--program")
    s.add_argument("--scene", action="append")
    s.add_argument("--ground-truth")
    s.add_argument("--containment", choices=("strict", "lenient"))
    loop_flags(s)
    s.set_defaults(func=cmd_debug)

    s = sub.add_parser("eval", help="evaluate a dataset per debugging iteration")
    s.add_argument("--records")
    s.add_argument("--pool")
    s.add_argument("--out", help="EvalReport JSON output")
    s.add_argument("--workers", type=int, default=1)
    loop_flags(s)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("stats", help="pool sizes and injection error rates")
    s.add_argument("--name", default="fixtures")
    s.add_argument("--pool-correct")
    s.add_argument("--pool-incorrect")
    s.add_argument("--records", action="append", help="MODE=PATH (or MODE=COUNT with --n-correct)")
    s.add_argument("--n-correct", type=int, help="use counts instead of files")
    s.add_argument("--n-incorrect", type=int)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("serve-mock", help="serve model, critic and refiner endpoints on loopback")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8765)
    s.add_argument("--pool")
    s.add_argument("--records")
    s.set_defaults(func=cmd_serve_mock)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (OSError, ValueError, KeyError, DslSyntaxError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

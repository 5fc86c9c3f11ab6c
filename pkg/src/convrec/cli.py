"""Command-line entry point.

Subcommands: ``data prepare`` (build benchmark samples from MovieLens CSVs),
``bench run`` / ``bench report`` (run the benchmark, recompute reports),
``chat`` (terminal REPL over the same engine), ``serve`` (HTTP service).
Exit codes: 0 clean, 1 usage error, 2 partial session failures.
"""

from __future__ import annotations

import argparse
import json
import sys
import uuid
from pathlib import Path

from .data import build_samples, load_movielens
from .errors import ConvrecError
from .evalkit import RunConfig, SystemMode, TurnEngine, build_metrics, format_report, read_records_jsonl, run_benchmark
from .gateway import Gateway, GenerationConfig, RemoteBackend, ReplayBackend, ScriptedBackend
from .simulation import build_target_profile, generate_first_utterance, judge_acceptance_live, load_samples, save_sample


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2; we reserve 2 for partial failures
        raise _UsageError(message)


def build_backend(spec: dict):
    kind = spec.get("kind")
    if kind == "scripted":
        return ScriptedBackend.from_file(spec["path"])
    if kind == "replay":
        inner = build_backend(spec["inner"]) if spec.get("inner") else None
        return ReplayBackend(spec["cache"], fallthrough=spec.get("fallthrough", False), inner=inner)
    if kind == "remote":
        return RemoteBackend(endpoint=spec["endpoint"], api_key_env=spec.get("api_key_env", "OPENAI_API_KEY"))
    raise _UsageError(f"unknown backend kind {kind!r} (expected scripted, replay, or remote)")


def build_gateway(backend_config_path: str | None, generation: GenerationConfig | None = None) -> Gateway:
    if backend_config_path is None:
        raise _UsageError("--backend-config is required for this command")
    config = json.loads(Path(backend_config_path).read_text(encoding="utf-8"))
    gen = generation
    if gen is None and "generation" in config:
        g = config["generation"]
        gen = GenerationConfig(
            model=g.get("model", "gpt-3.5-turbo"),
            temperature=g.get("temperature", 0.0),
            max_tokens=g.get("max_tokens", 512),
            request_timeout=g.get("request_timeout", 60.0),
            retry_budget=g.get("retry_budget", 3),
        )
    return Gateway(build_backend(config["backend"]), gen=gen)


def _cmd_data_prepare(args: argparse.Namespace) -> int:
    import dataclasses

    log, catalog = load_movielens(args.ratings, args.movies)
    samples = build_samples(log, catalog, n=args.n, seed=args.seed)
    gateway = build_gateway(args.backend_config)
    out = Path(args.out)
    cache_dir = out / "profiles"
    for sample in samples:
        profile = build_target_profile(sample.target, gateway, cache_dir=cache_dir)
        sample = dataclasses.replace(sample, target_profile=profile)
        if not sample.first_utterance:
            sample = dataclasses.replace(sample, first_utterance=generate_first_utterance(sample, gateway))
        save_sample(sample, out)
    print(f"prepared {len(samples)} samples in {out}")
    return 0


def _cmd_bench_run(args: argparse.Namespace) -> int:
    if args.config:
        config = RunConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        config = RunConfig()
    overrides = {}
    if args.mode:
        overrides["mode"] = SystemMode(args.mode)
    if args.concurrency:
        overrides["concurrency"] = args.concurrency
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)
    samples = load_samples(args.samples)
    if not samples:
        raise _UsageError(f"no sample files found in {args.samples}")
    gateway = build_gateway(args.backend_config, generation=config.generation)
    report = run_benchmark(samples, config, gateway, out_dir=args.out)
    print(report.report_text)
    if report.aborted:
        print(f"{report.aborted} sessions aborted; see records.jsonl", file=sys.stderr)
        return 2
    return 0


def _cmd_bench_report(args: argparse.Namespace) -> int:
    records = read_records_jsonl(args.records)
    if not records:
        raise _UsageError(f"no records in {args.records}")
    config = RunConfig(
        mode=SystemMode(records[0].mode),
        max_turns=records[0].max_turns,
        fallback_size=records[0].fallback_size,
        hit_ks=records[0].hit_ks,
        config_id=records[0].config_id,
    )
    metrics = build_metrics(records, config)
    text = format_report(records, metrics, config)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(json.dumps(metrics, indent=1, sort_keys=True), encoding="utf-8")
        (out / "report.txt").write_text(text, encoding="utf-8")
    print(text)
    return 0


def _cmd_chat(args: argparse.Namespace) -> int:
    from .core import is_terminal

    gateway = build_gateway(args.backend_config)
    config = RunConfig(mode=SystemMode(args.mode))
    session_id = args.session_id or uuid.uuid4().hex

    def judge(response, feedback, turn_index):
        return judge_acceptance_live(response, feedback, gateway, session_id=session_id, turn_index=turn_index)

    engine = TurnEngine(config, gateway, session_id=session_id, judge=judge)
    print("you:", end=" ", flush=True)
    opening = sys.stdin.readline().strip()
    if not opening:
        raise _UsageError("empty opening message")
    state, response = engine.open_session(opening)
    print(f"[{response.act.value}] {response.text}")
    while not is_terminal(state):
        print("you:", end=" ", flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        feedback = line.strip()
        if not feedback:
            continue
        state, response = engine.advance(state, feedback)
        if response is not None:
            print(f"[{response.act.value}] {response.text}")
            if response.recommendations and len(response.recommendations) > 1:
                for i, title in enumerate(response.recommendations, start=1):
                    print(f"  {i}. {title}")
    print(f"session finished: {state.status.value}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import logging

    import uvicorn

    from .service import create_app

    # per-turn JSON log lines go to stdout for collectors
    turn_log = logging.getLogger("convrec.turns")
    turn_log.setLevel(logging.INFO)
    turn_log.addHandler(logging.StreamHandler(sys.stdout))
    gateway = build_gateway(args.backend_config)
    uvicorn.run(create_app(gateway), host=args.host, port=args.port)
    return 0


def make_parser() -> _Parser:
    parser = _Parser(prog="convrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    data = sub.add_parser("data", help="dataset workflows")
    data_sub = data.add_subparsers(dest="subcommand", required=True)
    prepare = data_sub.add_parser("prepare", help="build benchmark samples from MovieLens CSVs")
    prepare.add_argument("--ratings", required=True)
    prepare.add_argument("--movies", required=True)
    prepare.add_argument("-n", type=int, default=100)
    prepare.add_argument("--seed", type=int, default=0)
    prepare.add_argument("--out", required=True)
    prepare.add_argument("--backend-config", required=True)
    prepare.set_defaults(func=_cmd_data_prepare)

    bench = sub.add_parser("bench", help="benchmark workflows")
    bench_sub = bench.add_subparsers(dest="subcommand", required=True)
    run = bench_sub.add_parser("run", help="run sessions over a sample directory")
    run.add_argument("--samples", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--mode", choices=[m.value for m in SystemMode], default=None)
    run.add_argument("--config", default=None, help="JSON run config file")
    run.add_argument("--backend-config", required=True)
    run.add_argument("--concurrency", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(func=_cmd_bench_run)
    report = bench_sub.add_parser("report", help="recompute metrics from records.jsonl")
    report.add_argument("--records", required=True)
    report.add_argument("--out", default=None)
    report.set_defaults(func=_cmd_bench_report)

    chat = sub.add_parser("chat", help="interactive terminal chat")
    chat.add_argument("--backend-config", required=True)
    chat.add_argument("--mode", choices=["macrs", "single_agent"], default="macrs")
    chat.add_argument("--session-id", default=None, help="fixed session id (useful with scripted backends)")
    chat.set_defaults(func=_cmd_chat)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--backend-config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvrecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

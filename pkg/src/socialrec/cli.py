"""Command line entry point: ``socialrec <subcommand> ...``.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from socialrec import dataio
from socialrec.engine import Engine
from socialrec.errors import NotFoundError, ValidationError
from socialrec.evaluator.harness import evaluate_dataset
from socialrec.evaluator.synth import SyntheticConfig, write_synthetic
from socialrec.profiles import ProfileRegistry


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which we reserve for I/O
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="snapshot directory (interactions.csv, resources.jsonl, tags.csv)")
    p.add_argument("--interactions", help="interactions CSV")
    p.add_argument("--resources", help="resources JSON-lines file")
    p.add_argument("--tags", help="tag assignments CSV")


def _load(args) -> dataio.Dataset:
    if args.data:
        return dataio.load_snapshot(args.data)
    if not (args.interactions or args.resources or args.tags):
        raise ValidationError("no input given: use --data or --interactions/--resources/--tags")
    return dataio.load_files(args.interactions, args.resources, args.tags)


def _profiles(args) -> ProfileRegistry:
    path = getattr(args, "profiles", None)
    if path and Path(path).exists():
        return ProfileRegistry.from_file(path)
    return ProfileRegistry()


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_stats(args) -> int:
    stats = _load(args).to_store().compute_stats().as_dict()
    lines = ["field\tvalue"] + [f"{k}\t{v:.2f}" if isinstance(v, float) else f"{k}\t{v}"
                                for k, v in stats.items()]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_ingest(args) -> int:
    dataset = _load(args)
    manifest = dataio.write_snapshot(args.out, dataset)
    counts = manifest["stats"]
    print(f"wrote {args.out}: {counts['n_interactions']} interactions, "
          f"{counts['n_resources']} resources, {counts['n_tag_assignments']} tag assignments")
    return 0


def cmd_recommend(args) -> int:
    store = _load(args).to_store()
    engine = Engine(store, _profiles(args))
    ranked = engine.recommend(args.use_case, user=args.user, resource=args.resource, k=args.k,
                              goal=args.goal, lambda_=args.lambda_, profile_id=args.profile_id)
    lines = ["rank\tresource_id\tscore"]
    lines += [f"{e.rank}\t{e.resource_id}\t{e.score:.6f}" for e in ranked.entries]
    _write("\n".join(lines) + "\n", args.out)
    if ranked.cold_start:
        print("cold start: no data for this user; try --use-case uc1", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    report = evaluate_dataset(
        _load(args),
        [a for a in args.algorithms.split(",") if a.strip()],
        test_fraction=args.test_fraction,
        profiles=_profiles(args),
    )
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_table())
    return 0


def cmd_synth(args) -> int:
    cfg = SyntheticConfig(
        n_users=args.users, n_resources=args.n_resources, n_topics=args.topics,
        p_topic_click=args.p_topic_click, q_topic_tag=args.q_topic_tag,
        activity_tail=args.activity_tail, seed=args.seed,
    )
    manifest = write_synthetic(args.out, cfg)
    s = manifest["stats"]
    print(f"wrote {args.out}: {s['n_interactions']} interactions by {s['n_users']} users "
          f"on {s['n_resources']} resources, {s['n_tag_assignments']} tag assignments")
    return 0


def cmd_profile(args) -> int:
    registry = _profiles(args)
    if args.action == "show":
        profiles = [registry.get(args.profile_id)] if args.profile_id else registry.all()
        fields = ["profile_id", "algorithm_id", "n", "k_default", "lambda", "signal", "headroom", "version"]
        lines = ["\t".join(fields)]
        for p in profiles:
            d = p.to_json()
            lines.append("\t".join(str(d[f]) for f in fields))
        sys.stdout.write("\n".join(lines) + "\n")
        return 0
    if not args.profile_id:
        raise ValidationError("profile set needs a profile id")
    if not args.profiles:
        raise ValidationError("profile set needs --profiles FILE to write to")
    changes = {name: value for name, value in (
        ("n", args.n), ("k_default", args.k_default), ("lambda_", args.lambda_),
        ("signal", args.signal), ("headroom", args.headroom)) if value is not None}
    updated = registry.update(args.profile_id, **changes)
    registry.save(args.profiles)
    print(f"{updated.profile_id} version {updated.version}")
    return 0


def cmd_serve(args) -> int:
    from socialrec.service import ServiceConfig, serve

    config = ServiceConfig.from_env()
    config.host = args.host or config.host
    config.port = args.port or config.port
    if args.refresh_ms is not None:
        config.refresh_ms = args.refresh_ms
    if args.profiles:
        config.profiles_path = args.profiles
    store = None
    if args.data or args.interactions or args.resources or args.tags:
        store = _load(args).to_store(config.refresh_ms)
    serve(config, store=store)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socialrec", description="Recommender for social learning environments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stats", help="print dataset statistics")
    _add_data_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("ingest", help="validate input files and write a snapshot directory")
    _add_data_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("recommend", help="one-shot recommendation, printed as TSV")
    _add_data_flags(p)
    p.add_argument("--use-case", default="uc1", help="uc1..uc7")
    p.add_argument("--user")
    p.add_argument("--resource")
    p.add_argument("--goal", help="harder | easier | topic:<term>")
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--profile-id")
    p.add_argument("--profiles")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("eval", help="offline evaluation with a chronological split")
    _add_data_flags(p)
    p.add_argument("--algorithms", default="uc1,uc2,uc3")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--profiles")
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.add_argument("--out", help="also write the CSV report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic dataset snapshot")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--n-resources", type=int, default=300)
    p.add_argument("--topics", type=int, default=10)
    p.add_argument("--p-topic-click", type=float, default=0.6)
    p.add_argument("--q-topic-tag", type=float, default=0.95)
    p.add_argument("--activity-tail", type=float, default=SyntheticConfig.activity_tail)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("profile", help="show or change recommendation profiles")
    p.add_argument("action", choices=["show", "set"])
    p.add_argument("profile_id", nargs="?")
    p.add_argument("--profiles", help="profiles.json to read (and write for 'set')")
    p.add_argument("--n", type=int)
    p.add_argument("--k-default", type=int)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--signal", choices=["interactions", "tags"])
    p.add_argument("--headroom", type=int)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("serve", help="run the REST service")
    _add_data_flags(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--refresh-ms", type=int)
    p.add_argument("--profiles")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValidationError, NotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

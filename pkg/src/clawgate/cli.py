"""Command-line entry point.

Every ``run`` flag has a ``CLAWGATE_<FLAG>`` environment twin; an explicit
flag always wins over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PublicKey

from . import audit
from .gatekeeper import verify_witness_journal
from .detectors.dlp import DlpCatalog, strict_catalog, widened_catalog
from .harness.runner import run_experiment
from .harness.samples import CHANNELS, STRESS_N, SUBJECTS, TELEGRAM, RunConfig
from .harness.scrub import scrub_csv

ENV_PREFIX = "CLAWGATE_"
_TRUE = {"1", "true", "yes", "on"}


def _env(name: str) -> str | None:
    value = os.environ.get(ENV_PREFIX + name)
    return value if value not in (None, "") else None


def _env_bool(name: str) -> bool:
    value = _env(name)
    return value is not None and value.strip().lower() in _TRUE


def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_positive_int, default=None, help="samples per cell and label (default 100)")
    p.add_argument("--seed", default=None, help="PRNG seed string (default: random, recorded in the report)")
    p.add_argument("--channels", type=_csv_list, default=None, help=f"comma list from {','.join(CHANNELS)}")
    p.add_argument("--subjects", type=_csv_list, default=None, help=f"comma list from {','.join(SUBJECTS)}")
    p.add_argument("--out-dir", type=Path, default=None, help="output directory (default clawgate-out)")
    p.add_argument("--policy", type=Path, default=None, help="policy JSON (default: allow the mock channels)")
    p.add_argument("--pace-ms", type=int, default=None, help="delay between sink posts in milliseconds")
    p.add_argument("--stats-only", action=argparse.BooleanOptionalAction, default=None,
                   help="count sink posts but do not store them")
    p.add_argument("--disable-witness", action=argparse.BooleanOptionalAction, default=None,
                   help="boot the witness subject with no witness to exercise fail-closed admission")
    p.add_argument("--widened-dlp", action=argparse.BooleanOptionalAction, default=None,
                   help="append the widened DLP tier")
    p.add_argument("--stress", action=argparse.BooleanOptionalAction, default=None,
                   help=f"n={STRESS_N} per cell on {TELEGRAM} only")


def _pick(flag, env_name: str, convert=None):
    if flag is not None:
        return flag
    raw = _env(env_name)
    if raw is None:
        return None
    return convert(raw) if convert else raw


def _flag_bool(flag: bool | None, env_name: str) -> bool:
    return flag if flag is not None else _env_bool(env_name)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    stress = _flag_bool(args.stress, "STRESS")
    n = _pick(args.n, "N", int)
    channels = _pick(args.channels, "CHANNELS", _csv_list)
    if stress:
        n = n if args.n is not None else STRESS_N
        channels = channels if args.channels is not None else [TELEGRAM]
    subjects = _pick(args.subjects, "SUBJECTS", _csv_list)
    pace = _pick(args.pace_ms, "PACE_MS", int)
    out_dir = _pick(args.out_dir, "OUT_DIR", Path)
    policy = _pick(args.policy, "POLICY", Path)
    kwargs = dict(
        seed_string=_pick(args.seed, "SEED"),
        stats_only=_flag_bool(args.stats_only, "STATS_ONLY"),
        disable_witness=_flag_bool(args.disable_witness, "DISABLE_WITNESS"),
        widened_dlp=_flag_bool(args.widened_dlp, "WIDENED_DLP"),
        policy_path=policy,
    )
    if n is not None:
        kwargs["n_per_cell"] = n
    if channels is not None:
        kwargs["channels"] = channels
    if subjects is not None:
        kwargs["subjects"] = subjects
    if pace is not None:
        kwargs["pace_ms"] = pace
    if out_dir is not None:
        kwargs["out_dir"] = out_dir
    return RunConfig(**kwargs)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"clawgate: {exc}", file=sys.stderr)
        return 2
    bundle = run_experiment(config, echo=True)
    return 0 if bundle.ok else 1


def _load_catalog(args: argparse.Namespace) -> DlpCatalog:
    if getattr(args, "catalog", None):
        return DlpCatalog.load(args.catalog)
    return strict_catalog() if getattr(args, "strict", False) else widened_catalog()


def cmd_scrub(args: argparse.Namespace) -> int:
    out = scrub_csv(args.csv, _load_catalog(args), args.out)
    print(out)
    return 0


def _is_witness_journal(path: Path) -> bool:
    with open(path, "rb") as fh:
        first = fh.readline()
    try:
        return "decisionDigest" in json.loads(first)
    except (ValueError, TypeError):
        return False


def cmd_verify(args: argparse.Namespace) -> int:
    status = 0
    witness_key = None
    if args.witness_key:
        try:
            witness_key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(args.witness_key))
        except ValueError as exc:
            print(f"error: bad --witness-key: {exc}", file=sys.stderr)
            return 2
    for path in args.journals:
        if _is_witness_journal(path):
            if witness_key is None:
                print(f"{path}: witness journal, pass --witness-key to check signatures")
                status = 1
                continue
            bad = verify_witness_journal(path, witness_key)
        else:
            bad = audit.verify_journal(path)
        if bad is None:
            print(f"{path}: ok ({len(audit.read_journal_lines(path))} records)")
        else:
            print(f"{path}: tampered at record {bad}")
            status = 1
    return status


def cmd_catalog(args: argparse.Namespace) -> int:
    sys.stdout.write(_load_catalog(args).to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clawgate", description="Mediation gates and adversarial harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the adversarial harness")
    _add_run_args(run)
    run.set_defaults(func=cmd_run)

    scrub = sub.add_parser("scrub", help="redact secrets and PII from a samples CSV")
    scrub.add_argument("csv", type=Path)
    scrub.add_argument("--out", type=Path, default=None)
    scrub.add_argument("--catalog", type=Path, default=None, help="DLP catalog JSON (default: widened built-in)")
    scrub.add_argument("--strict", action="store_true", help="use the strict built-in catalog")
    scrub.set_defaults(func=cmd_scrub)

    verify = sub.add_parser("verify", help="verify audit journal hash chains and witness signatures")
    verify.add_argument("journals", nargs="+", type=Path)
    verify.add_argument("--witness-key", help="hex Ed25519 public key for witness journals (listed in report.md)")
    verify.set_defaults(func=cmd_verify)

    cat = sub.add_parser("catalog", help="print a DLP catalog as JSON")
    cat.add_argument("--strict", action="store_true")
    cat.set_defaults(func=cmd_catalog, catalog=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

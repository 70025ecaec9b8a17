"""Command line front end: senseme-sim."""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from ..errors import SensemeError
from .profiles import SimConfig, parse_anomaly_spec, parse_profiles
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="senseme-sim",
        description="Synthesize a school of child devices and drive the "
                    "awareness service's ingestion API.",
    )
    parser.add_argument("--seed", type=int, required=True, help="64-bit simulation seed")
    parser.add_argument("--children", required=True, metavar="FILE",
                        help="JSON array of child behavior profiles")
    parser.add_argument("--timetable", required=True, metavar="FILE")
    parser.add_argument("--overrides", metavar="FILE", default=None)
    parser.add_argument("--days", type=int, required=True,
                        help="number of school days to generate (dates with windows)")
    parser.add_argument("--start-date", default="2026-01-05",
                        help="first calendar date to consider (YYYY-MM-DD)")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="service base URL to post against")
    parser.add_argument("--token", default=None,
                        help="device bearer token for the service")
    parser.add_argument("--compress", type=float, default=0.0, metavar="F",
                        help="simulated seconds per real second; 0 posts without pacing")
    parser.add_argument("--sample-rate", type=int, default=8000,
                        help="audio frame length in samples per one-second frame")
    parser.add_argument("--p-meet", type=float, default=0.8,
                        help="intra-cluster per-epoch meeting probability")
    parser.add_argument("--p-meet-cross", type=float, default=0.05,
                        help="cross-cluster per-epoch meeting probability")
    parser.add_argument("--anomaly", action="append", default=[],
                        metavar="child=ID,date=YYYY-MM-DD,kind=verbal,factor=0",
                        help="per-date parameter multiplier (repeatable)")
    parser.add_argument("--dry-run", default=None, metavar="DIR",
                        help="write batch documents to DIR instead of posting")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.server is None and args.dry_run is None:
        print("senseme-sim: one of --server or --dry-run is required", file=sys.stderr)
        return 2
    try:
        config = SimConfig(
            seed=args.seed,
            profiles=parse_profiles(Path(args.children).read_text(encoding="utf-8")),
            days=args.days,
            timetable_text=Path(args.timetable).read_text(encoding="utf-8"),
            overrides_text=(Path(args.overrides).read_text(encoding="utf-8")
                            if args.overrides else None),
            start_date=date.fromisoformat(args.start_date),
            server_url=args.server,
            token=args.token,
            dry_run_dir=args.dry_run,
            compress=args.compress,
            p_meet_intra=args.p_meet,
            p_meet_cross=args.p_meet_cross,
            sample_rate=args.sample_rate,
            anomalies=tuple(parse_anomaly_spec(a) for a in args.anomaly),
        )
        report = run(config)
    except (SensemeError, OSError, ValueError) as exc:
        print(f"senseme-sim: {exc}", file=sys.stderr)
        return 2
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())

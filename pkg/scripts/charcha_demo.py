#!/usr/bin/env python3
"""Scripted CHARCHA session demo: drives a synthetic face through the
challenge protocol, writes the landmark trace, and replays it.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from helpers import FULL_PASS, ONE_SHORT, drive_session  # noqa: E402

from mvpipe.charcha import replay_trace, write_trace  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--fail", action="store_true", help="Hold each action one second short.")
    parser.add_argument("--trace", type=Path, default=Path("charcha_trace.ndjson"))
    args = parser.parse_args()

    targets = ONE_SHORT if args.fail else FULL_PASS
    session, frames, _ = drive_session(seed=args.seed, targets=targets)
    write_trace(args.trace, args.seed, frames)
    print(f"live session: {'Passed' if session.verdict else 'Failed'}")
    print(f"wrote {args.trace} ({len(frames)} frames)")

    report, _ = replay_trace(args.trace)
    print(f"replay:       {'Passed' if report['passed'] else 'Failed'}")
    for score in report["scores"]:
        print(f"  {score['action']}: {score['score']}/10")
    if report["spoof_flags"]:
        print(f"  spoof flags: {', '.join(report['spoof_flags'])}")


if __name__ == "__main__":
    main()

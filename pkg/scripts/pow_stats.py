"""Empirical proof-of-work statistics across difficulties.

Mines a run of blocks at each difficulty and reports the distribution of
nonce-search lengths against the geometric expectation of 2^d attempts.

Run:  python3 scripts/pow_stats.py [--blocks N] [--difficulties 4,6,8,10]
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from medalchain.canon import canonical_hash
from medalchain.chain import genesis_block, mine_block
from medalchain.events import EventKind, make_event


def mine_run(difficulty: int, blocks: int) -> tuple[list[int], float]:
    parent = genesis_block().header
    attempts: list[int] = []
    started = time.perf_counter()
    timestamp = 1_000_000
    for i in range(blocks):
        timestamp += 1
        event = make_event(
            EventKind.TOKEN_MINTED,
            {"difficulty": difficulty, "seq": i, "token_id": canonical_hash([difficulty, i])},
            "bench",
            timestamp,
        )
        block = mine_block(parent, [event], difficulty=difficulty, timestamp=timestamp)
        attempts.append(block.header.nonce + 1)  # deterministic search starts at 0
        parent = block.header
    return attempts, time.perf_counter() - started


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--blocks", type=int, default=200)
    parser.add_argument("--difficulties", default="4,6,8,10")
    args = parser.parse_args()
    difficulties = [int(d) for d in args.difficulties.split(",") if d]

    print(f"{args.blocks} blocks per difficulty; expected attempts = 2^d\n")
    header = f"{'d':>3} {'expected':>9} {'mean':>9} {'median':>8} {'p90':>8} {'max':>8} {'blocks/s':>9}"
    print(header)
    print("-" * len(header))
    for d in difficulties:
        attempts, elapsed = mine_run(d, args.blocks)
        ordered = sorted(attempts)
        p90 = ordered[int(0.9 * (len(ordered) - 1))]
        print(
            f"{d:>3} {2**d:>9} {statistics.mean(attempts):>9.1f} "
            f"{statistics.median(attempts):>8.0f} {p90:>8} {max(attempts):>8} "
            f"{args.blocks / elapsed:>9.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())

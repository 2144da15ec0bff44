"""Compare the compiled and pure-Python kernels.

Times the fixpoint iteration over a generated corpus (transfers built once,
outside the timed region) and raw splitmix64 draws.

    python3 benchmarks/bench_kernels.py [--methods N] [--repeat R] [--draws D]
"""

import argparse
import timeit

from molnull import _kernels_py
from molnull.corpus import CorpusSpec, generate_corpus
from molnull.static import build_transfers, fixpoint_analyze


def backends():
    found = {"python": _kernels_py}
    try:
        from molnull import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found


def draw_loop(mod, n):
    rng = mod.SplitMix64(0)
    for _ in range(n):
        rng.next_u64()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--methods", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--draws", type=int, default=200_000)
    args = ap.parse_args()

    program, _ = generate_corpus(CorpusSpec(method_count=args.methods, seed=42))
    transfers = build_transfers(program)
    mods = backends()
    if "cython" not in mods:
        print("compiled extension not built; timing the pure-Python kernels only")

    rows = []
    for name, mod in mods.items():
        fix = min(timeit.repeat(lambda: fixpoint_analyze(program, transfers=transfers, backend=mod),
                                number=1, repeat=args.repeat))
        rng = min(timeit.repeat(lambda: draw_loop(mod, args.draws), number=1, repeat=args.repeat))
        rows.append((name, fix, rng))

    print(f"corpus: {len(program.methods)} methods, {len(transfers)} transfers")
    print(f"{'backend':<8} {'fixpoint ms':>12} {'splitmix ns/draw':>17}")
    for name, fix, rng in rows:
        print(f"{name:<8} {fix * 1e3:>12.2f} {rng / args.draws * 1e9:>17.1f}")
    if len(rows) == 2:
        (_, fp, rp), (_, fc, rc) = rows
        print(f"speedup: fixpoint x{fp / fc:.1f}, splitmix x{rp / rc:.1f}")


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Reports the best of N runs per kernel and the speedup of the compiled one.
"""
import argparse
import random
import sys
import timeit

from gridauth import _pykernels
from gridauth.group import get_profile

try:
    from gridauth import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    out = []
    for name in ("p256", "secp256k1"):
        curve = get_profile(name)
        ks = [rng.randrange(1, curve.q) for _ in range(20)]

        def run(mod, ks=ks, c=curve):
            return [mod.ec_mul(k, c.gx, c.gy, c.c, c.p) for k in ks]
        out.append(("ec_mul %s x20" % name, run))

    word = bytes(rng.getrandbits(1) for _ in range(640))
    out.append(("majority_decode n=640 x200",
                lambda mod: [mod.majority_decode(word, 5) for _ in range(200)]))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed", file=sys.stderr)
    print("%-30s %12s %12s %9s" % ("kernel", "python ms", "compiled ms", "speedup"))
    for label, fn in cases(random.Random(0)):
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print("%-30s %12.2f %12s %9s" % (label, py, "-", "-"))
            continue
        assert fn(_ckernels) == fn(_pykernels)
        c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print("%-30s %12.2f %12.2f %8.1fx" % (label, py, c, py / c))


if __name__ == "__main__":
    main()

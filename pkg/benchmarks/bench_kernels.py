"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--program PATH]

Reports per-call timings for the two kernels and the wall time of a full
machine run under each backend (the machine run uses a fresh interpreter with
SRSIM_PURE set or unset, since the backend is chosen at import).
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit
from pathlib import Path

from srsim import _pykernels

try:
    from srsim import _speedups
except ImportError:
    _speedups = None

HERE = Path(__file__).resolve().parent
DEFAULT_PROGRAM = HERE.parent / "tests" / "programs" / "memcpy.hs.s"

_RUN_SNIPPET = """
import sys, time
from srsim import kernels
from srsim.assembler import assemble
from srsim.instrumenter import Policy, instrument
from srsim.machine import Machine
img = assemble(instrument(open(sys.argv[1]).read(), Policy()))
best = None
for _ in range(int(sys.argv[2])):
    m = Machine(); m.load_image(img)
    t = time.perf_counter(); out = m.run(); t = time.perf_counter() - t
    best = t if best is None else min(best, t)
print(kernels.BACKEND, out.steps, best)
"""


def bench_kernels(number: int) -> list[tuple[str, str, float]]:
    rng = random.Random(1)
    entries = [(b, b + rng.choice((8, 16, 64))) for b in
               (0x1000 + 0x40 * rng.randrange(64) for _ in range(16))]
    probes = [(0x1000 + rng.randrange(0x1000), rng.choice((1, 4))) for _ in range(64)]
    words = [rng.getrandbits(32) for _ in range(64)]
    impls = [("python", _pykernels)] + ([("cython", _speedups)] if _speedups else [])
    rows = []
    for name, mod in impls:
        lc, df = mod.last_containing, mod.decode_fields

        def scan():
            for a, s in probes:
                lc(entries, a, a + s)

        def decode():
            for w in words:
                df(w)

        for kernel, fn, calls in (("last_containing", scan, len(probes)),
                                  ("decode_fields", decode, len(words))):
            t = min(timeit.repeat(fn, number=number, repeat=5))
            rows.append((kernel, name, 1e9 * t / (number * calls)))
    return rows


def bench_machine(program: Path, repeat: int) -> list[tuple[str, int, float]]:
    out = []
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("SRSIM_PURE", None)
        if pure:
            env["SRSIM_PURE"] = "1"
        res = subprocess.run([sys.executable, "-c", _RUN_SNIPPET, str(program), str(repeat)],
                             env=env, capture_output=True, text=True, check=True)
        backend, steps, secs = res.stdout.split()
        out.append((backend, int(steps), float(secs)))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=2000, help="timeit loop count")
    ap.add_argument("--repeat", type=int, default=3, help="machine runs per backend (best kept)")
    ap.add_argument("--program", type=Path, default=DEFAULT_PROGRAM)
    args = ap.parse_args(argv)

    if _speedups is None:
        print("note: compiled extension not built; only the fallback is timed")
    print(f"{'kernel':16s} {'backend':8s} {'ns/call':>9s}")
    for kernel, backend, ns in bench_kernels(args.number):
        print(f"{kernel:16s} {backend:8s} {ns:9.1f}")
    print()
    print(f"{'machine run':16s} {'backend':8s} {'steps':>9s} {'seconds':>9s} {'steps/s':>10s}")
    for backend, steps, secs in bench_machine(args.program, args.repeat):
        print(f"{args.program.name.split(".")[0]:16s} {backend:8s} {steps:9d} {secs:9.4f} {steps / secs:10.0f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

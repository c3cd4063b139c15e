"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--trials 2000]

Kernel timings call both backends in-process. The end-to-end Monte Carlo run
is done in subprocesses, one per backend, so the import-time selection
(``CAVITY_TELEPORT_PURE=1`` forces numpy) is what gets measured.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cavity_teleport import _kernels_py

try:
    from cavity_teleport import _kernels as _compiled
except ImportError:
    _compiled = None

E2E = """
import time
from cavity_teleport import kernels
from cavity_teleport.analysis import ProtocolParams, monte_carlo
from cavity_teleport.protocol import ChannelSpec, InputState
ch = ChannelSpec(0.8 ** 0.5, 0.2 ** 0.5)
t0 = time.perf_counter()
mc = monte_carlo("nonmaximal", ProtocolParams(InputState(0.6, 0.8), (ch, ch)), {trials}, seed=1)
print(kernels.BACKEND, time.perf_counter() - t0, mc.success_rate)
"""


def _time(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def kernel_table(sizes):
    rng = np.random.default_rng(0)
    u2 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    u4 = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    backends = [b for b in (_compiled, _kernels_py) if b is not None]
    print(f"{'kernel':<10}{'n':>4}" + "".join(f"{b.BACKEND + ' us':>14}" for b in backends)
          + f"{'speedup':>10}")
    for n in sizes:
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        number = max(10, 20000 >> n)
        calls = {
            "apply_1q": lambda b: b.apply_1q(psi, n, n // 2, u2),
            "apply_2q": lambda b: b.apply_2q(psi, n, 0, n - 1, u4),
            "marginal": lambda b: b.marginal(psi, n, [0, n - 1]),
            "select": lambda b: b.select(psi, n, [1, 0], 2),
        }
        for name, call in calls.items():
            ts = [_time(lambda: call(b), number) * 1e6 for b in backends]
            speed = f"{ts[-1] / ts[0]:>9.1f}x" if len(ts) == 2 else ""
            print(f"{name:<10}{n:>4}" + "".join(f"{t:>14.2f}" for t in ts) + speed)


def end_to_end(trials):
    print(f"\nMonte Carlo, nonmaximal scheme, {trials} trials")
    for pure in ("0", "1"):
        env = dict(os.environ, CAVITY_TELEPORT_PURE=pure)
        out = subprocess.run([sys.executable, "-c", E2E.format(trials=trials)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        backend, secs, rate = out[0], float(out[1]), out[2]
        print(f"  {backend:<8}{secs:8.2f} s  {secs / trials * 1e6:8.1f} us/trial  rate {rate}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="6,10,14,18")
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; showing numpy only")
    kernel_table([int(s) for s in args.sizes.split(",")])
    end_to_end(args.trials)


if __name__ == "__main__":
    main()

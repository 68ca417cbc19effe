"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from haardial import _fallback
from haardial.circuit import circuit_program, program_gates
from haardial.sampler import sample_parameters

try:
    from haardial import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases():
    m, batch = 8, 2048
    prog = circuit_program(m, "rectangular")
    params = sample_parameters(m, "rectangular", "reflectivity", 1, np.arange(batch))
    gates = program_gates(prog, "reflectivity", *params)
    eye = np.zeros((batch, m, m), dtype=np.complex128)
    eye[:, np.arange(m), np.arange(m)] = 1.0
    rng = np.random.default_rng(0)
    z = rng.normal(size=(batch, m, m)) + 1j * rng.normal(size=(batch, m, m))
    circuits = np.arange(20_000, dtype=np.uint64)
    tags = np.arange(64, dtype=np.uint64)
    return {
        "stream_uniforms 20000x64": lambda k: k.stream_uniforms(123, circuits, tags),
        f"apply_program m={m} B={batch}": lambda k: k.apply_program(eye.copy(), prog.ops, gates),
        f"householder_qr m={m} B={batch}": lambda k: k.householder_qr(z),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'kernel':<34}" + "".join(f"{name:>12}" for name, _ in backends) + "   speedup")
    for label, fn in _cases().items():
        times = [min(timeit.repeat(lambda k=k: fn(k), number=1, repeat=args.repeat))
                 for _, k in backends]
        row = f"{label:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"   {times[0] / times[1]:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()

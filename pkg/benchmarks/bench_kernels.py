"""Compare the compiled and pure-Python metric kernels.

    python benchmarks/bench_kernels.py --repeat 5
"""

from __future__ import annotations

import argparse
import random
import timeit

from gsn_forge.metrics import _kernels_py

try:
    from gsn_forge.metrics import _kernels
except ImportError:
    _kernels = None


def lcs_inputs(rng: random.Random, n: int) -> tuple[str, str]:
    alphabet = "abcdefghijklmnopqrstuvwxyz -:\n"
    a = "".join(rng.choice(alphabet) for _ in range(n))
    b = "".join(rng.choice(alphabet) for _ in range(n))
    return a, b


def kendall_inputs(rng: random.Random, n: int) -> tuple[list[int], list[int]]:
    return [rng.randint(1, 5) for _ in range(n)], [rng.randint(1, 5) for _ in range(n)]


def best_of(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--lcs-sizes", default="500,2000,8000")
    parser.add_argument("--kendall-sizes", default="50,200,1000")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = random.Random(args.seed)
    if _kernels is None:
        print("compiled kernels not built; only the Python timings are shown")
    print(f"{'kernel':8s} {'n':>6s} {'python ms':>11s} {'cython ms':>11s} {'speedup':>8s}")

    cases = [("lcs", int(n), lcs_inputs) for n in args.lcs_sizes.split(",")]
    cases += [("kendall", int(n), kendall_inputs) for n in args.kendall_sizes.split(",")]
    for name, n, make in cases:
        x, y = make(rng, n)
        py_fn = getattr(_kernels_py, "lcs_length" if name == "lcs" else "kendall_counts")
        number = 3 if n >= 2000 else 20
        t_py = best_of(lambda: py_fn(x, y), args.repeat, number)
        if _kernels is None:
            print(f"{name:8s} {n:6d} {t_py * 1e3:11.3f} {'-':>11s} {'-':>8s}")
            continue
        c_fn = getattr(_kernels, "lcs_length" if name == "lcs" else "kendall_counts")
        assert tuple(c_fn(x, y)) == tuple(py_fn(x, y)) if name == "kendall" else c_fn(x, y) == py_fn(x, y)
        t_c = best_of(lambda: c_fn(x, y), args.repeat, number)
        print(f"{name:8s} {n:6d} {t_py * 1e3:11.3f} {t_c * 1e3:11.3f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()

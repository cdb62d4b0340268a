import os
import random
import subprocess
import sys

import pytest

from gsn_forge.metrics import _backend, _kernels_py

compiled = pytest.importorskip("gsn_forge.metrics._kernels")


def test_lcs_parity():
    rng = random.Random(21)
    for _ in range(1000):
        alphabet = rng.choice(["ab", "abcdefgh", "αβγ😀"])
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 200)))
        assert compiled.lcs_length(a, b) == _kernels_py.lcs_length(a, b)


def test_kendall_parity():
    rng = random.Random(22)
    for _ in range(300):
        n = rng.randint(2, 60)
        x = [rng.randint(1, 5) for _ in range(n)]
        y = [rng.uniform(0, 3) if rng.random() < 0.3 else rng.randint(1, 5) for _ in range(n)]
        assert tuple(compiled.kendall_counts(x, y)) == _kernels_py.kendall_counts(x, y)


def test_non_numeric_ordinals_fall_back():
    assert _backend.kendall_counts(["a", "b", "c"], ["a", "c", "b"]) == _kernels_py.kendall_counts(
        ["a", "b", "c"], ["a", "c", "b"]
    )


def test_env_forces_python_fallback():
    env = dict(os.environ, GSNFORGE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from gsn_forge.metrics import BACKEND, exact_match; print(BACKEND, exact_match('abcd','abce'))"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.split() == ["python", "0.75"]

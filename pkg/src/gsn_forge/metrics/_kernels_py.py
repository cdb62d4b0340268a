"""Pure-Python kernels, used when the compiled extension is unavailable.

``lcs_length`` uses the bit-parallel LCS recurrence with Python integers as
arbitrary-width bit vectors.  ``kendall_counts`` is Knight's O(n log n)
algorithm.
"""

from __future__ import annotations


def lcs_length(a: str, b: str) -> int:
    """Length of the longest common subsequence of ``a`` and ``b``."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    # Bit i of masks[ch] is set when b[i] == ch; b is the shorter string.
    masks: dict[str, int] = {}
    for i, ch in enumerate(b):
        masks[ch] = masks.get(ch, 0) | (1 << i)
    width = len(b)
    full = (1 << width) - 1
    v = full
    for ch in a:
        m = masks.get(ch)
        if m is None:
            continue
        u = v & m
        v = ((v + u) | (v - u)) & full
    return width - bin(v).count("1")


def _merge_count(values: list, lo: int, hi: int, buf: list) -> int:
    """Sort ``values[lo:hi]`` in place, returning the number of inversions."""
    if hi - lo < 2:
        return 0
    mid = (lo + hi) // 2
    swaps = _merge_count(values, lo, mid, buf) + _merge_count(values, mid, hi, buf)
    i, j, k = lo, mid, lo
    while i < mid and j < hi:
        if values[j] < values[i]:
            buf[k] = values[j]
            swaps += mid - i
            j += 1
        else:
            buf[k] = values[i]
            i += 1
        k += 1
    while i < mid:
        buf[k] = values[i]
        i += 1
        k += 1
    while j < hi:
        buf[k] = values[j]
        j += 1
        k += 1
    values[lo:hi] = buf[lo:hi]
    return swaps


def _tied_pairs(sorted_values: list) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def kendall_counts(x, y) -> tuple[int, int, int, int]:
    """``(concordant, discordant, ties_only_x, ties_only_y)`` over all pairs."""
    n = len(x)
    pairs = sorted(zip(x, y))
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs([p[0] for p in pairs])
    n3 = _tied_pairs(pairs)
    ys = [p[1] for p in pairs]
    swaps = _merge_count(ys, 0, n, [None] * n)
    n2 = _tied_pairs(ys)
    # Pairs untied in both coordinates; with x-ties ordered by y, every
    # strict inversion left in ys is a discordant pair.
    untied = n0 - n1 - n2 + n3
    return untied - swaps, swaps, n1 - n3, n2 - n3

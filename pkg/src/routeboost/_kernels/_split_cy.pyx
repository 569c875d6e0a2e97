# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled best-split scan.

Mirror of ``_split_py.scan_split``: same operation order, same IEEE-754
arithmetic (built without -ffast-math), so both backends produce
bit-identical trees.
"""


def scan_split(const double[::1] xs, const double[::1] ys, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = xs.shape[0]
    cdef double total = 0.0
    cdef double total_sq = 0.0
    cdef double v
    cdef Py_ssize_t i
    for i in range(n):
        v = ys[i]
        total += v
        total_sq += v * v

    cdef Py_ssize_t best_pos = -1
    cdef double best_thr = 0.0
    cdef double best_score = float("inf")
    cdef double left_sum = 0.0
    cdef double left_sq = 0.0
    cdef double a, b, right_sum, right_sq, score, thr
    for i in range(1, n):
        v = ys[i - 1]
        left_sum += v
        left_sq += v * v
        if i < min_leaf or n - i < min_leaf:
            continue
        a = xs[i - 1]
        b = xs[i]
        if a == b:
            continue
        right_sum = total - left_sum
        right_sq = total_sq - left_sq
        score = (left_sq - left_sum * left_sum / i) + (
            right_sq - right_sum * right_sum / (n - i)
        )
        if score < best_score:
            best_score = score
            best_pos = i
            thr = (a + b) / 2.0
            if thr == b:
                thr = a
            best_thr = thr
    if best_pos < 0:
        return None
    return best_pos, best_thr, best_score

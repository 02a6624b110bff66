"""Literal transcription of the index formulas, written independently of the engine.

Values are Fractions, or the string "inf".  Every function returns either a
value or an error tag ("classic", "negative", "pre") so that outcomes can be
compared with the engine including failures.
"""
from fractions import Fraction as F

H = F(1, 2)


def _min(*xs):
    fin = [x for x in xs if x != "inf"]
    return min(fin) if fin else "inf"


def _classic_bad(r, q, k, mode):
    return mode == "classic" and (q > r or k > r)


def solution(r, q, k, beta, mode):
    if q < 0:
        return "negative"
    if _classic_bad(r, q, k, mode):
        return "classic"
    if mode == "classic":
        return q
    return _min(q, r + H)


def perturbed(r, q, k, beta, mode):
    if _classic_bad(r, q, k, mode):
        return "classic"
    if not k <= r:
        return "pre"
    remark = _min(q, k)
    lemma = remark if mode == "classic" else _min(q, k + H)
    return (remark, lemma)


def md(r, q, k, beta, mode):
    if _classic_bad(r, q, k, mode):
        return "classic"
    if not (r >= 1 and q >= 1 and 1 <= k <= r):
        return "pre"
    if beta == 0:
        return _min(q, k)
    return _min(q, r - H, k)


def md_m(r, q, k, beta, mode):
    if _classic_bad(r, q, k, mode):
        return "classic"
    if not (r >= 1 and q >= 1 and 1 <= k <= r):
        return "pre"
    return _min(q, r - H, k + H)


def sd(r, q, k, beta, mode):
    if _classic_bad(r, q, k, mode):
        return "classic"
    if not (r >= 1 and q >= 0 and k <= r):
        return "pre"
    if mode == "classic":
        return _min(q - 1, k + H)
    return _min(q - 1, r - H, k + H)


def data(r, q, k, beta, mode):
    m = md_m(r, q, k, beta, mode)
    s = sd(r, q, k, beta, mode)
    if isinstance(m, str):
        return m
    if isinstance(s, str):
        return s
    return (-1 + _min(q, k), -H + m, H + s, -H + s)


def cauchy(r, q, k, beta, mode):
    a = md(r, q, k, beta, mode)
    b = sd(r, q, k, beta, mode)
    if isinstance(a, str):
        return a
    if isinstance(b, str):
        return b
    return (a, b)


# ---------------------------------------------------------------------------
# grid comparison against the engine

def compare_grid(rs=range(1, 7), qs=None, ks=None, betas=range(4), modes=("classic", "sharp")):
    """Compare every engine operation with the transcription on a grid.

    ``ks`` defaults to ``0..r`` for each ``r``.  Returns ``(cases, mismatches)``.
    """
    import itertools

    from ..regularity import (ClassicModeRange, Mode, NegativeIndex, PreconditionViolated,
                              RegularityQuery, SobolevIndex, cauchy_indices, datum_indices,
                              md_boundary_index, md_index, perturbed_index, sd_index,
                              solution_index)

    qs = [F(n, 2) for n in range(0, 14)] if qs is None else qs

    def engine(fn, query):
        try:
            out = fn(query)
        except ClassicModeRange:
            return "classic"
        except NegativeIndex:
            return "negative"
        except PreconditionViolated:
            return "pre"
        return out

    def plain(x):
        if isinstance(x, SobolevIndex):
            return "inf" if x.is_infinite else x.value
        return tuple(plain(v) for v in x)

    pairs = [(solution_index, solution), (perturbed_index, perturbed), (md_index, md),
             (md_boundary_index, md_m), (sd_index, sd), (datum_indices, data),
             (cauchy_indices, cauchy)]
    cases = 0
    mismatches = []
    for r in rs:
        for q, k, beta, mode in itertools.product(qs, ks if ks is not None else range(r + 1),
                                                  betas, modes):
            query = RegularityQuery(r, q, k, beta, Mode(mode))
            for fn, ref in pairs:
                got = engine(fn, query)
                got = got if isinstance(got, str) else plain(got)
                want = ref(F(r), q, F(k), beta, mode)
                cases += 1
                if got != want:
                    mismatches.append({"op": fn.__name__, "r": r, "q": str(q), "k": k,
                                       "beta": beta, "mode": mode, "got": str(got),
                                       "want": str(want)})
    return cases, mismatches

"""Literal transcription of the index formulas, kept free of package imports.

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

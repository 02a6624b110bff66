import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import regularity_oracle as oracle
from helmshape.regularity import (
    HALF, INF, Carrier, ClassicModeRange, Mode, NegativeIndex, PreconditionViolated,
    ProblemKind, RegularityQuery, SobolevIndex, Weighting, cauchy_indices,
    datum_indices, md_boundary_index, md_index, parse_space, perturbed_index,
    regularity_report, render_space, sd_index, smin, solution_index,
)


def Q(r, q, k=0, beta=0, mode="sharp", **kw):
    return RegularityQuery(r, q, k, beta, Mode(mode), **kw)


# --- SobolevIndex ---------------------------------------------------------

@pytest.mark.parametrize("text,value", [
    ("3/2", F(3, 2)), ("-1/2", F(-1, 2)), ("−1/2", F(-1, 2)), ("0.5", F(1, 2)),
    ("2", F(2)), (" 7/4 ", F(7, 4)), ("-0.25", F(-1, 4)),
])
def test_parse_number(text, value):
    assert SobolevIndex(text).value == value


def test_infinity():
    assert SobolevIndex("inf").is_infinite
    assert SobolevIndex("∞") == INF
    assert smin(3, INF) == 3
    assert INF + 1 == INF
    assert INF - HALF == INF
    assert SobolevIndex(100) < INF
    with pytest.raises(ValueError):
        SobolevIndex(1) - INF


@pytest.mark.parametrize("bad", ["1/3", 0.1, "x", "1/2/3"])
def test_rejects_non_dyadic(bad):
    with pytest.raises(ValueError):
        SobolevIndex(bad)


def test_arithmetic_exact():
    s = SobolevIndex("1/2") + "1/4" - 1
    assert s == F(-1, 4)
    assert str(s) == "-1/4"
    assert s.pretty() == "−1/4"
    assert 1 - SobolevIndex(HALF) == HALF


# --- examples -------------------------------------------------------------

@pytest.mark.parametrize("query,expected", [
    (Q(2, 2, mode="classic"), 2),
    (Q(1, 3), F(3, 2)),
    (Q(0, 0), 0),
])
def test_solution_index_examples(query, expected):
    assert solution_index(query) == expected


def test_solution_index_errors():
    with pytest.raises(ClassicModeRange):
        solution_index(Q(1, 2, mode="classic"))
    with pytest.raises(NegativeIndex):
        Q(1, -1)


@pytest.mark.parametrize("query,composed,uncomposed", [
    (Q(2, 2, 1), 1, F(3, 2)),
    (Q(3, 1, 3), 1, 1),
    (Q(3, 3, 1), 1, F(3, 2)),
    (Q(3, 3, 1, mode="classic"), 1, 1),
])
def test_perturbed_index_examples(query, composed, uncomposed):
    assert perturbed_index(query) == (composed, uncomposed)


@pytest.mark.parametrize("query,expected", [
    (Q(3, 2, 1, 1), 1),
    (Q(2, 2, 2, 0), 2),
    (Q(1, 1, 1, 2), F(1, 2)),
])
def test_md_index_examples(query, expected):
    assert md_index(query) == expected


@pytest.mark.parametrize("query,bound", [
    (Q(1, F(1, 2), 1, 1), "q ≥ 1"),
    (Q(0, 1, 0, 1), "r ≥ 1"),
    (Q(2, 2, 0, 1), "k ≥ 1"),
    (Q(2, 2, 3, 1), "k ≤ r"),
])
def test_md_preconditions_name_bound(query, bound):
    with pytest.raises(PreconditionViolated) as exc:
        md_index(query)
    assert exc.value.bound == bound
    assert bound in str(exc.value)


@pytest.mark.parametrize("query,expected", [
    (Q(2, 2, 1), 1),
    (Q(3, 4, 1), F(3, 2)),
    (Q(1, 1, 0), 0),
])
def test_sd_index_examples(query, expected):
    assert sd_index(query) == expected


def test_datum_indices_examples():
    d = datum_indices(Q(2, 2, 1, 1))
    assert (d.f, d.m, d.g_dirichlet, d.g_neumann) == (0, 1, F(3, 2), F(1, 2))
    assert datum_indices(Q(1, 1, 1, 1)).m == 0
    assert datum_indices(Q(5, 1, 1, 1)).f == 0


def test_cauchy_indices_examples():
    assert cauchy_indices(Q(2, 2, 2, 0)) == (2, 1)
    assert cauchy_indices(Q(1, 1, 1, 3)).cmd == HALF


def test_md_boundary_index_exposed_separately():
    q = Q(3, 3, 1, 1)
    assert md_index(q) == 1
    assert md_boundary_index(q) == F(3, 2)


def test_half_k_flag():
    with pytest.raises(ValueError):
        Q(2, 2, HALF)
    assert sd_index(Q(2, 2, F(3, 2), half_k=True)) == 1


# --- rendering ------------------------------------------------------------

def test_render_examples():
    assert render_space(F(5, 2), Carrier.VOLUME_PAIR, Weighting.LOC) == \
        "H^{5/2}_loc(D^c) × H^{5/2}(D)"
    assert render_space(0, Carrier.BOUNDARY_PAIR) == "H^{1/2}(Γ) × H^{−1/2}(Γ)"
    assert render_space(HALF, Carrier.BOUNDARY_PAIR, compact=True) == "ℍ^{1/2}(Γ)"
    assert render_space(1, Carrier.VOLUME_EXTERIOR, Weighting.KAPPA) == "H^{1}_κ(D^c)"


half_ints = st.integers(-20, 20).map(lambda n: SobolevIndex(F(n, 2)))


@settings(max_examples=100, deadline=None)
@given(s=half_ints, carrier=st.sampled_from(list(Carrier)),
       weighting=st.sampled_from(list(Weighting)), compact=st.booleans())
def test_render_parse_roundtrip(s, carrier, weighting, compact):
    text = render_space(s, carrier, weighting, compact=compact)
    idx, car, w = parse_space(text)
    assert idx == s and car is carrier
    if carrier in (Carrier.VOLUME_EXTERIOR, Carrier.VOLUME_PAIR):
        assert w is weighting
    assert render_space(idx, car, w, compact=compact) == text


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_space("L^2(Γ)")
    with pytest.raises(ValueError):
        parse_space("H^{1}(Γ) × H^{1}(Γ)")


# --- oracle equivalence ---------------------------------------------------

GRID_R = range(0, 7)
GRID_Q = [F(n, 2) for n in range(0, 15)]
GRID_K = range(0, 7)


def _engine(fn, query):
    try:
        out = fn(query)
    except ClassicModeRange:
        return "classic"
    except NegativeIndex:
        return "negative"
    except PreconditionViolated:
        return "pre"
    return out


def _fr(x):
    if isinstance(x, SobolevIndex):
        return "inf" if x.is_infinite else x.value
    return tuple(_fr(v) for v in x)


def test_oracle_equivalence_grid():
    pairs = [
        (solution_index, oracle.solution), (perturbed_index, oracle.perturbed),
        (md_index, oracle.md), (md_boundary_index, oracle.md_m), (sd_index, oracle.sd),
        (datum_indices, oracle.data), (cauchy_indices, oracle.cauchy),
    ]
    mismatches = []
    for r, q, k, beta, mode in itertools.product(GRID_R, GRID_Q, GRID_K, range(4),
                                                 ("classic", "sharp")):
        query = Q(r, q, k, beta, mode)
        for fn, ref in pairs:
            got = _engine(fn, query)
            got = got if isinstance(got, str) else _fr(got)
            want = ref(F(r), q, F(k), beta, mode)
            if got != want:
                mismatches.append((fn.__name__, r, q, k, beta, mode, got, want))
    assert mismatches == []


# --- properties -----------------------------------------------------------

rs = st.integers(1, 6)
qs = st.integers(2, 14).map(lambda n: F(n, 2))
ks = st.integers(1, 6)


def _ok(fn, query):
    try:
        return fn(query)
    except (ClassicModeRange, PreconditionViolated):
        return None


@settings(max_examples=300, deadline=None)
@given(r=rs, q=qs, k=ks, beta=st.integers(0, 3), mode=st.sampled_from(["classic", "sharp"]),
       which=st.sampled_from(["r", "q", "k"]))
def test_monotone(r, q, k, beta, mode, which):
    base = dict(r=r, q=q, k=k)
    bumped = dict(base)
    bumped[which] += HALF.value if which == "q" else 1
    for fn in (solution_index, md_index, sd_index):
        a = _ok(fn, Q(beta=beta, mode=mode, **base))
        b = _ok(fn, Q(beta=beta, mode=mode, **bumped))
        if a is not None and b is not None:
            assert a <= b


@settings(max_examples=200, deadline=None)
@given(r=rs, q=qs, k=ks)
def test_dominance(r, q, k):
    c = _ok(solution_index, Q(r, q, k, mode="classic"))
    if c is not None:
        assert solution_index(Q(r, q, k)) >= c
    m0 = _ok(md_index, Q(r, q, k, 0))
    if m0 is not None:
        for beta in (1, 2, 3):
            assert m0 >= md_index(Q(r, q, k, beta))


@given(r=st.integers(0, 6), extra=st.integers(1, 10))
def test_saturation(r, extra):
    q = r + HALF + SobolevIndex(F(extra - 1, 2))
    assert solution_index(Q(r, q, r)) == r + HALF


@settings(max_examples=200, deadline=None)
@given(r=rs, q=qs, k=st.integers(0, 6), mode=st.sampled_from(["classic", "sharp"]))
def test_consistency_g_offsets(r, q, k, mode):
    query = Q(r, q, k, 1, mode)
    try:
        d = datum_indices(query)
    except (ClassicModeRange, PreconditionViolated):
        return
    s = sd_index(query)
    assert d.g_neumann == s - HALF
    assert d.g_dirichlet == s + HALF


def test_consistency_exhaustive():
    for r, q, k in itertools.product(range(1, 7), [F(n, 2) for n in range(2, 15)], range(1, 7)):
        query = Q(r, q, k, 2)
        if k > r:
            continue
        d = datum_indices(query)
        assert d.g_neumann == sd_index(query) - HALF
        assert d.g_dirichlet == sd_index(query) + HALF


@pytest.mark.parametrize("r", range(2, 7))
def test_one_order_loss_when_domain_binds(r):
    # q = r and k large enough that r - 1/2 never beats k + 1/2
    for k in range(r - 1, r + 1):
        if k + F(3, 2) > r:
            assert sd_index(Q(r, r, k)) == solution_index(Q(r, r, k, mode="classic")) - 1


@pytest.mark.parametrize("r,k", [(r, k) for r in range(2, 8) for k in range(0, r) if r >= k + F(3, 2)])
def test_velocity_binds_when_smooth_domain(r, k):
    # with r ≥ k + 3/2 the velocity term k + 1/2 binds instead
    assert sd_index(Q(r, r, k)) == k + HALF
    assert sd_index(Q(r, r, k)) < solution_index(Q(r, r, k, mode="classic")) - 1


def test_report_json_shape():
    d = regularity_report(Q(2, 2, 1, 1)).to_dict()
    assert d["md"] == {"index": "1", "space": "H^{2}_loc(D^c)"}
    assert d["sd"]["index"] == "1"
    assert set(d["data"]) == {"f", "m", "g0", "g1"}
    assert d["cauchy"]["md"]["space"] == "H^{3/2}(Γ) × H^{1/2}(Γ)"
    assert d["perturbed"]["lemma"]["index"] == "3/2"
    r3 = regularity_report(Q(1, 1, 1, 3)).to_dict()
    assert r3["solution"]["space"].endswith("× H^{2}(D)")

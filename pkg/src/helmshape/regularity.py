"""Exact Sobolev-index arithmetic for Helmholtz scattering and its domain derivatives.

Every index handled here is a dyadic rational (in practice a multiple of 1/2)
or the sentinel ``+inf``.  Three integers-or-halves drive everything:

``r``
    domain class, the boundary is ``C^{r,1}``;
``q``
    smoothness of the incident Cauchy data;
``k``
    smoothness of the velocity field, ``v in W^{k+1,inf}``.

The functions below return the smoothness of the solution, of the perturbed
solution, of the material and shape derivatives, of the data of their
boundary value problems, and of the derivatives of the Cauchy data.  Spaces are
rendered as text with :func:`render_space` and parsed back with
:func:`parse_space`.

Cauchy-pair convention: ``ℍ^s(Γ) = H^{s+1/2}(Γ) × H^{s-1/2}(Γ)`` so that
``ℍ^0(Γ) = H^{1/2}(Γ) × H^{-1/2}(Γ)`` is the natural trace space.
"""
from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Union

__all__ = [
    "SobolevIndex", "INF", "HALF", "ProblemKind", "Mode", "Carrier", "Weighting",
    "RegularityQuery", "RegularityError", "NegativeIndex", "ClassicModeRange",
    "PreconditionViolated", "PerturbedIndex", "DatumIndices", "CauchyIndices",
    "RegularityReport", "solution_index", "perturbed_index", "md_index",
    "md_boundary_index", "sd_index", "datum_indices", "cauchy_indices",
    "regularity_report", "render_space", "parse_space", "smin",
]

IndexLike = Union["SobolevIndex", int, Fraction, str, float]


class RegularityError(ValueError):
    """Base class for invalid regularity queries."""


class NegativeIndex(RegularityError):
    pass


class ClassicModeRange(RegularityError):
    pass


class PreconditionViolated(RegularityError):
    """A hypothesis of a regularity result does not hold.

    ``bound`` holds the violated inequality, e.g. ``"q ≥ 1"``.
    """

    def __init__(self, bound: str, context: str = ""):
        self.bound = bound
        self.context = context
        msg = f"requires {bound}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


def _is_dyadic(fr: Fraction) -> bool:
    d = fr.denominator
    return d & (d - 1) == 0


@functools.total_ordering
class SobolevIndex:
    """Exact smoothness exponent: a dyadic rational or ``+inf``."""

    __slots__ = ("_value",)

    def __init__(self, value: IndexLike):
        tp = type(value)
        if tp is SobolevIndex:
            self._value = value._value
            return
        if tp is int:
            self._value = Fraction(value)
            return
        if isinstance(value, SobolevIndex):
            self._value = value._value
            return
        if isinstance(value, str):
            value = _parse_number(value)
        elif isinstance(value, float):
            if value == float("inf"):
                value = None
            else:
                fr = Fraction(value)
                if fr.denominator > 1024:
                    raise ValueError(f"{value!r} is not a dyadic rational")
                value = fr
        elif isinstance(value, (int, Fraction)):
            value = Fraction(value)
        elif value is not None:
            raise TypeError(f"cannot build SobolevIndex from {type(value).__name__}")
        if value is not None and not _is_dyadic(value):
            raise ValueError(f"{value} is not a dyadic rational")
        self._value: Optional[Fraction] = value

    @property
    def is_infinite(self) -> bool:
        return self._value is None

    @property
    def value(self) -> Optional[Fraction]:
        """The exact value, ``None`` for ``+inf``."""
        return self._value

    def is_integer(self) -> bool:
        return self._value is not None and self._value.denominator == 1

    def is_half_integer(self) -> bool:
        """True for multiples of 1/2 (integers included)."""
        return self._value is not None and (2 * self._value).denominator == 1

    def __add__(self, other: IndexLike) -> "SobolevIndex":
        other = SobolevIndex(other)
        if self.is_infinite or other.is_infinite:
            return INF
        return SobolevIndex(self._value + other._value)

    __radd__ = __add__

    def __sub__(self, other: IndexLike) -> "SobolevIndex":
        other = SobolevIndex(other)
        if other.is_infinite:
            raise ValueError("cannot subtract +inf")
        if self.is_infinite:
            return INF
        return SobolevIndex(self._value - other._value)

    def __rsub__(self, other: IndexLike) -> "SobolevIndex":
        return SobolevIndex(other) - self

    def __neg__(self) -> "SobolevIndex":
        if self.is_infinite:
            raise ValueError("cannot negate +inf")
        return SobolevIndex(-self._value)

    def __eq__(self, other: object) -> bool:
        if type(other) is not SobolevIndex:
            try:
                other = SobolevIndex(other)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                return NotImplemented
        return self._value == other._value

    def __lt__(self, other: IndexLike) -> bool:
        if type(other) is not SobolevIndex:
            other = SobolevIndex(other)
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self._value < other._value

    def __hash__(self) -> int:
        return hash(("SobolevIndex", self._value))

    def __repr__(self) -> str:
        return f"SobolevIndex({str(self)!r})"

    def __str__(self) -> str:
        if self._value is None:
            return "inf"
        return str(self._value)

    def pretty(self) -> str:
        """Typeset form used inside rendered spaces (``−``, ``∞``)."""
        if self._value is None:
            return "∞"
        return str(self._value).replace("-", "−")

    def __float__(self) -> float:
        return float("inf") if self._value is None else float(self._value)


INF = SobolevIndex(None)  # type: ignore[arg-type]
HALF = SobolevIndex(Fraction(1, 2))

_NUMBER = re.compile(r"^\s*([+\-−]?)\s*(\d+)(?:\s*/\s*(\d+)|\.(\d+))?\s*$")


def _parse_number(text: str) -> Optional[Fraction]:
    t = text.strip()
    if t in ("inf", "+inf", "∞", "+∞", "infinity"):
        return None
    m = _NUMBER.match(t)
    if not m:
        raise ValueError(f"cannot parse index {text!r}")
    sign, whole, den, dec = m.groups()
    if den is not None:
        fr = Fraction(int(whole), int(den))
    elif dec is not None:
        fr = Fraction(f"{whole}.{dec}")
    else:
        fr = Fraction(int(whole))
    return -fr if sign in ("-", "−") else fr


def smin(*args: IndexLike) -> SobolevIndex:
    """Minimum of indices; ``+inf`` is neutral."""
    return min(SobolevIndex(a) for a in args)


class ProblemKind(enum.IntEnum):
    DIRICHLET = 0
    NEUMANN = 1
    IMPEDANCE = 2
    TRANSMISSION = 3


class Mode(enum.Enum):
    CLASSIC = "classic"
    SHARP = "sharp"


class Carrier(enum.Enum):
    VOLUME_EXTERIOR = "volume_exterior"
    VOLUME_PAIR = "volume_pair"
    BOUNDARY_SCALAR = "boundary_scalar"
    BOUNDARY_PAIR = "boundary_pair"


class Weighting(enum.Enum):
    LOC = "loc"
    KAPPA = "kappa"


@dataclass(frozen=True)
class RegularityQuery:
    """Inputs of a regularity computation.

    ``half_k`` enables half-integer velocity classes ``k``; the formulas are
    applied verbatim in that case.
    """

    r: SobolevIndex
    q: SobolevIndex
    k: SobolevIndex
    beta: ProblemKind
    mode: Mode = Mode.SHARP
    half_k: bool = False

    def __post_init__(self):
        for name in ("r", "q", "k"):
            object.__setattr__(self, name, SobolevIndex(getattr(self, name)))
        object.__setattr__(self, "beta", ProblemKind(self.beta))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.r.is_infinite or not self.r.is_integer() or self.r < 0:
            raise RegularityError(f"domain class r must be an integer ≥ 0, got {self.r}")
        if self.q.is_infinite:
            raise RegularityError("data smoothness q must be finite")
        if self.q < 0:
            raise NegativeIndex(f"data smoothness q must be ≥ 0, got {self.q}")
        if self.k.is_infinite or self.k < 0:
            raise NegativeIndex(f"velocity class k must be finite and ≥ 0, got {self.k}")
        if not self.k.is_integer():
            if not (self.half_k and self.k.is_half_integer()):
                raise RegularityError(
                    f"velocity class k must be an integer (half-integers need half_k), got {self.k}")


def _classic_guard(query: RegularityQuery) -> None:
    if query.mode is not Mode.CLASSIC:
        return
    if query.q > query.r:
        raise ClassicModeRange(
            f"classic mode requires q ≤ r, got q={query.q}, r={query.r}")
    if query.k > query.r:
        raise ClassicModeRange(
            f"classic mode requires k ≤ r, got k={query.k}, r={query.r}")


def _require(ok: bool, bound: str, context: str) -> None:
    if not ok:
        raise PreconditionViolated(bound, context)


def solution_index(query: RegularityQuery) -> SobolevIndex:
    """Index ``s``: the solution lies in ``H^{s+1}``, its Cauchy data in ``ℍ^s(Γ)``."""
    _classic_guard(query)
    if query.mode is Mode.CLASSIC:
        return query.q
    return smin(query.q, query.r + HALF)


class PerturbedIndex(NamedTuple):
    """Smoothness of the perturbed solution.

    ``composed`` is the conservative index ``min(q, k)`` of ``U_t∘T_t``;
    ``uncomposed`` is the index of ``U_t`` on its own domain, ``min(q, k)`` in
    classic mode and ``min(q, k+1/2)`` in sharp mode.  The JSON report lists
    both, the latter under ``perturbed.lemma``.
    """

    composed: SobolevIndex
    uncomposed: SobolevIndex


def perturbed_index(query: RegularityQuery) -> PerturbedIndex:
    _classic_guard(query)
    _require(query.k <= query.r, "k ≤ r", "velocity class bounded by domain class")
    composed = smin(query.q, query.k)
    if query.mode is Mode.CLASSIC:
        return PerturbedIndex(composed, composed)
    return PerturbedIndex(composed, smin(query.q, query.k + HALF))


def _md_guard(query: RegularityQuery) -> None:
    _classic_guard(query)
    ctx = "material derivative regularity"
    _require(query.r >= 1, "r ≥ 1", ctx)
    _require(query.q >= 1, "q ≥ 1", ctx)
    _require(query.k >= 1, "k ≥ 1", ctx)
    _require(query.k <= query.r, "k ≤ r", ctx)


def _sd_guard(query: RegularityQuery) -> None:
    _classic_guard(query)
    ctx = "shape derivative regularity"
    _require(query.r >= 1, "r ≥ 1", ctx)
    _require(query.k <= query.r, "k ≤ r", ctx)


def md_index(query: RegularityQuery) -> SobolevIndex:
    """Material-derivative index: ``U̇ ∈ H^{ṡ+1}``, CMD in ``ℍ^ṡ(Γ)``."""
    _md_guard(query)
    if query.beta is ProblemKind.DIRICHLET:
        return smin(query.q, query.k)
    return smin(query.q, query.r - HALF, query.k)


def md_boundary_index(query: RegularityQuery) -> SobolevIndex:
    """``ṡ_m = min(q, r-1/2, k+1/2)``, bounding only the boundary datum ``m_β``."""
    _md_guard(query)
    return smin(query.q, query.r - HALF, query.k + HALF)


def sd_index(query: RegularityQuery) -> SobolevIndex:
    """Shape-derivative index: ``U' ∈ H^{s̃+1}``, CSD in ``ℍ^s̃(Γ)``."""
    _sd_guard(query)
    if query.mode is Mode.CLASSIC:
        return smin(query.q - 1, query.k + HALF)
    return smin(query.q - 1, query.r - HALF, query.k + HALF)


class DatumIndices(NamedTuple):
    f: SobolevIndex            # volume source of the material-derivative problem
    m: SobolevIndex            # boundary datum of the material-derivative problem
    g_dirichlet: SobolevIndex  # g_0 and the trace-jump datum for transmission
    g_neumann: SobolevIndex    # g_1, g_2 and the flux-jump datum for transmission


def datum_indices(query: RegularityQuery) -> DatumIndices:
    """Smoothness of the data of the derivative boundary value problems.

    The ``m`` entry follows the formula for ``β = 1, 2, 3``; for ``β = 0`` the
    datum is identically zero and lies in every space.
    """
    s_bar = smin(query.q, query.k)
    md_guarded = md_boundary_index(query)
    s_tilde = sd_index(query)
    return DatumIndices(
        f=s_bar - 1,
        m=md_guarded - HALF,
        g_dirichlet=s_tilde + HALF,
        g_neumann=s_tilde - HALF,
    )


class CauchyIndices(NamedTuple):
    cmd: SobolevIndex
    csd: SobolevIndex


def cauchy_indices(query: RegularityQuery) -> CauchyIndices:
    return CauchyIndices(md_index(query), sd_index(query))


# ---------------------------------------------------------------------------
# space rendering

_W = {Weighting.LOC: "loc", Weighting.KAPPA: "κ"}
_W_INV = {"loc": Weighting.LOC, "κ": Weighting.KAPPA, "kappa": Weighting.KAPPA}


def render_space(index: IndexLike, carrier: Carrier,
                 weighting: Optional[Weighting] = Weighting.LOC,
                 compact: bool = False) -> str:
    """Render a Sobolev space.

    Volume carriers print ``index`` as the exponent unchanged: a solution with
    index ``s`` lives in ``H^{s+1}``, so callers pass ``s + 1``.  Boundary
    pairs print ``ℍ^s(Γ) = H^{s+1/2}(Γ) × H^{s-1/2}(Γ)``.
    """
    s = SobolevIndex(index)
    carrier = Carrier(carrier)
    if carrier is Carrier.BOUNDARY_SCALAR:
        return f"H^{{{s.pretty()}}}(Γ)"
    if carrier is Carrier.BOUNDARY_PAIR:
        if compact:
            return f"ℍ^{{{s.pretty()}}}(Γ)"
        return f"H^{{{(s + HALF).pretty()}}}(Γ) × H^{{{(s - HALF).pretty()}}}(Γ)"
    w = _W[Weighting(weighting or Weighting.LOC)]
    ext = f"H^{{{s.pretty()}}}_{w}(D^c)"
    if carrier is Carrier.VOLUME_EXTERIOR:
        return ext
    return f"{ext} × H^{{{s.pretty()}}}(D)"


_EXP = r"\{([^}]*)\}"
_PATTERNS = [
    (re.compile(rf"^H\^{_EXP}_(loc|κ|kappa)\(D\^c\) × H\^{_EXP}\(D\)$"), Carrier.VOLUME_PAIR),
    (re.compile(rf"^H\^{_EXP}_(loc|κ|kappa)\(D\^c\)$"), Carrier.VOLUME_EXTERIOR),
    (re.compile(rf"^H\^{_EXP}\(Γ\) × H\^{_EXP}\(Γ\)$"), Carrier.BOUNDARY_PAIR),
    (re.compile(rf"^ℍ\^{_EXP}\(Γ\)$"), Carrier.BOUNDARY_PAIR),
    (re.compile(rf"^H\^{_EXP}\(Γ\)$"), Carrier.BOUNDARY_SCALAR),
]


def parse_space(text: str) -> tuple[SobolevIndex, Carrier, Optional[Weighting]]:
    """Inverse of :func:`render_space`; returns ``(index, carrier, weighting)``."""
    t = text.strip()
    for pattern, carrier in _PATTERNS:
        m = pattern.match(t)
        if not m:
            continue
        g = m.groups()
        if carrier is Carrier.VOLUME_PAIR:
            s, w, s2 = SobolevIndex(g[0]), g[1], SobolevIndex(g[2])
            if s != s2:
                raise ValueError(f"mismatched exponents in {text!r}")
            return s, carrier, _W_INV[w]
        if carrier is Carrier.VOLUME_EXTERIOR:
            return SobolevIndex(g[0]), carrier, _W_INV[g[1]]
        if carrier is Carrier.BOUNDARY_PAIR:
            if len(g) == 1:
                return SobolevIndex(g[0]), carrier, None
            hi, lo = SobolevIndex(g[0]), SobolevIndex(g[1])
            s = hi - HALF
            if not hi.is_infinite and lo != s - HALF:
                raise ValueError(f"pair exponents in {text!r} are not one apart")
            return s, carrier, None
        return SobolevIndex(g[0]), carrier, None
    raise ValueError(f"unrecognized space {text!r}")


# ---------------------------------------------------------------------------
# report

@dataclass(frozen=True)
class RegularityReport:
    query: RegularityQuery
    solution: SobolevIndex
    perturbed: PerturbedIndex
    md: SobolevIndex
    md_boundary: SobolevIndex
    sd: SobolevIndex
    data: DatumIndices
    cauchy: CauchyIndices

    def _volume(self, index: SobolevIndex, weighting=Weighting.LOC) -> str:
        carrier = (Carrier.VOLUME_PAIR if self.query.beta is ProblemKind.TRANSMISSION
                   else Carrier.VOLUME_EXTERIOR)
        return render_space(index, carrier, weighting)

    def to_dict(self) -> dict:
        def entry(index, space):
            return {"index": str(index), "space": space}

        bpair = Carrier.BOUNDARY_PAIR
        bscal = Carrier.BOUNDARY_SCALAR
        q = self.query
        return {
            "query": {"r": str(q.r), "q": str(q.q), "k": str(q.k),
                      "beta": int(q.beta), "mode": q.mode.value},
            "solution": entry(self.solution, self._volume(self.solution + 1)),
            "perturbed": {
                **entry(self.perturbed.composed, self._volume(self.perturbed.composed + 1)),
                "source": "remark",
                "lemma": entry(self.perturbed.uncomposed,
                               self._volume(self.perturbed.uncomposed + 1)),
            },
            "md": entry(self.md, self._volume(self.md + 1)),
            "md_boundary": entry(self.md_boundary, render_space(self.md_boundary, bscal)),
            "sd": entry(self.sd, self._volume(self.sd + 1)),
            "data": {
                "f": entry(self.data.f, self._volume(self.data.f)),
                "m": entry(self.data.m, render_space(self.data.m, bscal)),
                "g0": entry(self.data.g_dirichlet, render_space(self.data.g_dirichlet, bscal)),
                "g1": entry(self.data.g_neumann, render_space(self.data.g_neumann, bscal)),
            },
            "cauchy": {
                "md": entry(self.cauchy.cmd, render_space(self.cauchy.cmd, bpair)),
                "sd": entry(self.cauchy.csd, render_space(self.cauchy.csd, bpair)),
            },
        }


def regularity_report(query: RegularityQuery) -> RegularityReport:
    """All indices for ``query``; requires the material-derivative hypotheses."""
    return RegularityReport(
        query=query,
        solution=solution_index(query),
        perturbed=perturbed_index(query),
        md=md_index(query),
        md_boundary=md_boundary_index(query),
        sd=sd_index(query),
        data=datum_indices(query),
        cauchy=cauchy_indices(query),
    )

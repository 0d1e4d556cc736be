"""Domain types: objects, affine maps, kernels, moment keys and polynomials."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

MAX_DEGREE = 8


class DamiError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DamiError, ValueError):
    pass


class NullSpaceError(DamiError):
    """A normalizer vanished: the object lies in a lower-dimensional subspace."""

    def __init__(self, base: str, message: str | None = None):
        self.base = base
        super().__init__(message or f"null space: normalization base '{base}' vanishes")


class NegativeBaseError(DamiError):
    def __init__(self, base: str, value: float):
        self.base = base
        self.value = value
        super().__init__(f"fractional power of negative base '{base}' ({value!r})")


class ZeroInvariant(DamiError):
    """The kernel's covariant expands to the empty polynomial."""

    def __init__(self, kernel: "KernelSpec"):
        self.kernel = kernel
        super().__init__(f"kernel {kernel} expands to zero")


# ---------------------------------------------------------------------------
# objects and maps


@dataclass(frozen=True, eq=False)
class ObjectMN:
    """Weighted point set in ``M``-D space carrying ``N`` channel values per point.

    ``coords`` is ``(n, M)``, ``channels`` is ``(n, N)``, ``weights`` is ``(n,)``.
    Arrays are copied and made read-only on construction.
    """

    coords: np.ndarray
    channels: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64)
        channels = np.array(self.channels, dtype=np.float64)
        if coords.ndim != 2 or channels.ndim != 2:
            raise ValidationError("coords and channels must be 2-D arrays")
        n = coords.shape[0]
        if n < 1:
            raise ValidationError("object needs at least one point")
        if channels.shape[0] != n:
            raise ValidationError(
                f"coords has {n} points but channels has {channels.shape[0]}")
        if coords.shape[1] < 1 or channels.shape[1] < 1:
            raise ValidationError("space and channel dimensions must be positive")
        if not (np.all(np.isfinite(coords)) and np.all(np.isfinite(channels))):
            raise ValidationError("coordinates and channel values must be finite")
        if self.weights is None:
            weights = np.ones(n)
        else:
            weights = np.array(self.weights, dtype=np.float64).reshape(-1)
            if weights.shape[0] != n:
                raise ValidationError("one weight per point required")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0):
                raise ValidationError("weights must be finite and non-negative")
        if not weights.sum() > 0:
            raise ValidationError("total weight must be positive")
        for arr in (coords, channels, weights):
            arr.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "weights", weights)

    @property
    def space_dim(self) -> int:
        return self.coords.shape[1]

    @property
    def channel_dim(self) -> int:
        return self.channels.shape[1]

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ObjectMN):
            return NotImplemented
        return (np.array_equal(self.coords, other.coords)
                and np.array_equal(self.channels, other.channels)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``v -> linear @ v + offset``."""

    linear: np.ndarray
    offset: np.ndarray | None = None

    def __post_init__(self):
        linear = np.array(self.linear, dtype=np.float64)
        if linear.ndim != 2 or linear.shape[0] != linear.shape[1] or linear.shape[0] < 1:
            raise ValidationError("linear part must be a non-empty square matrix")
        if not np.all(np.isfinite(linear)):
            raise ValidationError("linear part must be finite")
        dim = linear.shape[0]
        offset = np.zeros(dim) if self.offset is None else np.array(self.offset, dtype=np.float64).reshape(-1)
        if offset.shape != (dim,) or not np.all(np.isfinite(offset)):
            raise ValidationError(f"offset must be a finite {dim}-vector")
        linear.flags.writeable = False
        offset.flags.writeable = False
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.linear))

    def validity(self) -> tuple[float, float]:
        """Return ``(|det|, condition number)`` of the linear part."""
        return abs(self.det), self.cond

    def _check_invertible(self, tol: float):
        if abs(self.det) <= tol:
            raise ValidationError(f"affine map is singular (|det| = {abs(self.det):.3g})")

    def compose(self, other: "AffineMap", tol: float = 1e-12) -> "AffineMap":
        """``self ∘ other``: apply ``other`` first."""
        if other.dim != self.dim:
            raise ValidationError("cannot compose maps of different dimension")
        self._check_invertible(tol)
        other._check_invertible(tol)
        return AffineMap(self.linear @ other.linear, self.linear @ other.offset + self.offset)

    def inverse(self, tol: float = 1e-12) -> "AffineMap":
        self._check_invertible(tol)
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.offset)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.linear.T + self.offset

    def to_dict(self) -> dict:
        return {"linear": self.linear.tolist(), "offset": self.offset.tolist(),
                "det": self.det, "cond": self.cond}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AffineMap":
        return cls(d["linear"], d.get("offset"))

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return np.array_equal(self.linear, other.linear) and np.array_equal(self.offset, other.offset)

    __hash__ = None


# ---------------------------------------------------------------------------
# kernels

SPACE = "S"
CHANNEL = "C"
_KIND_RANK = {SPACE: 0, CHANNEL: 1}


@dataclass(frozen=True)
class Primitive:
    """Determinant of the coordinate (``S``) or channel (``C``) columns of some points."""

    kind: str
    points: tuple[int, ...]
    exponent: int = 1

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValidationError(f"primitive kind must be 'S' or 'C', got {self.kind!r}")
        pts = tuple(int(p) for p in self.points)
        if len(set(pts)) != len(pts):
            raise ValidationError(f"repeated point id in {self.kind}{pts}: determinant is identically 0")
        if any(p < 1 for p in pts):
            raise ValidationError("point ids must be positive")
        if list(pts) != sorted(pts):
            raise ValidationError(f"point ids must be strictly increasing, got {pts}")
        if int(self.exponent) < 1:
            raise ValidationError("primitive exponent must be >= 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "exponent", int(self.exponent))

    @property
    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.points, self.exponent)

    def __str__(self) -> str:
        s = f"{self.kind}({','.join(map(str, self.points))})"
        return s if self.exponent == 1 else f"{s}^{self.exponent}"


@dataclass(frozen=True)
class KernelSpec:
    """Product of determinant primitives over ``L`` points.

    Primitives on the same point set and kind are merged by adding exponents and
    stored in a fixed order, so equal kernels compare equal structurally.
    """

    space_dim: int
    channel_dim: int
    primitives: tuple[Primitive, ...]

    def __post_init__(self):
        if self.space_dim < 1 or self.channel_dim < 1:
            raise ValidationError("space and channel dimensions must be positive")
        merged: dict[tuple[str, tuple[int, ...]], int] = {}
        for p in self.primitives:
            arity = self.space_dim if p.kind == SPACE else self.channel_dim
            if len(p.points) != arity:
                raise ValidationError(f"{p} needs exactly {arity} point ids")
            merged[(p.kind, p.points)] = merged.get((p.kind, p.points), 0) + p.exponent
        if not merged:
            raise ValidationError("kernel needs at least one primitive")
        prims = tuple(sorted((Primitive(k, pts, e) for (k, pts), e in merged.items()),
                             key=lambda p: p.sort_key))
        object.__setattr__(self, "primitives", prims)
        if self.degree > MAX_DEGREE:
            raise ValidationError(f"degree {self.degree} exceeds the supported maximum {MAX_DEGREE}")

    @classmethod
    def parse(cls, text: str, space_dim: int = 3, channel_dim: int = 3) -> "KernelSpec":
        return cls(space_dim, channel_dim, tuple(parse_primitives(text)))

    def _points(self, kind: str | None) -> set[int]:
        return {i for p in self.primitives if kind in (None, p.kind) for i in p.points}

    @property
    def point_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._points(None)))

    @property
    def P(self) -> int:
        return len(self._points(SPACE))

    @property
    def Q(self) -> int:
        return len(self._points(CHANNEL))

    @property
    def O_S(self) -> int:
        return sum(p.exponent for p in self.primitives if p.kind == SPACE)

    @property
    def O_C(self) -> int:
        return sum(p.exponent for p in self.primitives if p.kind == CHANNEL)

    @property
    def degree(self) -> int:
        return len(self._points(None))

    L = degree

    @property
    def order(self) -> int:
        return self.O_S + self.O_C

    K = order

    @property
    def signature(self) -> tuple[int, int, int, int]:
        return (self.P, self.Q, self.O_S, self.O_C)

    @property
    def is_canonical_labeling(self) -> bool:
        return self.point_ids == tuple(range(1, self.degree + 1))

    def participations(self) -> dict[int, tuple[int, int]]:
        """Point id -> (space participations, channel participations), exponents counted."""
        out = {i: [0, 0] for i in self.point_ids}
        for p in self.primitives:
            for i in p.points:
                out[i][_KIND_RANK[p.kind]] += p.exponent
        return {i: (s, c) for i, (s, c) in out.items()}

    def relabel(self, mapping: Mapping[int, int]) -> "KernelSpec":
        prims = tuple(Primitive(p.kind, tuple(sorted(mapping[i] for i in p.points)), p.exponent)
                      for p in self.primitives)
        return KernelSpec(self.space_dim, self.channel_dim, prims)

    def sort_key(self) -> tuple:
        return tuple(p.sort_key for p in self.primitives)

    def __str__(self) -> str:
        return "*".join(str(p) for p in self.primitives)

    def to_json(self) -> list[dict]:
        return [{"kind": p.kind, "points": list(p.points), "exp": p.exponent} for p in self.primitives]


_PRIM_RE = re.compile(r"(?:D_)?([SC])\s*\(\s*([0-9][0-9,\s]*)\)\s*(?:\^\s*(\d+))?")
_SEP_RE = re.compile(r"[\s*·]*")


def parse_primitives(text: str) -> list[Primitive]:
    """Parse ``S(1,2,3)^2*C(1,2,3)``; the ``D_`` prefix and whitespace separators are accepted."""
    prims: list[Primitive] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        pos = _SEP_RE.match(text, pos).end()
        if pos >= len(text):
            break
        m = _PRIM_RE.match(text, pos)
        if m is None:
            raise ValidationError(f"cannot parse kernel at column {pos + 1}: {text[pos:]!r}")
        ids = tuple(int(s) for s in m.group(2).replace(" ", "").split(",") if s)
        prims.append(Primitive(m.group(1), tuple(sorted(ids)) if len(set(ids)) == len(ids) else ids,
                               int(m.group(3) or 1)))
        pos = m.end()
    if not prims:
        raise ValidationError("empty kernel specification")
    return prims


def canonicalize_kernel(spec: KernelSpec) -> KernelSpec:
    """Lexicographically minimal relabeling of the kernel's points onto ``1..L``.

    Brute force over all ``L!`` bijections; two kernels are isomorphic iff their
    canonical forms are equal.
    """
    ids = spec.point_ids
    best = None
    best_key = None
    for perm in itertools.permutations(range(1, len(ids) + 1)):
        mapping = dict(zip(ids, perm))
        key = tuple(sorted((_KIND_RANK[p.kind], tuple(sorted(mapping[i] for i in p.points)), p.exponent)
                           for p in spec.primitives))
        if best_key is None or key < best_key:
            best_key, best = key, mapping
    return spec.relabel(best)


# ---------------------------------------------------------------------------
# moment keys and polynomials


class MomentKey(NamedTuple):
    """Exponents of a central moment: spatial axes then channels."""

    spatial: tuple[int, ...]
    channel: tuple[int, ...]

    @classmethod
    def from_flat(cls, flat: Sequence[int], space_dim: int) -> "MomentKey":
        flat = tuple(int(v) for v in flat)
        return cls(flat[:space_dim], flat[space_dim:])

    @property
    def flat(self) -> tuple[int, ...]:
        return self.spatial + self.channel

    @property
    def order(self) -> int:
        return sum(self.spatial) + sum(self.channel)

    def __str__(self) -> str:
        exps = self.flat
        body = "".join(map(str, exps)) if max(exps, default=0) < 10 else ",".join(map(str, exps))
        return f"u_{{{body}}}"


Term = tuple[Fraction, tuple[MomentKey, ...]]


@dataclass(frozen=True)
class MomentPolynomial:
    """Sum of rational multiples of products of central moments, in canonical form.

    Build with :meth:`from_terms`, which merges like terms, drops zeros and sorts.
    """

    terms: tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[object, Iterable[MomentKey]]]) -> "MomentPolynomial":
        acc: dict[tuple[MomentKey, ...], Fraction] = {}
        for coeff, factors in terms:
            key = tuple(sorted(factors))
            acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff)
        return cls(tuple((c, k) for k, c in sorted(acc.items(), key=lambda kv: kv[0]) if c != 0))

    @classmethod
    def constant(cls, value) -> "MomentPolynomial":
        return cls.from_terms([(value, ())])

    @classmethod
    def moment(cls, key: MomentKey) -> "MomentPolynomial":
        return cls.from_terms([(1, (key,))])

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "MomentPolynomial") -> "MomentPolynomial":
        return MomentPolynomial.from_terms(list(self.terms) + list(other.terms))

    def __neg__(self) -> "MomentPolynomial":
        return MomentPolynomial(tuple((-c, k) for c, k in self.terms))

    def __sub__(self, other: "MomentPolynomial") -> "MomentPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "MomentPolynomial":
        if isinstance(other, MomentPolynomial):
            return MomentPolynomial.from_terms(
                (c1 * c2, k1 + k2) for c1, k1 in self.terms for c2, k2 in other.terms)
        factor = Fraction(other)
        return MomentPolynomial.from_terms((c * factor, k) for c, k in self.terms)

    __rmul__ = __mul__

    def keys(self) -> set[MomentKey]:
        return {k for _, factors in self.terms for k in factors}

    def scalar_ratio(self, other: "MomentPolynomial") -> Fraction | None:
        """``r`` with ``self == r * other``, or ``None`` if not proportional."""
        if len(self) != len(other) or not self.terms:
            return None
        ratio = None
        for (c1, k1), (c2, k2) in zip(self.terms, other.terms):
            if k1 != k2:
                return None
            r = c1 / c2
            if ratio is None:
                ratio = r
            elif r != ratio:
                return None
        return ratio

    def evaluate(self, table: Mapping[MomentKey, float]) -> float:
        import math
        return math.fsum(float(c) * math.prod(table[k] for k in factors) for c, factors in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, (c, factors) in enumerate(self.terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            grouped = []
            for key, run in itertools.groupby(factors):
                n = len(list(run))
                grouped.append(str(key) if n == 1 else f"{key}^{n}")
            body = "*".join(grouped)
            if mag != 1 or not body:
                body = f"{mag}*{body}" if body else str(mag)
            parts.append((("-" if sign == "-" else "") if i == 0 else f" {sign} ") + body)
        return "".join(parts)

    def to_json(self) -> list[dict]:
        return [{"coeff": [c.numerator, c.denominator], "moments": [list(k.flat) for k in factors]}
                for c, factors in self.terms]

    @classmethod
    def from_json(cls, data, space_dim: int, where: str = "terms") -> "MomentPolynomial":
        if not isinstance(data, list):
            raise ValidationError(f"{where}: expected a list of terms")
        terms = []
        for i, t in enumerate(data):
            loc = f"{where}[{i}]"
            try:
                num, den = t["coeff"]
                coeff = Fraction(int(num), int(den))
                factors = [MomentKey.from_flat(m, space_dim) for m in t["moments"]]
            except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"{loc}: malformed term ({exc})") from None
            terms.append((coeff, factors))
        poly = cls.from_terms(terms)
        if len(poly) != len(terms):
            raise ValidationError(f"{where}: terms not in canonical form (duplicates or zero coefficients)")
        return poly


# ---------------------------------------------------------------------------
# invariant expressions

PAPER = "paper"
COUNTING = "counting"
MODES = (PAPER, COUNTING)


@dataclass(frozen=True)
class NormFactor:
    name: str
    base: MomentPolynomial
    exponent: Fraction


@dataclass(frozen=True)
class Normalization:
    """Product of rational powers of normalizer polynomials.

    ``paper`` mode carries (mass, channel_norm); ``counting`` mode carries
    (spatial_norm, channel_norm, mass).
    """

    mode: str
    factors: tuple[NormFactor, ...]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown normalization mode {self.mode!r}")
        expected = {PAPER: ("mass", "channel_norm"),
                    COUNTING: ("spatial_norm", "channel_norm", "mass")}[self.mode]
        if tuple(f.name for f in self.factors) != expected:
            raise ValidationError(f"{self.mode} normalization needs factors {expected}")

    def exponents(self) -> dict[str, Fraction]:
        return {f.name: f.exponent for f in self.factors}


@dataclass(frozen=True)
class InvariantExpr:
    kernel: KernelSpec
    numerator: MomentPolynomial
    normalization: Normalization
    label: str = field(default="", compare=False)

    @property
    def space_dim(self) -> int:
        return self.kernel.space_dim

    @property
    def channel_dim(self) -> int:
        return self.kernel.channel_dim

    @property
    def mode(self) -> str:
        return self.normalization.mode

    def keys(self) -> set[MomentKey]:
        out = set(self.numerator.keys())
        for f in self.normalization.factors:
            out |= f.base.keys()
        return out


def serialize_expr(expr: InvariantExpr, indent: int | None = 1) -> str:
    doc = {
        "M": expr.space_dim,
        "N": expr.channel_dim,
        "label": expr.label,
        "kernel": expr.kernel.to_json(),
        "numerator": expr.numerator.to_json(),
        "normalization": {
            "mode": expr.mode,
            "factors": [{"name": f.name, "exponent": [f.exponent.numerator, f.exponent.denominator],
                         "base": f.base.to_json()} for f in expr.normalization.factors],
        },
    }
    return json.dumps(doc, indent=indent)


def parse_expr(text: str) -> InvariantExpr:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None

    def get(obj, key, where):
        if not isinstance(obj, dict) or key not in obj:
            raise ValidationError(f"missing field '{where}{key}'")
        return obj[key]

    M = get(doc, "M", "")
    N = get(doc, "N", "")
    if not isinstance(M, int) or not isinstance(N, int):
        raise ValidationError("fields 'M' and 'N' must be integers")
    prims = []
    for i, p in enumerate(get(doc, "kernel", "")):
        where = f"kernel[{i}]."
        try:
            prims.append(Primitive(get(p, "kind", where), tuple(get(p, "points", where)),
                                   int(get(p, "exp", where))))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"kernel[{i}]: {exc}") from None
    kernel = KernelSpec(M, N, tuple(prims))
    numerator = MomentPolynomial.from_json(get(doc, "numerator", ""), M, "numerator")
    norm = get(doc, "normalization", "")
    factors = []
    for i, f in enumerate(get(norm, "factors", "normalization.")):
        where = f"normalization.factors[{i}]"
        try:
            num, den = get(f, "exponent", where + ".")
            exponent = Fraction(int(num), int(den))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{where}.exponent: {exc}") from None
        factors.append(NormFactor(get(f, "name", where + "."),
                                  MomentPolynomial.from_json(get(f, "base", where + "."), M, where + ".base"),
                                  exponent))
    normalization = Normalization(get(norm, "mode", "normalization."), tuple(factors))
    return InvariantExpr(kernel, numerator, normalization, label=doc.get("label", ""))

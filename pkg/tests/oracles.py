"""Independent reference implementations used only by the test-suite.

None of these share code with the library: expansions come from sympy
determinants, moments from explicit Python loops, isomorphism from networkx.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import sympy

from dami.core import MomentKey, MomentPolynomial


def sympy_expand(kernel_text: str, M: int, N: int) -> MomentPolynomial:
    """Expand a kernel by building symbolic determinants and grouping per-point monomials."""
    prims = []
    for kind, ids, exp in re.findall(r"([SC])\(([\d,]+)\)(?:\^(\d+))?", kernel_text.replace(" ", "")):
        prims.append((kind, [int(i) for i in ids.split(",")], int(exp or 1)))
    pts = sorted({i for _, ids, _ in prims for i in ids})
    xs = {i: sympy.symbols(f"x{i}_0:{M}") for i in pts}
    cs = {i: sympy.symbols(f"c{i}_0:{N}") for i in pts}
    expr = sympy.Integer(1)
    for kind, ids, exp in prims:
        cols = xs if kind == "S" else cs
        # columns are points in the order given; rows are axes
        mat = sympy.Matrix([[cols[i][a] for i in ids] for a in range(len(ids))])
        expr *= mat.det() ** exp
    gens = [s for i in pts for s in xs[i] + cs[i]]
    poly = sympy.Poly(sympy.expand(expr), *gens)
    width = M + N
    out = []
    for monom, coeff in poly.terms():
        keys = []
        for j in range(len(pts)):
            e = monom[j * width:(j + 1) * width]
            keys.append(MomentKey(tuple(e[:M]), tuple(e[M:])))
        out.append((Fraction(int(coeff)), keys))
    return MomentPolynomial.from_terms(out)


_TERM_RE = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*((?:\{?u_\{\d+\}\}?(?:\^\d+)?\s*\*?\s*)+)")
_FACTOR_RE = re.compile(r"\{?u_\{(\d+)\}\}?(?:\^(\d+))?")


def parse_printed(text: str, M: int) -> MomentPolynomial:
    """Parse a printed moment polynomial such as ``6*u_{001001}*u_{010010} - u_{0201}^2*...``."""
    text = re.sub(r"\\notag|\\\\|&|\\quad", " ", text)
    text = text.replace("−", "-")
    terms = []
    for sign, coeff, body in _TERM_RE.findall(text):
        c = Fraction(int(coeff) if coeff else 1) * (-1 if sign == "-" else 1)
        keys = []
        for digits, power in _FACTOR_RE.findall(body):
            e = tuple(int(d) for d in digits)
            keys.extend([MomentKey(e[:M], e[M:])] * int(power or 1))
        terms.append((c, keys))
    return MomentPolynomial.from_terms(terms)


def loop_moment(coords, channels, weights, spatial, channel) -> float:
    """Central moment by explicit Python loops with fsum."""
    coords = np.asarray(coords, dtype=float)
    channels = np.asarray(channels, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = math.fsum(w)
    xbar = [math.fsum(w[i] * coords[i, a] for i in range(len(w))) / total for a in range(coords.shape[1])]
    cbar = [math.fsum(w[i] * channels[i, b] for i in range(len(w))) / total for b in range(channels.shape[1])]
    terms = []
    for i in range(len(w)):
        t = w[i]
        for a, p in enumerate(spatial):
            t *= (coords[i, a] - xbar[a]) ** p
        for b, u in enumerate(channel):
            t *= (channels[i, b] - cbar[b]) ** u
        terms.append(t)
    return math.fsum(terms)


def kernel_graph(kernel) -> nx.Graph:
    """Bipartite graph: point nodes, primitive nodes labelled by (kind, exponent)."""
    g = nx.Graph()
    for i in kernel.point_ids:
        g.add_node(("pt", i), tag=("pt",))
    for j, p in enumerate(kernel.primitives):
        g.add_node(("prim", j), tag=(p.kind, p.exponent))
        for i in p.points:
            g.add_edge(("prim", j), ("pt", i))
    return g


def isomorphic(k1, k2) -> bool:
    return nx.is_isomorphic(kernel_graph(k1), kernel_graph(k2),
                            node_match=lambda a, b: a["tag"] == b["tag"])


def brute_kernel_sum(coords, channels, weights, kernel) -> float:
    """Sum of a kernel over all ordered point tuples, centered, via itertools and numpy det."""
    coords = np.asarray(coords, float)
    channels = np.asarray(channels, float)
    w = np.asarray(weights, float)
    xs = coords - (w @ coords) / w.sum()
    cs = channels - (w @ channels) / w.sum()
    ids = kernel.point_ids
    pos = {pid: j for j, pid in enumerate(ids)}
    terms = []
    for tup in itertools.product(range(len(w)), repeat=len(ids)):
        t = math.prod(w[i] for i in tup)
        for p in kernel.primitives:
            src = xs if p.kind == "S" else cs
            t *= np.linalg.det(np.stack([src[tup[pos[i]]] for i in p.points], axis=1)) ** p.exponent
        terms.append(t)
    return math.fsum(terms)


def coefficient_multiset(poly: MomentPolynomial) -> Counter:
    return Counter(c for c, _ in poly.terms)

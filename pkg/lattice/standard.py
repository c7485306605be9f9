#!/usr/bin/env python3
"""Named lattices (U, A_n, D_n, E_n, K3) and expression trees over them.

E-series Gram matrices are positive-definite Cartan matrices; E8(-1) is the
negation. The dual of X has Gram equal to the rational inverse of X's Gram,
so ``rescale(dual(E(6)), -3)`` is integral.
"""

import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import sympy

from lattice.gram import GramLattice
from utils.errors import DegenerateAmbient, MalformedInput, NonIntegralDual


@dataclass(frozen=True)
class Named:
    kind: str
    n: int = 0

    def __str__(self):
        if self.kind in ('U', 'K3'):
            return self.kind
        return f"{self.kind}{self.n}"


@dataclass(frozen=True)
class Diagonal:
    entries: Tuple[int, ...]

    def __str__(self):
        return "<" + ",".join(str(d) for d in self.entries) + ">"


@dataclass(frozen=True)
class Dual:
    inner: "LatticeSpec"

    def __str__(self):
        return f"{self.inner}*"


@dataclass(frozen=True)
class Rescale:
    inner: "LatticeSpec"
    factor: int

    def __str__(self):
        return f"{self.inner}({self.factor})"


@dataclass(frozen=True)
class Sum:
    parts: Tuple["LatticeSpec", ...]

    def __str__(self):
        return "+".join(str(p) for p in self.parts)


LatticeSpec = Union[Named, Diagonal, Dual, Rescale, Sum]


# Constructors mirroring the usual notation

def U() -> Named:
    return Named('U')


def A(n: int) -> Named:
    if n < 1:
        raise MalformedInput(f"A_n needs n >= 1, got {n}")
    return Named('A', n)


def D(n: int) -> Named:
    if n < 4:
        raise MalformedInput(f"D_n needs n >= 4, got {n}")
    return Named('D', n)


def E(n: int) -> Named:
    if n not in (6, 7, 8):
        raise MalformedInput(f"E_n exists only for n = 6, 7, 8, got {n}")
    return Named('E', n)


def K3() -> Named:
    return Named('K3')


def diag(*entries: int) -> Diagonal:
    return Diagonal(tuple(int(d) for d in entries))


def dual(inner: LatticeSpec) -> Dual:
    return Dual(inner)


def rescale(inner: LatticeSpec, factor: int) -> Rescale:
    return Rescale(inner, int(factor))


def orthogonal_sum(*parts: LatticeSpec) -> Sum:
    return Sum(tuple(parts))


# Cartan matrices

def _from_edges(n: int, edges: List[Tuple[int, int]]) -> List[List[int]]:
    gram = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in edges:
        gram[i][j] = gram[j][i] = -1
    return gram


def cartan_a(n: int) -> List[List[int]]:
    return _from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cartan_d(n: int) -> List[List[int]]:
    return _from_edges(n, [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)])


def cartan_e(n: int) -> List[List[int]]:
    # Bourbaki labelling: 1-3-4-5-6-7-8 chain with 2 attached to 4
    chain = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
    edges = [(i, j) for i, j in chain if j < n] + [(1, 3)]
    return _from_edges(n, edges)


def _evaluate(spec: LatticeSpec) -> sympy.Matrix:
    if isinstance(spec, Named):
        if spec.kind == 'U':
            return sympy.Matrix([[0, 1], [1, 0]])
        if spec.kind == 'A':
            return sympy.Matrix(cartan_a(spec.n))
        if spec.kind == 'D':
            return sympy.Matrix(cartan_d(spec.n))
        if spec.kind == 'E':
            return sympy.Matrix(cartan_e(spec.n))
        if spec.kind == 'K3':
            return _evaluate(K3_SPEC)
        raise MalformedInput(f"unknown lattice name {spec.kind!r}")
    if isinstance(spec, Diagonal):
        if not spec.entries:
            return sympy.zeros(0, 0)
        return sympy.diag(*spec.entries)
    if isinstance(spec, Dual):
        inner = _evaluate(spec.inner)
        if inner.rows == 0:
            return inner
        if inner.det() == 0:
            raise DegenerateAmbient(f"dual of degenerate lattice {spec.inner}")
        return inner.inv()
    if isinstance(spec, Rescale):
        return _evaluate(spec.inner) * spec.factor
    if isinstance(spec, Sum):
        blocks = [_evaluate(p) for p in spec.parts]
        blocks = [b for b in blocks if b.rows]
        return sympy.diag(*blocks) if blocks else sympy.zeros(0, 0)
    raise MalformedInput(f"not a lattice spec: {spec!r}")


def standard_lattice(spec: Union[LatticeSpec, str]) -> GramLattice:
    """Gram matrix of a lattice expression (or its text form)"""
    if isinstance(spec, str):
        spec = parse_lattice_spec(spec)
    gram = _evaluate(spec)
    bad = [(i, j) for i in range(gram.rows) for j in range(gram.cols) if not gram[i, j].is_integer]
    if bad:
        i, j = bad[0]
        raise NonIntegralDual(f"{spec} has non-integral entry {gram[i, j]} at ({i}, {j})")
    return GramLattice.from_rows([[int(gram[i, j]) for j in range(gram.cols)] for i in range(gram.rows)])


K3_SPEC = orthogonal_sum(rescale(E(8), -1), rescale(E(8), -1), U(), U(), U())


# Text form: "E6*(-3)+E8(-1)+U", "A2(-1)+2U(3)", "<8>+<-16>", "K3"

_TERM = re.compile(
    r"^(?P<mult>\d+)?\s*(?P<base>U|K3|[AD]\d+|E[678]|<[^>]*>|⟨[^⟩]*⟩)\s*"
    r"(?P<dual>\*)?\s*(?:\(\s*(?P<scale>[+-]?\d+)\s*\))?$"
)


def _split_terms(text: str) -> List[str]:
    terms, depth, current = [], 0, []
    for ch in text:
        if ch in "(<⟨":
            depth += 1
        elif ch in ")>⟩":
            depth -= 1
        if depth == 0 and ch in "+⊥":
            terms.append("".join(current))
            current = []
        else:
            current.append(ch)
    terms.append("".join(current))
    return [t.strip() for t in terms]


def _parse_base(base: str) -> LatticeSpec:
    if base in ('U', 'K3'):
        return Named(base)
    if base[0] in '<⟨':
        body = base[1:-1].strip()
        try:
            entries = [int(x) for x in body.split(',')] if body else []
        except ValueError:
            raise MalformedInput(f"bad diagonal entries in {base!r}")
        return diag(*entries)
    builders = {'A': A, 'D': D, 'E': E}
    return builders[base[0]](int(base[1:]))


def parse_lattice_spec(text: str) -> LatticeSpec:
    parts: List[LatticeSpec] = []
    for term in _split_terms(text):
        if not term:
            raise MalformedInput(f"empty summand in lattice expression {text!r}")
        match = _TERM.match(term)
        if not match:
            raise MalformedInput(f"cannot parse lattice summand {term!r}")
        node = _parse_base(match.group('base'))
        if match.group('dual'):
            node = dual(node)
        if match.group('scale'):
            node = rescale(node, int(match.group('scale')))
        parts.extend([node] * int(match.group('mult') or 1))
    return parts[0] if len(parts) == 1 else orthogonal_sum(*parts)


SPEC_NODES = (Named, Diagonal, Dual, Rescale, Sum)

"""Concrete groups with exact arithmetic.

Elements are plain hashable payloads interpreted by the owning group:

* ``Cyclic(n)``: an ``int`` residue (any ``int`` when ``n == 0``).
* ``FreeAbelian(m)``: a length-``m`` tuple of ``int``.
* ``Permutation``: a tuple of 0-based images, composed right to left.
* ``Table``: an index into the Cayley table.
* ``AbelianByFinite``: a pair ``(vector, h)``.
* ``Wreath``: a pair ``(F, t)`` where ``F`` lists base values in the canonical
  order of the top group's elements.
* ``Subgroup`` / ``Quotient``: payloads of the parent group (quotients use the
  smallest coset representative).

Payloads of one group are mutually comparable, and the canonical element
order of a finite group is the sorted order of its payloads.
"""

from __future__ import annotations

import itertools
import math
import os
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

DEFAULT_MAX_ORDER = 2048

Payload = Hashable


def max_order() -> int:
    """Cap on the order of groups handled by exhaustive (tabulating) operations."""
    return int(os.environ.get("CORKCALC_MAX_ORDER", DEFAULT_MAX_ORDER))


class GroupError(ValueError):
    pass


class UnboundedEnumeration(GroupError):
    pass


class NotSolvable(GroupError):
    def __init__(self, message: str, perfect: "Subgroup"):
        super().__init__(message)
        self.perfect = perfect


class Group(ABC):
    """Common interface for every group kind."""

    @property
    @abstractmethod
    def identity(self) -> Payload: ...

    @abstractmethod
    def mul(self, a: Payload, b: Payload) -> Payload: ...

    @abstractmethod
    def inv(self, a: Payload) -> Payload: ...

    @abstractmethod
    def contains(self, a: Any) -> bool: ...

    @property
    @abstractmethod
    def generators(self) -> tuple: ...

    @property
    @abstractmethod
    def is_finite(self) -> bool: ...

    @property
    def name(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:
        return self.name

    # finite groups

    @cached_property
    def _elements(self) -> tuple:
        if not self.is_finite:
            raise UnboundedEnumeration(f"unbounded enumeration: {self.name} is infinite")
        return tuple(sorted(closure(self, self.generators)))

    def elements(self) -> tuple:
        return self._elements

    def order(self) -> int | None:
        return len(self.elements()) if self.is_finite else None

    @cached_property
    def _index(self) -> dict:
        return {x: i for i, x in enumerate(self.elements())}

    def index(self, x: Payload) -> int:
        return self._index[x]

    def element_at(self, i: int) -> Payload:
        return self.elements()[i]

    @cached_property
    def _table(self) -> np.ndarray:
        elems = self.elements()
        if len(elems) > max_order():
            raise GroupError(f"order {len(elems)} exceeds the tabulation cap {max_order()}")
        idx = self._index
        n = len(elems)
        tab = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(elems):
            tab[i] = [idx[self.mul(a, b)] for b in elems]
        return tab

    def mul_table(self) -> np.ndarray:
        """Cayley table on canonical element indices."""
        return self._table

    # derived arithmetic

    def power(self, a: Payload, k: int) -> Payload:
        if k < 0:
            a, k = self.inv(a), -k
        result = self.identity
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def element_order(self, a: Payload, limit: int = 10**6) -> int:
        x, k = a, 1
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
            if k > limit:
                return 0
        return k

    def conj(self, g: Payload, x: Payload) -> Payload:
        return self.mul(self.mul(g, x), self.inv(g))

    def commutator(self, a: Payload, b: Payload) -> Payload:
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def product(self, items: Iterable[Payload]) -> Payload:
        result = self.identity
        for x in items:
            result = self.mul(result, x)
        return result

    def ball_layers(self, radius: int) -> list[list]:
        """Word-length layers of the ball of the given radius (generators and inverses)."""
        steps = []
        for s in self.generators:
            for t in (s, self.inv(s)):
                if t not in steps:
                    steps.append(t)
        seen = {self.identity}
        layers = [[self.identity]]
        for _ in range(radius):
            nxt = set()
            for x in layers[-1]:
                for s in steps:
                    y = self.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.add(y)
            if not nxt:
                break
            layers.append(sorted(nxt))
        return layers

    def ball(self, radius: int) -> list:
        return [x for layer in self.ball_layers(radius) for x in layer]

    def ball_of_size(self, size: int) -> list:
        """The first ``size`` elements in (word length, payload) order."""
        steps = []
        for s in self.generators:
            for t in (s, self.inv(s)):
                if t not in steps:
                    steps.append(t)
        out = [self.identity]
        seen = {self.identity}
        layer = [self.identity]
        while len(out) < size and layer:
            nxt = set()
            for x in layer:
                for s in steps:
                    y = self.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        nxt.add(y)
            layer = sorted(nxt)
            out.extend(layer[: size - len(out)])
        return out

    def to_doc(self) -> dict:
        raise NotImplementedError(f"{self.name} has no document form")


def closure(group: Group, gens: Iterable[Payload], start: Iterable[Payload] = ()) -> set:
    """Subgroup generated by ``gens`` (and ``start``) inside a finite group."""
    gens = list(gens)
    found = {group.identity}
    queue = deque([group.identity])
    for x in start:
        if x not in found:
            found.add(x)
            queue.append(x)
    cap = max(max_order(), 10**6)
    while queue:
        x = queue.popleft()
        for s in gens:
            y = group.mul(x, s)
            if y not in found:
                found.add(y)
                queue.append(y)
                if len(found) > cap:
                    raise GroupError(f"closure exceeded {cap} elements")
    return found


def enumerate_elements(group: Group, bound: int | None = None) -> list:
    """All elements of a finite group, or the radius-``bound`` ball of an infinite one."""
    if group.is_finite:
        return list(group.elements())
    if bound is None:
        raise UnboundedEnumeration(f"unbounded enumeration: {group.name} is infinite and no bound was given")
    return group.ball(bound)


# ---------------------------------------------------------------------------
# kinds


@dataclass(frozen=True)
class Cyclic(Group):
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise GroupError("cyclic order must be non-negative")

    @property
    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.n if self.n else a + b

    def inv(self, a):
        return (-a) % self.n if self.n else -a

    def contains(self, a):
        return isinstance(a, int) and not isinstance(a, bool) and (self.n == 0 or 0 <= a < self.n)

    @property
    def generators(self):
        return () if self.n == 1 else (1,)

    @property
    def is_finite(self):
        return self.n > 0

    @property
    def name(self):
        return f"Z_{self.n}" if self.n else "Z"

    def elements(self):
        if not self.n:
            return super().elements()
        return tuple(range(self.n))

    def index(self, x):
        return x

    def element_at(self, i):
        return i

    def to_doc(self):
        return {"kind": "cyclic", "n": self.n}


@dataclass(frozen=True)
class FreeAbelian(Group):
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise GroupError("free abelian rank must be positive")

    @property
    def identity(self):
        return (0,) * self.rank

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def contains(self, a):
        return isinstance(a, tuple) and len(a) == self.rank and all(isinstance(x, int) for x in a)

    @property
    def generators(self):
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    @property
    def is_finite(self):
        return False

    @property
    def name(self):
        return "Z" if self.rank == 1 else f"Z^{self.rank}"

    def to_doc(self):
        return {"kind": "free_abelian", "rank": self.rank}


def compose(a: Sequence[int], b: Sequence[int]) -> tuple:
    """``a ∘ b`` on 0-based one-line permutations (apply ``b`` first)."""
    return tuple(a[i] for i in b)


def invert_perm(a: Sequence[int]) -> tuple:
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def is_bijection(a: Sequence[int], degree: int) -> bool:
    return len(a) == degree and sorted(a) == list(range(degree))


def perm_from_cycles(degree: int, *cycles: Sequence[int]) -> tuple:
    """Permutation from 1-based cycles, e.g. ``perm_from_cycles(4, (1, 3), (2, 4))``."""
    img = list(range(degree))
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            img[a - 1] = b - 1
    return tuple(img)


@dataclass(frozen=True)
class Permutation(Group):
    degree: int
    gens: tuple
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.degree < 1:
            raise GroupError("permutation degree must be positive")
        gens = tuple(tuple(int(x) for x in g) for g in self.gens)
        for g in gens:
            if not is_bijection(g, self.degree):
                raise GroupError(f"generator {g} is not a bijection of {self.degree} points")
        object.__setattr__(self, "gens", gens)

    @classmethod
    def from_images(cls, degree: int, images: Iterable[Sequence[int]], label: str = "") -> "Permutation":
        """Build from one-line images on ``1..degree``."""
        return cls(degree, tuple(tuple(x - 1 for x in img) for img in images), label)

    @property
    def identity(self):
        return tuple(range(self.degree))

    def mul(self, a, b):
        return tuple(a[i] for i in b)

    def inv(self, a):
        return invert_perm(a)

    def contains(self, a):
        return isinstance(a, tuple) and is_bijection(a, self.degree)

    @property
    def generators(self):
        return self.gens

    @property
    def is_finite(self):
        return True

    @property
    def name(self):
        return self.label or f"Perm({self.degree}; {len(self.gens)} gens)"

    def to_doc(self):
        return {
            "kind": "permutation",
            "degree": self.degree,
            "generators": [[x + 1 for x in g] for g in self.gens],
        }


def symmetric_group(n: int) -> Permutation:
    gens = []
    if n >= 2:
        gens.append(perm_from_cycles(n, (1, 2)))
    if n >= 3:
        gens.append(perm_from_cycles(n, tuple(range(1, n + 1))))
    return Permutation(n, tuple(gens), label=f"S_{n}")


@dataclass(frozen=True)
class Table(Group):
    """Group given by a Cayley table on ``0..order-1``; validated on construction."""

    order_: int
    table: tuple
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.order_
        if n < 1:
            raise GroupError("table order must be positive")
        if n > max_order():
            raise GroupError(f"table order {n} exceeds the cap {max_order()}; use a permutation group")
        rows = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", rows)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GroupError("table must be square of the declared order")
        t = np.array(rows, dtype=np.int64)
        if t.min() < 0 or t.max() >= n:
            raise GroupError("table entries out of range")
        ids = [e for e in range(n) if all(rows[e][x] == x and rows[x][e] == x for x in range(n))]
        if not ids:
            raise GroupError("table has no identity")
        e = ids[0]
        for x in range(n):
            if e not in rows[x]:
                raise GroupError(f"element {x} has no inverse")
        # Light's test: associativity against a generating set suffices.
        for g in _greedy_generators(rows, e):
            lhs = t[t, g]
            rhs = t[np.arange(n)[:, None], t[:, g][None, :]]
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                a, b = bad[0]
                raise GroupError(f"table not associative at ({a}, {b}, {g})")
        object.__setattr__(self, "_e", e)

    @property
    def identity(self):
        return self._e

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self.table[a].index(self._e)

    def contains(self, a):
        return isinstance(a, int) and 0 <= a < self.order_

    @cached_property
    def _gens(self):
        return tuple(_greedy_generators(self.table, self._e))

    @property
    def generators(self):
        return self._gens

    @property
    def is_finite(self):
        return True

    @property
    def name(self):
        return self.label or f"Table({self.order_})"

    def elements(self):
        return tuple(range(self.order_))

    def index(self, x):
        return x

    def to_doc(self):
        return {"kind": "table", "order": self.order_, "table": [x for row in self.table for x in row]}


def _greedy_generators(rows: Sequence[Sequence[int]], e: int) -> list[int]:
    n = len(rows)
    gens: list[int] = []
    span = {e}
    for x in range(n):
        if x in span:
            continue
        gens.append(x)
        queue = deque(span)
        while queue:
            y = queue.popleft()
            for s in gens:
                z = rows[y][s]
                if z not in span:
                    span.add(z)
                    queue.append(z)
        if len(span) == n:
            break
    return gens


def _matvec(mat, v):
    return tuple(sum(a * b for a, b in zip(row, v)) for row in mat)


def _matmul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))) for i in range(len(a)))


def _det(mat) -> int:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    return sum((-1) ** j * mat[0][j] * _det([row[:j] + row[j + 1:] for row in mat[1:]]) for j in range(n))


@dataclass(frozen=True)
class AbelianByFinite(Group):
    """Extension of ``Z^m`` by a finite group ``H``.

    ``(v1, h1)(v2, h2) = (v1 + action(h1) v2 + cocycle(h1, h2), h1 h2)``.
    Build with :meth:`build`; the action must be a homomorphism into
    ``GL(m, Z)`` and the cocycle a normalized 2-cocycle.
    """

    rank: int
    top: Group
    action: tuple  # ((h, matrix), ...)
    cocycle: tuple  # (((h1, h2), vector), ...) nonzero entries only
    label: str = field(default="", compare=False)

    @classmethod
    def build(cls, rank: int, top: Group, action: dict | None = None, cocycle: dict | None = None, label: str = ""):
        if not top.is_finite:
            raise GroupError("the quotient of an abelian-by-finite group must be finite")
        eye = tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank))
        action = action or {}
        act = tuple((h, tuple(tuple(int(x) for x in row) for row in action.get(h, eye))) for h in top.elements())
        zero = (0,) * rank
        coc = []
        for h1 in top.elements():
            for h2 in top.elements():
                v = tuple(int(x) for x in (cocycle or {}).get((h1, h2), zero))
                if v != zero:
                    coc.append(((h1, h2), v))
        return cls(rank, top, act, tuple(coc), label)

    def __post_init__(self):
        m, H = self.rank, self.top
        if m < 1:
            raise GroupError("rank must be positive")
        theta = self._theta
        for h, mat in theta.items():
            if len(mat) != m or any(len(r) != m for r in mat):
                raise GroupError(f"action matrix of {h} is not {m}x{m}")
            if abs(_det(mat)) != 1:
                raise GroupError(f"action matrix of {h} is not invertible over Z")
        for h1 in H.elements():
            for h2 in H.elements():
                if _matmul(theta[h1], theta[h2]) != theta[H.mul(h1, h2)]:
                    raise GroupError(f"action is not a homomorphism at ({h1}, {h2})")
        e = H.identity
        for h in H.elements():
            if self._c(e, h) != self._zero or self._c(h, e) != self._zero:
                raise GroupError(f"cocycle not normalized at {h}")
        for h1, h2, h3 in itertools.product(H.elements(), repeat=3):
            lhs = _vadd(_matvec(theta[h1], self._c(h2, h3)), self._c(h1, H.mul(h2, h3)))
            rhs = _vadd(self._c(h1, h2), self._c(H.mul(h1, h2), h3))
            if lhs != rhs:
                raise GroupError(f"cocycle identity fails at ({h1}, {h2}, {h3})")

    @cached_property
    def _theta(self):
        return dict(self.action)

    @cached_property
    def _coc(self):
        return dict(self.cocycle)

    @cached_property
    def _zero(self):
        return (0,) * self.rank

    def _c(self, h1, h2):
        return self._coc.get((h1, h2), self._zero)

    @property
    def identity(self):
        return (self._zero, self.top.identity)

    def mul(self, a, b):
        (v1, h1), (v2, h2) = a, b
        w = _vadd(_vadd(v1, _matvec(self._theta[h1], v2)), self._c(h1, h2))
        return (w, self.top.mul(h1, h2))

    def inv(self, a):
        v, h = a
        hi = self.top.inv(h)
        neg = tuple(-x - y for x, y in zip(v, self._c(h, hi)))
        return (_matvec(self._theta[hi], neg), hi)

    def contains(self, a):
        return (
            isinstance(a, tuple)
            and len(a) == 2
            and FreeAbelian(self.rank).contains(a[0])
            and self.top.contains(a[1])
        )

    @property
    def generators(self):
        unit = tuple((tuple(int(i == j) for j in range(self.rank)), self.top.identity) for i in range(self.rank))
        return unit + tuple((self._zero, s) for s in self.top.generators)

    @property
    def is_finite(self):
        return False

    @property
    def name(self):
        return self.label or f"Z^{self.rank}.{self.top.name}"

    def project(self, a):
        return a[1]

    def to_doc(self):
        return {
            "kind": "abelian_by_finite",
            "rank": self.rank,
            "top": self.top.to_doc(),
            "action": [[payload_to_json(h), [list(r) for r in mat]] for h, mat in self.action],
            "cocycle": [[payload_to_json(h1), payload_to_json(h2), list(v)] for (h1, h2), v in self.cocycle],
        }


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class Wreath(Group):
    """The unrestricted wreath product ``base ≀ top`` with a finite top group."""

    base: Group
    top: Group

    def __post_init__(self):
        if not self.top.is_finite:
            raise GroupError("wreath top group must be finite")

    @cached_property
    def top_elements(self) -> tuple:
        return self.top.elements()

    @cached_property
    def _shift_src(self) -> dict:
        # (^g F)(x) = F(g^-1 x): position of g^-1 x for every x
        T = self.top
        pos = {x: i for i, x in enumerate(self.top_elements)}
        return {g: tuple(pos[T.mul(T.inv(g), x)] for x in self.top_elements) for g in self.top_elements}

    def shift(self, g, F):
        src = self._shift_src[g]
        return tuple(F[j] for j in src)

    @property
    def identity(self):
        return ((self.base.identity,) * len(self.top_elements), self.top.identity)

    def mul(self, a, b):
        (F1, g1), (F2, g2) = a, b
        bm = self.base.mul
        src = self._shift_src[g1]
        return (tuple(bm(F1[i], F2[j]) for i, j in enumerate(src)), self.top.mul(g1, g2))

    def inv(self, a):
        # (F, t)^-1 = (x -> F(t x)^-1, t^-1)
        F, t = a
        T = self.top
        pos = self._top_pos
        bi = self.base.inv
        return (tuple(bi(F[pos[T.mul(t, x)]]) for x in self.top_elements), T.inv(t))

    @cached_property
    def _top_pos(self):
        return {x: i for i, x in enumerate(self.top_elements)}

    def contains(self, a):
        try:
            F, t = a
        except (TypeError, ValueError):
            return False
        return (
            isinstance(F, tuple)
            and len(F) == len(self.top_elements)
            and all(self.base.contains(x) for x in F)
            and self.top.contains(t)
        )

    @property
    def generators(self):
        k = len(self.top_elements)
        e = self.base.identity
        at1 = self._top_pos[self.top.identity]
        gens = []
        for b in self.base.generators:
            F = [e] * k
            F[at1] = b
            gens.append((tuple(F), self.top.identity))
        for s in self.top.generators:
            gens.append(((e,) * k, s))
        return tuple(gens)

    @property
    def is_finite(self):
        return self.base.is_finite

    @property
    def name(self):
        b = self.base.name
        return f"{b}≀{self.top.name}"

    def order(self):
        if not self.is_finite:
            return None
        return self.base.order() ** len(self.top_elements) * len(self.top_elements)

    # index arithmetic: canonical lexicographic order on (F, t) is mixed radix

    def elements(self):
        return self._elements

    @cached_property
    def _elements(self):
        if not self.is_finite:
            raise UnboundedEnumeration(f"unbounded enumeration: {self.name} is infinite")
        bel = self.base.elements()
        return tuple(
            (F, t) for F in itertools.product(bel, repeat=len(self.top_elements)) for t in self.top_elements
        )

    def index(self, x):
        F, t = x
        nb = self.base.order()
        i = 0
        for f in F:
            i = i * nb + self.base.index(f)
        return i * len(self.top_elements) + self.top.index(t)

    def element_at(self, i):
        k = len(self.top_elements)
        nb = self.base.order()
        i, ti = divmod(i, k)
        digits = []
        for _ in range(k):
            i, d = divmod(i, nb)
            digits.append(self.base.element_at(d))
        return (tuple(reversed(digits)), self.top.element_at(ti))

    def decode_indices(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split canonical indices into (base indices per top position, top index)."""
        k = len(self.top_elements)
        nb = self.base.order()
        idx = np.asarray(idx, dtype=np.int64)
        rest, ti = np.divmod(idx, k)
        F = np.empty((len(idx), k), dtype=np.int64)
        for q in range(k - 1, -1, -1):
            rest, F[:, q] = np.divmod(rest, nb)
        return F, ti

    def encode_indices(self, F: np.ndarray, ti: np.ndarray) -> np.ndarray:
        nb = self.base.order()
        out = np.zeros(F.shape[:-1], dtype=np.int64)
        for q in range(F.shape[-1]):
            out = out * nb + F[..., q]
        return out * len(self.top_elements) + ti

    @cached_property
    def _table(self):
        n = self.order()
        if n > max_order():
            raise GroupError(f"order {n} exceeds the tabulation cap {max_order()}")
        bt = self.base.mul_table()
        tt = self.top.mul_table()
        src = np.array([self._shift_src[g] for g in self.top_elements], dtype=np.int64)
        F, t = self.decode_indices(np.arange(n))
        # product (a, b): F_a[q] * F_b[src[t_a, q]]
        Fb_shift = np.take_along_axis(
            np.broadcast_to(F[None, :, :], (n, n, F.shape[1])),
            np.broadcast_to(src[t][:, None, :], (n, n, F.shape[1])),
            axis=2,
        )
        prodF = bt[F[:, None, :], Fb_shift]
        prodt = tt[t[:, None], t[None, :]]
        return self.encode_indices(prodF, prodt)

    def to_doc(self):
        return {"kind": "wreath", "base": self.base.to_doc(), "top": self.top.to_doc()}


def iterated_wreath(ns: Sequence[int]) -> Group:
    """``Z_{n1} ≀ Z_{n2} ≀ ... ≀ Z_{nr}``, left-nested: ``((Z_{n1} ≀ Z_{n2}) ≀ ...) ≀ Z_{nr}``."""
    if not ns:
        return Cyclic(1)
    g: Group = Cyclic(ns[0])
    for n in ns[1:]:
        g = Wreath(g, Cyclic(n))
    return g


def iterated_wreath_order(ns: Sequence[int]) -> int:
    size = 1
    for i, n in enumerate(ns):
        size = n if i == 0 else size**n * n
    return size


# ---------------------------------------------------------------------------
# subgroups and quotients


@dataclass(frozen=True)
class Subgroup(Group):
    """Subgroup of a finite group generated by ``gens``; payloads are the parent's."""

    parent: Group
    gens: tuple

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))

    @cached_property
    def member_set(self) -> frozenset:
        return frozenset(closure(self.parent, self.gens))

    @cached_property
    def _elements(self):
        return tuple(sorted(self.member_set))

    @property
    def identity(self):
        return self.parent.identity

    def mul(self, a, b):
        return self.parent.mul(a, b)

    def inv(self, a):
        return self.parent.inv(a)

    def contains(self, a):
        try:
            return a in self.member_set
        except TypeError:
            return False

    @property
    def generators(self):
        return self.gens

    @property
    def is_finite(self):
        return True

    @property
    def name(self):
        return f"<{len(self.gens)} gens; order {self.order()}> in {self.parent.name}"

    def is_trivial(self) -> bool:
        return len(self.member_set) == 1


def whole(group: Group) -> Subgroup:
    return Subgroup(group, tuple(group.generators))


def is_normal(sub: Subgroup, within: Group) -> tuple[bool, tuple | None]:
    """Normality of ``sub`` in ``within`` via conjugates of generators; returns a witness (g, n) on failure."""
    for g in within.generators:
        for n in sub.generators:
            if not sub.contains(within.conj(g, n)):
                return False, (g, n)
    return True, None


def normal_closure(group: Group, gens: Iterable) -> Subgroup:
    gens = list(gens)
    while True:
        sub = Subgroup(group, tuple(gens))
        ok, wit = is_normal(sub, group)
        if ok:
            return sub
        g, n = wit
        gens.append(group.conj(g, n))


def derived_subgroup(group: Group) -> Subgroup:
    gens = group.generators
    comms = sorted({group.commutator(a, b) for a in gens for b in gens} - {group.identity})
    return normal_closure(group, comms)


@dataclass(frozen=True)
class Quotient(Group):
    """``parent / normal`` with cosets named by their smallest representative."""

    parent: Group
    normal: Subgroup

    def __post_init__(self):
        ok, wit = is_normal(self.normal, self.parent)
        if not ok:
            raise GroupError(f"normality violated at {wit}")

    @cached_property
    def _rep(self) -> dict:
        rep = {}
        for g in self.parent.elements():
            if g in rep:
                continue
            coset = [self.parent.mul(g, n) for n in self.normal.elements()]
            r = min(coset)
            for x in coset:
                rep[x] = r
        return rep

    def project(self, g):
        return self._rep[g]

    def transversal(self, q):
        """Coset representative: the identity for the trivial coset, else the smallest member."""
        return self.parent.identity if q == self.identity else q

    @property
    def identity(self):
        return self._rep[self.parent.identity]

    def mul(self, a, b):
        return self._rep[self.parent.mul(a, b)]

    def inv(self, a):
        return self._rep[self.parent.inv(a)]

    def contains(self, a):
        try:
            return self._rep.get(a) == a
        except TypeError:
            return False

    @cached_property
    def _elements(self):
        return tuple(sorted(set(self._rep.values())))

    @property
    def generators(self):
        return tuple(sorted({self._rep[g] for g in self.parent.generators} - {self.identity}))

    @property
    def is_finite(self):
        return True

    @property
    def name(self):
        return f"{self.parent.name}/N(order {self.normal.order()})"


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class SubnormalSeries:
    """``G = G_0 ⊵ G_1 ⊵ ... ⊵ G_r = 1`` with the orders of the quotients."""

    group: Group
    terms: tuple  # of Subgroup, terms[0] is the whole group
    quotient_orders: tuple

    def __len__(self):
        return len(self.quotient_orders)

    def check(self) -> list[str]:
        """Problems found (empty when valid): normality, cyclicity, recorded orders."""
        problems = []
        for i in range(1, len(self.terms)):
            upper, lower = self.terms[i - 1], self.terms[i]
            if not lower.member_set <= upper.member_set:
                problems.append(f"term {i} not contained in term {i - 1}")
                continue
            ok, wit = is_normal(lower, upper)
            if not ok:
                problems.append(f"term {i} not normal in term {i - 1}: witness {wit}")
                continue
            idx = upper.order() // lower.order()
            if idx != self.quotient_orders[i - 1]:
                problems.append(f"quotient {i} has order {idx}, recorded {self.quotient_orders[i - 1]}")
            if not any(_coset_order(upper, lower, g) == idx for g in upper.elements()):
                problems.append(f"quotient {i} is not cyclic")
        if self.terms and not self.terms[-1].is_trivial():
            problems.append("series does not end at the trivial group")
        return problems

    def to_doc(self) -> dict:
        return {
            "quotient_orders": list(self.quotient_orders),
            "terms": [[payload_to_json(g) for g in t.generators] for t in self.terms],
        }


def _coset_order(upper: Group, lower: Subgroup, g) -> int:
    x, k = g, 1
    while not lower.contains(x):
        x = upper.mul(x, g)
        k += 1
    return k


def derived_series(group: Group) -> SubnormalSeries:
    """``G ⊵ [G,G] ⊵ ...``; raises :class:`NotSolvable` carrying the perfect subgroup it stalls at."""
    if not group.is_finite:
        raise GroupError("derived series needs a finite group")
    terms = [whole(group)]
    while not terms[-1].is_trivial():
        cur = terms[-1]
        nxt = derived_subgroup(cur)
        nxt = Subgroup(group, nxt.gens)
        if nxt.order() == cur.order():
            raise NotSolvable(
                f"derived series does not terminate: stalls at a perfect subgroup of order {cur.order()}", cur
            )
        terms.append(nxt)
    orders = tuple(terms[i].order() // terms[i + 1].order() for i in range(len(terms) - 1))
    return SubnormalSeries(group, tuple(terms), orders)


def _smallest_prime_factor(n: int) -> int:
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


def prime_cyclic_series(group: Group) -> SubnormalSeries:
    """Subnormal series with every quotient cyclic of prime order.

    Each step takes an index-p subgroup containing the commutator subgroup
    (hence normal), with p the smallest prime dividing the abelianization,
    grown greedily in canonical element order.
    """
    derived_series(group)  # raises on non-solvable input
    terms = [whole(group)]
    orders = []
    while not terms[-1].is_trivial():
        K = terms[-1]
        D = Subgroup(group, derived_subgroup(K).gens)
        ab = K.order() // D.order()
        p = _smallest_prime_factor(ab)
        kel = K.elements()
        seeds = list(D.gens)
        for k in kel:
            seeds.append(group.power(k, p))
            if math.gcd(_coset_order(K, D, k), p) == 1:
                seeds.append(k)
        seeds = sorted(set(seeds) - {group.identity})
        M = Subgroup(group, tuple(seeds))
        for k in kel:
            if K.order() // M.order() == p:
                break
            if M.contains(k):
                continue
            cand = Subgroup(group, M.gens + (k,))
            if K.order() // cand.order() >= p:
                M = cand
        if K.order() // M.order() != p:
            raise GroupError("failed to find a prime-index normal subgroup")  # unreachable for solvable input
        terms.append(M)
        orders.append(p)
    return SubnormalSeries(group, tuple(terms), tuple(orders))


def is_solvable(group: Group) -> bool:
    try:
        derived_series(group)
    except NotSolvable:
        return False
    return True


def payload_to_json(x):
    if isinstance(x, tuple):
        return [payload_to_json(y) for y in x]
    return x


def json_to_payload(x):
    if isinstance(x, list):
        return tuple(json_to_payload(y) for y in x)
    return x

"""Blocks as rooted slot-trees and the permutation actions they carry on their leaves.

A block is a cell with ordered boundary slots; a slot is either open (a leaf)
or glued to the root of another block. Leaves are addressed by 1-based
slot-index paths. Only the permutation of leaves induced by a symmetry (its
"hat") is modeled, together with a provenance string naming the geometric
construction that realizes it.

Two properties of an action ``G → Sym(leaves)`` drive everything:

* P1: distinct group elements act by distinct permutations.
* P2: some leaf ``p`` has pairwise distinct images ``g·p`` (a free orbit).
"""

from __future__ import annotations

import itertools
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterator, NamedTuple, Sequence

import numpy as np

from .certificate import Certificate
from .groups import Cyclic, Group, Wreath, compose, payload_to_json
from .wreath import Homomorphism

DEFAULT_WINDOW = 100
DEFAULT_MAX_VERIFY = 2_000_000


def max_verify() -> int:
    """Largest group order verified element by element."""
    return int(os.environ.get("CORKCALC_MAX_VERIFY", DEFAULT_MAX_VERIFY))


class BlockError(ValueError):
    pass


# ---------------------------------------------------------------------------
# blocks


class Block(ABC):
    @property
    @abstractmethod
    def leaf_count(self) -> int | None:
        """Number of open slots, ``None`` when countably infinite."""

    @property
    @abstractmethod
    def cell_count(self) -> int | None: ...

    @abstractmethod
    def is_leaf(self, path: tuple) -> bool: ...

    @abstractmethod
    def leaves(self) -> Iterator[tuple]: ...

    @abstractmethod
    def _doc(self, memo: dict) -> dict: ...

    def glue_everywhere(self, inner: "Block") -> "Block":
        return Grafted(self, inner)

    def to_doc(self) -> dict:
        return self._doc({})


@dataclass(frozen=True, eq=False)
class Cell(Block):
    """One cell. Finite cells list their slots; countable cells index slots by ``Z``.

    A countable cell may carry ``fill`` (glued into every slot) and ``extra``
    (individually glued slots).
    """

    slots: tuple = ()
    countable: bool = False
    fill: Block | None = None
    extra: tuple = ()
    tag: str = ""

    @classmethod
    def open(cls, n: int, tag: str = "") -> "Cell":
        return cls(slots=(None,) * n, tag=tag)

    def child(self, k: int) -> Block | None:
        if self.countable:
            if not isinstance(k, int):
                raise BlockError(f"slot {k!r} is not an integer")
            return dict(self.extra).get(k, self.fill)
        if not isinstance(k, int) or not 1 <= k <= len(self.slots):
            raise BlockError(f"no slot {k!r} in a cell with {len(self.slots)} slots")
        return self.slots[k - 1]

    @cached_property
    def leaf_count(self):
        if self.countable:
            return None
        total = 0
        for c in self.slots:
            if c is None:
                total += 1
            else:
                n = c.leaf_count
                if n is None:
                    return None
                total += n
        return total

    @cached_property
    def cell_count(self):
        if self.countable:
            return None
        total = 1
        for c in self.slots:
            if c is not None:
                n = c.cell_count
                if n is None:
                    return None
                total += n
        return total

    def is_leaf(self, path):
        if not path:
            return False
        try:
            c = self.child(path[0])
        except BlockError:
            return False
        if c is None:
            return len(path) == 1
        return c.is_leaf(tuple(path[1:]))

    def leaves(self):
        if self.countable:
            raise BlockError("countably many leaves")
        for k, c in enumerate(self.slots, 1):
            if c is None:
                yield (k,)
            else:
                for p in c.leaves():
                    yield (k,) + p

    def glue(self, path: tuple, inner: Block) -> "Cell":
        """Attach ``inner`` at the open leaf ``path``."""
        if not path:
            raise BlockError("empty slot path")
        k, rest = path[0], tuple(path[1:])
        c = self.child(k)
        if not rest:
            if c is not None:
                raise BlockError(f"slot already glued at {path}")
            return self._with_child(k, inner)
        if c is None:
            raise BlockError(f"slot {k} is open; cannot descend to {path}")
        if not isinstance(c, Cell):
            raise BlockError("can only glue into explicit cells")
        return self._with_child(k, c.glue(rest, inner))

    def _with_child(self, k, child):
        if self.countable:
            extra = dict(self.extra)
            extra[k] = child
            return Cell(countable=True, fill=self.fill, extra=tuple(sorted(extra.items())), tag=self.tag)
        slots = list(self.slots)
        slots[k - 1] = child
        return Cell(slots=tuple(slots), tag=self.tag)

    def glue_everywhere(self, inner):
        memo: dict = {}

        def rec(b):
            if id(b) in memo:
                return memo[id(b)]
            if isinstance(b, Cell):
                if b.countable:
                    fill = inner if b.fill is None else rec(b.fill)
                    out = Cell(countable=True, fill=fill, extra=tuple((k, rec(c)) for k, c in b.extra), tag=b.tag)
                else:
                    out = Cell(slots=tuple(inner if c is None else rec(c) for c in b.slots), tag=b.tag)
            else:
                out = b.glue_everywhere(inner)
            memo[id(b)] = out
            return out

        return rec(self)

    def _doc(self, memo):
        if id(self) in memo:
            return {"ref": memo[id(self)]}
        memo[id(self)] = len(memo)
        doc: dict[str, Any] = {"id": memo[id(self)], "cell": "countable" if self.countable else "finite"}
        if self.tag:
            doc["tag"] = self.tag
        if self.countable:
            doc["fill"] = None if self.fill is None else self.fill._doc(memo)
            doc["glued"] = [[k, c._doc(memo)] for k, c in self.extra]
        else:
            doc["slots"] = [None if c is None else c._doc(memo) for c in self.slots]
        return doc


@dataclass(frozen=True, eq=False)
class Grafted(Block):
    """``inner`` glued into every leaf of ``outer`` (kept lazy)."""

    outer: Block
    inner: Block

    @cached_property
    def leaf_count(self):
        a, b = self.outer.leaf_count, self.inner.leaf_count
        return None if a is None or b is None else a * b

    @cached_property
    def cell_count(self):
        a, b, la = self.outer.cell_count, self.inner.cell_count, self.outer.leaf_count
        return None if None in (a, b, la) else a + la * b

    def is_leaf(self, path):
        path = tuple(path)
        return any(self.outer.is_leaf(path[:k]) and self.inner.is_leaf(path[k:]) for k in range(1, len(path)))

    def leaves(self):
        inner = list(self.inner.leaves())
        for a in self.outer.leaves():
            for b in inner:
                yield a + b

    def _doc(self, memo):
        return {"graft": {"outer": self.outer._doc(memo), "inner": self.inner._doc(memo)}}


@dataclass(frozen=True, eq=False)
class CopyTree(Block):
    """Complete tree of ``depth`` levels of ``template`` copies, each leaf carrying the next level."""

    template: Block
    depth: int

    @cached_property
    def leaf_count(self):
        n = self.template.leaf_count
        return None if n is None else n**self.depth

    @cached_property
    def copies(self) -> int:
        n = self.template.leaf_count
        return sum(n**r for r in range(self.depth))

    @cached_property
    def cell_count(self):
        c = self.template.cell_count
        return None if c is None else c * self.copies

    def split(self, path) -> list[tuple] | None:
        """Cut a leaf path into ``depth`` template leaves."""
        path = tuple(path)
        parts: list[tuple] = []
        start = 0
        while len(parts) < self.depth:
            for k in range(start + 1, len(path) + 1):
                if self.template.is_leaf(path[start:k]):
                    parts.append(path[start:k])
                    start = k
                    break
            else:
                return None
        return parts if start == len(path) else None

    def is_leaf(self, path):
        return self.split(path) is not None

    def leaves(self):
        base = list(self.template.leaves())
        for word in itertools.product(base, repeat=self.depth):
            yield tuple(x for part in word for x in part)

    def _doc(self, memo):
        return {"copy_tree": {"template": self.template._doc(memo), "depth": self.depth, "copies": self.copies}}


def glue_block(outer: Cell, slot: tuple, inner: Block) -> Cell:
    return outer.glue(tuple(slot), inner)


# ---------------------------------------------------------------------------
# actions


class ShadowAction(ABC):
    group: Group
    p2_witness: Any = None
    provenance: str = ""
    exact: bool = False  # orbit map inverted in closed form

    @abstractmethod
    def apply(self, g, leaf): ...

    @abstractmethod
    def is_leaf(self, leaf) -> bool: ...

    @property
    def leaf_count(self) -> int | None:
        return None

    def orbit_point(self, g):
        if self.p2_witness is None:
            raise BlockError("action has no P2 witness")
        return self.apply(g, self.p2_witness)

    @cached_property
    def _orbit_lookup(self) -> dict:
        if not self.group.is_finite:
            raise BlockError("orbit lookup needs a finite group or a closed-form inverse")
        return {self.orbit_point(g): g for g in self.group.elements()}

    def locate(self, leaf):
        """The unique ``g`` with ``g·p = leaf``, or ``None`` off the orbit."""
        return self._orbit_lookup.get(leaf)

    def fingerprint(self, g):
        """A hashable value that determines, and is determined by, the permutation of ``g``."""
        raise NotImplementedError

    def fingerprint_rows(self, idx: np.ndarray) -> np.ndarray:
        return np.array([self.fingerprint(self.group.element_at(int(i))) for i in idx], dtype=np.int64)

    def orbit_rows(self, idx: np.ndarray) -> np.ndarray:
        """Flattened orbit points ``g·p`` for the element indices ``idx``."""
        G, p = self.group, self.p2_witness
        return np.array([_flatten(self.apply(G.element_at(int(i)), p)) for i in idx],
                        dtype=np.int64).reshape(len(idx), -1)

    def to_doc(self) -> dict:
        return {"provenance": self.provenance, "p2_witness": payload_to_json(self.p2_witness)}


class FiniteAction(ShadowAction):
    """Action on an explicit finite leaf list; hats are permutations of leaf indices."""

    leaves: tuple

    @abstractmethod
    def hat(self, g) -> tuple: ...

    @cached_property
    def leaf_index(self) -> dict:
        return {x: i for i, x in enumerate(self.leaves)}

    @property
    def leaf_count(self):
        return len(self.leaves)

    def is_leaf(self, leaf):
        return leaf in self.leaf_index

    def apply(self, g, leaf):
        return self.leaves[self.hat(g)[self.leaf_index[leaf]]]

    def fingerprint(self, g):
        return self.hat(g)

    def hat_rows(self, idx: np.ndarray) -> np.ndarray:
        G = self.group
        return np.array([self.hat(G.element_at(int(i))) for i in idx], dtype=np.int64).reshape(len(idx), -1)

    def fingerprint_rows(self, idx):
        return self.hat_rows(idx)

    def orbit_rows(self, idx):
        col = self.leaf_index[self.p2_witness]
        return self.hat_rows(idx)[:, col : col + 1]

    def to_doc(self):
        doc = super().to_doc()
        doc["leaves"] = len(self.leaves)
        doc["generators"] = [
            [payload_to_json(s), [i + 1 for i in self.hat(s)]] for s in self.group.generators
        ]
        return doc


class TableAction(FiniteAction):
    def __init__(self, group: Group, leaves: Sequence, hats: dict, p2_witness=None, provenance: str = ""):
        self.group = group
        self.leaves = tuple(leaves)
        self._hats = dict(hats)
        self.p2_witness = p2_witness
        self.provenance = provenance

    def hat(self, g):
        return self._hats[g]


class GluedAction(FiniteAction):
    """``base ≀ top`` on leaves ``(i, j)``: top permutes copies, then the base twists the orbit copies.

    ``(F, h)`` sends ``(i, j)`` to ``(h·i, F(g)·j)`` where ``h·i = g·p``, and to
    ``(h·i, j)`` when ``h·i`` is off the orbit of ``p``.
    """

    def __init__(self, phi: FiniteAction, psi: FiniteAction, provenance: str = ""):
        if phi.p2_witness is None:
            raise BlockError("the top action needs a P2 witness")
        self.phi, self.psi = phi, psi
        self.group = Wreath(psi.group, phi.group)
        self.leaves = tuple(a + b for a in phi.leaves for b in psi.leaves)
        self.p2_witness = None
        self.provenance = provenance or "wreath gluing of block copies"

    @cached_property
    def _orbit_pos(self) -> np.ndarray:
        """Leaf index of phi → position of the top element sending p there (-1 off orbit)."""
        phi = self.phi
        out = np.full(len(phi.leaves), -1, dtype=np.int64)
        p = phi.leaf_index[phi.p2_witness]
        for pos, g in enumerate(self.group.top_elements):
            out[phi.hat(g)[p]] = pos
        return out

    def hat(self, x):
        F, h = x
        sig = self.phi.hat(h)
        Lpsi = len(self.psi.leaves)
        ident = range(Lpsi)
        out = []
        for i in range(len(self.phi.leaves)):
            ip = sig[i]
            pos = self._orbit_pos[ip]
            tau = self.psi.hat(F[pos]) if pos >= 0 else ident
            base = ip * Lpsi
            out.extend(base + t for t in tau)
        return tuple(out)

    def hat_rows(self, idx):
        W = self.group
        Fi, ti = W.decode_indices(np.asarray(idx, dtype=np.int64))
        top_rows = self.phi.hat_rows(np.arange(W.top.order()))
        sig = top_rows[ti]  # (B, Lphi)
        pos = self._orbit_pos[sig]  # (B, Lphi)
        needed, inv = np.unique(Fi, return_inverse=True)
        inv = inv.reshape(Fi.shape)
        base_rows = self.psi.hat_rows(needed)
        Lpsi = len(self.psi.leaves)
        ident = np.arange(Lpsi, dtype=np.int64)
        table = np.vstack([base_rows, ident[None, :]])
        B = len(Fi)
        # base element index at each copy, identity row when off the orbit
        which = np.where(pos >= 0, np.take_along_axis(inv, np.maximum(pos, 0), axis=1), len(needed))
        tau = table[which]  # (B, Lphi, Lpsi)
        return (sig[:, :, None] * Lpsi + tau).reshape(B, -1)

    def to_doc(self):
        return {"provenance": self.provenance, "rule": "wreath gluing", "top": self.phi.to_doc(), "base": self.psi.to_doc()}


class RestrictedFiniteAction(FiniteAction):
    def __init__(self, base: FiniteAction, hom: Homomorphism):
        self.base, self.hom = base, hom
        self.group = hom.domain
        self.leaves = base.leaves
        self.p2_witness = base.p2_witness
        self.provenance = f"{base.provenance}, restricted along {hom.provenance}"

    def hat(self, g):
        return self.base.hat(self.hom(g))

    def hat_rows(self, idx):
        G, W = self.group, self.base.group
        return self.base.hat_rows(np.array([W.index(self.hom(G.element_at(int(i)))) for i in idx], dtype=np.int64))


class WordAction(ShadowAction):
    """Componentwise action on words ``(i_1, ..., i_n)`` of 1-based leaf indices of a base action."""

    def __init__(self, base: FiniteAction, provenance: str = ""):
        self.base = base
        self.group = base.group
        self.n = len(base.leaves)
        self.p2_witness = tuple(range(1, self.n + 1))
        self.provenance = provenance or "tree of block copies, permuted levelwise"

    @property
    def leaf_count(self):
        return self.n**self.n

    def is_leaf(self, leaf):
        return isinstance(leaf, tuple) and len(leaf) == self.n and all(
            isinstance(x, int) and 1 <= x <= self.n for x in leaf
        )

    def apply(self, g, leaf):
        sig = self.base.hat(g)
        return tuple(sig[i - 1] + 1 for i in leaf)

    def fingerprint(self, g):
        return self.base.hat(g)

    def fingerprint_rows(self, idx):
        return self.base.hat_rows(idx)

    def orbit_rows(self, idx):
        # the orbit word of (1, ..., n) is the one-line hat shifted to 1-based
        return self.base.hat_rows(idx) + 1

    @cached_property
    def _by_hat(self) -> dict:
        return {self.base.hat(g): g for g in self.group.elements()}

    def locate(self, leaf):
        if not self.is_leaf(leaf):
            return None
        return self._by_hat.get(tuple(i - 1 for i in leaf))

    def leaf_path(self, word: tuple) -> tuple:
        return tuple(x for i in word for x in self.base.leaves[i - 1])

    def to_doc(self):
        return {"provenance": self.provenance, "rule": "componentwise on words", "length": self.n,
                "p2_witness": list(self.p2_witness), "base": self.base.to_doc()}


class RestrictedAction(ShadowAction):
    def __init__(self, base: ShadowAction, hom: Homomorphism):
        self.base, self.hom = base, hom
        self.group = hom.domain
        self.p2_witness = base.p2_witness
        self.provenance = f"{base.provenance}, restricted along {hom.provenance}"
        self.exact = base.exact

    @property
    def leaf_count(self):
        return self.base.leaf_count

    def is_leaf(self, leaf):
        return self.base.is_leaf(leaf)

    def apply(self, g, leaf):
        return self.base.apply(self.hom(g), leaf)

    def fingerprint(self, g):
        return self.base.fingerprint(self.hom(g))

    def _image_index(self, idx):
        G, W = self.group, self.base.group
        return np.array([W.index(self.hom(G.element_at(int(i)))) for i in idx], dtype=np.int64)

    def fingerprint_rows(self, idx):
        return self.base.fingerprint_rows(self._image_index(idx))

    def orbit_rows(self, idx):
        return self.base.orbit_rows(self._image_index(idx))

    def to_doc(self):
        return {"provenance": self.provenance, "rule": "restriction", "base": self.base.to_doc()}


def restrict(action: ShadowAction, hom: Homomorphism) -> ShadowAction:
    """Pull an action back along an injective homomorphism into its group."""
    if hom.codomain != action.group:
        raise BlockError(f"homomorphism lands in {hom.codomain.name}, action is of {action.group.name}")
    if isinstance(action, FiniteAction):
        return RestrictedFiniteAction(action, hom)
    return RestrictedAction(action, hom)


class RegularAction(FiniteAction):
    """A finite group acting on itself by left multiplication; leaves are the elements."""

    def __init__(self, group: Group):
        self.group = group
        self.leaves = tuple(group.elements())
        self.p2_witness = group.identity
        self.provenance = "left regular action"

    def hat(self, g):
        G = self.group
        return tuple(G.index(G.mul(g, x)) for x in self.leaves)

    def locate(self, leaf):
        return leaf if self.group.contains(leaf) else None


# ---------------------------------------------------------------------------
# open (countable) actions


@dataclass(frozen=True)
class RestrictedWreath(Group):
    """Finitely supported ``F: top → base`` with a top element; ``top`` may be infinite.

    Payload ``(support, t)`` with ``support`` a sorted tuple of ``(key, value)``
    pairs, values different from the base identity.
    """

    base: Group
    top: Group

    @property
    def identity(self):
        return ((), self.top.identity)

    def _norm(self, d: dict) -> tuple:
        e = self.base.identity
        return tuple(sorted((k, v) for k, v in d.items() if v != e))

    def value(self, x, key):
        for k, v in x[0]:
            if k == key:
                return v
        return self.base.identity

    def mul(self, a, b):
        (F1, g1), (F2, g2) = a, b
        d = dict(F1)
        e = self.base.identity
        for k, v in F2:
            y = self.top.mul(g1, k)
            d[y] = self.base.mul(d.get(y, e), v)
        return (self._norm(d), self.top.mul(g1, g2))

    def inv(self, a):
        F, t = a
        ti = self.top.inv(t)
        d = {self.top.mul(ti, k): self.base.inv(v) for k, v in F}
        return (self._norm(d), ti)

    def contains(self, a):
        try:
            F, t = a
            return (
                isinstance(F, tuple)
                and all(self.top.contains(k) and self.base.contains(v) and v != self.base.identity for k, v in F)
                and list(F) == sorted(F)
                and len({k for k, _ in F}) == len(F)
                and self.top.contains(t)
            )
        except (TypeError, ValueError):
            return False

    @property
    def generators(self):
        gens = [(((self.top.identity, b),), self.top.identity) for b in self.base.generators]
        gens += [((), s) for s in self.top.generators]
        return tuple(gens)

    @property
    def is_finite(self):
        return False

    @property
    def name(self):
        return f"{self.base.name}≀_r{self.top.name}"

    def element(self, values: dict, t) -> tuple:
        return (self._norm(values), t)


class TranslationAction(ShadowAction):
    """``Z`` acting on integer-indexed leaves ``(i,)`` by ``i ↦ i + k``."""

    def __init__(self):
        self.group = Cyclic(0)
        self.p2_witness = (0,)
        self.provenance = "shear along parallel rays (translation of ray indices)"
        self.exact = True

    def is_leaf(self, leaf):
        return isinstance(leaf, tuple) and len(leaf) == 1 and isinstance(leaf[0], int)

    def apply(self, k, leaf):
        return (leaf[0] + k,)

    def locate(self, leaf):
        return leaf[0] - self.p2_witness[0] if self.is_leaf(leaf) else None

    def fingerprint(self, k):
        return k

    def to_doc(self):
        return {"provenance": self.provenance, "rule": "translation", "p2_witness": [0]}


class OpenGluedAction(ShadowAction):
    """Restricted ``base ≀ top`` on leaves ``(λ, μ)`` for a top action with a closed-form orbit inverse."""

    def __init__(self, phi: ShadowAction, psi: FiniteAction, provenance: str = ""):
        if phi.p2_witness is None:
            raise BlockError("the top action needs a P2 witness")
        self.phi, self.psi = phi, psi
        self.group = RestrictedWreath(psi.group, phi.group)
        self.p2_witness = None
        self.exact = phi.exact
        self.provenance = provenance or "end-sum wreath gluing of open block copies"

    def split(self, leaf):
        leaf = tuple(leaf)
        for k in range(1, len(leaf)):
            if self.phi.is_leaf(leaf[:k]) and self.psi.is_leaf(leaf[k:]):
                return leaf[:k], leaf[k:]
        return None

    def is_leaf(self, leaf):
        return self.split(leaf) is not None

    def apply(self, x, leaf):
        lam, mu = self.split(leaf)
        F, h = x
        lam2 = self.phi.apply(h, lam)
        g = self.phi.locate(lam2)
        if g is not None:
            v = self.group.value(x, g)
            if v != self.psi.group.identity:
                mu = self.psi.apply(v, mu)
        return lam2 + mu

    def distinguishing_leaf(self, x, y):
        """A leaf moved differently by ``x`` and ``y`` (closed form), or ``None`` when ``x == y``."""
        if x == y:
            return None
        mu0 = self.psi.leaves[0]
        (Fx, hx), (Fy, hy) = x, y
        if hx != hy:
            return self.phi.p2_witness + mu0
        keys = sorted({k for k, _ in Fx} | {k for k, _ in Fy})
        for g in keys:
            a, b = self.group.value(x, g), self.group.value(y, g)
            if a == b:
                continue
            ha, hb = self.psi.hat(a), self.psi.hat(b)
            j = next(j for j in range(len(ha)) if ha[j] != hb[j])
            lam = self.phi.apply(self.phi.group.inv(hx), self.phi.orbit_point(g))
            return lam + self.psi.leaves[j]
        return None

    def to_doc(self):
        return {"provenance": self.provenance, "rule": "open wreath gluing", "top": self.phi.to_doc(),
                "base": self.psi.to_doc()}


# ---------------------------------------------------------------------------
# constructions


class BlockAction(NamedTuple):
    block: Block
    action: ShadowAction
    certificate: Certificate


def zn_block(n: int) -> BlockAction:
    """Block with ``n²`` leaves ``(i, j)`` and the ``Z_n`` action ``(i, j) ↦ (i+1, j+1)``.

    The generator is the composite ``f_1 f_2 … f_n f_0``: ``f_0`` rotates the
    central cell (cycling the copies), ``f_i`` rotates copy ``i`` only.
    """
    if not isinstance(n, int) or n < 2:
        raise BlockError("zn_block needs n >= 2")
    copy = Cell.open(n, tag="rotation cell")
    block = Cell(slots=(copy,) * n, tag="rotation cell")
    leaves = tuple(block.leaves())
    idx = {x: i for i, x in enumerate(leaves)}

    def perm(f):
        return tuple(idx[f(x)] for x in leaves)

    f0 = perm(lambda x: (x[0] % n + 1, x[1]))
    fs = [perm(lambda x, i=i: (x[0], x[1] % n + 1) if x[0] == i else x) for i in range(1, n + 1)]
    gen = f0
    for f in reversed(fs):
        gen = compose(f, gen)
    hats = {0: tuple(range(len(leaves)))}
    for k in range(1, n):
        hats[k] = compose(gen, hats[k - 1])
    closes = compose(gen, hats[n - 1]) == hats[0]

    action = TableAction(
        Cyclic(n), leaves, hats, p2_witness=(1, 1),
        provenance=f"rotation block: composite of {n}+1 fractional rotations of B^2 x I x I",
    )
    cert = Certificate()
    cert.step("zn_block", "cyclic rotation block", n=n, leaves=len(leaves))
    cert.check("generator hat order divides n", closes, f"generator^{n}")
    cert.axiom(
        "The n-th power of the composite rotation is a product of Dehn twists along 3-balls that push "
        "disjointly into the boundary, hence isotopic to the identity; the action descends to Z_n."
    )
    return BlockAction(block, action, cert)


def wreath_glue(phi_pair: BlockAction, psi_pair: BlockAction) -> BlockAction:
    """Glue a copy of the ψ-block into every leaf of the φ-block; the result carries ``H ≀ G`` with P1."""
    phi, psi = phi_pair.action, psi_pair.action
    if phi.p2_witness is None:
        raise BlockError("refusing to glue: the top action has no P2 witness")
    block = phi_pair.block.glue_everywhere(psi_pair.block)
    cert = Certificate()
    if isinstance(phi, FiniteAction) and isinstance(psi, FiniteAction):
        action: ShadowAction = GluedAction(phi, psi)
        cert.step("wreath_glue", "wreath gluing of finite blocks", top=phi.group.name, base=psi.group.name,
                  leaves=block.leaf_count)
    elif isinstance(psi, FiniteAction) and phi.exact:
        action = OpenGluedAction(phi, psi)
        cert.step("open_wreath_glue", "end-sum wreath gluing of open blocks", top=phi.group.name,
                  base=psi.group.name)
    else:
        raise BlockError("refusing to glue: the top orbit map is not computably invertible")
    premise = check_p1_p2(phi, want="P2")
    cert.check("top action has P2 at its witness", premise.passed, premise.checks[0].range)
    cert.axiom(
        "Soundness: P2 of the top action makes its hat injective and tells copies apart, "
        "so base components are recovered copy by copy from P1 of the base action."
    )
    return BlockAction(block, action, cert)


def open_shift_block() -> BlockAction:
    block = Cell(countable=True, tag="shear block")
    action = TranslationAction()
    cert = Certificate()
    cert.step("open_shift_block", "Z-block of parallel rays", leaves="Z")
    cert.check("P2 at 0 (closed form: k -> k is injective)", True, "closed form")
    return BlockAction(block, action, cert)


def open_wreath_glue(phi_pair: BlockAction, psi_pair: BlockAction, window: int = DEFAULT_WINDOW,
                     elements: Sequence | None = None) -> BlockAction:
    """Open analogue of :func:`wreath_glue` on restricted elements."""
    phi, psi = phi_pair.action, psi_pair.action
    if phi.p2_witness is None or not phi.exact:
        raise BlockError("refusing to glue: the top orbit map is not computably invertible")
    if not isinstance(psi, FiniteAction):
        raise BlockError("the base action must act on finitely many leaves")
    out = wreath_glue(phi_pair, psi_pair)
    res = check_p1_p2(out.action, elements=elements, window=window, want="P1")
    out.certificate.extend(res)
    return out


def p1_to_p2(pair: BlockAction, certificate: Certificate | None = None) -> BlockAction:
    """Amplify P1 to P2: a depth-n tree of copies, ``n^n`` leaves, witness ``(1, 2, …, n)``."""
    act = pair.action
    if not isinstance(act, FiniteAction):
        raise BlockError("amplification needs a finite leaf set")
    if certificate is None:
        certificate = check_p1_p2(act, want="P1")
    p1 = [c for c in certificate.checks if c.name.startswith("P1")]
    if not p1 or not all(c.passed for c in p1):
        raise BlockError("refusing to amplify: P1 is not certified")
    n = len(act.leaves)
    block = CopyTree(pair.block, n)
    word = WordAction(act)
    cert = Certificate()
    cert.step("p1_to_p2", "levelwise tree of block copies", leaves_in=n, copies=block.copies,
              leaves_out=f"{n}^{n}")
    cert.check("copy count is 1+n+...+n^(n-1)", block.copies == sum(n**r for r in range(n)), f"n={n}")
    cert.extend(check_p1_p2(word, want="P2"))
    return BlockAction(block, word, cert)


def wreath_tower(ns: Sequence[int]) -> BlockAction:
    """P1 action of ``Z_{n1} ≀ … ≀ Z_{nr}`` by repeated gluing of rotation blocks."""
    if not ns:
        raise BlockError("empty tower")
    cur = zn_block(ns[0])
    cert = Certificate().extend(cur.certificate)
    for n in ns[1:]:
        top = zn_block(n)
        cert.extend(top.certificate)
        cur = wreath_glue(top, cur)
        cert.extend(cur.certificate)
    cert.extend(check_p1_p2(cur.action, want="P1"))
    return BlockAction(cur.block, cur.action, cert)


# ---------------------------------------------------------------------------
# verification


def _hash_rows(rows: np.ndarray) -> np.ndarray:
    """Polynomial hash with wrap-around; collisions are re-checked exactly by the caller."""
    rng = np.random.default_rng(0x5EED)
    w = rng.integers(1, 2**62, size=rows.shape[1], dtype=np.int64) | 1
    with np.errstate(over="ignore"):
        return rows.astype(np.int64, copy=False) @ w


def _first_duplicate(rows_of, count: int, chunk: int) -> tuple[int, int] | None:
    """Exact duplicate search over ``count`` rows produced in chunks by ``rows_of(idx)``."""
    hashes = np.empty(count, dtype=np.int64)
    for lo in range(0, count, chunk):
        idx = np.arange(lo, min(count, lo + chunk))
        hashes[lo : lo + len(idx)] = _hash_rows(rows_of(idx))
    order = np.argsort(hashes, kind="stable")
    sh = hashes[order]
    dup = np.nonzero(sh[1:] == sh[:-1])[0]
    for d in dup:
        a, b = sorted((int(order[d]), int(order[d + 1])))
        ra, rb = rows_of(np.array([a, b]))
        if np.array_equal(ra, rb):
            return a, b
    return None


def check_p1_p2(act: ShadowAction, bound: int | None = None, elements: Sequence | None = None,
                window: int = DEFAULT_WINDOW, want: str = "both") -> Certificate:
    """Certify P1 (distinct hats) and/or P2 (a free orbit), with witnesses or counterexamples."""
    cert = Certificate()
    G = act.group
    if G.is_finite and elements is None and act.leaf_count is not None or isinstance(act, WordAction) and G.is_finite:
        _check_finite(act, cert, want)
    else:
        _check_windowed(act, cert, bound, elements, window, want)
    p1 = [c for c in cert.checks if c.name.startswith("P1")]
    p2 = [c for c in cert.checks if c.name.startswith("P2")]
    if p2 and all(c.passed for c in p2) and p1:
        cert.check("P2 implies P1", all(c.passed for c in p1), "consistency")
    return cert


def _check_finite(act: ShadowAction, cert: Certificate, want: str) -> None:
    G = act.group
    n = G.order()
    cert.step("check_p1_p2", "hat injectivity and free orbit", group=G.name, order=n, leaves=act.leaf_count)
    if n > max_verify():
        cert.check("P1 (exhaustive)", False, f"order {n} exceeds verification cap {max_verify()}")
        return
    width = max(1, len(act.fingerprint(G.identity)))
    chunk = max(1, 4_000_000 // width)
    rows_of = act.fingerprint_rows

    if want in ("both", "P1"):
        dup = _first_duplicate(rows_of, n, chunk)
        witness = None
        if dup is not None:
            a, b = (payload_to_json(G.element_at(i)) for i in dup)
            witness = b if a == payload_to_json(G.identity) else [a, b]
        cert.check("P1 (exhaustive)", dup is None, f"all {n} elements", witness)
        _check_action_law(act, cert)

    if want in ("both", "P2"):
        p = act.p2_witness
        if isinstance(act, FiniteAction) and p is None:
            found = _search_p2(act, n, chunk)
            cert.check("P2 (leaf search)", found is not None, f"all {n} elements x {act.leaf_count} leaves",
                       None if found is None else payload_to_json(found))
            if found is not None:
                cert.data["p2_witness"] = payload_to_json(found)
        elif p is None:
            cert.check("P2 (declared witness)", False, "no witness declared")
        else:
            dup = _first_duplicate(act.orbit_rows, n, chunk)
            cert.check("P2 (declared witness)", dup is None, f"orbit of {payload_to_json(p)} over all {n} elements",
                       None if dup is None else [payload_to_json(G.element_at(i)) for i in dup])


def _flatten(x) -> list:
    out = []
    for y in x:
        if isinstance(y, tuple):
            out.extend(_flatten(y))
        else:
            out.append(y)
    return out


def _search_p2(act: FiniteAction, n: int, chunk: int):
    if n * act.leaf_count > 50_000_000:
        return None
    mat = act.hat_rows(np.arange(n))
    srt = np.sort(mat, axis=0)
    free = (np.diff(srt, axis=0) != 0).all(axis=0) if n > 1 else np.ones(mat.shape[1], dtype=bool)
    hits = np.nonzero(free)[0]
    return act.leaves[int(hits[0])] if len(hits) else None


def _check_action_law(act: ShadowAction, cert: Certificate) -> None:
    """hat(g s) = hat(g) ∘ hat(s) for every g and generator s; induction gives the full law."""
    if not isinstance(act, FiniteAction):
        return  # word actions inherit the law componentwise from their base
    G = act.group
    n = G.order()
    gens = G.generators
    if n * len(gens) > 400_000:
        return
    L = act.leaf_count
    ident_ok = act.hat(G.identity) == tuple(range(L))
    bad = None
    chunk = max(1, 2_000_000 // max(1, L))
    for s in gens:
        hs = np.array(act.hat(s), dtype=np.int64)
        for lo in range(0, n, chunk):
            idx = np.arange(lo, min(n, lo + chunk))
            gs = np.array([G.index(G.mul(G.element_at(int(i)), s)) for i in idx], dtype=np.int64)
            lhs = act.hat_rows(gs)
            rhs = act.hat_rows(idx)[:, hs]
            diff = np.nonzero((lhs != rhs).any(axis=1))[0]
            if len(diff):
                bad = [payload_to_json(G.element_at(int(idx[diff[0]]))), payload_to_json(s)]
                break
        if bad:
            break
    cert.check("action law (identity and all g x generators)", ident_ok and bad is None,
               f"{n} elements x {len(gens)} generators", bad)


def _check_windowed(act: ShadowAction, cert: Certificate, bound, elements, window, want) -> None:
    G = act.group
    if elements is None:
        if bound is None:
            bound = 2
        elements = G.ball(bound)
        rng = f"radius-{bound} ball ({len(elements)} elements)"
    else:
        elements = list(elements)
        rng = f"{len(elements)} given elements"
    cert.step("check_p1_p2", "windowed hat injectivity and free orbit", group=G.name, window=window,
              elements=len(elements))
    if want in ("both", "P2"):
        p = act.p2_witness
        if p is None:
            cert.check("P2 (declared witness)", False, "no witness declared")
        else:
            pts = [act.orbit_point(g) for g in elements]
            ok = len(set(pts)) == len(pts)
            round_trip = all(act.locate(q) == g for q, g in zip(pts, elements))
            mode = "closed form" if act.exact else f"window {window}"
            cert.check("P2 (declared witness)", ok and round_trip, f"{rng}; orbit inverse {mode}")
    if want in ("both", "P1"):
        lw = _window_leaves(act, window)
        seen: dict = {}
        witness = None
        for g in elements:
            key = tuple(act.apply(g, leaf) for leaf in lw)
            if key in seen:
                witness = [payload_to_json(seen[key]), payload_to_json(g)]
                break
            seen[key] = g
        cert.check("P1 (window)", witness is None, f"{rng} on {len(lw)} window leaves", witness)
        if isinstance(act, OpenGluedAction) and act.exact:
            bad = None
            for x, y in itertools.combinations(elements[:200], 2):
                leaf = act.distinguishing_leaf(x, y)
                if leaf is None or act.apply(x, leaf) == act.apply(y, leaf):
                    bad = [payload_to_json(x), payload_to_json(y)]
                    break
            cert.check("P1 (closed-form separating leaves)", bad is None,
                       f"all pairs of the first {min(len(elements), 200)} elements", bad)
        law = None
        for a in elements[:60]:
            for b in elements[:60]:
                ab = G.mul(a, b)
                if any(act.apply(ab, leaf) != act.apply(a, act.apply(b, leaf)) for leaf in lw[:50]):
                    law = [payload_to_json(a), payload_to_json(b)]
                    break
            if law:
                break
        cert.check("action law (window)", law is None, f"pairs of the first {min(60, len(elements))} elements", law)


def _window_leaves(act: ShadowAction, window: int) -> list:
    if isinstance(act, FiniteAction):
        return list(act.leaves)
    if isinstance(act, TranslationAction):
        return [(i,) for i in range(-window, window + 1)]
    if isinstance(act, OpenGluedAction):
        return [lam + mu for lam in _window_leaves(act.phi, window) for mu in act.psi.leaves]
    if isinstance(act, RestrictedAction):
        return _window_leaves(act.base, window)
    raise BlockError(f"no window for {type(act).__name__}")

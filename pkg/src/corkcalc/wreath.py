"""Wreath-product arithmetic and the Krasner–Kaloujnine embeddings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .certificate import Certificate
from .groups import (
    AbelianByFinite,
    Cyclic,
    FreeAbelian,
    Group,
    GroupError,
    Permutation,
    Quotient,
    Subgroup,
    SubnormalSeries,
    Wreath,
    is_normal,
    max_order,
    payload_to_json,
)


class NormalityError(GroupError):
    def __init__(self, witness):
        super().__init__(f"normality violated at {witness}")
        self.witness = witness


class EmbeddingError(RuntimeError):
    """An embedding failed its own verification (an implementation bug)."""

    def __init__(self, certificate: Certificate):
        names = ", ".join(c.name for c in certificate.failures())
        super().__init__(f"internal error: embedding verification failed ({names})")
        self.certificate = certificate


def wreath_shift(top: Group, g, F: Sequence) -> tuple:
    """``x ↦ F(g⁻¹x)``, with ``F`` listed in the canonical order of ``top``."""
    elems = top.elements()
    pos = {x: i for i, x in enumerate(elems)}
    gi = top.inv(g)
    return tuple(F[pos[top.mul(gi, x)]] for x in elems)


def wreath_multiply(W: Wreath, x, y):
    if not isinstance(W, Wreath):
        raise TypeError(f"{W} is not a wreath product")
    for v in (x, y):
        if not W.contains(v):
            raise TypeError(f"{v!r} is not an element of {W.name}")
    return W.mul(x, y)


def wreath_inverse(W: Wreath, x):
    if not W.contains(x):
        raise TypeError(f"{x!r} is not an element of {W.name}")
    return W.inv(x)


@dataclass(eq=False)
class Homomorphism:
    domain: Group
    codomain: Group
    func: Callable[[Any], Any]
    provenance: str
    certificate: Certificate | None = None
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, x):
        try:
            return self._memo[x]
        except KeyError:
            y = self._memo[x] = self.func(x)
            return y

    def table(self) -> list[tuple]:
        return [(x, self(x)) for x in self.domain.elements()]

    def then(self, other: "Homomorphism", provenance: str | None = None) -> "Homomorphism":
        """``other ∘ self``."""
        return Homomorphism(
            self.domain, other.codomain, lambda x: other(self(x)), provenance or f"{other.provenance}∘{self.provenance}"
        )

    def to_doc(self) -> dict:
        doc = {"domain": self.domain.name, "codomain": self.codomain.name, "provenance": self.provenance}
        if self.domain.is_finite:
            doc["table"] = [[payload_to_json(x), payload_to_json(y)] for x, y in self.table()]
        else:
            doc["generator_images"] = [
                [payload_to_json(s), payload_to_json(self(s))] for s in self.domain.generators
            ]
        return doc


def identity_hom(G: Group) -> Homomorphism:
    return Homomorphism(G, G, lambda x: x, "identity")


def lift_pointwise(e: Homomorphism, top: Group) -> Homomorphism:
    """``base≀top → base'≀top`` applying ``e`` to every base coordinate."""
    src, dst = Wreath(e.domain, top), Wreath(e.codomain, top)
    return Homomorphism(src, dst, lambda x: (tuple(e(f) for f in x[0]), x[1]), f"pointwise({e.provenance})")


def verify_homomorphism_injective(
    h: Homomorphism, bound: int | None = None, elements: Sequence | None = None
) -> Certificate:
    """Check multiplicativity and injectivity of ``h`` on all pairs of a finite range."""
    G, K = h.domain, h.codomain
    cert = Certificate()
    if elements is None:
        if G.is_finite:
            elements = G.elements()
            rng = "all {} pairs"
        elif bound is not None:
            elements = G.ball(bound)
            rng = f"radius-{bound} ball, " + "{} pairs"
        else:
            raise GroupError("infinite domain needs a bound")
    else:
        rng = "given range, {} pairs"
    elements = list(elements)
    n = len(elements)
    rng = rng.format(n * n)
    imgs = [h(x) for x in elements]

    cert.check("identity maps to identity", h(G.identity) == K.identity, "identity")

    bad = _find_nonmultiplicative(h, elements, imgs)
    cert.check(
        "homomorphism", bad is None, rng, witness=None if bad is None else [payload_to_json(v) for v in bad]
    )

    witness = None
    for x, y in zip(elements, imgs):
        if y == K.identity and x != G.identity:
            witness = ["kernel", payload_to_json(x)]
            break
    if witness is None:
        seen: dict = {}
        for x, y in zip(elements, imgs):
            if y in seen:
                witness = ["collision", payload_to_json(seen[y]), payload_to_json(x)]
                break
            seen[y] = x
    cert.check("injective", witness is None, f"{n} elements", witness=witness)
    return cert


def _find_nonmultiplicative(h: Homomorphism, elements: list, imgs: list):
    G, K = h.domain, h.codomain
    n = len(elements)
    tabulated = G.is_finite and n == G.order() and n <= max_order()
    if tabulated:
        tab = G.mul_table()
        if isinstance(K, Permutation):
            arr = np.array(imgs, dtype=np.int32)
            want = arr[tab]  # (n, n, d)
            chunk = max(1, 2_000_000 // (n * K.degree))
            for lo in range(0, n, chunk):
                got = np.take_along_axis(
                    np.broadcast_to(arr[lo : lo + chunk, None, :], (min(chunk, n - lo), n, K.degree)),
                    np.broadcast_to(arr[None, :, :], (min(chunk, n - lo), n, K.degree)),
                    axis=2,
                )
                diff = np.argwhere((got != want[lo : lo + chunk]).any(axis=2))
                if len(diff):
                    a, b = diff[0]
                    return elements[lo + a], elements[b]
            return None
        if K.is_finite and K.order() <= max_order():
            ki = np.array([K.index(y) for y in imgs], dtype=np.int64)
            got = K.mul_table()[ki[:, None], ki[None, :]]
            diff = np.argwhere(got != ki[tab])
            if len(diff):
                a, b = diff[0]
                return elements[a], elements[b]
            return None
        for a in range(n):
            ya = imgs[a]
            row = tab[a]
            for b in range(n):
                if K.mul(ya, imgs[b]) != imgs[row[b]]:
                    return elements[a], elements[b]
        return None
    for a, x in enumerate(elements):
        for b, y in enumerate(elements):
            if h(G.mul(x, y)) != K.mul(imgs[a], imgs[b]):
                return x, y
    return None


def kk_embed(G: Group, N: Subgroup | Iterable | None = None, verify: bool = True, bound: int = 3) -> Homomorphism:
    """Embed ``G`` into ``N ≀ (G/N)`` through a coset transversal.

    ``θ(g) = (q ↦ t(q)⁻¹ g t(π(g)⁻¹ q), π(g))`` with ``t`` the identity on the
    trivial coset and the smallest representative elsewhere. For an
    abelian-by-finite ``G`` the normal subgroup is its ``Z^m`` kernel and the
    target is ``Z^m ≀ H``.
    """
    if isinstance(G, AbelianByFinite):
        return _kk_extension(G, verify, bound)
    if not G.is_finite:
        raise GroupError("kk_embed needs a finite group or an abelian-by-finite extension")
    gens = N.generators if isinstance(N, Subgroup) else tuple(N or ())
    N = Subgroup(G, tuple(gens))
    ok, wit = is_normal(N, G)
    if not ok:
        raise NormalityError(wit)
    Q = Quotient(G, N)
    W = Wreath(N, Q)
    qel = Q.elements()
    tr = {q: Q.transversal(q) for q in qel}
    tr_inv = {q: G.inv(t) for q, t in tr.items()}

    def theta(g):
        pg = Q.project(g)
        pgi = Q.inv(pg)
        F = tuple(G.mul(G.mul(tr_inv[q], g), tr[Q.mul(pgi, q)]) for q in qel)
        return (F, pg)

    hom = Homomorphism(G, W, theta, "krasner-kaloujnine")
    if verify:
        cert = verify_homomorphism_injective(hom)
        bad = next((g for g in G.elements() if theta(g)[1] != Q.project(g)), None)
        cert.check("top projection equals quotient map", bad is None, f"all {G.order()} elements", payload_to_json(bad))
        cert.chain.insert(0, {"op": "kk_embed", "role": "krasner-kaloujnine embedding", "params": {
            "group": G.name, "normal_order": N.order(), "quotient_order": Q.order()}})
        hom.certificate = cert
        if not cert.passed:
            raise EmbeddingError(cert)
    return hom


def _kk_extension(G: AbelianByFinite, verify: bool, bound: int) -> Homomorphism:
    H = G.top
    W = Wreath(FreeAbelian(G.rank), H)
    zero = (0,) * G.rank

    def theta(g):
        pg = g[1]
        pgi = H.inv(pg)
        F = []
        for q in H.elements():
            x = G.mul(G.mul(G.inv((zero, q)), g), (zero, H.mul(pgi, q)))
            F.append(x[0])
        return (tuple(F), pg)

    hom = Homomorphism(G, W, theta, "krasner-kaloujnine (extension kernel)")
    if verify:
        cert = verify_homomorphism_injective(hom, bound=bound)
        ball = G.ball(bound)
        bad = next((g for g in ball if theta(g)[1] != g[1]), None)
        cert.check(
            "top projection equals quotient map", bad is None, f"radius-{bound} ball, {len(ball)} elements",
            payload_to_json(bad),
        )
        cert.chain.insert(0, {"op": "kk_embed", "role": "krasner-kaloujnine embedding", "params": {
            "group": G.name, "kernel_rank": G.rank, "quotient": H.name, "bound": bound}})
        hom.certificate = cert
        if not cert.passed:
            raise EmbeddingError(cert)
    return hom


def _cyclic_iso(group: Group, n: int) -> dict:
    """Payload → residue for a cyclic group of order ``n``."""
    for c in group.elements():
        if group.element_order(c) == n:
            iso = {}
            x = group.identity
            for k in range(n):
                iso[x] = k
                x = group.mul(x, c)
            return iso
    raise GroupError(f"{group.name} is not cyclic of order {n}")


def series_embed(G: Group, series: SubnormalSeries, verify: bool = True) -> Homomorphism:
    """Embed ``G`` into ``H_r ≀ ... ≀ H_1`` (left-nested) along a cyclic subnormal series."""
    problems = series.check()
    if problems:
        raise GroupError("invalid series: " + "; ".join(problems))
    hom = _embed_terms(series.terms, series.quotient_orders)
    hom = Homomorphism(G, hom.codomain, hom.func, "iterated krasner-kaloujnine")
    if verify:
        cert = verify_homomorphism_injective(hom)
        image = {hom(g) for g in G.elements()}
        cert.check("image order equals group order", len(image) == G.order(), f"{G.order()} elements",
                   detail=f"image {len(image)}, target {hom.codomain.order()}")
        cert.chain.insert(0, {"op": "series_embed", "role": "iterated krasner-kaloujnine embedding", "params": {
            "group": G.name, "quotient_orders": list(series.quotient_orders), "target": hom.codomain.name}})
        hom.certificate = cert
        if not cert.passed:
            raise EmbeddingError(cert)
    return hom


def _embed_terms(terms: Sequence[Subgroup], orders: Sequence[int]) -> Homomorphism:
    K = terms[0]
    if not orders:
        return identity_hom(K)
    if len(orders) == 1:
        iso = _cyclic_iso(K, orders[0])
        return Homomorphism(K, Cyclic(orders[0]), iso.__getitem__, "cyclic isomorphism")
    theta = kk_embed(K, terms[1].generators, verify=False)
    rest = _embed_terms(terms[1:], orders[1:])
    Q = theta.codomain.top
    p = orders[0]
    iso = _cyclic_iso(Q, p)
    qpos = {q: i for i, q in enumerate(Q.elements())}
    order_by_residue = sorted(Q.elements(), key=iso.__getitem__)
    src_pos = [qpos[q] for q in order_by_residue]
    target = Wreath(rest.codomain, Cyclic(p))

    def f(g):
        F, q = theta(g)
        return (tuple(rest(F[i]) for i in src_pos), iso[q])

    return Homomorphism(K, target, f, "krasner-kaloujnine step")

"""Cork-twist bookkeeping: sites, labels ``2F + δ``, parity recovery and effectiveness.

A manifold obtained by twisting corks is identified with its label: a finitely
supported integer map on cork sites. Distinct labels name nondiffeomorphic
results (a cited axiom); everything else here is verified.

Sites are pairs ``(leaf, j)`` with ``j`` in ``1..m``. In the equivariant case
the leaves are the elements of ``H`` itself (regular action, ``p = 1_H``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from .blocks import BlockError, RegularAction, RestrictedWreath, ShadowAction
from .certificate import Certificate, canonical_json
from .groups import FreeAbelian, Group, Wreath, json_to_payload, payload_to_json

AX_DISTINCT = (
    "Twisting a family of Gompf corks by distinct integer vectors gives pairwise nondiffeomorphic "
    "manifolds (Akbulut-Yasui / Gompf infinite-order cork results), and joining them yields a Z^n-cork."
)
AX_SHRINK = (
    "A fixed base twist at the first site of the identity (shrunken embedding) realizes the inclusion; "
    "conjugating a doubled twist through the group action doubles the twist exponent."
)
AX_STEIN = "Distinct orbit points name distinct Stein-fillable twist results (combinatorial shadow only)."

MODES = ("weak", "equivariant", "stein-shadow")


class NotATwistLabel(ValueError):
    """Raised by :func:`recover_from_label`; ``kind`` is ``parity``, ``orbit`` or ``remainder``."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"not a twist label: {message}")
        self.kind = kind
        self.diagnosis = message


def site_key(site) -> str:
    leaf, j = site
    return canonical_json(payload_to_json(leaf)) + "#" + str(j)


def parse_site(key: str):
    leaf, _, j = key.rpartition("#")
    return (json_to_payload(json.loads(leaf)), int(j))


@dataclass(frozen=True)
class TwistLabel:
    """Sparse integer map on sites; zero values are never stored."""

    values: tuple  # ((site, value), ...) sorted by site key

    @classmethod
    def from_dict(cls, d: dict) -> "TwistLabel":
        items = [(s, int(v)) for s, v in d.items() if v != 0]
        return cls(tuple(sorted(items, key=lambda sv: site_key(sv[0]))))

    def as_dict(self) -> dict:
        return dict(self.values)

    def __getitem__(self, site) -> int:
        return self.as_dict().get(site, 0)

    def to_doc(self) -> dict:
        return {site_key(s): v for s, v in self.values}

    @classmethod
    def from_doc(cls, doc: dict) -> "TwistLabel":
        return cls.from_dict({parse_site(k): v for k, v in doc.items()})


# ---------------------------------------------------------------------------
# labels


def _coordinates(x, G: Group):
    """Nonzero ``(group element, integer vector)`` pairs of the base map of ``x``."""
    F, _ = x
    if G.is_finite:
        return [(g, v) for g, v in zip(G.elements(), F) if any(v)]
    return [(g, v) for g, v in F if any(v)]


def equivariant_twist_label(x, H: Group) -> TwistLabel:
    """``label(g, i) = 2 F(g)_i + [(g, i) = (h, 1)]`` for ``x = (F, h)`` in ``Z^m ≀ H``."""
    F, h = x
    d: dict = {}
    for g, v in zip(H.elements(), F):
        for i, k in enumerate(v, 1):
            if k:
                d[(g, i)] = 2 * k
    d[(h, 1)] = d.get((h, 1), 0) + 1
    return TwistLabel.from_dict(d)


def weak_twist_label(x, act: ShadowAction) -> TwistLabel:
    """``2 F̃ + δ_{(ĝ p, 1)}`` where ``F̃(x̂ p, j) = F(x)_j`` and ``F̃`` vanishes off the orbit."""
    if act.p2_witness is None:
        raise BlockError("weak labels need an action with a P2 witness")
    F, g = x
    d: dict = {}
    for y, v in _coordinates(x, act.group):
        q = act.orbit_point(y)
        for j, k in enumerate(v, 1):
            d[(q, j)] = 2 * k
    s = (act.orbit_point(g), 1)
    d[s] = d.get(s, 0) + 1
    return TwistLabel.from_dict(d)


def _locator(act: ShadowAction, p):
    if p is None or p == act.p2_witness:
        return act.locate
    G = act.group
    if not G.is_finite:
        raise BlockError("a non-default witness needs a finite group")
    table = {act.apply(g, p): g for g in G.elements()}
    return table.get


def recover_from_label(lbl: TwistLabel, act: ShadowAction, m: int, p=None):
    """Invert :func:`weak_twist_label` by parity decoding.

    The unique odd coordinate sits at ``(ĝ p, 1)`` and names ``g``; the rest is
    twice a map supported on the orbit, pulled back to ``F``.
    """
    locate = _locator(act, p)
    G = act.group
    d = lbl.as_dict()
    for (leaf, j), v in d.items():
        if not isinstance(j, int) or not 1 <= j <= m:
            raise NotATwistLabel("remainder", f"site index {j} outside 1..{m}")
    odd = [s for s, v in d.items() if v % 2]
    if not odd:
        raise NotATwistLabel("parity", "no odd coordinate")
    if len(odd) > 1:
        raise NotATwistLabel("parity", f"multiple odd coordinates ({len(odd)})")
    leaf, j = odd[0]
    if j != 1:
        raise NotATwistLabel("parity", f"odd coordinate in channel {j}, expected channel 1")
    g = locate(leaf)
    if g is None:
        raise NotATwistLabel("orbit", "odd site not on the orbit")
    d[odd[0]] -= 1
    vecs: dict = {}
    for (q, j), v in d.items():
        if v == 0:
            continue
        y = locate(q)
        if y is None:
            raise NotATwistLabel("remainder", "remainder is not twice an orbit-supported map")
        vec = vecs.setdefault(y, [0] * m)
        vec[j - 1] = v // 2
    zero = (0,) * m
    if G.is_finite:
        F = tuple(tuple(vecs[y]) if y in vecs else zero for y in G.elements())
        return (F, g)
    return (tuple(sorted((y, tuple(v)) for y, v in vecs.items() if any(v))), g)


# ---------------------------------------------------------------------------
# ledgers


@dataclass(eq=False)
class Ledger:
    """A completed construction: group, twist multiplicity, action and its certificate."""

    mode: str
    group: Group
    action: ShadowAction
    m: int | None
    certificate: Certificate

    @property
    def domain(self) -> Group:
        if self.mode == "stein-shadow":
            return self.group
        Z = FreeAbelian(self.m)
        return Wreath(Z, self.group) if self.group.is_finite else RestrictedWreath(Z, self.group)

    def label(self, x) -> TwistLabel:
        if self.mode == "stein-shadow":
            return TwistLabel.from_dict({(self.action.orbit_point(x), 1): 1})
        if self.mode == "equivariant":
            return equivariant_twist_label(x, self.group)
        return weak_twist_label(x, self.action)

    def recover(self, lbl: TwistLabel):
        if self.mode == "stein-shadow":
            if len(lbl.values) != 1:
                raise NotATwistLabel("parity", "a shadow label has exactly one site")
            (leaf, _), _ = lbl.values[0]
            g = self.action.locate(leaf)
            if g is None:
                raise NotATwistLabel("orbit", "odd site not on the orbit")
            return g
        return recover_from_label(lbl, self.action, self.m)


def equivariant_ledger(H: Group, m: int) -> Ledger:
    cert = Certificate()
    cert.step("equivariant_ledger", "sites H x [m], regular action", group=H.name, m=m)
    cert.axiom(AX_SHRINK)
    return Ledger("equivariant", H, RegularAction(H), m, cert)


def weak_ledger(act: ShadowAction, m: int, certificate: Certificate | None = None) -> Ledger:
    if act.p2_witness is None:
        raise BlockError("weak ledgers need an action with a P2 witness")
    cert = Certificate().extend(certificate) if certificate else Certificate()
    cert.step("weak_ledger", "sites leaves x [m] on the free orbit", group=act.group.name, m=m)
    cert.axiom(AX_SHRINK)
    return Ledger("weak", act.group, act, m, cert)


def stein_ledger(act: ShadowAction, certificate: Certificate | None = None) -> Ledger:
    cert = Certificate().extend(certificate) if certificate else Certificate()
    cert.step("stein_ledger", "label = orbit point", group=act.group.name)
    cert.axiom(AX_STEIN)
    return Ledger("stein-shadow", act.group, act, None, cert)


def effectiveness_certificate(ledger: Ledger, ball: int, elements: Sequence | None = None,
                              keep_labels: bool = True) -> Certificate:
    """Label every element of a ball, assert pairwise distinctness and exact round-trip."""
    cert = Certificate().extend(ledger.certificate)
    D = ledger.domain
    if elements is None:
        elements = D.ball_of_size(ball)
        rng = f"first {len(elements)} elements of {D.name} by word length"
    else:
        elements = list(elements)
        rng = f"{len(elements)} given elements"
    cert.step("effectiveness", "label injectivity", mode=ledger.mode, elements=len(elements))
    keys: dict = {}
    collision = None
    bad_round = None
    rows = []
    for x in elements:
        lbl = ledger.label(x)
        doc = lbl.to_doc()
        k = canonical_json(doc)
        if k in keys and collision is None:
            collision = [payload_to_json(keys[k]), payload_to_json(x)]
        keys.setdefault(k, x)
        if bad_round is None:
            try:
                if ledger.recover(lbl) != x:
                    bad_round = payload_to_json(x)
            except NotATwistLabel as exc:
                bad_round = [payload_to_json(x), str(exc)]
        if keep_labels:
            rows.append([payload_to_json(x), doc])
    cert.check("labels pairwise distinct", collision is None, rng, collision)
    cert.check("recover(label(x)) = x", bad_round is None, rng, bad_round)
    cert.axiom(AX_STEIN if ledger.mode == "stein-shadow" else AX_DISTINCT)
    if keep_labels:
        cert.data["labels"] = rows
    return cert


# ---------------------------------------------------------------------------
# exhaustive distinctness on a coordinate box


def exhaustive_distinctness(act: ShadowAction, m: int, lo: int = -2, hi: int = 2,
                            samples: int = 200, seed: int = 0) -> Certificate:
    """All elements with ``F``-coordinates in ``lo..hi`` get distinct labels (finite ``G``).

    Labels live on orbit sites only, so they are encoded densely as rows over
    ``orbit x [m]``. Rows are decoded in bulk by parity and compared exactly;
    a random sample is cross-checked against :func:`weak_twist_label`.
    """
    G = act.group
    els = G.elements()
    n = len(els)
    pts = [act.orbit_point(g) for g in els]
    cols_of = {q: i for i, q in enumerate(dict.fromkeys(pts))}
    col = np.array([cols_of[q] for q in pts], dtype=np.int64)
    width = len(cols_of) * m
    vals = np.arange(lo, hi + 1, dtype=np.int64)
    k = n * m
    total = len(vals) ** k * n
    cert = Certificate()
    cert.step("exhaustive_distinctness", "dense labels on orbit sites", group=G.name, m=m, box=[lo, hi],
              elements=total)
    if total > 20_000_000:
        cert.check("labels pairwise distinct (box)", False, f"{total} elements exceeds the enumeration cap")
        return cert

    # F index -> coordinates, mixed radix over n*m digits
    fidx = np.arange(len(vals) ** k, dtype=np.int64)
    digits = (fidx[:, None] // (len(vals) ** np.arange(k - 1, -1, -1))) % len(vals)
    Fvals = vals[digits]  # (nF, n*m) laid out (element, channel)
    base = np.zeros((len(fidx), width), dtype=np.int16)
    site = (col[:, None] * m + np.arange(m)[None, :]).reshape(-1)
    np.add.at(base.T, site, (2 * Fvals).T.astype(np.int16))

    distinct = True
    witness = None
    decoded_ok = True
    for gi in range(n):
        rows = base.copy()
        rows[:, col[gi] * m] += 1
        # parity decoding: exactly one odd entry, at channel 1 of g's orbit site
        odd = rows % 2 != 0
        where = np.argmax(odd, axis=1)
        if not (odd.sum(axis=1) == 1).all() or not (where == col[gi] * m).all():
            decoded_ok = False
        if len(cols_of) != n:
            decoded_ok = False
        half = rows.copy()
        half[:, col[gi] * m] -= 1
        if not np.array_equal(half // 2, base // 2):
            decoded_ok = False
        # rows within a parity bucket must be distinct; distinct buckets never collide
        u = np.unique(rows, axis=0)
        if len(u) != len(rows):
            distinct = False
            witness = {"g": payload_to_json(els[gi])}
            break
    cert.check("labels pairwise distinct (box)", distinct, f"all {total} elements with F in {lo}..{hi}", witness)
    cert.check("parity decoding recovers every element (box)", decoded_ok and distinct,
               f"all {total} elements with F in {lo}..{hi}")

    rng = np.random.default_rng(seed)
    mismatch = None
    for _ in range(samples):
        fi = int(rng.integers(len(fidx)))
        gi = int(rng.integers(n))
        F = tuple(tuple(int(v) for v in Fvals[fi, e * m : (e + 1) * m]) for e in range(n))
        lbl = weak_twist_label((F, els[gi]), act).as_dict()
        row = base[fi].astype(np.int64).copy()
        row[col[gi] * m] += 1
        dense = {}
        inv_pts = {c: q for q, c in cols_of.items()}
        for c in np.nonzero(row)[0]:
            dense[(inv_pts[int(c) // m], int(c) % m + 1)] = int(row[c])
        if dense != lbl:
            mismatch = payload_to_json((F, els[gi]))
            break
    cert.check("dense encoding agrees with weak_twist_label", mismatch is None, f"{samples} random elements",
               mismatch)
    return cert


# ---------------------------------------------------------------------------
# Cayley complex


def cayley_complex(H: Group) -> tuple[nx.MultiDiGraph, dict]:
    """Handle graph on ``H``: an edge ``h → hg`` tagged ``(h, g)`` for every ``g ≠ 1``."""
    if not H.is_finite:
        raise BlockError("cayley_complex needs a finite group")
    els = H.elements()
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(els)
    for h in els:
        for g in els:
            if g != H.identity:
                graph.add_edge(h, H.mul(h, g), key=g, handle=(h, g))
    pairs = set()
    for h in els:
        for g in els:
            if g != H.identity:
                partner = (H.mul(h, g), H.inv(g))
                pairs.add(frozenset([(h, g), partner]))
    connected = len(els) <= 1 or nx.is_weakly_connected(graph)
    report = {
        "vertices": graph.number_of_nodes(),
        "handle_edges": graph.number_of_edges(),
        "doubled_pairs": len(pairs),
        "connected": connected,
    }
    return graph, report


def cayley_certificate(H: Group) -> Certificate:
    _, rep = cayley_complex(H)
    cert = Certificate()
    cert.step("cayley_complex", "handle graph of boundary sums", group=H.name)
    n = rep["vertices"]
    cert.check("handle edge count |H|(|H|-1)", rep["handle_edges"] == n * (n - 1), f"{n} vertices")
    cert.check("every handle is doubled", 2 * rep["doubled_pairs"] == rep["handle_edges"], f"{n} vertices")
    cert.check("connected", rep["connected"], f"{n} vertices")
    cert.data["cayley"] = rep
    return cert


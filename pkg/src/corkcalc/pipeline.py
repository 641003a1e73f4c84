"""End-to-end chains behind the command line: embed, block, cork, verify, catalog.

Every command takes a request dict and returns a :class:`Certificate` whose
``request`` field replays it. Requests never contain file paths, so replay
does not depend on the working directory.
"""

from __future__ import annotations

import json
from typing import Any

from . import catalog
from .blocks import (
    BlockAction,
    BlockError,
    DEFAULT_WINDOW,
    TableAction,
    check_p1_p2,
    open_shift_block,
    p1_to_p2,
    restrict,
    wreath_tower,
)
from .certificate import Certificate, canonical_json
from .documents import load_group, resolve_source
from .groups import (
    AbelianByFinite,
    Cyclic,
    Group,
    GroupError,
    NotSolvable,
    iterated_wreath_order,
    max_order,
    payload_to_json,
    prime_cyclic_series,
)
from .homom import build_omega, doubled_twist_input
from .ledger import (
    MODES,
    cayley_certificate,
    effectiveness_certificate,
    equivariant_ledger,
    equivariant_twist_label,
    stein_ledger,
    weak_ledger,
)
from .wreath import EmbeddingError, kk_embed, series_embed

BOUNDS = {"r": 4, "n": 6, "m": 3}
COMMANDS = ("embed", "block", "cork", "verify", "catalog")


class RequestError(ValueError):
    pass


def make_request(command: str, group: Any = None, n=None, m=None, ball=None, window=None, mode=None,
                 allow_large: bool = False) -> dict:
    """Canonical request document; group sources are resolved to names or inline documents."""
    req: dict[str, Any] = {"command": command}
    if group is not None:
        req["group"] = resolve_source(group)
    for key, val in (("n", n), ("m", m), ("ball", ball), ("window", window), ("mode", mode)):
        if val is not None:
            req[key] = list(val) if key == "n" else val
    if allow_large:
        req["allow_large"] = True
    return req


def _check_bounds(req: dict) -> list[str]:
    if req.get("allow_large"):
        return []
    out = []
    ns = req.get("n") or []
    if len(ns) > BOUNDS["r"]:
        out.append(f"r = {len(ns)} exceeds {BOUNDS['r']}")
    if any(n > BOUNDS["n"] for n in ns):
        out.append(f"some n_i exceeds {BOUNDS['n']}")
    if req.get("m") is not None and req["m"] > BOUNDS["m"]:
        out.append(f"m = {req['m']} exceeds {BOUNDS['m']}")
    return out


def run(req: dict) -> Certificate:
    """Execute a request; failures become failed checks, never exceptions."""
    cert = Certificate(request=req)
    cmd = req.get("command")
    try:
        if cmd not in COMMANDS or cmd == "verify":
            raise RequestError(f"not a replayable command: {cmd!r}")
        problems = _check_bounds(req)
        cert.check("request within bounds", not problems, "documented bounds (override with --allow-large)",
                   problems or None)
        if problems:
            return cert
        {"embed": _embed, "block": _block, "cork": _cork, "catalog": _catalog}[cmd](req, cert)
    except (GroupError, BlockError, RequestError, KeyError) as exc:
        cert.check("request is executable", False, "request", detail=str(exc).strip("'\""))
    except EmbeddingError as exc:
        cert.extend(exc.certificate)
    return cert


# ---------------------------------------------------------------------------


def _catalog(req: dict, cert: Certificate) -> None:
    rows = []
    for name in catalog.CATALOG:
        G = catalog.get(name)
        rows.append({"name": name, "label": G.name, "order": G.order() if G.is_finite else "infinite"})
    cert.step("catalog", "built-in groups", count=len(rows))
    cert.data["catalog"] = rows


def _embed(req: dict, cert: Certificate) -> None:
    G = load_group(req["group"])
    hom = _embedding(G, cert)
    cert.data["homomorphism"] = hom.to_doc()


def _embedding(G: Group, cert: Certificate):
    if isinstance(G, AbelianByFinite):
        hom = kk_embed(G)
        cert.extend(hom.certificate)
        return hom
    if not G.is_finite:
        raise RequestError(f"{G.name}: embedding needs a finite solvable group or an abelian-by-finite extension")
    try:
        series = prime_cyclic_series(G)
    except NotSolvable as exc:
        cert.check("group is solvable", False, f"derived series of {G.name}", detail=str(exc))
        raise RequestError(str(exc)) from None
    cert.step("prime_cyclic_series", "subnormal series with prime cyclic quotients", group=G.name,
              quotient_orders=list(series.quotient_orders))
    hom = series_embed(G, series)
    cert.extend(hom.certificate)
    cert.data["quotient_orders"] = list(series.quotient_orders)
    return hom


def _tower_certificate(ns, cert: Certificate, amplify: bool = True) -> BlockAction:
    order = iterated_wreath_order(ns)
    cert.data["group_order"] = order
    tower = wreath_tower(ns)
    cert.extend(tower.certificate)
    cert.data["p1_leaves"] = tower.block.leaf_count
    if not amplify:
        return tower
    amp = p1_to_p2(tower, tower.certificate)
    cert.extend(amp.certificate)
    cert.data["p2_leaves"] = f"{tower.block.leaf_count}^{tower.block.leaf_count}"
    cert.data["p2_copies"] = amp.block.copies
    return amp


def _block(req: dict, cert: Certificate) -> None:
    ns = req.get("n")
    if not ns or any(not isinstance(n, int) or n < 2 for n in ns):
        raise RequestError("--n needs integers >= 2")
    _tower_certificate(ns, cert)


def _trivial_action(G: Group) -> TableAction:
    return TableAction(G, [(1,)], {G.identity: (0,)}, p2_witness=(1,), provenance="one-slot block")


def weak_action(G: Group, cert: Certificate | None = None):
    """A P2 action of ``G``: embed, glue rotation blocks, amplify, restrict."""
    if cert is None:
        cert = Certificate(request={})
    if G == Cyclic(0):
        pair = open_shift_block()
        cert.extend(pair.certificate)
        cert.extend(check_p1_p2(pair.action, bound=10, window=cert.request.get("window", DEFAULT_WINDOW)))
        return pair.action
    if G.is_finite and G.order() == 1:
        return _trivial_action(G)
    if not G.is_finite:
        raise RequestError(f"{G.name}: the weak ledger is built for finite solvable groups and for Z")
    hom = _embedding(G, cert)
    ns = list(reversed(cert.data["quotient_orders"]))
    if not cert.request.get("allow_large") and (len(ns) > BOUNDS["r"] or max(ns) > BOUNDS["n"]):
        cert.check("derived wreath tower within bounds", False, f"r <= {BOUNDS['r']}, n_i <= {BOUNDS['n']}",
                   ns)
        raise RequestError("wreath tower exceeds the documented bounds")
    amp = _tower_certificate(ns, cert)
    if amp.action.group != hom.codomain:
        raise RequestError(f"tower group {amp.action.group.name} differs from embedding target {hom.codomain.name}")
    act = restrict(amp.action, hom)
    cert.step("restrict", "pull the amplified action back along the embedding", group=G.name)
    cert.extend(check_p1_p2(act, want="P2"))
    return act


def _cork(req: dict, cert: Certificate) -> None:
    G = load_group(req["group"])
    mode = req.get("mode", "weak")
    if mode not in MODES:
        raise RequestError(f"unknown mode {mode!r}")
    ball = int(req.get("ball", 200))
    m = req.get("m", 1)
    if mode != "stein-shadow" and (not isinstance(m, int) or m < 1):
        raise RequestError("--m must be a positive integer")

    if mode == "equivariant":
        if not G.is_finite:
            raise RequestError("the equivariant ledger needs a finite group")
        if G.order() > max_order():
            raise RequestError(f"order {G.order()} exceeds the cap {max_order()}")
        ledger = equivariant_ledger(G, m)
        inp = doubled_twist_input(G, m)
        omega = build_omega(inp, bound=1, orders=5)
        cert.extend(omega.certificate)
        sample = ledger.domain.ball_of_size(min(ball, 200))
        bad = None
        for x in sample:
            F, h = omega(x)
            d = {(g, i + 1): v for g, vec in zip(G.elements(), F) for i, v in enumerate(vec) if v}
            d[(h, 1)] = d.get((h, 1), 0) + 1
            if equivariant_twist_label(x, G).as_dict() != d:
                bad = payload_to_json(x)
                break
        cert.check("label equals doubled omega image plus base twist", bad is None, f"{len(sample)} elements", bad)
        cert.extend(cayley_certificate(G))
    else:
        act = weak_action(G, cert)
        if not cert.passed:
            return
        ledger = weak_ledger(act, m) if mode == "weak" else stein_ledger(act)
        if mode == "stein-shadow" and G.is_finite:
            ball = min(ball, G.order())
    cert.extend(effectiveness_certificate(ledger, ball))


# ---------------------------------------------------------------------------
# replay


def verify_document(text: str) -> Certificate:
    """Replay a serialized certificate and compare it with the stored one."""
    cert = Certificate(request={"command": "verify"})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        cert.check("certificate parses", False, "document", detail=f"{exc.msg} at line {exc.lineno}")
        return cert
    if not isinstance(doc, dict) or "request" not in doc:
        cert.check("certificate parses", False, "document", detail="missing request")
        return cert
    stored = {k: v for k, v in doc.items() if k not in ("digest", "timestamp")}
    cert.check("certificate parses", True, "document")
    digest_ok = False
    try:
        digest_ok = Certificate.from_doc(doc).digest() == doc.get("digest")
    except (KeyError, TypeError):
        pass
    cert.check("digest matches body", digest_ok, "sha256 of canonical body")
    replay = run(doc["request"])
    same = canonical_json(replay.body()) == canonical_json(stored)
    cert.check("replay reproduces the certificate", same, "full body, timestamp excluded",
               None if same else _first_difference(replay.body(), stored))
    cert.check("replayed checks pass", replay.passed, f"{len(replay.checks)} checks")
    cert.data["replayed_digest"] = replay.digest()
    return cert


def _first_difference(a, b, path="") -> str:
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if a.get(k) != b.get(k):
                return _first_difference(a.get(k), b.get(k), f"{path}/{k}")
    if isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
        for i, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return _first_difference(x, y, f"{path}/{i}")
    return path or "/"


"""Assemble a homomorphism out of a wreath product from an H-indexed family.

Given ``φ: H → K`` and ``ψ_g: N → K`` (one per ``g ∈ H``) such that
``φ(h) ψ_g(x) φ(h)⁻¹ = ψ_{hg}(x)`` and ``ψ_g``, ``ψ_h`` commute for ``g ≠ h``,
``ω(F, h) = (∏_g ψ_g(F(g))) φ(h)`` is a homomorphism ``N ≀ H → K``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .certificate import Certificate
from .groups import FreeAbelian, Group, GroupError, Wreath, payload_to_json, symmetric_group
from .wreath import Homomorphism, verify_homomorphism_injective


class OmegaHypothesisError(GroupError):
    pass


@dataclass(eq=False)
class OmegaInput:
    H: Group
    N: Group
    codomain: Group
    phi: Homomorphism
    psi: dict  # H element -> Homomorphism N -> codomain

    def __post_init__(self):
        if not self.H.is_finite:
            raise GroupError("the indexing group must be finite")
        if set(self.psi) != set(self.H.elements()):
            raise GroupError("psi needs exactly one homomorphism per element of H")


def _n_range(inp: OmegaInput, bound: int | None) -> tuple[list, str]:
    if inp.N.is_finite:
        return list(inp.N.elements()), f"all of N ({inp.N.order()})"
    if bound is None:
        raise GroupError("infinite N needs a bound")
    ball = inp.N.ball(bound)
    return ball, f"radius-{bound} ball of N ({len(ball)})"


def check_omega_hypotheses(inp: OmegaInput, bound: int | None = None) -> Certificate:
    K, H = inp.codomain, inp.H
    xs, rng = _n_range(inp, bound)
    hs = H.elements()
    cert = Certificate()
    cert.step("check_omega_hypotheses", "wreath homomorphism hypotheses", H=H.name, N=inp.N.name, codomain=K.name)

    phi_ok = all(K.mul(inp.phi(a), inp.phi(b)) == inp.phi(H.mul(a, b)) for a in hs for b in hs)
    cert.check("phi is a homomorphism", phi_ok, f"all {len(hs) ** 2} pairs of H")
    psi_bad = None
    for g in hs:
        for x in xs:
            for y in xs:
                if K.mul(inp.psi[g](x), inp.psi[g](y)) != inp.psi[g](inp.N.mul(x, y)):
                    psi_bad = [payload_to_json(g), payload_to_json(x), payload_to_json(y)]
                    break
            if psi_bad:
                break
        if psi_bad:
            break
    cert.check("each psi_g is a homomorphism", psi_bad is None, f"{rng} squared, per g", psi_bad)

    witness = None
    for x in xs:
        for g in hs:
            for h in hs:
                lhs = K.mul(K.mul(inp.phi(h), inp.psi[g](x)), inp.phi(H.inv(h)))
                if lhs != inp.psi[H.mul(h, g)](x):
                    witness = {"x": payload_to_json(x), "g": payload_to_json(g), "h": payload_to_json(h)}
                    break
            if witness:
                break
        if witness:
            break
    cert.check("conjugation equivariance", witness is None, f"{rng} x H x H", witness)

    witness = None
    for x in xs:
        for y in xs:
            for g in hs:
                for h in hs:
                    if g == h:
                        continue
                    a, b = inp.psi[g](x), inp.psi[h](y)
                    if K.mul(a, b) != K.mul(b, a):
                        witness = {"x": payload_to_json(x), "y": payload_to_json(y),
                                   "g": payload_to_json(g), "h": payload_to_json(h)}
                        break
                if witness:
                    break
            if witness:
                break
        if witness:
            break
    cert.check("distinct-index commutation", witness is None, f"{rng}^2 x pairs g != h", witness)
    return cert


def build_omega(
    inp: OmegaInput,
    hypotheses: Certificate | None = None,
    bound: int | None = None,
    orders: int = 20,
    seed: int = 0,
) -> Homomorphism:
    """``ω(F, h) = (∏_g ψ_g(F(g))) φ(h)``, product in canonical order of ``H``.

    Refuses unless the hypotheses certificate passed. The returned map carries
    a certificate with the homomorphism check and the product-order check.
    """
    if hypotheses is None:
        hypotheses = check_omega_hypotheses(inp, bound)
    if not hypotheses.passed:
        raise OmegaHypothesisError("hypotheses failed: " + ", ".join(c.name for c in hypotheses.failures()))
    K, H = inp.codomain, inp.H
    W = Wreath(inp.N, H)
    hs = H.elements()
    psis = [inp.psi[g] for g in hs]

    def omega(x):
        F, h = x
        acc = K.identity
        for psi, f in zip(psis, F):
            acc = K.mul(acc, psi(f))
        return K.mul(acc, inp.phi(h))

    hom = Homomorphism(W, K, omega, "wreath assembly")
    cert = Certificate(chain=list(hypotheses.chain), checks=list(hypotheses.checks))
    cert.step("build_omega", "wreath homomorphism assembly", domain=W.name, codomain=K.name)
    cert.extend(verify_homomorphism_injective(hom, bound=bound))
    # injectivity is not part of the claim; keep only what the construction promises
    inj = [c for c in cert.checks if c.name == "injective"]
    for c in inj:
        cert.checks.remove(c)
    cert.data["omega_injective_on_range"] = all(c.passed for c in inj)

    rng = random.Random(seed)
    elems = W.elements() if W.is_finite else W.ball(bound)
    bad = None
    for x in elems:
        F, h = x
        ref = omega(x)
        for _ in range(orders):
            perm = list(range(len(hs)))
            rng.shuffle(perm)
            acc = K.identity
            for i in perm:
                acc = K.mul(acc, psis[i](F[i]))
            if K.mul(acc, inp.phi(h)) != ref:
                bad = [payload_to_json(x), perm]
                break
        if bad:
            break
    cert.check("product order independence", bad is None, f"{len(elems)} elements x {orders} random orders", bad)
    hom.certificate = cert
    return hom


# ---------------------------------------------------------------------------
# standard inputs


def imprimitive_input(N: Group, H: Group) -> OmegaInput:
    """``N ≀ H`` acting on ``N × H``: ``ψ_g`` moves the ``g`` column, ``φ`` permutes columns."""
    nel, hel = N.elements(), H.elements()
    pts = [(a, b) for a in nel for b in hel]
    pos = {p: i for i, p in enumerate(pts)}
    K = symmetric_group(len(pts))
    phi_tab = {h: tuple(pos[(a, H.mul(h, b))] for a, b in pts) for h in hel}
    phi = Homomorphism(H, K, phi_tab.__getitem__, "column permutation")

    def make_psi(g):
        tab = {x: tuple(pos[(N.mul(x, a), b)] if b == g else pos[(a, b)] for a, b in pts) for x in nel}
        return Homomorphism(N, K, tab.__getitem__, f"column twist at {g}")

    return OmegaInput(H, N, K, phi, {g: make_psi(g) for g in hel})


def regular_input(N: Group, H: Group) -> OmegaInput:
    """Codomain ``N ≀ H`` itself with the coordinate inclusions; ω is the identity."""
    W = Wreath(N, H)
    hel = H.elements()
    pos = {g: i for i, g in enumerate(hel)}
    phi = Homomorphism(H, W, lambda h: ((N.identity,) * len(hel), h), "top inclusion")

    def make_psi(g):
        def f(x):
            F = [N.identity] * len(hel)
            F[pos[g]] = x
            return (tuple(F), H.identity)

        return Homomorphism(N, W, f, f"coordinate inclusion at {g}")

    return OmegaInput(H, N, W, phi, {g: make_psi(g) for g in hel})


def doubled_twist_input(H: Group, m: int) -> OmegaInput:
    """Twists on cork sites ``H × [m]``: ``ψ_g(k)`` twists site ``(g, i)`` by ``2 k_i``; ``φ`` permutes sites."""
    Z = FreeAbelian(m)
    K = Wreath(Z, H)
    hel = H.elements()
    pos = {g: i for i, g in enumerate(hel)}
    zero = Z.identity
    phi = Homomorphism(H, K, lambda h: ((zero,) * len(hel), h), "site permutation")

    def make_psi(g):
        def f(k):
            F = [zero] * len(hel)
            F[pos[g]] = tuple(2 * v for v in k)
            return (tuple(F), H.identity)

        return Homomorphism(Z, K, f, f"doubled twist at {g}")

    return OmegaInput(H, Z, K, phi, {g: make_psi(g) for g in hel})

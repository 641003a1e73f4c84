import random

import pytest

from corkcalc import catalog
from corkcalc.groups import Cyclic, FreeAbelian, Quotient, Subgroup, Wreath, prime_cyclic_series, symmetric_group
from corkcalc.wreath import (
    Homomorphism,
    NormalityError,
    identity_hom,
    kk_embed,
    lift_pointwise,
    series_embed,
    verify_homomorphism_injective,
    wreath_inverse,
    wreath_multiply,
    wreath_shift,
)


def test_shift_examples():
    assert wreath_shift(Cyclic(2), 1, ("a0", "a1")) == ("a1", "a0")
    assert wreath_shift(Cyclic(3), 0, ("a0", "a1", "a2")) == ("a0", "a1", "a2")
    assert wreath_shift(Cyclic(3), 1, ("a0", "a1", "a2")) == ("a2", "a0", "a1")


@pytest.mark.parametrize("top", ["S3", "D4", "Z4xZ2", "Dic3"])
def test_shift_is_left_action(top):
    H = catalog.get(top)
    els = H.elements()
    F = tuple(range(len(els)))
    for g in els:
        for h in els:
            assert wreath_shift(H, g, wreath_shift(H, h, F)) == wreath_shift(H, H.mul(g, h), F)


def test_multiply_z2_wr_z2_hand_value():
    W = Wreath(Cyclic(2), Cyclic(2))
    for a0, a1, b0, b1 in [(1, 0, 0, 1), (1, 1, 1, 0), (0, 1, 1, 1)]:
        assert wreath_multiply(W, ((a0, a1), 1), ((b0, b1), 1)) == (((a0 + b1) % 2, (a1 + b0) % 2), 0)


def test_multiply_identity_and_owner_mismatch():
    W = Wreath(Cyclic(2), Cyclic(2))
    x = ((1, 0), 1)
    assert wreath_multiply(W, x, W.identity) == x
    with pytest.raises(TypeError):
        wreath_multiply(W, x, ((0, 1, 2), 0))


def test_inverse_random_z3_wr_s3():
    W = Wreath(Cyclic(3), symmetric_group(3))
    rng = random.Random(1)
    tops = W.top.elements()
    for _ in range(100):
        x = (tuple(rng.randrange(3) for _ in tops), rng.choice(tops))
        assert W.mul(x, wreath_inverse(W, x)) == W.identity


@pytest.mark.parametrize("n,h", [(2, 2), (2, 3), (3, 2), (4, 2), (2, 4), (3, 3)])
def test_wreath_order_matches_enumeration(n, h):
    W = Wreath(Cyclic(n), Cyclic(h))
    assert len(W.elements()) == n**h * h == W.order()


def test_kk_embed_z4():
    h = kk_embed(Cyclic(4), [2])
    assert h(1) == ((2, 0), 1)
    assert h(2) == h.codomain.mul(h(1), h(1)) == ((2, 2), 0)
    assert h.certificate.passed
    assert "all 16 pairs" in [c.range for c in h.certificate.checks]


def test_kk_embed_trivial_quotient():
    G = Cyclic(3)
    h = kk_embed(G, G.generators)
    for g in G.elements():
        F, t = h(g)
        assert len(F) == 1 and t == h.codomain.top.identity


def test_kk_embed_s3_projection():
    S3 = catalog.get("S3")
    A3 = Subgroup(S3, (perm_from_3cycle(),))
    h = kk_embed(S3, A3)
    Q = Quotient(S3, A3)
    for g in S3.elements():
        assert h(g)[1] == Q.project(g)
    transposition = (1, 0, 2)
    assert h(transposition)[1] != h.codomain.top.identity


def perm_from_3cycle():
    return (1, 2, 0)


def test_kk_embed_refuses_non_normal():
    S3 = catalog.get("S3")
    with pytest.raises(NormalityError) as err:
        kk_embed(S3, [(1, 0, 2)])
    assert "normality violated at" in str(err.value)


def test_constant_map_fails_injectivity():
    Z2 = Cyclic(2)
    cert = verify_homomorphism_injective(Homomorphism(Z2, Z2, lambda x: 0, "constant"))
    inj = next(c for c in cert.checks if c.name == "injective")
    assert not inj.passed and inj.witness == ["kernel", 1]


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "A4", "Z4xZ2", "Z6", "Dic3", "S4", "V4", "Z8"])
def test_series_embed_verified(name):
    G = catalog.get(name)
    s = prime_cyclic_series(G)
    h = series_embed(G, s)
    assert h.certificate.passed
    assert len({h(g) for g in G.elements()}) == G.order()


def test_series_embed_s3_target_and_q8_range():
    S3 = catalog.get("S3")
    h = series_embed(S3, prime_cyclic_series(S3))
    assert h.codomain == Wreath(Cyclic(3), Cyclic(2)) and h.codomain.order() == 18
    assert "all 36 pairs" in [c.range for c in h.certificate.checks]
    Q8 = catalog.get("Q8")
    hq = series_embed(Q8, prime_cyclic_series(Q8))
    assert hq.codomain == Wreath(Wreath(Cyclic(2), Cyclic(2)), Cyclic(2))
    assert "all 64 pairs" in [c.range for c in hq.certificate.checks]


def test_series_embed_z6_generator_order():
    G = Cyclic(6)
    h = series_embed(G, prime_cyclic_series(G))
    assert h.codomain.element_order(h(1)) == 6


def test_abelian_by_finite_embedding():
    for name in ["KleinBottleExt", "Z2rot4"]:
        G = catalog.get(name)
        h = kk_embed(G)
        assert h.certificate.passed
        assert h.codomain.base == FreeAbelian(G.rank)


def test_base_functoriality():
    e = series_embed(Cyclic(4), prime_cyclic_series(Cyclic(4)))
    top = Cyclic(3)
    lifted = lift_pointwise(e, top)
    rng = random.Random(3)
    src = lifted.domain
    for _ in range(100):
        x = src.element_at(rng.randrange(src.order()))
        y = src.element_at(rng.randrange(src.order()))
        assert lifted(src.mul(x, y)) == lifted.codomain.mul(lifted(x), lifted(y))


def test_identity_hom():
    G = Cyclic(5)
    assert verify_homomorphism_injective(identity_hom(G)).passed

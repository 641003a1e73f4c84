import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corkcalc.blocks import (
    BlockAction,
    BlockError,
    Cell,
    RestrictedWreath,
    TableAction,
    check_p1_p2,
    glue_block,
    open_shift_block,
    open_wreath_glue,
    p1_to_p2,
    wreath_glue,
    wreath_tower,
    zn_block,
)
from corkcalc.certificate import Certificate
from corkcalc.groups import Cyclic, compose, iterated_wreath, iterated_wreath_order


def brute_generator(n):
    """Compose the rotation hats as functions on 1-based leaves, rightmost first."""
    f0 = lambda x: (x[0] % n + 1, x[1])
    fs = [lambda x, i=i: (x[0], x[1] % n + 1) if x[0] == i else x for i in range(1, n + 1)]
    word = fs + [f0]

    def g(x):
        for f in reversed(word):
            x = f(x)
        return x

    return g


def small_pair(n, hats, witness=None):
    block = Cell.open(n)
    leaves = tuple(block.leaves())
    return BlockAction(block, TableAction(Cyclic(len(hats)), leaves, dict(enumerate(hats)), witness), Certificate())


# --- glue_block


def test_glue_block_counts_and_addresses():
    outer = Cell.open(2)
    out = glue_block(outer, (1,), Cell.open(2))
    assert out.leaf_count == 3
    assert list(out.leaves()) == [(1, 1), (1, 2), (2,)]
    assert outer.glue_everywhere(Cell.open(3)).leaf_count == 6
    with pytest.raises(BlockError):
        glue_block(out, (1,), Cell.open(2))
    with pytest.raises(BlockError):
        glue_block(out, (3,), Cell.open(2))


def test_block_document_shares_copies():
    doc = zn_block(3).block.to_doc()
    assert doc["slots"][0]["slots"] == [None, None, None]
    assert doc["slots"][1] == {"ref": 1}


# --- zn_block


def test_zn2_generator_is_two_transpositions():
    act = zn_block(2).action
    img = {leaf: act.apply(1, leaf) for leaf in act.leaves}
    assert img == {(1, 1): (2, 2), (2, 2): (1, 1), (1, 2): (2, 1), (2, 1): (1, 2)}


@pytest.mark.parametrize("n", range(2, 7))
def test_zn_block_matches_brute_force(n):
    pair = zn_block(n)
    act = pair.action
    g = brute_generator(n)
    assert pair.block.leaf_count == n * n
    for leaf in act.leaves:
        assert act.apply(1, leaf) == g(leaf) == (leaf[0] % n + 1, leaf[1] % n + 1)
    assert pair.certificate.passed
    gen = act.hat(1)
    power = tuple(range(n * n))
    for _ in range(n):
        power = compose(gen, power)
    assert power == tuple(range(n * n))
    cert = check_p1_p2(act)
    assert cert.passed
    assert {act.orbit_point(k) for k in range(n)} == {(k + 1, k + 1) for k in range(n)}


def test_zn3_orbit():
    act = zn_block(3).action
    assert [act.orbit_point(k) for k in range(3)] == [(1, 1), (2, 2), (3, 3)]


def test_zn_block_rejects_small_n():
    with pytest.raises(BlockError):
        zn_block(1)


# --- check_p1_p2


def test_trivial_action_fails_p1_with_witness():
    act = TableAction(Cyclic(2), [(1,)], {0: (0,), 1: (0,)})
    cert = check_p1_p2(act)
    p1 = next(c for c in cert.checks if c.name.startswith("P1"))
    assert not p1.passed and p1.witness == 1
    p2 = next(c for c in cert.checks if c.name.startswith("P2"))
    assert not p2.passed


def test_p2_search_finds_first_free_leaf():
    # Z_2 swapping leaves 2 and 3, fixing leaf 1
    act = TableAction(Cyclic(2), [(1,), (2,), (3,)], {0: (0, 1, 2), 1: (0, 2, 1)})
    cert = check_p1_p2(act)
    assert cert.passed and cert.data["p2_witness"] == [2]


# --- wreath_glue


def test_wreath_glue_z2_z2():
    out = wreath_glue(zn_block(2), zn_block(2))
    assert out.block.leaf_count == 16
    act = out.action
    W = act.group
    assert W.order() == 8
    hats = {act.hat(x) for x in W.elements()}
    assert len(hats) == 8
    assert act.hat(W.identity) == tuple(range(16))


def test_wreath_glue_off_orbit_copies_fixed():
    out = wreath_glue(zn_block(2), zn_block(2))
    act = out.action
    for x in act.group.elements():
        F, h = x
        if h != 0:
            continue
        for leaf in act.leaves:
            if leaf[:2] in [(1, 2), (2, 1)]:
                assert act.apply(x, leaf) == leaf


def test_wreath_glue_rule_by_hand():
    """(F, h): copy i goes to h·i and is twisted by F(g) when h·i = g·p."""
    out = wreath_glue(zn_block(2), zn_block(3))
    act = out.action
    phi, psi = zn_block(2).action, zn_block(3).action
    for x in act.group.elements():
        F, h = x
        for leaf in act.leaves:
            i, j = leaf[:2], leaf[2:]
            i2 = phi.apply(h, i)
            g = next((g for g in range(2) if phi.orbit_point(g) == i2), None)
            j2 = psi.apply(F[g], j) if g is not None else j
            assert act.apply(x, leaf) == i2 + j2


@pytest.mark.parametrize("n1,n2", list(itertools.product([2, 3], repeat=2)))
def test_wreath_glue_p1_exhaustive(n1, n2):
    out = wreath_glue(zn_block(n1), zn_block(n2))
    assert out.block.leaf_count == n1 * n1 * n2 * n2
    assert out.certificate.passed
    cert = check_p1_p2(out.action, want="P1")
    assert cert.passed
    hats = {out.action.hat(x) for x in out.action.group.elements()}
    assert len(hats) == out.action.group.order() == n2**n1 * n1


def test_wreath_glue_refuses_without_witness():
    pair = small_pair(2, [(0, 1), (1, 0)])
    with pytest.raises(BlockError):
        wreath_glue(pair, zn_block(2))


def test_hat_rows_agree_with_hat():
    act = wreath_glue(zn_block(3), wreath_glue(zn_block(2), zn_block(2))).action
    rng = random.Random(0)
    idx = np.array([rng.randrange(act.group.order()) for _ in range(50)])
    rows = act.hat_rows(idx)
    for i, row in zip(idx, rows):
        assert tuple(row) == act.hat(act.group.element_at(int(i)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 17), st.integers(0, 17))
def test_glued_action_law(a, b):
    act = wreath_glue(zn_block(2), zn_block(3)).action
    W = act.group
    x, y = W.element_at(a), W.element_at(b)
    assert act.hat(W.mul(x, y)) == compose(act.hat(x), act.hat(y))


# --- p1_to_p2


def test_p1_to_p2_swap_example():
    pair = small_pair(2, [(0, 1), (1, 0)])
    out = p1_to_p2(pair)
    assert out.block.copies == 3 and out.block.leaf_count == 4
    act = out.action
    for i, j in itertools.product([1, 2], repeat=2):
        assert act.apply(1, (i, j)) == (3 - i, 3 - j)
    assert act.p2_witness == (1, 2)
    assert {act.orbit_point(0), act.orbit_point(1)} == {(1, 2), (2, 1)}
    assert out.certificate.passed


def test_p1_to_p2_cyclic_shift_example():
    pair = small_pair(3, [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
    out = p1_to_p2(pair)
    act = out.action
    assert [act.orbit_point(k) for k in range(3)] == [(1, 2, 3), (2, 3, 1), (3, 1, 2)]
    assert out.block.copies == 1 + 3 + 9 and out.block.leaf_count == 27
    assert all(act.apply(0, w) == w for w in itertools.product([1, 2, 3], repeat=3))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_p1_to_p2_counts(n):
    hats = [tuple((i + k) % n for i in range(n)) for k in range(n)]
    out = p1_to_p2(small_pair(n, hats))
    assert out.block.copies == sum(n**r for r in range(n))
    assert out.block.leaf_count == n**n
    assert len(list(out.block.leaves())) == n**n
    assert out.action.p2_witness == tuple(range(1, n + 1))


def test_p1_to_p2_refuses_without_p1():
    pair = small_pair(2, [(0, 1), (0, 1)])
    with pytest.raises(BlockError):
        p1_to_p2(pair)


def test_copy_tree_leaf_paths():
    out = p1_to_p2(small_pair(2, [(0, 1), (1, 0)]))
    assert out.block.is_leaf((1, 2)) and not out.block.is_leaf((1, 3))
    assert out.action.leaf_path((2, 1)) == (2, 1)


# --- pipeline soundness

TOWERS = [ns for r in (1, 2, 3) for ns in itertools.product([2, 3], repeat=r)]


@pytest.mark.parametrize("ns", TOWERS, ids=lambda ns: "x".join(map(str, ns)))
def test_tower_p1_then_p2(ns):
    tower = wreath_tower(ns)
    assert tower.action.group == iterated_wreath(ns)
    assert tower.action.group.order() == iterated_wreath_order(ns)
    assert tower.certificate.passed
    amp = p1_to_p2(tower, tower.certificate)
    assert amp.certificate.passed


# --- open blocks


def test_open_shift_block():
    pair = open_shift_block()
    act = pair.action
    assert act.apply(0, (7,)) == (7,)
    assert act.apply(3, (-5,)) == (-2,)
    for a, b in itertools.product(range(-4, 5), repeat=2):
        for i in range(-100, 101, 17):
            assert act.apply(a, act.apply(b, (i,))) == act.apply(a + b, (i,))
    cert = check_p1_p2(act, bound=5)
    assert cert.passed
    assert act.exact


def test_open_wreath_glue_rule():
    out = open_wreath_glue(open_shift_block(), zn_block(2), window=10)
    act = out.action
    W = act.group
    x = W.element({0: 1}, 5)
    psi = zn_block(2).action
    for j in psi.leaves:
        # the copy landing on 0·p = 0 is the one twisted by F(0)
        assert act.apply(x, (-5,) + j) == (0,) + psi.apply(1, j)
        for i in (-3, 0, 2, 7):
            assert act.apply(x, (i,) + j) == (i + 5,) + j
    for i in range(-50, 51):
        for j in psi.leaves:
            assert act.apply(W.identity, (i,) + j) == (i,) + j


def test_open_wreath_glue_window_distinctness():
    out = open_wreath_glue(open_shift_block(), zn_block(2), window=10)
    act = out.action
    W = act.group
    elements = [W.element(dict(zip(range(-3, 4), bits)), h)
                for bits in itertools.product([0, 1], repeat=7) for h in range(-3, 4)]
    cert = check_p1_p2(act, elements=elements, window=10, want="P1")
    assert cert.passed
    window = [(i,) + j for i in range(-10, 11) for j in zn_block(2).action.leaves]
    hats = {tuple(act.apply(x, leaf) for leaf in window) for x in elements}
    assert len(hats) == len(elements) == 896


def test_restricted_wreath_laws():
    W = RestrictedWreath(Cyclic(3), Cyclic(0))
    rng = random.Random(2)

    def rand():
        return W.element({k: rng.randrange(3) for k in rng.sample(range(-4, 5), 3)}, rng.randrange(-3, 4))

    for _ in range(200):
        a, b, c = rand(), rand(), rand()
        assert W.mul(W.mul(a, b), c) == W.mul(a, W.mul(b, c))
        assert W.mul(a, W.inv(a)) == W.identity
        assert W.contains(a)


def test_open_glue_refuses_non_invertible_top():
    with pytest.raises(BlockError):
        open_wreath_glue(zn_block(2)._replace(action=TableAction(Cyclic(2), [(1,), (2,)], {0: (0, 1), 1: (1, 0)})),
                         zn_block(2))

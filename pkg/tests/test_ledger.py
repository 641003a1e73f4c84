import itertools
import random

import pytest

from corkcalc import catalog
from corkcalc.blocks import RegularAction, open_shift_block, p1_to_p2, wreath_glue, zn_block
from corkcalc.groups import Cyclic, FreeAbelian, Wreath
from corkcalc.ledger import (
    NotATwistLabel,
    TwistLabel,
    cayley_certificate,
    cayley_complex,
    effectiveness_certificate,
    equivariant_ledger,
    equivariant_twist_label,
    exhaustive_distinctness,
    parse_site,
    recover_from_label,
    site_key,
    stein_ledger,
    weak_ledger,
    weak_twist_label,
)


def test_equivariant_identity_is_base_twist():
    H = Cyclic(2)
    lbl = equivariant_twist_label(Wreath(FreeAbelian(1), H).identity, H)
    assert lbl.as_dict() == {(0, 1): 1}


def test_equivariant_worked_example():
    lbl = equivariant_twist_label((((1,), (0,)), 1), Cyclic(2))
    assert lbl.as_dict() == {(0, 1): 2, (1, 1): 1}


def test_equivariant_doubling():
    H = catalog.get("S3")
    rng = random.Random(0)
    els = H.elements()
    for _ in range(1000):
        x = (tuple((rng.randint(-5, 5), rng.randint(-5, 5)) for _ in els), rng.choice(els))
        d = equivariant_twist_label(x, H).as_dict()
        d[(x[1], 1)] = d.get((x[1], 1), 0) - 1
        assert all(v % 2 == 0 for v in d.values())


def test_weak_worked_example():
    act = zn_block(2).action
    lbl = weak_twist_label((((2,), (-1,)), 1), act)
    assert lbl.as_dict() == {((1, 1), 1): 4, ((2, 2), 1): -1}


def test_weak_identity():
    act = zn_block(3).action
    W = Wreath(FreeAbelian(2), act.group)
    assert weak_twist_label(W.identity, act).as_dict() == {((1, 1), 1): 1}


def test_recover_worked_example():
    lbl = TwistLabel.from_dict({(0, 1): 2, (1, 1): 1})
    assert recover_from_label(lbl, RegularAction(Cyclic(2)), 1) == (((1,), (0,)), 1)


@pytest.mark.parametrize("bad,kind,text", [
    ({}, "parity", "no odd coordinate"),
    ({((1, 1), 1): 1, ((2, 2), 1): 3}, "parity", "multiple odd coordinates"),
    ({((1, 2), 1): 1}, "orbit", "odd site not on the orbit"),
    ({((1, 1), 1): 1, ((2, 1), 1): 2}, "remainder", "remainder is not twice an orbit-supported map"),
])
def test_recover_diagnoses(bad, kind, text):
    with pytest.raises(NotATwistLabel) as err:
        recover_from_label(TwistLabel.from_dict(bad), zn_block(2).action, 1)
    assert err.value.kind == kind and text in str(err.value)


def test_equivariant_is_weak_on_regular_action():
    for name in ["Z2", "Z3", "V4", "S3", "Z6"]:
        H = catalog.get(name)
        reg = RegularAction(H)
        for m in (1, 2):
            vals = [v for v in itertools.product(range(-1, 2), repeat=m)]
            rng = random.Random(m)
            for _ in range(100):
                x = (tuple(rng.choice(vals) for _ in H.elements()), rng.choice(H.elements()))
                assert equivariant_twist_label(x, H) == weak_twist_label(x, reg)


def test_sites_serialize_and_parse():
    lbl = weak_twist_label((((2,), (-1,)), 1), zn_block(2).action)
    doc = lbl.to_doc()
    assert doc == {"[1,1]#1": 4, "[2,2]#1": -1}
    assert TwistLabel.from_doc(doc) == lbl
    assert parse_site(site_key(((1, 2, 3), 2))) == ((1, 2, 3), 2)


def test_effectiveness_equivariant_ball_200():
    cert = effectiveness_certificate(equivariant_ledger(Cyclic(2), 1), 200)
    assert cert.passed
    assert len(cert.data["labels"]) == 200


def test_effectiveness_identity_only():
    cert = effectiveness_certificate(equivariant_ledger(Cyclic(3), 1), 1)
    assert cert.passed and len(cert.data["labels"]) == 1


def test_effectiveness_weak_on_z_shift():
    ledger = weak_ledger(open_shift_block().action, 2)
    cert = effectiveness_certificate(ledger, 300)
    assert cert.passed


def test_stein_shadow_labels_are_orbit_points():
    act = zn_block(3).action
    ledger = stein_ledger(act)
    cert = effectiveness_certificate(ledger, 3)
    assert cert.passed
    assert ledger.label(2).as_dict() == {((3, 3), 1): 1}


def test_exhaustive_distinctness_z2_wr_z2_block():
    amp = p1_to_p2(wreath_glue(zn_block(2), zn_block(2)))
    cert = exhaustive_distinctness(amp.action, 1)
    assert cert.passed
    assert "3125000" in cert.checks[0].range


def test_s3_image_all_small_labels_distinct():
    """S_3 acting through its image in Z_3 wr Z_2 on the amplified block, F in {-1,0,1}."""
    from corkcalc.pipeline import weak_action

    act = weak_action(catalog.get("S3"))
    assert act.base.group.order() == 18
    cert = exhaustive_distinctness(act, 1, lo=-1, hi=1)
    assert cert.passed


def test_exhaustive_detects_collisions_without_p2():
    from corkcalc.blocks import TableAction

    act = TableAction(Cyclic(2), [(1,)], {0: (0,), 1: (0,)}, p2_witness=(1,))
    cert = exhaustive_distinctness(act, 1, lo=-1, hi=1)
    assert not cert.passed


def test_cayley_examples():
    _, rep = cayley_complex(Cyclic(3))
    assert rep == {"vertices": 3, "handle_edges": 6, "doubled_pairs": 3, "connected": True}
    _, rep = cayley_complex(Cyclic(2))
    assert rep["handle_edges"] == 2 and rep["doubled_pairs"] == 1
    _, rep = cayley_complex(catalog.get("S3"))
    assert rep["vertices"] == 6 and rep["handle_edges"] == 30 and rep["connected"]


@pytest.mark.parametrize("name", [n for n in catalog.finite_names() if catalog.get(n).order() <= 24])
def test_cayley_connected_for_catalog(name):
    assert cayley_certificate(catalog.get(name)).passed

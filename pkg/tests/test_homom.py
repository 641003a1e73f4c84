import pytest

from corkcalc import catalog
from corkcalc.groups import Cyclic, Wreath, perm_from_cycles, symmetric_group
from corkcalc.homom import (
    OmegaHypothesisError,
    OmegaInput,
    build_omega,
    check_omega_hypotheses,
    doubled_twist_input,
    imprimitive_input,
    regular_input,
)
from corkcalc.wreath import Homomorphism

S4 = symmetric_group(4)
E = S4.identity


def s4_input(psi1_cycle):
    Z2 = Cyclic(2)
    a = perm_from_cycles(4, (1, 3), (2, 4))
    phi = Homomorphism(Z2, S4, lambda h: a if h else E, "phi")
    p0 = perm_from_cycles(4, (1, 2))
    p1 = perm_from_cycles(4, psi1_cycle)
    psi = {0: Homomorphism(Z2, S4, lambda x: p0 if x else E, "psi0"),
           1: Homomorphism(Z2, S4, lambda x: p1 if x else E, "psi1")}
    return OmegaInput(Z2, Z2, S4, phi, psi)


def test_s4_hypotheses_pass():
    assert check_omega_hypotheses(s4_input((3, 4))).passed


def test_s4_mutation_detected_with_witness():
    cert = check_omega_hypotheses(s4_input((2, 3)))
    eq = next(c for c in cert.checks if c.name == "conjugation equivariance")
    assert not eq.passed
    assert eq.witness == {"x": 1, "g": 0, "h": 1}
    with pytest.raises(OmegaHypothesisError):
        build_omega(s4_input((2, 3)), cert)


def test_s4_omega_values():
    om = build_omega(s4_input((3, 4)))
    assert om.certificate.passed
    assert om(((1, 1), 1)) == perm_from_cycles(4, (1, 4), (2, 3))
    assert om(((0, 0), 0)) == E
    assert om(((1, 0), 0)) == perm_from_cycles(4, (1, 2))
    image = {om(x) for x in om.domain.elements()}
    assert len(image) == 8
    assert om.certificate.data["omega_injective_on_range"] is True


def test_trivial_h_passes():
    Z1, Z3 = Cyclic(1), Cyclic(3)
    phi = Homomorphism(Z1, Z3, lambda h: 0, "phi")
    psi = {0: Homomorphism(Z3, Z3, lambda x: x, "id")}
    assert check_omega_hypotheses(OmegaInput(Z1, Z3, Z3, phi, psi)).passed


@pytest.mark.parametrize("n,h", [(2, 2), (3, 2), (2, 3), (4, 2), (2, 4), (4, 4)])
def test_imprimitive_and_regular(n, h):
    N, H = Cyclic(n), Cyclic(h)
    for inp in (imprimitive_input(N, H), regular_input(N, H)):
        om = build_omega(inp)
        assert om.certificate.passed


def test_nonabelian_indexing():
    om = build_omega(imprimitive_input(Cyclic(2), catalog.get("S3")))
    assert om.certificate.passed


def test_base_restriction_is_pointwise_product():
    inp = imprimitive_input(Cyclic(3), Cyclic(2))
    om = build_omega(inp)
    K = inp.codomain
    for F in Wreath(Cyclic(3), Cyclic(2)).elements():
        if F[1] != 0:
            continue
        expected = K.mul(inp.psi[0](F[0][0]), inp.psi[1](F[0][1]))
        assert om(F) == expected


def test_doubled_twist_on_ball():
    inp = doubled_twist_input(Cyclic(2), 2)
    om = build_omega(inp, bound=2)
    assert om.certificate.passed
    assert om((((1, 0), (0, 2)), 1)) == (((2, 0), (0, 4)), 1)

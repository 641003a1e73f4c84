"""Built-in named groups."""

from __future__ import annotations

from typing import Callable

from .groups import (
    AbelianByFinite,
    Cyclic,
    FreeAbelian,
    Group,
    Permutation,
    Table,
    Wreath,
    perm_from_cycles,
    symmetric_group,
)


def quaternion_table() -> Table:
    # elements 0..7 = 1, -1, i, -i, j, -j, k, -k
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    unit = {("1", u): u for u in "1ijk"} | {(u, "1"): u for u in "1ijk"}
    unit |= {(u, u): "-1" for u in "ijk"}
    unit |= {("i", "j"): "k", ("j", "k"): "i", ("k", "i"): "j"}
    unit |= {("j", "i"): "-k", ("k", "j"): "-i", ("i", "k"): "-j"}

    def mul(a: str, b: str) -> str:
        sa, ua = (a[0] == "-"), a.lstrip("-")
        sb, ub = (b[0] == "-"), b.lstrip("-")
        r = unit[(ua, ub)]
        neg = sa ^ sb ^ r.startswith("-")
        r = r.lstrip("-")
        return ("-" + r) if neg else r

    rows = [[names.index(mul(a, b)) for b in names] for a in names]
    return Table(8, tuple(map(tuple, rows)), label="Q_8")


def dihedral(n: int) -> Permutation:
    rot = perm_from_cycles(n, tuple(range(1, n + 1)))
    refl = perm_from_cycles(n, *[(i, n + 1 - i) for i in range(1, n // 2 + 1)])
    return Permutation(n, (rot, refl), label=f"D_{n}")


def alternating(n: int) -> Permutation:
    gens = [perm_from_cycles(n, (1, 2, k)) for k in range(3, n + 1)]
    return Permutation(n, tuple(gens), label=f"A_{n}")


def _cyc(n: int) -> Callable[[], Group]:
    return lambda: Cyclic(n)


def _z4xz2() -> Permutation:
    return Permutation(6, (perm_from_cycles(6, (1, 2, 3, 4)), perm_from_cycles(6, (5, 6))), label="Z_4xZ_2")


def _klein() -> Permutation:
    return Permutation(4, (perm_from_cycles(4, (1, 2), (3, 4)), perm_from_cycles(4, (1, 3), (2, 4))), label="V_4")


def _dicyclic12() -> Permutation:
    # Z_3 ⋊ Z_4 as a subgroup of S_7: a 3-cycle inverted by an element of order 4
    a = perm_from_cycles(7, (1, 2, 3))
    b = perm_from_cycles(7, (1, 2), (4, 5, 6, 7))
    return Permutation(7, (a, b), label="Dic_3")


def _s3xz2() -> Permutation:
    return Permutation(5, (perm_from_cycles(5, (1, 2)), perm_from_cycles(5, (1, 2, 3)), perm_from_cycles(5, (4, 5))), label="S_3xZ_2")


def _gl23() -> Permutation:
    # GL(2,3) acting on the 8 nonzero vectors of F_3^2
    vecs = [(x, y) for x in range(3) for y in range(3) if (x, y) != (0, 0)]

    def perm(mat):
        img = []
        for x, y in vecs:
            v = ((mat[0][0] * x + mat[0][1] * y) % 3, (mat[1][0] * x + mat[1][1] * y) % 3)
            img.append(vecs.index(v))
        return tuple(img)

    return Permutation(8, (perm(((1, 1), (0, 1))), perm(((0, 1), (2, 0))), perm(((2, 0), (0, 1)))), label="GL(2,3)")


def _z_ext_klein_bottle() -> AbelianByFinite:
    # Z ⋊ Z_2 with a nontrivial cocycle: the Klein bottle group's Z-by-Z_2 presentation
    H = Cyclic(2)
    return AbelianByFinite.build(
        2, H, action={1: ((1, 0), (0, -1))}, cocycle={(1, 1): (1, 0)}, label="Z^2.Z_2(klein)"
    )


def _z2_rot4() -> AbelianByFinite:
    H = Cyclic(4)
    rot = ((0, -1), (1, 0))
    mats = {0: ((1, 0), (0, 1)), 1: rot, 2: ((-1, 0), (0, -1)), 3: ((0, 1), (-1, 0))}
    return AbelianByFinite.build(2, H, action=mats, label="Z^2⋊Z_4")


CATALOG: dict[str, Callable[[], Group]] = {
    "Z1": _cyc(1),
    "Z2": _cyc(2),
    "Z3": _cyc(3),
    "Z4": _cyc(4),
    "Z5": _cyc(5),
    "Z6": _cyc(6),
    "Z8": _cyc(8),
    "V4": _klein,
    "Z4xZ2": _z4xz2,
    "S3": lambda: symmetric_group(3),
    "D4": lambda: dihedral(4),
    "Q8": quaternion_table,
    "D5": lambda: dihedral(5),
    "D6": lambda: dihedral(6),
    "Dic3": _dicyclic12,
    "A4": lambda: alternating(4),
    "S3xZ2": _s3xz2,
    "S4": lambda: symmetric_group(4),
    "GL23": _gl23,
    "A5": lambda: alternating(5),
    "Z2wrZ2": lambda: Wreath(Cyclic(2), Cyclic(2)),
    "Z3wrZ2": lambda: Wreath(Cyclic(3), Cyclic(2)),
    "Z2wrZ2wrZ2": lambda: Wreath(Wreath(Cyclic(2), Cyclic(2)), Cyclic(2)),
    "Z": _cyc(0),
    "Z^2": lambda: FreeAbelian(2),
    "KleinBottleExt": _z_ext_klein_bottle,
    "Z2rot4": _z2_rot4,
}


def get(name: str) -> Group:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown catalog group {name!r}; known: {', '.join(CATALOG)}") from None


def finite_names() -> list[str]:
    return [name for name in CATALOG if get(name).is_finite]

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from btb.bttree import ORIGIN, Mat2, Vertex, ball_window, distance, neighbors, vertex_from_ball
from btb.divalg import DivisionAlgebra
from btb.errors import PrecisionExhausted
from btb.orders import (
    GenSet,
    LatticeFrame,
    MaxOrder,
    contains,
    d_tower,
    d_tower_gens,
    intersect,
    intersect_all,
    membership,
    membership_all,
    order_lattice_of,
    order_lattice_of_gens,
    scalar_conjugate_order,
    scalar_generators,
)
from btb.oracle import INF

A = DivisionAlgebra.standard(2, 2, 16)
F2 = LatticeFrame.for_radius(A, 2)
F4 = LatticeFrame.for_radius(A, 4)
BALL2 = ball_window(A, ORIGIN, 2)
BALL3 = ball_window(A, ORIGIN, 3)
E12 = Mat2.elementary(A, 0, 1)


def lat(F, v):
    return order_lattice_of(F, MaxOrder(A, v))


def test_membership_examples():
    D0 = MaxOrder(A, ORIGIN)
    assert membership(D0, Mat2.identity(A)) is True
    assert membership(D0, Mat2(A.omega(), A.pi(), A.one(), A.scalar(7))) is True
    assert membership(D0, Mat2.scalar(A.pi(-1))) is False
    for d in range(1, 4):
        assert membership(MaxOrder(A, Vertex(d, ())), E12) is False
        assert membership(MaxOrder(A, Vertex(-d, ())), E12) is True
    for t in (1, 2, 3):
        h = Mat2(A.one(), A.zero(), A.pi(t), A.one())
        for v in ball_window(A, ORIGIN, t):
            assert membership(MaxOrder(A, v), h) is True
        outside = [v for v in ball_window(A, ORIGIN, t + 1) if distance(v, ORIGIN) == t + 1]
        assert any(membership(MaxOrder(A, v), h) is False for v in outside)


def test_membership_is_unknown_at_low_precision():
    m = Mat2(A.one(), A.make(0, 1, [(0, 0), (0, 0)]), A.zero(), A.one())
    assert membership(MaxOrder(A, Vertex(3, ())), m) is None
    assert membership_all(MaxOrder(A, Vertex(3, ())), [m, Mat2.scalar(A.pi(-1))]) is False


@given(st.sampled_from(BALL3), st.sampled_from(BALL3))
def test_membership_agrees_with_lattices(u, v):
    Lu = lat(F4, u)
    gens = lat(F4, v).basis_matrices()
    assert contains(Lu, lat(F4, v)) == (u == v)
    assert (membership_all(MaxOrder(A, u), gens) is True) == (u == v)


def test_standard_lattice():
    L = F2.standard()
    assert L.is_full and L.index_log() == F2.dim * F2.Q - F2.dim * (F2.Q - F2.s)
    assert L == lat(F2, ORIGIN)
    assert contains(L, L) and intersect(L, L) == L


def test_lattice_json_is_stable():
    assert lat(F2, Vertex(1, ())).to_json() == lat(F2, Vertex(1, ())).to_json()


def test_frame_guards_far_vertices():
    F = LatticeFrame.for_radius(A, 2)
    with pytest.raises(PrecisionExhausted):
        lat(F, Vertex(F.max_distance + 1, ()))


def test_generated_orders():
    nil = order_lattice_of_gens(F2, GenSet((E12,)))
    assert nil.zp_rank == 2 and not nil.is_full
    scal = order_lattice_of_gens(F2, GenSet(tuple(scalar_generators(A))))
    assert scal.zp_rank == 4
    more = GenSet(tuple(scalar_generators(A)) + (Mat2.scalar(A.omega() * A.pi()),))
    assert order_lattice_of_gens(F2, more) == scal
    std = [Mat2.elementary(A, i, j, b) for i in range(2) for j in range(2) for b in A.basis()]
    assert order_lattice_of_gens(F2, GenSet(tuple(std))) == F2.standard()


@given(st.sampled_from(BALL2), st.sampled_from(BALL2), st.sampled_from(BALL2))
def test_meet_semilattice(u, v, w):
    Lu, Lv, Lw = (lat(F2, x) for x in (u, v, w))
    I = intersect(Lu, Lv)
    assert I == intersect(Lv, Lu)
    assert intersect(I, Lw) == intersect(Lu, intersect(Lv, Lw))
    assert contains(Lu, I) and contains(Lv, I)
    # the intersection is the largest lattice inside both
    assert contains(I, intersect(I, Lw))


def test_pair_intersection_has_the_distance_shape():
    # for the pair (origin, (d,0)) the intersection is [[O_B, pi^d O_B], [O_B, O_B]]
    for d in (1, 2):
        I = intersect(F2.standard(), lat(F2, Vertex(d, ())))
        shape = [Mat2.elementary(A, 0, 0, b) for b in A.basis()]
        shape += [Mat2.elementary(A, 1, 0, b) for b in A.basis()]
        shape += [Mat2.elementary(A, 1, 1, b) for b in A.basis()]
        shape += [Mat2.elementary(A, 0, 1, A.pi(d) * b) for b in A.basis()]
        assert I == F2.lattice(shape)


def test_d_tower_examples():
    D0 = MaxOrder(A, ORIGIN)
    assert d_tower(F2, D0, 0) == F2.standard()
    D1, D2 = d_tower(F2, D0, 1), d_tower(F2, D0, 2)
    # index of O_B*1 + pi M_2(O_B): |M_2(F_4)| / |F_4| = 2^6
    assert D1.index_log() - F2.standard().index_log() == 6
    # at t = 2 the center of O_B/pi^2 has two elements: 2^16 / 2
    assert D2.index_log() - F2.standard().index_log() == 15
    assert contains(F2.standard(), D1) and contains(D1, D2) and not contains(D2, D1)
    witness = [m for m in D1.basis_matrices() if not D2.howell.contains_vector(F2.coords(m))]
    assert witness


def test_neighbors_intersect_to_d1():
    H = intersect_all(lat(F2, v) for v in [ORIGIN] + neighbors(A, ORIGIN))
    assert H == d_tower(F2, MaxOrder(A, ORIGIN), 1)
    H5 = intersect_all(lat(F2, v) for v in neighbors(A, ORIGIN))
    assert H5 == H


def test_d2_lies_in_the_radius_two_ball():
    F = LatticeFrame(A, 1, 6)
    D2 = d_tower(F, MaxOrder(A, ORIGIN), 2)
    for v in BALL2:
        assert contains(lat(F, v), D2)
    gens = d_tower_gens(A, MaxOrder(A, ORIGIN), 2)
    assert all(membership_all(MaxOrder(A, v), gens) is True for v in BALL2)


def test_d_tower_transports():
    v = Vertex(1, ((0, (0, 1)),))
    gens = d_tower_gens(A, MaxOrder(A, v), 1)
    near = ball_window(A, v, 1)
    assert all(membership_all(MaxOrder(A, w), gens) is True for w in near)
    assert all(membership_all(MaxOrder(A, w), gens) is not True
               for w in ball_window(A, v, 2) if w not in near)


def test_scalar_conjugate_order():
    G = scalar_conjugate_order(A, INF, A.zero(), A.one())
    std = scalar_generators(A)
    assert len(G) == 2
    for g, h in zip(G, std):
        assert all((x - y).is_zero() for x, y in zip(g.entries(), h.entries()))
    w = A.omega()
    G = scalar_conjugate_order(A, A.pi(-1), w, A.one() + A.pi(2))
    line = [vertex_from_ball(A, r, w) for r in range(0, 3)]
    assert all(membership_all(MaxOrder(A, v), G) is True for v in line)


def exact_basis(L):
    """Basis rows read as exact matrices; valid for lattices inside M_2(O_B)."""
    n2 = A.n ** 2
    unshift = A.pi(-A.n * L.frame.s)
    out = []
    for row in L.howell.rows:
        ents = [A.from_coords([int(v) for v in row[k * n2:(k + 1) * n2]]) * unshift for k in range(4)]
        out.append(Mat2(*ents))
    return out


def test_intersections_are_orders():
    for v in BALL2[1:8]:
        I = intersect(F2.standard(), lat(F2, v))
        basis = exact_basis(I)
        assert I.howell.contains_vector(F2.coords(Mat2.identity(A)))
        for x, y in itertools.product(basis, repeat=2):
            assert I.howell.contains_vector(F2.coords(x * y))
        assert order_lattice_of_gens(F2, GenSet(tuple(basis))) == I

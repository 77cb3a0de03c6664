import numpy as np
import pytest

from ddrof import (RofProblem, bregman_distance, divergence, dual_energy,
                   dual_energy_gradient, extend, interface_length,
                   interface_penalty_constant, local_divergence,
                   local_divergence_adjoint, make_decomposition,
                   project_unit_disk, restrict, sq_norm, zeros_dual)


def random_feasible(rng, rows, cols, scale=2.0):
    return project_unit_disk(scale * rng.normal(size=(rows, cols, 2)))


# ---------------------------------------------------------------- partitions

def test_window_512_8x8():
    dec = make_decomposition(512, 512, 8, 8, "window")
    assert dec.n_subdomains == 64
    assert dec.n_colors == 3
    assert all(v.height == 64 and v.width == 64 for v in dec.views)


def test_single_subdomain_has_one_color():
    dec = make_decomposition(24, 36, 1, 1, "window")
    assert dec.n_subdomains == 1
    assert dec.n_colors == 1


def test_six_horizontal_stripes_alternate_two_colors():
    dec = make_decomposition(12, 10, 6, 1, "stripe")
    assert dec.n_colors == 2
    assert [v.color for v in dec.views] == [0, 1, 0, 1, 0, 1]


def test_window_coloring_matches_mod3_rule():
    dec = make_decomposition(15, 20, 3, 4, "window")
    for v in dec.views:
        i, j = v.index // 4, v.index % 4
        assert v.color == (i - j) % 3


def test_tiles_cover_grid_disjointly():
    dec = make_decomposition(18, 24, 3, 4, "window")
    cover = np.zeros((18, 24), dtype=int)
    for v in dec.views:
        cover[v.owner_slices] += 1
    assert np.array_equal(cover, np.ones((18, 24), dtype=int))


def test_invalid_decompositions_rejected():
    with pytest.raises(ValueError):
        make_decomposition(10, 10, 3, 2, "window")  # 3 does not divide 10
    with pytest.raises(ValueError):
        make_decomposition(10, 10, 2, 2, "stripe")
    with pytest.raises(ValueError):
        make_decomposition(10, 10, 2, 2, "hex")
    with pytest.raises(ValueError):
        make_decomposition(0, 10, 1, 1, "window")


def test_extended_region_size_bound():
    dec = make_decomposition(20, 30, 4, 5, "window")
    for v in dec.views:
        extra = np.count_nonzero(v.extended_mask()) - v.height * v.width
        assert extra <= v.height + v.width + 1
        assert not v.extended_mask()[~v.read_stencil_mask()].any()


# ------------------------------------------------------- restriction maps

def test_partition_of_unity_bit_exact():
    rng = np.random.default_rng(0)
    dec = make_decomposition(16, 12, 4, 3, "window")
    p = rng.normal(size=(16, 12, 2))
    total = zeros_dual(16, 12)
    for k in range(dec.n_colors):
        total += extend(restrict(p, dec, k), dec, k)
    assert np.array_equal(total, p)


def test_extend_then_restrict_roundtrip():
    rng = np.random.default_rng(1)
    dec = make_decomposition(16, 12, 2, 2, "window")
    blocks = [rng.normal(size=(v.height, v.width, 2)) for v in dec.color_groups[1]]
    back = restrict(extend(blocks, dec, 1), dec, 1)
    for a, b in zip(blocks, back):
        assert np.array_equal(a, b)


def test_restriction_preserves_feasibility():
    rng = np.random.default_rng(2)
    dec = make_decomposition(12, 12, 3, 3, "window")
    p = random_feasible(rng, 12, 12)
    for block in restrict(p, dec, 0):
        assert np.all(np.hypot(block[..., 0], block[..., 1]) <= 1.0 + 1e-12)


# ------------------------------------------------------- local divergence

@pytest.mark.parametrize("rows,cols,mr,mc,shape", [
    (12, 15, 3, 5, "window"),
    (8, 8, 4, 1, "stripe"),
    (6, 6, 1, 1, "window"),
    (10, 14, 5, 7, "window"),
])
def test_local_divergence_matches_zero_extension(rows, cols, mr, mc, shape):
    rng = np.random.default_rng(3)
    dec = make_decomposition(rows, cols, mr, mc, shape)
    p = rng.normal(size=(rows, cols, 2))
    for v in dec.views:
        ps = p[v.owner_slices].copy()
        padded = np.zeros_like(p)
        padded[v.owner_slices] = ps
        full = divergence(padded)
        assert np.array_equal(local_divergence(ps, v), full[v.ext_slices])
        # support containment: nothing outside the extended region
        outside = full.copy()
        outside[v.ext_slices] = 0.0
        assert np.array_equal(outside, np.zeros_like(outside))
        # the diagonal corner cell of the rectangle stays zero too
        if v.has_corner:
            assert full[v.row1, v.col1] == 0.0


def test_local_divergence_zero_input():
    dec = make_decomposition(9, 9, 3, 3, "window")
    v = dec.views[4]
    assert np.array_equal(local_divergence(np.zeros((3, 3, 2)), v), np.zeros((4, 4)))


def test_local_divergence_adjoint_pairing():
    rng = np.random.default_rng(4)
    dec = make_decomposition(12, 10, 4, 2, "window")
    for v in dec.views:
        ps = rng.normal(size=(v.height, v.width, 2))
        w = rng.normal(size=(v.ext_height, v.ext_width))
        lhs = float(np.sum(local_divergence(ps, v) * w))
        rhs = float(np.sum(ps * local_divergence_adjoint(w, v)))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# ------------------------------------------------------- coloring stencil

@pytest.mark.parametrize("rows,cols,mr,mc,shape", [
    (24, 24, 4, 4, "window"),
    (24, 24, 6, 1, "stripe"),
    (24, 24, 1, 6, "stripe"),
    (20, 25, 4, 5, "window"),
])
def test_same_color_subdomains_independent(rows, cols, mr, mc, shape):
    dec = make_decomposition(rows, cols, mr, mc, shape)
    for group in dec.color_groups:
        for a in group:
            stencil = a.read_stencil_mask()
            for b in group:
                if a.index != b.index:
                    assert not (stencil & b.owner_mask()).any()


# ------------------------------------------------------- derived constants

def test_penalty_constant_fixtures():
    assert interface_penalty_constant(make_decomposition(512, 512, 8, 8)) == 56640.0
    assert interface_penalty_constant(
        make_decomposition(512, 512, 4, 1, "stripe")) == 4 * (7 * 512 - 5)
    dec = make_decomposition(40, 30, 1, 1, "window")
    assert interface_penalty_constant(dec) == 7 * (40 + 30) - 11


def test_interface_length_fixtures():
    assert interface_length(make_decomposition(512, 512, 8, 8)) == 7168
    assert interface_length(make_decomposition(16, 16, 1, 1)) == 0
    assert interface_length(make_decomposition(2048, 3072, 16, 16)) == 76800


# ------------------------------------------------------- Bregman distance

def test_bregman_distance_zero_for_equal_fields():
    rng = np.random.default_rng(5)
    dec = make_decomposition(12, 12, 3, 3, "window")
    p = rng.normal(size=(12, 12, 2))
    assert bregman_distance(p, p, dec) == 0.0


def test_bregman_distance_single_subdomain_collapses():
    rng = np.random.default_rng(6)
    dec = make_decomposition(10, 10, 1, 1, "window")
    p = rng.normal(size=(10, 10, 2))
    q = rng.normal(size=(10, 10, 2))
    expected = 0.5 * sq_norm(divergence(p - q))
    assert bregman_distance(p, q, dec) == pytest.approx(expected, rel=1e-13)


def test_bregman_distance_definition_oracle():
    # reference evaluation straight from the definition: per color, the
    # squared divergence norm of the zero-extended difference
    rng = np.random.default_rng(7)
    dec = make_decomposition(12, 16, 3, 4, "window")
    p = rng.normal(size=(12, 16, 2))
    q = rng.normal(size=(12, 16, 2))
    expected = 0.0
    for k in range(dec.n_colors):
        diff_k = extend(restrict(p, dec, k), dec, k) - extend(restrict(q, dec, k), dec, k)
        expected += 0.5 * sq_norm(divergence(diff_k))
    assert bregman_distance(p, q, dec) == pytest.approx(expected, rel=1e-13)


def _divergence_split_excess(p, dec):
    total = 0.0
    for v in dec.views:
        total += sq_norm(local_divergence(p[v.owner_slices].copy(), v))
    return total - sq_norm(divergence(p))


@pytest.mark.parametrize("mr,mc,shape", [(4, 4, "window"), (4, 1, "stripe")])
def test_divergence_split_lemma_sampled(mr, mc, shape):
    rng = np.random.default_rng(8)
    dec = make_decomposition(32, 32, mr, mc, shape)
    c1 = interface_penalty_constant(dec)
    for _ in range(100):
        p = random_feasible(rng, 32, 32)
        inf_norm = float(np.max(np.hypot(p[..., 0], p[..., 1])))
        assert _divergence_split_excess(p, dec) <= c1 * inf_norm ** 2 + 1e-9


def test_bregman_bound_via_penalty_constant():
    rng = np.random.default_rng(9)
    dec = make_decomposition(32, 32, 4, 4, "window")
    c1 = interface_penalty_constant(dec)
    for _ in range(50):
        p = random_feasible(rng, 32, 32)
        q = random_feasible(rng, 32, 32)
        lhs = 2.0 * bregman_distance(p, q, dec)
        rhs = sq_norm(divergence(p - q)) + c1 * float(
            np.max(np.hypot((p - q)[..., 0], (p - q)[..., 1]))) ** 2
        assert lhs <= rhs + 1e-9


def test_descent_lemma_sampled():
    rng = np.random.default_rng(10)
    f = rng.random((24, 24))
    prob = RofProblem(f, 10.0)
    dec = make_decomposition(24, 24, 4, 4, "window")
    for _ in range(100):
        p = random_feasible(rng, 24, 24)
        q = random_feasible(rng, 24, 24)
        lhs = dual_energy(p, prob)
        rhs = (dual_energy(q, prob)
               + float(np.sum(dual_energy_gradient(q, prob) * (p - q)))
               + dec.n_colors * bregman_distance(p, q, dec))
        assert lhs <= rhs + 1e-8 * max(1.0, abs(rhs))

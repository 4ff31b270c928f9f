from math import comb

import pytest

from specball.adjointfields import make_theta, make_xi
from specball.kernelgrowth import (
    GradingError,
    GrowthRecord,
    LinearDerivation,
    WeightSystem,
    adjoin_bound_check,
    chain_kernel_dims,
    conjecture_probe,
    diagonal_kernel_series_formula,
    finite_difference_degree,
    growth_table,
    jet_inequality,
    jordan_blocks_theta12,
    kernel_dim,
    restrict,
    strided_degree,
    weight_kernel_dim,
    weight_kernel_table,
    xi1_weight_system,
)
from specball.polyring import Polynomial


def test_restrict_theta12_n2_m1_nilpotent():
    op = restrict(make_theta(2, 1, 2), 1)
    assert op.size == 4
    sq = op.matrix @ op.matrix
    cube = sq @ op.matrix
    assert sq.entries and not cube.entries       # nilpotent of index 3


def test_restrict_xi_is_diagonal():
    for n in (2, 3):
        op = restrict(make_xi(n, 1), 1)
        assert all(i == j for (i, j) in op.matrix.entries)


def test_restrict_rejects_nonlinear_field():
    from specball.adjointfields import scale_field
    v = scale_field(Polynomial.x(1, 1, 2), make_theta(2, 1, 2))
    with pytest.raises(GradingError):
        restrict(v, 2)


def test_restrict_zero_field():
    from specball.adjointfields import VectorField
    op = restrict(VectorField.zero(2), 2)
    assert op.matrix.entries == {}
    assert kernel_dim(op, 1) == op.size


def test_kernel_dim_examples():
    assert kernel_dim(restrict(make_xi(2, 1), 1), 1) == 2     # x11, x22
    assert kernel_dim(restrict(make_xi(2, 1), 2), 1) == 4     # x11^2, x11 x22, x22^2, x12 x21
    with pytest.raises(ValueError):
        kernel_dim(restrict(make_xi(2, 1), 1), 3)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_xi1_weight_multiplicities(n):
    ws = xi1_weight_system(n)
    hist = {}
    for w in ws.weights:
        hist[w] = hist.get(w, 0) + 1
    assert hist.get(2, 0) == 1 and hist.get(-2, 0) == 1
    assert hist.get(1, 0) == 2 * (n - 2) and hist.get(-1, 0) == 2 * (n - 2)
    assert hist.get(0, 0) == (n - 2) ** 2 + 2


def test_weight_dp_examples():
    assert weight_kernel_dim(xi1_weight_system(2), 2) == 4
    assert weight_kernel_dim(xi1_weight_system(3), 1) == 3
    assert weight_kernel_dim(WeightSystem([5, -7]), 0) == 1


@pytest.mark.parametrize("n", [2, 3])
def test_weight_dp_equals_bruteforce_all_xi(n):
    for a in range(1, n):
        xi = make_xi(n, a)
        ws = WeightSystem.from_vector_field(xi)
        for m in range(5):
            assert weight_kernel_dim(ws, m) == kernel_dim(restrict(xi, m), 1)


def test_weight_table_consistent_with_single_calls():
    ws = xi1_weight_system(3)
    table = weight_kernel_table(ws, 6)
    assert table == [weight_kernel_dim(ws, m) for m in range(7)]


@pytest.mark.parametrize("n", [2, 3])
def test_closed_form_matches_dp_and_printed_variant_does_not(n):
    ws = xi1_weight_system(n)
    for m in range(5):
        assert diagonal_kernel_series_formula(n, m) == weight_kernel_dim(ws, m)
    # the variant with multiplicity 4n-4 and a repeated k index overcounts
    assert diagonal_kernel_series_formula(n, 2, printed=True) != weight_kernel_dim(ws, 2)


def test_chain_kernel_dims():
    records = chain_kernel_dims(12)
    dims = [r.dim_ker for r in records]
    # representation-theory oracle: the m-th symmetric power of a single
    # 3-dimensional Jordan block splits into floor(m/2)+1 blocks
    assert dims == [m // 2 + 1 for m in range(1, 13)]
    assert all(r.dim_ker <= 3 * r.m for r in records)
    assert dims[0] == 1        # kernel at m=1 is spanned by the last variable


def test_chain_m2_by_hand():
    # frozen by hand: kernel at degree 2 is span{y^2, x^2 - 2wy}
    assert chain_kernel_dims(2)[1].dim_ker == 2


@pytest.mark.parametrize("n,expected", [
    (2, [3, 1]),
    (3, [3, 2, 2, 1, 1]),
    (4, [3, 2, 2, 2, 2, 1, 1, 1, 1, 1]),
])
def test_jordan_blocks(n, expected):
    blocks = jordan_blocks_theta12(n)
    assert blocks == expected
    assert sum(blocks) == n * n


def test_jordan_formula_general():
    for n in (2, 3, 4):
        expected = sorted([3] + [2] * (2 * n - 4) + [1] * ((n - 2) ** 2 + 1), reverse=True)
        assert jordan_blocks_theta12(n) == expected


def test_adjoin_bound_degenerate():
    # a single variable killed by Psi: d = (1, 0, 0, ...) gives bound m + 1
    for m in range(6):
        assert adjoin_bound_check([1] + [0] * m, m) == m + 1
    assert adjoin_bound_check([7], 0) == 7


def test_adjoin_bound_dominates_bruteforce():
    chain = LinearDerivation.chain(3)
    d = [kernel_dim(chain.restrict(m), 1) for m in range(4)]
    adjoined = chain.adjoin_nilpotent_pair()
    assert adjoined.nvars == 5
    for m in range(4):
        brute = kernel_dim(adjoined.restrict(m), 1)
        assert brute <= adjoin_bound_check(d, m)


def test_growth_record_invariant():
    with pytest.raises(AssertionError):
        GrowthRecord(m=1, slice_dim=4, dim_ker=3, dim_ker_sq=2)


def test_growth_table_xi1_n2():
    records, summary = growth_table(make_xi(2, 1), 8)
    ws = xi1_weight_system(2)
    assert [r.dim_ker for r in records] == [weight_kernel_dim(ws, m) for m in range(9)]
    assert all(r.dim_ker_sq == r.dim_ker for r in records)   # diagonal action
    assert summary.empirical_degree == 2 and summary.period == 2
    assert summary.within_bound


def test_growth_table_theta12_sq_n2():
    records, summary = growth_table(make_theta(2, 1, 2), 8)
    # closed form derived from the sl2 decomposition: C(m+2, 2)
    assert [r.dim_ker_sq for r in records] == [comb(m + 2, 2) for m in range(9)]
    assert all(r.dim_ker_sq <= 2 * r.dim_ker for r in records)
    assert all(r.dim_ker_sq <= r.slice_dim for r in records)
    assert summary.within_bound


def test_finite_differences():
    assert finite_difference_degree([5, 5, 5, 5]) == 0
    assert finite_difference_degree([comb(m + 4, 4) for m in range(10)]) == 4
    assert finite_difference_degree([1, 2, 4, 8, 16, 32]) is None
    assert finite_difference_degree([1]) is None
    assert strided_degree([1, 0, 1, 0, 1, 0, 1, 0, 1]) == (0, 2)


def test_jet_inequality_n2_k5():
    rep = jet_inequality(2, 5, 10)
    assert rep.rows[0].lhs == 1                      # binom(4,4)
    assert [r.lhs for r in rep.rows] == [comb(m + 4, 4) for m in range(11)]
    # rhs oracle: 5 * C(m+2,2), the square-kernel closed form above
    assert [r.rhs for r in rep.rows] == [5 * comb(m + 2, 2) for m in range(11)]
    assert rep.crossover_m == 5
    assert all(r.holds for r in rep.rows if r.m >= 5)
    assert not rep.rows[4].holds


def test_jet_lhs_is_degree_n2_polynomial():
    rep = jet_inequality(2, 1, 12)
    assert finite_difference_degree([r.lhs for r in rep.rows]) == 4


def test_jet_inequality_cumulative_variant():
    # summing kernels over degrees <= m pushes the crossover out of the window
    rep = jet_inequality(2, 5, 10, cumulative=True)
    assert [r.rhs for r in rep.rows] == [5 * comb(m + 3, 3) for m in range(11)]
    assert rep.crossover_m is None


def test_conjecture_probe_chain():
    rep = conjecture_probe(LinearDerivation.chain(3), 12)
    assert rep.bound_degree == 1
    assert rep.empirical_degree == 1 and rep.period == 2
    assert rep.consistent


def test_conjecture_probe_balanced_pair():
    rep = conjecture_probe(LinearDerivation.diagonal([1, -1]), 12)
    assert rep.dims == [1 if m % 2 == 0 else 0 for m in range(13)]
    assert rep.empirical_degree == 0 and rep.period == 2


def test_conjecture_probe_xi1_n3():
    rep = conjecture_probe(LinearDerivation.diagonal(xi1_weight_system(3).weights), 72)
    assert rep.bound_degree == 7
    assert rep.empirical_degree == 7 and rep.period == 6
    assert rep.consistent


def test_linear_derivation_from_field_roundtrip():
    der = LinearDerivation.from_vector_field(make_theta(3, 1, 2))
    op = der.restrict(1)
    direct = restrict(make_theta(3, 1, 2), 1)
    assert op.matrix.entries == direct.matrix.entries


def test_modular_kernel_method_agrees_with_exact():
    from specball.kernelgrowth import kernel_dim_with_method
    for n, m in [(2, 4), (3, 3)]:
        for power in (1, 2):
            op = restrict(make_theta(n, 1, 2), m)
            exact, how_e = kernel_dim_with_method(op, power, "exact")
            modular, how_m = kernel_dim_with_method(op, power, "modular")
            assert exact == modular
            assert how_e == "exact" and how_m == "modular"
    # auto stays exact below the size threshold
    op = restrict(make_xi(2, 1), 3)
    dim, how = kernel_dim_with_method(op, 1, "auto")
    assert how == "exact" and dim == 6

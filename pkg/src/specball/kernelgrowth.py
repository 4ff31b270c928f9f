"""Kernel dimensions of degree-preserving derivations on homogeneous slices.

A degree-preserving derivation is determined by a linear action on the
variables, so it is stored as an exact matrix A with D(x_j) = sum_i A[i,j] x_i.
Restriction to the degree-m slice is the induced Leibniz action on monomials.
Kernel dimensions come from exact sparse elimination; for diagonal actions a
weight-counting dynamic program provides an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .adjointfields import VectorField, make_theta, make_xi
from .linalg import CERT_PRIMES, ModularRowSpace, SparseMatrix, clear_denominators
from .polyring import HomSliceBasis, Monomial


class GradingError(ValueError):
    pass


class LinearDerivation:
    """Degree-preserving derivation on nvars variables."""

    def __init__(self, nvars: int, entries: dict[tuple[int, int], Fraction]):
        self.nvars = nvars
        self.entries = {k: Fraction(v) for k, v in entries.items() if v != 0}

    @staticmethod
    def from_vector_field(v: VectorField) -> "LinearDerivation":
        nvars = v.n * v.n
        entries: dict[tuple[int, int], Fraction] = {}
        for var, poly in v.components.items():
            if not poly.is_homogeneous(1):
                raise GradingError("vector field is not degree-preserving "
                                   "(components must be linear)")
            for mono, c in poly.terms.items():
                (target, _e), = mono.powers
                entries[(target, var)] = entries.get((target, var), 0) + c
        return LinearDerivation(nvars, entries)

    @staticmethod
    def chain(length: int = 3) -> "LinearDerivation":
        """x_1 d/dx_0 + x_2 d/dx_1 + ... on `length` variables."""
        return LinearDerivation(length, {(j + 1, j): Fraction(1) for j in range(length - 1)})

    @staticmethod
    def diagonal(weights: list[int]) -> "LinearDerivation":
        return LinearDerivation(len(weights),
                                {(i, i): Fraction(w) for i, w in enumerate(weights)})

    def is_diagonal(self) -> bool:
        return all(i == j for (i, j) in self.entries)

    def weights(self) -> dict[int, Fraction]:
        if not self.is_diagonal():
            raise GradingError("derivation is not diagonal")
        return {j: self.entries.get((j, j), Fraction(0)) for j in range(self.nvars)}

    def adjoin_nilpotent_pair(self) -> "LinearDerivation":
        """The derivation y d/dx + self on two fresh variables plus the old ones."""
        entries = {(1, 0): Fraction(1)}
        for (i, j), c in self.entries.items():
            entries[(i + 2, j + 2)] = c
        return LinearDerivation(self.nvars + 2, entries)

    def restrict(self, m: int, basis: HomSliceBasis | None = None) -> "HomSliceOperator":
        """Matrix of the induced action on the degree-m slice."""
        if basis is None:
            basis = HomSliceBasis(self.nvars, m)
        by_col: dict[int, list[tuple[int, Fraction]]] = {}
        for (i, j), c in self.entries.items():
            by_col.setdefault(j, []).append((i, c))
        entries: dict[tuple[int, int], Fraction] = {}
        for col, mono in enumerate(basis.monomials):
            for j, e in mono.powers:
                images = by_col.get(j)
                if not images:
                    continue
                for i, c in images:
                    shifted = dict(mono.powers)
                    shifted[j] = shifted[j] - 1
                    shifted[i] = shifted.get(i, 0) + 1
                    row = basis.index[Monomial(shifted.items())]
                    key = (row, col)
                    s = entries.get(key, 0) + e * c
                    if s:
                        entries[key] = s
                    else:
                        entries.pop(key, None)
        return HomSliceOperator(self.nvars, m, basis, SparseMatrix(len(basis), len(basis), entries))


@dataclass
class HomSliceOperator:
    """A derivation restricted to the homogeneous slice of degree m."""
    nvars: int
    m: int
    basis: HomSliceBasis
    matrix: SparseMatrix

    @property
    def size(self) -> int:
        return len(self.basis)


def restrict(v: VectorField, m: int) -> HomSliceOperator:
    return LinearDerivation.from_vector_field(v).restrict(m)


MODULAR_SIZE_THRESHOLD = 2500


def kernel_dim(op: HomSliceOperator, power: int = 1, method: str = "exact") -> int:
    """Nullity of the slice matrix or of its square.

    method "exact" (default) eliminates over the rationals.  "modular"
    requires rank agreement across the fixed certification primes and falls
    back to exact elimination on disagreement; "auto" switches to modular
    above MODULAR_SIZE_THRESHOLD columns.
    """
    dim, _ = kernel_dim_with_method(op, power, method)
    return dim


def kernel_dim_with_method(op: HomSliceOperator, power: int = 1,
                           method: str = "exact") -> tuple[int, str]:
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if method not in ("exact", "modular", "auto"):
        raise ValueError(f"unknown method {method!r}")
    mat = op.matrix if power == 1 else op.matrix @ op.matrix
    if method == "auto":
        method = "modular" if op.size > MODULAR_SIZE_THRESHOLD else "exact"
    if method == "modular":
        ranks = set()
        for p in CERT_PRIMES:
            space = ModularRowSpace(p)
            for row in mat.rows_sparse():
                space.insert(clear_denominators(row))
            ranks.add(space.rank)
        if len(ranks) == 1:
            return mat.ncols - ranks.pop(), "modular"
        # prime disagreement: escalate to the exact nullity
    return mat.nullity(), "exact"


# ---------------------------------------------------------------------------
# weight systems


@dataclass
class WeightSystem:
    """Integer eigenvalue of each variable under a diagonal derivation."""
    weights: list[int]

    @staticmethod
    def from_vector_field(v: VectorField) -> "WeightSystem":
        der = LinearDerivation.from_vector_field(v)
        w = der.weights()
        out = []
        for j in range(der.nvars):
            wj = w[j]
            if wj.denominator != 1:
                raise GradingError("non-integer weight")
            out.append(int(wj))
        return WeightSystem(out)


def weight_kernel_table(ws: WeightSystem, m_max: int) -> list[int]:
    """Weight-zero monomial counts for every degree 0..m_max in one pass.

    Dynamic program over (variables, degree, weight); must agree with the
    nullity of the corresponding diagonal slice operator degree by degree.
    """
    if m_max < 0:
        raise ValueError("degree must be non-negative")
    counts: dict[tuple[int, int], int] = {(0, 0): 1}
    for w in ws.weights:
        new: dict[tuple[int, int], int] = {}
        for (d, wt), c in counts.items():
            e = 0
            while d + e <= m_max:
                key = (d + e, wt + e * w)
                new[key] = new.get(key, 0) + c
                e += 1
        counts = new
    return [sum(c for (d, wt), c in counts.items() if d == m and wt == 0)
            for m in range(m_max + 1)]


def weight_kernel_dim(ws: WeightSystem, m: int) -> int:
    """Number of degree-m monomials of total weight zero."""
    return weight_kernel_table(ws, m)[m]


def xi1_weight_system(n: int) -> WeightSystem:
    return WeightSystem.from_vector_field(make_xi(n, 1))


def diagonal_kernel_series_formula(n: int, m: int, printed: bool = False) -> int:
    """Closed-form count of weight-zero degree-m monomials for the first
    hyperbolic field: choose p and q factors of weight +-2, k and l factors
    of weight +-1 (multiplicity 2(n-2) each), fill with zero-weight factors
    (multiplicity (n-2)^2 + 2), subject to 2(p-q) + (k-l) = 0.

    printed=True evaluates the often-quoted variant that uses multiplicity
    4n-4 for the +-1 factors and repeats k in the second binomial; it is kept
    only for the comparison report.
    """
    mult1 = (4 * n - 4) if printed else 2 * (n - 2)
    mult0 = (n - 2) ** 2 + 2
    total = 0
    for p in range(m + 1):
        for q in range(m + 1):
            if p + q > m:
                continue
            for k in range(m + 1):
                l = 2 * (p - q) + k
                if l < 0:
                    continue
                s = p + q + k + l
                if s > m:
                    continue
                c1 = comb(mult1 + k - 1, k) if mult1 + k - 1 >= 0 else (1 if k == 0 else 0)
                second_index = k if printed else l
                c2 = comb(mult1 + second_index - 1, second_index) \
                    if mult1 + second_index - 1 >= 0 else (1 if second_index == 0 else 0)
                c0 = comb(mult0 + (m - s) - 1, m - s)
                total += c1 * c2 * c0
    return total


# ---------------------------------------------------------------------------
# growth records and tables


@dataclass
class GrowthRecord:
    m: int
    slice_dim: int
    dim_ker: int
    dim_ker_sq: int
    method: str = "exact"

    def __post_init__(self):
        assert 0 <= self.dim_ker <= self.dim_ker_sq <= self.slice_dim


def finite_difference_degree(values: list[int], max_order: int | None = None) -> int | None:
    """Least k with vanishing (k+1)-th finite differences on the window.

    Returns None when no such k is detectable (window too small, or the
    sequence is not polynomial on the window).
    """
    if len(values) < 2:
        return None
    seq = list(values)
    limit = len(values) - 2 if max_order is None else min(max_order, len(values) - 2)
    for k in range(limit + 1):
        diff = [seq[i + 1] - seq[i] for i in range(len(seq) - 1)]
        if all(x == 0 for x in diff):
            return k
        seq = diff
    return None


def chain_kernel_dims(m_max: int) -> list[GrowthRecord]:
    """Exact kernel dimensions of the length-3 chain derivation per degree."""
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    der = LinearDerivation.chain(3)
    out = []
    for m in range(1, m_max + 1):
        op = der.restrict(m)
        out.append(GrowthRecord(m=m, slice_dim=op.size,
                                dim_ker=kernel_dim(op, 1),
                                dim_ker_sq=kernel_dim(op, 2)))
    return out


def jordan_blocks_theta12(n: int) -> list[int]:
    """Nilpotent block sizes of Theta_12 on the linear slice, from ranks of
    matrix powers; returned as a descending multiset."""
    if n < 2:
        raise ValueError("n must be at least 2")
    op = restrict(make_theta(n, 1, 2), 1)
    dim = op.size
    ranks = [dim]
    mat = op.matrix
    power = mat
    while True:
        r = power.rank()
        ranks.append(r)
        if r == 0:
            break
        power = power @ mat
    # blocks of size >= k: ranks[k-1] - ranks[k]
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    at_least.append(0)
    blocks = []
    for k in range(1, len(at_least)):
        count = at_least[k - 1] - at_least[k]
        blocks.extend([k] * count)
    return sorted(blocks, reverse=True)


def adjoin_bound_check(psi_dims: list[int], m: int) -> int:
    """Upper bound sum_{k=0}^m (1+k) * d_{m-k} for the kernel of the
    derivation y d/dx + Psi on two extra variables."""
    if len(psi_dims) < m + 1:
        raise ValueError("need kernel dimensions for degrees 0..m")
    return sum((1 + k) * psi_dims[m - k] for k in range(m + 1))


def strided_degree(values: list[int], max_stride: int = 6) -> tuple[int | None, int]:
    """Empirical polynomial degree allowing a quasi-polynomial period.

    Tries strides 1..max_stride; returns (degree, stride) for the smallest
    stride whose residue subsequences all show the same finite-difference
    degree, or (None, 0) when nothing is detectable on the window.
    """
    for stride in range(1, max_stride + 1):
        degs = [finite_difference_degree(values[r::stride]) for r in range(stride)]
        if all(d is not None for d in degs):
            return max(degs), stride
    return None, 0


@dataclass
class GrowthSummary:
    empirical_degree: int | None     # of dim_ker_sq, allowing a quasi-period
    period: int                      # detected quasi-period (0 if undetermined)
    bound_degree: int                # n^2 - 1
    within_bound: bool | None


def growth_table(v: VectorField, m_max: int,
                 method: str = "exact") -> tuple[list[GrowthRecord], GrowthSummary]:
    """Kernel dimensions for m = 0..m_max plus an empirical polynomial-degree
    estimate of the square-kernel sequence via exact finite differences."""
    der = LinearDerivation.from_vector_field(v)
    records = []
    for m in range(m_max + 1):
        op = der.restrict(m)
        k1, how1 = kernel_dim_with_method(op, 1, method)
        k2, how2 = kernel_dim_with_method(op, 2, method)
        records.append(GrowthRecord(m=m, slice_dim=op.size, dim_ker=k1,
                                    dim_ker_sq=k2,
                                    method=how1 if how1 == how2 else "mixed"))
    deg, period = strided_degree([r.dim_ker_sq for r in records])
    bound = v.n * v.n - 1
    return records, GrowthSummary(
        empirical_degree=deg, period=period, bound_degree=bound,
        within_bound=(deg <= bound) if deg is not None else None)


# ---------------------------------------------------------------------------
# jet-dimension inequality


@dataclass
class JetRow:
    m: int
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs


@dataclass
class JetReport:
    n: int
    k: int
    cumulative: bool
    rows: list[JetRow]
    crossover_m: int | None   # smallest m with the inequality holding onward


def jet_inequality(n: int, k: int, m_max: int, cumulative: bool = False) -> JetReport:
    """Table of binom(m + n^2, n^2) against k * max of the two square-kernel
    dimensions.  cumulative=True sums the homogeneous kernels over degrees
    <= m (the all-degrees-at-most-m reading); the default compares the
    degree-m slices."""
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    theta_der = LinearDerivation.from_vector_field(make_theta(n, 1, 2))
    xi_der = LinearDerivation.from_vector_field(make_xi(n, 1))
    theta_sq = []
    xi_sq = []
    for m in range(m_max + 1):
        theta_sq.append(kernel_dim(theta_der.restrict(m), 2))
        xi_sq.append(kernel_dim(xi_der.restrict(m), 2))
    if cumulative:
        theta_sq = _partial_sums(theta_sq)
        xi_sq = _partial_sums(xi_sq)
    rows = []
    for m in range(m_max + 1):
        lhs = comb(m + n * n, n * n)
        rhs = k * max(theta_sq[m], xi_sq[m])
        rows.append(JetRow(m=m, lhs=lhs, rhs=rhs))
    crossover = None
    for m in range(m_max, -1, -1):
        if rows[m].holds:
            crossover = m
        else:
            break
    if crossover is not None and not rows[crossover].holds:
        crossover = None
    return JetReport(n=n, k=k, cumulative=cumulative, rows=rows, crossover_m=crossover)


def _partial_sums(xs: list[int]) -> list[int]:
    out = []
    s = 0
    for x in xs:
        s += x
        out.append(s)
    return out


# ---------------------------------------------------------------------------
# conjecture probe


@dataclass
class ProbeReport:
    nvars: int
    dims: list[int]                  # kernel dims for m = 0..m_max
    empirical_degree: int | None     # max over quasi-period residue classes
    period: int                      # detected quasi-period (0 if undetermined)
    bound_degree: int                # N - 2
    consistent: bool | None          # None when the degree is undetermined


def conjecture_probe(der: LinearDerivation, m_max: int, max_stride: int = 6) -> ProbeReport:
    """Kernel-dimension window for a degree-preserving derivation plus an
    empirical polynomial-degree estimate.  Reports consistency with the
    degree bound N-2 on the window only; never a proof.

    Diagonal derivations with integer weights use the weight-counting
    dynamic program, which reaches far larger degrees than the slice
    matrices; the growth sequences are often quasi-polynomial, so the
    degree search allows a small period.
    """
    if der.is_diagonal() and all(w.denominator == 1 for w in der.weights().values()):
        ws = WeightSystem([int(w) for w in der.weights().values()])
        dims = weight_kernel_table(ws, m_max)
    else:
        dims = [kernel_dim(der.restrict(m), 1) for m in range(m_max + 1)]
    deg, period = strided_degree(dims, max_stride=max_stride)
    bound = der.nvars - 2
    consistent = (deg <= bound) if deg is not None else None
    return ProbeReport(nvars=der.nvars, dims=dims, empirical_degree=deg,
                       period=period, bound_degree=bound, consistent=consistent)

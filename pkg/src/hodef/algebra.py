"""Finite-dimensional unital associative algebras over Q.

Algebras are given by structure constants over a labeled basis:
e_i · e_j = sum_k c[i][j][k] e_k, plus a unit vector.  Associativity and
the unit law are validated eagerly (O(dim^3) products) so bad tables never
reach the homological layers.  Bimodules always carry both action tensors
explicitly.
"""

import itertools

from .linalg import (Matrix, Echelon, rank_kernel_image, vec_axpy_inplace,
                     vec_scale, vec_add)
from .rational import ZERO, ONE, rat


class AlgebraError(Exception):
    pass


class AssocAlgebra:
    """Unital associative algebra via a rank-3 structure tensor.

    mul[i][j] is the sparse product vector of e_i · e_j.
    """

    def __init__(self, labels, mul, unit, name=None, check=True,
                 generators=None):
        self.dim = len(labels)
        self.labels = list(labels)
        if len(set(self.labels)) != self.dim:
            raise AlgebraError("duplicate basis labels")
        self.mul = mul
        self.unit = dict(unit)
        self.name = name or "algebra"
        self._generators = generators
        if check:
            report = validate_algebra(self)
            if not report.ok:
                raise AlgebraError("invalid algebra %s: %s"
                                   % (self.name, report.summary()))

    # -- arithmetic on sparse coordinate vectors --------------------------

    def basis_product(self, i, j):
        return self.mul[i][j]

    def product(self, x, y):
        out = {}
        for i, a in x.items():
            row = self.mul[i]
            for j, b in y.items():
                vec_axpy_inplace(out, a * b, row[j])
        return out

    def multiplication_matrix(self):
        """m: A⊗A -> A as a dim x dim^2 matrix; pair (i, j) has index i*dim+j."""
        n = self.dim
        m = Matrix.zero(n, n * n)
        for i in range(n):
            for j in range(n):
                m.columns[i * n + j] = dict(self.mul[i][j])
        return m

    def left_mult_matrix(self, x):
        cols = [self.product(x, {j: ONE}) for j in range(self.dim)]
        return Matrix.from_columns(self.dim, cols)

    def right_mult_matrix(self, x):
        cols = [self.product({j: ONE}, x) for j in range(self.dim)]
        return Matrix.from_columns(self.dim, cols)

    def label_of(self, i):
        return self.labels[i]

    def generating_set(self):
        """Indices of a small algebra generating set (greedy closure)."""
        if self._generators is not None:
            return list(self._generators)
        span = Echelon()
        span.add(dict(self.unit))
        gens = []
        for i in range(self.dim):
            if span.contains({i: ONE}):
                continue
            gens.append(i)
            self._close_span(span, gens)
        self._generators = gens
        return list(gens)

    def _close_span(self, span, gens):
        frontier = [dict(p) for p in span.pivots.values()]
        while frontier:
            new = []
            for v in frontier:
                for g in gens:
                    for w in (self.product(v, {g: ONE}), self.product({g: ONE}, v)):
                        if not span.contains(w):
                            span.add(w)
                            new.append(w)
            frontier = new

    def structure_tensor_equal(self, other):
        if self.dim != other.dim:
            return False
        return all(self.mul[i][j] == other.mul[i][j]
                   for i in range(self.dim) for j in range(self.dim)) \
            and self.unit == other.unit

    def __repr__(self):
        return "AssocAlgebra(%s, dim=%d)" % (self.name, self.dim)


class ValidationReport:
    def __init__(self):
        self.associativity_failures = []   # (i, j, k) triples
        self.unit_failures = []            # basis indices

    @property
    def ok(self):
        return not self.associativity_failures and not self.unit_failures

    def summary(self):
        if self.ok:
            return "valid"
        parts = []
        if self.associativity_failures:
            parts.append("associativity fails at %d triple(s), first %s"
                         % (len(self.associativity_failures),
                            self.associativity_failures[0]))
        if self.unit_failures:
            parts.append("unit fails at basis %s" % self.unit_failures)
        return "; ".join(parts)


def validate_algebra(a):
    """Check all associativity triples and unit laws; never raises."""
    report = ValidationReport()
    n = a.dim
    for i in range(n):
        for j in range(n):
            left = a.mul[i][j]
            for k in range(n):
                lhs = {}
                for m, c in left.items():
                    vec_axpy_inplace(lhs, c, a.mul[m][k])
                rhs = {}
                for m, c in a.mul[j][k].items():
                    vec_axpy_inplace(rhs, c, a.mul[i][m])
                if lhs != rhs:
                    report.associativity_failures.append((i, j, k))
    for j in range(n):
        e = {j: ONE}
        if a.product(a.unit, e) != e or a.product(e, a.unit) != e:
            report.unit_failures.append(j)
    return report


def from_structure_constants(labels, entries, unit, name=None, generators=None):
    """entries: iterable of (i, j, k, coeff)."""
    n = len(labels)
    mul = [[{} for _ in range(n)] for _ in range(n)]
    for i, j, k, c in entries:
        if c:
            mul[i][j][k] = mul[i][j].get(k, ZERO) + c
            if not mul[i][j][k]:
                del mul[i][j][k]
    return AssocAlgebra(labels, mul, unit, name=name, generators=generators)


# ---------------------------------------------------------------------------
# constructions

def opposite(a):
    mul = [[dict(a.mul[j][i]) for j in range(a.dim)] for i in range(a.dim)]
    return AssocAlgebra(a.labels, mul, a.unit, name=a.name + "^op")


def tensor_algebra(a, b):
    """a ⊗ b with basis pairs, index (i, p) -> i*dim(b)+p, labels 'x⊗y'."""
    n, m = a.dim, b.dim
    labels = ["%s⊗%s" % (la, lb) for la in a.labels for lb in b.labels]
    mul = [[{} for _ in range(n * m)] for _ in range(n * m)]
    for i in range(n):
        for p in range(m):
            for j in range(n):
                for q in range(m):
                    out = {}
                    for k, c1 in a.mul[i][j].items():
                        for r, c2 in b.mul[p][q].items():
                            out[k * m + r] = c1 * c2
                    mul[i * m + p][j * m + q] = out
    unit = {}
    for i, c1 in a.unit.items():
        for p, c2 in b.unit.items():
            unit[i * m + p] = c1 * c2
    return AssocAlgebra(labels, mul, unit, name="%s⊗%s" % (a.name, b.name))


def enveloping(a):
    return tensor_algebra(a, opposite(a))


# ---------------------------------------------------------------------------
# bimodules

class Bimodule:
    """Space with commuting left/right algebra actions, both explicit.

    left[i] (right[i]) is the dim x dim matrix of the action of the i-th
    basis element of the acting algebra.
    """

    def __init__(self, left_algebra, right_algebra, dim, left, right,
                 name=None, labels=None, check=True):
        self.left_algebra = left_algebra
        self.right_algebra = right_algebra
        self.dim = dim
        self.left = left     # list over basis of left_algebra: Matrix dim x dim
        self.right = right   # list over basis of right_algebra
        self.name = name or "bimodule"
        self.labels = labels or ["m%d" % i for i in range(dim)]
        if check:
            self.validate()

    def act_left(self, x, v):
        out = {}
        for i, c in x.items():
            vec_axpy_inplace(out, c, self.left[i].apply(v))
        return out

    def act_right(self, v, y):
        out = {}
        for j, c in y.items():
            vec_axpy_inplace(out, c, self.right[j].apply(v))
        return out

    def validate(self):
        A, B = self.left_algebra, self.right_algebra
        ident = Matrix.identity(self.dim)
        lu = sum_action(self.left, A.unit, self.dim)
        ru = sum_action(self.right, B.unit, self.dim)
        if lu != ident or ru != ident:
            raise AlgebraError("%s: unit does not act as identity" % self.name)
        for i in range(A.dim):
            for j in range(A.dim):
                prod = sum_action(self.left, A.mul[i][j], self.dim)
                if self.left[i] @ self.left[j] != prod:
                    raise AlgebraError("%s: left action not associative at (%d,%d)"
                                       % (self.name, i, j))
        for i in range(B.dim):
            for j in range(B.dim):
                prod = sum_action(self.right, B.mul[i][j], self.dim)
                # right action: v·(xy) = (v·x)·y
                if self.right[j] @ self.right[i] != prod:
                    raise AlgebraError("%s: right action not associative at (%d,%d)"
                                       % (self.name, i, j))
        for i in range(A.dim):
            for j in range(B.dim):
                if self.left[i] @ self.right[j] != self.right[j] @ self.left[i]:
                    raise AlgebraError("%s: actions do not commute at (%d,%d)"
                                       % (self.name, i, j))


def sum_action(mats, coeffs, dim):
    out = Matrix.zero(dim, dim)
    for i, c in coeffs.items():
        for j in range(dim):
            vec_axpy_inplace(out.columns[j], c, mats[i].columns[j])
    return out


def regular_bimodule(a):
    """a as a bimodule over itself."""
    left = [a.left_mult_matrix({i: ONE}) for i in range(a.dim)]
    right = [a.right_mult_matrix({i: ONE}) for i in range(a.dim)]
    return Bimodule(a, a, a.dim, left, right, name=a.name, labels=a.labels)


def outer_bimodule(a):
    """a⊗a with x·(u⊗v)·y = xu ⊗ vy; index (i, j) -> i*dim+j."""
    n = a.dim
    d = n * n
    left = []
    right = []
    for g in range(n):
        lm = Matrix.zero(d, d)
        rm = Matrix.zero(d, d)
        for i in range(n):
            li = a.mul[g][i]
            ri = a.mul[i][g]
            for j in range(n):
                lm.columns[i * n + j] = {k * n + j: c for k, c in li.items()}
                rm.columns[j * n + i] = {j * n + k: c for k, c in ri.items()}
        left.append(lm)
        right.append(rm)
    labels = ["%s⊗%s" % (x, y) for x in a.labels for y in a.labels]
    return Bimodule(a, a, d, left, right, name="%s⊗%s" % (a.name, a.name),
                    labels=labels)


def trivial_coefficient_bimodule(a, extra_dim, extra_labels=None):
    """a ⊗ V with V a coefficient space the algebra does not touch:
    x·(v ⊗ w)·y = (xvy) ⊗ w.  Index (i, t) -> i*extra_dim + t."""
    n = a.dim
    d = n * extra_dim
    left = []
    right = []
    for g in range(n):
        lm = Matrix.zero(d, d)
        rm = Matrix.zero(d, d)
        for i in range(n):
            li = a.mul[g][i]
            ri = a.mul[i][g]
            for t in range(extra_dim):
                lm.columns[i * extra_dim + t] = {k * extra_dim + t: c
                                                 for k, c in li.items()}
                rm.columns[i * extra_dim + t] = {k * extra_dim + t: c
                                                 for k, c in ri.items()}
        left.append(lm)
        right.append(rm)
    if extra_labels is None:
        extra_labels = ["v%d" % t for t in range(extra_dim)]
    labels = ["%s⊗%s" % (x, w) for x in a.labels for w in extra_labels]
    return Bimodule(a, a, d, left, right,
                    name="%s⊗V%d" % (a.name, extra_dim), labels=labels)


class SubBimodule:
    """Sub-bimodule presented by an inclusion matrix (columns = basis)."""

    def __init__(self, parent, inclusion, name=None, check=True):
        self.parent = parent
        self.inclusion = inclusion
        self.dim = inclusion.cols
        self.name = name or "sub(%s)" % parent.name
        if check:
            self.validate()

    def validate(self):
        ech = Echelon()
        for j in range(self.inclusion.cols):
            if ech.add(self.inclusion.column(j)) is not None:
                raise AlgebraError("%s: dependent inclusion basis" % self.name)
        for g in range(self.parent.left_algebra.dim):
            for j in range(self.dim):
                v = self.parent.left[g].apply(self.inclusion.column(j))
                if not ech.contains(v):
                    raise AlgebraError("%s: not closed under left action" % self.name)
        for g in range(self.parent.right_algebra.dim):
            for j in range(self.dim):
                v = self.parent.right[g].apply(self.inclusion.column(j))
                if not ech.contains(v):
                    raise AlgebraError("%s: not closed under right action" % self.name)

    def as_bimodule(self):
        """Restrict the parent actions to subspace coordinates."""
        from .linalg import Solver
        solver = Solver(self.inclusion)
        left = []
        right = []
        for g in range(self.parent.left_algebra.dim):
            cols = []
            for j in range(self.dim):
                v = self.parent.left[g].apply(self.inclusion.column(j))
                x = solver.solve(v)
                if x is None:
                    raise AlgebraError("subspace not stable under left action")
                cols.append(x)
            left.append(Matrix.from_columns(self.dim, cols))
        for g in range(self.parent.right_algebra.dim):
            cols = []
            for j in range(self.dim):
                v = self.parent.right[g].apply(self.inclusion.column(j))
                x = solver.solve(v)
                if x is None:
                    raise AlgebraError("subspace not stable under right action")
                cols.append(x)
            right.append(Matrix.from_columns(self.dim, cols))
        return Bimodule(self.parent.left_algebra, self.parent.right_algebra,
                        self.dim, left, right, name=self.name)


def quotient_bimodule(parent, sub_inclusion, name=None):
    """Quotient of a bimodule by a stable subspace; returns
    (bimodule, projection, section)."""
    from .linalg import quotient_space
    dim, proj, sec = quotient_space(parent.dim, sub_inclusion)
    left = [proj @ (parent.left[g] @ sec) for g in range(parent.left_algebra.dim)]
    right = [proj @ (parent.right[g] @ sec) for g in range(parent.right_algebra.dim)]
    bm = Bimodule(parent.left_algebra, parent.right_algebra, dim, left, right,
                  name=name or "%s/sub" % parent.name)
    return bm, proj, sec


# ---------------------------------------------------------------------------
# the multiplication-kernel bimodule and its freeness

def multiplication_kernel(a):
    """Ker(m: a⊗a -> a) as a SubBimodule of the outer bimodule a⊗a."""
    m = a.multiplication_matrix()
    _, kernel, _, _ = rank_kernel_image(m)
    return SubBimodule(outer_bimodule(a), kernel, name="I_%s" % a.name)


def right_module_freeness_check(I):
    """Check I = Ker(m) is right-free on the classes b⊗1 - 1⊗b.

    Returns (is_free, generator_matrix): generators are the vectors
    e_b⊗unit - unit⊗e_b for basis b outside span(unit); freeness here means
    dim I = (dim a - 1)·dim a and the right-action translates of the
    generators span I.
    """
    parent = I.parent
    a = parent.left_algebra
    n = a.dim
    expected = (n - 1) * n
    gen_cols = []
    unit_ech = Echelon()
    unit_ech.add(dict(a.unit))
    for b in range(n):
        if unit_ech.contains({b: ONE}):
            continue
        v = {}
        for k, c in a.unit.items():
            v[b * n + k] = v.get(b * n + k, ZERO) + c
            v[k * n + b] = v.get(k * n + b, ZERO) - c
        gen_cols.append({k: c for k, c in v.items() if c})
    span = Echelon()
    for g in gen_cols:
        for x in range(n):
            span.add(parent.right[x].apply(g))
    inclusion_span = Echelon()
    for j in range(I.inclusion.cols):
        inclusion_span.add(I.inclusion.column(j))
    ok = (I.dim == expected and span.rank == I.dim
          and all(inclusion_span.contains(g) for g in gen_cols))
    return ok, Matrix.from_columns(n * n, gen_cols)


# ---------------------------------------------------------------------------
# preset catalog

def preset_catalog(name, *params):
    """Catalog of test algebras.

    truncated_poly(m), truncated_poly2(m1, m2), matrix(n), exterior(n),
    group_algebra(m) (= Q[Z/m]), dual_numbers.
    """
    if name == "truncated_poly":
        (m,) = params
        return truncated_poly(m)
    if name == "truncated_poly2":
        m1, m2 = params
        return tensor_algebra(truncated_poly(m1), truncated_poly(m2))
    if name == "matrix":
        (n,) = params
        return matrix_algebra(n)
    if name == "exterior":
        (n,) = params
        return exterior_algebra(n)
    if name == "group_algebra":
        (m,) = params
        return cyclic_group_algebra(m)
    if name == "dual_numbers":
        return truncated_poly(2)
    if name == "rationals":
        return truncated_poly(1)
    raise AlgebraError("unknown preset %r" % name)


PRESET_NAMES = ("truncated_poly", "truncated_poly2", "matrix", "exterior",
                "group_algebra", "dual_numbers", "rationals")


def truncated_poly(m):
    """Q[x]/(x^m), basis 1, x, .., x^{m-1}."""
    labels = ["1"] + ["x" if i == 1 else "x^%d" % i for i in range(1, m)]
    entries = []
    for i in range(m):
        for j in range(m):
            if i + j < m:
                entries.append((i, j, i + j, ONE))
    return from_structure_constants(labels, entries, {0: ONE},
                                    name="Q[x]/(x^%d)" % m,
                                    generators=[1] if m > 1 else [])


def matrix_algebra(n):
    """M_n(Q) on the elementary-matrix basis E_pq, index p*n+q."""
    labels = ["E%d%d" % (p + 1, q + 1) for p in range(n) for q in range(n)]
    entries = []
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    if q == r:
                        entries.append((p * n + q, r * n + s, p * n + s, ONE))
    unit = {p * n + p: ONE for p in range(n)}
    return from_structure_constants(labels, entries, unit, name="M_%d(Q)" % n)


def exterior_algebra(n):
    """∧(Q^n): basis indexed by subsets of {1..n} in sorted order."""
    subsets = []
    for r in range(n + 1):
        subsets.extend(itertools.combinations(range(1, n + 1), r))
    index = {s: i for i, s in enumerate(subsets)}
    labels = ["1"] + ["".join("e%d" % g for g in s) for s in subsets[1:]]
    entries = []
    for s in subsets:
        for t in subsets:
            if set(s) & set(t):
                continue
            merged, sign = _wedge_sign(s, t)
            entries.append((index[s], index[t], index[merged], rat(sign)))
    gens = [index[(g,)] for g in range(1, n + 1)]
    return from_structure_constants(labels, entries, {0: ONE},
                                    name="∧(Q^%d)" % n, generators=gens)


def _wedge_sign(s, t):
    """Merge two disjoint sorted tuples; sign of the shuffle."""
    merged = tuple(sorted(s + t))
    perm = list(s + t)
    sign = 1
    # bubble sort counting transpositions
    for i in range(len(perm)):
        for j in range(len(perm) - 1 - i):
            if perm[j] > perm[j + 1]:
                perm[j], perm[j + 1] = perm[j + 1], perm[j]
                sign = -sign
    return merged, sign


def cyclic_group_algebra(m):
    """Q[Z/m], basis g^0..g^{m-1}."""
    labels = ["g^%d" % i for i in range(m)]
    entries = [(i, j, (i + j) % m, ONE) for i in range(m) for j in range(m)]
    return from_structure_constants(labels, entries, {0: ONE},
                                    name="Q[Z/%d]" % m,
                                    generators=[1] if m > 1 else [])

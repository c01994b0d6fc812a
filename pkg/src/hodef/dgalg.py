"""Bounded dg-algebras and dg-bimodules with exact validation.

Basis elements carry integer degrees; differentials have degree +1.  All
the graded axioms (d² = 0, graded Leibniz, associativity, action axioms
with Koszul signs) are checked entrywise at construction.
"""

from .complexes import CochainComplex, GradedSpace, ChainMap, cone as complex_cone
from .linalg import Matrix, Solver, rank_of, vec_axpy_inplace
from .rational import ZERO, ONE, rat


class DgError(Exception):
    pass


def _sign(k):
    return ONE if k % 2 == 0 else -ONE


class DgAlgebra:
    """degrees: list of ints per basis index; mul: dict (i,j) -> sparse vec;
    unit: sparse vec (degree 0, closed); diff: Matrix (degree +1)."""

    def __init__(self, degrees, mul, unit, diff, labels=None, name="dg-algebra",
                 check=True):
        self.degrees = list(degrees)
        self.dim = len(self.degrees)
        self.mul = mul
        self.unit = dict(unit)
        self.diff = diff
        self.labels = labels or ["b%d" % i for i in range(self.dim)]
        self.name = name
        if check:
            self.validate()

    def basis_product(self, i, j):
        return self.mul.get((i, j), {})

    def product(self, x, y):
        out = {}
        for i, c in x.items():
            for j, c2 in y.items():
                vec_axpy_inplace(out, c * c2, self.basis_product(i, j))
        return out

    def left_mult_matrix(self, x):
        cols = [self.product(x, {j: ONE}) for j in range(self.dim)]
        return Matrix.from_columns(self.dim, cols)

    def right_mult_matrix(self, x):
        cols = [self.product({j: ONE}, x) for j in range(self.dim)]
        return Matrix.from_columns(self.dim, cols)

    def validate(self):
        if (self.diff @ self.diff).nnz():
            raise DgError("%s: d² != 0" % self.name)
        for (i, j), v in self.mul.items():
            d = self.degrees[i] + self.degrees[j]
            for k, c in v.items():
                if self.degrees[k] != d:
                    raise DgError("%s: product not degree-additive" % self.name)
        for j, c in self.diff_degrees_violations():
            raise DgError("%s: differential not degree +1 at %d" % (self.name, j))
        # unit
        for j in range(self.dim):
            e = {j: ONE}
            if self.product(self.unit, e) != e or self.product(e, self.unit) != e:
                raise DgError("%s: unit law fails at %d" % (self.name, j))
        if self.diff.apply(self.unit):
            raise DgError("%s: unit not closed" % self.name)
        # associativity
        for i in range(self.dim):
            for j in range(self.dim):
                pij = self.basis_product(i, j)
                for k in range(self.dim):
                    lhs = self.product(pij, {k: ONE})
                    rhs = self.product({i: ONE}, self.basis_product(j, k))
                    if lhs != rhs:
                        raise DgError("%s: associativity fails at (%d,%d,%d)"
                                      % (self.name, i, j, k))
        # graded Leibniz: d(xy) = dx·y + (-1)^{|x|} x·dy
        for i in range(self.dim):
            di = self.diff.columns[i]
            for j in range(self.dim):
                lhs = self.diff.apply(self.basis_product(i, j))
                rhs = self.product(di, {j: ONE})
                vec_axpy_inplace(rhs, _sign(self.degrees[i]),
                                 self.product({i: ONE}, self.diff.columns[j]))
                if lhs != rhs:
                    raise DgError("%s: Leibniz fails at (%d,%d)" % (self.name, i, j))

    def diff_degrees_violations(self):
        out = []
        for j in range(self.dim):
            for i, c in self.diff.columns[j].items():
                if self.degrees[i] != self.degrees[j] + 1:
                    out.append((j, c))
        return out

    def is_graded_commutative(self):
        for i in range(self.dim):
            for j in range(self.dim):
                s = _sign(self.degrees[i] * self.degrees[j])
                rhs = {k: s * c for k, c in self.basis_product(j, i).items()}
                if self.basis_product(i, j) != rhs:
                    return False
        return True

    def complex(self):
        return _complex_from(self.degrees, self.diff)

    def cohomology_dims(self):
        return self.complex().cohomology_dims()


def _complex_from(degrees, diff):
    by_deg = {}
    for k, d in enumerate(degrees):
        by_deg.setdefault(d, []).append(k)
    pos = {}
    for d, idx in by_deg.items():
        for p, k in enumerate(idx):
            pos[k] = (d, p)
    spaces = GradedSpace({d: (len(idx), None) for d, idx in by_deg.items()})
    comps = {}
    for d, idx in by_deg.items():
        tgt = by_deg.get(d + 1, [])
        tgt_pos = {k: p for p, k in enumerate(tgt)}
        m = Matrix.zero(len(tgt), len(idx))
        for p, k in enumerate(idx):
            for k2, c in diff.columns[k].items():
                m.columns[p][tgt_pos[k2]] = c
        if m.nnz():
            comps[d] = m
    return CochainComplex(spaces, comps)


class DgBimodule:
    """Bimodule over a pair of dg-algebras with explicit action matrices.

    left[i]: action of the i-th basis element of the left algebra (degree
    |b_i| operator); right[j] likewise for the right algebra; diff: degree
    +1.  Leibniz carries the Koszul sign on the module element for the
    right action.
    """

    def __init__(self, left_algebra, right_algebra, degrees, left, right, diff,
                 labels=None, name="dg-bimodule", check=True):
        self.left_algebra = left_algebra
        self.right_algebra = right_algebra
        self.degrees = list(degrees)
        self.dim = len(self.degrees)
        self.left = left
        self.right = right
        self.diff = diff
        self.labels = labels or ["m%d" % i for i in range(self.dim)]
        self.name = name
        if check:
            self.validate()

    def act_left(self, x, v):
        out = {}
        for i, c in x.items():
            vec_axpy_inplace(out, c, self.left[i].apply(v))
        return out

    def act_right(self, v, y):
        """v·y for y in the right algebra: (v·y1)·y2 = v·(y1 y2)."""
        out = {}
        for j, c in y.items():
            vec_axpy_inplace(out, c, self.right[j].apply(v))
        return out

    def sign_matrix(self):
        return Matrix(self.dim, self.dim,
                      [{k: _sign(self.degrees[k])} for k in range(self.dim)])

    def validate(self):
        A, B = self.left_algebra, self.right_algebra
        if (self.diff @ self.diff).nnz():
            raise DgError("%s: d² != 0" % self.name)
        for j in range(self.dim):
            for i, c in self.diff.columns[j].items():
                if self.degrees[i] != self.degrees[j] + 1:
                    raise DgError("%s: differential not degree +1" % self.name)
        ident = Matrix.identity(self.dim)
        if _sum_action(self.left, A.unit, self.dim) != ident:
            raise DgError("%s: left unit fails" % self.name)
        if _sum_action(self.right, B.unit, self.dim) != ident:
            raise DgError("%s: right unit fails" % self.name)
        for i in range(A.dim):
            for j in range(A.dim):
                if self.left[i] @ self.left[j] != \
                        _sum_action(self.left, A.basis_product(i, j), self.dim):
                    raise DgError("%s: left action fails at (%d,%d)"
                                  % (self.name, i, j))
        for i in range(B.dim):
            for j in range(B.dim):
                if self.right[j] @ self.right[i] != \
                        _sum_action(self.right, B.basis_product(i, j), self.dim):
                    raise DgError("%s: right action fails at (%d,%d)"
                                  % (self.name, i, j))
        for i in range(A.dim):
            for j in range(B.dim):
                if self.left[i] @ self.right[j] != self.right[j] @ self.left[i]:
                    raise DgError("%s: actions do not commute" % self.name)
        # graded Leibniz for both actions
        E = self.sign_matrix()
        for i in range(A.dim):
            lhs = self.diff @ self.left[i]
            rhs = _sum_action(self.left, A.diff.columns[i], self.dim) \
                + (self.left[i] @ self.diff).scale(_sign(A.degrees[i]))
            if lhs != rhs:
                raise DgError("%s: left Leibniz fails at %d" % (self.name, i))
        for j in range(B.dim):
            lhs = self.diff @ self.right[j]
            rhs = (self.right[j] @ self.diff) \
                + (_sum_action(self.right, B.diff.columns[j], self.dim) @ E)
            if lhs != rhs:
                raise DgError("%s: right Leibniz fails at %d" % (self.name, j))

    def complex(self):
        return _complex_from(self.degrees, self.diff)

    def cohomology_dims(self):
        return self.complex().cohomology_dims()


def _sum_action(mats, coeffs, dim):
    out = Matrix.zero(dim, dim)
    for i, c in coeffs.items():
        for j in range(dim):
            vec_axpy_inplace(out.columns[j], c, mats[i].columns[j])
    return out


class DgBimoduleMap:
    def __init__(self, source, target, matrix, degree=0, check=True):
        self.source = source
        self.target = target
        self.matrix = matrix
        self.degree = degree
        if check:
            self.validate()

    def validate(self):
        s, t = self.source, self.target
        for j in range(s.dim):
            for i, c in self.matrix.columns[j].items():
                if t.degrees[i] != s.degrees[j] + self.degree:
                    raise DgError("map is not homogeneous of degree %d" % self.degree)
        lhs = t.diff @ self.matrix
        rhs = (self.matrix @ s.diff).scale(_sign(self.degree))
        if lhs != rhs:
            raise DgError("not a chain map")
        if self.degree % 2 == 0:
            for g in range(s.left_algebra.dim):
                if self.matrix @ s.left[g] != t.left[g] @ self.matrix:
                    raise DgError("map is not left-linear")
            for g in range(s.right_algebra.dim):
                if self.matrix @ s.right[g] != t.right[g] @ self.matrix:
                    raise DgError("map is not right-linear")

    def as_chain_map(self):
        # repackage per degrees for quasi-iso tests
        sc = self.source.complex()
        tc = self.target.complex()
        src_by = {}
        for k, d in enumerate(self.source.degrees):
            src_by.setdefault(d, []).append(k)
        tgt_by = {}
        for k, d in enumerate(self.target.degrees):
            tgt_by.setdefault(d, []).append(k)
        comps = {}
        for d, idx in src_by.items():
            tgt = tgt_by.get(d + self.degree, [])
            tgt_pos = {k: p for p, k in enumerate(tgt)}
            m = Matrix.zero(len(tgt), len(idx))
            for p, k in enumerate(idx):
                for k2, c in self.matrix.columns[k].items():
                    m.columns[p][tgt_pos[k2]] = c
            if m.nnz():
                comps[d] = m
        return ChainMap(sc, tc, comps, degree=self.degree)

    def is_quasi_iso(self):
        return self.as_chain_map().is_quasi_iso()


def cone_bimodule(f):
    """Cone of a degree-0 map of dg-bimodules, with the inherited actions:
    Cone = M[1] ⊕ N, left action on the shifted part twisted by (-1)^{|b|}."""
    if f.degree != 0:
        raise DgError("cone needs a degree-0 map")
    M, N = f.source, f.target
    A, B = M.left_algebra, M.right_algebra
    degrees = [d - 1 for d in M.degrees] + list(N.degrees)
    dim = M.dim + N.dim
    off = M.dim
    diff = Matrix.zero(dim, dim)
    for j in range(M.dim):
        for i, c in M.diff.columns[j].items():
            diff.columns[j][i] = -c
        for i, c in f.matrix.columns[j].items():
            diff.columns[j][off + i] = c
    for j in range(N.dim):
        for i, c in N.diff.columns[j].items():
            diff.columns[off + j][off + i] = c
    left = []
    for g in range(A.dim):
        m = Matrix.zero(dim, dim)
        sgn = _sign(A.degrees[g])
        for j in range(M.dim):
            for i, c in M.left[g].columns[j].items():
                m.columns[j][i] = sgn * c
        for j in range(N.dim):
            for i, c in N.left[g].columns[j].items():
                m.columns[off + j][off + i] = c
        left.append(m)
    right = []
    for g in range(B.dim):
        m = Matrix.zero(dim, dim)
        for j in range(M.dim):
            for i, c in M.right[g].columns[j].items():
                m.columns[j][i] = c
        for j in range(N.dim):
            for i, c in N.right[g].columns[j].items():
                m.columns[off + j][off + i] = c
        right.append(m)
    return DgBimodule(A, B, degrees, left, right, diff,
                      name="Cone(%s)" % getattr(f, "name", "f"))


def truncate_geq_bimodule(M, n):
    """τ≥n of a dg-bimodule over non-positively graded algebras; actions
    descend because they never raise degree."""
    if any(d > 0 for d in M.left_algebra.degrees) or \
       any(d > 0 for d in M.right_algebra.degrees):
        raise DgError("truncation needs non-positively graded algebras")
    # killed subspace: all degrees < n plus im(d) inside degree n
    from .linalg import Echelon, quotient_space
    killed = Echelon()
    killed_cols = []
    for k, d in enumerate(M.degrees):
        if d < n:
            v = {k: ONE}
            if killed.add(v) is None:
                killed_cols.append(v)
    for j in range(M.dim):
        if M.degrees[j] == n - 1:
            v = M.diff.columns[j]
            if v and killed.add(v) is None:
                killed_cols.append(dict(v))
    sub = Matrix.from_columns(M.dim, killed_cols)
    qdim, proj, sec = quotient_space(M.dim, sub)
    degrees = []
    for k in range(qdim):
        col = sec.column(k)
        degs = {M.degrees[i] for i in col}
        if len(degs) != 1:
            raise DgError("truncation section is not homogeneous")
        degrees.append(degs.pop())
    diff = proj @ (M.diff @ sec)
    left = [proj @ (M.left[g] @ sec) for g in range(M.left_algebra.dim)]
    right = [proj @ (M.right[g] @ sec) for g in range(M.right_algebra.dim)]
    T = DgBimodule(M.left_algebra, M.right_algebra, degrees, left, right, diff,
                   name="τ≥%d(%s)" % (n, M.name))
    return T, DgBimoduleMap(M, T, proj)

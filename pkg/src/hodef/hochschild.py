"""Hochschild cochain complex C^n(a, M) = Hom(a^⊗n, M).

Cochains are dense tensors indexed by basis tuples (mixed-radix rank) with
sparse values in the coefficient bimodule.  The differential is

  (δf)(a0,..,an) = a0·f(a1..an) + Σ_{i=1..n} (-1)^i f(..,a_{i-1}a_i,..)
                   + (-1)^{n+1} f(a0..a_{n-1})·an

and the cup product and Gerstenhaber bracket follow Gerstenhaber's
conventions: f∘g = Σ_i (-1)^{(i-1)(|g|-1)} f∘_i g and
[f,g] = f∘g - (-1)^{(|f|-1)(|g|-1)} g∘f.  With these signs
[m, f] = (-1)^{|f|-1} δf, which the tests assert entrywise.
"""

import itertools

from .algebra import Bimodule, regular_bimodule
from .complexes import CochainComplex, GradedSpace
from .linalg import Matrix, Solver, rank_kernel_image, vec_axpy_inplace, vec_scale
from .rational import ZERO, ONE, rat


class HochschildError(Exception):
    pass


class Cochain:
    """Multilinear map a^⊗n -> M as a dense tensor with sparse rows."""

    __slots__ = ("algebra", "coefficients", "arity", "values")

    def __init__(self, algebra, coefficients, arity, values=None):
        self.algebra = algebra
        self.coefficients = coefficients
        self.arity = arity
        self.values = values if values is not None else {}

    def copy(self):
        return Cochain(self.algebra, self.coefficients, self.arity,
                       {r: dict(v) for r, v in self.values.items()})

    def rank(self, idx):
        r = 0
        n = self.algebra.dim
        for i in idx:
            r = r * n + i
        return r

    def value(self, idx):
        return self.values.get(self.rank(idx), {})

    def set_value(self, idx, vec):
        r = self.rank(idx)
        vec = {k: c for k, c in vec.items() if c}
        if vec:
            self.values[r] = vec
        else:
            self.values.pop(r, None)

    def add_value(self, idx, vec, coeff=ONE):
        r = self.rank(idx)
        cur = self.values.setdefault(r, {})
        vec_axpy_inplace(cur, coeff, vec)
        if not cur:
            del self.values[r]

    def value_with_vector(self, pos, vec, rest):
        """Evaluate with a general vector in slot pos, basis indices in rest."""
        out = {}
        for i, c in vec.items():
            idx = rest[:pos] + (i,) + rest[pos:]
            vec_axpy_inplace(out, c, self.value(idx))
        return out

    def is_zero(self):
        return not self.values

    def __add__(self, other):
        out = self.copy()
        for r, v in other.values.items():
            cur = out.values.setdefault(r, {})
            vec_axpy_inplace(cur, ONE, v)
            if not cur:
                del out.values[r]
        return out

    def __sub__(self, other):
        return self + other.scale(rat(-1))

    def scale(self, c):
        if not c:
            return Cochain(self.algebra, self.coefficients, self.arity)
        return Cochain(self.algebra, self.coefficients, self.arity,
                       {r: vec_scale(v, c) for r, v in self.values.items()})

    def __eq__(self, other):
        return (self.arity == other.arity and self.values == other.values)

    def to_flat(self):
        """Flatten to coordinates in C^n: index rank*dimM + m."""
        dm = self.coefficients.dim
        out = {}
        for r, v in self.values.items():
            for m, c in v.items():
                out[r * dm + m] = c
        return out

    @classmethod
    def from_flat(cls, algebra, coefficients, arity, flat):
        dm = coefficients.dim
        values = {}
        for k, c in flat.items():
            r, m = divmod(k, dm)
            values.setdefault(r, {})[m] = c
        return cls(algebra, coefficients, arity, values)

    def is_normalized(self):
        """True iff f vanishes whenever any argument is the unit vector."""
        a = self.algebra
        n = self.arity
        if n == 0:
            return True
        for pos in range(n):
            for rest in itertools.product(range(a.dim), repeat=n - 1):
                if self.value_with_vector(pos, a.unit, rest):
                    return False
        return True


def multiplication_cochain(a):
    """The product as a 2-cochain (coefficients the regular bimodule)."""
    M = regular_bimodule(a)
    f = Cochain(a, M, 2)
    for i in range(a.dim):
        for j in range(a.dim):
            f.set_value((i, j), a.mul[i][j])
    return f


def differential(f):
    """Hochschild differential; output arity n+1."""
    a = f.algebra
    M = f.coefficients
    if M.left_algebra is not a or M.right_algebra is not a:
        raise HochschildError("coefficient bimodule is not over the algebra")
    n = f.arity
    out = Cochain(a, M, n + 1)
    for t in itertools.product(range(a.dim), repeat=n + 1):
        acc = {}
        vec_axpy_inplace(acc, ONE, M.act_left({t[0]: ONE}, f.value(t[1:])))
        sign = ONE
        for i in range(1, n + 1):
            sign = -sign
            prod = a.mul[t[i - 1]][t[i]]
            for k, c in prod.items():
                idx = t[:i - 1] + (k,) + t[i + 1:]
                vec_axpy_inplace(acc, sign * c, f.value(idx))
        last = M.act_right(f.value(t[:n]), {t[n]: ONE})
        vec_axpy_inplace(acc, -sign, last)
        out.set_value(t, acc)
    return out


def cup(f, g):
    """(f⌣g)(a1..a_{p+q}) = f(a1..ap)·g(..); coefficients must be the algebra."""
    a = f.algebra
    _require_regular(f)
    _require_regular(g)
    p, q = f.arity, g.arity
    out = Cochain(a, f.coefficients, p + q)
    for t in itertools.product(range(a.dim), repeat=p + q):
        fv = f.value(t[:p])
        if not fv:
            continue
        gv = g.value(t[p:])
        if not gv:
            continue
        out.set_value(t, a.product(fv, gv))
    return out


def circle(f, g):
    """Pre-Lie composition f∘g = Σ_i (-1)^{(i-1)(|g|-1)} f∘_i g."""
    a = f.algebra
    _require_regular(f)
    _require_regular(g)
    p, q = f.arity, g.arity
    if p == 0:
        return Cochain(a, f.coefficients, max(q - 1, 0))
    n = p + q - 1
    out = Cochain(a, f.coefficients, n)
    for t in itertools.product(range(a.dim), repeat=n):
        acc = {}
        for i in range(1, p + 1):
            sign = ONE if ((i - 1) * (q - 1)) % 2 == 0 else -ONE
            gv = g.value(t[i - 1:i - 1 + q])
            if not gv:
                continue
            rest = t[:i - 1] + t[i - 1 + q:]
            fv = f.value_with_vector(i - 1, gv, rest)
            vec_axpy_inplace(acc, sign, fv)
        out.set_value(t, acc)
    return out


def gerstenhaber_bracket(f, g):
    """[f,g] = f∘g - (-1)^{(|f|-1)(|g|-1)} g∘f."""
    sign = ONE if ((f.arity - 1) * (g.arity - 1)) % 2 == 0 else -ONE
    return circle(f, g) - circle(g, f).scale(sign)


def _require_regular(f):
    M = f.coefficients
    if M.dim != f.algebra.dim:
        raise HochschildError("cup/bracket need coefficients equal to the algebra")


# ---------------------------------------------------------------------------
# cohomology

class HHResult:
    def __init__(self, dim, representatives):
        self.dim = dim
        self.representatives = representatives


class HochschildClass:
    """A cocycle considered up to coboundary; equality decided exactly."""

    def __init__(self, context, representative):
        if not differential(representative).is_zero():
            raise HochschildError("representative is not a cocycle")
        self.context = context
        self.representative = representative
        self.degree = representative.arity

    def is_zero(self):
        return self.context.is_coboundary(self.representative)

    def equals(self, other):
        if self.degree != other.degree:
            return False
        return self.context.is_coboundary(self.representative - other.representative)


class HochschildContext:
    """Caches bar-complex differentials and solvers for one (a, M)."""

    def __init__(self, algebra, coefficients=None):
        self.algebra = algebra
        self.coefficients = coefficients or regular_bimodule(algebra)
        self._delta = {}
        self._image_solver = {}
        self._hh = {}

    def cochain_dim(self, n):
        return self.algebra.dim ** n * self.coefficients.dim

    def delta_matrix(self, n):
        """δ: C^n -> C^{n+1} as a matrix in flat coordinates."""
        if n in self._delta:
            return self._delta[n]
        if n < 0:
            m = Matrix.zero(self.cochain_dim(0), 0)
            self._delta[n] = m
            return m
        a = self.algebra
        M = self.coefficients
        dm = M.dim
        dim_src = self.cochain_dim(n)
        dim_dst = self.cochain_dim(n + 1)
        cols = [{} for _ in range(dim_src)]
        na = a.dim
        for t in itertools.product(range(na), repeat=n + 1):
            trank = 0
            for i in t:
                trank = trank * na + i
            rrank = 0
            for i in t[1:]:
                rrank = rrank * na + i
            # a0 · f(a1..an)
            lm = M.left[t[0]]
            for m in range(dm):
                col = cols[rrank * dm + m]
                for m2, c in lm.columns[m].items():
                    key = trank * dm + m2
                    cur = col.get(key)
                    cur = c if cur is None else cur + c
                    if cur:
                        col[key] = cur
                    else:
                        del col[key]
            # inner face maps
            sign = ONE
            for i in range(1, n + 1):
                sign = -sign
                for k, c in a.mul[t[i - 1]][t[i]].items():
                    idx = t[:i - 1] + (k,) + t[i + 1:]
                    srank = 0
                    for q in idx:
                        srank = srank * na + q
                    sc = sign * c
                    for m in range(dm):
                        col = cols[srank * dm + m]
                        key = trank * dm + m
                        cur = col.get(key)
                        cur = sc if cur is None else cur + sc
                        if cur:
                            col[key] = cur
                        else:
                            del col[key]
            # f(a0..a_{n-1}) · an
            lrank = 0
            for i in t[:n]:
                lrank = lrank * na + i
            rm = M.right[t[n]]
            msign = -sign
            for m in range(dm):
                col = cols[lrank * dm + m]
                for m2, c in rm.columns[m].items():
                    key = trank * dm + m2
                    cur = col.get(key)
                    cur = (msign * c) if cur is None else cur + msign * c
                    if cur:
                        col[key] = cur
                    else:
                        del col[key]
        m = Matrix(dim_dst, dim_src, cols)
        self._delta[n] = m
        return m

    def is_cocycle(self, f):
        return differential(f).is_zero()

    def coboundary_preimage(self, f):
        """g with δg = f, or None.  f given as a Cochain of arity n."""
        n = f.arity
        if n == 0:
            return None if not f.is_zero() else Cochain(self.algebra, self.coefficients, 0)
        solver = self._image_solver.get(n - 1)
        if solver is None:
            solver = Solver(self.delta_matrix(n - 1))
            self._image_solver[n - 1] = solver
        x = solver.solve(f.to_flat())
        if x is None:
            return None
        return Cochain.from_flat(self.algebra, self.coefficients, n - 1, x)

    def is_coboundary(self, f):
        return self.coboundary_preimage(f) is not None

    def class_equal(self, f, g):
        return self.is_coboundary(f - g)

    def complex(self, max_degree):
        """The truncated bar cochain complex through max_degree+1."""
        spaces = GradedSpace({i: self.cochain_dim(i) for i in range(max_degree + 2)})
        diffs = {i: self.delta_matrix(i) for i in range(max_degree + 1)}
        return CochainComplex(spaces, diffs)

    def hh(self, n, normalize=True):
        """Dimension and pairwise non-cohomologous representatives of HH^n."""
        key = (n, normalize)
        if key in self._hh:
            return self._hh[key]
        if n < 0:
            raise HochschildError("negative degree")
        dn = self.delta_matrix(n)
        _, kernel, _, _ = rank_kernel_image(dn)
        from .linalg import Echelon
        ech = Echelon()
        for col in self.delta_matrix(n - 1).columns:
            ech.add(col)
        boundary_rank = ech.rank
        reps = []
        for j in range(kernel.cols):
            col = kernel.column(j)
            if ech.add(col) is None:
                f = Cochain.from_flat(self.algebra, self.coefficients, n, col)
                if normalize and n > 0:
                    f = self.normalize_cocycle(f)
                reps.append(f)
        res = HHResult(len(reps), reps)
        self._hh[key] = res
        return res

    def normalize_cocycle(self, f):
        """Replace f by a cohomologous cochain vanishing on unit slots."""
        a = self.algebra
        M = self.coefficients
        n = f.arity
        if n == 0:
            return f
        # collect the unit-slot linear conditions as rows over C^n
        conditions = []   # list of (flat functional vec applied to cochain, target)
        unit = a.unit
        dm = M.dim
        rows = []
        targets = []
        for pos in range(n):
            for rest in itertools.product(range(a.dim), repeat=n - 1):
                target = f.value_with_vector(pos, unit, rest)
                row_entries = []
                for i, c in unit.items():
                    idx = rest[:pos] + (i,) + rest[pos:]
                    r = 0
                    for q in idx:
                        r = r * a.dim + q
                    row_entries.append((r, c))
                rows.append(row_entries)
                targets.append(target)
        # solve δγ = correction with correction matching f on unit-slots:
        # unknowns γ in C^{n-1}; equations: for each condition row and each m,
        # sum over entries of (δγ) flat coords = target.
        delta_prev = self.delta_matrix(n - 1)
        eq_cols = []
        n_eq = len(rows) * dm
        for j in range(delta_prev.cols):
            dcol = delta_prev.columns[j]
            col = {}
            for e, (row_entries, _) in enumerate(zip(rows, targets)):
                for r, c in row_entries:
                    base = r * dm
                    for m in range(dm):
                        v = dcol.get(base + m)
                        if v:
                            key = e * dm + m
                            cur = col.get(key, ZERO) + c * v
                            if cur:
                                col[key] = cur
                            else:
                                col.pop(key, None)
            eq_cols.append(col)
        b = {}
        for e, tvec in enumerate(targets):
            for m, c in tvec.items():
                b[e * dm + m] = c
        if not b:
            return f
        system = Matrix(n_eq, delta_prev.cols, eq_cols)
        x = Solver(system).solve(b)
        if x is None:
            raise HochschildError("normalization system unsolvable (not a cocycle?)")
        gamma = Cochain.from_flat(a, M, n - 1, x)
        out = f - differential(gamma)
        if not out.is_normalized():
            raise HochschildError("normalization failed")
        return out


def hh(algebra, coefficients, n, normalize=True):
    """HH^n(a, M): (dimension, representative cocycles)."""
    ctx = HochschildContext(algebra, coefficients)
    res = ctx.hh(n, normalize=normalize)
    return res.dim, res.representatives


# ---------------------------------------------------------------------------
# Yoneda/cup graded commutativity check

class CommutativityReport:
    def __init__(self, algebra, max_total_degree):
        self.algebra = algebra
        self.max_total_degree = max_total_degree
        self.pairs = []   # (p, q, i, j, commutator_is_coboundary)

    @property
    def ok(self):
        return all(entry[-1] for entry in self.pairs)


def check_graded_commutativity(a, max_total_degree):
    """All cup commutators of class pairs with |ξ|+|η| ≤ D are coboundaries."""
    if max_total_degree < 2:
        raise HochschildError("need max total degree ≥ 2")
    ctx = HochschildContext(a)
    report = CommutativityReport(a, max_total_degree)
    reps = {p: ctx.hh(p).representatives for p in range(max_total_degree + 1)}
    for p in range(max_total_degree + 1):
        for q in range(p, max_total_degree + 1 - p):
            sign = ONE if (p * q) % 2 == 0 else -ONE
            for i, xi in enumerate(reps[p]):
                for j, eta in enumerate(reps[q]):
                    if q == p and j < i:
                        continue
                    comm = cup(xi, eta) - cup(eta, xi).scale(sign)
                    ok = comm.is_zero() or ctx.is_coboundary(comm)
                    report.pairs.append((p, q, i, j, ok))
    return report


# ---------------------------------------------------------------------------
# normalized-complex optimization toggle

def hh_dims_via_normalized_complex(a, coefficients, max_degree):
    """HH dims from the normalized subcomplex (unit-adapted coordinates).

    Used as a cross-check against the bar-complex answer at small size.
    """
    from .linalg import rank_of
    adapted, C = _unit_adapted(a)
    Mad = _transport_bimodule(coefficients, adapted, C)
    n = adapted.dim
    dm = Mad.dim
    deltas = {}
    for k in range(max_degree + 1):
        src_index = {t: i for i, t in
                     enumerate(itertools.product(range(1, n), repeat=k))}
        dst = list(itertools.product(range(1, n), repeat=k + 1))
        cols = [{} for _ in range(len(src_index) * dm)]

        def add(src_tuple, m_in, coeff, m_out, ti):
            if not coeff:
                return
            col = cols[src_index[src_tuple] * dm + m_in]
            key = ti * dm + m_out
            cur = col.get(key, ZERO) + coeff
            if cur:
                col[key] = cur
            else:
                col.pop(key, None)

        for ti, t in enumerate(dst):
            lm = Mad.left[t[0]]
            for m in range(dm):
                for m2, c in lm.columns[m].items():
                    add(t[1:], m, c, m2, ti)
            sign = ONE
            for i in range(1, k + 1):
                sign = -sign
                for kk, c in adapted.mul[t[i - 1]][t[i]].items():
                    if kk == 0:
                        continue   # unit component dies in the normalized complex
                    idx = t[:i - 1] + (kk,) + t[i + 1:]
                    for m in range(dm):
                        add(idx, m, sign * c, m, ti)
            rm = Mad.right[t[k]]
            msign = -sign
            for m in range(dm):
                for m2, c in rm.columns[m].items():
                    add(t[:k], m, msign * c, m2, ti)
        deltas[k] = Matrix(len(dst) * dm, len(src_index) * dm, cols)
    dims = {}
    for k in range(max_degree + 1):
        dk = deltas[k]
        ker = dk.cols - rank_of(dk)
        prev_rank = rank_of(deltas[k - 1]) if k - 1 in deltas else 0
        dims[k] = ker - prev_rank
    return dims


def _unit_adapted(a):
    """Isomorphic copy of a whose basis 0 is the unit; returns (a', C) with
    new basis vectors b_j = Σ_i C[i][j] e_i."""
    from .linalg import Echelon
    from .algebra import AssocAlgebra
    cols = [dict(a.unit)]
    ech = Echelon()
    ech.add(dict(a.unit))
    for i in range(a.dim):
        if len(cols) == a.dim:
            break
        if ech.add({i: ONE}) is None:
            cols.append({i: ONE})
    C = Matrix.from_columns(a.dim, cols)
    Cinv_solver = Solver(C)
    mul = [[None] * a.dim for _ in range(a.dim)]
    for i in range(a.dim):
        for j in range(a.dim):
            prod = a.product(C.column(i), C.column(j))
            mul[i][j] = Cinv_solver.solve(prod)
    labels = ["b%d" % i for i in range(a.dim)]
    aa = AssocAlgebra(labels, mul, {0: ONE}, name=a.name + "@unit")
    return aa, C


def _transport_bimodule(M, adapted, C):
    left = []
    right = []
    for j in range(adapted.dim):
        lm = Matrix.zero(M.dim, M.dim)
        rm = Matrix.zero(M.dim, M.dim)
        for i, c in C.column(j).items():
            for col in range(M.dim):
                vec_axpy_inplace(lm.columns[col], c, M.left[i].columns[col])
                vec_axpy_inplace(rm.columns[col], c, M.right[i].columns[col])
        left.append(lm)
        right.append(rm)
    return Bimodule(adapted, adapted, M.dim, left, right,
                    name=M.name + "@unit")

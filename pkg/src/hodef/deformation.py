"""Truncated multi-parameter deformations of associative algebras.

The base ring is O_N = Q[t_1..t_n]/(total degree > N).  A deformation is
carried on the fixed O_N-module a⊗O_N with star product
a ⋆ a' = a·a' + Σ_k β_k(a,a') where β_k lands in a ⊗ Sym^k(T*).  Validity
(associativity over O_N) is checked by building the full Q-algebra on the
basis (e_i, t^α) and validating it exactly; the degree-wise cocycle
formulation δβ_k = F_k is cross-checked in tests.
"""

import itertools
import random

from .algebra import (AssocAlgebra, Bimodule, SubBimodule, from_structure_constants,
                      multiplication_kernel, outer_bimodule, regular_bimodule,
                      trivial_coefficient_bimodule, quotient_bimodule, AlgebraError)
from .hochschild import (Cochain, HochschildContext, differential)
from .linalg import (Matrix, Echelon, Solver, rank_kernel_image, rank_of,
                     quotient_space, vec_axpy_inplace, vec_scale)
from .rational import ZERO, ONE, rat


class DeformationError(Exception):
    pass


class NotACocycleError(DeformationError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__("not a 2-cocycle; δβ nonzero at triple %s" % (witness,))


# ---------------------------------------------------------------------------
# the truncated base ring

class BaseRing:
    """O_N = Q[t_1..t_n]/(degree > N); monomials are exponent tuples."""

    def __init__(self, n, order):
        if order < 1:
            raise DeformationError("truncation order must be ≥ 1")
        self.n = n
        self.order = order
        self.monomials = []
        for total in range(order + 1):
            # descending lex puts t1^k first and makes the degree-1 block
            # align with the parameter order t_1, .., t_n
            self.monomials.extend(sorted(_exponents(n, total), reverse=True))
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.labels = [self.monomial_label(m) for m in self.monomials]

    @property
    def dim(self):
        return len(self.monomials)

    def degree(self, mono):
        return sum(mono)

    def mul(self, m1, m2):
        """Product monomial or None when truncated away."""
        out = tuple(a + b for a, b in zip(m1, m2))
        if sum(out) > self.order:
            return None
        return out

    def one(self):
        return (0,) * self.n

    def t(self, j):
        return tuple(1 if i == j else 0 for i in range(self.n))

    def monomials_of_degree(self, k):
        return [m for m in self.monomials if sum(m) == k]

    def monomial_label(self, mono):
        if sum(mono) == 0:
            return "1"
        parts = []
        for i, e in enumerate(mono):
            if e == 1:
                parts.append("t%d" % (i + 1))
            elif e > 1:
                parts.append("t%d^%d" % (i + 1, e))
        return "*".join(parts)

    def parse_monomial(self, text):
        """Inverse of monomial_label: 't1^2*t3' -> exponent tuple."""
        text = text.strip()
        mono = [0] * self.n
        if text in ("1", ""):
            return tuple(mono)
        for part in text.split("*"):
            if "^" in part:
                var, exp = part.split("^")
                e = int(exp)
            else:
                var, e = part, 1
            if not var.startswith("t"):
                raise DeformationError("bad monomial %r" % text)
            j = int(var[1:]) - 1
            if not 0 <= j < self.n:
                raise DeformationError("parameter index out of range in %r" % text)
            mono[j] += e
        if sum(mono) > self.order:
            raise DeformationError("monomial %r exceeds truncation order" % text)
        return tuple(mono)


def _exponents(n, total):
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _exponents(n - 1, total - first):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# star deformations

class StarDeformation:
    """Corrections β_k: (i, j) -> {(m, monomial): coeff}, |monomial| = k."""

    def __init__(self, algebra, ring, corrections, name=None, check=True):
        self.algebra = algebra
        self.ring = ring
        self.corrections = corrections   # dict k -> dict (i,j) -> {(m, mono): c}
        self.name = name or "deformation of %s" % algebra.name
        self._built = None
        if check:
            self.validate()

    @property
    def order(self):
        return self.ring.order

    @property
    def nparams(self):
        return self.ring.n

    def beta_cochain(self, k):
        """β_k as a Cochain into a ⊗ Sym^k(T*)."""
        monos = self.ring.monomials_of_degree(k)
        midx = {m: i for i, m in enumerate(monos)}
        M = trivial_coefficient_bimodule(self.algebra, len(monos),
                                         [self.ring.monomial_label(m) for m in monos])
        f = Cochain(self.algebra, M, 2)
        table = self.corrections.get(k, {})
        for (i, j), val in table.items():
            vec = {}
            for (m, mono), c in val.items():
                vec[m * len(monos) + midx[mono]] = c
            f.set_value((i, j), vec)
        return f

    def star_basis(self, i, j):
        """e_i ⋆ e_j as a sparse vector over (m, monomial) pairs."""
        out = {}
        for m, c in self.algebra.mul[i][j].items():
            out[(m, self.ring.one())] = c
        for k, table in self.corrections.items():
            for (m, mono), c in table.get((i, j), {}).items():
                key = (m, mono)
                cur = out.get(key, ZERO) + c
                if cur:
                    out[key] = cur
                else:
                    out.pop(key, None)
        return out

    def build_algebra(self):
        """The full Q-algebra A = a⊗O_N with the star product; cached."""
        if self._built is not None:
            return self._built
        a, ring = self.algebra, self.ring
        nm = ring.dim
        dim = a.dim * nm
        labels = []
        for i in range(a.dim):
            for m in ring.monomials:
                lbl = ring.monomial_label(m)
                labels.append(a.labels[i] if lbl == "1"
                              else "%s·%s" % (a.labels[i], lbl))
        entries = []
        for i in range(a.dim):
            for alpha_idx, alpha in enumerate(ring.monomials):
                row = i * nm + alpha_idx
                for j in range(a.dim):
                    for beta_idx, beta in enumerate(ring.monomials):
                        col = j * nm + beta_idx
                        base = ring.mul(alpha, beta)
                        if base is None:
                            continue
                        for (m, mono), c in self.star_basis(i, j).items():
                            out = ring.mul(base, mono)
                            if out is None:
                                continue
                            entries.append((row, col, m * nm + ring.index[out], c))
        unit = {}
        for i, c in a.unit.items():
            unit[i * nm] = c
        gen_idx = [g * nm for g in a.generating_set()]
        gen_idx += [k * nm + ring.index[ring.t(j)]
                    for k in a.unit for j in range(ring.n)]
        A = from_structure_constants(labels, entries, unit,
                                     name="(%s)⋆O_%d" % (a.name, ring.order),
                                     generators=None)
        A._generators = sorted(set(gen_idx))
        self._built = A
        return A

    def validate(self):
        """Associativity over O_N on all basis triples + β normalization."""
        a = self.algebra
        for k, table in self.corrections.items():
            if not 1 <= k <= self.ring.order:
                raise DeformationError("correction order %d out of range" % k)
            for (i, j), val in table.items():
                for (m, mono), c in val.items():
                    if sum(mono) != k:
                        raise DeformationError("β_%d carries a degree-%d monomial"
                                               % (k, sum(mono)))
            f = self.beta_cochain(k)
            if not f.is_normalized():
                raise DeformationError("β_%d is not normalized (unit slot)" % k)
        try:
            self.build_algebra()
        except AlgebraError as e:
            raise DeformationError("star product not associative: %s" % e)

    def embed(self, x):
        """a -> A: coordinates of x⊗1."""
        nm = self.ring.dim
        return {i * nm: c for i, c in x.items()}

    def param_mult(self, j):
        """Multiplication by t_j on A (central): matrix dim A x dim A."""
        A = self.build_algebra()
        nm = self.ring.dim
        cols = []
        for i in range(self.algebra.dim):
            for alpha in self.ring.monomials:
                out = self.ring.mul(alpha, self.ring.t(j))
                cols.append({} if out is None else {i * nm + self.ring.index[out]: ONE})
        return Matrix.from_columns(A.dim, cols)

    def reduction_matrix(self):
        """π: A -> a, kill the maximal ideal."""
        nm = self.ring.dim
        cols = []
        for i in range(self.algebra.dim):
            for alpha in self.ring.monomials:
                cols.append({i: ONE} if sum(alpha) == 0 else {})
        return Matrix.from_columns(self.algebra.dim, cols)

    def truncate_to(self, order):
        ring = BaseRing(self.ring.n, order)
        corr = {k: table for k, table in self.corrections.items() if k <= order}
        return StarDeformation(self.algebra, ring, corr,
                               name=self.name + "|%d" % order, check=False)

    def first_order(self):
        return self.truncate_to(1)


# ---------------------------------------------------------------------------
# presets

def trivial_deformation(a, nparams, order=1):
    return StarDeformation(a, BaseRing(nparams, order), {},
                           name="trivial(%s)" % a.name)


def dual_numbers_deformation(order=1):
    """Q[x]/(x²) with x⋆x = t: the truncation of Q[x]/(x²-t)."""
    from .algebra import preset_catalog
    a = preset_catalog("dual_numbers")
    ring = BaseRing(1, order)
    corr = {1: {(1, 1): {(0, (1,)): ONE}}}
    return StarDeformation(a, ring, corr, name="dual_numbers x⋆x=t")


def truncated_poly_deformation(m, order=1):
    """Q[x]/(x^m) with the carry term x^i⋆x^j = x^{i+j} + t·x^{i+j-m}."""
    from .algebra import preset_catalog
    a = preset_catalog("truncated_poly", m)
    ring = BaseRing(1, order)
    table = {}
    for i in range(m):
        for j in range(m):
            if i + j >= m and i + j - m < m:
                table[(i, j)] = {(i + j - m, (1,)): ONE}
    return StarDeformation(a, ring, {1: table}, name="Q[x]/(x^%d - t)" % m)


def clifford_deformation(order=1):
    """∧(Q²) deformed to the Clifford algebra of diag(t1, t2)."""
    from .algebra import preset_catalog
    a = preset_catalog("exterior", 2)
    ring = BaseRing(2, order)
    subsets = [(), (1,), (2,), (1, 2)]
    index = {s: i for i, s in enumerate(subsets)}

    def cl_mul(s, t_):
        """Product of basis monomials in Cl(diag(t1,t2)): dict (subset, mono) -> c."""
        out = {(s, (0, 0)): ONE}
        for g in t_:
            nxt = {}
            for (cur, mono), c in out.items():
                # multiply on the right by e_g
                if g in cur:
                    # move e_g from its slot to the right end, then square
                    pos = cur.index(g)
                    sign = ONE if (len(cur) - 1 - pos) % 2 == 0 else -ONE
                    rest = tuple(x for x in cur if x != g)
                    tm = tuple(1 if i == g - 1 else 0 for i in range(2))
                    new_mono = tuple(m + e for m, e in zip(mono, tm))
                    if sum(new_mono) <= order:
                        key = (rest, new_mono)
                        cur2 = nxt.get(key, ZERO) + c * sign
                        if cur2:
                            nxt[key] = cur2
                        else:
                            nxt.pop(key, None)
                else:
                    merged = tuple(sorted(cur + (g,)))
                    # sign of moving e_g left past the elements greater than g
                    greater = sum(1 for x in cur if x > g)
                    sign = ONE if greater % 2 == 0 else -ONE
                    key = (merged, mono)
                    cur2 = nxt.get(key, ZERO) + c * sign
                    if cur2:
                        nxt[key] = cur2
                    else:
                        nxt.pop(key, None)
            out = nxt
        return out

    corrections = {k: {} for k in range(1, order + 1)}
    for s in subsets:
        for t_ in subsets:
            prod = cl_mul(s, t_)
            for (u, mono), c in prod.items():
                k = sum(mono)
                if k == 0:
                    continue     # the classical exterior part
                corrections[k].setdefault((index[s], index[t_]), {})[(index[u], mono)] = c
    corrections = {k: v for k, v in corrections.items() if v}
    return StarDeformation(a, ring, corrections, name="Clifford(t1,t2)")


# ---------------------------------------------------------------------------
# first-order deformations and their classes

def sym1_bimodule(a, nparams):
    ring = BaseRing(nparams, 1)
    labels = [ring.monomial_label(m) for m in ring.monomials_of_degree(1)]
    return trivial_coefficient_bimodule(a, nparams, labels)


def first_order_from_cocycle(a, beta):
    """β: normalized 2-cocycle into a⊗T* -> StarDeformation with N = 1."""
    if beta.arity != 2:
        raise DeformationError("need a 2-cochain")
    db = differential(beta)
    if not db.is_zero():
        witness = min(db.values)
        n = a.dim
        triple = []
        r = witness
        for _ in range(3):
            triple.append(r % n)
            r //= n
        raise NotACocycleError(tuple(reversed(triple)))
    if not beta.is_normalized():
        raise DeformationError("cocycle is not normalized")
    nparams = beta.coefficients.dim // a.dim
    ring = BaseRing(nparams, 1)
    degree1 = ring.monomials_of_degree(1)
    table = {}
    for r, vec in beta.values.items():
        i, j = divmod(r, a.dim)
        val = {}
        for flat, c in vec.items():
            m, tj = divmod(flat, nparams)
            val[(m, degree1[tj])] = c
        table[(i, j)] = val
    return StarDeformation(a, ring, {1: table})


class ExtClass2:
    """A class in HH²(a, a⊗T*) with a normalized representative."""

    def __init__(self, algebra, nparams, representative, context=None):
        self.algebra = algebra
        self.nparams = nparams
        self.representative = representative
        self.context = context or HochschildContext(
            algebra, representative.coefficients)
        if not differential(representative).is_zero():
            raise DeformationError("ExtClass2 representative is not a cocycle")
        if not representative.is_normalized():
            self.representative = self.context.normalize_cocycle(representative)

    def is_zero(self):
        return self.context.is_coboundary(self.representative)

    def equals(self, other):
        return self.context.is_coboundary(self.representative - other.representative)

    def per_parameter(self):
        """Split into n Hochschild 2-cochains valued in a (one per t_j)."""
        a = self.algebra
        M = regular_bimodule(a)
        out = []
        for j in range(self.nparams):
            f = Cochain(a, M, 2)
            for r, vec in self.representative.values.items():
                val = {}
                for flat, c in vec.items():
                    m, tj = divmod(flat, self.nparams)
                    if tj == j:
                        val[m] = c
                if val:
                    i1, i2 = divmod(r, a.dim)
                    f.set_value((i1, i2), val)
            out.append(f)
        return out


def deform_class(d):
    """The class of β_1 in HH²(a, a⊗T*)."""
    beta = d.beta_cochain(1)
    return ExtClass2(d.algebra, d.nparams, beta)


def equivalence_witness(d1, d2, rng=None):
    """γ: a -> a⊗T* with β1 - β2 = δγ, verified to give an O-algebra
    isomorphism id+γ carrying ⋆1 to ⋆2; None when the classes differ."""
    if d1.algebra is not d2.algebra or d1.ring.n != d2.ring.n:
        raise DeformationError("deformations not over the same data")
    if d1.order != 1 or d2.order != 1:
        raise DeformationError("equivalence witness implemented for N = 1")
    diff = d1.beta_cochain(1) - d2.beta_cochain(1)
    ctx = HochschildContext(d1.algebra, d1.beta_cochain(1).coefficients)
    gamma = ctx.coboundary_preimage(diff)
    if gamma is None:
        return None
    if rng is not None:
        # any 1-cocycle shift gives another valid witness
        for rep in ctx.hh(1).representatives:
            c = rat(rng.randint(-1, 1))
            if c:
                gamma = gamma + rep.scale(c)
    _verify_equivalence(d1, d2, gamma)
    return gamma


def _verify_equivalence(d1, d2, gamma):
    """Check φ = id + γ intertwines the two star products and is invertible."""
    a = d1.algebra
    n = d1.nparams
    A1, A2 = d1.build_algebra(), d2.build_algebra()
    nm = d1.ring.dim
    deg1 = d1.ring.monomials_of_degree(1)
    cols = []
    for i in range(a.dim):
        for alpha_idx, alpha in enumerate(d1.ring.monomials):
            col = {i * nm + alpha_idx: ONE}
            if sum(alpha) == 0:
                gv = gamma.value((i,))
                for flat, c in gv.items():
                    m, tj = divmod(flat, n)
                    col[m * nm + d1.ring.index[deg1[tj]]] = \
                        col.get(m * nm + d1.ring.index[deg1[tj]], ZERO) + c
            cols.append({k: v for k, v in col.items() if v})
    phi = Matrix.from_columns(A2.dim, cols)
    if rank_of(phi) != A1.dim:
        raise DeformationError("id+γ is not invertible")
    for i in range(A1.dim):
        for j in range(A1.dim):
            lhs = phi.apply(A1.mul[i][j])
            rhs = A2.product(phi.column(i), phi.column(j))
            if lhs != rhs:
                raise DeformationError("id+γ does not intertwine the products")


# ---------------------------------------------------------------------------
# four-term sequences

class FourTermSequence:
    """0 -> M --nu--> E1 --u--> E0 --mm--> Q -> 0 of a-bimodules."""

    def __init__(self, bimodules, maps, name="sequence", check=True):
        self.M, self.E1, self.E0, self.Q = bimodules
        self.nu, self.u, self.mm = maps
        self.name = name
        if check:
            self.validate()

    def validate(self):
        if (self.u @ self.nu).nnz() or (self.mm @ self.u).nnz():
            raise DeformationError("%s: not a complex" % self.name)
        # bimodule map property over the left algebra of M
        alg = self.M.left_algebra
        for pairs, f in (((self.M, self.E1), self.nu),
                         ((self.E1, self.E0), self.u),
                         ((self.E0, self.Q), self.mm)):
            src, dst = pairs
            for g in range(alg.dim):
                if f @ src.left[g] != dst.left[g] @ f:
                    raise DeformationError("%s: map not left-linear" % self.name)
                if f @ src.right[g] != dst.right[g] @ f:
                    raise DeformationError("%s: map not right-linear" % self.name)
        failures = self.exactness_failures()
        if failures:
            raise DeformationError("%s: exactness fails at %s"
                                   % (self.name, failures))

    def exactness_failures(self):
        out = []
        if rank_of(self.nu) != self.M.dim:
            out.append("M")
        ker_u = self.E1.dim - rank_of(self.u)
        if ker_u != rank_of(self.nu):
            out.append("E1")
        ker_m = self.E0.dim - rank_of(self.mm)
        if ker_m != rank_of(self.u):
            out.append("E0")
        if rank_of(self.mm) != self.Q.dim:
            out.append("Q")
        return out


def sequence_IA(d):
    """0 -> a⊗T* -> k⊗I_A⊗k -> a⊗a -> a -> 0 for a first-order deformation."""
    return _sequence_IA_with_internals(d)[0]


def _sequence_IA_with_internals(d):
    if d.order != 1:
        raise DeformationError("sequence_IA needs a first-order deformation")
    a = d.algebra
    n = d.nparams
    A = d.build_algebra()
    I = multiplication_kernel(A)
    Ibm = I.as_bimodule()
    inc_solver = Solver(I.inclusion)
    # kill T* on either side: subspace (t_j·I + I·t_j) in I-coordinates
    sub = Echelon()
    sub_cols = []
    tj_embeds = []
    for j in range(n):
        tj = {k * d.ring.dim + d.ring.index[d.ring.t(j)]: c for k, c in a.unit.items()}
        tj_embeds.append(tj)
        for mats in (Ibm.left, Ibm.right):
            for g, c0 in tj.items():
                for col in range(I.dim):
                    v = vec_scale(mats[g].columns[col], c0)
                    if v and sub.add(v) is None:
                        sub_cols.append(v)
    sub_m = Matrix.from_columns(I.dim, sub_cols)
    qdim, proj, sec = quotient_space(I.dim, sub_m)
    # Q as an a-bimodule via lifts x -> x⊗1
    left = []
    right = []
    for g in range(a.dim):
        emb = d.embed({g: ONE})
        lmat = _action_through(Ibm.left, emb, I.dim)
        rmat = _action_through(Ibm.right, emb, I.dim)
        left.append(proj @ (lmat @ sec))
        right.append(proj @ (rmat @ sec))
    Qbm = Bimodule(a, a, qdim, left, right, name="k⊗I_A⊗k")
    Mbm = sym1_bimodule(a, n)
    E0 = outer_bimodule(a)
    Qa = regular_bimodule(a)
    # nu: a⊗t_j -> class of (t_j ⋆ x)⊗1 - 1⊗(x ⋆ t_j)
    nu_cols = []
    dimA = A.dim
    unitA = A.unit
    for i in range(a.dim):
        for j in range(n):
            ta = A.product(tj_embeds[j], d.embed({i: ONE}))
            at = A.product(d.embed({i: ONE}), tj_embeds[j])
            big = {}
            for p, c in ta.items():
                for q, c2 in unitA.items():
                    big[p * dimA + q] = big.get(p * dimA + q, ZERO) + c * c2
            for q, c in at.items():
                for p, c2 in unitA.items():
                    big[p * dimA + q] = big.get(p * dimA + q, ZERO) - c * c2
            big = {k: v for k, v in big.items() if v}
            icoord = inc_solver.solve(big)
            if icoord is None:
                raise DeformationError("ν image escapes I_A")
            nu_cols.append(proj.apply(icoord))
    nu = Matrix.from_columns(qdim, nu_cols)
    # u: induced by I_A ⊂ A⊗A -> a⊗a
    red = d.reduction_matrix()
    red2_cols = []
    for p in range(dimA):
        rp = red.column(p)
        for q in range(dimA):
            rq = red.column(q)
            col = {}
            for x, c in rp.items():
                for y, c2 in rq.items():
                    col[x * a.dim + y] = c * c2
            red2_cols.append(col)
    red2 = Matrix.from_columns(a.dim * a.dim, red2_cols)
    u = (red2 @ I.inclusion) @ sec
    mm = a.multiplication_matrix()
    seq = FourTermSequence((Mbm, Qbm, E0, Qa), (nu, u, mm), name="I_A sequence")
    return seq, (proj, sec)


def _action_through(mats, vec, dim):
    out = Matrix.zero(dim, dim)
    for g, c in vec.items():
        for col in range(dim):
            vec_axpy_inplace(out.columns[col], c, mats[g].columns[col])
    return out


# ---------------------------------------------------------------------------
# extension class of a four-term sequence (bar-resolution lifting)

def ext2_class_of_sequence(s, rng=None):
    """Lift id through the sequence along the bar resolution of a; the
    resulting normalized 2-cocycle represents the extension class."""
    a = s.Q.left_algebra
    if s.Q.dim != a.dim:
        raise DeformationError("tail of the sequence must be the algebra")
    # f0: a⊗a -> E0 bimodule map with mm∘f0 = multiplication
    mm_solver = Solver(s.mm)
    e0 = mm_solver.solve(dict(a.unit))
    if e0 is None:
        raise DeformationError("tail map is not surjective")
    if rng is not None:
        e0 = _shift_by_kernel(e0, s.u, rng)
    u_solver = Solver(s.u)
    w = []
    for y in range(a.dim):
        target = vec_sub_(s.E0.act_left({y: ONE}, e0), s.E0.act_right(e0, {y: ONE}))
        wy = u_solver.solve(target)
        if wy is None:
            raise DeformationError("lifting through E1 failed")
        if rng is not None:
            wy = _shift_by_kernel(wy, s.nu, rng)
        w.append(wy)
    nu_solver = Solver(s.nu)
    M = s.M
    beta = Cochain(a, M, 2)
    for y in range(a.dim):
        for z in range(a.dim):
            t1 = s.E1.act_left({y: ONE}, w[z])
            t2 = {}
            for k, c in a.mul[y][z].items():
                vec_axpy_inplace(t2, c, w[k])
            t3 = s.E1.act_right(w[y], {z: ONE})
            val = vec_sub_(vec_sub_(vec_add_(t1, t3), t2), {})
            coords = nu_solver.solve(val)
            if coords is None:
                raise DeformationError("second lifting step escapes M")
            beta.set_value((y, z), coords)
    ctx = HochschildContext(a, M)
    if not differential(beta).is_zero():
        raise DeformationError("extension class construction is not a cocycle")
    beta = ctx.normalize_cocycle(beta)
    nparams = M.dim // a.dim
    return ExtClass2(a, nparams, beta, context=ctx)


def _shift_by_kernel(vec, incoming, rng):
    """Add a random element of the image of `incoming` (the lift freedom)."""
    out = dict(vec)
    for j in range(incoming.cols):
        c = rat(rng.randint(-1, 1))
        if c:
            vec_axpy_inplace(out, c, incoming.column(j))
    return out


def vec_add_(u, v):
    out = dict(u)
    vec_axpy_inplace(out, ONE, v)
    return out


def vec_sub_(u, v):
    out = dict(u)
    vec_axpy_inplace(out, -ONE, v)
    return out


# ---------------------------------------------------------------------------
# the conormal (CQ) sequence and its splice (diag)

class CQData:
    def __init__(self, quotient_algebra, jj_dim, conormal_dims, cq_exact, diag):
        self.quotient_algebra = quotient_algebra
        self.jj_dim = jj_dim
        self.conormal_dims = conormal_dims   # (dim J/J², dim T, dim I_a)
        self.cq_exact = cq_exact
        self.diag = diag
        # construction internals used by the reduction-to-(I_A) check
        self._aproj = self._asec = None
        self._jj_proj = self._jj_sec = None
        self._tproj = self._tsec = None
        self._dimI = None


def ideal_closure(A, gens_matrix):
    """Two-sided ideal generated by the given column vectors."""
    ech = Echelon()
    frontier = []
    for j in range(gens_matrix.cols):
        col = gens_matrix.column(j)
        if ech.add(col) is None:
            frontier.append(col)
    while frontier:
        new = []
        for v in frontier:
            for g in range(A.dim):
                for w in (A.product({g: ONE}, v), A.product(v, {g: ONE})):
                    if w and ech.add(w) is None:
                        new.append(w)
        frontier = new
    cols = [dict(ech.pivots[l]) for l in sorted(ech.pivots)]
    return Matrix.from_columns(A.dim, cols)


def is_two_sided_ideal(A, basis_matrix):
    ech = Echelon()
    for j in range(basis_matrix.cols):
        ech.add(basis_matrix.column(j))
    for j in range(basis_matrix.cols):
        v = basis_matrix.column(j)
        for g in range(A.dim):
            if not ech.contains(A.product({g: ONE}, v)):
                return False
            if not ech.contains(A.product(v, {g: ONE})):
                return False
    return True


def quotient_algebra(A, j_basis):
    """a = A/J with projection and section matrices."""
    qdim, proj, sec = quotient_space(A.dim, j_basis)
    mul = [[None] * qdim for _ in range(qdim)]
    for i in range(qdim):
        for j in range(qdim):
            mul[i][j] = proj.apply(A.product(sec.column(i), sec.column(j)))
    labels = ["q%d" % i for i in range(qdim)]
    a = AssocAlgebra(labels, mul, proj.apply(dict(A.unit)),
                     name="%s/J" % A.name)
    return a, proj, sec


def cq_sequence(A, j_basis):
    """The conormal sequence (CQ) for (A, J) and its splice (diag).

    j_basis: Matrix whose columns span J (must be a two-sided ideal).
    """
    if not is_two_sided_ideal(A, j_basis):
        raise DeformationError("J is not a two-sided ideal")
    j_basis = _independent_cols(j_basis)
    a, aproj, asec = quotient_algebra(A, j_basis)
    # J/J^2
    jsq = Echelon()
    jsq_cols = []
    for i in range(j_basis.cols):
        for j in range(j_basis.cols):
            v = A.product(j_basis.column(i), j_basis.column(j))
            if v and jsq.add(v) is None:
                jsq_cols.append(v)
    j_solver = Solver(j_basis)
    jsq_in_j = []
    for v in jsq_cols:
        x = j_solver.solve(v)
        if x is None:
            raise DeformationError("J² escapes J")
        jsq_in_j.append(x)
    jj_dim, jj_proj, jj_sec = quotient_space(
        j_basis.cols, Matrix.from_columns(j_basis.cols, jsq_in_j))
    # the conormal middle term: a ⊗_A I_A ⊗_A a as an explicit tensor quotient
    I = multiplication_kernel(A)
    Ibm = I.as_bimodule()
    dimI = I.dim
    da = a.dim
    ambient = da * dimI * da

    def amb(x, i, y):
        return (x * dimI + i) * da + y

    gens = []
    gen_set = A.generating_set()
    for r in gen_set:
        # left: (x·r)⊗ι⊗y - x⊗(r·ι)⊗y ; right: x⊗(ι·r)⊗y - x⊗ι⊗(r·y)
        rbar = aproj.apply({r: ONE})
        lmat = Ibm.left[r]
        rmat = Ibm.right[r]
        for x in range(da):
            xr = a.product({x: ONE}, rbar)
            for i in range(dimI):
                for y in range(da):
                    g = {}
                    for xx, c in xr.items():
                        g[amb(xx, i, y)] = c
                    for ii, c in lmat.columns[i].items():
                        g[amb(x, ii, y)] = g.get(amb(x, ii, y), ZERO) - c
                    g = {k: v for k, v in g.items() if v}
                    if g:
                        gens.append(g)
        for x in range(da):
            for i in range(dimI):
                ir = rmat.columns[i]
                for y in range(da):
                    ry = a.product(rbar, {y: ONE})
                    g = {}
                    for ii, c in ir.items():
                        g[amb(x, ii, y)] = c
                    for yy, c in ry.items():
                        g[amb(x, i, yy)] = g.get(amb(x, i, yy), ZERO) - c
                    g = {k: v for k, v in g.items() if v}
                    if g:
                        gens.append(g)
    ech = Echelon()
    for g in gens:
        ech.add(g)
    rel_cols = [dict(ech.pivots[l]) for l in sorted(ech.pivots)]
    tdim, tproj, tsec = quotient_space(ambient, Matrix.from_columns(ambient, rel_cols))
    # d: J/J² -> T, induced by j -> 1⊗(j⊗1 - 1⊗j)⊗1
    inc_solver = Solver(I.inclusion)
    d_cols = []
    unit_a = a.unit
    for k in range(jj_dim):
        jvec = j_basis.apply(jj_sec.column(k))
        big = {}
        for p, c in jvec.items():
            for q, c2 in A.unit.items():
                big[p * A.dim + q] = big.get(p * A.dim + q, ZERO) + c * c2
                big[q * A.dim + p] = big.get(q * A.dim + p, ZERO) - c * c2
        big = {kk: v for kk, v in big.items() if v}
        icoord = inc_solver.solve(big)
        if icoord is None:
            raise DeformationError("de Rham image escapes I_A")
        col = {}
        for x, cx in unit_a.items():
            for i, ci in icoord.items():
                for y, cy in unit_a.items():
                    col[amb(x, i, y)] = col.get(amb(x, i, y), ZERO) + cx * ci * cy
        d_cols.append(tproj.apply({kk: v for kk, v in col.items() if v}))
    d_map = Matrix.from_columns(tdim, d_cols)
    # T -> I_a: x⊗ι⊗y -> x·(π⊗π ι)·y
    Ia = multiplication_kernel(a)
    Ia_solver = Solver(Ia.inclusion)
    red2 = _two_sided_reduction(A, a, aproj)
    out_cols = []
    outer = outer_bimodule(a)
    for t in range(tdim):
        v = tsec.column(t)
        acc = {}
        for key, c in v.items():
            xy, y = divmod(key, da)
            x, i = divmod(xy, dimI)
            red = red2.apply(I.inclusion.column(i))
            moved = outer.act_right(outer.act_left({x: ONE}, red), {y: ONE})
            vec_axpy_inplace(acc, c, moved)
        coords = Ia_solver.solve(acc)
        if coords is None:
            raise DeformationError("conormal image escapes I_a")
        out_cols.append(coords)
    to_Ia = Matrix.from_columns(Ia.dim, out_cols)
    # well-definedness of to_Ia on T (it must kill the relation span)
    for rcol in rel_cols:
        acc = {}
        for key, c in rcol.items():
            xy, y = divmod(key, da)
            x, i = divmod(xy, dimI)
            red = red2.apply(I.inclusion.column(i))
            moved = outer.act_right(outer.act_left({x: ONE}, red), {y: ONE})
            vec_axpy_inplace(acc, c, moved)
        if acc:
            raise DeformationError("conormal map not well-defined on T")
    # exactness of (CQ): 0 -> J/J² -> T -> I_a -> 0
    cq_exact = (rank_of(d_map) == jj_dim
                and tdim - rank_of(to_Ia) == rank_of(d_map)
                and rank_of(to_Ia) == Ia.dim)
    # splice into (diag): 0 -> J/J² -> T -> a⊗a -> a -> 0
    u = I_to_outer = Ia.inclusion @ to_Ia
    jj_bm = _jj_bimodule(a, A, j_basis, jj_dim, jj_proj, jj_sec, aproj, asec)
    t_bm = _conormal_bimodule(a, tdim, tproj, tsec, da, dimI)
    diag = FourTermSequence((jj_bm, t_bm, outer_bimodule(a), regular_bimodule(a)),
                            (d_map, u, a.multiplication_matrix()),
                            name="diag sequence")
    data = CQData(a, jj_dim, (jj_dim, tdim, Ia.dim), cq_exact, diag)
    data._aproj, data._asec = aproj, asec
    data._jj_proj, data._jj_sec = jj_proj, jj_sec
    data._tproj, data._tsec = tproj, tsec
    data._dimI = dimI
    return data


def _independent_cols(m):
    ech = Echelon()
    cols = []
    for j in range(m.cols):
        c = m.column(j)
        if ech.add(c) is None:
            cols.append(dict(c))
    return Matrix.from_columns(m.rows, cols)


def _two_sided_reduction(A, a, aproj):
    """π⊗π: A⊗A -> a⊗a."""
    cols = []
    for p in range(A.dim):
        rp = aproj.column(p)
        for q in range(A.dim):
            rq = aproj.column(q)
            col = {}
            for x, c in rp.items():
                for y, c2 in rq.items():
                    col[x * a.dim + y] = c * c2
            cols.append(col)
    return Matrix.from_columns(a.dim * a.dim, cols)


def _jj_bimodule(a, A, j_basis, jj_dim, jj_proj, jj_sec, aproj, asec):
    j_solver = Solver(j_basis)
    left = []
    right = []
    for g in range(a.dim):
        lift = asec.column(g)
        lcols = []
        rcols = []
        for k in range(jj_dim):
            jvec = j_basis.apply(jj_sec.column(k))
            lv = A.product(lift, jvec)
            rv = A.product(jvec, lift)
            lx = j_solver.solve(lv)
            rx = j_solver.solve(rv)
            if lx is None or rx is None:
                raise DeformationError("J not stable under multiplication")
            lcols.append(jj_proj.apply(lx))
            rcols.append(jj_proj.apply(rx))
        left.append(Matrix.from_columns(jj_dim, lcols))
        right.append(Matrix.from_columns(jj_dim, rcols))
    return Bimodule(a, a, jj_dim, left, right, name="J/J²")


def _conormal_bimodule(a, tdim, tproj, tsec, da, dimI):
    left = []
    right = []
    for g in range(a.dim):
        lcols = []
        rcols = []
        for t in range(tdim):
            v = tsec.column(t)
            lacc = {}
            racc = {}
            for key, c in v.items():
                xy, y = divmod(key, da)
                x, i = divmod(xy, dimI)
                for xx, cc in a.mul[g][x].items():
                    k2 = (xx * dimI + i) * da + y
                    lacc[k2] = lacc.get(k2, ZERO) + c * cc
                for yy, cc in a.mul[y][g].items():
                    k2 = (x * dimI + i) * da + yy
                    racc[k2] = racc.get(k2, ZERO) + c * cc
            lcols.append(tproj.apply({k: v2 for k, v2 in lacc.items() if v2}))
            rcols.append(tproj.apply({k: v2 for k, v2 in racc.items() if v2}))
        left.append(Matrix.from_columns(tdim, lcols))
        right.append(Matrix.from_columns(tdim, rcols))
    return Bimodule(a, a, tdim, left, right, name="a⊗I_A⊗a")


def deformation_ideal_basis(d):
    """J = m·A inside A = a⊗O_1 (columns in A-coordinates)."""
    A = d.build_algebra()
    cols = []
    nm = d.ring.dim
    for i in range(d.algebra.dim):
        for alpha_idx, alpha in enumerate(d.ring.monomials):
            if sum(alpha) > 0:
                cols.append({i * nm + alpha_idx: ONE})
    return Matrix.from_columns(A.dim, cols)


def diag_reduces_to_IA(d):
    """For J = m·A (so J² = 0 and J/J² = a⊗T*), verify the spliced (diag)
    is isomorphic to sequence_IA(d): explicit isomorphisms on every term
    making all squares commute.  Returns the middle-term isomorphism."""
    if d.order != 1:
        raise DeformationError("reduction check needs a first-order deformation")
    seq, ia_internals = _sequence_IA_with_internals(d)
    A = d.build_algebra()
    j_basis = deformation_ideal_basis(d)
    cq = cq_sequence(A, j_basis)
    dg = cq.diag
    a = d.algebra
    aq = cq.quotient_algebra
    # identify a with A/J: x -> class of x⊗1
    nm = d.ring.dim
    embed_m = Matrix.from_columns(A.dim, [{i * nm: ONE} for i in range(a.dim)])
    P = cq._aproj @ embed_m
    if rank_of(P) != a.dim:
        raise DeformationError("algebra identification is singular")
    for i in range(a.dim):
        for j in range(a.dim):
            if P.apply(a.mul[i][j]) != aq.product(P.column(i), P.column(j)):
                raise DeformationError("algebra identification not multiplicative")
    P2 = _tensor_square(P, a.dim, aq.dim)
    # alpha: a⊗T* -> J/J², x⊗t_j -> class of t_j·x̂ in J
    j_solver = Solver(j_basis)
    n = d.nparams
    alpha_cols = []
    for i in range(a.dim):
        for j in range(n):
            tj = {k * nm + d.ring.index[d.ring.t(j)]: c for k, c in a.unit.items()}
            jvec = A.product(tj, d.embed({i: ONE}))
            x = j_solver.solve(jvec)
            if x is None:
                raise DeformationError("t_j·x escapes J")
            alpha_cols.append(cq._jj_proj.apply(x))
    alpha = Matrix.from_columns(dg.M.dim, alpha_cols)
    # beta: k⊗I⊗k -> T, class(ι) -> class(1⊗ι⊗1)
    ia_proj, ia_sec = ia_internals
    da = aq.dim
    dimI = cq._dimI
    beta_cols = []
    for q in range(seq.E1.dim):
        icoord = ia_sec.column(q)
        col = {}
        for x, cx in aq.unit.items():
            for i, ci in icoord.items():
                for y, cy in aq.unit.items():
                    key = (x * dimI + i) * da + y
                    col[key] = col.get(key, ZERO) + cx * ci * cy
        beta_cols.append(cq._tproj.apply({k: v for k, v in col.items() if v}))
    beta = Matrix.from_columns(dg.E1.dim, beta_cols)
    ok = (rank_of(alpha) == seq.M.dim == dg.M.dim
          and rank_of(beta) == seq.E1.dim == dg.E1.dim
          and (beta @ seq.nu) == (dg.nu @ alpha)
          and (dg.u @ beta) == (P2 @ seq.u)
          and (dg.mm @ P2) == (P @ seq.mm))
    if not ok:
        raise DeformationError("(diag) does not reduce to (I_A)")
    return beta


def _tensor_square(P, da, dq):
    cols = []
    for i in range(da):
        ci = P.column(i)
        for j in range(da):
            cj = P.column(j)
            col = {}
            for x, c in ci.items():
                for y, c2 in cj.items():
                    col[x * dq + y] = c * c2
            cols.append(col)
    return Matrix.from_columns(dq * dq, cols)


# ---------------------------------------------------------------------------
# order-by-order extension and obstructions

def order_failure(d, k):
    """F_k(a,b,c) = Σ_{i+j=k, i,j≥1} (β_i(β_j(a,b),c) - β_i(a,β_j(b,c))),
    a 3-cochain valued in a⊗Sym^k(T*); validity to order k ⟺ δβ_k = F_k."""
    a = d.algebra
    ring = BaseRing(d.ring.n, max(k, 1))
    monos = ring.monomials_of_degree(k)
    midx = {m: i for i, m in enumerate(monos)}
    M = trivial_coefficient_bimodule(a, len(monos),
                                     [ring.monomial_label(m) for m in monos])
    F = Cochain(a, M, 3)
    for i_ord in range(1, k):
        j_ord = k - i_ord
        bi = d.corrections.get(i_ord, {})
        bj = d.corrections.get(j_ord, {})
        if not bi or not bj:
            continue
        for (x, y), inner in bj.items():
            for z in range(a.dim):
                # β_i(β_j(x,y), z)
                acc = {}
                for (m, mono), c in inner.items():
                    for (m2, mono2), c2 in bi.get((m, z), {}).items():
                        mm2 = tuple(p + q for p, q in zip(mono, mono2))
                        key = m2 * len(monos) + midx[mm2]
                        acc[key] = acc.get(key, ZERO) + c * c2
                F.add_value((x, y, z), {kk: v for kk, v in acc.items() if v})
        for (y, z), inner in bj.items():
            for x in range(a.dim):
                # -β_i(x, β_j(y,z))
                acc = {}
                for (m, mono), c in inner.items():
                    for (m2, mono2), c2 in bi.get((x, m), {}).items():
                        mm2 = tuple(p + q for p, q in zip(mono, mono2))
                        key = m2 * len(monos) + midx[mm2]
                        acc[key] = acc.get(key, ZERO) - c * c2
                F.add_value((x, y, z), {kk: v for kk, v in acc.items() if v})
    return F


def order_residuals(d):
    """δβ_k - F_k for k = 1..N; all zero iff the star product is associative."""
    out = {}
    for k in range(1, d.order + 1):
        res = differential(d.beta_cochain(k)) - order_failure(d, k)
        out[k] = res
    return out


def extend_order(d, rng=None):
    """Try to extend a valid order-k deformation to order k+1.

    Returns (obstruction, extended): obstruction is the HH³ class of the
    order-(k+1) failure term; extended is a StarDeformation of order k+1
    when the obstruction vanishes, else None.
    """
    from .hochschild import HochschildClass
    k1 = d.order + 1
    a = d.algebra
    F = order_failure(d, k1)
    ctx = HochschildContext(a, F.coefficients)
    if not differential(F).is_zero():
        raise DeformationError("failure term is not a 3-cocycle")
    obstruction = HochschildClass(ctx, F)
    sol = ctx.coboundary_preimage(F)
    if sol is None:
        return obstruction, None
    if rng is not None:
        reps = ctx.hh(2).representatives
        for rep in reps:
            c = rat(rng.randint(-1, 1))
            if c:
                sol = sol + rep.scale(c)
    # normalize while preserving δsol (γ(x) = sol(1, x) works because
    # δsol = F vanishes on unit slots)
    gamma = Cochain(a, F.coefficients, 1)
    for x in range(a.dim):
        gamma.set_value((x,), sol.value_with_vector(0, a.unit, (x,)))
    sol = sol - differential(gamma)
    if not sol.is_normalized():
        raise DeformationError("order-extension normalization failed")
    # convert the solved β_{k+1} into a correction table
    ring1 = BaseRing(d.ring.n, k1)
    monos = ring1.monomials_of_degree(k1)
    table = {}
    for r, vec in sol.values.items():
        i, j = divmod(r, a.dim)
        val = {}
        for flat, c in vec.items():
            m, mi = divmod(flat, len(monos))
            val[(m, monos[mi])] = c
        table[(i, j)] = val
    corr = {kk: dict(tbl) for kk, tbl in d.corrections.items()}
    if table:
        corr[k1] = table
    extended = StarDeformation(a, ring1, corr, name=d.name + "+1")
    return obstruction, extended

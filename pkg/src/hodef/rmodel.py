"""The weight-truncated Koszul–de Rham dg-algebra R.

R^{-i} = {f ⊗ ω : f polynomial on T, ω ∈ ∧^i T*, deg f + i ≤ W} with
differential the contraction ι_ξ against the Euler vector field.  The
weight (poly degree + form degree) is preserved by ι_ξ and by the de Rham
differential, and ι_ξ∘d_dR + d_dR∘ι_ξ = weight·id on each weight piece, so
every positive-weight piece is exact and the truncation stays acyclic.
"""

import itertools

from .dgalg import DgAlgebra, DgError
from .linalg import Matrix, rank_of
from .rational import ZERO, ONE, rat


class RModelError(Exception):
    pass


def _exps(n, total):
    if n == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _exps(n - 1, total - first):
            yield (first,) + rest


def _merge_sign(s, t):
    merged = tuple(sorted(s + t))
    perm = list(s + t)
    sign = 1
    for i in range(len(perm)):
        for j in range(len(perm) - 1 - i):
            if perm[j] > perm[j + 1]:
                perm[j], perm[j + 1] = perm[j + 1], perm[j]
                sign = -sign
    return merged, sign


class RModel:
    """Basis: (alpha, S) = x^alpha dx_S, degree -|S|, weight |alpha| + |S| ≤ W."""

    def __init__(self, n, weight_cap):
        if weight_cap < 1:
            raise RModelError("weight cap must be ≥ 1")
        self.n = n
        self.W = weight_cap
        self.basis = []
        for w in range(weight_cap + 1):
            for i in range(min(w, n) + 1):
                for S in itertools.combinations(range(1, n + 1), i):
                    for alpha in sorted(_exps(n, w - i), reverse=True):
                        self.basis.append((alpha, S))
        self.index = {b: k for k, b in enumerate(self.basis)}
        self.dim = len(self.basis)
        self.degrees = [-len(S) for (_, S) in self.basis]
        self.weights = [sum(a) + len(S) for (a, S) in self.basis]
        self.labels = [self._label(b) for b in self.basis]
        self.mul = self._build_mul()
        self.diff = self._build_contraction()
        self.de_rham = self._build_de_rham()
        self.unit = {self.index[((0,) * n, ())]: ONE}
        self.dg = DgAlgebra(self.degrees, self.mul, self.unit, self.diff,
                            labels=self.labels, name="R(n=%d,W=%d)" % (n, weight_cap))
        self.validate()

    def _label(self, b):
        alpha, S = b
        parts = []
        for j, e in enumerate(alpha):
            if e == 1:
                parts.append("x%d" % (j + 1))
            elif e > 1:
                parts.append("x%d^%d" % (j + 1, e))
        for g in S:
            parts.append("dx%d" % g)
        return "·".join(parts) if parts else "1"

    def _build_mul(self):
        mul = {}
        for k1, (a1, s1) in enumerate(self.basis):
            for k2, (a2, s2) in enumerate(self.basis):
                if set(s1) & set(s2):
                    continue
                alpha = tuple(x + y for x, y in zip(a1, a2))
                merged, sign = _merge_sign(s1, s2)
                if sum(alpha) + len(merged) > self.W:
                    continue
                mul[(k1, k2)] = {self.index[(alpha, merged)]: rat(sign)}
        return mul

    def _build_contraction(self):
        """ι_ξ(x^α dx_{j1}..dx_{ji}) = Σ_m (-1)^{m-1} x^α x_{jm} dx_{..ĵm..}."""
        cols = []
        for (alpha, S) in self.basis:
            col = {}
            for m, g in enumerate(S):
                up = list(alpha)
                up[g - 1] += 1
                rest = S[:m] + S[m + 1:]
                key = self.index[(tuple(up), rest)]
                sgn = ONE if m % 2 == 0 else -ONE
                cur = col.get(key, ZERO) + sgn
                if cur:
                    col[key] = cur
                else:
                    col.pop(key, None)
            cols.append(col)
        return Matrix.from_columns(self.dim, cols)

    def _build_de_rham(self):
        """d_dR(x^α dx_S) = Σ_j α_j x^{α-e_j} dx_j ∧ dx_S (weight-preserving)."""
        cols = []
        for (alpha, S) in self.basis:
            col = {}
            for j in range(self.n):
                if alpha[j] == 0 or (j + 1) in S:
                    continue
                down = list(alpha)
                down[j] -= 1
                merged, sign = _merge_sign((j + 1,), S)
                key = self.index[(tuple(down), merged)]
                cur = col.get(key, ZERO) + rat(alpha[j] * sign)
                if cur:
                    col[key] = cur
                else:
                    col.pop(key, None)
            cols.append(col)
        return Matrix.from_columns(self.dim, cols)

    def epsilon(self):
        """ε_R: R -> k, the constant term."""
        cols = [{} for _ in range(self.dim)]
        cols[self.index[((0,) * self.n, ())]] = {0: ONE}
        return Matrix.from_columns(1, cols)

    def validate(self):
        # (i) non-positive degrees and R^0 = O_W
        if any(d > 0 for d in self.degrees):
            raise RModelError("positive degree in R")
        r0 = sum(1 for d in self.degrees if d == 0)
        from math import comb
        if r0 != comb(self.n + self.W, self.W):
            raise RModelError("R^0 is not the truncated polynomial ring")
        # graded-commutative
        if not self.dg.is_graded_commutative():
            raise RModelError("R is not graded-commutative")
        # Euler identity per weight: ι_ξ d_dR + d_dR ι_ξ = w·id on weight w
        lhs = (self.diff @ self.de_rham) + (self.de_rham @ self.diff)
        for k in range(self.dim):
            expect = {k: rat(self.weights[k])} if self.weights[k] else {}
            if lhs.columns[k] != expect:
                raise RModelError("Euler identity fails at basis %d" % k)
        # (ii) H^0 = k and H^{<0} = 0
        dims = self.dg.cohomology_dims()
        if dims != {0: 1}:
            raise RModelError("R has wrong cohomology: %s" % dims)
        # (iii) freeness within the weight window: the poly-degree-m slice of
        # R^{-i} matches the free model O_m ⊗ ∧^i for m + i ≤ W
        for i in range(self.n + 1):
            for m in range(self.W - i + 1):
                count = sum(1 for (a, S) in self.basis
                            if len(S) == i and sum(a) == m)
                expect = comb(self.n + m - 1, m) * comb(self.n, i) if m > 0 else comb(self.n, i)
                if count != expect:
                    raise RModelError("freeness count fails at (i=%d, m=%d)" % (i, m))

    def weight_piece_exact(self, w):
        """Exactness of the weight-w piece (w ≥ 1) by direct rank count:
        dim of the piece = 2·rank of d restricted to it."""
        idx = [k for k in range(self.dim) if self.weights[k] == w]
        if not idx:
            return True
        total_rank = rank_of(Matrix.from_columns(
            self.dim, [self.diff.columns[k] for k in idx]))
        return 2 * total_rank == len(idx)


def build_r_model(n, weight_cap):
    return RModel(n, weight_cap)


def check_lemma_R(r):
    """Lemma on R⊗_O R: (i) multiplication gives a degree-wise isomorphism
    R_Δ ⊗ ι(Λ) ≅ R⊗_O R within the weight window; (ii) ker(m_R) is the
    ideal generated by ι(Λ_{<0}).  Delegates the R⊗_O R construction to the
    trivial-deformation Ra⊗_A Ra engine (a = Q, A = O_W)."""
    from .algebra import preset_catalog
    from .deformation import trivial_deformation
    from .formality import ResolutionRa, RaSquare
    a = preset_catalog("rationals")
    d = trivial_deformation(a, r.n, r.W)
    Ra = ResolutionRa(d, r)
    RR = RaSquare(Ra)
    return _lemma_checks(r, Ra, RR)


def _lemma_checks(r, Ra, RR):
    from .linalg import Echelon
    unit_idx = r.index[((0,) * r.n, ())]
    # subalgebra R_Δ: closure of {unit, t̂_j, δ_j = dx_j⊗1 + 1⊗dx_j}
    gens = [dict(RR.unit_vec)]
    for j in range(r.n):
        tj = tuple(1 if i == j else 0 for i in range(r.n))
        gens.append(RR.pair_class(r.index[(tj, ())], unit_idx))
    for j in range(r.n):
        dxj = r.index[((0,) * r.n, (j + 1,))]
        first = RR.pair_class(dxj, unit_idx)
        second = RR.pair_class(unit_idx, dxj)
        delta = dict(first)
        for k, c in second.items():
            cur = delta.get(k, ZERO) + c
            if cur:
                delta[k] = cur
            else:
                delta.pop(k, None)
        gens.append(delta)
    span = Echelon()
    basis_delta = []
    frontier = []
    for g in gens:
        if g and span.add(g) is None:
            basis_delta.append(g)
            frontier.append(g)
    while frontier:
        new = []
        for v in frontier:
            for g in gens:
                w = RR.multiply(v, g)
                if w and span.add(w) is None:
                    basis_delta.append(w)
                    new.append(w)
        frontier = new
    # ι(Λ) span: ordered products of the anti-diagonal generators
    iota_basis = [dict(RR.unit_vec)]
    import itertools as _it
    for rlen in range(1, r.n + 1):
        for S in _it.combinations(range(r.n), rlen):
            v = dict(RR.unit_vec)
            for j in S:
                v = RR.multiply(v, RR.iota_theta_vec(j))
            if v:
                iota_basis.append(v)
    # (i) multiplication map R_Δ ⊗ ι(Λ) -> RR: bijective within the window
    prod_ech = Echelon()
    independent = True
    count = 0
    for u in basis_delta:
        for v in iota_basis:
            w = RR.multiply(u, v)
            if w:
                count += 1
                if prod_ech.add(w) is not None:
                    independent = False
    iso_ok = independent and count == RR.dim and prod_ech.rank == RR.dim
    # (ii) ker(m_R) = ideal generated by ι(Λ_{<0})
    m = RR.mult_to_Ra()
    ker_dim = RR.dim - rank_of(m)
    ideal = Echelon()
    for v in iota_basis[1:]:
        for b in range(RR.dim):
            w = RR.multiply({b: ONE}, v)
            if w:
                ideal.add(w)
    contained = all(not m.apply(dict(p)) for p in ideal.pivots.values())
    kernel_ok = (ideal.rank == ker_dim) and contained
    return {"iso": iso_ok, "kernel_ideal": kernel_ok,
            "rr_dim": RR.dim, "r_delta_dim": len(basis_delta),
            "iota_dim": len(iota_basis), "ker_dim": ker_dim}

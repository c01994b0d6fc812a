"""Bounded cochain complexes of finite-dimensional graded spaces.

A GradedSpace records per-degree dimensions and basis labels; a
CochainComplex adds degree-(+1) differentials with d∘d = 0 enforced
exactly.  Cohomology, cones, canonical truncation and quasi-isomorphism
tests all reduce to the exact kernels in linalg.
"""

from .linalg import (Matrix, Echelon, Solver, rank_kernel_image, rank_of,
                     quotient_space, LinalgError)
from .rational import ONE, rat


class ComplexError(Exception):
    pass


class GradedSpace:
    """Finitely supported map degree -> (dimension, labels)."""

    def __init__(self, components):
        """components: dict degree -> dimension, or degree -> (dim, labels)."""
        self.dims = {}
        self.labels = {}
        for deg, val in components.items():
            if isinstance(val, tuple):
                dim, labels = val
            else:
                dim, labels = val, None
            if dim < 0:
                raise ComplexError("negative dimension in degree %d" % deg)
            if dim == 0:
                continue
            if labels is None:
                labels = ["%d:%d" % (deg, i) for i in range(dim)]
            if len(labels) != dim or len(set(labels)) != dim:
                raise ComplexError("bad labels in degree %d" % deg)
            self.dims[deg] = dim
            self.labels[deg] = list(labels)

    def dim(self, deg):
        return self.dims.get(deg, 0)

    def degrees(self):
        return sorted(self.dims)

    def total_dim(self):
        return sum(self.dims.values())

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.dims == other.dims


class CohomologyResult:
    """dimension, cocycle representatives, and projection to H^i.

    representatives: ambient-coordinates matrix (dim V^i x h).
    projection: (h x dim V^i) matrix vanishing on coboundaries and
    satisfying projection @ representatives = identity.
    """

    def __init__(self, dim, representatives, projection):
        self.dim = dim
        self.representatives = representatives
        self.projection = projection


class CochainComplex:
    def __init__(self, spaces, differentials, check=True):
        """spaces: GradedSpace; differentials: dict deg -> Matrix
        (V^deg -> V^{deg+1}).  Missing differentials are zero."""
        self.spaces = spaces
        self.differentials = {}
        for deg, m in differentials.items():
            if not m.nnz():
                continue
            if m.cols != spaces.dim(deg) or m.rows != spaces.dim(deg + 1):
                raise ComplexError("differential shape mismatch at degree %d" % deg)
            self.differentials[deg] = m
        if check:
            self.validate()

    def d(self, deg):
        m = self.differentials.get(deg)
        if m is None:
            return Matrix.zero(self.spaces.dim(deg + 1), self.spaces.dim(deg))
        return m

    def validate(self):
        for deg in self.spaces.degrees():
            dd = self.d(deg + 1) @ self.d(deg)
            if not dd.is_zero():
                raise ComplexError("d∘d != 0 at degree %d" % deg)

    def degrees(self):
        return self.spaces.degrees()

    def dim(self, deg):
        return self.spaces.dim(deg)

    def cohomology_dim(self, deg):
        n = self.dim(deg)
        if n == 0:
            return 0
        ker_dim = n - rank_of(self.d(deg))
        return ker_dim - rank_of(self.d(deg - 1))

    def cohomology_dims(self):
        return {deg: self.cohomology_dim(deg) for deg in self.degrees()
                if self.cohomology_dim(deg)}

    def cohomology(self, deg):
        """Full cohomology data at one degree (see CohomologyResult)."""
        n = self.dim(deg)
        if n == 0:
            return CohomologyResult(0, Matrix.zero(0, 0), Matrix.zero(0, 0))
        _, kernel, _, _ = rank_kernel_image(self.d(deg))
        image_prev = self.d(deg - 1)
        ech = Echelon()
        boundary_cols = []
        for col in image_prev.columns:
            if ech.add(col) is None:
                boundary_cols.append(dict(col))
        rep_cols = []
        for col in kernel.columns:
            if ech.add(col) is None:
                rep_cols.append(dict(col))
        h = len(rep_cols)
        reps = Matrix.from_columns(n, rep_cols)
        # projection rows solve P @ [B | R | C] = [0 | I | 0]; build the
        # tracked echelon once and read coefficients of the R-block.
        full = Echelon(track=True)
        for j, col in enumerate(boundary_cols):
            full.add(col, tag=("b", j))
        for j, col in enumerate(rep_cols):
            full.add(col, tag=("r", j))
        for i in range(n):
            if full.rank == n:
                break
            full.add({i: ONE}, tag=("c", i))
        proj_cols = []
        for i in range(n):
            residual, combo = full.reduce({i: ONE})
            if residual:
                raise ComplexError("cocycle/boundary/complement echelon incomplete")
            col = {}
            for tag, c in combo.items():
                if tag[0] == "r" and c:
                    col[tag[1]] = c
            proj_cols.append(col)
        projection = Matrix.from_columns(h, proj_cols)
        return CohomologyResult(h, reps, projection)

    def shift(self, k):
        """Degree shift: (C[k])^i = C^{i+k}, differential (-1)^k d."""
        spaces = GradedSpace({deg - k: (self.dim(deg), None) for deg in self.degrees()})
        sign = rat(1) if k % 2 == 0 else rat(-1)
        diffs = {deg - k: m.scale(sign) for deg, m in self.differentials.items()}
        return CochainComplex(spaces, diffs, check=False)


class ChainMap:
    def __init__(self, source, target, components, degree=0, check=True):
        """components: dict deg -> Matrix (source^deg -> target^{deg+degree})."""
        self.source = source
        self.target = target
        self.degree = degree
        self.components = {d: m for d, m in components.items() if m.nnz()}
        if check:
            self.validate()

    def component(self, deg):
        m = self.components.get(deg)
        if m is None:
            return Matrix.zero(self.target.dim(deg + self.degree), self.source.dim(deg))
        return m

    def validate(self):
        for deg in set(self.source.degrees()) | set(self.components):
            lhs = self.target.d(deg + self.degree) @ self.component(deg)
            rhs = self.component(deg + 1) @ self.source.d(deg)
            if self.degree % 2:
                rhs = rhs.scale(rat(-1))
            if lhs != rhs:
                raise ComplexError("not a chain map at degree %d" % deg)

    def is_quasi_iso(self):
        """Exact decision: induced map invertible on every H^i."""
        if self.degree != 0:
            return False
        for deg in sorted(set(self.source.degrees()) | set(self.target.degrees())):
            hs = self.source.cohomology(deg)
            ht = self.target.cohomology(deg)
            if hs.dim != ht.dim:
                return False
            if hs.dim == 0:
                continue
            induced = ht.projection @ (self.component(deg) @ hs.representatives)
            if rank_of(induced) != hs.dim:
                return False
        return True


def cone(f):
    """Mapping cone of a degree-0 chain map: Cone^i = M^{i+1} ⊕ N^i with
    d(m, x) = (-d m, f(m) + d x).  Returns (cone complex, inclusion N->Cone,
    projection Cone->M[1])."""
    if f.degree != 0:
        raise ComplexError("cone requires a degree-0 chain map")
    M, N = f.source, f.target
    degs = sorted(set(d - 1 for d in M.degrees()) | set(N.degrees()))
    dims = {deg: M.dim(deg + 1) + N.dim(deg) for deg in degs}
    spaces = GradedSpace({d: (n, None) for d, n in dims.items() if n})
    diffs = {}
    for deg in degs:
        m_dim, n_dim = M.dim(deg + 1), N.dim(deg)
        shift = M.dim(deg + 2)
        out = Matrix.zero(M.dim(deg + 2) + N.dim(deg + 1), m_dim + n_dim)
        dM = M.d(deg + 1)
        dN = N.d(deg)
        fc = f.component(deg + 1)
        for j in range(m_dim):
            col = {i: -v for i, v in dM.columns[j].items()}
            for i, v in fc.columns[j].items():
                col[shift + i] = v
            out.columns[j] = col
        for j in range(n_dim):
            out.columns[m_dim + j] = {shift + i: v for i, v in dN.columns[j].items()}
        diffs[deg] = out
    C = CochainComplex(spaces, diffs)
    incl = ChainMap(N, C, {deg: Matrix.from_columns(
        dims.get(deg, 0),
        [{M.dim(deg + 1) + i: ONE} for i in range(N.dim(deg))])
        for deg in N.degrees()})
    Mshift = M.shift(1)
    proj_comps = {}
    for deg in degs:
        if dims[deg] and M.dim(deg + 1):
            cols = [({j: ONE} if j < M.dim(deg + 1) else {})
                    for j in range(dims[deg])]
            proj_comps[deg] = Matrix.from_columns(M.dim(deg + 1), cols)
    proj = ChainMap(C, Mshift, proj_comps)
    return C, incl, proj


def truncate_geq(M, n):
    """Canonical truncation τ≥n: degree-n component becomes coker(d^{n-1}),
    degrees above n unchanged, below n zero.  Returns (complex, projection
    chain map M -> τ≥n M)."""
    image = _independent(rank_kernel_image(M.d(n - 1))[2])
    try:
        dim_n, proj_n, sec_n = quotient_space(M.dim(n), image)
    except LinalgError as e:
        raise ComplexError("truncation quotient failed: %s" % e)
    dims = {deg: M.dim(deg) for deg in M.degrees() if deg > n}
    if dim_n:
        dims[n] = dim_n
    spaces = GradedSpace({d: (v, None) for d, v in dims.items()})
    diffs = {deg: M.d(deg) for deg in M.degrees() if deg > n}
    if dim_n:
        diffs[n] = M.d(n) @ sec_n
    T = CochainComplex(spaces, diffs)
    comps = {deg: Matrix.identity(M.dim(deg)) for deg in M.degrees() if deg > n}
    if dim_n:
        comps[n] = proj_n
    return T, ChainMap(M, T, comps)


def _independent(m):
    """Columns of m filtered to an independent subfamily (same span)."""
    ech = Echelon()
    cols = []
    for col in m.columns:
        if ech.add(col) is None:
            cols.append(dict(col))
    return Matrix.from_columns(m.rows, cols)

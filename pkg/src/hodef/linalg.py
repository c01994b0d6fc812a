"""Exact sparse rational linear algebra.

Vectors are dicts {index: nonzero rational}; matrices are stored
column-major but carry dense row-major semantics (entry(i, j)).  The
central kernel is an incremental column echelon with optional combination
tracking, from which rank / kernel / image, linear solves, quotient spaces
and relation-span quotients are all derived.  Everything is exact; no
operation introduces rounding.
"""

import heapq

from .rational import ZERO, ONE, rat


class LinalgError(Exception):
    pass


class InvalidBasisError(LinalgError):
    """Raised when a claimed independent basis is dependent."""


# ---------------------------------------------------------------------------
# sparse vector helpers (dict index -> nonzero scalar)

def vec_is_zero(v):
    return not v


def vec_scale(v, c):
    if not c:
        return {}
    return {k: c * w for k, w in v.items()}


def vec_add(u, v):
    out = dict(u)
    for k, w in v.items():
        s = out.get(k)
        if s is None:
            out[k] = w
        else:
            s = s + w
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def vec_sub(u, v):
    out = dict(u)
    for k, w in v.items():
        s = out.get(k)
        if s is None:
            out[k] = -w
        else:
            s = s - w
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def vec_axpy_inplace(u, c, v):
    """u += c*v in place; returns u."""
    if not c:
        return u
    for k, w in v.items():
        s = u.get(k)
        if s is None:
            u[k] = c * w
        else:
            s = s + c * w
            if s:
                u[k] = s
            else:
                del u[k]
    return u


def vec_dot(u, v):
    if len(u) > len(v):
        u, v = v, u
    acc = ZERO
    for k, w in u.items():
        s = v.get(k)
        if s is not None:
            acc = acc + w * s
    return acc


def vec_from_list(xs):
    return {i: c for i, c in enumerate(xs) if c}


def vec_to_list(v, n):
    out = [ZERO] * n
    for k, c in v.items():
        out[k] = c
    return out


# ---------------------------------------------------------------------------
# matrices

class Matrix:
    """Sparse matrix with dense semantics: rows x cols over Q.

    Columns are the primitive storage (list of sparse vectors); this suits
    the dominant operations (kernels of column families, images, solves).
    """

    __slots__ = ("rows", "cols", "columns")

    def __init__(self, rows, cols, columns=None):
        self.rows = rows
        self.cols = cols
        self.columns = columns if columns is not None else [{} for _ in range(cols)]
        if len(self.columns) != cols:
            raise LinalgError("column count mismatch")

    @classmethod
    def from_entries(cls, rows, cols, entries):
        """entries: iterable of (i, j, value)."""
        m = cls(rows, cols)
        for i, j, v in entries:
            if v:
                m.columns[j][i] = v
        return m

    @classmethod
    def from_dense(cls, rows_list):
        rows = len(rows_list)
        cols = len(rows_list[0]) if rows else 0
        m = cls(rows, cols)
        for i, row in enumerate(rows_list):
            for j, v in enumerate(row):
                if isinstance(v, int):
                    v = rat(v)
                if v:
                    m.columns[j][i] = v
        return m

    @classmethod
    def from_columns(cls, rows, cols_list):
        return cls(rows, len(cols_list), [dict(c) for c in cols_list])

    @classmethod
    def identity(cls, n):
        return cls(n, n, [{i: ONE} for i in range(n)])

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols)

    def entry(self, i, j):
        return self.columns[j].get(i, ZERO)

    def column(self, j):
        return self.columns[j]

    def apply(self, vec):
        """Matrix-vector product on a sparse vector."""
        out = {}
        cols = self.columns
        for j, c in vec.items():
            vec_axpy_inplace(out, c, cols[j])
        return out

    def compose(self, other):
        """self @ other (apply other first)."""
        if other.rows != self.cols:
            raise LinalgError("shape mismatch in compose")
        return Matrix(self.rows, other.cols, [self.apply(c) for c in other.columns])

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch in add")
        return Matrix(self.rows, self.cols,
                      [vec_add(a, b) for a, b in zip(self.columns, other.columns)])

    def __sub__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch in sub")
        return Matrix(self.rows, self.cols,
                      [vec_sub(a, b) for a, b in zip(self.columns, other.columns)])

    def __neg__(self):
        return self.scale(rat(-1))

    def scale(self, c):
        return Matrix(self.rows, self.cols, [vec_scale(col, c) for col in self.columns])

    def transpose(self):
        t = Matrix(self.cols, self.rows)
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                t.columns[i][j] = v
        return t

    def is_zero(self):
        return all(not c for c in self.columns)

    def to_dense(self):
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.columns == other.columns)

    def __repr__(self):
        return "Matrix(%dx%d)" % (self.rows, self.cols)

    def hstack(self, other):
        if self.rows != other.rows:
            raise LinalgError("row mismatch in hstack")
        return Matrix(self.rows, self.cols + other.cols,
                      [dict(c) for c in self.columns] + [dict(c) for c in other.columns])

    def nnz(self):
        return sum(len(c) for c in self.columns)


# ---------------------------------------------------------------------------
# incremental column echelon

class Echelon:
    """Incremental column echelon form with optional combination tracking.

    Invariant: each stored pivot column has leading (smallest) index `lead`
    with coefficient 1, and `lead` does not occur in any other pivot.  When
    tracking, each pivot also stores its expression in the input vectors,
    and reductions return the combination that was subtracted.
    """

    def __init__(self, track=False):
        self.pivots = {}          # lead -> pivot column (lead coeff 1)
        self.combos = {} if track else None   # lead -> combination vector
        self.track = track
        self.rank = 0
        self._n_inputs = 0

    def reduce(self, vec):
        """Fully reduce vec against the current pivots.

        Returns (residual, combo) where combo satisfies
        residual = vec - sum(combo[k] * input_k); combo is None when not
        tracking.
        """
        c = dict(vec)
        combo = {} if self.track else None
        if not c:
            return c, combo
        heap = list(c)
        heapq.heapify(heap)
        pivots = self.pivots
        while heap:
            lead = heapq.heappop(heap)
            v = c.get(lead)
            if not v:
                continue
            piv = pivots.get(lead)
            if piv is None:
                # leading term survives; everything below cannot be touched
                # by pivots with larger leads either, but they may reduce:
                # keep cascading to normalize the tail.
                # (entries below the first unmatched lead can still hit
                # pivots; continue the cascade.)
                continue
            del c[lead]
            for k, w in piv.items():
                if k == lead:
                    continue
                s = c.get(k)
                if s is None:
                    c[k] = -v * w
                    heapq.heappush(heap, k)
                else:
                    s = s - v * w
                    if s:
                        c[k] = s
                    else:
                        del c[k]
            if self.track:
                vec_axpy_inplace(combo, v, self.combos[lead])
        return c, combo

    def insert_reduced(self, residual, combo=None):
        """Install an already fully reduced nonzero vector as a new pivot."""
        lead = min(residual)
        inv = ONE / residual[lead]
        self.pivots[lead] = {k: v * inv for k, v in residual.items()}
        if self.track:
            self.combos[lead] = vec_scale(combo, inv) if combo else {}
        self.rank += 1
        return lead

    def add(self, vec, tag=None):
        """Add an input vector.

        Returns None if vec was independent (a pivot was installed), else
        the combination expressing vec in terms of previous inputs (only
        when tracking; otherwise an empty dict signals dependence).
        """
        idx = self._n_inputs if tag is None else tag
        self._n_inputs += 1
        residual, combo = self.reduce(vec)
        if not residual:
            return combo if self.track else {}
        if self.track:
            # residual = vec - sum(combo * inputs); record vec itself
            combo = vec_scale(combo, rat(-1))
            combo[idx] = ONE
        self.insert_reduced(residual, combo)
        return None

    def contains(self, vec):
        residual, _ = self.reduce(vec)
        return not residual


def rank_kernel_image(m):
    """Exact rank, kernel basis and image basis of a Matrix.

    Returns (rank, kernel, image, preimages): kernel columns span ker(m)
    exactly; image columns are original columns of m spanning im(m); the
    j-th image column equals m @ (j-th preimage column).
    """
    ech = Echelon(track=True)
    kernel_cols = []
    image_cols = []
    preimage_cols = []
    for j, col in enumerate(m.columns):
        combo = ech.add(col, tag=j)
        if combo is not None:
            # col = sum(combo * previous cols): kernel vector
            k = vec_scale(combo, rat(-1))
            k[j] = ONE
            kernel_cols.append(k)
        else:
            image_cols.append(dict(col))
            preimage_cols.append({j: ONE})
    rank = len(image_cols)
    kernel = Matrix.from_columns(m.cols, kernel_cols)
    image = Matrix.from_columns(m.rows, image_cols)
    preimages = Matrix.from_columns(m.cols, preimage_cols)
    return rank, kernel, image, preimages


def rank_of(m):
    ech = Echelon()
    for col in m.columns:
        ech.add(col)
    return ech.rank


class Solver:
    """Reusable exact solver for m @ x = b with fixed m."""

    def __init__(self, m):
        self.m = m
        self.ech = Echelon(track=True)
        for j, col in enumerate(m.columns):
            self.ech.add(col, tag=j)

    @property
    def rank(self):
        return self.ech.rank

    def solve(self, b):
        """Some x with m @ x = b, or None if b is not in the column span."""
        residual, combo = self.ech.reduce(b)
        if residual:
            return None
        return combo

    def contains(self, b):
        return self.ech.contains(b)


def solve(m, b):
    return Solver(m).solve(b)


def quotient_space(ambient_dim, subspace):
    """Quotient of Q^ambient_dim by the span of the columns of `subspace`.

    The columns must be independent (InvalidBasisError otherwise).  Returns
    (dim, projection, section) with projection @ section = identity on the
    quotient and projection @ subspace = 0.
    """
    ech = Echelon(track=True)
    for j, col in enumerate(subspace.columns):
        if ech.add(col, tag=("s", j)) is not None:
            raise InvalidBasisError("dependent column %d in subspace basis" % j)
    complement = []
    for i in range(ambient_dim):
        if ech.rank == ambient_dim:
            break
        if ech.add({i: ONE}, tag=("c", i)) is None:
            complement.append(i)
    dim = ambient_dim - subspace.cols
    if len(complement) != dim:
        raise LinalgError("complement construction failed")
    comp_pos = {("c", i): k for k, i in enumerate(complement)}
    proj_cols = []
    for i in range(ambient_dim):
        residual, combo = ech.reduce({i: ONE})
        if residual:
            raise LinalgError("full echelon does not span ambient space")
        col = {}
        for tag, c in combo.items():
            k = comp_pos.get(tag)
            if k is not None and c:
                col[k] = c
        proj_cols.append(col)
    projection = Matrix.from_columns(dim, proj_cols)
    section = Matrix.from_columns(ambient_dim, [{i: ONE} for i in complement])
    return dim, projection, section


# ---------------------------------------------------------------------------
# quotients by relation spans (tensor-product quotients)

class QuotientError(LinalgError):
    pass


class Quotient:
    """Quotient of Q^ambient by the span of relation generators.

    Two modes:

    * with a predicted model map ``model`` (q x ambient Matrix): verified
      exactly — every generator must map to zero, a section with
      model @ section = id must exist, and the generators must exhibit rank
      ambient - q.  Then span(relations) = ker(model) and ``model`` is the
      projection.  Generator processing stops early once the target rank is
      reached (the remaining generators are still checked against the
      model map, which is what makes the early stop sound).
    * без model: plain elimination; projection/section built from a
      complement as in quotient_space.
    """

    def __init__(self, ambient_dim, generators, model=None, section=None,
                 name="quotient"):
        self.ambient_dim = ambient_dim
        self.name = name
        if model is not None:
            self._init_with_model(generators, model, section)
        else:
            self._init_plain(generators)

    def _init_with_model(self, generators, model, section):
        q = model.rows
        target = self.ambient_dim - q
        ech = Echelon()
        for g in generators:
            if any(model.apply(g).values()):
                raise QuotientError(
                    "%s: generator escapes the predicted model kernel" % self.name)
            if ech.rank < target:
                ech.add(g)
        if ech.rank != target:
            raise QuotientError(
                "%s: relation rank %d != ambient %d - model %d"
                % (self.name, ech.rank, self.ambient_dim, q))
        if section is None:
            solver = Solver(model)
            cols = []
            for k in range(q):
                x = solver.solve({k: ONE})
                if x is None:
                    raise QuotientError("%s: model map is not surjective" % self.name)
                cols.append(x)
            section = Matrix.from_columns(self.ambient_dim, cols)
        check = model @ section
        if check != Matrix.identity(q):
            raise QuotientError("%s: model @ section != id" % self.name)
        self.dim = q
        self.projection = model
        self.section = section
        self._relation_echelon = ech

    def _init_plain(self, generators):
        ech = Echelon()
        for g in generators:
            ech.add(g)
        basis_cols = [dict(p) for p in
                      (ech.pivots[l] for l in sorted(ech.pivots))]
        sub = Matrix.from_columns(self.ambient_dim, basis_cols)
        self.dim, self.projection, self.section = quotient_space(self.ambient_dim, sub)
        self._relation_echelon = ech

    def relation_basis(self):
        return [dict(self._relation_echelon.pivots[l])
                for l in sorted(self._relation_echelon.pivots)]

    def project(self, vec):
        return self.projection.apply(vec)

    def lift(self, vec):
        return self.section.apply(vec)

    def descend_operator(self, op, check=True):
        """Push an ambient operator (Matrix or callable on sparse vectors)
        down to the quotient; verifies it preserves the relation span."""
        app = op.apply if isinstance(op, Matrix) else op
        if check:
            for r in self.relation_basis():
                if any(self.projection.apply(app(r)).values()):
                    raise QuotientError(
                        "%s: operator does not preserve the relation span" % self.name)
        cols = [self.projection.apply(app(self.section.column(k)))
                for k in range(self.dim)]
        return Matrix.from_columns(self.dim, cols)

"""Shared constructors for tests: catalog algebras, random complexes,
random presymplectic structures, random associative dg algebras.

Randomness is always driven by a caller-supplied ``random.Random`` so test
runs are reproducible.  "Random" algebras are produced by conjugating
catalog algebras with random invertible basis changes, which preserves all
defining identities exactly.
"""

from fractions import Fraction
from random import Random

from opfield import operads
from opfield.algebras import DgAlgebra, PresymplecticComplex
from opfield.complexes import ChainComplex
from opfield.exact import RationalMatrix, kernel_basis, solve_many


# ---------------------------------------------------------------------------
# catalog algebras
# ---------------------------------------------------------------------------

def matrix_algebra(n: int) -> DgAlgebra:
    """n x n matrices; basis E_ij flattened row-major."""
    idx = {(i, j): n * i + j for i in range(n) for j in range(n)}
    mu = {}
    for (a, b), p in idx.items():
        for (c, d), q in idx.items():
            if b == c:
                mu[(p, q)] = {idx[(a, d)]: Fraction(1)}
    eta = {idx[(i, i)]: Fraction(1) for i in range(n)}
    return DgAlgebra(ChainComplex({0: n * n}), "As", {operads.MU: mu, operads.ETA: eta})


def gl_with_unit(n: int) -> DgAlgebra:
    from opfield.algebras import commutator_functor

    return commutator_functor(matrix_algebra(n))


def dual_numbers() -> DgAlgebra:
    """Q[e]/(e^2), basis (1, e)."""
    mu = {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)}, (1, 0): {1: Fraction(1)}}
    return DgAlgebra(ChainComplex({0: 2}), "As", {operads.MU: mu, operads.ETA: {0: Fraction(1)}})


def truncated_polynomial(k: int) -> DgAlgebra:
    """Q[x]/(x^k), basis (1, x, ..., x^(k-1))."""
    mu = {}
    for a in range(k):
        for b in range(k):
            if a + b < k:
                mu[(a, b)] = {a + b: Fraction(1)}
    return DgAlgebra(ChainComplex({0: k}), "As", {operads.MU: mu, operads.ETA: {0: Fraction(1)}})


def upper_triangular2() -> DgAlgebra:
    """Upper triangular 2x2 matrices, basis (E11, E12, E22)."""
    idx = {(0, 0): 0, (0, 1): 1, (1, 1): 2}
    mu = {}
    for (a, b), p in idx.items():
        for (c, d), q in idx.items():
            if b == c:
                mu[(p, q)] = {idx[(a, d)]: Fraction(1)}
    return DgAlgebra(ChainComplex({0: 3}), "As",
                     {operads.MU: mu, operads.ETA: {0: Fraction(1), 2: Fraction(1)}})


def product_fields() -> DgAlgebra:
    """Q x Q with componentwise multiplication."""
    mu = {(0, 0): {0: Fraction(1)}, (1, 1): {1: Fraction(1)}}
    return DgAlgebra(ChainComplex({0: 2}), "As",
                     {operads.MU: mu, operads.ETA: {0: Fraction(1), 1: Fraction(1)}})


def exterior_line(d_theta: int = 0) -> DgAlgebra:
    """Exterior algebra on one degree-1 generator theta; optionally d(theta) = 1."""
    mu = {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)}, (1, 0): {1: Fraction(1)}}
    diffs = {}
    if d_theta:
        diffs[1] = RationalMatrix(1, 1, {(0, 0): Fraction(d_theta)})
    carrier = ChainComplex({0: 1, 1: 1}, diffs)
    return DgAlgebra(carrier, "As", {operads.MU: mu, operads.ETA: {0: Fraction(1)}})


def exterior_square_dg() -> DgAlgebra:
    """Q[eps] tensor Lambda(theta) with d(theta) = eps; basis (1, eps; theta, eps*theta)."""
    # degree 0: 1, eps (indices 0, 1); degree 1: theta, eps*theta (indices 2, 3)
    one, eps, th, epsth = 0, 1, 2, 3
    mu = {}

    def put(a, b, c, v=1):
        mu.setdefault((a, b), {})[c] = Fraction(v)

    put(one, one, one); put(one, eps, eps); put(eps, one, eps)
    put(one, th, th); put(th, one, th)
    put(one, epsth, epsth); put(epsth, one, epsth)
    put(eps, th, epsth); put(th, eps, epsth)
    carrier = ChainComplex({0: 2, 1: 2}, {1: RationalMatrix(2, 2, {(1, 0): Fraction(1)})})
    return DgAlgebra(carrier, "As", {operads.MU: mu, operads.ETA: {one: Fraction(1)}})


AS_CATALOG = [
    lambda: matrix_algebra(2),
    dual_numbers,
    lambda: truncated_polynomial(3),
    lambda: truncated_polynomial(4),
    upper_triangular2,
    product_fields,
    lambda: exterior_line(0),
    lambda: exterior_line(1),
    exterior_square_dg,
]


def truncated_poisson_algebra() -> DgAlgebra:
    """Sym(g)/(degree >= 3) for the Lie algebra {x, y} = y; basis
    (1, x, y, x^2, xy, y^2)."""
    basis = [(), ("x",), ("y",), ("x", "x"), ("x", "y"), ("y", "y")]
    index = {m: i for i, m in enumerate(basis)}

    def mono_mul(m1, m2):
        m = tuple(sorted(m1 + m2))
        return index.get(m)

    mu = {}
    for m1, i in index.items():
        for m2, j in index.items():
            k = mono_mul(m1, m2)
            if k is not None:
                mu[(i, j)] = {k: Fraction(1)}

    # {x, y} = y extended as a biderivation, truncated
    def poly_bracket(m1, m2):
        out = {}
        for a_pos, a in enumerate(m1):
            for b_pos, b in enumerate(m2):
                if a == b:
                    continue
                sign = 1 if (a, b) == ("x", "y") else -1
                rest = tuple(sorted(m1[:a_pos] + m1[a_pos + 1:] + m2[:b_pos] + m2[b_pos + 1:] + ("y",)))
                k = index.get(rest)
                if k is not None:
                    out[k] = out.get(k, Fraction(0)) + Fraction(sign)
        return {k: v for k, v in out.items() if v}

    pb = {}
    for m1, i in index.items():
        for m2, j in index.items():
            cell = poly_bracket(m1, m2)
            if cell:
                pb[(i, j)] = cell
    return DgAlgebra(ChainComplex({0: 6}), "Pois",
                     {operads.MU: mu, operads.ETA: {0: Fraction(1)}, operads.PBRACKET: pb})


# ---------------------------------------------------------------------------
# random invertible basis changes
# ---------------------------------------------------------------------------

def random_invertible(rng: Random, n: int) -> RationalMatrix:
    """Product of unitriangular matrices and a permutation; small integer entries."""
    lower = {(i, i): Fraction(1) for i in range(n)}
    upper = {(i, i): Fraction(1) for i in range(n)}
    for i in range(n):
        for j in range(i):
            if rng.random() < 0.5:
                lower[(i, j)] = Fraction(rng.randint(-2, 2))
            if rng.random() < 0.5:
                upper[(j, i)] = Fraction(rng.randint(-2, 2))
    perm = list(range(n))
    rng.shuffle(perm)
    p = RationalMatrix(n, n, {(perm[i], i): Fraction(1) for i in range(n)})
    return RationalMatrix(n, n, lower) @ RationalMatrix(n, n, upper) @ p


def invert(m: RationalMatrix) -> RationalMatrix:
    cols = solve_many(m, [tuple(Fraction(1) if r == i else Fraction(0) for r in range(m.rows))
                          for i in range(m.rows)])
    assert all(c is not None for c in cols)
    return RationalMatrix.from_columns(cols, rows=m.cols)


def conjugate_algebra(a: DgAlgebra, rng: Random) -> DgAlgebra:
    """Transport all structure constants through a random basis change."""
    ps = {n: random_invertible(rng, a.carrier.dim(n)) for n in a.carrier.support}
    pinvs = {n: invert(p) for n, p in ps.items()}

    def push(x, mats):
        out = {}
        for i, c in x.items():
            n, li = a.basis.to_local(i)
            for (r, col), v in mats[n].entries.items():
                if col == li:
                    j = a.basis.to_global(n, r)
                    out[j] = out.get(j, Fraction(0)) + c * v
        return {k: v for k, v in out.items() if v}

    structure = {}
    for gen in a.presentation.alphabet.generators:
        tensor = a.structure[gen.name]
        if gen.arity == 0:
            structure[gen.name] = push(tensor, pinvs)
            continue
        new_tensor = {}
        total = a.basis.total

        def tuples(length):
            if length == 0:
                yield ()
                return
            for head in range(total):
                for tail in tuples(length - 1):
                    yield (head,) + tail

        for combo in tuples(gen.arity):
            args = [push(a.basis_element(i), ps) for i in combo]
            cell = push(a.apply_generator(gen.name, args), pinvs)
            if cell:
                new_tensor[combo] = cell
        structure[gen.name] = new_tensor
    diffs = {}
    for n in a.carrier.support:
        d = a.carrier.d(n)
        if d.rows and d.cols:
            nd = pinvs[n - 1] @ d @ ps[n] if a.carrier.dim(n - 1) else d
            diffs[n] = nd
    carrier = ChainComplex(dict(a.carrier.dims), diffs)
    return DgAlgebra(carrier, a.kind, structure)


def random_as_algebra(rng: Random) -> DgAlgebra:
    """Random associative dg algebra of dim <= 4: catalog entry in a random basis."""
    base = rng.choice(AS_CATALOG)()
    return conjugate_algebra(base, rng)


# ---------------------------------------------------------------------------
# random chain complexes and presymplectic complexes
# ---------------------------------------------------------------------------

def random_complex(rng: Random, max_total: int = 12, degree_span=(-2, 3)) -> ChainComplex:
    """Direct sum of elementary complexes in a random basis.

    Elementary pieces are a one-dimensional summand (a homology class) or an
    acyclic pair with identity differential, so d*d = 0 holds by construction
    and survives the basis change.
    """
    dims = {}
    pairs = []
    total = 0
    while total < max_total and rng.random() < 0.85:
        n = rng.randint(*degree_span)
        if rng.random() < 0.5 and total + 2 <= max_total:
            dims[n] = dims.get(n, 0) + 1
            dims[n - 1] = dims.get(n - 1, 0) + 1
            pairs.append(n)
            total += 2
        else:
            dims[n] = dims.get(n, 0) + 1
            total += 1
    # place identity blocks deterministically: acyclic pairs occupy the
    # leading positions of their degrees in creation order
    offsets = {n: 0 for n in dims}
    diff_entries = {}
    for n in pairs:
        r = offsets.get(n - 1, 0)
        c = offsets.get(n, 0)
        diff_entries.setdefault(n, {})[(r, c)] = Fraction(1)
        offsets[n - 1] = r + 1
        offsets[n] = c + 1
    diffs = {n: RationalMatrix(dims.get(n - 1, 0), dims.get(n, 0), e)
             for n, e in diff_entries.items()}
    c = ChainComplex(dims, diffs)
    # random basis change per degree
    ps = {n: random_invertible(rng, c.dim(n)) for n in c.support}
    pinvs = {n: invert(p) for n, p in ps.items()}
    new_diffs = {}
    for n in c.support:
        d = c.d(n)
        if d.rows and d.cols:
            new_diffs[n] = pinvs[n - 1] @ d @ ps[n]
    return ChainComplex(dims, new_diffs)


def random_presymplectic(rng: Random, dims=None) -> PresymplecticComplex:
    """Random pairing satisfying antisymmetry and the chain-map condition.

    The two conditions are linear in the pairing, so a random element of the
    constraint kernel is sampled with the exact solver.
    """
    if dims is None:
        c = random_complex(rng, max_total=4, degree_span=(-1, 1))
        if not c.dims:
            c = ChainComplex({0: 2})
    else:
        c = ChainComplex(dims, _random_differential(rng, dims))
    from opfield.algebras import GradedBasis

    basis = GradedBasis(c)
    total = basis.total
    # unknowns: omega(i, j) for pairs i < j of total degree 0; the lower
    # triangle follows by graded antisymmetry and the (even-degree) diagonal
    # is forced to vanish
    unknowns = []
    position = {}
    for i in range(total):
        for j in range(i + 1, total):
            if basis.degree_of(i) + basis.degree_of(j) == 0:
                position[(i, j)] = len(unknowns)
                unknowns.append((i, j))
    if not unknowns:
        return PresymplecticComplex(c, {})

    def omega_entry(i, j, coeffs):
        if i == j:
            return Fraction(0)
        if i < j:
            k = position.get((i, j))
            return coeffs[k] if k is not None else Fraction(0)
        k = position.get((j, i))
        if k is None:
            return Fraction(0)
        di, dj = basis.degree_of(i), basis.degree_of(j)
        sign = -1 if (di * dj) % 2 else 1
        return -sign * coeffs[k]

    # chain-map constraints: omega(dx_i, x_j) + (-1)^|i| omega(x_i, dx_j) = 0
    rows = []
    for i in range(total):
        for j in range(total):
            if basis.degree_of(i) + basis.degree_of(j) != 1:
                continue
            row = [Fraction(0)] * len(unknowns)
            dxi = basis.differential({i: Fraction(1)})
            for r, v in dxi.items():
                _accumulate(row, position, basis, r, j, v)
            sign = -1 if basis.degree_of(i) % 2 else 1
            dxj = basis.differential({j: Fraction(1)})
            for r, v in dxj.items():
                _accumulate(row, position, basis, i, r, sign * v)
            if any(row):
                rows.append(row)
    if rows:
        m = RationalMatrix.from_rows(rows)
        kernel = kernel_basis(m)
    else:
        kernel = [tuple(Fraction(1 if k == t else 0) for k in range(len(unknowns)))
                  for t in range(len(unknowns))]
    coeffs = [Fraction(0)] * len(unknowns)
    for vec in kernel:
        weight = Fraction(rng.randint(-3, 3))
        if weight:
            coeffs = [a + weight * b for a, b in zip(coeffs, vec)]
    omega = {}
    for i in range(total):
        for j in range(total):
            if basis.degree_of(i) + basis.degree_of(j) != 0:
                continue
            v = omega_entry(i, j, coeffs)
            if v:
                omega[(i, j)] = v
    return PresymplecticComplex(c, omega)


def _accumulate(row, position, basis, a, b, value):
    """Add ``value * omega(a, b)`` to a constraint row over the unknowns."""
    if a == b:
        return
    if a < b:
        k = position.get((a, b))
        if k is not None:
            row[k] += value
        return
    k = position.get((b, a))
    if k is None:
        return
    da, db = basis.degree_of(a), basis.degree_of(b)
    sign = -1 if (da * db) % 2 else 1
    row[k] += -sign * value


def _random_differential(rng: Random, dims):
    """A random d with d*d = 0: identity pairs placed greedily between
    adjacent degrees, then a random basis change."""
    entries = {}
    offsets = {n: 0 for n in dims}
    for n in sorted(dims):
        below = n - 1
        if below not in dims:
            continue
        while offsets[n] < dims[n] and offsets[below] < dims[below] and rng.random() < 0.6:
            entries.setdefault(n, {})[(offsets[below], offsets[n])] = Fraction(1)
            offsets[below] += 1
            offsets[n] += 1
    diffs = {n: RationalMatrix(dims.get(n - 1, 0), dims.get(n, 0), e)
             for n, e in entries.items()}
    c = ChainComplex(dims, diffs)
    ps = {n: random_invertible(rng, c.dim(n)) for n in c.support}
    pinvs = {n: invert(p) for n, p in ps.items()}
    out = {}
    for n in c.support:
        d = c.d(n)
        if d.rows and d.cols:
            nd = pinvs[n - 1] @ d @ ps[n]
            out[n] = nd
    return out

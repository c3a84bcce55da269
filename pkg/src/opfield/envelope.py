"""Truncated unital universal enveloping algebras via PBW normal forms.

Given a unital dg Lie algebra whose unit spans a distinguished basis vector,
the enveloping algebra is realized on ordered monomials in the remaining
basis vectors (odd-degree generators at most once).  Words are brought to
normal form by rewriting adjacent out-of-order pairs

    x_a x_b  ->  (-1)^(|a||b|) x_b x_a + [x_a, x_b]        (a > b)
    x_a x_a  ->  (1/2) [x_a, x_a]                          (|a| odd)

with brackets re-expanded in the generator basis plus a multiple of the empty
word through the unit component.  A hard word-length bound ``truncation``
restricts everything to a filtration stage; products that would exceed it
raise :class:`TruncationOverflow` instead of silently quotienting, because
the span of long words is not an ideal.

The filtration-stage dimensions have an independent combinatorial oracle,
:func:`filtration_dim`, which counts graded-symmetric monomials without ever
rewriting.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import operads
from .algebras import DgAlgebra, Element, PresymplecticComplex, element_add, element_scale, heisenberg
from .complexes import ChainComplex, ChainMap
from .errors import StructuralError, TruncationOverflow
from .exact import RationalMatrix, rat

Word = Tuple[int, ...]
PBWElement = Dict[Word, Fraction]

_HALF = Fraction(1, 2)


def pbw_add(x: PBWElement, y: PBWElement) -> PBWElement:
    out = dict(x)
    for w, c in y.items():
        nc = out.get(w, Fraction(0)) + c
        if nc:
            out[w] = nc
        elif w in out:
            del out[w]
    return out


def pbw_scale(c, x: PBWElement) -> PBWElement:
    c = rat(c)
    if not c:
        return {}
    return {w: c * v for w, v in x.items()}


def pbw_unit() -> PBWElement:
    return {(): Fraction(1)}


class TruncatedEnvelope:
    """Filtration stage of the enveloping algebra of a unital dg Lie algebra.

    ``gens`` lists the source basis indices that span the complement of the
    unit direction, in the order used for PBW monomials.  The default order
    is the carrier's degree-then-index order.
    """

    def __init__(self, source: DgAlgebra, truncation: int,
                 basis_order: Optional[Sequence[int]] = None):
        if source.kind != "uLie":
            raise StructuralError(f"envelope expects a unital Lie algebra, got kind {source.kind}")
        if truncation < 0:
            raise StructuralError("truncation bound must be nonnegative")
        unit = source.unit_direction()
        if unit is None:
            raise StructuralError(
                "the source basis must contain a vector spanning the unit direction")
        self.source = source
        self.truncation = truncation
        self.unit_index, self.unit_coeff = unit
        default = [i for i in range(source.basis.total) if i != self.unit_index]
        if basis_order is None:
            basis_order = default
        elif sorted(basis_order) != sorted(default):
            raise StructuralError("basis_order must list every non-unit basis index exactly once")
        self.gens: Tuple[int, ...] = tuple(basis_order)
        self.gen_degree = [source.basis.degree_of(i) for i in self.gens]
        self._odd = [d % 2 == 1 for d in self.gen_degree]
        self._pos = {src: p for p, src in enumerate(self.gens)}
        self._bracket_cache: Dict[Tuple[int, int], PBWElement] = {}
        self._dgen_cache: Dict[int, PBWElement] = {}
        self._nf_cache: Dict[Word, PBWElement] = {}
        self._stage_cache: Dict[int, tuple] = {}

    # -- source-element conversion -------------------------------------------
    def from_source_element(self, x: Element) -> PBWElement:
        """Image of a source algebra element; the unit direction collapses to
        the empty word."""
        out: PBWElement = {}
        for i, c in x.items():
            if i == self.unit_index:
                word: Word = ()
                coeff = c / self.unit_coeff
            else:
                word = (self._pos[i],)
                coeff = c
            nc = out.get(word, Fraction(0)) + coeff
            if nc:
                out[word] = nc
            elif word in out:
                del out[word]
        return out

    def generator(self, p: int) -> PBWElement:
        return {(p,): Fraction(1)}

    def word_degree(self, word: Word) -> int:
        return sum(self.gen_degree[p] for p in word)

    # -- structure expansions -------------------------------------------------
    def bracket_expansion(self, p: int, q: int) -> PBWElement:
        key = (p, q)
        cached = self._bracket_cache.get(key)
        if cached is None:
            cell = self.source.apply_generator(
                operads.BRACKET,
                [self.source.basis_element(self.gens[p]), self.source.basis_element(self.gens[q])],
            )
            cached = self.from_source_element(cell)
            self._bracket_cache[key] = cached
        return dict(cached)

    def dgen_expansion(self, p: int) -> PBWElement:
        cached = self._dgen_cache.get(p)
        if cached is None:
            dx = self.source.differential(self.source.basis_element(self.gens[p]))
            cached = self.from_source_element(dx)
            self._dgen_cache[p] = cached
        return dict(cached)

    # -- normal form -----------------------------------------------------------
    def normal_form(self, word: Sequence[int]) -> PBWElement:
        word = tuple(word)
        if len(word) > self.truncation:
            raise TruncationOverflow(
                f"word of length {len(word)} exceeds truncation {self.truncation}")
        return dict(self._nf(word))

    def _nf(self, word: Word) -> PBWElement:
        cached = self._nf_cache.get(word)
        if cached is not None:
            return cached
        result = None
        for k in range(len(word) - 1):
            a, b = word[k], word[k + 1]
            if a > b:
                sign = -1 if (self._odd[a] and self._odd[b]) else 1
                swapped = word[:k] + (b, a) + word[k + 2:]
                acc = pbw_scale(sign, self._nf(swapped))
                for repl, c in self.bracket_expansion(a, b).items():
                    spliced = word[:k] + repl + word[k + 2:]
                    acc = pbw_add(acc, pbw_scale(c, self._nf(spliced)))
                result = acc
                break
            if a == b and self._odd[a]:
                acc: PBWElement = {}
                for repl, c in self.bracket_expansion(a, a).items():
                    spliced = word[:k] + repl + word[k + 2:]
                    acc = pbw_add(acc, pbw_scale(c * _HALF, self._nf(spliced)))
                result = acc
                break
        if result is None:
            result = {word: Fraction(1)}
        self._nf_cache[word] = result
        return result

    def normalize(self, x: PBWElement) -> PBWElement:
        out: PBWElement = {}
        for w, c in x.items():
            out = pbw_add(out, pbw_scale(c, self.normal_form(w)))
        return out

    # -- algebra operations -----------------------------------------------------
    def multiply(self, x: PBWElement, y: PBWElement) -> PBWElement:
        out: PBWElement = {}
        for w1, c1 in x.items():
            for w2, c2 in y.items():
                if len(w1) + len(w2) > self.truncation:
                    raise TruncationOverflow(
                        f"product of words of lengths {len(w1)} and {len(w2)} exceeds "
                        f"truncation {self.truncation}; raise the bound")
                out = pbw_add(out, pbw_scale(c1 * c2, self._nf(w1 + w2)))
        return out

    def commutator(self, x: PBWElement, y: PBWElement) -> PBWElement:
        """Graded commutator; inputs must be homogeneous."""
        dx = self.element_degree(x)
        dy = self.element_degree(y)
        sign = -1 if (dx or 0) * (dy or 0) % 2 else 1
        return pbw_add(self.multiply(x, y), pbw_scale(-sign, self.multiply(y, x)))

    def element_degree(self, x: PBWElement) -> Optional[int]:
        degs = {self.word_degree(w) for w in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise StructuralError(f"PBW element is not homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def differential(self, x: PBWElement) -> PBWElement:
        out: PBWElement = {}
        for w, c in x.items():
            out = pbw_add(out, pbw_scale(c, self._d_word(w)))
        return out

    def _d_word(self, word: Word) -> PBWElement:
        out: PBWElement = {}
        parity = 0
        for j, p in enumerate(word):
            dg = self.dgen_expansion(p)
            if dg:
                sign = -1 if parity % 2 else 1
                for repl, c in dg.items():
                    spliced = word[:j] + repl + word[j + 1:]
                    out = pbw_add(out, pbw_scale(sign * c, self._nf(spliced)))
            parity += self.gen_degree[p]
        return out

    # -- monomial bases and stage complexes --------------------------------------
    def monomials(self, max_length: Optional[int] = None) -> List[Word]:
        """All PBW monomials of length <= max_length, sorted by (length, word)."""
        n = self.truncation if max_length is None else max_length
        if n > self.truncation:
            raise TruncationOverflow(f"stage {n} exceeds truncation {self.truncation}")
        out: List[Word] = [()]
        frontier: List[Word] = [()]
        for _ in range(n):
            nxt = []
            for w in frontier:
                start = w[-1] if w else 0
                for p in range(start, len(self.gens)):
                    if w and p == w[-1] and self._odd[p]:
                        continue
                    nxt.append(w + (p,))
            out.extend(nxt)
            frontier = nxt
        return out

    def stage(self, n: Optional[int] = None):
        """Chain complex of the filtration stage plus its basis bookkeeping.

        Returns ``(complex, words_by_degree, index)`` where ``index`` maps a
        word to its (degree, local position) in the stage complex.
        """
        n = self.truncation if n is None else n
        cached = self._stage_cache.get(n)
        if cached is not None:
            return cached
        words = self.monomials(n)
        by_degree: Dict[int, List[Word]] = {}
        for w in words:
            by_degree.setdefault(self.word_degree(w), []).append(w)
        index: Dict[Word, Tuple[int, int]] = {}
        for deg, ws in by_degree.items():
            for li, w in enumerate(ws):
                index[w] = (deg, li)
        dims = {deg: len(ws) for deg, ws in by_degree.items()}
        diffs: Dict[int, dict] = {}
        for deg, ws in by_degree.items():
            entries = diffs.setdefault(deg, {})
            for col, w in enumerate(ws):
                for w2, c in self._d_word(w).items():
                    tdeg, row = index[w2]
                    if tdeg != deg - 1:
                        raise AssertionError("differential did not lower degree by one")
                    entries[(row, col)] = c
        matrices = {}
        for deg, entries in diffs.items():
            rows = dims.get(deg - 1, 0)
            if rows and entries:
                matrices[deg] = RationalMatrix(rows, dims[deg], entries)
        complex_ = ChainComplex(dims, matrices)
        result = (complex_, by_degree, index)
        self._stage_cache[n] = result
        return result

    def stage_complex(self, n: Optional[int] = None) -> ChainComplex:
        return self.stage(n)[0]

    def stage_dims(self, n: Optional[int] = None) -> Dict[int, int]:
        return dict(self.stage(n)[0].dims)

    def __repr__(self):
        return (f"TruncatedEnvelope(gens={len(self.gens)}, truncation={self.truncation}, "
                f"dim={len(self.monomials())})")


def envelope(v: DgAlgebra, n_max: int, basis_order: Optional[Sequence[int]] = None) -> TruncatedEnvelope:
    """Filtration stage ``n_max`` of the unital universal enveloping algebra."""
    return TruncatedEnvelope(v, n_max, basis_order)


def normal_form(word: Sequence[int], env: TruncatedEnvelope) -> PBWElement:
    return env.normal_form(word)


def multiply(x: PBWElement, y: PBWElement, env: TruncatedEnvelope) -> PBWElement:
    return env.multiply(x, y)


def ccr(v: PresymplecticComplex, n_max: int) -> TruncatedEnvelope:
    """CCR algebra of a presymplectic complex: envelope of its Heisenberg
    algebra.  Generators satisfy [x, y] = omega(x, y) * 1."""
    return envelope(heisenberg(v), n_max)


def filtration_dim(v: DgAlgebra, n: int) -> Dict[int, int]:
    """Per-degree dimension of filtration stage ``n``, counted combinatorially.

    Independent of the rewriting machinery: stage dimensions are those of the
    truncated graded-symmetric algebra on the non-unit basis (polynomial on
    even-degree generators, exterior on odd-degree ones).
    """
    return filtration_dims_by_stage(v, n)[n]


def filtration_dims_by_stage(v: DgAlgebra, n: int) -> List[Dict[int, int]]:
    """Stage tables 0..n; entry k maps degree -> dim of stage k."""
    if v.kind != "uLie":
        raise StructuralError(f"filtration_dim expects a unital Lie algebra, got kind {v.kind}")
    unit = v.unit_direction()
    if unit is None:
        raise StructuralError("the source basis must contain a vector spanning the unit direction")
    degrees = [v.basis.degree_of(i) for i in range(v.basis.total) if i != unit[0]]
    # counts[(length, degree)] of graded-symmetric monomials
    counts: Dict[Tuple[int, int], int] = {(0, 0): 1}
    for g in degrees:
        new = dict(counts)
        if g % 2:
            for (l, d), c in counts.items():
                if l + 1 <= n:
                    key = (l + 1, d + g)
                    new[key] = new.get(key, 0) + c
        else:
            for (l, d), c in sorted(counts.items()):
                m = 1
                while l + m <= n:
                    key = (l + m, d + m * g)
                    new[key] = new.get(key, 0) + counts[(l, d)]
                    m += 1
        counts = new
    tables: List[Dict[int, int]] = []
    for k in range(n + 1):
        table: Dict[int, int] = {}
        for (l, d), c in counts.items():
            if l <= k:
                table[d] = table.get(d, 0) + c
        tables.append(table)
    return tables


class EnvelopeMap:
    """Multiplicative extension of a unital Lie algebra map to envelope stages."""

    def __init__(self, source_env: TruncatedEnvelope, target_env: TruncatedEnvelope,
                 rho: ChainMap):
        from .algebras import push_element

        if source_env.truncation != target_env.truncation:
            raise StructuralError("source and target truncations differ")
        self.source_env = source_env
        self.target_env = target_env
        self.rho = rho
        self.images: List[PBWElement] = []
        for p, src_idx in enumerate(source_env.gens):
            img = push_element(rho, source_env.source.basis, target_env.source.basis,
                               source_env.source.basis_element(src_idx))
            self.images.append(target_env.from_source_element(img))

    def apply_word(self, word: Word) -> PBWElement:
        out = pbw_unit()
        for p in word:
            out = self.target_env.multiply(out, self.images[p])
        return out

    def apply(self, x: PBWElement) -> PBWElement:
        out: PBWElement = {}
        for w, c in x.items():
            out = pbw_add(out, pbw_scale(c, self.apply_word(w)))
        return out

    def stage_chain_map(self, n: Optional[int] = None) -> ChainMap:
        n = self.source_env.truncation if n is None else n
        src_complex, src_by_degree, _ = self.source_env.stage(n)
        tgt_complex, _, tgt_index = self.target_env.stage(n)
        comps: Dict[int, dict] = {}
        for deg, words in src_by_degree.items():
            entries = comps.setdefault(deg, {})
            for col, w in enumerate(words):
                for w2, c in self.apply_word(w).items():
                    tdeg, row = tgt_index[w2]
                    if tdeg != deg:
                        raise AssertionError("envelope map did not preserve degree")
                    entries[(row, col)] = c
        matrices = {}
        for deg, entries in comps.items():
            rows = tgt_complex.dim(deg)
            cols = src_complex.dim(deg)
            if rows and cols and entries:
                matrices[deg] = RationalMatrix(rows, cols, entries)
        return ChainMap(src_complex, tgt_complex, matrices)


def envelope_map(rho: ChainMap, source: DgAlgebra, target: DgAlgebra, n_max: int,
                 validate: bool = True) -> EnvelopeMap:
    """Functorial extension of a bracket- and unit-preserving chain map.

    With ``validate`` the map is first checked to be a morphism of unital Lie
    algebras; invalid maps are rejected with the list of defects.
    """
    if validate:
        from .algebras import is_algebra_morphism

        issues = is_algebra_morphism(rho, source, target)
        if issues:
            raise StructuralError("not a unital Lie algebra morphism: " + "; ".join(issues))
    return EnvelopeMap(envelope(source, n_max), envelope(target, n_max), rho)


# ---------------------------------------------------------------------------
# Adjunction between envelope stages and finite-dimensional algebras
# ---------------------------------------------------------------------------

def validate_lie_map_into_algebra(env: TruncatedEnvelope, a: DgAlgebra,
                                  images: Sequence[Element]) -> List[str]:
    """Check generator images define a unital Lie map V -> commutator algebra.

    ``images[p]`` is the value on generator p; the unit of V must go to the
    unit of ``a``; brackets must match commutators; the differential must be
    intertwined.  Also enforces the truncation-stability condition: products
    of ``truncation + 1`` generator images must vanish in ``a``.
    """
    issues = []
    if a.kind != "As":
        return [f"target must be associative, got {a.kind}"]
    unit_a = a.structure[operads.ETA]
    src = env.source

    def rho(x: Element) -> Element:
        out: Element = {}
        for i, c in x.items():
            if i == env.unit_index:
                out = element_add(out, element_scale(c / env.unit_coeff, unit_a))
            else:
                out = element_add(out, element_scale(c, images[env._pos[i]]))
        return out

    for p in range(len(env.gens)):
        for q in range(len(env.gens)):
            xi = src.basis_element(env.gens[p])
            xj = src.basis_element(env.gens[q])
            lhs = rho(src.apply_generator(operads.BRACKET, [xi, xj]))
            di = env.gen_degree[p]
            dj = env.gen_degree[q]
            sign = -1 if (di * dj) % 2 else 1
            fwd = a.apply_generator(operads.MU, [images[p], images[q]])
            bwd = a.apply_generator(operads.MU, [images[q], images[p]])
            rhs = element_add(fwd, element_scale(-sign, bwd))
            if element_add(lhs, element_scale(-1, rhs)):
                issues.append(f"bracket not preserved on generators ({p}, {q})")
    for p in range(len(env.gens)):
        lhs = rho(src.differential(src.basis_element(env.gens[p])))
        rhs = a.differential(images[p])
        if element_add(lhs, element_scale(-1, rhs)):
            issues.append(f"differential not intertwined on generator {p}")
    # truncation stability: (N+1)-fold products of generator images vanish
    issues.extend(_stability_defects(env, a, images))
    return issues


def _stability_defects(env: TruncatedEnvelope, a: DgAlgebra, images: Sequence[Element]) -> List[str]:
    n = env.truncation
    gens = range(len(env.gens))

    def products(length):
        if length == 0:
            yield a.structure[operads.ETA], ()
            return
        for x, w in products(length - 1):
            for p in gens:
                yield a.apply_generator(operads.MU, [x, images[p]]), w + (p,)

    for x, w in products(n + 1):
        if x:
            return [f"stability fails: product of generator images {w} is nonzero "
                    f"beyond truncation {n}"]
    return []


def extend_from_generators(env: TruncatedEnvelope, a: DgAlgebra,
                           images: Sequence[Element], validate: bool = True) -> Dict[Word, Element]:
    """Left-to-right multiplicative extension kappa of generator images.

    Returns the values of kappa on every PBW monomial of the stage.
    """
    if validate:
        issues = validate_lie_map_into_algebra(env, a, images)
        if issues:
            raise StructuralError("generator images do not define a morphism: " + "; ".join(issues))
    values: Dict[Word, Element] = {(): dict(a.structure[operads.ETA])}
    for w in env.monomials():
        if w == ():
            continue
        prefix = values[w[:-1]]
        values[w] = a.apply_generator(operads.MU, [prefix, images[w[-1]]])
    return values


def restrict_to_generators(env: TruncatedEnvelope, kappa: Mapping[Word, Element]) -> List[Element]:
    """Values of an envelope-algebra map on the length-1 monomials."""
    return [dict(kappa[(p,)]) for p in range(len(env.gens))]


def adjunction_roundtrip(env: TruncatedEnvelope, a: DgAlgebra,
                         images: Optional[Sequence[Element]] = None,
                         kappa: Optional[Mapping[Word, Element]] = None):
    """Run the unit/counit roundtrips of the envelope adjunction.

    Exactly one of ``images`` (a Lie map on generators) or ``kappa`` (an
    algebra map on monomials) must be given; returns the pair
    ``(images, kappa)`` after one roundtrip in the corresponding direction.
    """
    if (images is None) == (kappa is None):
        raise StructuralError("provide exactly one of images or kappa")
    if images is not None:
        kappa_out = extend_from_generators(env, a, images)
        images_out = restrict_to_generators(env, kappa_out)
        return images_out, kappa_out
    images_out = restrict_to_generators(env, kappa)
    kappa_out = extend_from_generators(env, a, images_out)
    return images_out, kappa_out

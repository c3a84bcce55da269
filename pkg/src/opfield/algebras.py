"""Finite-dimensional dg algebras given by structure constants.

An algebra element is a sparse dict {global basis index: Fraction} over the
carrier's per-degree bases flattened in increasing degree order.  Structure
maps are sparse tensors: arity-k generators map k-tuples of basis indices to
elements.  Validation checks that every structure map is a chain map (the
differential is a graded derivation of each generator operation) and that the
named presentation's relations evaluate to zero on all basis tuples.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .complexes import ChainComplex, ChainMap
from .errors import StructuralError
from .exact import RationalMatrix, rat
from . import operads
from .operads import named_presentation, check_relations

Element = Dict[int, Fraction]


class GradedBasis:
    """Flattening of a complex's per-degree bases in increasing degree order."""

    __slots__ = ("complex", "degrees", "offsets")

    def __init__(self, c: ChainComplex):
        self.complex = c
        self.degrees = []
        self.offsets = {}
        for n in c.support:
            self.offsets[n] = len(self.degrees)
            self.degrees.extend([n] * c.dim(n))

    @property
    def total(self) -> int:
        return len(self.degrees)

    def degree_of(self, i: int) -> int:
        return self.degrees[i]

    def to_global(self, degree: int, local: int) -> int:
        return self.offsets[degree] + local

    def to_local(self, i: int) -> Tuple[int, int]:
        n = self.degrees[i]
        return n, i - self.offsets[n]

    def differential(self, x: Element) -> Element:
        out: Element = {}
        for i, c in x.items():
            n, li = self.to_local(i)
            d = self.complex.d(n)
            for (r, col), v in d.entries.items():
                if col == li:
                    j = self.to_global(n - 1, r)
                    nv = out.get(j, Fraction(0)) + c * v
                    if nv:
                        out[j] = nv
                    elif j in out:
                        del out[j]
        return out


def element_add(x: Element, y: Element) -> Element:
    out = dict(x)
    for k, v in y.items():
        nv = out.get(k, Fraction(0)) + v
        if nv:
            out[k] = nv
        elif k in out:
            del out[k]
    return out


def element_scale(c, x: Element) -> Element:
    c = rat(c)
    if not c:
        return {}
    return {k: c * v for k, v in x.items()}


class DgAlgebra:
    """Structure-constant dg algebra of one of the named kinds.

    ``structure`` maps generator names to sparse tensors: for arity k >= 1 a
    dict {(i_1, ..., i_k): element}, for arity 0 an element (a vector).
    """

    def __init__(self, carrier: ChainComplex, kind: str, structure: Mapping[str, object]):
        self.carrier = carrier
        self.kind = kind
        self.presentation = named_presentation(kind)
        self.basis = GradedBasis(carrier)
        self.structure = {}
        for gen in self.presentation.alphabet.generators:
            self.structure[gen.name] = structure.get(gen.name) or {}
        unknown = set(structure) - set(self.structure)
        if unknown:
            raise StructuralError(f"structure maps for unknown generators: {sorted(unknown)}")

    # -- element protocol used by operads.evaluate ---------------------------
    def zero_element(self) -> Element:
        return {}

    def add(self, x: Element, y: Element) -> Element:
        return element_add(x, y)

    def scale(self, c, x: Element) -> Element:
        return element_scale(c, x)

    def element_degree(self, x: Element) -> Optional[int]:
        degs = {self.basis.degree_of(i) for i in x}
        if not degs:
            return None
        if len(degs) > 1:
            raise StructuralError(f"element is not homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def basis_elements(self) -> List[Element]:
        return [{i: Fraction(1)} for i in range(self.basis.total)]

    def basis_element(self, i: int) -> Element:
        return {i: Fraction(1)}

    def apply_generator(self, name: str, args: Sequence[Element]) -> Element:
        gen = self.presentation.alphabet[name]
        if len(args) != gen.arity:
            raise StructuralError(f"generator {name} expects {gen.arity} arguments")
        tensor = self.structure[name]
        if gen.arity == 0:
            return dict(tensor)
        out: Element = {}
        combos = [((), Fraction(1))]
        for x in args:
            combos = [(key + (i,), c * v) for key, c in combos for i, v in x.items()]
        for key, c in combos:
            cell = tensor.get(key)
            if not cell:
                continue
            for j, w in cell.items():
                nv = out.get(j, Fraction(0)) + c * w
                if nv:
                    out[j] = nv
                elif j in out:
                    del out[j]
        return out

    def differential(self, x: Element) -> Element:
        return self.basis.differential(x)

    def unit_direction(self) -> Optional[Tuple[int, Fraction]]:
        """(index, coefficient) when the unit vector is supported on a single
        basis vector; None otherwise (or when the kind has no unit)."""
        eta = self.structure.get(operads.ETA)
        if eta and len(eta) == 1:
            ((i, c),) = eta.items()
            return i, c
        return None

    def __repr__(self):
        return f"DgAlgebra(kind={self.kind}, dim={self.basis.total})"


def _derivation_defect(a: DgAlgebra, gen_name: str) -> List[str]:
    """Degrees where d fails the graded Leibniz rule on one structure map."""
    gen = a.presentation.alphabet[gen_name]
    issues = []
    idx_range = range(a.basis.total)
    if gen.arity == 0:
        if a.differential(a.structure[gen_name]):
            issues.append(f"{gen_name}: unit vector is not a cycle")
        return issues

    def tuples(length):
        if length == 0:
            yield ()
            return
        for head in idx_range:
            for tail in tuples(length - 1):
                yield (head,) + tail

    for combo in tuples(gen.arity):
        args = [a.basis_element(i) for i in combo]
        lhs = a.differential(a.apply_generator(gen_name, args))
        rhs: Element = {}
        sign_parity = 0
        for j, i in enumerate(combo):
            darg = a.differential(a.basis_element(i))
            if darg:
                new_args = list(args)
                new_args[j] = darg
                term = a.apply_generator(gen_name, new_args)
                sign = -1 if sign_parity % 2 else 1
                rhs = element_add(rhs, element_scale(sign, term))
            sign_parity += a.basis.degree_of(i)
        if element_add(lhs, element_scale(-1, rhs)):
            issues.append(f"{gen_name}: differential is not a derivation at basis tuple {combo}")
    return issues


def validate_algebra(a: DgAlgebra) -> List[str]:
    """Chain-map checks for all structure maps plus relation checks."""
    from .complexes import validate_complex

    issues = [f"carrier: {msg}" for msg in validate_complex(a.carrier)]
    for gen in a.presentation.alphabet.generators:
        issues.extend(_derivation_defect(a, gen.name))
    for violation in check_relations(a.presentation, a):
        issues.append(str(violation))
    return issues


def is_algebra_morphism(f: ChainMap, source: DgAlgebra, target: DgAlgebra) -> List[str]:
    """Check that a chain map intertwines all structure maps exactly."""
    issues = []
    if f.source is not source.carrier and f.source.dims != source.carrier.dims:
        issues.append("chain map source does not match algebra carrier")
        return issues
    if f.target is not target.carrier and f.target.dims != target.carrier.dims:
        issues.append("chain map target does not match algebra carrier")
        return issues
    if source.kind != target.kind:
        issues.append(f"kind mismatch: {source.kind} != {target.kind}")
        return issues
    issues.extend(f"chain map: {m}" for m in f.commutes())

    def push(x: Element) -> Element:
        return push_element(f, source.basis, target.basis, x)

    total = source.basis.total
    for gen in source.presentation.alphabet.generators:
        def tuples(length):
            if length == 0:
                yield ()
                return
            for head in range(total):
                for tail in tuples(length - 1):
                    yield (head,) + tail

        for combo in tuples(gen.arity):
            args = [source.basis_element(i) for i in combo]
            lhs = push(source.apply_generator(gen.name, args))
            rhs = target.apply_generator(gen.name, [push(x) for x in args])
            if element_add(lhs, element_scale(-1, rhs)):
                issues.append(f"{gen.name} not intertwined at basis tuple {combo}")
    return issues


def push_element(f: ChainMap, source_basis: GradedBasis, target_basis: GradedBasis, x: Element) -> Element:
    """Apply a chain map to a flattened element."""
    out: Element = {}
    for i, c in x.items():
        n, li = source_basis.to_local(i)
        comp = f.component(n)
        for (r, col), v in comp.entries.items():
            if col == li:
                j = target_basis.to_global(n, r)
                nv = out.get(j, Fraction(0)) + c * v
                if nv:
                    out[j] = nv
                elif j in out:
                    del out[j]
    return out


def commutator_functor(a: DgAlgebra) -> DgAlgebra:
    """Same carrier, bracket = graded commutator of the multiplication."""
    if a.kind != "As":
        raise StructuralError(f"commutator functor expects an associative algebra, got {a.kind}")
    bracket: Dict[Tuple[int, int], Element] = {}
    total = a.basis.total
    for i in range(total):
        di = a.basis.degree_of(i)
        for j in range(total):
            dj = a.basis.degree_of(j)
            fwd = a.apply_generator(operads.MU, [a.basis_element(i), a.basis_element(j)])
            bwd = a.apply_generator(operads.MU, [a.basis_element(j), a.basis_element(i)])
            sign = -1 if (di * dj) % 2 else 1
            cell = element_add(fwd, element_scale(-sign, bwd))
            if cell:
                bracket[(i, j)] = cell
    return DgAlgebra(a.carrier, "uLie", {
        operads.BRACKET: bracket,
        operads.ETA: dict(a.structure[operads.ETA]),
    })


class PresymplecticComplex:
    """A complex with a graded-antisymmetric chain pairing into the ground field.

    ``omega`` is a sparse dict {(i, j): Fraction} over flattened basis indices,
    supported on pairs of total degree zero.
    """

    def __init__(self, carrier: ChainComplex, omega: Mapping[Tuple[int, int], object]):
        self.carrier = carrier
        self.basis = GradedBasis(carrier)
        self.omega: Dict[Tuple[int, int], Fraction] = {}
        for (i, j), v in omega.items():
            v = rat(v)
            if not v:
                continue
            if not (0 <= i < self.basis.total and 0 <= j < self.basis.total):
                raise StructuralError(f"omega index ({i}, {j}) out of range")
            if self.basis.degree_of(i) + self.basis.degree_of(j) != 0:
                raise StructuralError(f"omega entry ({i}, {j}) is not of total degree zero")
            self.omega[(i, j)] = v

    def pair_basis(self, i: int, j: int) -> Fraction:
        return self.omega.get((i, j), Fraction(0))

    def pair(self, x: Element, y: Element) -> Fraction:
        acc = Fraction(0)
        for i, c in x.items():
            for j, d in y.items():
                v = self.omega.get((i, j))
                if v:
                    acc += c * d * v
        return acc

    def validate(self) -> List[str]:
        issues = []
        total = self.basis.total
        for i in range(total):
            di = self.basis.degree_of(i)
            for j in range(total):
                dj = self.basis.degree_of(j)
                if di + dj != 0:
                    continue
                sign = -1 if (di * dj) % 2 else 1
                if self.pair_basis(i, j) != -sign * self.pair_basis(j, i):
                    issues.append(f"omega not graded-antisymmetric at ({i}, {j})")
        # chain-map condition: omega(dx, y) + (-1)^|x| omega(x, dy) = 0
        for i in range(total):
            di = self.basis.degree_of(i)
            xi = {i: Fraction(1)}
            dxi = self.basis.differential(xi)
            for j in range(total):
                dj = self.basis.degree_of(j)
                if di + dj != 1:
                    continue
                yj = {j: Fraction(1)}
                dyj = self.basis.differential(yj)
                sign = -1 if di % 2 else 1
                value = self.pair(dxi, yj) + sign * self.pair(xi, dyj)
                if value:
                    issues.append(f"omega not a chain map at ({i}, {j})")
        return issues


def heisenberg(v: PresymplecticComplex) -> DgAlgebra:
    """Unital Lie algebra on carrier + ground field with bracket through omega.

    The unit is appended at the end of the degree-0 block; brackets of carrier
    vectors land on the unit with coefficient omega, and the unit brackets to
    zero.  The zero complex yields the ground-field algebra (unit only).
    """
    c = v.carrier
    old_dim0 = c.dim(0)
    dims = dict(c.dims)
    dims[0] = old_dim0 + 1
    diffs = {}
    for n in set(c.diffs):
        m = c.d(n)
        diffs[n] = RationalMatrix(dims.get(n - 1, 0), dims.get(n, 0), dict(m.entries))
    carrier = ChainComplex(dims, diffs)
    new_basis = GradedBasis(carrier)
    unit_global = new_basis.to_global(0, old_dim0)

    def remap(i: int) -> int:
        n, li = v.basis.to_local(i)
        return new_basis.to_global(n, li)

    bracket: Dict[Tuple[int, int], Element] = {}
    for (i, j), w in v.omega.items():
        bracket[(remap(i), remap(j))] = {unit_global: w}
    return DgAlgebra(carrier, "uLie", {
        operads.BRACKET: bracket,
        operads.ETA: {unit_global: Fraction(1)},
    })


def heisenberg_embedding(v: PresymplecticComplex, h: DgAlgebra):
    """Map an element over the carrier basis into the Heisenberg algebra's
    basis (the appended unit shifts the positive-degree block)."""
    def embed(x: Element) -> Element:
        return {h.basis.to_global(*v.basis.to_local(i)): c for i, c in x.items()}

    return embed


def heisenberg_map(f: ChainMap, source: DgAlgebra, target: DgAlgebra) -> ChainMap:
    """Extend a chain map of carriers to the Heisenberg algebras by the
    identity on the appended unit summand."""
    src_unit = source.unit_direction()
    tgt_unit = target.unit_direction()
    if src_unit is None or tgt_unit is None:
        raise StructuralError("heisenberg_map needs algebras with a basis-vector unit")
    comps = {}
    for n in source.carrier.support:
        rows = target.carrier.dim(n)
        cols = source.carrier.dim(n)
        entries = dict(f.component(n).entries) if f.source.dim(n) and f.target.dim(n) else {}
        if n == 0:
            src_local = src_unit[0] - source.basis.offsets[0]
            tgt_local = tgt_unit[0] - target.basis.offsets[0]
            entries[(tgt_local, src_local)] = Fraction(1)
        if rows and cols and entries:
            comps[n] = RationalMatrix(rows, cols, entries)
    return ChainMap(source.carrier, target.carrier, comps)

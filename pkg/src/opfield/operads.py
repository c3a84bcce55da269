"""Free-operad trees, presentations, and evaluation into concrete algebras.

Operations of a presented operad are represented by rooted trees over a
generator alphabet.  Input slots carry explicit position labels (a
permutation of 1..n), so the symmetric-group action is total and independent
of planar order.  Relations of a presentation are pairs of formal rational
linear combinations of trees; they are checked by evaluating both sides on
all basis tuples of a concrete algebra rather than by symbolic rewriting.

Evaluation is graded: reading the inputs in the tree's planar label order
incurs the Koszul sign of the corresponding permutation on homogeneous
inputs.  All generators of the named presentations are degree 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import StructuralError
from .exact import rat, rat_str

DEFAULT_COLOR = "*"


@dataclass(frozen=True)
class Generator:
    name: str
    arity: int
    degree: int = 0
    in_colors: Tuple[str, ...] = None
    out_color: str = DEFAULT_COLOR

    def __post_init__(self):
        if self.in_colors is None:
            object.__setattr__(self, "in_colors", (DEFAULT_COLOR,) * self.arity)
        if self.arity < 0:
            raise StructuralError(f"generator {self.name} has negative arity")
        if len(self.in_colors) != self.arity:
            raise StructuralError(f"generator {self.name}: color count != arity")


class GeneratorAlphabet:
    def __init__(self, generators: Sequence[Generator], colors: Optional[Iterable[str]] = None):
        self.generators = tuple(generators)
        self.by_name = {g.name: g for g in self.generators}
        if len(self.by_name) != len(self.generators):
            raise StructuralError("duplicate generator names")
        declared = set(colors) if colors is not None else {DEFAULT_COLOR}
        for g in self.generators:
            missing = ({g.out_color} | set(g.in_colors)) - declared
            if missing:
                raise StructuralError(f"generator {g.name} uses undeclared colors {sorted(missing)}")
        self.colors = frozenset(declared)

    def __getitem__(self, name: str) -> Generator:
        return self.by_name[name]


class OperadTree:
    """Immutable rooted tree; leaves carry input position labels."""

    __slots__ = ("kind", "gen", "children", "slot", "color", "arity", "_hash", "_planar")

    def __init__(self, kind, gen=None, children=(), slot=None, color=DEFAULT_COLOR):
        self.kind = kind
        self.gen = gen
        self.children = tuple(children)
        self.slot = slot
        self.color = color
        if kind == "leaf":
            self.arity = 1
            self._planar = (slot,)
        else:
            self.arity = sum(ch.arity for ch in self.children) if self.children else 0
            planar = []
            for ch in self.children:
                planar.extend(ch.planar_labels())
            self._planar = tuple(planar)
        self._hash = hash((kind, gen, self.children, slot, color))

    def planar_labels(self) -> Tuple[int, ...]:
        """Leaf labels in planar (left-to-right) order."""
        return self._planar

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, OperadTree):
            return NotImplemented
        return (self.kind, self.gen, self.children, self.slot, self.color) == \
               (other.kind, other.gen, other.children, other.slot, other.color)

    def __repr__(self):
        return format_tree(self)


def leaf(slot: int = 1, color: str = DEFAULT_COLOR) -> OperadTree:
    """A bare input slot; ``leaf(1)`` is the operadic unit tree."""
    return OperadTree("leaf", slot=slot, color=color)


def node(gen: str, children: Sequence[OperadTree]) -> OperadTree:
    return OperadTree("node", gen=gen, children=tuple(children))


def unit_tree(color: str = DEFAULT_COLOR) -> OperadTree:
    return leaf(1, color)


def validate_tree(t: OperadTree, alphabet: GeneratorAlphabet) -> None:
    """Check label and color discipline against an alphabet."""
    labels = t.planar_labels()
    if sorted(labels) != list(range(1, len(labels) + 1)):
        raise StructuralError(f"leaf labels {labels} are not a permutation of 1..{len(labels)}")

    def walk(s: OperadTree) -> str:
        if s.kind == "leaf":
            return s.color
        g = alphabet.by_name.get(s.gen)
        if g is None:
            raise StructuralError(f"unknown generator {s.gen!r}")
        if len(s.children) != g.arity:
            raise StructuralError(f"generator {s.gen} has arity {g.arity}, got {len(s.children)} children")
        for ch, expected in zip(s.children, g.in_colors):
            got = walk(ch)
            if got != expected:
                raise StructuralError(f"color mismatch under {s.gen}: {got} != {expected}")
        return g.out_color

    walk(t)


def format_tree(t: OperadTree) -> str:
    if t.kind == "leaf":
        return str(t.slot)
    return f"{t.gen}({', '.join(format_tree(ch) for ch in t.children)})"


def parse_tree(text: str, alphabet: GeneratorAlphabet) -> OperadTree:
    """Parse ``mu(eta(), 1)``-style prefix notation; ``slot(i)`` and bare
    integers both denote input slots."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_expr() -> OperadTree:
        nonlocal pos
        skip_ws()
        start = pos
        if pos < len(text) and (text[pos].isdigit() or text[pos] == "-"):
            while pos < len(text) and (text[pos].isdigit() or text[pos] == "-"):
                pos += 1
            return leaf(int(text[start:pos]))
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        name = text[start:pos]
        if not name:
            raise StructuralError(f"parse error at position {pos} in tree expression")
        skip_ws()
        if pos >= len(text) or text[pos] != "(":
            raise StructuralError(f"expected '(' after {name!r}")
        pos += 1
        args = []
        skip_ws()
        if pos < len(text) and text[pos] == ")":
            pos += 1
        else:
            while True:
                args.append(parse_expr())
                skip_ws()
                if pos < len(text) and text[pos] == ",":
                    pos += 1
                    continue
                if pos < len(text) and text[pos] == ")":
                    pos += 1
                    break
                raise StructuralError(f"expected ',' or ')' at position {pos}")
        if name == "slot":
            if len(args) != 1 or args[0].kind != "leaf":
                raise StructuralError("slot(...) takes a single integer")
            return args[0]
        return node(name, args)

    t = parse_expr()
    skip_ws()
    if pos != len(text):
        raise StructuralError(f"trailing input at position {pos}")
    validate_tree(t, alphabet)
    return t


class TreeSum:
    """Formal rational linear combination of trees of a common arity."""

    __slots__ = ("terms", "arity")

    def __init__(self, terms: Mapping[OperadTree, Fraction] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: Dict[OperadTree, Fraction] = {}
        arity = None
        for t, c in items:
            c = rat(c)
            if not c:
                continue
            if arity is None:
                arity = t.arity
            elif t.arity != arity:
                raise StructuralError("mixed arities in a tree combination")
            clean[t] = clean.get(t, Fraction(0)) + c
        self.terms = {t: c for t, c in clean.items() if c}
        self.arity = arity

    @classmethod
    def of(cls, t: OperadTree, coeff=1) -> "TreeSum":
        return cls({t: rat(coeff)})

    @classmethod
    def zero(cls) -> "TreeSum":
        return cls({})

    def __add__(self, other: "TreeSum") -> "TreeSum":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, Fraction(0)) + c
        return TreeSum(out)

    def __sub__(self, other: "TreeSum") -> "TreeSum":
        return self + other.scale(-1)

    def scale(self, c) -> "TreeSum":
        c = rat(c)
        return TreeSum({t: c * v for t, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, TreeSum):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for t, c in sorted(self.terms.items(), key=lambda kv: format_tree(kv[0])):
            parts.append(f"{rat_str(c)}*{format_tree(t)}")
        return " + ".join(parts)


def _relabel(t: OperadTree, mapping: Dict[int, int]) -> OperadTree:
    if t.kind == "leaf":
        return leaf(mapping[t.slot], t.color)
    return node(t.gen, [_relabel(ch, mapping) for ch in t.children])


def graft(outer: OperadTree, inners: Sequence[OperadTree]) -> OperadTree:
    """Operadic composition: leaf labeled i is replaced by inners[i-1].

    The leaves of inners[i-1] are relabeled into the i-th block of the
    concatenation 1..k_1+...+k_n, so composition follows slot labels, not
    planar positions.
    """
    if outer.arity != len(inners):
        raise StructuralError(f"graft arity mismatch: outer expects {outer.arity}, got {len(inners)}")
    offsets = {}
    acc = 0
    for i, inner in enumerate(inners, start=1):
        offsets[i] = acc
        acc += inner.arity

    def walk(t: OperadTree) -> OperadTree:
        if t.kind == "leaf":
            inner = inners[t.slot - 1]
            off = offsets[t.slot]
            return _relabel(inner, {s: s + off for s in inner.planar_labels()})
        return node(t.gen, [walk(ch) for ch in t.children])

    return walk(outer)


def permute(t: OperadTree, sigma: Sequence[int]) -> OperadTree:
    """Right permutation action: the leaf labeled l is relabeled sigma(l).

    Convention: evaluate(permute(t, sigma), a, xs) equals, up to Koszul sign,
    evaluate(t, a, [xs[sigma(l)-1] for l]); composing actions satisfies
    permute(permute(t, s), u) == permute(t, perm_compose(s, u)).
    """
    n = t.arity
    if sorted(sigma) != list(range(1, n + 1)):
        raise StructuralError(f"{sigma} is not a permutation of 1..{n}")
    return _relabel(t, {l: sigma[l - 1] for l in range(1, n + 1)})


def perm_compose(sigma: Sequence[int], tau: Sequence[int]) -> Tuple[int, ...]:
    """Diagrammatic composition: apply sigma first, then tau."""
    return tuple(tau[s - 1] for s in sigma)


def graft_sum(outer: TreeSum, inners: Sequence[TreeSum]) -> TreeSum:
    """Multilinear extension of graft to linear combinations."""
    out: Dict[OperadTree, Fraction] = {}

    def expand(i: int, chosen: List[OperadTree], coeff: Fraction, outer_tree: OperadTree):
        if i == len(inners):
            t = graft(outer_tree, chosen)
            out[t] = out.get(t, Fraction(0)) + coeff
            return
        for t, c in inners[i].terms.items():
            expand(i + 1, chosen + [t], coeff * c, outer_tree)

    for ot, oc in outer.terms.items():
        expand(0, [], oc, ot)
    return TreeSum(out)


def koszul_sign(order: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign incurred by reading graded inputs x_1..x_n in the given label order.

    Each inverted pair (labels appearing as ...j...i... with j > i)
    contributes (-1)^(|x_j| * |x_i|).
    """
    parity = 0
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b]:
                parity += degrees[order[a] - 1] * degrees[order[b] - 1]
    return -1 if parity % 2 else 1


def evaluate_tree(t: OperadTree, algebra, inputs: Sequence) -> "object":
    """Evaluate a tree on homogeneous algebra elements, with Koszul signs.

    ``algebra`` must provide ``apply_generator(name, args)``, ``element_degree``,
    ``scale`` and ``zero_element`` (see :class:`opfield.algebras.DgAlgebra`).
    """
    if t.arity != len(inputs):
        raise StructuralError(f"tree arity {t.arity} != number of inputs {len(inputs)}")
    order = t.planar_labels()
    degrees = []
    for x in inputs:
        d = algebra.element_degree(x)
        degrees.append(0 if d is None else d)
    sign = koszul_sign(order, degrees)
    queue = [inputs[l - 1] for l in order]
    pos = 0

    def walk(s: OperadTree):
        nonlocal pos
        if s.kind == "leaf":
            x = queue[pos]
            pos += 1
            return x
        args = [walk(ch) for ch in s.children]
        return algebra.apply_generator(s.gen, args)

    value = walk(t)
    return value if sign == 1 else algebra.scale(sign, value)


def evaluate(expr, algebra, inputs: Sequence):
    """Evaluate a tree or a linear combination of trees."""
    if isinstance(expr, OperadTree):
        return evaluate_tree(expr, algebra, inputs)
    acc = algebra.zero_element()
    for t, c in expr.terms.items():
        acc = algebra.add(acc, algebra.scale(c, evaluate_tree(t, algebra, inputs)))
    return acc


@dataclass(frozen=True)
class Relation:
    name: str
    lhs: TreeSum
    rhs: TreeSum

    def __post_init__(self):
        la, ra = self.lhs.arity, self.rhs.arity
        if la is not None and ra is not None and la != ra:
            raise StructuralError(f"relation {self.name}: arity mismatch {la} != {ra}")

    @property
    def arity(self) -> int:
        return self.lhs.arity if self.lhs.arity is not None else self.rhs.arity


class OperadPresentation:
    def __init__(self, name: str, alphabet: GeneratorAlphabet, relations: Sequence[Relation],
                 distinguished_pair: Optional[Tuple[TreeSum, TreeSum]] = None):
        self.name = name
        self.alphabet = alphabet
        self.relations = tuple(relations)
        if distinguished_pair is not None:
            r1, r2 = distinguished_pair
            for r in (r1, r2):
                if r.arity is not None and r.arity != 2:
                    raise StructuralError("distinguished pair must have arity 2")
        self.distinguished_pair = distinguished_pair


@dataclass
class RelationViolation:
    relation: str
    basis_tuple: Tuple[int, ...]
    discrepancy: dict

    def __str__(self):
        entries = ", ".join(f"e{k}: {rat_str(v)}" for k, v in sorted(self.discrepancy.items()))
        return f"{self.relation} fails on basis tuple {self.basis_tuple}: {entries}"


def check_relations(p: OperadPresentation, algebra) -> List[RelationViolation]:
    """Evaluate every relation on every tuple of basis elements; exact equality.

    Violations are returned as data (with witnessing basis tuple and the
    nonzero discrepancy), never raised.
    """
    violations = []
    basis = algebra.basis_elements()
    for rel in p.relations:
        n = rel.arity or 0
        for combo in _tuples(len(basis), n):
            inputs = [basis[i] for i in combo]
            lhs = evaluate(rel.lhs, algebra, inputs)
            rhs = evaluate(rel.rhs, algebra, inputs)
            diff = algebra.add(lhs, algebra.scale(-1, rhs))
            if diff:
                violations.append(RelationViolation(rel.name, combo, dict(diff)))
    return violations


def _tuples(count: int, length: int):
    if length == 0:
        yield ()
        return
    for head in range(count):
        for tail in _tuples(count, length - 1):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# Named single-colored presentations
# ---------------------------------------------------------------------------

MU, ETA, BRACKET, PBRACKET = "mu", "eta", "bracket", "pbracket"


def _mu_tree():
    return node(MU, [leaf(1), leaf(2)])


def _mu_op_tree():
    return node(MU, [leaf(2), leaf(1)])


def _bracket_tree(name=BRACKET):
    return node(name, [leaf(1), leaf(2)])


def commutator_sum() -> TreeSum:
    """mu - mu^op, the arity-2 commutator combination in the associative alphabet."""
    return TreeSum({_mu_tree(): 1, _mu_op_tree(): -1})


def _assoc_relations(mul=MU, unit=ETA) -> List[Relation]:
    t_left = node(mul, [node(mul, [leaf(1), leaf(2)]), leaf(3)])
    t_right = node(mul, [leaf(1), node(mul, [leaf(2), leaf(3)])])
    lu = node(mul, [node(unit, []), leaf(1)])
    ru = node(mul, [leaf(1), node(unit, [])])
    return [
        Relation("associativity", TreeSum.of(t_left), TreeSum.of(t_right)),
        Relation("left unitality", TreeSum.of(lu), TreeSum.of(leaf(1))),
        Relation("right unitality", TreeSum.of(ru), TreeSum.of(leaf(1))),
    ]


def _lie_relations(br=BRACKET) -> List[Relation]:
    b = node(br, [leaf(1), leaf(2)])
    b_swapped = node(br, [leaf(2), leaf(1)])
    jac = TreeSum({
        node(br, [leaf(1), node(br, [leaf(2), leaf(3)])]): 1,
        node(br, [leaf(2), node(br, [leaf(3), leaf(1)])]): 1,
        node(br, [leaf(3), node(br, [leaf(1), leaf(2)])]): 1,
    })
    return [
        Relation("antisymmetry", TreeSum.of(b), TreeSum.of(b_swapped, -1)),
        Relation("Jacobi", jac, TreeSum.zero()),
    ]


def named_presentation(which: str) -> OperadPresentation:
    """The associative, Lie, unital Lie and Poisson presentations.

    Distinguished arity-2 pairs: (mu - mu^op, 0) for As, (bracket, 0) for
    Lie/uLie, (pbracket, 0) for Pois; these are the operations compared by the
    causality axiom.
    """
    zero = TreeSum.zero()
    if which == "As":
        alphabet = GeneratorAlphabet([Generator(MU, 2), Generator(ETA, 0)])
        return OperadPresentation("As", alphabet, _assoc_relations(),
                                  distinguished_pair=(commutator_sum(), zero))
    if which == "Lie":
        alphabet = GeneratorAlphabet([Generator(BRACKET, 2)])
        return OperadPresentation("Lie", alphabet, _lie_relations(),
                                  distinguished_pair=(TreeSum.of(_bracket_tree()), zero))
    if which == "uLie":
        alphabet = GeneratorAlphabet([Generator(BRACKET, 2), Generator(ETA, 0)])
        unit_bracket = node(BRACKET, [leaf(1), node(ETA, [])])
        relations = _lie_relations() + [Relation("unit bracket", TreeSum.of(unit_bracket), zero)]
        return OperadPresentation("uLie", alphabet, relations,
                                  distinguished_pair=(TreeSum.of(_bracket_tree()), zero))
    if which == "Pois":
        alphabet = GeneratorAlphabet([Generator(MU, 2), Generator(ETA, 0), Generator(PBRACKET, 2)])
        comm = Relation("commutativity", TreeSum.of(_mu_tree()), TreeSum.of(_mu_op_tree()))
        deriv_lhs = node(PBRACKET, [leaf(1), node(MU, [leaf(2), leaf(3)])])
        deriv_rhs = TreeSum({
            node(MU, [node(PBRACKET, [leaf(1), leaf(2)]), leaf(3)]): 1,
            node(MU, [leaf(2), node(PBRACKET, [leaf(1), leaf(3)])]): 1,
        })
        unit_bracket = node(PBRACKET, [leaf(1), node(ETA, [])])
        relations = (
            _assoc_relations()
            + _lie_relations(PBRACKET)
            + [comm,
               Relation("right derivation", TreeSum.of(deriv_lhs), deriv_rhs),
               Relation("unit bracket", TreeSum.of(unit_bracket), zero)]
        )
        return OperadPresentation("Pois", alphabet, relations,
                                  distinguished_pair=(TreeSum.of(_bracket_tree(PBRACKET)), zero))
    raise StructuralError(f"unknown presentation {which!r}")


def phi_ulie_to_as() -> Dict[str, TreeSum]:
    """Generator assignment of the bracket-to-commutator operad morphism:
    eta -> eta, bracket -> mu - mu^op."""
    return {
        ETA: TreeSum.of(node(ETA, [])),
        BRACKET: commutator_sum(),
    }


def _splice(image: OperadTree, subs: Sequence[TreeSum]) -> TreeSum:
    """Replace the leaf labeled i of ``image`` by the trees of ``subs[i-1]``.

    Substituted subtrees keep their own (absolute) leaf labels, so no
    relabeling is involved; ``image`` is a standard tree with labels 1..k.
    """
    if image.kind == "leaf":
        return subs[image.slot - 1]
    out = TreeSum.of(node(image.gen, []))

    def attach(acc: TreeSum, child: OperadTree) -> TreeSum:
        piece = _splice(child, subs)
        res: Dict[OperadTree, Fraction] = {}
        for t0, c0 in acc.terms.items():
            for t1, c1 in piece.terms.items():
                t = node(t0.gen, list(t0.children) + [t1])
                res[t] = res.get(t, Fraction(0)) + c0 * c1
        return TreeSum(res)

    for ch in image.children:
        out = attach(out, ch)
    return out


def apply_morphism(assignment: Mapping[str, TreeSum], expr) -> TreeSum:
    """Push a tree (or combination) through a generator assignment.

    Every generator node is replaced by its image combination, spliced over
    the images of its children; leaves are kept with their labels.
    """
    if isinstance(expr, TreeSum):
        out = TreeSum.zero()
        for t, c in expr.terms.items():
            out = out + apply_morphism(assignment, t).scale(c)
        return out
    t = expr
    if t.kind == "leaf":
        return TreeSum.of(t)
    image = assignment.get(t.gen)
    if image is None:
        raise StructuralError(f"morphism does not assign generator {t.gen!r}")
    child_images = [apply_morphism(assignment, ch) for ch in t.children]
    out = TreeSum.zero()
    for img_tree, coeff in image.terms.items():
        out = out + _splice(img_tree, child_images).scale(coeff)
    return out


def morphism_preserves_pair(assignment: Mapping[str, TreeSum],
                            source_pair: Tuple[TreeSum, TreeSum],
                            target_pair: Tuple[TreeSum, TreeSum]) -> bool:
    """Structural check that a morphism of bipointed operads maps the
    distinguished pair to the distinguished pair."""
    img1 = apply_morphism(assignment, source_pair[0])
    img2 = apply_morphism(assignment, source_pair[1])
    return img1 == target_pair[0] and img2 == target_pair[1]

"""Two-dimensional cobordisms in normal form, an expression language for them,
and the functor to quasi-Hamiltonian spaces at the level of dimensions.

A morphism m -> n is a list of connected components, each carrying a genus
and the sets of source and target circle positions it touches.  Composition
glues along the shared circles: components are merged with a union-find,
Euler characteristics add, and the genus of a merged component is

    g = 1 - (chi + m + n) / 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CobordismError
from .quiver import star_quiver, validate


@dataclass(frozen=True)
class Component:
    genus: int
    ins: frozenset
    outs: frozenset

    @property
    def m(self):
        return len(self.ins)

    @property
    def n(self):
        return len(self.outs)

    @property
    def closed(self):
        return not self.ins and not self.outs

    @property
    def euler(self):
        return 2 - 2 * self.genus - self.m - self.n

    def key(self):
        return (self.genus, tuple(sorted(self.ins)), tuple(sorted(self.outs)))


@dataclass(frozen=True)
class CobMorphism:
    source: int
    target: int
    components: tuple
    log: tuple = field(default=(), compare=False)

    def __post_init__(self):
        ins = sorted(i for c in self.components for i in c.ins)
        outs = sorted(o for c in self.components for o in c.outs)
        if ins != list(range(self.source)) or outs != list(range(self.target)):
            raise CobordismError("legs must partition the source and target positions")
        if any(c.genus < 0 for c in self.components):
            raise CobordismError("negative genus")

    def normal_form(self):
        return (self.source, self.target, tuple(sorted(c.key() for c in self.components)))

    def same_as(self, other):
        return self.normal_form() == other.normal_form()

    @property
    def has_closed(self):
        return any(c.closed for c in self.components)

    def to_dict(self):
        return {"source": self.source, "target": self.target,
                "components": [{"genus": c.genus, "in": sorted(c.ins), "out": sorted(c.outs),
                                "closed": c.closed}
                               for c in sorted(self.components, key=Component.key)]}


def _comp(genus, ins=(), outs=()):
    return Component(genus, frozenset(ins), frozenset(outs))


def identity(n):
    return CobMorphism(n, n, tuple(_comp(0, [i], [i]) for i in range(n)))


_GENERATORS = {
    "cup": lambda: CobMorphism(1, 0, (_comp(0, [0], []),)),
    "cap": lambda: CobMorphism(0, 1, (_comp(0, [], [0]),)),
    "pants": lambda: CobMorphism(2, 1, (_comp(0, [0, 1], [0]),)),
    "copants": lambda: CobMorphism(1, 2, (_comp(0, [0], [0, 1]),)),
    "cyl": lambda: identity(1),
    "swap": lambda: CobMorphism(2, 2, (_comp(0, [0], [1]), _comp(0, [1], [0]))),
}

GENERATOR_NAMES = tuple(_GENERATORS) + ("id",)


def generator(name, n=None):
    if name == "id":
        if n is None or n < 0:
            raise CobordismError("id needs a non-negative circle count")
        return identity(n)
    try:
        return _GENERATORS[name]()
    except KeyError:
        raise CobordismError(f"unknown generator {name!r}") from None


def tensor(M1, M2):
    shifted = tuple(Component(c.genus, frozenset(i + M1.source for i in c.ins),
                              frozenset(o + M1.target for o in c.outs)) for c in M2.components)
    return CobMorphism(M1.source + M2.source, M1.target + M2.target,
                       M1.components + shifted, M1.log + M2.log)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _glue_classes(M2, M1):
    """Union-find classes over M1's components (0..k1-1) then M2's (k1..)."""
    if M1.target != M2.source:
        raise CobordismError(f"cannot compose: target {M1.target} does not match source {M2.source}")
    k1 = len(M1.components)
    uf = _UnionFind(k1 + len(M2.components))
    out_owner = {o: i for i, c in enumerate(M1.components) for o in c.outs}
    in_owner = {i_: k1 + j for j, c in enumerate(M2.components) for i_ in c.ins}
    for circle in range(M1.target):
        uf.union(out_owner[circle], in_owner[circle])
    classes = {}
    for idx in range(k1 + len(M2.components)):
        classes.setdefault(uf.find(idx), []).append(idx)
    glued = {}
    for circle in range(M1.target):
        glued.setdefault(uf.find(out_owner[circle]), []).append(circle)
    return k1, classes, glued


def compose(M2, M1):
    """M2 o M1: glue the targets of M1 to the sources of M2."""
    k1, classes, glued = _glue_classes(M2, M1)
    allc = M1.components + M2.components
    comps = []
    for root in sorted(classes):
        members = classes[root]
        chi = sum(allc[i].euler for i in members)
        ins = frozenset(i for k in members if k < k1 for i in allc[k].ins)
        outs = frozenset(o for k in members if k >= k1 for o in allc[k].outs)
        total = chi + len(ins) + len(outs)
        if total % 2:
            raise CobordismError("parity violation in composition (internal error)")
        comps.append(Component(1 - total // 2, ins, outs))
    steps = [f"glue {len(v)} circle(s) {v}; reduce by G^{len(v)}" for _, v in sorted(glued.items())]
    return CobMorphism(M1.source, M2.target, tuple(comps), M1.log + M2.log + tuple(steps))


# --------------------------------------------------------------------------
# parser:  expr := term (';' term)* ; term := factor ('*' factor)* ;
#          factor := NAME | 'id' NAT | '(' expr ')'

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_]+)|(?P<op>[;*()]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class ParseError(CobordismError):
    def __init__(self, msg, text, pos):
        self.line, self.col = _line_col(text, pos)
        super().__init__(f"{msg} at line {self.line}, column {self.col}")


def _tokenize(text):
    toks, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expr(self):
        left = self.term()
        while self.peek().text == ";" and self.peek().kind == "op":
            semi = self.take()
            right = self.term()
            try:
                left = compose(right, left)
            except CobordismError as exc:
                raise ParseError(f"composition mismatch ({exc})", self.text, semi.pos) from None
        return left

    def term(self):
        left = self.factor()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            left = tensor(left, self.factor())
        return left

    def factor(self):
        t = self.take()
        if t.kind == "op" and t.text == "(":
            inner = self.expr()
            close = self.take()
            if not (close.kind == "op" and close.text == ")"):
                raise ParseError("expected ')'", self.text, close.pos)
            return inner
        if t.kind == "name":
            if t.text == "id":
                n = self.take()
                if n.kind != "num":
                    raise ParseError("expected a circle count after 'id'", self.text, n.pos)
                return identity(int(n.text))
            if t.text in _GENERATORS:
                return generator(t.text)
            raise ParseError(f"unknown generator {t.text!r}", self.text, t.pos)
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", self.text, t.pos)


def parse_expression(text):
    p = _Parser(text)
    out = p.expr()
    if p.peek().kind != "eof":
        raise ParseError(f"unexpected {p.peek().text!r}", text, p.peek().pos)
    return out


# --------------------------------------------------------------------------
# the functor to quasi-Hamiltonian spaces

def component_dim(c, dim_G):
    """2(g + m + n - 1) dim G for an open component; None for a closed one."""
    if c.closed:
        return None
    return 2 * (c.genus + c.m + c.n - 1) * dim_G


def realizing_quiver(c):
    """One interior vertex with m in-legs, n out-legs and g loops, when it exists."""
    if c.closed or 2 * c.genus + c.m + c.n < 2:
        return None
    return star_quiver(c.m, c.n, loops=c.genus)


@dataclass(frozen=True)
class QHamRecord:
    source_group: str
    target_group: str
    components: tuple
    composition_log: tuple

    def to_dict(self):
        return {"source_group": self.source_group, "target_group": self.target_group,
                "components": list(self.components), "composition_log": list(self.composition_log)}


def n_functor(M, model):
    comps = []
    for c in sorted(M.components, key=Component.key):
        d = component_dim(c, model.dim)
        q = realizing_quiver(c)
        entry = {"genus": c.genus, "in": sorted(c.ins), "out": sorted(c.outs), "dim": d,
                 "closed": c.closed, "point": d == 0}
        if q is not None:
            inv = validate(q)
            entry["quiver"] = q.to_json_obj()
            entry["quiver_dim_N"] = inv.dim_N(model.dim)
        comps.append(entry)
    return QHamRecord(f"G^{M.source}", f"G^{M.target}", tuple(comps), M.log)


def reduction_dim(rec1, rec2, k, model):
    d1 = sum(c["dim"] for c in rec1.components if c["dim"] is not None)
    d2 = sum(c["dim"] for c in rec2.components if c["dim"] is not None)
    return d1 + d2 - 2 * k * model.dim


def functoriality_check(M1, M2, model):
    """Compare n_functor(M2 o M1) with reduction dimensions, per composite component."""
    k1, classes, glued = _glue_classes(M2, M1)
    allc = M1.components + M2.components
    composite = compose(M2, M1)
    rows, ok = [], True
    by_legs = {(frozenset(c.ins), frozenset(c.outs)): c for c in composite.components}
    for root in sorted(classes):
        members = classes[root]
        ins = frozenset(i for k in members if k < k1 for i in allc[k].ins)
        outs = frozenset(o for k in members if k >= k1 for o in allc[k].outs)
        target = by_legs[(ins, outs)]
        if target.closed or any(allc[k].closed for k in members):
            rows.append({"members": len(members), "closed": True})
            continue
        k = len(glued.get(root, []))
        reduced = sum(component_dim(allc[i], model.dim) for i in members) - 2 * k * model.dim
        direct = component_dim(target, model.dim)
        rows.append({"members": len(members), "glued": k, "reduction_dim": reduced,
                     "functor_dim": direct, "closed": False})
        ok &= reduced == direct
    return {"pass": bool(ok), "components": rows}


# --------------------------------------------------------------------------
# relations

def _g(*names):
    return [generator(n) for n in names]


def relation_list():
    pants, copants, cup, cap, cyl, swap = _g("pants", "copants", "cup", "cap", "cyl", "swap")
    I1, I2 = identity(1), identity(2)
    return [
        ("associativity", [compose(pants, tensor(pants, I1)), compose(pants, tensor(I1, pants))]),
        ("coassociativity", [compose(tensor(copants, I1), copants), compose(tensor(I1, copants), copants)]),
        ("unit", [compose(pants, tensor(cap, I1)), cyl, compose(pants, tensor(I1, cap))]),
        ("counit", [compose(tensor(cup, I1), copants), cyl, compose(tensor(I1, cup), copants)]),
        ("commutativity", [compose(pants, swap), pants]),
        ("cocommutativity", [compose(swap, copants), copants]),
        ("frobenius", [compose(tensor(I1, pants), tensor(copants, I1)), compose(copants, pants),
                       compose(tensor(pants, I1), tensor(I1, copants))]),
        ("swap_involution", [compose(swap, swap), I2]),
        ("cylinder_identity", [compose(cyl, pants), pants, compose(pants, tensor(cyl, cyl))],
         [compose(copants, cyl), copants, compose(tensor(cyl, cyl), copants)]),
    ]


def verify_relations(model=None):
    rows = []
    for name, *groups in relation_list():
        holds = all(s.same_as(sides[0]) for sides in groups for s in sides)
        row = {"relation": name, "holds": holds}
        if not holds:
            row["normal_forms"] = [[s.to_dict() for s in sides] for sides in groups]
        rows.append(row)
    out = {"relations": rows, "pass": all(r["holds"] for r in rows)}
    if model is not None:
        out["group"] = model.name
    return out


# --------------------------------------------------------------------------
# random morphisms

_LAYER = ["pants", "copants", "cup", "cap", "swap", "cyl"]


def random_morphism(rng, source=None, layers=None, max_circles=4):
    """Compose random generator layers (generator at a random slot, identities around it)."""
    k = int(rng.integers(0, 4)) if source is None else source
    layers = int(rng.integers(1, 6)) if layers is None else layers
    M = identity(k)
    for _ in range(layers):
        choices = [g for g in _LAYER if generator(g).source <= k
                   and k - generator(g).source + generator(g).target <= max_circles]
        G = generator(choices[int(rng.integers(0, len(choices)))])
        slot = int(rng.integers(0, k - G.source + 1))
        layer = tensor(tensor(identity(slot), G), identity(k - slot - G.source))
        M = compose(layer, M)
        k = M.target
    return M



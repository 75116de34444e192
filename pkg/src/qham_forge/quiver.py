"""Quivers and the moduli spaces N_G(Gamma) built from edge-indexed doubles.

A point of the fused space assigns a pair (a_e, b_e) in D(G) to every edge.
The vertex group G^V acts by

    a_e -> g_{t(e)} a_e g_{s(e)}^-1,    b_e -> g_{s(e)} b_e g_{s(e)}^-1

so that Ad_{a_e} b_e is the moment component at the target and b_e^-1 the one
at the source of each edge.  Products over edges at a vertex use a fixed
order: incoming edges by ascending (natural) id, then outgoing edges the same
way.  Loops count as both.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import QuiverError
from .lie import Ad_matrix, exp_map, log_map

TOL = config.DEFAULT_TOLERANCES


def natural_key(s):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", str(s))]


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str


@dataclass(frozen=True)
class Quiver:
    vertices: tuple
    edges: tuple

    @classmethod
    def build(cls, vertices, edges):
        """edges: iterable of Edge, dicts {id, src, dst} or (id, src, dst) triples."""
        es = []
        for e in edges:
            if isinstance(e, Edge):
                es.append(e)
            elif isinstance(e, dict):
                es.append(Edge(str(e["id"]), str(e["src"]), str(e["dst"])))
            else:
                es.append(Edge(*map(str, e)))
        q = cls(tuple(sorted(map(str, vertices), key=natural_key)),
                tuple(sorted(es, key=lambda e: natural_key(e.id))))
        q._check_structure()
        return q

    def _check_structure(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise QuiverError("duplicate vertex id")
        if len({e.id for e in self.edges}) != len(self.edges):
            raise QuiverError("duplicate edge id")
        for e in self.edges:
            if e.src not in vs or e.dst not in vs:
                raise QuiverError(f"edge {e.id} references an unknown vertex")

    # -- JSON ------------------------------------------------------------
    def to_json_obj(self):
        return {"vertices": list(self.vertices),
                "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in self.edges]}

    def to_json(self):
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls.build(data["vertices"], data["edges"])
        except (KeyError, TypeError) as exc:
            raise QuiverError(f"malformed quiver JSON: {exc}") from exc

    # -- incidence -------------------------------------------------------
    def edge(self, eid):
        for e in self.edges:
            if e.id == eid:
                return e
        raise QuiverError(f"unknown edge {eid!r}")

    def incoming(self, v):
        return [e for e in self.edges if e.dst == v]

    def outgoing(self, v):
        return [e for e in self.edges if e.src == v]

    def degree(self, v):
        return len(self.incoming(v)) + len(self.outgoing(v))

    def neighbours(self, v):
        out = []
        for e in self.edges:
            if e.src == v:
                out.append((e, e.dst))
            if e.dst == v and e.src != v:
                out.append((e, e.src))
        return out

    def components(self):
        seen, comps = set(), []
        for v in self.vertices:
            if v in seen:
                continue
            comp, queue = [], deque([v])
            seen.add(v)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for _, w in self.neighbours(u):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            comps.append(comp)
        return comps

    def is_connected(self):
        return len(self.components()) <= 1


@dataclass(frozen=True)
class QuiverInvariants:
    n_edges: int
    n_interior: int
    m: int
    n: int
    genus: int
    n_components: int

    @property
    def dim_units(self):
        """dim N_G(Gamma) in units of dim G: 2(|E| - |Gamma_int|)."""
        return 2 * (self.n_edges - self.n_interior)

    def dim_N(self, dim_G):
        return self.dim_units * dim_G

    def dim_from_surface(self, dim_G):
        return 2 * (self.genus + self.m + self.n - self.n_components) * dim_G

    def as_tuple(self):
        return (self.n_edges, self.n_interior, self.m, self.n, self.genus)

    def to_dict(self, dim_G=None):
        out = {"n_edges": self.n_edges, "n_interior": self.n_interior, "m": self.m,
               "n": self.n, "genus": self.genus, "n_components": self.n_components,
               "dim_N_units": self.dim_units}
        if dim_G is not None:
            out["dim_N"] = self.dim_N(dim_G)
        return out


def boundary_split(q):
    """(boundary sources, boundary targets, interior vertices)."""
    minus, plus, interior = [], [], []
    for v in q.vertices:
        d = q.degree(v)
        if d == 0:
            raise QuiverError(f"isolated vertex {v!r}")
        if d == 1:
            (minus if q.outgoing(v) else plus).append(v)
        else:
            interior.append(v)
    return minus, plus, interior


def validate(q):
    minus, plus, interior = boundary_split(q)
    c = len(q.components())
    genus = len(q.edges) - len(interior) - len(minus) - len(plus) + c
    return QuiverInvariants(len(q.edges), len(interior), len(minus), len(plus), genus, c)


# --------------------------------------------------------------------------
# points and the group action

@dataclass
class QuiverPoint:
    a: dict
    b: dict = field(default_factory=dict)

    def copy(self):
        return QuiverPoint({k: v.copy() for k, v in self.a.items()},
                           {k: v.copy() for k, v in self.b.items()})


def random_point(q, model, rng):
    return QuiverPoint({e.id: model.random_element(rng) for e in q.edges},
                       {e.id: model.random_element(rng) for e in q.edges})


def act(q, model, gv, p):
    """Action of a vertex-indexed family of group elements (missing = identity)."""
    I = model.identity
    out = QuiverPoint({}, {})
    for e in q.edges:
        gt, gs = gv.get(e.dst, I), gv.get(e.src, I)
        gsi = model.inverse(gs)
        out.a[e.id] = gt @ p.a[e.id] @ gsi
        out.b[e.id] = gs @ p.b[e.id] @ gsi
    return out


def vertex_factors(q, model, p, v):
    """Ordered moment factors at v: Ad_{a_e} b_e for incoming e, then b_e^-1 for outgoing."""
    fac = []
    for e in q.incoming(v):
        a = p.a[e.id]
        fac.append(("in", e.id, a @ p.b[e.id] @ model.inverse(a)))
    for e in q.outgoing(v):
        fac.append(("out", e.id, model.inverse(p.b[e.id])))
    return fac


def fused_moment(q, model, p):
    _, _, interior = boundary_split(q)
    out = {}
    for v in interior:
        g = model.identity
        for _, _, f in vertex_factors(q, model, p, v):
            g = g @ f
        out[v] = g
    return out


def level_set_residual(q, model, p):
    vals = fused_moment(q, model, p)
    I = model.identity
    return max((float(np.linalg.norm(g - I)) for g in vals.values()), default=0.0)


def residual_moment(q, model, p):
    """Boundary moment map: b_e^-1 at a boundary source, Ad_{a_e} b_e at a boundary target."""
    minus, plus, _ = boundary_split(q)
    out = {}
    for v in minus:
        (e,) = q.outgoing(v)
        out[v] = model.inverse(p.b[e.id])
    for v in plus:
        (e,) = q.incoming(v)
        a = p.a[e.id]
        out[v] = a @ p.b[e.id] @ model.inverse(a)
    return out


# --------------------------------------------------------------------------
# the two-form

def _edge_order(q):
    return [e.id for e in q.edges]


def _split_tangent(q, model, v):
    n = model.dim
    v = np.asarray(v, dtype=float)
    if v.shape != (2 * n * len(q.edges),):
        raise QuiverError("tangent vector has the wrong length")
    return {eid: (v[2 * n * k:2 * n * k + n], v[2 * n * k + n:2 * n * (k + 1)])
            for k, eid in enumerate(_edge_order(q))}


def _factor_thetaL(model, p, kind, eid, tangent):
    """theta^L of the derivative of one vertex factor along a tangent vector."""
    alpha, beta = tangent[eid]
    a, b = p.a[eid], p.b[eid]
    if kind == "in":
        return Ad_matrix(model, a) @ (Ad_matrix(model, model.inverse(b)) @ alpha + beta - alpha)
    return -Ad_matrix(model, b) @ beta


def _double_form(model, a, b, t1, t2):
    (a1, b1), (a2, b2) = t1, t2
    B = Ad_matrix(model, b)
    return 0.5 * (np.dot(B @ a1, a2) - np.dot(B @ a2, a1)
                  + np.dot(a1, b2 + B @ b2) - np.dot(a2, b1 + B @ b1))


def fusion_correction(q, model, p, v, tan1, tan2):
    """1/2 sum_j <(mu_1...mu_{j-1})^* theta^L ^ mu_j^* theta^R> at vertex v."""
    total = 0.0
    pref = None
    for kind, eid, f in vertex_factors(q, model, p, v):
        l1 = _factor_thetaL(model, p, kind, eid, tan1)
        l2 = _factor_thetaL(model, p, kind, eid, tan2)
        Af = Ad_matrix(model, f)
        if pref is None:
            pref = (l1, l2)
            continue
        p1, p2 = pref
        total += 0.5 * (np.dot(p1, Af @ l2) - np.dot(p2, Af @ l1))
        Afi = Af.T
        pref = (Afi @ p1 + l1, Afi @ p2 + l2)
    return total


def fused_form(q, model, p, v1, v2):
    """Sum of the per-edge double forms plus the fusion corrections at interior vertices."""
    t1, t2 = _split_tangent(q, model, v1), _split_tangent(q, model, v2)
    val = sum(_double_form(model, p.a[e.id], p.b[e.id], t1[e.id], t2[e.id]) for e in q.edges)
    _, _, interior = boundary_split(q)
    for v in interior:
        val += fusion_correction(q, model, p, v, t1, t2)
    return float(val)


def fused_form_matrix(q, model, p):
    N = 2 * model.dim * len(q.edges)
    E = np.eye(N)
    W = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            W[i, j] = fused_form(q, model, p, E[i], E[j])
            W[j, i] = -W[i, j]
    return W


def fundamental_field(q, model, p, v, xi):
    """Left-trivialised tangent of the vertex-v action generated by xi (exp(-t xi) convention)."""
    n = model.dim
    xi = np.asarray(xi, dtype=float)
    out = []
    for e in q.edges:
        x = xi if e.dst == v else np.zeros(n)
        y = xi if e.src == v else np.zeros(n)
        a, b = p.a[e.id], p.b[e.id]
        out.append(np.concatenate([-Ad_matrix(model, model.inverse(a)) @ x + y,
                                   -Ad_matrix(model, model.inverse(b)) @ y + y]))
    return np.concatenate(out)


def _vertex_moment_thetaL(q, model, p, v, tangent):
    acc = np.zeros(model.dim)
    for kind, eid, f in vertex_factors(q, model, p, v):
        acc = Ad_matrix(model, f).T @ acc + _factor_thetaL(model, p, kind, eid, tangent)
    return acc


def moment_axiom_residual(q, model, p, sign=-1.0, factor=0.5):
    """max |omega(xi_M, w) - sign*factor*<(1 + Ad_mu) theta^L(d mu_v w), xi>| over
    all vertices v, basis xi and basis w; mu_v is the fused moment (interior)
    or the residual moment (boundary)."""
    N = 2 * model.dim * len(q.edges)
    W = fused_form_matrix(q, model, p)
    mu = {**fused_moment(q, model, p), **residual_moment(q, model, p)}
    worst = 0.0
    for v in q.vertices:
        A = Ad_matrix(model, mu[v])
        D = np.column_stack([_vertex_moment_thetaL(q, model, p, v, _split_tangent(q, model, w))
                             for w in np.eye(N)])
        for k, xi in enumerate(np.eye(model.dim)):
            lhs = fundamental_field(q, model, p, v, xi) @ W
            rhs = sign * factor * (xi @ ((np.eye(model.dim) + A) @ D))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# --------------------------------------------------------------------------
# level-set sampling, stabilisers, rank

def spanning_tree(q, root):
    """BFS tree: parent edge and depth per vertex."""
    parent, depth = {root: None}, {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for e, w in sorted(q.neighbours(u), key=lambda t: natural_key(t[0].id)):
            if w not in depth:
                parent[w], depth[w] = e, depth[u] + 1
                queue.append(w)
    return parent, depth


def _require_open_connected(q):
    if not q.edges:
        raise QuiverError("empty quiver")
    if not q.is_connected():
        raise QuiverError("quiver is disconnected")
    minus, plus, interior = boundary_split(q)
    if not (minus or plus):
        raise QuiverError("quiver is closed (no boundary vertices)")
    return minus, plus, interior


def sample_level_set(q, model, rng, root=None):
    """Random point with every interior fused moment equal to the identity.

    All a_e and the non-tree b_e are Haar-random; each interior vertex, taken
    by decreasing depth, solves its parent-edge factor F in the fixed product
    order L F R = 1, so F = L^-1 R^-1.
    """
    minus, plus, interior = _require_open_connected(q)
    root = root if root is not None else (minus + plus)[0]
    parent, depth = spanning_tree(q, root)
    tree = {e.id for e in parent.values() if e is not None}
    p = QuiverPoint({e.id: model.random_element(rng) for e in q.edges}, {})
    for e in q.edges:
        # tree edges get a placeholder that is overwritten when solved
        p.b[e.id] = model.identity if e.id in tree else model.random_element(rng)
    for v in sorted(interior, key=lambda v: (-depth[v], natural_key(v))):
        f = parent[v]
        facs = vertex_factors(q, model, p, v)
        kind = "in" if f.dst == v else "out"
        pos = next(i for i, (k, eid, _) in enumerate(facs) if eid == f.id and k == kind)
        L = model.identity
        for _, _, g in facs[:pos]:
            L = L @ g
        R = model.identity
        for _, _, g in facs[pos + 1:]:
            R = R @ g
        F = model.inverse(L) @ model.inverse(R)
        if kind == "out":
            p.b[f.id] = model.inverse(F)
        else:
            a = p.a[f.id]
            p.b[f.id] = model.inverse(a) @ F @ a
    return p


def stabilizer_propagate(q, model, p, tol=None):
    """Propagate g = 1 from the boundary along g_t(e) = a_e g_s(e) a_e^-1.

    Returns (assignment on interior vertices, stabiliser-equation residual);
    the assignment is None if some interior vertex is unreachable.
    """
    tol = TOL.stabilizer if tol is None else tol
    minus, plus, interior = _require_open_connected(q)
    g = {v: model.identity for v in minus + plus}
    queue = deque(minus + plus)
    while queue:
        u = queue.popleft()
        for e in q.edges:
            a = p.a[e.id]
            if e.src == u and e.dst not in g:
                g[e.dst] = a @ g[u] @ model.inverse(a)
                queue.append(e.dst)
            elif e.dst == u and e.src not in g:
                g[e.src] = model.inverse(a) @ g[u] @ a
                queue.append(e.src)
    if any(v not in g for v in interior):
        return None, float("inf")
    res = 0.0
    for e in q.edges:
        gt, gs = g[e.dst], g[e.src]
        a, b = p.a[e.id], p.b[e.id]
        res = max(res, float(np.linalg.norm(gt @ a @ model.inverse(gs) - a)),
                  float(np.linalg.norm(gs @ b @ model.inverse(gs) - b)))
    return {v: g[v] for v in interior}, res


def is_identity_assignment(model, assignment, tol=1e-9):
    return all(np.linalg.norm(g - model.identity) < tol for g in assignment.values())


def _perturb(q, model, p, k, h):
    """Right-translate coordinate k (edge-major, a then b) by exp(h e)."""
    n = model.dim
    idx, r = divmod(k, 2 * n)
    eid = q.edges[idx].id
    xi = np.zeros(n)
    xi[r % n] = h
    out = p.copy()
    target = out.a if r < n else out.b
    target[eid] = target[eid] @ exp_map(model, xi)
    return out


def moment_jacobian(q, model, p, h=1e-6):
    _, _, interior = boundary_split(q)
    base = fused_moment(q, model, p)
    N = 2 * model.dim * len(q.edges)
    J = np.zeros((model.dim * len(interior), N))
    for k in range(N):
        mp = fused_moment(q, model, _perturb(q, model, p, k, h))
        mm = fused_moment(q, model, _perturb(q, model, p, k, -h))
        col = []
        for v in interior:
            gi = model.inverse(base[v])
            col.append((log_map(model, gi @ mp[v]) - log_map(model, gi @ mm[v])) / (2 * h))
        J[:, k] = np.concatenate(col) if col else []
    return J


def moment_jacobian_rank(q, model, p, threshold=None):
    threshold = TOL.rank_jacobian if threshold is None else threshold
    J = moment_jacobian(q, model, p)
    if J.size == 0:
        return 0
    s = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(s > threshold * max(1.0, s[0])))


# --------------------------------------------------------------------------
# surgery: gluing, contraction, boundary removal

def glue(q1, q2, matching):
    """Glue boundary targets of q1 to boundary sources of q2.

    ``matching`` maps every vertex of the boundary targets of q1 to a
    distinct boundary source of q2.  Ids are prefixed with "1." and "2.".
    """
    _, plus1, _ = boundary_split(q1)
    minus2, _, _ = boundary_split(q2)
    if set(matching) != set(plus1):
        raise QuiverError("matching must be defined on exactly the boundary targets of the first quiver")
    vals = list(matching.values())
    if len(set(vals)) != len(vals) or not set(vals) <= set(minus2):
        raise QuiverError("matching must be injective into the boundary sources of the second quiver")
    if len(vals) != len(minus2):
        raise QuiverError("matching must be a bijection onto the boundary sources of the second quiver")
    back = {w: v for v, w in matching.items()}

    def ren2(w):
        return f"1.{back[w]}" if w in back else f"2.{w}"

    verts = [f"1.{v}" for v in q1.vertices] + [f"2.{w}" for w in q2.vertices if w not in back]
    edges = [Edge(f"1.{e.id}", f"1.{e.src}", f"1.{e.dst}") for e in q1.edges]
    edges += [Edge(f"2.{e.id}", ren2(e.src), ren2(e.dst)) for e in q2.edges]
    return Quiver.build(verts, edges)


def eligible_edges(q):
    _, _, interior = boundary_split(q)
    ints = set(interior)
    return [e for e in q.edges if e.src != e.dst and e.src in ints and e.dst in ints]


def contract_edge(q, eid):
    """Remove the interior edge e0 = (v1 -> v2) and merge v2 into v1."""
    e0 = q.edge(eid)
    _, _, interior = boundary_split(q)
    if e0.src == e0.dst:
        raise QuiverError(f"edge {eid} is a loop")
    if e0.src not in interior or e0.dst not in interior:
        raise QuiverError(f"edge {eid} has an endpoint on the boundary")
    v1, v2 = e0.src, e0.dst

    def ren(v):
        return v1 if v == v2 else v

    edges = [Edge(e.id, ren(e.src), ren(e.dst)) for e in q.edges if e.id != eid]
    return Quiver.build([v for v in q.vertices if v != v2], edges)


def normalize(q, return_steps=False):
    steps = 0
    while True:
        el = eligible_edges(q)
        if not el:
            break
        q = contract_edge(q, el[0].id)
        steps += 1
    return (q, steps) if return_steps else q


def remove_boundary_vertex(q, v0):
    """Delete a boundary vertex and its edge; an endpoint left isolated is dropped too."""
    minus, plus, _ = boundary_split(q)
    if v0 not in minus + plus:
        raise QuiverError(f"{v0!r} is not a boundary vertex")
    (e,) = q.incoming(v0) + q.outgoing(v0)
    other = e.dst if e.src == v0 else e.src
    edges = [f for f in q.edges if f.id != e.id]
    verts = [v for v in q.vertices if v != v0]
    if other != v0 and not any(other in (f.src, f.dst) for f in edges):
        verts.remove(other)
    return Quiver.build(verts, edges)


# --------------------------------------------------------------------------
# standard quivers and random generation

def segment():
    return Quiver.build(["in1", "out1"], [("e1", "in1", "out1")])


def chain(k=2):
    """in -> v1 -> ... -> v_{k-1} -> out with k edges."""
    names = ["in"] + [f"v{i}" for i in range(1, k)] + ["out"]
    return Quiver.build(names, [(f"e{i + 1}", names[i], names[i + 1]) for i in range(k)])


def pants_quiver():
    return Quiver.build(["in1", "in2", "v", "out1"],
                        [("e1", "in1", "v"), ("e2", "in2", "v"), ("e3", "v", "out1")])


def copants_quiver():
    return Quiver.build(["in1", "v", "out1", "out2"],
                        [("e1", "in1", "v"), ("e2", "v", "out1"), ("e3", "v", "out2")])


def star_quiver(m, n, loops=0, center="v"):
    """One interior vertex with m incoming legs, n outgoing legs and some loops."""
    verts, edges, k = [center], [], 0
    for i in range(m):
        k += 1
        verts.append(f"in{i + 1}")
        edges.append((f"e{k}", f"in{i + 1}", center))
    for j in range(n):
        k += 1
        verts.append(f"out{j + 1}")
        edges.append((f"e{k}", center, f"out{j + 1}"))
    for _ in range(loops):
        k += 1
        edges.append((f"e{k}", center, center))
    return Quiver.build(verts, edges)


def random_quiver(rng, max_vertices=8, extra_edge_prob=0.25, loop_prob=0.1, max_tries=1000):
    """Random connected quiver with nonempty boundary.

    A random spanning tree (which is connected and has leaves) is decorated
    with Erdos-Renyi extra edges, random orientations and occasional loops;
    draws without a boundary vertex are rejected.
    """
    for _ in range(max_tries):
        nv = int(rng.integers(2, max_vertices + 1))
        verts = [f"v{i}" for i in range(nv)]
        pairs = []
        for i in range(1, nv):
            pairs.append((int(rng.integers(0, i)), i))
        for i in range(nv):
            for j in range(i + 1, nv):
                if rng.random() < extra_edge_prob:
                    pairs.append((i, j))
            if rng.random() < loop_prob:
                pairs.append((i, i))
        edges = []
        for k, (i, j) in enumerate(pairs):
            if rng.random() < 0.5:
                i, j = j, i
            edges.append((f"e{k + 1}", verts[i], verts[j]))
        q = Quiver.build(verts, edges)
        minus, plus, _ = boundary_split(q)
        if minus or plus:
            return q
    raise QuiverError("could not draw a quiver with boundary")


def random_glueable_pair(rng, max_vertices=6, max_tries=10000):
    """Two random quivers with as many boundary targets in the first as
    boundary sources in the second, plus the natural-order matching."""
    for _ in range(max_tries):
        q1 = random_quiver(rng, max_vertices=max_vertices)
        q2 = random_quiver(rng, max_vertices=max_vertices)
        _, plus, _ = boundary_split(q1)
        minus, _, _ = boundary_split(q2)
        if plus and len(plus) == len(minus):
            matching = dict(zip(sorted(plus, key=natural_key), sorted(minus, key=natural_key)))
            return q1, q2, matching
    raise QuiverError("could not draw a glueable pair")

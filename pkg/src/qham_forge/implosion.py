"""Face combinatorics and stratum geometry of imploded spaces for SU(2) and SU(3).

Maximal torus elements are written ``x = diag(i theta_1, ..., i theta_n)`` with
``sum theta = 0``.  Roots are ``alpha_ij(x) = theta_i - theta_j``.  The
fundamental alcove is cut out by the simple-root walls ``alpha_{k,k+1} >= 0``
and the affine wall ``theta_1 - theta_n <= 2 pi``; the positive Weyl chamber
by the simple-root walls alone.  Since the alcove is a simplex with ``r + 1``
walls, its faces are indexed by proper subsets of active walls, and chamber
faces by subsets of the simple walls.

Wall 0 is the affine wall; walls 1..r are the simple roots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import DomainError, UnsupportedModelError
from .lie import Ad_matrix, ad_matrix, dexp_left, exp_map

TWO_PI = 2 * np.pi
ALCOVE_NORMALIZATION = ("x = diag(i theta), sum(theta) = 0; alcove: theta_k - theta_{k+1} >= 0, "
                        "theta_1 - theta_n <= 2 pi; inner product <X,Y> = -Re tr(XY)")


def _rank_n(model):
    if model.kind not in ("su2", "su3") or len(model.blocks) != 1:
        raise UnsupportedModelError(f"implosion data only for su2 and su3, not {model.name!r}")
    n = model.matrix_size
    return n - 1, n


@dataclass(frozen=True)
class Face:
    ambient: str
    id: str
    dim: int
    active_walls: tuple
    stabilizer_type: str
    dim_stabilizer: int
    dim_commutator: int
    contains_origin_in_closure: bool
    representative_point: np.ndarray = field(compare=False, repr=False)

    def to_dict(self):
        return {"ambient": self.ambient, "id": self.id, "dim": self.dim,
                "active_walls": list(self.active_walls), "stabilizer_type": self.stabilizer_type,
                "dim_stabilizer": self.dim_stabilizer, "dim_commutator": self.dim_commutator,
                "contains_origin_in_closure": self.contains_origin_in_closure,
                "representative_point": [float(v) for v in self.representative_point]}


@dataclass(frozen=True)
class Stratum:
    face: Face
    kind: str
    dim: int
    target: str | None = None

    def to_dict(self):
        out = {"face": self.face.id, "kind": self.kind, "dim": self.dim}
        if self.kind == "multiplicative":
            out["target"] = self.target
        return out


# --------------------------------------------------------------------------
# root data in theta coordinates

def theta_to_algebra(model, theta):
    return model.coords(np.diag(1j * np.asarray(theta, dtype=float)))


def algebra_to_theta(model, x, tol=1e-10):
    X = model.matrix(x)
    if np.linalg.norm(X - np.diag(np.diag(X))) > tol:
        raise DomainError("point is not in the diagonal Cartan subalgebra")
    return np.diag(X).imag.copy()


def positive_roots(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _wall_value(theta, wall, n):
    if wall == 0:
        return TWO_PI - (theta[0] - theta[n - 1])
    return theta[wall - 1] - theta[wall]


def alcove_vertices(n):
    """Vertex v_k is the point where every wall except k is active."""
    r = n - 1
    verts = {}
    for k in range(r + 1):
        A, rhs = [np.ones(n)], [0.0]
        for w in range(r + 1):
            if w == k:
                continue
            row = np.zeros(n)
            if w == 0:
                row[0], row[n - 1] = 1.0, -1.0
                rhs.append(TWO_PI)
            else:
                row[w - 1], row[w] = 1.0, -1.0
                rhs.append(0.0)
            A.append(row)
        verts[k] = np.linalg.solve(np.array(A), np.array(rhs))
    return verts


def fundamental_coweights(n):
    out = {}
    for k in range(1, n):
        A, rhs = [np.ones(n)], [0.0]
        for w in range(1, n):
            row = np.zeros(n)
            row[w - 1], row[w] = 1.0, -1.0
            A.append(row)
            rhs.append(1.0 if w == k else 0.0)
        out[k] = np.linalg.solve(np.array(A), np.array(rhs))
    return out


def _vanishing_roots(theta, ambient, tol=1e-9):
    """Positive roots alpha with alpha(theta) in 2 pi Z (alcove) or = 0 (chamber)."""
    out = []
    for i, j in positive_roots(len(theta)):
        v = theta[i] - theta[j]
        if ambient == "alcove":
            if abs(v - TWO_PI * np.round(v / TWO_PI)) < tol:
                out.append((i, j))
        elif abs(v) < tol:
            out.append((i, j))
    return out


def _type_label(roots, rank):
    """Root subsystem type for rank <= 2, with the central torus factor."""
    k = len(roots)
    if k == 0:
        return "T", 0
    if k == 1:
        return ("A1" if rank == 1 else "A1xU1"), 1
    if k == 3:
        return "A2", 2
    raise AssertionError("unexpected root subsystem")  # rank <= 2 only has 0, 1, 3 roots


def _face_id(ambient, active):
    prefix = "A" if ambient == "alcove" else "C"
    return f"{prefix}[{','.join(f'a{w}' for w in active)}]"


def _make_face(ambient, active, theta, rank, model):
    roots = _vanishing_roots(theta, ambient)
    label, ss_rank = _type_label(roots, rank)
    dim_stab = rank + 2 * len(roots)
    dim_comm = 2 * len(roots) + ss_rank
    origin = ambient == "chamber" or 0 not in active
    return Face(ambient=ambient, id=_face_id(ambient, active), dim=rank - len(active),
                active_walls=tuple(active), stabilizer_type=label, dim_stabilizer=dim_stab,
                dim_commutator=dim_comm, contains_origin_in_closure=origin,
                representative_point=theta_to_algebra(model, theta))


def alcove_faces(model):
    rank, n = _rank_n(model)
    verts = alcove_vertices(n)
    faces = []
    for size in range(rank, -1, -1):
        for active in itertools.combinations(range(rank + 1), size):
            theta = np.mean([verts[k] for k in range(rank + 1) if k not in active], axis=0)
            faces.append(_make_face("alcove", active, theta, rank, model))
    return faces


def chamber_faces(model):
    rank, n = _rank_n(model)
    cw = fundamental_coweights(n)
    faces = []
    for size in range(rank, -1, -1):
        for active in itertools.combinations(range(1, rank + 1), size):
            theta = sum((cw[k] for k in range(1, rank + 1) if k not in active), np.zeros(n))
            faces.append(_make_face("chamber", active, theta, rank, model))
    return faces


def tau_of(model, face):
    """Chamber face tau_sigma attached to an alcove face whose closure contains 0."""
    if face.ambient != "alcove":
        raise DomainError("tau_of expects an alcove face")
    if not face.contains_origin_in_closure:
        return None
    for c in chamber_faces(model):
        if c.active_walls == face.active_walls:
            return c
    raise AssertionError("no matching chamber face")


def bad_faces(model):
    """Faces in B: alcove faces whose closure misses the origin."""
    return [f for f in alcove_faces(model) if not f.contains_origin_in_closure]


def face_lookup(model, face_id):
    for f in alcove_faces(model) + chamber_faces(model):
        if f.id == face_id:
            return f
    raise DomainError(f"unknown face {face_id!r}")


def in_face(model, face, x, tol=1e-10):
    """True if x lies in the (relatively open) face."""
    try:
        theta = algebra_to_theta(model, x, tol)
    except DomainError:
        return False
    rank, n = _rank_n(model)
    walls = range(rank + 1) if face.ambient == "alcove" else range(1, rank + 1)
    for w in walls:
        v = _wall_value(theta, w, n)
        if w in face.active_walls:
            if abs(v) > tol:
                return False
        elif v <= tol:
            return False
    return True


# --------------------------------------------------------------------------
# numeric oracles for stabilisers

def centralizer_basis(model, x, ambient):
    """Basis (columns) of the stabiliser algebra of exp(x) (alcove) or x (chamber)."""
    if ambient == "alcove":
        M = Ad_matrix(model, exp_map(model, x)) - np.eye(model.dim)
    else:
        M = ad_matrix(model, x)
    # absolute threshold: at central points M is pure roundoff
    _, sv, Vh = np.linalg.svd(M)
    return Vh[np.sum(sv > 1e-9):].T


def commutator_dim(model, basis):
    if basis.shape[1] < 2:
        return 0
    brackets = [model.bracket(basis[:, i], basis[:, j])
                for i in range(basis.shape[1]) for j in range(i + 1, basis.shape[1])]
    return int(np.linalg.matrix_rank(np.array(brackets), tol=1e-9))


def stabilizer_oracle(model, face):
    B = centralizer_basis(model, face.representative_point, face.ambient)
    return B.shape[1], commutator_dim(model, B)


# --------------------------------------------------------------------------
# strata

def stratum_inventory(model, space):
    G = model.dim
    if space == "double_implosion":
        out = []
        for f in alcove_faces(model):
            tau = tau_of(model, f)
            out.append(Stratum(f, "multiplicative", G - f.dim_commutator + f.dim,
                               target=tau.id if tau else "EMPTY"))
        return out
    if space == "cotangent_implosion":
        return [Stratum(f, "additive", G - f.dim_commutator + f.dim) for f in chamber_faces(model)]
    raise ValueError(f"unknown space {space!r}")


def face_bijection_report(model):
    alc = alcove_faces(model)
    ch = chamber_faces(model)
    with_origin = [f for f in alc if f.contains_origin_in_closure]
    images = [tau_of(model, f).id for f in with_origin]
    return {"alcove_faces": len(alc), "chamber_faces": len(ch),
            "alcove_faces_with_origin": len(with_origin), "B": [f.id for f in bad_faces(model)],
            "bijective": sorted(images) == sorted(c.id for c in ch) and len(set(images)) == len(images),
            "stabilizer_dims_match": all(f.dim_stabilizer == tau_of(model, f).dim_stabilizer
                                         for f in with_origin),
            "normalization": ALCOVE_NORMALIZATION}


# --------------------------------------------------------------------------
# two-forms

def _require_in_face(model, face, x):
    if not in_face(model, face, x):
        raise DomainError(f"point is not in face {face.id}")


def lambda_sigma(model, face, g, x, pair1, pair2):
    """1/2 <(Ad_{e^x} - Ad_{e^-x}) u1, u2> + <u1, eta2> - <u2, eta1>."""
    _require_in_face(model, face, x)
    (u1, e1), (u2, e2) = pair1, pair2
    D = Ad_matrix(model, exp_map(model, x)) - Ad_matrix(model, exp_map(model, -np.asarray(x)))
    return float(0.5 * np.dot(D @ u1, u2) + np.dot(u1, e2) - np.dot(u2, e1))


def omega_tau(model, face, x, pair1, pair2):
    """<u1, v2> - <u2, v1> + <x, [u1, u2]>."""
    (u1, v1), (u2, v2) = pair1, pair2
    return float(np.dot(u1, v2) - np.dot(u2, v1) + np.dot(x, model.bracket(u1, u2)))


def family_interval(model, x):
    """I = (-T, T) with T = 2 pi / max |alpha(x)|: keeps d exp_{tx} invertible."""
    spec = np.abs(np.linalg.eigvals(ad_matrix(model, x)))
    m = float(np.max(spec, initial=0.0))
    T = np.inf if m < 1e-14 else TWO_PI / m
    return (-T, T)


def stratum_family_form(model, face, g, x, t, pair1, pair2):
    """Rescaled pulled-back form on the stratum family at parameter t.

    <y1, ((Ad_{e^-tx} - Ad_{e^tx}) / 2t) y2>
      + 1/2 (<y1, (D + Ad_{e^tx} D) z2> - <y2, (D + Ad_{e^tx} D) z1>),  D = d exp_{tx};
    at t = 0 this is omega_tau.
    """
    (y1, z1), (y2, z2) = pair1, pair2
    if t == 0:
        return omega_tau(model, face, x, pair1, pair2)
    lo, hi = family_interval(model, x)
    if not lo < t < hi:
        raise DomainError(f"t = {t} outside the interval ({lo}, {hi})")
    x = np.asarray(x, dtype=float)
    Ap = Ad_matrix(model, exp_map(model, t * x))
    Am = Ad_matrix(model, exp_map(model, -t * x))
    D = dexp_left(model, t * x)
    K = D + Ap @ D
    return float(np.dot(y1, (Am - Ap) @ y2) / (2 * t) + 0.5 * (np.dot(y1, K @ z2) - np.dot(y2, K @ z1)))


# --------------------------------------------------------------------------
# the implosion relation

def alcove_theta_of(model, b, tol=1e-10):
    """theta in the closed alcove with b = exp(diag(i theta)), or DomainError."""
    rank, n = _rank_n(model)
    b = np.asarray(b)
    if np.linalg.norm(b - np.diag(np.diag(b))) > tol:
        raise DomainError("b is not in the maximal torus")
    phases = np.angle(np.diag(b))
    for shifts in itertools.product((-1, 0, 1), repeat=n):
        theta = phases + TWO_PI * np.array(shifts)
        if abs(theta.sum()) > 1e-8:
            continue
        if all(_wall_value(theta, w, n) >= -1e-8 for w in range(rank + 1)):
            return theta
    raise DomainError("b is not in the exponential of the closed alcove")


def _eigenspace_blocks(theta, tol=1e-8):
    """Groups of indices with equal exp(i theta)."""
    z = np.exp(1j * theta)
    blocks = []
    for i in range(len(z)):
        for blk in blocks:
            if abs(z[blk[0]] - z[i]) < tol:
                blk.append(i)
                break
        else:
            blocks.append([i])
    return blocks


def implosion_equiv(model, p, q, tol=1e-9):
    """(a, b) ~ (a', b) iff a^-1 a' lies in [G_b, G_b].

    G_b is block-diagonal on the eigenspaces of b, and its commutator
    subgroup is the product of the special unitary groups of those blocks.
    """
    (a, b), (a2, b2) = p, q
    if np.linalg.norm(np.asarray(b) - np.asarray(b2)) > 1e-10:
        raise DomainError("implosion relation compares points with different b")
    theta = alcove_theta_of(model, b)
    k = model.inverse(a) @ np.asarray(a2)
    blocks = _eigenspace_blocks(theta)
    mask = np.zeros(k.shape, dtype=bool)
    for blk in blocks:
        mask[np.ix_(blk, blk)] = True
    if np.max(np.abs(k[~mask]), initial=0.0) > tol:
        return False
    for blk in blocks:
        sub = k[np.ix_(blk, blk)]
        if abs(np.linalg.det(sub) - 1.0) > tol:
            return False
    return True


# --------------------------------------------------------------------------
# master moduli inventories

def master_moduli_dims(model, genus, r):
    """Stratum dimensions of the fusion of r imploded doubles and g doubles.

    Each stratum is a choice of implosion stratum per factor; its dimension
    is the sum of those dimensions plus 2 g dim G.
    """
    if genus < 0 or r < 0:
        raise ValueError("genus and r must be non-negative")
    base = 2 * genus * model.dim

    def inventory(strata):
        rows = []
        for combo in itertools.product(strata, repeat=r):
            rows.append({"faces": [s.face.id for s in combo],
                         "dim": base + sum(s.dim for s in combo)})
        return rows

    mult = inventory(stratum_inventory(model, "double_implosion"))
    add = inventory(stratum_inventory(model, "cotangent_implosion"))
    return {"group": model.name, "genus": genus, "r": r,
            "multiplicative": mult, "additive": add,
            "top_dim": max(row["dim"] for row in mult)}


def stratum_family_check(model, face, rng, t_grid=config.DEFAULT_T_GRID):
    """Slope of |form(t) - omega_tau| for random tangent data at tau_sigma's point.

    Differences below a roundoff floor count as exact zeros (at the origin
    vertex the family is constant in t).
    """
    from .deformation import loglog_slope

    tau = tau_of(model, face)
    if tau is None:
        raise DomainError(f"face {face.id} deforms to the empty set")
    x = tau.representative_point
    pair1 = (rng.standard_normal(model.dim), rng.standard_normal(model.dim))
    pair2 = (rng.standard_normal(model.dim), rng.standard_normal(model.dim))
    w0 = omega_tau(model, tau, x, pair1, pair2)
    diffs = [abs(stratum_family_form(model, face, None, x, t, pair1, pair2) - w0) for t in t_grid]
    scale = max(1.0, float(np.linalg.norm(x))) * max(1.0, float(np.linalg.norm(np.concatenate(pair1 + pair2)))) ** 2
    slope = loglog_slope(t_grid, diffs, floor=1e-13 * scale)
    exact0 = stratum_family_form(model, face, None, x, 0.0, pair1, pair2) == w0
    return {"face": face.id, "tau": tau.id, "t_grid": list(t_grid), "diffs": diffs,
            "slope": slope if np.isfinite(slope) else "inf", "t0_exact": bool(exact0),
            "pass": bool(slope >= config.DEFAULT_TOLERANCES.slope_min and exact0)}

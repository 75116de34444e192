"""Antisymmetric multivectors, the algebraic Schouten bracket on the exterior
algebra of a Lie algebra, and the coordinate Schouten bracket of bivector
fields.

A degree-k multivector over an n-dimensional space is stored densely as its
coefficients on increasing index tuples::

    a = sum_{i1 < ... < ik} a[i1..ik] e_i1 ^ ... ^ e_ik

``to_tensor`` gives the fully antisymmetric array whose increasing entries are
those coefficients.
"""

from __future__ import annotations

import functools
import itertools
import json
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .lie import model_product


@functools.lru_cache(maxsize=None)
def _combos(dim, degree):
    combos = tuple(itertools.combinations(range(dim), degree))
    return combos, {c: i for i, c in enumerate(combos)}


def _sort_sign(idx):
    """Sorted tuple and permutation sign, or (None, 0) on a repeated index."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


class Multivector:
    __slots__ = ("degree", "dim", "coeffs")

    def __init__(self, degree, dim, coeffs=None):
        if degree < 0 or dim < 0:
            raise ValueError("degree and dim must be non-negative")
        combos, _ = _combos(dim, degree)
        if coeffs is None:
            coeffs = np.zeros(len(combos))
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(combos),):
            raise DimensionMismatchError(
                f"expected {len(combos)} coefficients for degree {degree} over dim {dim}")
        self.degree, self.dim, self.coeffs = degree, dim, coeffs

    @classmethod
    def from_dict(cls, degree, dim, terms):
        """Build from ``{index_tuple: value}``; tuples need not be sorted."""
        out = np.zeros(len(_combos(dim, degree)[0]))
        pos = _combos(dim, degree)[1]
        for idx, val in terms.items():
            if len(idx) != degree or any(not 0 <= i < dim for i in idx):
                raise DimensionMismatchError(f"bad index {idx} for degree {degree}, dim {dim}")
            key, sign = _sort_sign(idx)
            if sign:
                out[pos[key]] += sign * val
        return cls(degree, dim, out)

    @classmethod
    def basis_vector(cls, dim, i):
        return cls.from_dict(1, dim, {(i,): 1.0})

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(1, len(v), v.copy())

    @classmethod
    def from_tensor(cls, T):
        T = np.asarray(T, dtype=float)
        degree, dim = T.ndim, (T.shape[0] if T.ndim else 0)
        combos, _ = _combos(dim, degree)
        return cls(degree, dim, np.array([T[c] for c in combos]) if combos else np.zeros(0))

    def to_tensor(self):
        k, n = self.degree, self.dim
        T = np.zeros((n,) * k)
        if k == 0:
            return np.array(self.coeffs[0] if len(self.coeffs) else 0.0)
        perms = [(p, _sort_sign(p)[1]) for p in itertools.permutations(range(k))]
        for c, val in zip(_combos(n, k)[0], self.coeffs):
            if val == 0.0:
                continue
            for p, s in perms:
                T[tuple(c[i] for i in p)] = s * val
        return T

    def terms(self):
        combos = _combos(self.dim, self.degree)[0]
        return {c: float(v) for c, v in zip(combos, self.coeffs) if v != 0.0}

    def frobenius_norm(self):
        return float(np.linalg.norm(self.coeffs))

    def _check(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise DimensionMismatchError(
                f"degree/dim mismatch: ({self.degree},{self.dim}) vs ({other.degree},{other.dim})")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Multivector(self.degree, self.dim, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Multivector(self.degree, self.dim, self.coeffs - other.coeffs)

    def __neg__(self):
        return Multivector(self.degree, self.dim, -self.coeffs)

    def __mul__(self, scalar):
        return Multivector(self.degree, self.dim, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def allclose(self, other, atol=1e-12):
        return (self.degree, self.dim) == (other.degree, other.dim) and \
            bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def __repr__(self):
        return f"Multivector(degree={self.degree}, dim={self.dim}, nnz={len(self.terms())})"

    def to_json_obj(self):
        return {"degree": self.degree, "dim": self.dim,
                "entries": [[list(k), v] for k, v in self.terms().items()]}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_dict(data["degree"], data["dim"],
                             {tuple(k): v for k, v in data["entries"]})


def _check_dims(a, b):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"space dimensions differ: {a.dim} vs {b.dim}")


def wedge(a, b):
    _check_dims(a, b)
    deg = a.degree + b.degree
    if deg > a.dim:
        return Multivector(deg, a.dim)
    acc = defaultdict(float)
    for I, x in a.terms().items():
        for J, y in b.terms().items():
            key, sign = _sort_sign(I + J)
            if sign:
                acc[key] += sign * x * y
    return Multivector.from_dict(deg, a.dim, acc)


def contract(a, covector):
    """Interior product i_alpha a (a degree -1 antiderivation)."""
    alpha = np.asarray(covector, dtype=float)
    if alpha.shape != (a.dim,):
        raise DimensionMismatchError("covector length does not match space dimension")
    if a.degree == 0:
        return Multivector(0, a.dim)
    acc = defaultdict(float)
    for I, x in a.terms().items():
        for p, i in enumerate(I):
            if alpha[i]:
                acc[I[:p] + I[p + 1:]] += (-1) ** p * alpha[i] * x
    return Multivector.from_dict(a.degree - 1, a.dim, acc)


def frobenius_norm(a):
    return a.frobenius_norm()


def pushforward(a, L):
    """Image of a under the induced map Lambda^k(L) for a linear map L."""
    L = np.asarray(L, dtype=float)
    if L.shape[1] != a.dim:
        raise DimensionMismatchError("linear map does not act on this space")
    T = a.to_tensor()
    for _ in range(a.degree):
        # contract the leading slot and rotate it to the back
        T = np.moveaxis(np.tensordot(L, T, axes=([1], [0])), 0, -1)
    return Multivector.from_tensor(T) if a.degree else Multivector(0, L.shape[0], a.coeffs.copy())


def derivation_action(a, L):
    """Action of a linear map L as a derivation: sum over slots of L in that slot."""
    L = np.asarray(L, dtype=float)
    T = a.to_tensor()
    out = np.zeros_like(T)
    for s in range(a.degree):
        out = out + np.moveaxis(np.tensordot(L, T, axes=([1], [s])), 0, s)
    return Multivector.from_tensor(out) if a.degree else Multivector(0, a.dim)


def cartan_trivector(model):
    """phi = (1/12) f_ijk e_i ^ e_j ^ e_k, i.e. coefficient f_ijk / 2 on i<j<k."""
    f = model.structure_constants
    return Multivector.from_tensor(0.5 * f) if model.dim >= 3 else Multivector(3, model.dim)


@dataclass(frozen=True)
class FusionData:
    psi: Multivector
    phi1: Multivector
    phi2: Multivector
    diag_phi: Multivector
    double_model: object

    def identity_residual(self):
        lhs = schouten_lie(self.psi, self.psi, self.double_model)
        return (lhs - (self.diag_phi - self.phi1 - self.phi2)).frobenius_norm()


def fusion_bivector(model):
    """psi = 1/2 sum_i e_i^1 ^ e_i^2 over g + g, with phi^1, phi^2, diag(phi)."""
    n = model.dim
    psi = Multivector.from_dict(2, 2 * n, {(i, n + i): 0.5 for i in range(n)})
    phi = cartan_trivector(model)
    I = np.eye(n)
    inj1 = np.vstack([I, np.zeros((n, n))])
    inj2 = np.vstack([np.zeros((n, n)), I])
    diag = np.vstack([I, I])
    return FusionData(psi=psi, phi1=pushforward(phi, inj1), phi2=pushforward(phi, inj2),
                      diag_phi=pushforward(phi, diag),
                      double_model=model_product(model, model))


def _structure_table(model_or_f):
    f = getattr(model_or_f, "structure_constants", model_or_f)
    f = np.asarray(f)
    table = defaultdict(list)
    for k, i, j in zip(*np.nonzero(f)):
        table[(int(i), int(j))].append((int(k), float(f[k, i, j])))
    return f.shape[0], table


def schouten_lie(a, b, model):
    """Algebraic Schouten bracket on the exterior algebra of a Lie algebra.

    On monomials::

        [x1^..^xp, y1^..^yq] = sum_{i,j} (-1)^{i+j} [xi, yj] ^ x1..^xi..xp ^ y1..^yj..yq

    ``model`` is a LieGroupModel or a structure-constant array.
    """
    _check_dims(a, b)
    n, table = _structure_table(model)
    if n != a.dim:
        raise DimensionMismatchError("model dimension does not match multivector space")
    deg = a.degree + b.degree - 1
    if deg < 0 or a.degree == 0 or b.degree == 0:
        return Multivector(max(deg, 0), a.dim)
    if deg > a.dim:
        return Multivector(deg, a.dim)
    acc = defaultdict(float)
    for I, x in a.terms().items():
        for J, y in b.terms().items():
            for p, i in enumerate(I):
                rest_i = I[:p] + I[p + 1:]
                for q, j in enumerate(J):
                    entries = table.get((i, j))
                    if not entries:
                        continue
                    rest = rest_i + J[:q] + J[q + 1:]
                    sgn = (-1) ** (p + q)
                    for k, fk in entries:
                        key, s = _sort_sign((k,) + rest)
                        if s:
                            acc[key] += sgn * s * fk * x * y
    return Multivector.from_dict(deg, a.dim, acc)


def _richardson_gradient(fun, x, h):
    """d fun / d x_l for every l, central differences with one Richardson step."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    out = np.zeros((len(x),) + f0.shape)
    for l in range(len(x)):
        e = np.zeros_like(x)
        e[l] = 1.0

        def central(step):
            return (np.asarray(fun(x + step * e)) - np.asarray(fun(x - step * e))) / (2 * step)

        out[l] = (4.0 * central(h / 2) - central(h)) / 3.0
    return out


def bivector_tensor(C):
    """Tensor P^{jk} (P(dx_j, dx_k) = P^{jk}) of a coefficient matrix C with
    P = C_{jk} d_j ^ d_k summed over all j, k."""
    C = np.asarray(C, dtype=float)
    return C - C.T


def schouten_field(P_eval, Q_eval, point, fd_step=1e-3):
    """Coordinate Schouten bracket [P, Q] of two bivector fields at a point.

    ``P_eval`` and ``Q_eval`` return coefficient matrices C with
    P = C_{jk} d_j ^ d_k (full sum).  The result is the antisymmetric tensor

        [P, Q]^{ijk} = sum_cyc(ijk) sum_l (P^{li} d_l Q^{jk} + Q^{li} d_l P^{jk})

    so that [P, P]^{ijk} = 2 sum_cyc P^{li} d_l P^{jk}.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    x = np.asarray(point, dtype=float)

    def P(y):
        return bivector_tensor(P_eval(y))

    def Q(y):
        return bivector_tensor(Q_eval(y))

    same = Q_eval is P_eval
    P0 = P(x)
    dP = _richardson_gradient(P, x, fd_step)
    if same:
        Q0, dQ = P0, dP
    else:
        Q0, dQ = Q(x), _richardson_gradient(Q, x, fd_step)
    if not (np.all(np.isfinite(dP)) and np.all(np.isfinite(dQ))):
        raise DomainError("non-finite bivector evaluation in Schouten bracket")
    A = np.einsum("li,ljk->ijk", P0, dQ) + np.einsum("li,ljk->ijk", Q0, dP)
    return A + np.einsum("ijk->jki", A) + np.einsum("ijk->kij", A)

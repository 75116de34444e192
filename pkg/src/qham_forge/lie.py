"""Compact matrix Lie groups: bases, structure constants, exp/log, Ad/ad, eta.

Algebra elements are coefficient vectors in an orthonormal basis ``e_i`` and
group elements are plain complex matrices.  The inner product on every model
is ``<X, Y> = -Re tr(XY)``; bases are normalised so that they are orthonormal
for it, so coefficient vectors can be paired with ``numpy.dot``.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .errors import DomainError, SingularInputError, TangentError, UnsupportedModelError

INNER_PRODUCT_LABEL = "<X,Y> = -Re tr(XY)"


@dataclass(frozen=True)
class Block:
    """One simple or abelian factor sitting block-diagonally in a model."""

    kind: str
    row: int
    size: int
    offset: int
    dim: int


@dataclass(frozen=True, eq=False)
class LieGroupModel:
    name: str
    kind: str
    dim: int
    matrix_size: int
    basis: np.ndarray
    blocks: tuple
    inner_product: str = INNER_PRODUCT_LABEL

    def __repr__(self):
        return f"LieGroupModel({self.name!r}, dim={self.dim}, matrix_size={self.matrix_size})"

    @functools.cached_property
    def structure_constants(self):
        return structure_constants(self)

    @property
    def identity(self):
        return np.eye(self.matrix_size, dtype=complex)

    @property
    def is_abelian(self):
        return all(b.kind == "torus" for b in self.blocks)

    def coords(self, X):
        """Coefficients of an algebra matrix in the orthonormal basis."""
        return -np.einsum("iab,ba->i", self.basis, np.asarray(X)).real

    def matrix(self, x):
        return np.einsum("i,iab->ab", np.asarray(x, dtype=float), self.basis)

    def inner(self, x, y):
        return float(np.dot(x, y))

    def bracket(self, x, y):
        X, Y = self.matrix(x), self.matrix(y)
        return self.coords(X @ Y - Y @ X)

    def inverse(self, g):
        return np.conj(np.asarray(g)).T

    def random_algebra(self, rng, scale=1.0):
        return scale * rng.standard_normal(self.dim)

    def random_element(self, rng):
        """Haar-distributed group element, sampled block by block."""
        g = np.zeros((self.matrix_size, self.matrix_size), dtype=complex)
        for b in self.blocks:
            r = slice(b.row, b.row + b.size)
            g[r, r] = _haar(b, rng)
        return g

    def algebra_residual(self, X):
        X = np.asarray(X)
        return float(np.linalg.norm(self.matrix(self.coords(X)) - X))

    def group_residual(self, g):
        g = np.asarray(g)
        res = np.linalg.norm(np.conj(g).T @ g - np.eye(self.matrix_size))
        for b in self.blocks:
            if b.kind == "torus":
                continue
            r = slice(b.row, b.row + b.size)
            res += abs(np.linalg.det(g[r, r]) - 1.0)
            if b.kind == "so3":
                res += np.linalg.norm(g[r, r].imag)
        return float(res)


def _haar(block, rng):
    n = block.size
    if block.kind == "torus":
        return np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))
    if block.kind == "so3":
        q, r = np.linalg.qr(rng.standard_normal((3, 3)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return q.astype(complex)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q / np.linalg.det(q) ** (1.0 / n)


_PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _gell_mann():
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return lam


def _inner_matrices(X, Y):
    return -np.trace(X @ Y).real


def _gram_schmidt(mats):
    out = []
    for m in mats:
        v = m.astype(complex)
        for u in out:
            v = v - _inner_matrices(u, v) * u
        out.append(v / np.sqrt(_inner_matrices(v, v)))
    return np.array(out)


def _simple_basis(kind, k=None):
    if kind == "su2":
        return _PAULI / (1j * np.sqrt(2))
    if kind == "su3":
        return _gram_schmidt(_gell_mann() / 1j)
    if kind == "so3":
        eps = np.zeros((3, 3, 3))
        for (i, j, l), s in _levi_civita().items():
            eps[i, j, l] = s
        return (-eps / np.sqrt(2)).astype(complex)
    if kind == "torus":
        basis = np.zeros((k, k, k), dtype=complex)
        for j in range(k):
            basis[j, j, j] = 1j
        return basis
    raise UnsupportedModelError(f"unsupported group kind {kind!r}")


def _levi_civita():
    return {p: int(round(np.linalg.det(np.eye(3)[list(p)])))
            for p in itertools.permutations(range(3))}


_SIZES = {"su2": (3, 2), "su3": (8, 3), "so3": (3, 3)}


def _parse_factor(token):
    token = token.strip()
    if token in _SIZES:
        return token, None
    if token.startswith("torus"):
        rest = token[len("torus"):].lstrip(":(").rstrip(")")
        try:
            k = int(rest)
        except ValueError:
            raise UnsupportedModelError(f"bad torus rank in {token!r}") from None
        if k < 1:
            raise UnsupportedModelError("torus rank must be positive")
        return "torus", k
    raise UnsupportedModelError(f"unsupported group kind {token!r}")


def make_group_model(kind, params=None):
    """Build a model from an identifier such as ``"su2"``, ``"torus:2"`` or
    ``"prod:su2,su2"``.

    ``params`` may carry a torus rank (``make_group_model("torus", 2)``) or a
    list of factor identifiers for ``"prod"``.
    """
    if isinstance(kind, str) and kind.startswith("prod"):
        if params is None:
            params = kind.split(":", 1)[1].split(",") if ":" in kind else []
        factors = [_parse_factor(p) if isinstance(p, str) else p for p in params]
        if len(factors) < 1:
            raise UnsupportedModelError("product model needs at least one factor")
        return _assemble(factors, name="prod:" + ",".join(_factor_name(f) for f in factors))
    if kind == "torus" and params is not None:
        factor = ("torus", int(params))
    else:
        factor = _parse_factor(kind)
    return _assemble([factor], name=_factor_name(factor))


def _factor_name(factor):
    kind, k = factor
    return f"torus:{k}" if kind == "torus" else kind


def _assemble(factors, name):
    blocks, bases = [], []
    row = offset = 0
    for kind, k in factors:
        dim, size = (k, k) if kind == "torus" else _SIZES[kind]
        blocks.append(Block(kind, row, size, offset, dim))
        bases.append(_simple_basis(kind, k))
        row += size
        offset += dim
    basis = np.zeros((offset, row, row), dtype=complex)
    for b, bb in zip(blocks, bases):
        basis[b.offset:b.offset + b.dim, b.row:b.row + b.size, b.row:b.row + b.size] = bb
    kind = name if len(factors) == 1 else "prod"
    return LieGroupModel(name=name, kind=kind, dim=offset, matrix_size=row,
                         basis=basis, blocks=tuple(blocks))


def model_product(*models):
    """Direct product of existing models (e.g. g + g for fusion)."""
    factors = []
    for m in models:
        factors.extend((b.kind, b.dim if b.kind == "torus" else None) for b in m.blocks)
    return make_group_model("prod", factors)


def structure_constants(model):
    """f_ijk = <e_i, [e_j, e_k]>, so that [e_j, e_k] = sum_i f_ijk e_i."""
    E = model.basis
    comm = np.einsum("jab,kbc->jkac", E, E) - np.einsum("kab,jbc->jkac", E, E)
    return -np.einsum("iab,jkba->ijk", E, comm).real


def structure_constants_json(model):
    return json.dumps(np.round(model.structure_constants, 15).tolist())


def exp_map(model, x):
    """Matrix exponential of an algebra element (Pade scaling and squaring)."""
    return scipy.linalg.expm(model.matrix(x))


def _branch_ok(g, margin):
    angles = np.angle(np.linalg.eigvals(g))
    return bool(np.all(np.abs(angles) < np.pi - margin))


def log_map(model, g, margin=1e-9):
    """Principal logarithm; raises DomainError off the principal branch."""
    g = np.asarray(g, dtype=complex)
    if not _branch_ok(g, margin):
        raise DomainError("group element outside the principal-log domain")
    L = scipy.linalg.logm(g)
    return model.coords(L)


def Ad_matrix(model, g):
    """Matrix of Ad_g in the orthonormal basis (columns are Ad_g e_k)."""
    g = np.asarray(g)
    gi = model.inverse(g)
    conj = np.einsum("ab,kbc,cd->kad", g, model.basis, gi)
    return -np.einsum("iab,kba->ik", model.basis, conj).real


def Ad(model, g, x):
    g = np.asarray(g)
    return model.coords(g @ model.matrix(x) @ model.inverse(g))


def ad_matrix(model, x):
    """(ad_x)_{jk} = -f_{jki} x_i."""
    return -np.einsum("jki,i->jk", model.structure_constants, np.asarray(x, dtype=float))


def _normal_matrix_function(A, f):
    T, Z = scipy.linalg.schur(A.astype(complex), output="complex")
    lam = np.diag(T)
    return (Z * f(lam)) @ np.conj(Z).T, lam


def _eta_scalar(lam):
    out = np.ones_like(lam)
    big = np.abs(lam) > 1e-8
    out[big] = lam[big] / (1.0 - np.exp(-lam[big]))
    small = ~big
    out[small] = 1.0 + lam[small] / 2.0
    return out


def _dexp_scalar(lam):
    out = np.ones_like(lam)
    big = np.abs(lam) > 1e-8
    out[big] = (1.0 - np.exp(-lam[big])) / lam[big]
    small = ~big
    out[small] = 1.0 - lam[small] / 2.0
    return out


@functools.lru_cache(maxsize=None)
def eta_series_coefficients(n_terms=30):
    """Taylor coefficients of s / (1 - e^{-s}) = sum_n (-1)^n B_n s^n / n!."""
    B = scipy.special.bernoulli(n_terms)
    return tuple(float((-1) ** n * B[n] / scipy.special.factorial(n)) for n in range(n_terms + 1))


def eta_series(A, n_terms=20):
    coeffs = eta_series_coefficients(max(n_terms, 1))
    out = np.zeros_like(A, dtype=float)
    power = np.eye(A.shape[0])
    for n in range(n_terms + 1):
        out = out + coeffs[n] * power
        power = power @ A
    return out


def _check_poles(lam, tol=1e-8):
    k = np.round(lam.imag / (2 * np.pi))
    near = (k != 0) & (np.abs(lam - 2j * np.pi * k) < tol * max(1.0, np.max(np.abs(lam))))
    if np.any(near):
        raise SingularInputError("ad_X has an eigenvalue at a pole of eta (2*pi*i*k, k != 0)")


def eta_of_matrix(A):
    """eta(A) for a real antisymmetric (hence normal) matrix A."""
    A = np.asarray(A, dtype=float)
    if np.linalg.norm(A, 2) < 0.5:
        return eta_series(A, n_terms=30)
    F, lam = _normal_matrix_function(A, lambda z: z)
    _check_poles(lam)
    F, _ = _normal_matrix_function(A, _eta_scalar)
    return F.real


def dexp_eta(model, x):
    """eta(ad_x) with eta(s) = s / (1 - e^{-s}).

    This is the inverse of the left-trivialised differential of exp at x:
    a left-trivialised tangent u at exp(x) has exponential-chart
    coordinates eta(ad_x) u.
    """
    return eta_of_matrix(ad_matrix(model, x))


def dexp_left(model, x):
    """Left-trivialised differential of exp at x, (1 - e^{-ad_x}) / ad_x."""
    A = ad_matrix(model, x)
    F, _ = _normal_matrix_function(A, _dexp_scalar)
    return F.real


def _tangent_coords(model, M, tol):
    c = model.coords(M)
    if np.linalg.norm(model.matrix(c) - M) > tol * max(1.0, np.linalg.norm(M)):
        raise TangentError("matrix is not tangent at the given group element")
    return c


def theta_L(model, g, v, tol=1e-8):
    """Left Maurer-Cartan form: coordinates of g^{-1} v."""
    return _tangent_coords(model, model.inverse(g) @ np.asarray(v), tol)


def theta_R(model, g, v, tol=1e-8):
    """Right Maurer-Cartan form: coordinates of v g^{-1}."""
    return _tangent_coords(model, np.asarray(v) @ model.inverse(g), tol)


def jacobi_residual(f):
    """max |sum_m f_ijm f_mkl + cyclic(i,j,k)| over all index quadruples."""
    t = np.einsum("ijm,mkl->ijkl", f, f)
    s = t + np.einsum("ijkl->jkil", t) + np.einsum("ijkl->kijl", t)
    return float(np.max(np.abs(s))) if s.size else 0.0


def injectivity_radius(model):
    """Norm bound below which exp is injective and eta is pole-free.

    For unit x the spectral radius of ad_x is at most ||ad||_op; keeping
    ||x|| * ||ad||_op < pi keeps every eigenvalue of ad_x inside (-pi, pi)i.
    """
    f = model.structure_constants
    if not np.any(f):
        return np.inf
    op = max(np.linalg.norm(ad_matrix(model, e), 2) for e in np.eye(model.dim))
    return np.pi / op

"""Complex-linear algebra on R^{2n} = C^n, defining functions, and Levi forms.

Conventions used package-wide:

* Real coordinates are ordered (x_1, .., x_n, y_1, .., y_n) with
  z_j = x_j + i y_j. The complex structure J sends the x_j direction to
  the y_j direction, so on stacked vectors J(a, b) = (-b, a).
* A domain is N = {rho < 0} for a defining function rho with nonvanishing
  gradient on {rho = 0}.
* The Levi form at a boundary point is the complex Hessian
  d^2 rho / dz_j dzbar_k restricted to the complex tangent space W_p and
  scaled by 2/|grad rho|, so that on the unit sphere it is the identity.
  The minimum of the trace of the second fundamental form over complex
  k-planes in W_p equals the sum of the k smallest Levi eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConstraintViolationError,
    DegenerateBoundaryError,
    EvaluationError,
    InvalidSubspaceError,
)

__all__ = [
    "ComplexStructure",
    "DefiningFunction",
    "BoundaryPointData",
    "PseudoconvexityReport",
    "apply_j",
    "hermitian",
    "to_complex_coords",
    "from_complex_coords",
    "complex_hessian",
    "boundary_data",
    "classify_pseudoconvexity",
    "make_domain",
    "DOMAIN_CATALOG",
]


def apply_j(v: np.ndarray) -> np.ndarray:
    """Multiply by the standard complex structure: J(a, b) = (-b, a)."""
    n = v.shape[-1] // 2
    out = np.empty_like(v)
    out[..., :n] = -v[..., n:]
    out[..., n:] = v[..., :n]
    return out


def hermitian(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hermitian pairing <<u, v>> = sum_c u_c conj(v_c) over the last axis."""
    return np.sum(u * np.conj(v), axis=-1)


def to_complex_coords(v: np.ndarray) -> np.ndarray:
    """Real 2n-vector(s) -> C^n via w_j = v_{x_j} + i v_{y_j}."""
    n = v.shape[-1] // 2
    return v[..., :n] + 1j * v[..., n:]


def from_complex_coords(w: np.ndarray) -> np.ndarray:
    """C^n vector(s) -> real 2n layout (Re w, Im w)."""
    return np.concatenate([np.real(w), np.imag(w)], axis=-1)


@dataclass(frozen=True)
class ComplexStructure:
    """The identification R^{2n} = C^n carrying dimension bookkeeping."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension must be >= 1")

    @property
    def real_dim(self) -> int:
        return 2 * self.n

    def j(self, v: np.ndarray) -> np.ndarray:
        return apply_j(v)


# ---------------------------------------------------------------------------
# defining functions


def _fd_gradient(rho, p, h):
    p = np.asarray(p, dtype=float)
    g = np.empty_like(p)
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        g[i] = (rho(p + e) - rho(p - e)) / (2.0 * h)
    return g


def _fd_hessian(rho, p, h):
    p = np.asarray(p, dtype=float)
    m = p.size
    hess = np.empty((m, m))
    f0 = rho(p)
    for i in range(m):
        ei = np.zeros_like(p)
        ei[i] = h
        hess[i, i] = (rho(p + ei) - 2.0 * f0 + rho(p - ei)) / h**2
        for j in range(i + 1, m):
            ej = np.zeros_like(p)
            ej[j] = h
            val = (
                rho(p + ei + ej) - rho(p + ei - ej) - rho(p - ei + ej) + rho(p - ei - ej)
            ) / (4.0 * h**2)
            hess[i, j] = val
            hess[j, i] = val
    return 0.5 * (hess + hess.T)


@dataclass
class DefiningFunction:
    """A domain N = {rho < 0} with gradient and real-Hessian evaluators.

    provenance is "analytic" when grad/hess are exact closures and
    "finite-difference" when they come from central differences of rho
    (step fd_step * max(1, |p|); the FD Hessian is symmetrized).
    """

    n: int
    rho: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    provenance: str = "analytic"
    fd_step: float | None = None
    name: str = "custom"

    @classmethod
    def from_scalar(cls, rho, n, fd_step=1e-5, name="custom-fd"):
        """Build the finite-difference provenance from rho alone."""

        def grad(p):
            h = fd_step * max(1.0, float(np.linalg.norm(p)))
            return _fd_gradient(rho, p, h)

        def hess(p):
            h = fd_step * max(1.0, float(np.linalg.norm(p)))
            return _fd_hessian(rho, p, h)

        return cls(
            n=n,
            rho=rho,
            grad=grad,
            hess=hess,
            provenance="finite-difference",
            fd_step=fd_step,
            name=name,
        )


class PolynomialRho:
    """Polynomial in the 2n real variables given as monomial terms.

    Each term is (exponents, coefficient) with exponents a length-2n tuple
    over (x_1..x_n, y_1..y_n). Gradient and Hessian are exact.
    """

    def __init__(self, n: int, terms: Sequence[tuple]):
        self.n = n
        self.terms = [(tuple(int(e) for e in ex), float(c)) for ex, c in terms]
        for ex, c in self.terms:
            if len(ex) != 2 * n or any(e < 0 for e in ex):
                raise ValueError(f"bad monomial exponents {ex} for n={n}")
            if not np.isfinite(c):
                raise ValueError(f"non-finite coefficient {c} for exponents {ex}")

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        total = 0.0
        for ex, c in self.terms:
            v = c
            for i, e in enumerate(ex):
                if e:
                    v *= p[i] ** e
            total += v
        return total

    def gradient(self, p):
        p = np.asarray(p, dtype=float)
        m = 2 * self.n
        g = np.zeros(m)
        for ex, c in self.terms:
            for i, e in enumerate(ex):
                if not e:
                    continue
                v = c * e
                for jj, ee in enumerate(ex):
                    pw = ee - 1 if jj == i else ee
                    if pw:
                        v *= p[jj] ** pw
                g[i] += v
        return g

    def hessian(self, p):
        p = np.asarray(p, dtype=float)
        m = 2 * self.n
        hess = np.zeros((m, m))
        for ex, c in self.terms:
            for i, ei in enumerate(ex):
                if not ei:
                    continue
                for j, ej in enumerate(ex):
                    if i == j:
                        if ei < 2:
                            continue
                        v = c * ei * (ei - 1)
                        for kk, ee in enumerate(ex):
                            pw = ee - 2 if kk == i else ee
                            if pw:
                                v *= p[kk] ** pw
                        hess[i, j] += v
                    else:
                        if not ej:
                            continue
                        v = c * ei * ej
                        for kk, ee in enumerate(ex):
                            pw = ee
                            if kk == i or kk == j:
                                pw -= 1
                            if pw:
                                v *= p[kk] ** pw
                        hess[i, j] += v
        return hess

    def defining_function(self, name="custom"):
        return DefiningFunction(
            n=self.n,
            rho=self,
            grad=self.gradient,
            hess=self.hessian,
            provenance="analytic",
            name=name,
        )


def _ball4_terms():
    # |z|^2 - 1 on C^2
    terms = [((2, 0, 0, 0), 1.0), ((0, 2, 0, 0), 1.0), ((0, 0, 2, 0), 1.0), ((0, 0, 0, 2), 1.0)]
    terms.append(((0, 0, 0, 0), -1.0))
    return terms


def _cylinder_x_terms():
    return [((2, 0, 0, 0), 1.0), ((0, 2, 0, 0), 1.0), ((0, 0, 0, 0), -1.0)]


def _weak_rank_one_terms():
    # (x1 - y2)^2 + (x2 + y1)^2 - 1 = |z1 + i z2|^2 - 1
    return [
        ((2, 0, 0, 0), 1.0),
        ((0, 0, 0, 2), 1.0),
        ((1, 0, 0, 1), -2.0),
        ((0, 2, 0, 0), 1.0),
        ((0, 0, 2, 0), 1.0),
        ((0, 1, 1, 0), 2.0),
        ((0, 0, 0, 0), -1.0),
    ]


DOMAIN_CATALOG = {
    "ball4": (2, _ball4_terms),
    "cylinder_x": (2, _cylinder_x_terms),
    "weak_rank_one": (2, _weak_rank_one_terms),
}


def make_domain(spec) -> DefiningFunction:
    """Build a DefiningFunction from a catalog name or a polynomial spec.

    Accepted specs:
      * a catalog name: "ball4", "cylinder_x", "weak_rank_one";
      * a dict {"n": n, "terms": [{"exponents": [..2n ints..], "coef": c}, ..]}
        describing rho as monomials in (x_1..x_n, y_1..y_n).
    """
    if isinstance(spec, str):
        if spec not in DOMAIN_CATALOG:
            raise KeyError(f"unknown domain {spec!r}; catalog: {sorted(DOMAIN_CATALOG)}")
        n, builder = DOMAIN_CATALOG[spec]
        return PolynomialRho(n, builder()).defining_function(name=spec)
    if isinstance(spec, dict):
        n = int(spec["n"])
        terms = [(t["exponents"], t["coef"]) for t in spec["terms"]]
        return PolynomialRho(n, terms).defining_function(name=spec.get("name", "custom"))
    raise TypeError(f"cannot build a domain from {type(spec).__name__}")


# ---------------------------------------------------------------------------
# complex Hessian / Levi form


def complex_hessian(df: DefiningFunction, p) -> np.ndarray:
    """Complex Hessian L_jk = d^2 rho / dz_j dzbar_k at p, an n x n
    Hermitian matrix assembled from the real Hessian blocks:

        L = ((H_xx + H_yy) + i (H_xy - H_yx)) / 4.
    """
    p = np.asarray(p, dtype=float)
    hess = np.asarray(df.hess(p), dtype=float)
    if not np.all(np.isfinite(hess)):
        bad = np.argwhere(~np.isfinite(hess))[0]
        raise EvaluationError(
            f"non-finite Hessian entry at {p.tolist()}", coordinate=tuple(bad)
        )
    n = df.n
    hxx = hess[:n, :n]
    hyy = hess[n:, n:]
    hxy = hess[:n, n:]
    hyx = hess[n:, :n]
    lev = 0.25 * ((hxx + hyy) + 1j * (hxy - hyx))
    return 0.5 * (lev + lev.conj().T)


@dataclass
class BoundaryPointData:
    """Unit normal, complex tangent basis and Levi form at a boundary point.

    wp_basis has shape (n, n-1): orthonormal columns (standard C^n Hermitian
    product) spanning W_p = {w : sum_j drho/dz_j w_j = 0}. levi is the
    (n-1, n-1) Hermitian matrix of the Levi form in that basis, normalized
    by 2/|grad rho| so that unit real tangent directions report the second
    fundamental form directly.
    """

    point: np.ndarray
    nu: np.ndarray
    wp_basis: np.ndarray
    levi: np.ndarray
    grad_norm: float


def _complement_basis(a_hat: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the orthogonal complement of a_hat.

    Modified Gram-Schmidt against a_hat over the identity columns, skipping
    the column where |a_hat| is largest. Depends only on a_hat, so it is
    invariant under rho -> c rho (c > 0).
    """
    n = a_hat.size
    pivot = int(np.argmax(np.abs(a_hat)))
    cols = []
    for j in range(n):
        if j == pivot:
            continue
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        v = v - a_hat * np.conj(a_hat[j])
        for u in cols:
            v = v - u * np.sum(v * np.conj(u))
        nrm = np.linalg.norm(v)
        if nrm < 1e-13:
            raise DegenerateBoundaryError("failed to complete complex tangent basis")
        cols.append(v / nrm)
    return np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=complex)


def boundary_data(
    df: DefiningFunction,
    p,
    tol_boundary: float = 1e-9,
    tol_degenerate: float = 1e-12,
) -> BoundaryPointData:
    """Normal, complex tangent space and Levi form at a point of {rho = 0}."""
    p = np.asarray(p, dtype=float)
    val = float(df.rho(p))
    grad = np.asarray(df.grad(p), dtype=float)
    gnorm = float(np.linalg.norm(grad))
    if gnorm < tol_degenerate:
        raise DegenerateBoundaryError(f"|grad rho| = {gnorm:.3e} at {p.tolist()}")
    if abs(val) > tol_boundary * max(1.0, gnorm):
        raise ConstraintViolationError(
            f"point is off the hypersurface: rho = {val:.3e} at {p.tolist()}",
            worst_value=val,
        )
    nu = grad / gnorm
    n = df.n
    # d rho / dz_j = (rho_xj - i rho_yj) / 2
    a = 0.5 * (grad[:n] - 1j * grad[n:])
    a_hat = a / np.linalg.norm(a)
    # W_p = {w : sum_j a_j w_j = 0} is the Hermitian complement of conj(a)
    basis = _complement_basis(np.conj(a_hat))
    lev_full = complex_hessian(df, p)
    # Levi form sum L_jk w_j conj(w'_k) in that basis
    levi = basis.T @ lev_full @ np.conj(basis) * (2.0 / gnorm)
    levi = 0.5 * (levi + levi.conj().T)
    return BoundaryPointData(point=p, nu=nu, wp_basis=basis, levi=levi, grad_norm=gnorm)


@dataclass
class PseudoconvexityReport:
    """Sampled (k-)pseudoconvexity classification of a domain boundary."""

    classification: str  # "strict" | "weak" | "non"
    margin: float  # min over samples of the sum of the k smallest Levi eigenvalues
    k: int
    eigenvalues: np.ndarray = field(repr=False)  # (num_samples, n-1), ascending

    def to_json_dict(self):
        return {
            "classification": self.classification,
            "margin": self.margin,
            "k": self.k,
            "levi_eigenvalues": [list(map(float, row)) for row in self.eigenvalues],
        }


def classify_pseudoconvexity(
    df: DefiningFunction,
    samples,
    k: int = 1,
    tol_pc: float = 1e-9,
    tol_boundary: float = 1e-9,
) -> PseudoconvexityReport:
    """Classify strict/weak/non k-pseudoconvexity at the sampled points.

    For each sample the quantity s_k = lambda_1 + .. + lambda_k (sum of the
    k smallest Levi eigenvalues) is the minimum over complex k-planes
    U <= W_p of the trace of the second fundamental form on U. The domain
    is reported strict when min s_k > tol_pc, weak when |min s_k| <= tol_pc
    and non otherwise; margin = min s_k.
    """
    samples = [np.asarray(p, dtype=float) for p in samples]
    if not samples:
        raise ValueError("need at least one boundary sample")
    if k < 1 or k > df.n - 1:
        raise InvalidSubspaceError(f"k must satisfy 1 <= k <= n-1 = {df.n - 1}, got {k}")
    eigs = []
    for p in samples:
        bd = boundary_data(df, p, tol_boundary=tol_boundary)
        eigs.append(np.linalg.eigvalsh(bd.levi))
    eigs = np.asarray(eigs)
    s_k = np.sum(eigs[:, :k], axis=1)
    margin = float(np.min(s_k))
    if margin > tol_pc:
        cls = "strict"
    elif abs(margin) <= tol_pc:
        cls = "weak"
    else:
        cls = "non"
    return PseudoconvexityReport(classification=cls, margin=margin, k=k, eigenvalues=eigs)

"""Riemannian machinery on a single global chart.

All first and second metric derivatives come from analytic jets of the
metric's expression entries; only the Lie derivative of the curvature
tensor (which needs third derivatives) falls back to outer central
differences with Richardson refinement.

Index conventions used throughout:

* ``Gamma[k, i, j]``  = Christoffel symbol of the second kind.
* ``Riem[l, i, j, k]`` = component of ``R(e_i, e_j) e_k`` along ``e_l``
  for ``R_{X,Y} = [nabla_X, nabla_Y] - nabla_[X,Y]``.
* ``Ric[j, k]`` = trace of ``Z -> R(Z, e_j) e_k``.

Exterior derivatives carry the 1/2 (1-forms) and 1/3 (2-forms)
normalization factors of the co-boundary formulas the identity checks
are written against.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import ExprAst

__all__ = [
    "MetricError",
    "MetricField",
    "TensorValue",
    "VectorFieldSpec",
    "CovectorFieldSpec",
    "MatrixFieldSpec",
    "metric_at",
    "metric_inverse_at",
    "christoffel",
    "riemann",
    "ricci",
    "ricci_operator",
    "scalar_curvature",
    "lie_derivative_metric",
    "lie_derivative_1form",
    "exterior_derivative_1form",
    "exterior_derivative_2form",
    "gradient_and_hessian",
    "lie_derivative_connection",
    "lie_derivative_curvature",
]


class MetricError(Exception):
    """Metric evaluation failed (not symmetric positive definite)."""


def _as_ast(entry, dim: int) -> ExprAst:
    if isinstance(entry, ExprAst):
        return entry
    if isinstance(entry, str):
        return ex.parse_expression(entry, dim)
    return ex.const(float(entry), dim)


@dataclass(frozen=True)
class TensorValue:
    """Dense components of a tensor at a point with a variance signature."""

    variance: tuple[str, ...]  # each slot "up" or "down"
    components: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        if self.components.ndim != len(self.variance):
            raise ValueError("component rank does not match variance signature")
        n = self.components.shape[0] if self.components.ndim else 0
        if any(extent != n for extent in self.components.shape):
            raise ValueError("all component extents must equal the dimension")

    def with_raised(self, slot: int, ginv: np.ndarray) -> "TensorValue":
        if self.variance[slot] != "down":
            raise ValueError("slot is already contravariant")
        comps = np.tensordot(ginv, self.components, axes=([1], [slot]))
        comps = np.moveaxis(comps, 0, slot)
        variance = tuple(
            "up" if i == slot else v for i, v in enumerate(self.variance)
        )
        return TensorValue(variance, comps, self.point)

    def with_lowered(self, slot: int, g: np.ndarray) -> "TensorValue":
        if self.variance[slot] != "up":
            raise ValueError("slot is already covariant")
        comps = np.tensordot(g, self.components, axes=([1], [slot]))
        comps = np.moveaxis(comps, 0, slot)
        variance = tuple(
            "down" if i == slot else v for i, v in enumerate(self.variance)
        )
        return TensorValue(variance, comps, self.point)


@dataclass(frozen=True)
class VectorFieldSpec:
    """Contravariant vector field given by one expression per component."""

    dim: int
    components: tuple[ExprAst, ...]

    @classmethod
    def from_entries(cls, entries, dim: int) -> "VectorFieldSpec":
        comps = tuple(_as_ast(e, dim) for e in entries)
        if len(comps) != dim:
            raise ValueError(f"expected {dim} components, got {len(comps)}")
        return cls(dim, comps)

    def jets(self, p: np.ndarray):
        """Return (V, dV, d2V) with dV[k, a] = d_a V^k."""
        n = self.dim
        v = np.empty(n)
        dv = np.empty((n, n))
        d2v = np.empty((n, n, n))
        for k, comp in enumerate(self.components):
            jet = ex.evaluate_jet(comp, p)
            v[k] = jet.value
            dv[k] = jet.gradient
            d2v[k] = jet.hessian
        return v, dv, d2v


@dataclass(frozen=True)
class CovectorFieldSpec:
    """Covariant 1-form field given by one expression per component."""

    dim: int
    components: tuple[ExprAst, ...]

    @classmethod
    def from_entries(cls, entries, dim: int) -> "CovectorFieldSpec":
        comps = tuple(_as_ast(e, dim) for e in entries)
        if len(comps) != dim:
            raise ValueError(f"expected {dim} components, got {len(comps)}")
        return cls(dim, comps)

    def jets(self, p: np.ndarray):
        n = self.dim
        w = np.empty(n)
        dw = np.empty((n, n))
        for k, comp in enumerate(self.components):
            jet = ex.evaluate_jet(comp, p)
            w[k] = jet.value
            dw[k] = jet.gradient
        return w, dw


@dataclass(frozen=True)
class MatrixFieldSpec:
    """Square field of expressions: mixed tensors, 2-forms, metric blocks."""

    dim: int
    entries: tuple[tuple[ExprAst, ...], ...]

    @classmethod
    def from_entries(cls, rows, dim: int) -> "MatrixFieldSpec":
        out = tuple(tuple(_as_ast(e, dim) for e in row) for row in rows)
        if len(out) != dim or any(len(r) != dim for r in out):
            raise ValueError("matrix field must be dim x dim")
        return cls(dim, out)

    def values(self, p: np.ndarray) -> np.ndarray:
        n = self.dim
        a = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                a[i, j] = ex.evaluate_jet(self.entries[i][j], p).value
        return a

    def jets(self, p: np.ndarray):
        """Return (A, dA) with dA[i, j, k] = d_k A_ij."""
        n = self.dim
        a = np.empty((n, n))
        da = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                jet = ex.evaluate_jet(self.entries[i][j], p)
                a[i, j] = jet.value
                da[i, j] = jet.gradient
        return a, da


# ---------------------------------------------------------------------------
# metric field and per-point geometry cache


class _PointGeometry:
    """All jet-derived geometric data of a metric at one point."""

    def __init__(self, metric: "MetricField", p: np.ndarray):
        n = metric.dim
        self.point = p
        g = np.empty((n, n))
        dg = np.empty((n, n, n))     # dg[i, j, k] = d_k g_ij
        d2g = np.empty((n, n, n, n))  # d2g[i, j, k, l] = d_k d_l g_ij
        for i in range(n):
            for j in range(i, n):
                jet = ex.evaluate_jet(metric.entries[i][j], p)
                g[i, j] = g[j, i] = jet.value
                dg[i, j] = dg[j, i] = jet.gradient
                d2g[i, j] = d2g[j, i] = jet.hessian
        try:
            chol = np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricError(
                f"metric is not positive definite at point {p.tolist()}"
            ) from None
        inv_l = np.linalg.inv(chol)
        self.g = g
        self.ginv = inv_l.T @ inv_l
        self.dg = dg
        self.d2g = d2g
        self._gamma = None
        self._dgamma = None
        self._riem = None
        self._ric = None

    @property
    def gamma(self) -> np.ndarray:
        if self._gamma is None:
            dg = self.dg
            # 0.5 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
            core = (
                np.einsum("jli->lij", dg)
                + np.einsum("ilj->lij", dg)
                - np.einsum("ijl->lij", dg)
            )
            self._gamma = 0.5 * np.einsum("kl,lij->kij", self.ginv, core)
        return self._gamma

    @property
    def dgamma(self) -> np.ndarray:
        """dgamma[k, i, j, m] = d_m Gamma^k_ij."""
        if self._dgamma is None:
            dg, d2g = self.dg, self.d2g
            dginv = -np.einsum("ka,abm,bl->klm", self.ginv, dg, self.ginv)
            core = (
                np.einsum("jli->lij", dg)
                + np.einsum("ilj->lij", dg)
                - np.einsum("ijl->lij", dg)
            )
            dcore = (
                np.einsum("jlim->lijm", d2g)
                + np.einsum("iljm->lijm", d2g)
                - np.einsum("ijlm->lijm", d2g)
            )
            self._dgamma = 0.5 * (
                np.einsum("klm,lij->kijm", dginv, core)
                + np.einsum("kl,lijm->kijm", self.ginv, dcore)
            )
        return self._dgamma

    @property
    def riem(self) -> np.ndarray:
        """riem[l, i, j, k] = component of R(e_i, e_j) e_k along e_l."""
        if self._riem is None:
            gam, dgam = self.gamma, self.dgamma
            term = np.einsum("ljki->lijk", dgam) + np.einsum(
                "lim,mjk->lijk", gam, gam
            )
            self._riem = term - np.einsum("lijk->ljik", term)
        return self._riem

    @property
    def ric(self) -> np.ndarray:
        if self._ric is None:
            self._ric = np.einsum("iijk->jk", self.riem)
        return self._ric

    @property
    def ric_sharp(self) -> np.ndarray:
        return self.ginv @ self.ric

    @property
    def scalar(self) -> float:
        return float(np.einsum("jk,jk->", self.ginv, self.ric))


@dataclass(frozen=True)
class MetricField:
    """Symmetric field of metric expressions on a chart of dimension ``dim``."""

    dim: int
    entries: tuple[tuple[ExprAst, ...], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_entries(cls, rows, dim: int) -> "MetricField":
        """Build from a full square or lower-triangular nested sequence."""
        asts: list[list[ExprAst | None]] = [[None] * dim for _ in range(dim)]
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                asts[i][j] = _as_ast(entry, dim)
        for i in range(dim):
            for j in range(dim):
                if asts[i][j] is None:
                    if asts[j][i] is None:
                        raise ValueError(f"missing metric entry ({i}, {j})")
                    asts[i][j] = asts[j][i]
        # lower triangle is authoritative
        for i in range(dim):
            for j in range(i + 1, dim):
                asts[i][j] = asts[j][i]
        return cls(dim, tuple(tuple(row) for row in asts))

    @classmethod
    def diagonal(cls, entries, dim: int) -> "MetricField":
        rows = [
            [entries[i] if i == j else 0.0 for j in range(dim)]
            for i in range(dim)
        ]
        return cls.from_entries(rows, dim)

    @classmethod
    def euclidean(cls, dim: int) -> "MetricField":
        return cls.diagonal([1.0] * dim, dim)

    def at(self, p) -> _PointGeometry:
        pt = np.asarray(p, dtype=float)
        if pt.shape != (self.dim,):
            raise ValueError(
                f"point dimension {pt.shape} does not match chart ({self.dim},)"
            )
        key = tuple(pt.tolist())
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) > 4096:
                self._cache.clear()
            hit = _PointGeometry(self, pt)
            self._cache[key] = hit
        return hit


# ---------------------------------------------------------------------------
# operations


def metric_at(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("down", "down"), geo.g, geo.point)


def metric_inverse_at(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("up", "up"), geo.ginv, geo.point)


def christoffel(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("up", "down", "down"), geo.gamma, geo.point)


def riemann(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("up", "down", "down", "down"), geo.riem, geo.point)


def ricci(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("down", "down"), geo.ric, geo.point)


def ricci_operator(g: MetricField, p) -> TensorValue:
    geo = g.at(p)
    return TensorValue(("up", "down"), geo.ric_sharp, geo.point)


def scalar_curvature(g: MetricField, p) -> float:
    return g.at(p).scalar


def lie_derivative_metric(g: MetricField, V: VectorFieldSpec, p) -> TensorValue:
    geo = g.at(p)
    v, dv, _ = V.jets(geo.point)
    lg = (
        np.einsum("k,ijk->ij", v, geo.dg)
        + np.einsum("kj,ki->ij", geo.g, dv)
        + np.einsum("ik,kj->ij", geo.g, dv)
    )
    return TensorValue(("down", "down"), lg, geo.point)


def lie_derivative_1form(omega: CovectorFieldSpec, V: VectorFieldSpec, p) -> TensorValue:
    pt = np.asarray(p, dtype=float)
    w, dw = omega.jets(pt)
    v, dv, _ = V.jets(pt)
    lw = dw @ v + w @ dv
    return TensorValue(("down",), lw, pt)


def exterior_derivative_1form(omega: CovectorFieldSpec, p) -> TensorValue:
    pt = np.asarray(p, dtype=float)
    _, dw = omega.jets(pt)
    # dw[j, i] = d_i w_j; includes the 1/2 of the co-boundary formula
    d = 0.5 * (dw.T - dw)
    return TensorValue(("down", "down"), d, pt)


def exterior_derivative_2form(phi: MatrixFieldSpec, p) -> TensorValue:
    pt = np.asarray(p, dtype=float)
    _, dphi = phi.jets(pt)  # dphi[i, j, k] = d_k phi_ij
    # cyclic sum d_i phi_jk + d_j phi_ki + d_k phi_ij with the 1/3 factor
    d = (
        np.einsum("jki->ijk", dphi)
        + np.einsum("kij->ijk", dphi)
        + dphi
    ) / 3.0
    return TensorValue(("down", "down", "down"), d, pt)


def gradient_and_hessian(g: MetricField, v: ExprAst, p) -> tuple[TensorValue, TensorValue]:
    geo = g.at(p)
    jet = ex.evaluate_jet(v, geo.point)
    grad = geo.ginv @ jet.gradient
    hess = jet.hessian - np.einsum("kij,k->ij", geo.gamma, jet.gradient)
    return (
        TensorValue(("up",), grad, geo.point),
        TensorValue(("down", "down"), hess, geo.point),
    )


def _lie_connection_components(g: MetricField, V: VectorFieldSpec, p) -> np.ndarray:
    geo = g.at(np.asarray(p, dtype=float))
    v, dv, d2v = V.jets(geo.point)
    gam, dgam = geo.gamma, geo.dgamma
    # A^k_j = nabla_j V^k
    a = dv + np.einsum("kjm,m->kj", gam, v)
    # da[k, j, i] = d_i A^k_j (the V-Hessian block is symmetric in (j, i))
    da = (
        d2v
        + np.einsum("kjmi,m->kji", dgam, v)
        + np.einsum("kjm,mi->kji", gam, dv)
    )
    nabla_a = (
        np.einsum("kji->kij", da)
        + np.einsum("kim,mj->kij", gam, a)
        - np.einsum("mij,km->kij", gam, a)
    )
    curv = np.einsum("kmij,m->kij", geo.riem, v)
    return nabla_a + curv


def lie_derivative_connection(g: MetricField, V: VectorFieldSpec, p) -> TensorValue:
    """(L_V nabla)(X, Y) = nabla_X nabla_Y V - nabla_{nabla_X Y} V + R(V, X) Y."""
    pt = np.asarray(p, dtype=float)
    t = _lie_connection_components(g, V, pt)
    return TensorValue(("up", "down", "down"), t, pt)


def lie_derivative_curvature(
    g: MetricField, V: VectorFieldSpec, p, step: float = 1e-3
) -> TensorValue:
    """(L_V R)(X, Y) Z via antisymmetrized covariant derivative of L_V nabla.

    The derivative of the connection perturbation needs third metric
    derivatives, obtained with central differences of step ``step`` plus
    one Richardson refinement; results carry a correspondingly looser
    tolerance than the jet-based operations.
    """
    if step <= 0 or step < 1e-12:
        raise ValueError("finite-difference step underflow")
    geo = g.at(np.asarray(p, dtype=float))
    n = g.dim
    pt = geo.point
    t = _lie_connection_components(g, V, pt)
    dt = np.empty((n,) + t.shape)  # dt[m, k, i, j] = d_m T^k_ij
    for m in range(n):
        for h, weight in ((step, 4.0 / 3.0), (2.0 * step, -1.0 / 3.0)):
            dp = np.zeros(n)
            dp[m] = h
            diff = (
                _lie_connection_components(g, V, pt + dp)
                - _lie_connection_components(g, V, pt - dp)
            ) / (2.0 * h)
            if weight > 0:
                dt[m] = weight * diff
            else:
                dt[m] += weight * diff
    gam = geo.gamma
    # nabla_i T^k_jm = d_i T^k_jm + G^k_ia T^a_jm - G^a_ij T^k_am - G^a_im T^k_ja
    nabla_t = (
        dt.transpose(1, 0, 2, 3)
        + np.einsum("kia,ajm->kijm", gam, t)
        - np.einsum("aij,kam->kijm", gam, t)
        - np.einsum("aim,kja->kijm", gam, t)
    )
    # (L_V R)^k_{ij m} = nabla_i T^k_jm - nabla_j T^k_im
    lr = nabla_t - np.einsum("kijm->kjim", nabla_t)
    return TensorValue(("up", "down", "down", "down"), lr, pt)

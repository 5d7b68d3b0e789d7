"""Weak Kenmotsu-type structures: defining condition, audits, builders.

The defining condition for the beta-Kenmotsu class is

    (nabla_X f) Y = beta { g(fX, Y) xibar - etabar(Y) fX },

with the beta = 0 case (parallel f) playing the role of a C-manifold.
``build_example_manifold`` realizes the standard explicit chart model
(metric diag(e^{2 beta xbar}) on the contact block); the twisted-product
builder assembles dt^2 (+) sigma^2 gbar over a weakly Kaehler fiber.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .expr import ExprAst
from .geometry import (
    CovectorFieldSpec,
    MatrixFieldSpec,
    MetricField,
    VectorFieldSpec,
)
from .weakf import (
    ResidualReport,
    StructureAtPoint,
    WeakFManifold,
    check_axioms,
    tensor_residual,
)

__all__ = [
    "FiberSpec",
    "EinsteinFit",
    "IDENTITY_IDS",
    "FD_IDENTITY_IDS",
    "kenmotsu_residual",
    "audit_identities",
    "build_example2",
    "build_twisted_product",
    "twisted_product_audit",
    "eta_einstein_fit",
]

# identities checked by audit_identities; (21)-(23) need one outer finite
# difference of the Ricci tensor and carry the looser 1e-4 tolerance
IDENTITY_IDS = (
    "13", "14", "15", "16", "18", "19", "20", "21", "22", "23", "26", "27", "44",
)
FD_IDENTITY_IDS = ("21", "22", "23")
_FD_STEP = 1e-4


@dataclass(frozen=True)
class FiberSpec:
    """Even-dimensional fiber (gbar, J) for the twisted-product builder.

    Entries are expressions over the *full* chart of the product (the
    fiber occupies coordinates x1..x_{2n}; t-coordinates follow).
    """

    dim: int
    gbar: tuple[tuple[ExprAst, ...], ...]
    J: tuple[tuple[ExprAst, ...], ...]

    def __post_init__(self):
        if self.dim % 2 or self.dim < 2:
            raise ValueError("fiber dimension must be even and positive")

    @classmethod
    def flat_factors(cls, scales, total_dim: int) -> "FiberSpec":
        """Product of flat R^2 factors with J_i = c_i x (rotation by 90 deg)."""
        dim = 2 * len(scales)
        zero = ex.const(0.0, total_dim)
        gbar = [[zero] * dim for _ in range(dim)]
        jmat = [[zero] * dim for _ in range(dim)]
        for k, c in enumerate(scales):
            if c == 0:
                raise ValueError("factor scales must be nonzero")
            a = 2 * k
            gbar[a][a] = gbar[a + 1][a + 1] = ex.const(1.0, total_dim)
            jmat[a][a + 1] = ex.const(-float(c), total_dim)
            jmat[a + 1][a] = ex.const(float(c), total_dim)
        return cls(dim, tuple(map(tuple, gbar)), tuple(map(tuple, jmat)))


@dataclass(frozen=True)
class EinsteinFit:
    """Least-squares coefficients of the eta-Einstein model for Ric."""

    a: float
    b: float
    residual: float
    predicted: tuple[float, float] | None = None  # Kenmotsu closed form, if known


# ---------------------------------------------------------------------------
# defining condition


def _nabla_f_residual(st: StructureAtPoint, beta: float) -> np.ndarray:
    """(nabla_a f)^k_b - beta { (f^m_a g_mb) xibar^k - etabar_b f^k_a }."""
    lhs = st.nabla_f  # [k, b, a]
    gf = np.einsum("ma,mb->ab", st.f, st.geo.g)
    rhs = beta * (
        np.einsum("ab,k->kba", gf, st.xibar)
        - np.einsum("b,ka->kba", st.etabar, st.f)
    )
    return lhs - rhs


def kenmotsu_residual(m: WeakFManifold, p, beta=None) -> ResidualReport:
    """Residual of the defining nabla-f condition at a point.

    ``beta`` overrides the manifold's coefficient and may be an
    expression (the genuinely twisted case); beta = 0 checks the
    C-manifold case.
    """
    st = m.at(p)
    if beta is None:
        bval = m.beta_value(p)
    elif isinstance(beta, ExprAst):
        bval = ex.evaluate_jet(beta, st.point).value
    else:
        bval = float(beta)
    res = tensor_residual(_nabla_f_residual(st, bval), (1, 2))
    return ResidualReport.make("kenmotsu.12", st.point, res, 1e-8)


# ---------------------------------------------------------------------------
# identity audit


def _require_constant_beta(m: WeakFManifold) -> float:
    if not m.beta_is_constant:
        raise ValueError(
            "identity audits require a constant Kenmotsu coefficient; "
            "this manifold carries a coordinate-dependent one"
        )
    return m.beta_value(np.zeros(m.dim))


def _dric_sharp(m: WeakFManifold, p: np.ndarray) -> np.ndarray:
    """d_a (Ric#)^k_j by central differences, [k, j, a]."""
    n = m.dim
    out = np.empty((n, n, n))
    for a in range(n):
        dp = np.zeros(n)
        dp[a] = _FD_STEP
        plus = m.metric.at(p + dp).ric_sharp
        minus = m.metric.at(p - dp).ric_sharp
        out[:, :, a] = (plus - minus) / (2.0 * _FD_STEP)
    return out


def _nabla_ric_sharp(st: StructureAtPoint, dric: np.ndarray) -> np.ndarray:
    """(nabla_a Ric#)^k_j, [k, j, a]."""
    gam = st.geo.gamma
    rs = st.geo.ric_sharp
    return (
        dric
        + np.einsum("kam,mj->kja", gam, rs)
        - np.einsum("maj,km->kja", gam, rs)
    )


def _identity_residual(
    m: WeakFManifold, st: StructureAtPoint, ident: str, fd_cache: dict | None = None
) -> np.ndarray:
    if fd_cache is None:
        fd_cache = {}
    beta = _require_constant_beta(m)
    s, n = m.s, m.n
    dim = m.dim
    g = st.geo.g
    eye = np.eye(dim)
    xi, eta = st.xi, st.eta
    xibar, etabar = st.xibar, st.etabar
    Q, Qt = st.Q, st.Qtilde

    if ident == "13":
        nab = np.stack([st.nabla_vector(i) for i in range(s)])  # [i, k, a]
        return np.einsum("ja,ika->ijk", xi, nab)
    if ident == "14":
        nab = np.stack([st.nabla_vector(i) for i in range(s)])
        rhs = beta * (eye[None, :, :] - np.einsum("ja,jk->ka", eta, xi))
        return nab - rhs[None, :, :]
    if ident == "15":
        # (nabla_a eta^i)_b = d_a eta^i_b - G^m_ab eta^i_m
        nab = st.deta.transpose(0, 2, 1) - np.einsum(
            "mab,im->iab", st.geo.gamma, eta
        )
        rhs = beta * (g - np.einsum("ja,jb->ab", eta, eta))
        return nab - rhs[None, :, :]
    if ident == "16":
        lhs = st.nabla_Q  # [k, b, a]
        gqt = np.einsum("ma,mb->ab", Qt, g)
        rhs = -beta * (
            np.einsum("b,ka->kba", etabar, Qt)
            + np.einsum("ab,k->kba", gqt, xibar)
        )
        return lhs - rhs
    if ident == "18":
        from .geometry import lie_derivative_metric

        rhs = 2.0 * beta * (g - np.einsum("ia,ib->ab", eta, eta))
        out = []
        for i in range(s):
            lg = lie_derivative_metric(m.metric, m.xi[i], st.point).components
            out.append(lg - rhs)
        return np.stack(out)
    if ident == "19":
        lhs = np.einsum("labm,im->ilab", st.geo.riem, xi)
        rhs = beta**2 * (
            np.einsum("a,lb->lab", etabar, eye)
            - np.einsum("b,la->lab", etabar, eye)
            + np.einsum("b,ja,jl->lab", etabar, eta, xi)
            - np.einsum("a,jb,jl->lab", etabar, eta, xi)
        )
        return lhs - rhs[None, :, :, :]
    if ident == "20":
        lhs = np.einsum("km,im->ik", st.geo.ric_sharp, xi)
        rhs = -2.0 * n * beta**2 * xibar
        return lhs - rhs[None, :]
    if ident == "21":
        rs = st.geo.ric_sharp
        dric = fd_cache.setdefault("dric", _dric_sharp(m, st.point))
        nab = _nabla_ric_sharp(st, dric)  # [k, j, a]
        bracket = (
            s * eye
            - s * np.einsum("ja,jk->ka", eta, xi)
            + np.einsum("a,k->ka", etabar, xibar)
        )
        rhs = -2.0 * beta * rs - 4.0 * n * beta**3 * bracket
        out = []
        for i in range(s):
            out.append(np.einsum("kja,a->kj", nab, xi[i]) - rhs)
        return np.stack(out)
    if ident == "22":
        out = np.empty(s)
        rhs = -2.0 * beta * (
            st.geo.scalar + 2.0 * s * n * (2 * n + 1) * beta**2
        )
        for i in range(s):
            h = _FD_STEP
            rp = m.metric.at(st.point + h * xi[i]).scalar
            rm = m.metric.at(st.point - h * xi[i]).scalar
            out[i] = (rp - rm) / (2.0 * h) - rhs
        return out
    if ident == "23":
        rs = st.geo.ric_sharp
        dric = fd_cache.setdefault("dric", _dric_sharp(m, st.point))
        nab = _nabla_ric_sharp(st, dric)  # [k, j, a]
        bracket = (
            s * eye
            - s * np.einsum("ja,jk->ka", eta, xi)
            + np.einsum("a,k->ka", etabar, xibar)
        )
        rhs = -beta * rs - 2.0 * n * beta**3 * bracket
        out = []
        for i in range(s):
            out.append(np.einsum("kja,j->ka", nab, xi[i]) - rhs)
        return np.stack(out)
    if ident == "26":
        riem = st.geo.riem
        f = st.f
        lhs = np.einsum("labm,mc->labc", riem, f) - np.einsum(
            "km,mabc->kabc", f, riem
        )
        sg = (
            s * g
            - s * np.einsum("ja,jb->ab", eta, eta)
            + np.einsum("a,b->ab", etabar, etabar)
        )
        gf = np.einsum("ma,mb->ab", f, g)  # g(f e_a, e_b)
        brk = (
            s * eye
            - s * np.einsum("ja,jk->ka", eta, xi)
            + np.einsum("a,k->ka", etabar, xibar)
        )  # [k, a] = (s id - s sum eta (x) xi + etabar (x) xibar) e_a
        b2 = beta**2
        rhs = b2 * (
            np.einsum("bc,la->labc", sg, f)
            - np.einsum("ac,lb->labc", sg, f)
            + np.einsum("ca,lb->labc", gf, brk)  # g(X, fZ) = g(f e_c, e_a)
            - np.einsum("cb,la->labc", gf, brk)
        )
        return lhs - rhs
    if ident == "27":
        riem = st.geo.riem
        f = st.f
        lhs = np.einsum("ia,jb,lijc->labc", f, f, riem) - np.einsum(
            "jb,lajc->labc", Q, riem
        )
        b2 = beta**2
        gq = np.einsum("mb,mc->bc", Q, g)  # g(e_c, Q e_b)
        etaeta = np.einsum("jb,jc->bc", eta, eta)
        sgl = (
            s * g
            - s * etaeta
            + np.einsum("c,a->ca", etabar, etabar)
        )  # s g(Z,X) - s sum + etabar(Z) etabar(X) at [c, a]
        brk_x = (
            s * eye
            - s * np.einsum("ja,jk->ka", eta, xi)
            + np.einsum("a,k->ka", etabar, xibar)
        )  # [k, a]
        q_minus = Q - np.einsum("jb,jk->kb", eta, xi)  # [k, b]: QY - sum eta^j(Y) xi_j
        gfx = np.einsum("ma,mc->ca", f, g)  # g(Z, fX) at [c, a]
        gfy = np.einsum("mb,mc->cb", f, g)  # g(Z, fY)
        tail = (
            np.einsum("c,la->lac", etabar, eye)
            - np.einsum("ca,l->lac", g, xibar)
            + np.einsum("ja,jc,l->lac", eta, eta, xibar)
            - np.einsum("ja,c,jl->lac", eta, etabar, xi)
        )  # [l, a, c]: etabar(Z) X - g(Z,X) xibar + sum_j eta^j(X){eta^j(Z) xibar - etabar(Z) xi_j}
        rhs = b2 * (
            np.einsum("bc,ka->kabc", gq - etaeta, brk_x)
            - np.einsum("ca,kb->kabc", sgl, q_minus)
            + s * np.einsum("ca,kb->kabc", gfx, f)
            - s * np.einsum("cb,ka->kabc", gfy, f)
            + np.einsum("b,lac->labc", etabar, tail)
        )
        return lhs - rhs
    if ident == "44":
        riem = st.geo.riem
        lhs = np.einsum("lajc,ij->ilac", riem, xi)  # R_{X, xi_i} Z
        rhs = beta**2 * (
            np.einsum("ac,l->lac", g, xibar)
            - np.einsum("c,la->lac", etabar, eye)
            + np.einsum("ja,c,jl->lac", eta, etabar, xi)
            - np.einsum("ja,jc,l->lac", eta, eta, xibar)
        )
        return lhs - rhs[None, :, :, :]
    raise KeyError(f"unknown identity id {ident!r}")


def audit_identities(m: WeakFManifold, p, ids=None) -> list[ResidualReport]:
    """Residual reports for the curvature/connection identity catalogue."""
    if ids is None:
        ids = IDENTITY_IDS
    unknown = [i for i in ids if i not in IDENTITY_IDS]
    if unknown:
        raise KeyError(f"unknown identity ids: {unknown}")
    st = m.at(p)
    reports = []
    fd_cache: dict = {}
    for ident in ids:
        res = tensor_residual(_identity_residual(m, st, ident, fd_cache))
        tol = 1e-4 if ident in FD_IDENTITY_IDS else 1e-8
        reports.append(ResidualReport.make(f"id.{ident}", st.point, res, tol))
    return reports


# ---------------------------------------------------------------------------
# builders


def build_example2(n: int, s: int, beta: float, c: float) -> WeakFManifold:
    """Explicit chart model: metric diag(e^{2 beta xbar} 1_{2n}, 1_s).

    f rotates the contact block with scale sqrt(1+c), Q = (1+c) id on the
    contact block; c = 0 reduces to the classical metric f-structure.
    """
    if n < 1 or s < 1:
        raise ValueError("need n >= 1 and s >= 1")
    if beta == 0:
        raise ValueError("the Kenmotsu coefficient must be nonzero")
    if c < 0:
        raise ValueError("the structure deformation c must be >= 0")
    dim = 2 * n + s
    xbar = ex.add_many([ex.var(2 * n + p, dim) for p in range(s)], dim)
    warp = ex.exp(ex.mul(ex.const(2.0 * beta, dim), xbar))
    diag = [warp] * (2 * n) + [ex.const(1.0, dim)] * s
    metric = MetricField.diagonal(diag, dim)

    root = float(np.sqrt(1.0 + c))
    zero = ex.const(0.0, dim)
    f = [[zero] * dim for _ in range(dim)]
    q = [[zero] * dim for _ in range(dim)]
    for i in range(n):
        f[n + i][i] = ex.const(root, dim)
        f[i][n + i] = ex.const(-root, dim)
    for j in range(2 * n):
        q[j][j] = ex.const(1.0 + c, dim)
    for p in range(s):
        q[2 * n + p][2 * n + p] = ex.const(1.0, dim)

    xi = tuple(
        VectorFieldSpec.from_entries(
            [1.0 if k == 2 * n + p else 0.0 for k in range(dim)], dim
        )
        for p in range(s)
    )
    eta = tuple(
        CovectorFieldSpec.from_entries(
            [1.0 if k == 2 * n + p else 0.0 for k in range(dim)], dim
        )
        for p in range(s)
    )
    return WeakFManifold(
        n=n,
        s=s,
        beta=float(beta),
        c=float(c),
        metric=metric,
        f=MatrixFieldSpec(dim, tuple(map(tuple, f))),
        Q=MatrixFieldSpec(dim, tuple(map(tuple, q))),
        xi=xi,
        eta=eta,
    )


def build_twisted_product(
    fiber: FiberSpec, s: int, sigma: ExprAst, beta: float | ExprAst | None = None
) -> WeakFManifold:
    """Assemble dt^2 (+) sigma^2 gbar with f lifted from the fiber's J.

    Q is derived as the lift of -J^2 so that the structure axioms hold by
    construction; they are still verified at the origin.  When ``beta``
    is omitted it is inferred as d(log sigma)/dt_1 at the origin.
    """
    if s < 1:
        raise ValueError("need s >= 1")
    two_n = fiber.dim
    n = two_n // 2
    dim = two_n + s
    if sigma.dim != dim:
        raise ValueError("sigma must be an expression over the full chart")
    origin = np.zeros(dim)
    if ex.evaluate_jet(sigma, origin).value <= 0:
        raise ValueError("sigma must be positive")

    sig2 = ex.powi(sigma, 2)
    zero = ex.const(0.0, dim)
    rows = [[zero] * dim for _ in range(dim)]
    for a in range(two_n):
        for b in range(two_n):
            rows[a][b] = ex.mul(sig2, fiber.gbar[a][b])
    for p in range(s):
        rows[two_n + p][two_n + p] = ex.const(1.0, dim)
    metric = MetricField.from_entries(rows, dim)

    f = [[zero] * dim for _ in range(dim)]
    q = [[zero] * dim for _ in range(dim)]
    for a in range(two_n):
        for b in range(two_n):
            f[a][b] = fiber.J[a][b]
            q[a][b] = ex.neg(
                ex.add_many(
                    [ex.mul(fiber.J[a][k], fiber.J[k][b]) for k in range(two_n)],
                    dim,
                )
            )
    for p in range(s):
        q[two_n + p][two_n + p] = ex.const(1.0, dim)

    xi = tuple(
        VectorFieldSpec.from_entries(
            [1.0 if k == two_n + p else 0.0 for k in range(dim)], dim
        )
        for p in range(s)
    )
    eta = tuple(
        CovectorFieldSpec.from_entries(
            [1.0 if k == two_n + p else 0.0 for k in range(dim)], dim
        )
        for p in range(s)
    )

    if beta is None:
        jet = ex.evaluate_jet(sigma, origin)
        beta = float(jet.gradient[two_n] / jet.value)

    m = WeakFManifold(
        n=n,
        s=s,
        beta=beta,
        c=None,
        metric=metric,
        f=MatrixFieldSpec(dim, tuple(map(tuple, f))),
        Q=MatrixFieldSpec(dim, tuple(map(tuple, q))),
        xi=xi,
        eta=eta,
        sigma=sigma,
        fiber_dim=two_n,
    )
    worst = max(r.residual for r in check_axioms(m, origin))
    if worst > 1e-8:
        raise ValueError(
            f"fiber data does not satisfy the structure axioms (residual {worst:.2e})"
        )
    return m


def twisted_product_audit(m: WeakFManifold, p) -> list[ResidualReport]:
    """Connection relations of the twisted product: Reeb, base, fiber parts."""
    if m.sigma is None or m.fiber_dim is None:
        raise ValueError("manifold was not built as a twisted product")
    st = m.at(p)
    two_n = m.fiber_dim
    s = m.s
    gam = st.geo.gamma
    g = st.geo.g
    jet = ex.evaluate_jet(m.sigma, st.point)
    dlog = jet.gradient / jet.value  # d(log sigma)

    # (i): nabla_{xi_i} xi_j = 0 and nabla_X xi_i = xi_i(log sigma) X on the fiber
    res_i = np.abs(gam[:, two_n:, two_n:]).max()
    for p_idx in range(s):
        t = two_n + p_idx
        block = gam[:, : two_n, t].copy()  # (nabla_{e_a} xi_p)^k
        block[:two_n] -= dlog[t] * np.eye(two_n)
        res_i = max(res_i, np.abs(block).max())

    # (ii): t-components of nabla_X Y equal -g(X, Y) (grad log sigma)_t
    grad_log_t = st.geo.ginv[two_n:, :] @ jet.gradient / jet.value
    res_ii = np.abs(
        gam[two_n:, :two_n, :two_n]
        + np.einsum("ab,p->pab", g[:two_n, :two_n], grad_log_t)
    ).max()

    # (iii): fiber components of nabla_X Y equal the Christoffels of the
    # induced leaf metric (t frozen), i.e. drop all t-derivatives
    dg_fiber = st.geo.dg[:two_n, :two_n, :two_n]
    ghat_inv = np.linalg.inv(g[:two_n, :two_n])
    core = (
        np.einsum("jli->lij", dg_fiber)
        + np.einsum("ilj->lij", dg_fiber)
        - np.einsum("ijl->lij", dg_fiber)
    )
    gam_hat = 0.5 * np.einsum("kl,lij->kij", ghat_inv, core)
    res_iii = np.abs(gam[:two_n, :two_n, :two_n] - gam_hat).max()

    return [
        ResidualReport.make("twisted.i", st.point, res_i, 1e-6),
        ResidualReport.make("twisted.ii", st.point, res_ii, 1e-6),
        ResidualReport.make("twisted.iii", st.point, res_iii, 1e-6),
    ]


# ---------------------------------------------------------------------------
# eta-Einstein fit


def eta_einstein_fit(m: WeakFManifold, p) -> EinsteinFit:
    """Least-squares (a, b) of Ric = a g - a sum eta (x) eta + (a+b) etabar (x) etabar."""
    st = m.at(p)
    ric = st.geo.ric
    g = st.geo.g
    etaeta = np.einsum("ia,ib->ab", st.eta, st.eta)
    ebar = np.einsum("a,b->ab", st.etabar, st.etabar)
    col_a = (g - etaeta + ebar).ravel()
    col_b = ebar.ravel()
    design = np.stack([col_a, col_b], axis=1)
    coef, *_ = np.linalg.lstsq(design, ric.ravel(), rcond=None)
    a, b = float(coef[0]), float(coef[1])
    model = a * col_a + b * col_b
    residual = float(np.abs(ric.ravel() - model).max())
    predicted = None
    if m.beta is not None and m.beta_is_constant:
        beta = m.beta_value(p)
        a_pred = m.s * beta**2 + st.geo.scalar / (2.0 * m.n)
        b_pred = -2.0 * m.n * beta**2 - a_pred
        predicted = (float(a_pred), float(b_pred))
    return EinsteinFit(a, b, residual, predicted)

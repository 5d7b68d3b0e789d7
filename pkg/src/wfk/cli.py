"""Manifest-driven command line: run identity checks, emit builder manifests.

Manifest schema (JSON, version tag "wfk/1"): structure tensors as
expression strings over coordinates x1..xN, metric as its lower
triangle, optional soliton block, optional tolerance overrides, check
list, and sampling policy.  Reports are deterministic for a fixed
manifest and seed; `--reproducible` suppresses the timestamp.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys

import numpy as np

from . import __version__
from . import expr as ex
from .checks import CATALOGUE, CheckContext, applicable_ids, run_check_ids
from .expr import ExprAst, ExprError
from .geometry import (
    CovectorFieldSpec,
    MatrixFieldSpec,
    MetricError,
    MetricField,
    VectorFieldSpec,
)
from .kenmotsu import FiberSpec, build_example2, build_twisted_product
from .star_soliton import SolitonData
from .weakf import WeakFManifold

SCHEMA_VERSION = "wfk/1"
_DEFAULT_SAMPLE = {"count": 5, "seed": 42, "box": [-0.5, 0.5]}


class ManifestError(Exception):
    """Invalid manifest content; maps to process exit code 2."""


# ---------------------------------------------------------------------------
# manifest parsing


def _parse_entry(raw, dim: int, where: str) -> ExprAst:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return ex.const(float(raw), dim)
    if isinstance(raw, str):
        try:
            return ex.parse_expression(raw, dim)
        except ExprError as err:
            raise ManifestError(f"{where}: {err}") from err
    raise ManifestError(f"{where}: expected a number or expression string")


def _parse_matrix(raw, dim: int, name: str, lower: bool = False):
    if not isinstance(raw, list) or len(raw) != dim:
        raise ManifestError(f"{name}: expected {dim} rows")
    rows = []
    for i, row in enumerate(raw):
        want = i + 1 if lower else dim
        if not isinstance(row, list) or len(row) != want:
            raise ManifestError(f"{name} row {i + 1}: expected {want} entries")
        rows.append(
            [_parse_entry(e, dim, f"{name}[{i + 1}][{j + 1}]") for j, e in enumerate(row)]
        )
    if lower:
        full = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i + 1):
                full[i][j] = rows[i][j]
                full[j][i] = rows[i][j]
        rows = full
    return rows


def _parse_components(raw, dim: int, name: str):
    if not isinstance(raw, list) or len(raw) != dim:
        raise ManifestError(f"{name}: expected {dim} components")
    return [_parse_entry(e, dim, f"{name}[{k + 1}]") for k, e in enumerate(raw)]


def load_manifest(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ManifestError(f"cannot read manifest: {err}") from err
    except json.JSONDecodeError as err:
        raise ManifestError(f"manifest is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ManifestError("manifest root must be a JSON object")
    if data.get("version") != SCHEMA_VERSION:
        raise ManifestError(
            f"unsupported manifest version {data.get('version')!r}; "
            f"expected {SCHEMA_VERSION!r}"
        )
    return data


def manifold_from_manifest(data: dict):
    """Build (manifold, soliton, check ids, tolerance overrides, sample policy)."""
    try:
        n, s = int(data["n"]), int(data["s"])
    except (KeyError, TypeError, ValueError) as err:
        raise ManifestError(f"manifest needs integer n and s: {err}") from err
    dim = 2 * n + s
    if data.get("dim") not in (None, dim):
        raise ManifestError(f"dim {data.get('dim')} does not equal 2n+s = {dim}")
    if n < 1 or s < 1:
        raise ManifestError("need n >= 1 and s >= 1")

    beta_raw = data.get("beta")
    if beta_raw is None:
        beta = None
    elif isinstance(beta_raw, (int, float)) and not isinstance(beta_raw, bool):
        beta = float(beta_raw)
    else:
        beta = _parse_entry(beta_raw, dim, "beta")
    c = data.get("c")
    c = float(c) if c is not None else None

    metric_rows = _parse_matrix(data.get("metric"), dim, "metric", lower=True)
    metric = MetricField.from_entries(metric_rows, dim)
    f = MatrixFieldSpec.from_entries(_parse_matrix(data.get("f"), dim, "f"), dim)
    q = MatrixFieldSpec.from_entries(_parse_matrix(data.get("Q"), dim, "Q"), dim)
    xi_raw, eta_raw = data.get("xi"), data.get("eta")
    if not isinstance(xi_raw, list) or len(xi_raw) != s:
        raise ManifestError(f"xi: expected {s} vector fields")
    if not isinstance(eta_raw, list) or len(eta_raw) != s:
        raise ManifestError(f"eta: expected {s} one-forms")
    xi = tuple(
        VectorFieldSpec(dim, tuple(_parse_components(v, dim, f"xi[{i + 1}]")))
        for i, v in enumerate(xi_raw)
    )
    eta = tuple(
        CovectorFieldSpec(dim, tuple(_parse_components(w, dim, f"eta[{i + 1}]")))
        for i, w in enumerate(eta_raw)
    )

    sigma = None
    fiber_dim = None
    if data.get("sigma") is not None:
        sigma = _parse_entry(data["sigma"], dim, "sigma")
        fiber_dim = 2 * n

    m = WeakFManifold(
        n=n, s=s, beta=beta, c=c, metric=metric, f=f, Q=q, xi=xi, eta=eta,
        sigma=sigma, fiber_dim=fiber_dim,
    )

    # dual-basis validation at the origin
    origin = np.zeros(dim)
    st = m.at(origin)
    pairing = np.einsum("ik,jk->ij", st.eta, st.xi)
    if np.abs(pairing - np.eye(s)).max() > 1e-8:
        raise ManifestError("axiom eta^i(xi_j) = delta violated at validation")

    soliton = None
    sol_raw = data.get("soliton")
    if sol_raw is not None:
        if not isinstance(sol_raw, dict):
            raise ManifestError("soliton: expected an object")
        try:
            lam = float(sol_raw["lambda"])
            mu = float(sol_raw["mu"])
        except (KeyError, TypeError, ValueError) as err:
            raise ManifestError(f"soliton needs numeric lambda and mu: {err}") from err
        has_v = "V" in sol_raw
        has_pot = "v" in sol_raw
        if has_v == has_pot:
            raise ManifestError("soliton: provide exactly one of V or v")
        if has_v:
            comps = _parse_components(sol_raw["V"], dim, "soliton.V")
            soliton = SolitonData(lam=lam, mu=mu, V=VectorFieldSpec(dim, tuple(comps)))
        else:
            soliton = SolitonData(lam=lam, mu=mu, v=_parse_entry(sol_raw["v"], dim, "soliton.v"))

    checks = data.get("checks")
    if checks is not None:
        if not isinstance(checks, list) or not all(isinstance(c_, str) for c_ in checks):
            raise ManifestError("checks: expected a list of check ids")
        unknown = [c_ for c_ in checks if c_ not in CATALOGUE]
        if unknown:
            raise ManifestError(f"unknown check ids in manifest: {unknown}")

    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise ManifestError("tolerances: expected an object of id -> value")
    overrides = {}
    for key, val in tols.items():
        if key not in CATALOGUE:
            raise ManifestError(f"tolerances: unknown check id {key!r}")
        try:
            overrides[key] = float(val)
        except (TypeError, ValueError) as err:
            raise ManifestError(f"tolerances[{key}]: {err}") from err

    sample = dict(_DEFAULT_SAMPLE)
    sample.update(data.get("sample") or {})
    return m, soliton, checks, overrides, sample


# ---------------------------------------------------------------------------
# manifest emission


def _entry_source(node: ExprAst) -> object:
    src = ex.to_source(node)
    try:
        return int(src)
    except ValueError:
        pass
    try:
        return float(src)
    except ValueError:
        return src


def manifest_from_manifold(
    m: WeakFManifold, soliton: SolitonData | None = None
) -> dict:
    dim = m.dim
    data: dict = {
        "version": SCHEMA_VERSION,
        "n": m.n,
        "s": m.s,
        "beta": (
            None if m.beta is None
            else (m.beta if m.beta_is_constant else ex.to_source(m.beta))
        ),
        "c": m.c,
        "dim": dim,
        "metric": [
            [_entry_source(m.metric.entries[i][j]) for j in range(i + 1)]
            for i in range(dim)
        ],
        "f": [[_entry_source(e) for e in row] for row in m.f.entries],
        "Q": [[_entry_source(e) for e in row] for row in m.Q.entries],
        "xi": [[_entry_source(e) for e in v.components] for v in m.xi],
        "eta": [[_entry_source(e) for e in w.components] for w in m.eta],
    }
    if m.sigma is not None:
        data["sigma"] = ex.to_source(m.sigma)
    if soliton is not None:
        block: dict = {"lambda": soliton.lam, "mu": soliton.mu}
        if soliton.V is not None:
            block["V"] = [_entry_source(e) for e in soliton.V.components]
        else:
            block["v"] = ex.to_source(soliton.v)
        data["soliton"] = block
    return data


# ---------------------------------------------------------------------------
# check command


def sample_points(dim: int, sample: dict) -> list[np.ndarray]:
    try:
        count = int(sample["count"])
        seed = int(sample["seed"])
        lo, hi = (float(x) for x in sample["box"])
    except (KeyError, TypeError, ValueError) as err:
        raise ManifestError(f"sample policy: {err}") from err
    if count < 1 or hi <= lo:
        raise ManifestError("sample policy: need count >= 1 and box LO < HI")
    rng = np.random.default_rng(seed)
    return [rng.uniform(lo, hi, dim) for _ in range(count)]


def _fmt(x: float) -> float:
    return float(f"{x:.15g}")


def run_check(args) -> int:
    data = load_manifest(args.manifest)
    digest = hashlib.sha256(
        json.dumps(data, sort_keys=True).encode("utf-8")
    ).hexdigest()
    m, soliton, manifest_checks, overrides, sample = manifold_from_manifest(data)
    if args.points is not None:
        sample["count"] = args.points
    if args.seed is not None:
        sample["seed"] = args.seed
    if args.box is not None:
        sample["box"] = list(args.box)
    for item in args.tol or []:
        try:
            key, val = item.split("=", 1)
            if key not in CATALOGUE:
                raise ValueError(f"unknown check id {key!r}")
            overrides[key] = float(val)
        except ValueError as err:
            raise ManifestError(f"--tol {item}: {err}") from err

    ctx = CheckContext(m, soliton)
    if args.only:
        ids = [i for part in args.only for i in part.split(",") if i]
        unknown = [i for i in ids if i not in CATALOGUE]
        if unknown:
            raise ManifestError(f"--only: unknown check ids {unknown}")
    elif manifest_checks is not None:
        ids = manifest_checks
    else:
        ids = applicable_ids(ctx)

    points = sample_points(m.dim, sample)
    try:
        reports = run_check_ids(ctx, ids, points, overrides)
    except (ValueError, KeyError) as err:
        raise ManifestError(str(err)) from err

    records = []
    n_pass = n_fail = n_flag = 0
    for r in reports:
        audit = CATALOGUE[r.check_id].audit
        records.append(
            {
                "id": r.check_id,
                "point": [_fmt(x) for x in r.point],
                "residual": _fmt(r.residual),
                "tolerance": _fmt(r.tolerance),
                "pass": bool(r.passed),
                "audit": audit,
            }
        )
        if audit:
            n_flag += 0 if r.passed else 1
        elif r.passed:
            n_pass += 1
        else:
            n_fail += 1
    report = {
        "tool": f"wfk {__version__}",
        "manifest_digest": digest,
        "checks": records,
        "summary": {"pass": n_pass, "fail": n_fail, "flagged": n_flag},
    }
    if not args.reproducible:
        report["generated_at"] = datetime.datetime.now(
            datetime.timezone.utc
        ).isoformat()
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if n_fail == 0 else 1


# ---------------------------------------------------------------------------
# emit commands


def _write_manifest(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_example2(args) -> int:
    try:
        m = build_example2(args.n, args.s, args.beta, args.c)
    except ValueError as err:
        raise ManifestError(str(err)) from err
    xibar = VectorFieldSpec.from_entries(
        [0.0] * (2 * m.n) + [1.0] * m.s, m.dim
    )
    lam = m.s * args.beta - m.s * (1.0 + args.c) * args.beta**2
    soliton = SolitonData(lam=lam, mu=-lam, V=xibar)
    _write_manifest(manifest_from_manifold(m, soliton), args.out)
    return 0


def emit_twisted(args) -> int:
    try:
        scales = [float(x) for x in args.factors.split(",") if x]
    except ValueError as err:
        raise ManifestError(f"--factors: {err}") from err
    if not scales:
        raise ManifestError("--factors: need at least one factor scale")
    dim = 2 * len(scales) + args.s
    try:
        fiber = FiberSpec.flat_factors(scales, dim)
        sigma = ex.parse_expression(args.sigma, dim)
        m = build_twisted_product(fiber, args.s, sigma)
    except (ExprError, ValueError) as err:
        raise ManifestError(str(err)) from err
    _write_manifest(manifest_from_manifold(m), args.out)
    return 0


def list_checks(args) -> int:
    width = max(len(cid) for cid in CATALOGUE)
    for cid, spec in CATALOGUE.items():
        tag = "audit" if spec.audit else "check"
        need = f"  requires: {spec.requires}" if spec.requires else ""
        sys.stdout.write(f"{cid:<{width}}  {tag}  tol={spec.tolerance:g}{need}\n")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfk", description="identity checks for weak metric f-manifolds"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run checks from a manifest")
    p_check.add_argument("manifest")
    p_check.add_argument("--points", type=int)
    p_check.add_argument("--seed", type=int)
    p_check.add_argument("--box", nargs=2, type=float, metavar=("LO", "HI"))
    p_check.add_argument("--only", action="append")
    p_check.add_argument("--tol", action="append", metavar="ID=VALUE")
    p_check.add_argument("--out")
    p_check.add_argument("--reproducible", action="store_true")
    p_check.set_defaults(func=run_check)

    p_e2 = sub.add_parser("example2", help="emit the explicit chart model manifest")
    p_e2.add_argument("n", type=int)
    p_e2.add_argument("s", type=int)
    p_e2.add_argument("beta", type=float)
    p_e2.add_argument("c", type=float)
    p_e2.add_argument("--out")
    p_e2.set_defaults(func=emit_example2)

    p_tw = sub.add_parser("twisted", help="emit a twisted-product manifest")
    p_tw.add_argument("--factors", required=True, metavar="C1,C2,…")
    p_tw.add_argument("--s", type=int, required=True)
    p_tw.add_argument("--sigma", required=True)
    p_tw.add_argument("--out")
    p_tw.set_defaults(func=emit_twisted)

    p_ls = sub.add_parser("list-checks", help="list catalogue check ids")
    p_ls.set_defaults(func=list_checks)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as err:
        sys.stderr.write(f"error: {err}\n")
        return 2
    except (ExprError, MetricError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

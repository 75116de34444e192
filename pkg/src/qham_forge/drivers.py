"""Seeded batch checks that back the command line.

Every driver takes a :class:`~qham_forge.config.RunConfig` and returns a
JSON-ready dictionary with a boolean ``"pass"``.  Sample ``i`` always draws
from ``numpy.random.default_rng([seed, i])``, so results do not depend on
evaluation order.
"""

from __future__ import annotations

import numpy as np

from . import cob, deformation, implosion, quiver
from .lie import (Ad_matrix, ad_matrix, dexp_eta, dexp_left, eta_of_matrix, eta_series, exp_map,
                  jacobi_residual, log_map, make_group_model)
from .multivector import cartan_trivector, fusion_bivector, schouten_field, schouten_lie
from .qp import (P0_matrix, PG_bundle, calibrate_bracket_constant, double_bundle,
                 candidate_bivector, candidate_invariance_residual, moment_axiom_residual,
                 random_chart_points, sample_regular_point, verify_quasi_poisson)


def sample_rng(seed, idx):
    return np.random.default_rng([int(seed), int(idx)])


def _max(values):
    return float(max(values)) if values else 0.0


def _check(value, tol):
    return {"value": float(value), "tolerance": tol, "pass": bool(value < tol)}


def _summarise(checks, **extra):
    out = dict(extra)
    out["checks"] = checks
    out["pass"] = all(c["pass"] for c in checks.values())
    return out


# --------------------------------------------------------------------------
# verify

def verify_lie(cfg):
    model = make_group_model(cfg.group)
    tol = cfg.tolerances
    E = model.basis
    gram = -np.einsum("iab,jba->ij", E, E).real
    ortho = float(np.max(np.abs(gram - np.eye(model.dim))))
    group_res, ad_orth, roundtrip, eta_res, dexp_res = [], [], [], [], []
    for i in range(cfg.n_samples):
        rng = sample_rng(cfg.seed, i)
        g = model.random_element(rng)
        group_res.append(model.group_residual(g))
        A = Ad_matrix(model, g)
        ad_orth.append(float(np.linalg.norm(A.T @ A - np.eye(model.dim))))
        (x,) = random_chart_points(model, rng, 1)
        roundtrip.append(float(np.linalg.norm(log_map(model, exp_map(model, x)) - x)))
        small = 0.3 * x / max(np.linalg.norm(x), 1e-300)
        ads = ad_matrix(model, small)
        eta_res.append(float(np.linalg.norm(eta_series(ads) - eta_of_matrix(ads))))
        dexp_res.append(float(np.linalg.norm(dexp_eta(model, x) @ dexp_left(model, x) - np.eye(model.dim))))
    checks = {
        "orthonormal_basis": _check(ortho, tol.orthonormal),
        "jacobi": _check(jacobi_residual(model.structure_constants), tol.orthonormal),
        "group_membership": _check(_max(group_res), tol.group_residual),
        "ad_invariance": _check(_max(ad_orth), tol.ad_invariance),
        "exp_log_roundtrip": _check(_max(roundtrip), tol.exp_log),
        "eta_series": _check(_max(eta_res), tol.eta_series),
        "eta_inverts_dexp": _check(_max(dexp_res), tol.eta_series),
    }
    return _summarise(checks, check="verify lie", group=model.name, dim=model.dim)


def verify_multivector(cfg):
    model = make_group_model(cfg.group)
    tol = cfg.tolerances
    psi = fusion_bivector(model).identity_residual()
    phi = cartan_trivector(model)
    phi_phi = schouten_lie(phi, phi, model).frobenius_norm()
    jac = []
    for i in range(cfg.n_samples):
        rng = sample_rng(cfg.seed, i)
        x = rng.standard_normal(model.dim)
        S = schouten_field(lambda y: P0_matrix(model, y), lambda y: P0_matrix(model, y), x, cfg.fd_step)
        jac.append(float(np.linalg.norm(S)))
    checks = {
        "psi_identity": _check(psi, tol.psi_identity),
        "cartan_trivector_closed": _check(phi_phi, tol.psi_identity),
        "linear_poisson_jacobi_fd": _check(_max(jac), tol.jacobi_fd),
    }
    return _summarise(checks, check="verify multivector", group=model.name)


def verify_qp(cfg):
    model = make_group_model(cfg.group)
    tol = cfg.tolerances
    bundle = PG_bundle(model)
    points = [random_chart_points(model, sample_rng(cfg.seed, i), 1)[0] for i in range(cfg.n_samples)]
    qp_report = verify_quasi_poisson(bundle, points, cfg.fd_step, tolerance=tol.quasi_poisson, seed=cfg.seed)
    estimates = [calibrate_bracket_constant(model, p, cfg.fd_step) for p in points[:3]]
    estimates = [c for c in estimates if c is not None]
    mu_equiv = []
    for i, p in enumerate(points):
        g = model.random_element(sample_rng(cfg.seed, 10_000 + i))
        mu_equiv.append(bundle.equivariance_residual(g, p))
    D = double_bundle(model)
    antisym, invariance, axiom = [], [], []
    for i in range(cfg.n_samples):
        rng = sample_rng(cfg.seed, 20_000 + i)
        p = sample_regular_point(D, rng, tol.omega_condition)
        _, res = candidate_bivector(D, p, tol.omega_condition)
        antisym.append(res)
        gh = (model.random_element(rng), model.random_element(rng))
        invariance.append(candidate_invariance_residual(D, p, gh))
        axiom.append(moment_axiom_residual(D, p, sign=-1.0, factor=0.5))
    checks = {
        "quasi_poisson": _check(qp_report["max_residual"], tol.quasi_poisson),
        "moment_equivariance": _check(_max(mu_equiv), tol.fd_equivariance),
        "double_candidate_antisymmetry": _check(_max(antisym), tol.candidate_antisymmetry),
        "double_candidate_invariance": _check(_max(invariance), tol.candidate_invariance),
        "double_moment_axiom": _check(_max(axiom), tol.candidate_antisymmetry),
    }
    return _summarise(checks, check="verify qp", group=model.name, c=qp_report["c"],
                      c_estimates=estimates or None)


# --------------------------------------------------------------------------
# deform

def deform(cfg, kind):
    model = make_group_model(cfg.group)
    rows = []
    for i in range(cfg.n_samples):
        rng = sample_rng(cfg.seed, i)
        x = rng.standard_normal(model.dim)
        y = rng.standard_normal(model.dim) if kind == "mult" else None
        rep = deformation.report(model, kind, x, cfg.t_grid, seed=[cfg.seed, i], y=y, tol=cfg.tolerances)
        if kind == "bivector":
            worst = max(float(np.max(np.abs(deformation.family_bivector_fd(model, x, t)
                                            - deformation.family_bivector(model, x, t))))
                        for t in cfg.t_grid if t >= 1e-3)
            rep["fd_oracle_max"] = worst
            rep["fd_oracle_pass"] = bool(worst < cfg.tolerances.family_fd)
        if kind == "mult":
            a, s = deformation.mult_map((x, 0.0), (y, 0.0))
            rep["t0_exact"] = bool(np.array_equal(a, x + y) and s == 0.0)
            rep["pass"] = rep["pass"] and rep["t0_exact"]
        rows.append(rep)
    ok = all(r["pass"] for r in rows) and all(r.get("fd_oracle_pass", True) for r in rows)
    return {"check": f"deform {kind}", "group": model.name, "samples": rows, "pass": ok}


# --------------------------------------------------------------------------
# implode

def implode(cfg, what, genus=1, r=1):
    model = make_group_model(cfg.group)
    if what == "faces":
        rep = implosion.face_bijection_report(model)
        return {"check": "implode faces", "group": model.name,
                "alcove": [f.to_dict() for f in implosion.alcove_faces(model)],
                "chamber": [f.to_dict() for f in implosion.chamber_faces(model)],
                "correspondence": rep,
                "pass": bool(rep["bijective"] and rep["stabilizer_dims_match"])}
    if what == "strata":
        rows, ok = {}, True
        for space in ("double_implosion", "cotangent_implosion"):
            strata = implosion.stratum_inventory(model, space)
            rows[space] = [s.to_dict() for s in strata]
            for s in strata:
                ok &= ((s.face.dim_stabilizer, s.face.dim_commutator)
                       == implosion.stabilizer_oracle(model, s.face))
        return {"check": "implode strata", "group": model.name, "inventories": rows, "pass": bool(ok)}
    if what == "family":
        rows = []
        for k, f in enumerate(f for f in implosion.alcove_faces(model) if f.contains_origin_in_closure):
            rep = implosion.stratum_family_check(model, f, sample_rng(cfg.seed, k), cfg.t_grid)
            rep["diffs"] = [float(d) for d in rep["diffs"]]
            rows.append(rep)
        return {"check": "implode family", "group": model.name, "faces": rows,
                "pass": all(r["pass"] for r in rows)}
    if what == "master":
        rep = implosion.master_moduli_dims(model, genus, r)
        rep.update(check="implode master", **{"pass": True})
        return rep
    raise ValueError(f"unknown implode target {what!r}")


# --------------------------------------------------------------------------
# quiver

def _load_quiver(path):
    import json
    with open(path) as fh:
        return quiver.Quiver.from_json(json.load(fh))


def quiver_info(q, model):
    inv = quiver.validate(q)
    d = inv.to_dict(model.dim)
    d["dim_from_surface"] = inv.dim_from_surface(model.dim)
    return {"check": "quiver info", "group": model.name, "quiver": q.to_json_obj(),
            "invariants": d, "tuple": list(inv.as_tuple()),
            "pass": d["dim_N"] == d["dim_from_surface"]}


def quiver_sample(q, cfg, model):
    rows, ok = [], True
    for i in range(cfg.n_samples):
        p = quiver.sample_level_set(q, model, sample_rng(cfg.seed, i))
        res = quiver.level_set_residual(q, model, p)
        rows.append({"sample": i, "level_set_residual": res})
        ok &= res < cfg.tolerances.level_set
    return {"check": "quiver sample", "group": model.name, "samples": rows, "pass": bool(ok)}


def quiver_freeness(q, cfg, model):
    rows, ok = [], True
    for i in range(cfg.n_samples):
        rng = sample_rng(cfg.seed, i)
        p = quiver.sample_level_set(q, model, rng)
        assignment, res = quiver.stabilizer_propagate(q, model, p)
        ident = quiver.is_identity_assignment(model, assignment)
        rows.append({"sample": i, "identity": ident, "residual": res})
        ok &= ident and res < cfg.tolerances.stabilizer
    return {"check": "quiver freeness", "group": model.name, "samples": rows, "pass": bool(ok)}


def quiver_rank(q, cfg, model):
    _, _, interior = quiver.boundary_split(q)
    expected = model.dim * len(interior)
    rows, ok = [], True
    for i in range(cfg.n_samples):
        p = quiver.sample_level_set(q, model, sample_rng(cfg.seed, i))
        rank = quiver.moment_jacobian_rank(q, model, p, cfg.tolerances.rank_jacobian)
        rows.append({"sample": i, "rank": rank})
        ok &= rank == expected
    return {"check": "quiver rank", "group": model.name, "expected_rank": expected,
            "samples": rows, "pass": bool(ok)}


def random_quiver_batch(cfg, n_quivers, samples_per_quiver, max_vertices=8):
    """Freeness, level-set and rank checks on random connected boundary quivers."""
    model = make_group_model(cfg.group)
    tol = cfg.tolerances
    rows, ok = [], True
    for k in range(n_quivers):
        qrng = sample_rng(cfg.seed, k)
        while True:
            q = quiver.random_quiver(qrng, max_vertices=max_vertices)
            if q.is_connected() and quiver.boundary_split(q)[2]:
                break
        _, _, interior = quiver.boundary_split(q)
        for j in range(samples_per_quiver):
            rng = np.random.default_rng([cfg.seed, k, j])
            p = quiver.sample_level_set(q, model, rng)
            level = quiver.level_set_residual(q, model, p)
            assignment, res = quiver.stabilizer_propagate(q, model, p)
            ident = quiver.is_identity_assignment(model, assignment)
            rank = quiver.moment_jacobian_rank(q, model, p, tol.rank_jacobian)
            good = (ident and res < tol.stabilizer and level < tol.level_set
                    and rank == model.dim * len(interior))
            rows.append({"quiver": k, "sample": j, "n_vertices": len(q.vertices),
                         "level_set_residual": level, "stabilizer_residual": res,
                         "identity": ident, "rank": rank, "expected_rank": model.dim * len(interior),
                         "pass": bool(good)})
            ok &= good
    return {"check": "quiver batch", "group": model.name, "rows": rows, "pass": bool(ok)}


# --------------------------------------------------------------------------
# cob

def cob_parse(text, model):
    M = cob.parse_expression(text)
    rec = cob.n_functor(M, model)
    comps = [{k: c[k] for k in ("genus", "in", "out", "dim", "closed")} for c in rec.components]
    cross = all(c["dim"] == c["quiver_dim_N"] for c in rec.components if "quiver_dim_N" in c)
    rel = cob.verify_relations(model)
    return {"check": "cob parse", "expression": text, "group": model.name,
            "source": M.source, "target": M.target, "components": comps,
            "composition_log": list(rec.composition_log), "realizing_quiver_dims_match": cross,
            "relations_report": rel, "pass": bool(cross and rel["pass"])}


def cob_functoriality(cfg, n_pairs=None):
    model = make_group_model(cfg.group)
    n_pairs = cfg.n_samples if n_pairs is None else n_pairs
    rows, ok = [], True
    for i in range(n_pairs):
        rng = sample_rng(cfg.seed, i)
        M1 = cob.random_morphism(rng)
        M2 = cob.random_morphism(rng, source=M1.target)
        rep = cob.functoriality_check(M1, M2, model)
        ident = cob.compose(cob.identity(M1.target), M1).same_as(M1)
        rows.append({"pair": i, "M1": M1.to_dict(), "M2": M2.to_dict(), "identity_law": ident, **rep})
        ok &= rep["pass"] and ident
    special = cob.functoriality_check(cob.generator("copants"), cob.generator("pants"), model)
    ok &= special["pass"]
    return {"check": "cob functoriality", "group": model.name, "pairs": rows,
            "pants_after_copants": special, "pass": bool(ok)}


# --------------------------------------------------------------------------
# suite

def suite_all(cfg):
    """Every module-level check at the configured group, with compact sample counts."""
    from dataclasses import replace

    small = replace(cfg, n_samples=min(cfg.n_samples, 5))
    model = make_group_model(cfg.group)
    parts = {
        "verify_lie": verify_lie(small),
        "verify_multivector": verify_multivector(small),
        "verify_qp": verify_qp(small),
        "deform_bivector": deform(small, "bivector"),
        "deform_trivector": deform(small, "trivector"),
        "deform_mult": deform(small, "mult"),
        "quiver_batch": random_quiver_batch(small, 5, 2),
        "cob_relations": cob.verify_relations(model),
        "cob_functoriality": cob_functoriality(small, 20),
    }
    if model.kind in ("su2", "su3"):
        for what in ("faces", "strata", "family"):
            parts[f"implode_{what}"] = implode(small, what)
    return {"check": "suite all", "group": model.name, "parts": parts,
            "failed": sorted(k for k, v in parts.items() if not v["pass"]),
            "pass": all(v["pass"] for v in parts.values())}

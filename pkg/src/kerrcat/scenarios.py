"""Scenario registry: reproducible, config-hashed runs of every analysis.

Each scenario owns schema-validated parameters, writes machine-readable
artifacts (CSV/JSON) into the output directory, and returns a RunRecord.
Scenario ids map one-to-one onto the acceptance checks in
tests/test_acceptance.py via the ``criteria`` tuples.
"""

from __future__ import annotations

import dataclasses
import datetime
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .catbasis import build_cat_basis
from .channels import (
    analytic_idle_channel,
    bias,
    chi_to_csv,
    dephasing_indices,
    embedded_pauli_strings,
    extract_ptm_from_outputs,
    pauli_labels,
    ptm_to_chi,
    ptm_to_csv,
)
from .errors import SchemaViolation, UnknownScenario
from .evolve import CollapseChannel, IntegratorConfig, propagate_operators
from .fock import TruncatedFockSpace, destroy_sparse, suggest_cutoff
from .ftcalc import (
    AP_THRESHOLD,
    GadgetParams,
    best_gadget_error,
    cx_gadget_error,
    competitor_volume,
    gadget_overhead,
    gadget_threshold,
    gadget_volume,
    magic_error_rates,
    MagicPrepParams,
    magic_success_enumeration,
    magic_success_probability,
)
from .gates import (
    CleanupSpec,
    ThermalNoise,
    gate_ccd,
    gate_ccx_composite,
    gate_cx,
    gate_z_theta,
    gate_zz_theta,
    prepare_cat_adiabatic,
)
from .hamiltonians import constant_schedule, kerr_cat_sparse, stabilization_params
from .meascode import (
    HZ_1455,
    HZ_633,
    DecoderNoise,
    MeascodeGadgetNoise,
    build_measurement_code,
    failure_probability,
    gadget_error_with_meascode,
    meascode_threshold,
    naive_code,
    repeat_code,
)
from .phasespace import (
    berry_curl_check,
    berry_line_integral,
    geometric_phase,
    geometric_phase_difference,
    geometric_phase_from_connection,
    metapotential,
    rotation_threshold,
    stokes_check,
    z_recovery_sweep,
    PHASE_FROM_CONNECTION,
)
from .serialize import grid_to_csv


@dataclass(frozen=True)
class Scenario:
    id: str
    module: str
    description: str
    defaults: dict
    runner: Callable
    criteria: tuple = ()


@dataclass
class RunRecord:
    scenario_id: str
    timestamp: str
    config_hash: str
    version: str
    tolerances: dict
    results: dict
    artifacts: list

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if obj is math.inf:
        return "inf"
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def config_hash(params: dict) -> str:
    return hashlib.sha256(
        json.dumps(_sanitize(params), sort_keys=True).encode()
    ).hexdigest()[:16]


_REGISTRY: dict = {}


def register(id: str, module: str, description: str, defaults: dict, criteria=()):
    def deco(fn):
        _REGISTRY[id] = Scenario(
            id=id,
            module=module,
            description=description,
            defaults=defaults,
            runner=fn,
            criteria=tuple(criteria),
        )
        return fn

    return deco


def list_scenarios() -> list:
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def get_scenario(scenario_id: str) -> Scenario:
    try:
        return _REGISTRY[scenario_id]
    except KeyError:
        raise UnknownScenario(
            f"unknown scenario {scenario_id!r}; known: {', '.join(sorted(_REGISTRY))}"
        ) from None


def validate_overrides(scenario: Scenario, overrides: dict) -> list:
    """Schema check: every key must exist in the defaults with a compatible type."""
    diagnostics = []
    for key, value in overrides.items():
        if key not in scenario.defaults:
            diagnostics.append(f"unknown key {key!r} for scenario {scenario.id!r}")
            continue
        ref = scenario.defaults[key]
        if ref is not None and value is not None:
            ok = isinstance(value, type(ref)) or (
                isinstance(ref, float) and isinstance(value, int)
            )
            if isinstance(ref, list) and isinstance(value, list):
                ok = True
            if not ok:
                diagnostics.append(
                    f"key {key!r}: expected {type(ref).__name__}, got {type(value).__name__}"
                )
    return diagnostics


def run_scenario(
    scenario_id: str,
    overrides: Optional[dict] = None,
    out_dir: Optional[str] = None,
    tol_scale: float = 1.0,
    threads: Optional[int] = None,
) -> RunRecord:
    scenario = get_scenario(scenario_id)
    overrides = overrides or {}
    diags = validate_overrides(scenario, overrides)
    if diags:
        raise SchemaViolation("; ".join(diags))
    params = dict(scenario.defaults)
    params.update(overrides)
    if out_dir is None:
        out_dir = os.environ.get("KERRCAT_OUT_DIR", "kerrcat-out")
    os.makedirs(out_dir, exist_ok=True)
    if threads is not None:
        _cap_threads(threads)

    ctx = _RunContext(out_dir=out_dir, scenario_id=scenario_id, tol_scale=tol_scale)
    results = scenario.runner(params, ctx)
    record = RunRecord(
        scenario_id=scenario_id,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        config_hash=config_hash(params),
        version=__version__,
        tolerances=ctx.tolerances,
        results=_sanitize(results),
        artifacts=ctx.artifacts,
    )
    record_path = os.path.join(out_dir, f"{scenario_id}.record.json")
    with open(record_path, "w") as fh:
        fh.write(record.to_json())
    return record


def _cap_threads(threads: int):
    try:
        import numba

        numba.set_num_threads(max(1, threads))
    except Exception:
        pass


@dataclass
class _RunContext:
    out_dir: str
    scenario_id: str
    tol_scale: float = 1.0
    artifacts: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, f"{self.scenario_id}.{name}")
        self.artifacts.append(p)
        return p

    def config(self, rel_tol: float, abs_tol: float, method: str = "adams") -> IntegratorConfig:
        cfg = IntegratorConfig(
            rel_tol=rel_tol * self.tol_scale, abs_tol=abs_tol * self.tol_scale, method=method
        )
        self.tolerances = {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "method": method}
        return cfg


# ---------------------------------------------------------------------------
# gate scenarios


@register(
    "cx-lossless",
    module="gates",
    description="Noiseless conditional-rotation CX; process infidelity vs ideal CX",
    defaults=dict(alpha=2.0, beta=2.0, T=10.0, n_max=25, rel_tol=1e-9, abs_tol=1e-11,
                  phase_profile="cosine"),
    criteria=(1,),
)
def _run_cx_lossless(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    res = gate_cx(
        p["alpha"], p["beta"], p["T"], config=cfg, phase_profile=p["phase_profile"],
        n_max=p["n_max"],
    )
    ptm_to_csv(res.ptm_noisy, ctx.path("ptm.csv"))
    infid = 1.0 - res.extras["process_fidelity"]
    basis_infid = [1.0 - f for f in res.extras["basis_fidelities"]]
    return {
        "process_infidelity": infid,
        "basis_infidelities": basis_infid,
        "max_basis_infidelity": max(basis_infid),
    }


@register(
    "cx-lossy",
    module="gates",
    description="CX with single-photon loss kappa=K/4000 (zero temperature)",
    defaults=dict(alpha=2.0, beta=2.0, T=10.0, kappa_inv=4000.0, n_max=22,
                  rel_tol=1e-7, abs_tol=1e-9, phase_profile="cosine"),
    criteria=(2,),
)
def _run_cx_lossy(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    noise = ThermalNoise(kappa=1.0 / p["kappa_inv"], n_th=0.0)
    res = gate_cx(
        p["alpha"], p["beta"], p["T"], noise=noise, config=cfg,
        phase_profile=p["phase_profile"], n_max=p["n_max"],
    )
    chi = res.error_chi
    chi_to_csv(chi, ctx.path("error-chi.csv"))
    with open(ctx.path("report.json"), "w") as fh:
        fh.write(res.report.to_json())
    labels = pauli_labels(2)
    diag = dict(zip(labels, chi.diagonal().tolist()))
    return {
        "fidelity": res.report.fidelity,
        "chi_II": diag["II"],
        "chi_ZI": diag["ZI"],
        "chi_IZ": diag["IZ"],
        "chi_ZZ": diag["ZZ"],
        "bias_eta": res.report.bias_eta,
        "leakage": res.extras["leakage_subspace"],
        "dephasing": res.report.dephasing_prob,
        "nondephasing": res.report.nondephasing_prob,
    }


@register(
    "cx-thermal",
    module="gates",
    description="CX with thermal noise (n_th=1%) and two-photon cleanup, alpha sweep",
    defaults=dict(alphas=[2.0, 2.2, 2.5], T=10.0, kappa_inv=4000.0, n_th=0.01,
                  kappa2_inv=5.0, rel_tol=1e-6, abs_tol=1e-8, tail_tol=1e-9,
                  phase_profile="cosine"),
    criteria=(3,),
)
def _run_cx_thermal(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    noise = ThermalNoise(kappa=1.0 / p["kappa_inv"], n_th=p["n_th"])
    cleanup = CleanupSpec(kappa2=1.0 / p["kappa2_inv"])
    rows = []
    per_alpha = {}
    for alpha in p["alphas"]:
        res = gate_cx(
            alpha, alpha, p["T"], noise=noise, cleanup=cleanup, config=cfg,
            phase_profile=p["phase_profile"], tail_tol=p["tail_tol"],
        )
        rep = res.report
        per_alpha[str(alpha)] = {
            "fidelity": rep.fidelity,
            "bias_eta": rep.bias_eta,
            "leakage": res.extras["leakage_subspace"],
            "dephasing": rep.dephasing_prob,
            "nondephasing": rep.nondephasing_prob,
        }
        rows.append([alpha, rep.fidelity, rep.bias_eta, res.extras["leakage_subspace"]])
    grid_to_csv(ctx.path("sweep.csv"), ["alpha", "fidelity", "bias_eta", "leakage"], rows)
    etas = [per_alpha[str(a)]["bias_eta"] for a in p["alphas"]]
    return {
        "per_alpha": per_alpha,
        "etas": etas,
        "bias_strictly_increasing": bool(all(b > a for a, b in zip(etas, etas[1:]))),
    }


@register(
    "cx-overrot",
    module="gates",
    description="CX with over-rotation Delta=0.01 plus loss and cleanup",
    defaults=dict(alpha=2.0, beta=2.0, T=10.0, delta_angle=0.01, kappa_inv=4000.0,
                  kappa2_inv=5.0, rel_tol=1e-6, abs_tol=1e-8, tail_tol=1e-9),
)
def _run_cx_overrot(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    noise = ThermalNoise(kappa=1.0 / p["kappa_inv"], n_th=0.0)
    cleanup = CleanupSpec(kappa2=1.0 / p["kappa2_inv"])
    over_time = p["delta_angle"] * p["T"] / math.pi
    res = gate_cx(
        p["alpha"], p["beta"], p["T"], noise=noise, cleanup=cleanup, config=cfg,
        phase_profile="linear", tail_tol=p["tail_tol"], over_rotation_time=over_time,
    )
    with open(ctx.path("report.json"), "w") as fh:
        fh.write(res.report.to_json())
    return {
        "fidelity": res.report.fidelity,
        "bias_eta": res.report.bias_eta,
        "leakage": res.extras["leakage_subspace"],
    }


@register(
    "ccd-lossless",
    module="gates",
    description="Noiseless three-oscillator conditional displacement",
    defaults=dict(alpha=2.0, T=10.0, delta=0.5, n_max=25, rel_tol=1e-8, abs_tol=1e-10),
)
def _run_ccd_lossless(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    res = gate_ccd(p["alpha"], p["T"], delta=p["delta"], n_max=p["n_max"], config=cfg)
    return {
        "avg_gate_infidelity": 1.0 - res["avg_gate_fidelity"],
        "process_fidelity": res["process_fidelity"],
    }


@register(
    "ccd-thermal",
    module="gates",
    description="Conditional displacement: noiseless reference, thermal master "
    "equation with qubit-approximated controls, and cleanup comparison",
    defaults=dict(alpha=2.0, T=10.0, delta=0.5, kappa_inv=4000.0, n_th=0.01,
                  kappa2_inv=5.0, n_max_lossless=25, n_max=25,
                  rel_tol=1e-7, abs_tol=1e-9),
    criteria=(11,),
)
def _run_ccd_thermal(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    lossless = gate_ccd(
        p["alpha"], p["T"], delta=p["delta"], n_max=p["n_max_lossless"], config=cfg
    )
    noise = ThermalNoise(kappa=1.0 / p["kappa_inv"], n_th=p["n_th"])
    noisy = gate_ccd(
        p["alpha"], p["T"], delta=p["delta"], noise=noise, qubit_controls=True,
        n_max=p["n_max"], config=cfg,
    )
    cleaned = gate_ccd(
        p["alpha"], p["T"], delta=p["delta"], noise=noise, qubit_controls=True,
        cleanup=CleanupSpec(kappa2=1.0 / p["kappa2_inv"], duration=p["T"]),
        n_max=p["n_max"], config=cfg,
    )
    rep, rep_cl = noisy["report"], cleaned["report"]
    return {
        "lossless_infidelity": 1.0 - lossless["avg_gate_fidelity"],
        "fidelity": rep.fidelity,
        "bias_eta": rep.bias_eta,
        "leakage": rep.leakage,
        "leakage_cleaned": rep_cl.leakage,
        "fidelity_cleaned": rep_cl.fidelity,
        "bias_eta_cleaned": rep_cl.bias_eta,
        "leakage_reduction": rep.leakage / rep_cl.leakage if rep_cl.leakage > 0 else math.inf,
    }


@register(
    "cat-prep",
    module="gates",
    description="Adiabatic cat preparation by two-photon drive ramp",
    defaults=dict(alpha=2.0, ramp_duration=40.0, parity=1, rel_tol=1e-9, abs_tol=1e-11),
)
def _run_cat_prep(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    full = prepare_cat_adiabatic(p["alpha"], p["ramp_duration"], p["parity"], config=cfg)
    halved = prepare_cat_adiabatic(p["alpha"], p["ramp_duration"] / 2, p["parity"], config=cfg)
    return {"fidelity": full.fidelity, "fidelity_half_ramp": halved.fidelity}


@register(
    "z-gate",
    module="gates",
    description="Z rotation by a resonant single-photon drive",
    defaults=dict(alpha=2.0, theta=math.pi / 2, duration=2.0, rel_tol=1e-9, abs_tol=1e-11),
)
def _run_z_gate(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    J = p["theta"] / (4 * p["alpha"] * p["duration"])
    res = gate_z_theta(J, p["duration"], p["alpha"], config=cfg)
    return {
        "theta_nominal": res.extras["theta_nominal"],
        "theta_measured": res.extras["theta_measured"],
        "calibration": res.extras["calibration"],
        "nondephasing": res.report.nondephasing_prob,
    }


@register(
    "zz-gate",
    module="gates",
    description="ZZ rotation by a beam-splitter coupling",
    defaults=dict(alpha=2.0, theta=math.pi / 2, duration=2.0, n_max=25,
                  rel_tol=1e-9, abs_tol=1e-11),
)
def _run_zz_gate(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    J12 = p["theta"] / (4 * p["alpha"] ** 2 * p["duration"])
    res = gate_zz_theta(J12, p["duration"], p["alpha"],
                        space=TruncatedFockSpace(p["n_max"]), config=cfg)
    chi = res.error_chi
    return {
        "theta_nominal": res.extras["theta_nominal"],
        "theta_measured": res.extras["theta_measured"],
        "calibration": res.extras["calibration"],
        "process_fidelity": float(chi.diagonal()[0]),
    }


# ---------------------------------------------------------------------------
# idle-channel scenarios


@register(
    "idle-table1",
    module="tomography",
    description="Idle cat with pure loss: extracted lambda_Z vs the closed form",
    defaults=dict(alpha=2.0, t=25.0, p_values=[0.005, 0.01, 0.05], n_max=25,
                  rel_tol=1e-7, abs_tol=1e-9),
    criteria=(4,),
)
def _run_idle_table1(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    alpha, t = p["alpha"], p["t"]
    space = TruncatedFockSpace(p["n_max"])
    basis = build_cat_basis(alpha, space)
    sched = constant_schedule(kerr_cat_sparse(1.0, alpha**2, 0.0, space), t)
    rows = []
    out = {}
    for p_target in p["p_values"]:
        kappa = p_target / (t * alpha**2)
        chans = [CollapseChannel(destroy_sparse(space.dim), kappa)]
        batch = np.stack(embedded_pauli_strings([basis]))
        evolved = propagate_operators(sched, chans, batch, (0.0, t), cfg)
        chi = ptm_to_chi(extract_ptm_from_outputs(list(evolved), [basis]))
        lam_z = math.sqrt(max(chi.diagonal()[3], 0.0))
        chi_ref = analytic_idle_channel(
            "single-photon-loss", dict(alpha=alpha, kappa=kappa, t=t)
        )
        lam_z_ref = math.sqrt(chi_ref.diagonal()[3])
        rows.append([p_target, lam_z, lam_z_ref, abs(lam_z / lam_z_ref - 1)])
        out[str(p_target)] = {
            "lambda_z": lam_z,
            "lambda_z_analytic": lam_z_ref,
            "rel_error": abs(lam_z / lam_z_ref - 1),
        }
    grid_to_csv(ctx.path("lambda-z.csv"), ["p", "lambda_z", "analytic", "rel_error"], rows)
    return out


@register(
    "idle-thermal-leakage",
    module="tomography",
    description="Idle cat with white thermal noise and two-photon dissipation: "
    "leakage against the rate-balance estimate; non-dephasing suppression slope",
    defaults=dict(alphas=[1.6, 1.8, 2.0, 2.2, 2.4], t=50.0, kappa_inv=400.0,
                  n_th=0.01, kappa2_inv=10.0, rel_tol=1e-7, abs_tol=1e-9),
    criteria=(5,),
)
def _run_idle_thermal(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    kappa = 1.0 / p["kappa_inv"]
    kappa2 = 1.0 / p["kappa2_inv"]
    t = p["t"]
    rows = []
    per_alpha = {}
    for alpha in p["alphas"]:
        space = TruncatedFockSpace(suggest_cutoff(alpha))
        basis = build_cat_basis(alpha, space)
        sp = stabilization_params(1.0, kappa2, alpha)
        sched = constant_schedule(kerr_cat_sparse(1.0, sp.P, sp.phi0, space), t)
        a = destroy_sparse(space.dim)
        chans = [
            CollapseChannel(a, kappa * (1 + p["n_th"])),
            CollapseChannel(a.conj().T, kappa * p["n_th"]),
            CollapseChannel(a @ a, kappa2),
        ]
        batch = np.stack(embedded_pauli_strings([basis]))
        evolved = propagate_operators(sched, chans, batch, (0.0, t), cfg)
        ptm = extract_ptm_from_outputs(list(evolved), [basis])
        chi = ptm_to_chi(ptm)
        rep = bias(chi)
        leak = 1.0 - float(np.vdot(embedded_pauli_strings([basis])[0], evolved[0]).real) / 2.0
        estimate = kappa * p["n_th"] / (4 * kappa2 * alpha**2)
        per_alpha[str(alpha)] = {
            "leakage": leak,
            "rate_balance": estimate,
            "ratio": leak / estimate,
            "nondephasing": rep.nondephasing_prob,
        }
        rows.append([alpha, leak, estimate, rep.nondephasing_prob])
    grid_to_csv(
        ctx.path("leakage.csv"),
        ["alpha", "leakage", "rate_balance", "nondephasing"],
        rows,
    )
    alphas = np.array(p["alphas"])
    nondeph = np.array([per_alpha[str(a)]["nondephasing"] for a in p["alphas"]])
    slope = float(np.polyfit(alphas**2, np.log(np.maximum(nondeph, 1e-300)), 1)[0])
    return {"per_alpha": per_alpha, "nondephasing_log_slope": slope}


# ---------------------------------------------------------------------------
# fault-tolerance analytics


@register(
    "gadget-threshold-scan",
    module="ftcalc",
    description="Repetition-code CX-gadget threshold vs bias",
    defaults=dict(etas=[1e3, 1e4], n_max=61, r_max=15, scan_points=25),
    criteria=(6,),
)
def _run_threshold_scan(p, ctx):
    rows = []
    thresholds = {}
    for eta in p["etas"]:
        eps_star = gadget_threshold(eta, p["n_max"], p["r_max"])
        thresholds[f"{eta:g}"] = eps_star
        for eps in np.geomspace(eps_star / 30, min(3 * eps_star, 0.3), p["scan_points"]):
            e_best, n, r = best_gadget_error(float(eps), eta, p["n_max"], p["r_max"])
            b = cx_gadget_error(GadgetParams(n, r, float(eps), eta))
            rows.append(
                [eta, float(eps), n, r, b.eps_target, b.eps_control, b.eps_ec,
                 b.eps_nondephasing, b.eps_cat]
            )
    grid_to_csv(
        ctx.path("scan.csv"),
        ["eta", "epsilon", "n", "r", "eps_target", "eps_control", "eps_ec",
         "eps_nondeph", "eps_cat"],
        rows,
    )
    return {"thresholds": thresholds, "ap_reference": AP_THRESHOLD}


@register(
    "gadget-overhead",
    module="ftcalc",
    description="Minimal gadget volume for the target logical error",
    defaults=dict(eta=1e4, epsilons=[1e-4, 5e-4, 1e-3, 2.5e-3], target=0.67e-3),
)
def _run_overhead(p, ctx):
    rows = []
    out = {}
    for eps in p["epsilons"]:
        r = gadget_overhead(eps, p["eta"], p["target"])
        rows.append([p["eta"], eps, r.n, r.r_rounds, r.volume, competitor_volume(r.n, r.r_rounds)])
        out[f"{eps:g}"] = {"n": r.n, "r": r.r_rounds, "volume": r.volume}
    grid_to_csv(
        ctx.path("overhead.csv"),
        ["eta", "epsilon", "n", "r", "volume", "volume_7nr_same_nr"],
        rows,
    )
    return out


@register(
    "magic-states",
    module="ftcalc",
    description="Magic-state preparation success probability and error bounds",
    defaults=dict(ns=[3, 9, 15, 21], error_point=dict(n=3, r=3, r_zl=3, epsilon=1e-3, eta=1e3)),
    criteria=(7,),
)
def _run_magic(p, ctx):
    success = {}
    for n in p["ns"]:
        closed = magic_success_probability(n)
        success[str(n)] = {"closed_form": closed}
        if n <= 15:
            success[str(n)]["enumeration"] = magic_success_enumeration(n)
    ep = p["error_point"]
    rates = magic_error_rates(
        MagicPrepParams(n=ep["n"], r_rounds=ep["r"], r_zl=ep["r_zl"],
                        epsilon=ep["epsilon"], eta=ep["eta"])
    )
    return {
        "success": success,
        "eps_xl": rates.eps_xl,
        "eps_zl": rates.eps_zl,
    }


# ---------------------------------------------------------------------------
# measurement codes


@register(
    "meascode-codes",
    module="meascode",
    description="Code parameters, distances, and exhaustive failure scaling",
    defaults=dict(eps_grid=[0.002, 0.004, 0.008], naive_n=5),
    criteria=(8,),
)
def _run_meascode(p, ctx):
    c633 = build_measurement_code(HZ_633)
    c1455 = build_measurement_code(HZ_1455)
    naive33 = naive_code(3, 3)
    distances = {
        "code_633": list(c633.parameters),
        "code_1455": list(c1455.parameters),
        "repeated_cyclic_3_3": list(repeat_code(HZ_633, 3).parameters),
        "naive_adjacent_3_3": list(naive33.parameters),
        "naive_5_2": list(naive_code(p["naive_n"], 2).parameters),
        "naive_5_4": list(naive_code(p["naive_n"], 4).parameters),
    }
    rows = []
    exponents = {}
    for label, code in (("633", c633), ("1455", c1455)):
        probs = []
        for eps in p["eps_grid"]:
            pf = failure_probability(code, DecoderNoise(eps, eps))
            probs.append(pf)
            rows.append([label, code.n, code.s, code.d, eps, pf])
        fit = np.polyfit(np.log(p["eps_grid"]), np.log(probs), 1)
        exponents[label] = {"fitted": float(fit[0]), "expected": (code.d + 1) // 2}
    grid_to_csv(
        ctx.path("failure.csv"), ["code", "n", "s", "d", "eps", "p_fail"], rows
    )
    return {"parameters": distances, "exponents": exponents}


@register(
    "meascode-gadget",
    module="meascode",
    description="CX-gadget threshold with measurement-code decoding vs naive",
    defaults=dict(eta=1e4, sensitivity=[0.5, 1.0, 1.5], naive_n=11, naive_r=5),
)
def _run_meascode_gadget(p, ctx):
    c1455 = build_measurement_code(HZ_1455)
    thresholds = {}
    for scale in p["sensitivity"]:
        thr = meascode_threshold(c1455, p["eta"], MeascodeGadgetNoise(scale=scale))
        thresholds[f"{scale:g}"] = thr
    # naive comparison point via the closed-form budget
    def naive_fixed_point():
        lo, hi = 1e-6, 0.4
        def wins(eps):
            return cx_gadget_error(
                GadgetParams(p["naive_n"], p["naive_r"], eps, p["eta"])
            ).eps_cat <= eps
        if not wins(lo):
            return 0.0
        while (hi - lo) > 1e-3 * hi:
            mid = math.sqrt(lo * hi)
            lo, hi = (mid, hi) if wins(mid) else (lo, mid)
        return math.sqrt(lo * hi)

    naive_thr = naive_fixed_point()
    return {"code_1455_threshold": thresholds, "naive_11_5_threshold": naive_thr}


# ---------------------------------------------------------------------------
# phase space


@register(
    "rotation-threshold",
    module="phasespace",
    description="Metapotential threshold and <Z> recovery after rotation errors",
    defaults=dict(alphas=[1.2, 1.6, 2.0], deltas=[0.0, 0.2, 0.3, 0.4, 0.52, 0.6, 0.8],
                  kappa2_inv=100.0, rel_tol=1e-7, abs_tol=1e-9),
    criteria=(9,),
)
def _run_rotation_threshold(p, ctx):
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    kappa2 = 1.0 / p["kappa2_inv"]
    thr = {f"{a:g}": rotation_threshold(a) for a in (1.0, 2.0, 4.0)}
    rows = []
    sweep = {}
    for alpha in p["alphas"]:
        vals = z_recovery_sweep(alpha, p["deltas"], kappa2=kappa2, config=cfg)
        sweep[str(alpha)] = dict(zip(map(str, p["deltas"]), vals.tolist()))
        for d, v in zip(p["deltas"], vals):
            rows.append([alpha, d, float(v)])
    grid_to_csv(ctx.path("z-recovery.csv"), ["alpha", "delta", "z_retained"], rows)
    # metapotential heatmap
    grid = np.linspace(-3, 3, 61)
    hm = [

        [x, y, metapotential(1.0, 2.0, x, y)] for x in grid for y in grid
    ]
    grid_to_csv(ctx.path("metapotential.csv"), ["x", "y", "f"], hm)
    return {"thresholds": thr, "sweep": sweep}


@register(
    "berry-phase",
    module="phasespace",
    description="Adiabatic phase closed forms vs connection line integrals",
    defaults=dict(alpha=2.0, phi=math.pi, radii=[0.5, 1.0, 2.0, 3.0]),
    criteria=(10,),
)
def _run_berry(p, ctx):
    alpha, phi = p["alpha"], p["phi"]
    out = {}
    for parity in (+1, -1):
        closed = geometric_phase(alpha, phi, parity)
        numeric = geometric_phase_from_connection(alpha, phi, parity)
        out[f"parity_{'even' if parity > 0 else 'odd'}"] = {
            "closed_form": closed,
            "line_integral": numeric,
            "rel_error": abs(numeric / closed - 1),
        }
    out["phase_difference"] = geometric_phase_difference(alpha, phi)
    stokes = {}
    for radius in p["radii"]:
        surface, loop = stokes_check(+1, radius)
        stokes[f"{radius:g}"] = {"surface": surface, "loop": loop, "dev": abs(surface - loop)}
    curl_dev = 0.0
    for x in (0.4, 1.0, 1.7):
        for y in (0.3, 0.9):
            num, exact = berry_curl_check(+1, x, y)
            curl_dev = max(curl_dev, abs(num - exact))
    out["stokes"] = stokes
    out["max_curl_deviation"] = curl_dev
    return out


# ---------------------------------------------------------------------------
# property audit (paper-number-independent invariants)


@register(
    "property-audit",
    module="all",
    description="CPTP/trace invariants, representation round trips, decoder "
    "optimality, truncation-doubling stability",
    defaults=dict(seed=11, alpha=1.5, rel_tol=1e-8, abs_tol=1e-10),
    criteria=(12,),
)
def _run_property_audit(p, ctx):
    from .channels import ChiMatrix, chi_to_ptm, PauliTransferMatrix
    from .hamiltonians import h_kerr_cat, parity_resolved_spectrum

    rng = np.random.default_rng(p["seed"])
    cfg = ctx.config(p["rel_tol"], p["abs_tol"])
    checks = {}

    # chi <-> ptm round trip on a random physical channel
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    chi_m = m @ m.conj().T
    chi_m /= np.trace(chi_m)
    chi = ChiMatrix(k=2, matrix=chi_m)
    rt = ptm_to_chi(chi_to_ptm(chi))
    checks["chi_ptm_roundtrip"] = float(np.max(np.abs(rt.matrix - chi.matrix)))

    # CPTP invariants on a small driven-dissipative evolution
    alpha = p["alpha"]
    space = TruncatedFockSpace(suggest_cutoff(alpha))
    basis = build_cat_basis(alpha, space)
    sched = constant_schedule(kerr_cat_sparse(1.0, alpha**2, 0.0, space), 3.0)
    chans = [CollapseChannel(destroy_sparse(space.dim), 0.02)]
    rho0 = basis.comp_zero.data
    rho0 = np.outer(rho0, rho0.conj())
    out = propagate_operators(sched, chans, rho0, (0.0, 3.0), cfg)
    evals = np.linalg.eigvalsh(out)
    checks["trace_drift"] = float(abs(np.trace(out).real - 1.0))
    checks["min_eigenvalue"] = float(evals.min())
    checks["hermiticity"] = float(np.max(np.abs(out - out.conj().T)))

    # linearity of the propagation
    a_in = np.stack([np.outer(basis.cat_plus.data, basis.cat_plus.data.conj()),
                     np.outer(basis.cat_minus.data, basis.cat_minus.data.conj())])
    outs = propagate_operators(sched, chans, a_in, (0.0, 3.0), cfg)
    mix_in = 0.3 * a_in[0] + 0.7 * a_in[1]
    mix_out = propagate_operators(sched, chans, mix_in, (0.0, 3.0), cfg)
    checks["linearity"] = float(np.max(np.abs(mix_out - 0.3 * outs[0] - 0.7 * outs[1])))

    # truncation-doubling stability of spectral quantities
    h1 = h_kerr_cat(1.0, alpha**2, 0.0, space)
    s1 = parity_resolved_spectrum(h1, space)
    space2 = TruncatedFockSpace(2 * space.n_max)
    h2 = h_kerr_cat(1.0, alpha**2, 0.0, space2)
    s2 = parity_resolved_spectrum(h2, space2)
    checks["cat_energy_shift"] = float(
        abs(s1.cat_energies[0] - s2.cat_energies[0])
    )
    checks["splitting_shift"] = float(abs(s1.pair_splitting(1) - s2.pair_splitting(1)))

    # decoder optimality on the smallest code: every syndrome's chosen error
    # has posterior >= all alternatives (exhaustive)
    code = build_measurement_code(HZ_633)
    nz = DecoderNoise(0.05, 0.02)
    from .meascode import ml_decode

    worst = 0.0
    for sig_int in range(2**code.s):
        sig = np.array([(sig_int >> i) & 1 for i in range(code.s)], dtype=np.uint8)
        est = ml_decode(code, sig, nz)
        est_logp = _pattern_logp(est, code, nz)
        for x in range(2**code.n):
            data = np.array([(x >> i) & 1 for i in range(code.n)], dtype=np.uint8)
            anc = (code.h_z.bits @ data + sig) & 1
            cand = np.concatenate([data, anc])
            worst = max(worst, _pattern_logp(cand, code, nz) - est_logp)
    checks["decoder_optimality_gap"] = worst

    passed = (
        checks["chi_ptm_roundtrip"] < 1e-10
        and checks["trace_drift"] < 1e-8
        and checks["min_eigenvalue"] > -1e-8
        and checks["hermiticity"] < 1e-9
        and checks["linearity"] < 1e-8
        and checks["cat_energy_shift"] < 1e-8
        and checks["splitting_shift"] < 1e-8
        and checks["decoder_optimality_gap"] <= 1e-12
    )
    checks["all_passed"] = bool(passed)
    return checks


def _pattern_logp(bits, code, noise):
    data, anc = bits[: code.n], bits[code.n :]
    wd, wa = int(data.sum()), int(anc.sum())
    lp = wd * math.log(noise.eps_data) + (code.n - wd) * math.log1p(-noise.eps_data)
    lp += wa * math.log(noise.eps_meas) + (code.s - wa) * math.log1p(-noise.eps_meas)
    return lp


def criteria_coverage() -> dict:
    """Map acceptance criterion number -> list of scenario ids declaring it."""
    cover: dict = {}
    for sc in list_scenarios():
        for c in sc.criteria:
            cover.setdefault(c, []).append(sc.id)
    return cover

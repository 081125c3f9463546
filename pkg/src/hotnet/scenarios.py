"""Scenario runners: one per scenario kind, each returning tables and checks.

Frequencies are in units of omega1 (hot gate, modes) or |Delta| (QAOA),
lengths in units of L and times in units of tau = 2 pi / omega1, unless a
field name carries an explicit unit suffix (``_hz``, ``_s``, ``_K``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import budget as bd
from . import compiler as cp
from . import dispersion as ds
from . import dynamics as dy
from . import qaoa as qa
from .core import NetworkSpec, bose_occupation, build_mode_set, default_n_modes
from .lindblad import NoiseModel
from .measures import equatorial_state, trace_distance


@dataclass
class Table:
    name: str
    header: list
    rows: list


@dataclass
class Check:
    name: str
    value: float
    threshold: str
    passed: bool


@dataclass
class Outcome:
    tables: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    extra_files: dict = field(default_factory=dict)

    def check(self, name, value, passed, threshold):
        self.checks.append(Check(name, float(value), threshold, bool(passed)))


@dataclass
class Context:
    seed: int = 0
    executor: object = None
    base_dir: str = "."


# ---------------------------------------------------------------- hot gate

def _gate_setup(cutoff, temperature, coupling, n_modes, calibrate):
    spec = NetworkSpec.two_qubit_gate(cutoff=cutoff, temperature=temperature, g=coupling)
    modes = build_mode_set(spec, n_modes)
    if calibrate:
        modes = dy.calibrate_pair(modes, spec.omega1 / 8)
    return spec, modes


def run_hotgate(sec, ctx: Context) -> Outcome:
    out = Outcome()
    cutoff = sec.get("cutoff", 0.03)
    coupling = sec.get("coupling")
    n_modes = sec.get("n_modes", 30)
    calibrate = sec.get("calibrate", True)
    t_max = sec.get("t_max", 1.0)
    n_times = sec.get("n_times", 201)
    obs = set(sec.get("observables", ["fidelity", "entropy", "concurrence", "photons"]))
    psi0 = equatorial_state(2)
    times_tau = np.linspace(0.0, t_max, n_times)
    if "fidelity" in obs or "entropy" in obs or "concurrence" in obs or "photons" in obs:
        rows = {k: [] for k in ("fidelity", "entropy", "concurrence", "photons")}
        for T in sec["temperatures"]:
            spec, modes = _gate_setup(cutoff, T, coupling, n_modes, calibrate)
            J = dy.coupling_matrix_modesum(modes)
            rep = dy.gate_report(spec, modes, psi0, lambda t: dy.zz_gate(J * t, 2), times_tau * spec.tau)
            for k, tt in enumerate(times_tau):
                rows["fidelity"].append([T, tt, rep.fidelity[k]])
                rows["entropy"].append([T, tt, rep.entropy[k]])
                rows["concurrence"].append([T, tt, rep.concurrence[k]])
                rows["photons"].append([T, tt, rep.total_photons[k], rep.net_photons[k]])
            at = dy.gate_report(spec, modes, psi0, dy.zz_gate(J * spec.tau, 2), [spec.tau])
            out.derived[f"T={T}"] = {
                "fidelity_at_tau": at.fidelity[0], "concurrence_at_tau": at.concurrence[0],
                "net_photons_at_tau": at.net_photons[0], "max_net_photons": float(rep.net_photons.max()),
                "J12_over_omega1": J[0, 1] / spec.omega1,
            }
            out.check(f"fidelity(tau) >= 1-1e-10 at kBT={T}", at.fidelity[0], at.fidelity[0] >= 1 - 1e-10, ">= 1-1e-10")
            out.check(f"concurrence(tau) >= 1-1e-10 at kBT={T}", at.concurrence[0], at.concurrence[0] >= 1 - 1e-10, ">= 1-1e-10")
            out.check(f"net photons at tau at kBT={T}", abs(at.net_photons[0]), abs(at.net_photons[0]) <= 1e-10, "<= 1e-10")
            if coupling is None and abs(cutoff - 0.03) < 1e-12 and t_max >= 0.5:
                mx = float(rep.net_photons.max())
                out.check(f"mid-gate excess photons in [1, 3] at kBT={T}", mx, 1 <= mx <= 3, "in [1, 3]")
        names = {"fidelity": ["kBT (omega1)", "t (tau)", "fidelity (1)"],
                 "entropy": ["kBT (omega1)", "t (tau)", "entropy (nats)"],
                 "concurrence": ["kBT (omega1)", "t (tau)", "concurrence (1)"],
                 "photons": ["kBT (omega1)", "t (tau)", "total photons (1)", "net photons (1)"]}
        for k in ("fidelity", "entropy", "concurrence", "photons"):
            if k in obs:
                out.tables.append(Table(k, names[k], rows[k]))
    if "mode_occupation" in obs or "realspace_occupation" in obs:
        occ_T = sec.get("occupation_temperatures", [1.0])
        occ_t = np.asarray(sec.get("occupation_times", list(np.linspace(0, 1, 11))), dtype=float)
        n_x = sec.get("x_points", 101)
        mrows, xrows = [], []
        for T in occ_T:
            spec, modes = _gate_setup(cutoff, T, coupling, n_modes, calibrate)
            xs = np.linspace(0, spec.length, n_x)
            mo, xs, ro = dy.photon_observables(modes, np.abs(psi0) ** 2, occ_t * spec.tau, xs, spec.length)
            for k, tt in enumerate(occ_t):
                mrows += [[T, tt, n + 1, mo[k, n]] for n in range(modes.n_modes)]
                xrows += [[T, tt, xs[j] / spec.length, ro[k, j] * spec.length] for j in range(xs.size)]
        if "mode_occupation" in obs:
            out.tables.append(Table("mode_occupation", ["kBT (omega1)", "t (tau)", "mode n", "occupation (1)"], mrows))
        if "realspace_occupation" in obs:
            out.tables.append(Table("realspace_occupation",
                                    ["kBT (omega1)", "t (tau)", "x (L)", "occupation density (1/L)"], xrows))
    if "photon_cutoffs" in sec:
        rows = []
        for a in sec["photon_cutoffs"]:
            spec, modes = _gate_setup(a, 0.0, coupling, n_modes, calibrate)
            mo, _, _ = dy.photon_observables(modes, np.abs(psi0) ** 2, times_tau * spec.tau, None, spec.length)
            rows += [[a, tt, mo[k].sum()] for k, tt in enumerate(times_tau)]
        out.tables.append(Table("photons_vs_cutoff", ["a (L)", "t (tau)", "total photons (1)"], rows))
    if "oracle" in sec:
        _hotgate_oracle(sec["oracle"], sec, out)
    if "timing" in sec:
        _hotgate_timing(sec["timing"], sec, out)
    if "nonlinear" in sec:
        _hotgate_nonlinear(sec["nonlinear"], sec, out)
    return out


def _hotgate_oracle(o, sec, out):
    from .oracle import evolve_oracle

    psi0 = equatorial_state(2)
    rows = []
    for T in o.get("temperatures", sec["temperatures"]):
        spec = NetworkSpec.two_qubit_gate(cutoff=sec.get("cutoff", 0.03), temperature=T, g=sec.get("coupling"))
        modes = build_mode_set(spec, o.get("n_modes", 2))
        ts = np.linspace(0, 1, o.get("n_times", 9)) * spec.tau
        exact = dy.evolve_exact(spec, modes, psi0, ts)
        res = evolve_oracle(spec, modes, psi0, ts, o.get("fock_cutoff", 12))
        dist = np.array([trace_distance(e, r) for e, r in zip(exact, res.rhos)])
        rows += [[T, t / spec.tau, d, res.truncation_bound] for t, d in zip(ts, dist)]
        out.check(f"oracle agreement at kBT={T}", dist.max(), bool(np.all(dist <= 1e-4 + res.truncation_bound)),
                  f"<= 1e-4 + bound ({res.truncation_bound:.2g})")
    out.tables.append(Table("oracle", ["kBT (omega1)", "t (tau)", "trace distance (1)", "truncation bound (1)"], rows))


def _hotgate_timing(tm, sec, out):
    psi0 = equatorial_state(2)
    p_list = tm.get("p_list", [1, 4, 8, 16])
    rows, fits = [], []
    for a in tm.get("cutoffs", [sec.get("cutoff", 0.03)]):
        spec, modes = _gate_setup(a, 0.0, sec.get("coupling"), tm.get("n_modes"), sec.get("calibrate", True))
        dt = np.linspace(-tm.get("dt_max", 0.01), tm.get("dt_max", 0.01), tm.get("n_dt", 41)) * spec.tau
        scan = dy.timing_error_scan(spec, modes, psi0, p_list, dt)
        for i, p in enumerate(scan.p_list):
            rows += [[a, p, dt[j] / spec.tau, scan.error[i, j]] for j in range(dt.size)]
        lo, hi = tm.get("fit_window", [1e-4, 5e-4])
        fdt = np.linspace(lo, hi, tm.get("n_fit", 5)) / spec.omega1
        fit = dy.timing_error_scan(spec, modes, psi0, p_list, fdt)
        for i, p in enumerate(fit.p_list):
            ratio = fit.fit_coefficient[i] / fit.multimode_reference
            fits.append([a, p, fit.fit_coefficient[i], fit.multimode_reference, ratio])
        worst = max(abs(r[4] - 1) for r in fits if r[0] == a)
        out.check(f"timing coefficient vs 4(c/a)^2 J/omega1 at a={a}", worst, worst <= 0.25, "|ratio - 1| <= 0.25")
    out.tables.append(Table("timing_error", ["a (L)", "p", "dt (tau)", "infidelity (1)"], rows))
    out.tables.append(Table("timing_fit", ["a (L)", "p", "coefficient (1/time^2)", "reference (1/time^2)", "ratio (1)"], fits))
    if "single_mode_temperatures" in tm:
        srows = []
        worst = 0.0
        for T in tm["single_mode_temperatures"]:
            spec, modes = _gate_setup(sec.get("cutoff", 0.03), T, sec.get("coupling"), sec.get("n_modes", 30),
                                      sec.get("calibrate", True))
            m1 = modes.subset([0])
            dts = np.asarray(tm.get("single_mode_dt", [1e-3, 3e-3, 1e-2]), dtype=float) * spec.tau
            sc = dy.timing_error_scan(spec, m1, psi0, p_list, dts)
            for i, p in enumerate(sc.p_list):
                for j, d in enumerate(dts):
                    valid = bd.timing_formula_valid(spec.omega1, d, float(m1.thermal_occ[0]))
                    rel = sc.error[i, j] / sc.single_mode_formula[i, j] - 1
                    if valid:
                        worst = max(worst, abs(rel))
                    srows.append([T, p, d / spec.tau, sc.error[i, j], sc.single_mode_formula[i, j], valid])
        out.tables.append(Table("timing_single_mode", ["kBT (omega1)", "p", "dt (tau)", "infidelity (1)",
                                                       "formula (1)", "formula valid"], srows))
        out.check("single-mode timing formula", worst, worst <= 0.10, "relative deviation <= 0.10")


def _hotgate_nonlinear(nl, sec, out):
    a = nl.get("cutoff", 0.3)
    spec = NetworkSpec.two_qubit_gate(cutoff=a, temperature=0.0)
    n_modes = nl.get("n_modes", default_n_modes(spec))
    kw = dict(n_modes=n_modes, half_window=nl.get("half_window", 0.5), n_grid=nl.get("n_grid", 401))
    if "epsilons" in nl:
        scan = dy.nonlinear_dispersion_scan(spec, nl["epsilons"], nl.get("p_stars", [1]), **kw)
        rows = []
        for i, e in enumerate(scan.epsilon):
            for j, p in enumerate(scan.p_star):
                rows.append([e, p, scan.min_error[i, j], scan.t_opt[i, j] / spec.tau, scan.asynchronicity[i, j],
                             scan.regime[i * scan.p_star.size + j]])
        out.tables.append(Table("nonlinear_min_error", ["epsilon (1)", "p*", "min infidelity (1)", "t_opt (tau)",
                                                        "asynchronicity (rad)", "regime"], rows))
        for j, p in enumerate(scan.p_star):
            mask = np.array([scan.regime[i * scan.p_star.size + j] == "perturbative" for i in range(scan.epsilon.size)])
            mask &= scan.epsilon > 0
            if mask.sum() >= 2:
                slope = np.polyfit(np.log(scan.epsilon[mask]), np.log(scan.min_error[mask, j]), 1)[0]
                out.derived[f"perturbative_slope_p{p}"] = slope
                out.check(f"perturbative log-log slope at p*={p}", slope, abs(slope - 2) <= 0.2, "2 +- 0.2")
    if "saturated_epsilons" in nl:
        eps = nl["saturated_epsilons"]
        ps = nl.get("saturated_p_stars", [100, 200, 400])
        sat = dy.nonlinear_dispersion_scan(spec, eps, ps, n_average=nl.get("n_average", 24), **kw)
        rows = [[e, p, sat.min_error[i, j], sat.averaged_error[i, j], sat.saturated_estimate[i, j], sat.regime[i * len(ps) + j]]
                for i, e in enumerate(eps) for j, p in enumerate(ps)]
        out.tables.append(Table("nonlinear_saturated", ["epsilon (1)", "p*", "min infidelity (1)",
                                                        "phase-averaged min infidelity (1)", "estimate (1)", "regime"], rows))
        avg = sat.averaged_error
        spread = float(np.max(np.abs(avg / avg.mean(axis=0, keepdims=True) - 1)))
        out.check("saturated error independent of epsilon", spread, spread <= 0.10, "max deviation <= 0.10")
        m = avg.mean(axis=0)
        dev = max(abs(m[j] * ps[j] / (m[0] * ps[0]) - 1) for j in range(len(ps)))
        out.check("saturated error scales as 1/p*", dev, dev <= 0.20, "max deviation <= 0.20")
    if "trace_epsilons" in nl:
        g_spec = spec
        ts = np.linspace(0, nl.get("trace_t_max", 1.5), nl.get("trace_points", 301)) * spec.tau
        rows = []
        for e in nl["trace_epsilons"]:
            modes = dy.nonlinear_modes(g_spec, e, n_modes)
            err = dy.gate_infidelity(g_spec, modes, equatorial_state(2), ts)
            rows += [[e, t / spec.tau, v] for t, v in zip(ts, err)]
        out.tables.append(Table("nonlinear_trace", ["epsilon (1)", "t (tau)", "infidelity (1)"], rows))


# ---------------------------------------------------------------- engineer

def _make_target(t, ctx):
    kind = t["kind"]
    if kind == "powerlaw1d":
        return cp.powerlaw1d(t["n"], t.get("alpha", 1.0), t.get("periodic", False))
    if kind == "nn2d":
        return cp.nn2d(t["rows"], t.get("cols"))
    if kind == "spinglass":
        return cp.spinglass(t["n"], t.get("seed", ctx.seed), t.get("low", -0.5), t.get("high", 0.5))
    if kind == "dregular":
        return cp.dregular(t["n"], t["d"], t.get("seed", ctx.seed))
    from . import io as hio
    from pathlib import Path

    path = Path(ctx.base_dir) / t["path"]
    if kind == "csv":
        return hio.read_target_csv(path)
    return hio.read_edge_list(path, t.get("n"), t.get("d"))


def run_engineer(sec, ctx: Context) -> Outcome:
    from . import io as hio

    out = Outcome()
    w1 = sec.get("omega1", 1.0)
    J_max = sec.get("J_max", 1.0)
    g_max = sec.get("g_max", math.inf)
    strategy = sec.get("strategy", "signed")
    rows = []
    for t in sec["targets"]:
        tgt = _make_target(t, ctx)
        label = t["label"]
        sched = cp.compile_schedule(tgt, w1, J_max, g_max, strategy)
        curve = cp.convergence_curve(tgt, w1, J_max, g_max, strategy)
        normw2 = float(np.linalg.norm(tgt.w, 2))
        normwf = float(np.linalg.norm(tgt.w, "fro"))
        for eta in range(1, tgt.n + 1):
            rec = cp.reconstruct(sched.truncated(min(eta, sched.eta))).w
            rows.append([label, tgt.n, eta, curve[eta - 1], curve[eta - 1] / normw2 if normw2 else 0.0,
                         np.linalg.norm(rec - tgt.w, "fro") / normwf if normwf else 0.0])
        full = float(np.linalg.norm(cp.reconstruct(sched).w - tgt.w, "fro"))
        out.check(f"{label}: exact reconstruction at eta=N", full / max(normwf, 1e-300), full <= 1e-10 * max(normwf, 1e-300),
                  "<= 1e-10 ||w||_F")
        mono = bool(np.all(np.diff(curve) <= 1e-12 * max(normw2, 1.0)))
        out.check(f"{label}: eps(eta) nonincreasing", float(np.max(np.diff(curve), initial=0.0)), mono, "diff <= 0")
        half = math.ceil(tgt.n / 2)
        out.derived[label] = {"N": tgt.n, "eta": sched.eta, "total_duration": sched.total_duration,
                              "shift": sched.shift, "eps_1": curve[0], "eps_half": curve[half - 1],
                              "plateau_ratio": curve[half - 1] / curve[0] if curve[0] else 0.0}
        if tgt.provenance == "spinglass":
            r = curve[half - 1] / curve[0]
            out.check(f"{label}: no early plateau eps(ceil(N/2)) > 0.5 eps(1)", r, r > 0.5, "> 0.5")
        if label in sec.get("regression", {}):
            thr = sec["regression"][label]
            rel = float(np.linalg.norm(cp.reconstruct(sched.truncated(half)).w - tgt.w, "fro") / normwf)
            out.check(f"{label}: relative Frobenius error at eta=ceil(N/2)", rel, rel <= thr, f"<= {thr}")
        out.extra_files[f"target_{label}.csv"] = hio.csv_text(["N", tgt.n], [list(r) for r in tgt.w])
        out.extra_files[f"schedule_{label}.json"] = hio.schedule_to_dict(sched)
        snaps = []
        for eta in sec.get("snapshots", []):
            rec = cp.reconstruct(sched.truncated(min(eta, sched.eta))).w
            snaps += [[eta, i, j, rec[i, j], tgt.w[i, j]] for i in range(tgt.n) for j in range(tgt.n)]
        if snaps:
            out.tables.append(Table(f"reconstruction_{label}", ["eta", "i", "j", "w_eta (1)", "w (1)"], snaps))
    out.tables.insert(0, Table("convergence", ["target", "N", "eta", "spectral error (1)",
                                               "relative spectral error (1)", "relative Frobenius error (1)"], rows))
    return out


# ---------------------------------------------------------------- QAOA

def _graph_from(sec, ctx):
    g = sec.get("graph", {"n": 6, "d": 4})
    if "edges_file" in g:
        from pathlib import Path
        from . import io as hio

        return hio.read_edge_list(Path(ctx.base_dir) / g["edges_file"], g.get("n"), g.get("d"))
    return cp.dregular(g["n"], g["d"], g.get("seed", ctx.seed))


def _noise_from(n, J_max, Delta, omega0=1.0):
    T = n.get("kBT_over_omega0", 0.0)
    nbar = float(bose_occupation(omega0, T * omega0))
    return NoiseModel(n.get("gamma_phi_over_J_max", 0.0) * J_max, n.get("kappa_over_Delta", 0.0) * abs(Delta),
                      nbar, n.get("fock_cutoff"))


def run_qaoa(sec, ctx: Context) -> Outcome:
    if sec["mode"] == "scaling":
        return _run_scaling(sec, ctx)
    out = Outcome()
    graph = _graph_from(sec, ctx)
    Delta = float(sec.get("Delta_sign", -1))
    J_max = sec.get("J_max_over_Delta", 0.08) * abs(Delta)
    base = qa.QaoaConfig(graph, J_max=J_max, detuning_Delta=Delta)
    e_min, optimal = qa.exact_minimum(graph)
    opt_strings = {qa.bitstring(z, graph.n) for z in optimal}
    results = qa.optimize_nested(base, sec.get("M_max", 5), restarts=sec.get("restarts", 6), seed=ctx.seed,
                                 maxfev=sec.get("maxfev", 4000), shots=sec.get("shots", 4096))
    noises = sec.get("noise", [])
    energy_rows, angle_rows, trace_rows, sample_rows = [], [], [], []
    cost = qa.cost_hamiltonian(graph)
    mean_cost = float(cost.mean())
    energy_rows.append([0, mean_cost] + [mean_cost] * len(noises))
    for r in results:
        M = len(r.gammas)
        cfg = base.with_angles(r.gammas, r.betas)
        row = [M, r.energy]
        for n in noises:
            noisy = qa.prepare_state_noisy(cfg, _noise_from(n, J_max, Delta), n.get("steps_per_period", 2))
            row.append(qa.energy_of(noisy.rho, cost))
        energy_rows.append(row)
        angle_rows += [[M, m + 1, r.gammas[m], r.betas[m]] for m in range(M)]
        stride = max(1, len(r.angle_trace) // 500)
        trace_rows += [[M, k + 1, v] for k, v in enumerate(r.angle_trace) if k % stride == 0 or k == len(r.angle_trace) - 1]
        sample_rows += [[M, s, c] for s, c in sorted(r.samples.items())]
    best = results[-1]
    out.tables += [
        Table("energies", ["M", "ideal <H_C> (1)"] + [f"{n['label']} <H_C> (1)" for n in noises], energy_rows),
        Table("angles", ["M", "layer m", "gamma (rad)", "beta (rad)"], angle_rows),
        Table("optimizer_trace", ["M", "evaluation", "best <H_C> (1)"], trace_rows),
        Table("samples", ["M", "bitstring", "count"], sample_rows),
    ]
    gap = (best.energy - e_min) / abs(e_min) if e_min else best.energy - e_min
    out.derived.update({"exact_minimum": e_min, "optimal_strings": sorted(opt_strings), "best_energy": best.energy,
                        "relative_gap": gap, "modal_string": best.best_string, "modal_cut": best.cut_value,
                        "gamma_bar": float(np.mean(best.gammas)), "run_time_over_inverse_J": qa.run_time(
                            base.with_angles(best.gammas, best.betas)) * J_max})
    tol = sec.get("relative_gap", 0.01)
    out.check(f"<H_C> within {tol:.0%} of enumerated minimum at M={len(best.gammas)}", gap, gap <= tol, f"<= {tol}")
    out.check("modal sampled string is an optimal cut", best.cut_value, best.best_string in opt_strings, "in optimal set")
    energies = [r.energy for r in results]
    out.check("optimized energy nonincreasing in M", float(np.max(np.diff(energies), initial=0.0)),
              bool(np.all(np.diff(energies) <= 1e-9)), "diff <= 0")
    return out


def _run_scaling(sec, ctx):
    out = Outcome()
    sc = sec.get("scaling", {})
    gseed = sc.get("graph_seed", ctx.seed)
    graphs = [(f"({n},{d})", cp.dregular(n, d, gseed), d) for n, d in sc.get("graphs", [[3, 2], [4, 3], [5, 4]])]
    M_list = sc.get("M_list", [1, 3, 5])
    ratios = sc.get("ratios", [0.02, 0.08])
    x_targets = sc.get("x_targets", [0.05, 0.15])
    x_limit = sc.get("x_limit", 0.2)
    band = sc.get("band_factor", 2.0)
    nbars = [float(bose_occupation(1.0, T)) for T in sc.get("kBT_over_omega0", [0.0, 1.0])]
    angles = {}
    for label, g, d in graphs:
        for r in qa.optimize_nested(qa.QaoaConfig(g), max(M_list), restarts=sec.get("restarts", 6), seed=ctx.seed,
                                    maxfev=sec.get("maxfev", 4000)):
            angles[(label, len(r.gammas))] = (r.gammas, r.betas)
    for kind in sc.get("noise_kinds", ["dephasing", "rethermalization"]):
        pts = qa.error_scaling_experiment(graphs, M_list, ratios, kind, x_targets, nbars, angles=angles,
                                          steps_per_period=sc.get("steps_per_period", 2), executor=ctx.executor)
        rows = [[p.graph, p.N, p.d, p.M, p.ratio, p.nbar, p.rate, p.x, p.error, p.error / (p.x / 2)] for p in pts]
        out.tables.append(Table(f"scaling_{kind}", ["graph (N,d)", "N", "d", "M", "J_max/|Delta|", "nbar", "rate (|Delta|)",
                                                    "x (1)", "infidelity (1)", "infidelity/(x/2) (1)"], rows))
        inside = [p for p in pts if p.x <= x_limit]
        ratio = np.array([p.error / (p.x / 2) for p in inside])
        ok = bool(np.all((ratio >= 1 / band) & (ratio <= band)))
        out.derived[f"{kind}_ratio_min"] = float(ratio.min())
        out.derived[f"{kind}_ratio_max"] = float(ratio.max())
        out.derived[f"{kind}_fraction_in_band"] = float(np.mean((ratio >= 1 / band) & (ratio <= band)))
        out.derived[f"{kind}_slope"] = qa.fit_slope(inside)
        worst = float(np.max(np.abs(np.log(ratio))) / math.log(band))
        out.check(f"{kind}: collapse within factor {band:g} of y = x/2", worst, ok, "log-ratio / log(band) <= 1")
    return out


# ---------------------------------------------------------------- budget

def _gamma_phi(f):
    if "gamma_phi_over_2pi_hz" in f:
        return 2 * math.pi * f["gamma_phi_over_2pi_hz"]
    if "T2_s" in f:
        return 1.0 / f["T2_s"]
    raise ValueError("fixture needs gamma_phi_over_2pi_hz or T2_s")


def quoted_match(value, quoted, digits=None) -> bool:
    """``value`` rounded to the precision of ``quoted`` lies within one unit of its last digit."""
    if quoted == 0:
        return value == 0
    exp = math.floor(math.log10(abs(quoted)))
    mant = quoted / 10**exp
    if digits is None:
        s = f"{mant:.10g}".rstrip("0").rstrip(".")
        digits = len(s.replace(".", "").lstrip("-")) - 1
    unit = 10 ** (exp - digits)
    return abs(round(value / unit) - round(quoted / unit)) <= 1


def run_budget(sec, ctx: Context) -> Outcome:
    out = Outcome()
    if "cooperativity" in sec:
        c = sec["cooperativity"]
        g = 2 * math.pi * c["g_over_2pi_hz"]
        kT = bd.thermal_energy(c["temperature_K"])
        rows = []
        for gp in c["gamma_phi_over_2pi_hz"]:
            r = bd.cooperativity_optimum(g, 2 * math.pi * gp, kT, c["Q"], c.get("n_qubits", 2),
                                         c.get("alpha_kappa", bd.ALPHA_KAPPA))
            rows.append([gp, r.C, r.omega1_star / (2 * math.pi), r.xi_opt])
        out.tables.append(Table("cooperativity", ["gamma_phi/2pi (Hz)", "C (1)", "omega1*/2pi (Hz)", "xi_opt (1)"], rows))
        Cs = sorted(r[1] for r in rows)
        xis = sorted(r[3] for r in rows)
        out.derived["C_range"] = [Cs[0], Cs[-1]]
        out.derived["xi_range"] = [xis[0], xis[-1]]
        if "expected_C" in c:
            lo, hi = c["expected_C"]
            ok = quoted_match(Cs[0], lo) and quoted_match(Cs[-1], hi)
            out.check("cooperativity range", Cs[-1], ok, f"[{lo:g}, {hi:g}] +-1 in last digit")
        if "expected_xi" in c:
            lo, hi = c["expected_xi"]
            ok = quoted_match(xis[0], lo) and quoted_match(xis[-1], hi)
            out.check("two-qubit error range", xis[-1], ok, f"[{lo:g}, {hi:g}] +-1 in last digit")
    frows = []
    for f in sec.get("fixtures", []):
        g = 2 * math.pi * f["g_over_2pi_hz"]
        gphi = _gamma_phi(f)
        keff = 2 * math.pi * f["kappa_over_2pi_hz"] * (2 * f["nbar"] + 1)
        C = bd.cooperativity(g, gphi, keff)
        xi = bd.qaoa_error(f["gammabar"], f["d"], f["M"], f["N"], C)
        D = bd.optimal_detuning(g, gphi, keff, f["N"])
        direct = bd.qaoa_total_error(D, g, gphi, keff, f["gammabar"], f["M"], f["N"], f["d"])
        frows.append([f["label"], g / (2 * math.pi), gphi, keff, C, xi, D / (2 * math.pi), direct])
        out.derived[f"fixture_{f['label']}"] = {"C": C, "xi": xi, "xi_direct_minimum": direct}
        if "expected_C" in f:
            ok = quoted_match(C, f["expected_C"])
            out.check(f"{f['label']}: cooperativity", C, ok, f"{f['expected_C']:g} +-1 in last digit")
        if "expected_xi" in f:
            tol = f.get("xi_tolerance", 0.01)
            out.check(f"{f['label']}: QAOA error", xi, abs(xi - f["expected_xi"]) <= tol, f"{f['expected_xi']:g} +- {tol:g}")
        out.check(f"{f['label']}: compact formula equals optimum over Delta", abs(direct / xi - 1),
                  abs(direct / xi - 1) <= 0.05, "relative <= 0.05")
    if frows:
        out.tables.append(Table("fixtures", ["label", "g/2pi (Hz)", "gamma_phi (1/s)", "kappa_eff (1/s)", "C (1)",
                                             "xi (1)", "optimal |Delta|/2pi (Hz)", "xi at optimal Delta (1)"], frows))
    if "feasibility" in sec:
        fz = sec["feasibility"]
        rows_N, rows_M = bd.feasibility_table(fz["gammabar"], fz["d"], fz["C"], fz["xi_budget"],
                                              fz.get("M_values", [1, 5, 10]), fz.get("N_values", [10, 50, 100]))
        out.tables.append(Table("feasibility_max_N", ["M", "max N (1)"], rows_N))
        out.tables.append(Table("feasibility_max_M", ["N", "max M (1)"], rows_M))
    return out


# ---------------------------------------------------------------- modes

def run_modes(sec, ctx: Context) -> Outcome:
    out = Outcome()
    L = sec.get("L", 1.0)
    spec = ds.BoundarySpec(sec["a1"] * L, sec.get("a2", 0.0) * L, L)
    tab = ds.solve_modes(spec, sec["n_modes"])
    low = ds.low_frequency_asymptote(tab.n, spec)
    high = ds.high_frequency_asymptote(tab.n, spec)
    rows = [[int(n), k * L, th, lo * L, hi * L, rt, rk] for n, k, th, lo, hi, rt, rk in
            zip(tab.n, tab.k, tab.theta, low, high, tab.residual_tan, tab.residual_k)]
    out.tables.append(Table("dispersion", ["n", "k_n (1/L)", "theta_n (rad)", "low-frequency asymptote (1/L)",
                                           "high-frequency asymptote (1/L)", "residual tan (1)", "residual k (1/L)"], rows))
    res = float(np.max(np.maximum(np.abs(tab.residual_tan), np.abs(tab.residual_k)) / tab.k))
    out.check("dispersion residuals", res, res < 1e-12, "< 1e-12 k_n")
    out.check("k_n strictly increasing", float(np.min(np.diff(tab.k), initial=1.0)), bool(np.all(np.diff(tab.k) > 0)), "> 0")
    nlo = sec.get("low_n_max", 3)
    nhi = sec.get("high_n_min", 30)
    lo_err = float(np.max(np.abs(low[: nlo] / tab.k[: nlo] - 1)))
    out.check(f"low-frequency asymptote for n <= {nlo}", lo_err, lo_err <= 0.01, "<= 1%")
    if sec["n_modes"] >= nhi:
        hi_err = float(np.max(np.abs(high[nhi - 1:] / tab.k[nhi - 1:] - 1)))
        out.check(f"high-frequency asymptote for n >= {nhi}", hi_err, hi_err <= 0.01, "<= 1%")
    if "nonlinear_epsilons" in sec:
        w1 = sec.get("omega1", 1.0)
        nrows = []
        for e in sec["nonlinear_epsilons"]:
            w = ds.nonlinear_spectrum(w1, e, sec["n_modes"])
            nrows += [[e, n + 1, w[n] / w1] for n in range(w.size)]
        out.tables.append(Table("nonlinear_spectrum", ["epsilon (1)", "n", "omega_n (omega1)"], nrows))
    if "a1_scan" in sec:
        srows = []
        for a1 in sec["a1_scan"]:
            t = ds.solve_modes(ds.BoundarySpec(a1 * L, sec.get("a2", 0.0) * L, L), sec["n_modes"])
            srows += [[a1, int(n), k * L] for n, k in zip(t.n, t.k)]
        out.tables.append(Table("dispersion_scan", ["a1 (L)", "n", "k_n (1/L)"], srows))
    return out


RUNNERS = {"hotgate": run_hotgate, "engineer": run_engineer, "qaoa": run_qaoa, "budget": run_budget, "modes": run_modes}

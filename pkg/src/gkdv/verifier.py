"""Numerical experiments for the decay, boundedness and contraction estimates.

Every check produces an EstimateReport with the fitted exponent, the
theoretical exponent, the fit window, the empirical constant and a verdict at
a stated tolerance.  Upper-bound estimates are verified one-sided: a fitted
decay faster than allowed fails, a slower one passes (flagged "pass-weak"
when the probe is clearly not extremal).  All randomness is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .norms import (
    WeightedNormConfig,
    gamma_k,
    lebesgue_norm,
    omega_k,
    sobolev_norm,
    spectral_lq_norm,
    x_norm,
)
from .probes import rough_field
from .semigroup import (
    Propagator,
    apply_semigroup,
    duhamel_integral,
    free_trajectory,
    smoothing_norm_profile,
)
from .solver import (
    IvpProblem,
    calibrate_c,
    nonlinearity_eval,
    picard_iterate,
    select_radius_and_time,
)
from .spectral import GridSpec, linear_combination, spatial_derivative
from .symbols import DissipativeSymbol, evaluate_phi, threshold_M

DEFAULT_LENGTH = 200.0 * np.pi
DEFAULT_N_POINTS = 2 ** 13

# Fitted exponents this far above the theoretical bound indicate the probe
# never saturates the estimate; the verdict is then "pass-weak".
_WEAK_MARGIN = 0.3


@dataclass
class EstimateReport:
    """Outcome of one estimate check."""

    estimate_id: str
    theoretical_exponent: float | None
    fitted_exponent: float | None
    fit_window: tuple
    residual: float
    empirical_constant: float
    tolerance: float
    verdict: str  # "pass" | "pass-weak" | "fail" | "skipped"
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "pass-weak", "skipped")

    def to_json_dict(self) -> dict:
        return {
            "estimate_id": self.estimate_id,
            "theoretical_exponent": self.theoretical_exponent,
            "fitted_exponent": self.fitted_exponent,
            "fit_window": list(self.fit_window),
            "residual": self.residual,
            "empirical_constant": self.empirical_constant,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "notes": self.notes,
        }


def render_report_table(reports) -> str:
    """Aligned text table of reports for human consumption."""
    headers = ("estimate", "theoretical", "fitted", "constant", "verdict")
    rows = [headers]
    for r in reports:
        rows.append(
            (
                r.estimate_id,
                "-" if r.theoretical_exponent is None else f"{r.theoretical_exponent:+.4f}",
                "-" if r.fitted_exponent is None else f"{r.fitted_exponent:+.4f}",
                f"{r.empirical_constant:.4g}",
                r.verdict,
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def fit_power_law(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through (log x, log y).

    Returns (exponent, constant, residual) with residual the max absolute
    deviation of log y from the fit line.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3 or xs.shape != ys.shape:
        raise ValueError("need at least 3 matching samples")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return float(slope), float(np.exp(intercept)), residual


def _lattice_for_profile(sym: DissipativeSymbol, theta: float, tau_min: float) -> GridSpec:
    """Frequency lattice wide enough to keep the profile maximizer interior."""
    if theta == 0:
        need = 8.0
    else:
        need = 3.0 * (theta / (sym.p * sym.eta * tau_min)) ** (1.0 / sym.p) + 8.0
    n = DEFAULT_N_POINTS
    while np.pi * n / DEFAULT_LENGTH < need and n < 2 ** 23:
        n *= 2
    return GridSpec(DEFAULT_LENGTH, n)


def _auto_tau_window(sym: DissipativeSymbol, theta: float) -> tuple:
    """Window deep enough that the profile maximizer sits above xi ~ 40.

    The bracket weight follows its -theta/p law only once the maximizer
    frequency (theta/(p*eta*tau))^(1/p) dwarfs the +1 in the bracket; the
    returned window places it in [40, 40*100^(1/p)].
    """
    if theta == 0:
        return (1e-4, 1e-2)
    tau_hi = min(1e-2, theta / (sym.p * sym.eta * 40.0 ** sym.p))
    return (tau_hi / 100.0, tau_hi)


def verify_multiplier_decay(
    sym: DissipativeSymbol,
    theta: float,
    tau_window: tuple | None = None,
    n_tau: int = 24,
    grid: GridSpec | None = None,
    rel_tol: float = 0.05,
    weight: str = "bracket",
) -> EstimateReport:
    """Fit the decay of sup_xi (1+|xi|)^theta exp(eta*tau*Phi) against tau.

    The theoretical exponent is -theta/p.  The bracket weight approaches that
    law only as tau -> 0 (the maximizer must sit far above xi = 1), which is
    why the default window adapts to (p, theta); weight="homogeneous"
    replaces the bracket by |xi|^theta, for which the law is exact at every
    tau, as a supplementary diagnostic.
    """
    if weight not in ("bracket", "homogeneous"):
        raise ValueError("weight must be 'bracket' or 'homogeneous'")
    if tau_window is None:
        tau_window = _auto_tau_window(sym, theta)
    taus = np.geomspace(tau_window[0], tau_window[1], n_tau)
    if grid is None:
        grid = _lattice_for_profile(sym, theta, taus[0])
    if weight == "bracket":
        profile = smoothing_norm_profile(sym, theta, taus, grid)
    else:
        xs = np.abs(grid.xi)
        phi = np.asarray(evaluate_phi(sym, grid.xi), dtype=float)
        profile = [float(np.max(xs ** theta * np.exp(sym.eta * tau * phi))) for tau in taus]
    theo = -theta / sym.p
    fitted, constant, residual = fit_power_law(taus, profile)
    if theta == 0:
        ok = abs(fitted) <= 1e-3
        tol = 1e-3
    else:
        tol = rel_tol * abs(theo)
        ok = abs(fitted - theo) <= tol
    return EstimateReport(
        estimate_id=f"multiplier-decay-{weight}-{sym.name}-theta{theta:g}",
        theoretical_exponent=theo,
        fitted_exponent=fitted,
        fit_window=(float(taus[0]), float(taus[-1])),
        residual=residual,
        empirical_constant=constant,
        tolerance=tol,
        verdict="pass" if ok else "fail",
        notes={"n_points": grid.n_points, "weight": weight},
    )


def verify_weighted_linear(
    sym: DissipativeSymbol,
    k: float,
    s: float = 0.0,
    grid: GridSpec | None = None,
    n_seeds: int = 10,
    base_seed: int = 0,
    t_window: tuple = (1e-4, 1.0),
    n_t: int = 20,
    fit_window: tuple = (1e-4, 1e-1),
    margin: float = 0.05,
    spread_tol: float = 0.2,
) -> EstimateReport:
    """Check the weighted decay of the free evolution of barely-L^2 data.

    (a) the decay exponent of ||d_x V(t) w0||_{L^{2(k+1)}} must not fall below
    -gamma_k/p - margin; (b) the sup and across-decades ratio of the weighted
    quantity are reported; (c) the ratio x_norm(V(.)w0)/||w0||_{H^s} over
    seeded draws gives the empirical constant, required stable within
    spread_tol of the mean.
    """
    if grid is None:
        grid = GridSpec(DEFAULT_LENGTH, DEFAULT_N_POINTS)
    prop = Propagator(sym, grid)
    q = 2.0 * (k + 1.0)
    wexp = gamma_k(k) / sym.p
    theo = -wexp

    ts = np.geomspace(t_window[0], t_window[1], n_t)
    w0 = rough_field(grid, sobolev_index=0.0, seed=base_seed)
    ys = np.array(
        [lebesgue_norm(spatial_derivative(apply_semigroup(prop, w0, t)), q) for t in ts]
    )
    mask = (ts >= fit_window[0]) & (ts <= fit_window[1])
    fitted, _, residual = fit_power_law(ts[mask], ys[mask])

    weighted = ts ** wexp * ys
    sup_weighted = float(np.max(weighted))
    ratio_decades = float(np.max(weighted) / np.min(weighted))

    cfg = WeightedNormConfig.default(s, k, sym.p, 1.0, n_times=n_t)
    constants = []
    for i in range(n_seeds):
        wi = rough_field(grid, sobolev_index=0.0, seed=base_seed + i)
        constants.append(x_norm(free_trajectory(prop, wi), cfg).total / sobolev_norm(wi, s))
    constants = np.array(constants)
    mean_c = float(np.mean(constants))
    spread = float(np.max(np.abs(constants - mean_c)) / mean_c)

    decay_ok = fitted >= theo - margin
    spread_ok = spread <= spread_tol
    verdict = "fail"
    if decay_ok and spread_ok:
        verdict = "pass-weak" if fitted > theo + _WEAK_MARGIN else "pass"
    return EstimateReport(
        estimate_id=f"weighted-linear-{sym.name}-k{k:g}",
        theoretical_exponent=theo,
        fitted_exponent=fitted,
        fit_window=(float(ts[mask][0]), float(ts[mask][-1])),
        residual=residual,
        empirical_constant=float(np.max(constants)),
        tolerance=margin,
        verdict=verdict,
        notes={
            "sup_weighted": sup_weighted,
            "weighted_ratio_across_decades": ratio_decades,
            "per_seed_constants": [float(c) for c in constants],
            "constant_spread": spread,
            "spread_tolerance": spread_tol,
        },
    )


def verify_nonlinear_estimate(
    prob: IvpProblem,
    t_values,
    seed: int = 0,
    panels: int = 16,
    grading: float = 2.0,
    n_times: int = 12,
    margin: float = 0.1,
    probe=None,
) -> EstimateReport:
    """Growth in T of the Duhamel nonlinear term of a free rough probe.

    The space norm of int_0^t V(t-tau) N(V(.)g)(tau) dtau over (0, T] must
    grow no slower than T^omega_k allows: fitted exponent >= omega_k - margin.
    An explicit probe field overrides the seeded rough data.
    """
    w = omega_k(prob.k, prob.symbol.p)
    prop = Propagator(prob.symbol, prob.grid)
    g = probe if probe is not None else rough_field(prob.grid, sobolev_index=prob.s, seed=seed)
    traj = free_trajectory(prop, g)
    forcing = lambda tau: nonlinearity_eval(traj(tau), prob.k, prob.mode)
    space = prob.space_norm
    t_values = np.asarray(sorted(t_values), dtype=float)
    lhs = []
    for t_final in t_values:
        cfg = WeightedNormConfig.default(prob.s, prob.k, prob.symbol.p, t_final, n_times=n_times)
        dtraj = lambda t: duhamel_integral(prop, forcing, t, panels=panels, grading=grading)
        lhs.append(space(dtraj, cfg).total)
    lhs = np.array(lhs)
    if np.all(lhs < 1e-300):
        return EstimateReport(
            estimate_id=f"nonlinear-growth-{prob.symbol.name}-k{prob.k:g}",
            theoretical_exponent=w,
            fitted_exponent=None,
            fit_window=(float(t_values[0]), float(t_values[-1])),
            residual=0.0,
            empirical_constant=0.0,
            tolerance=margin,
            verdict="pass",
            notes={"degenerate": "zero probe"},
        )
    fitted, constant, residual = fit_power_law(t_values, lhs)
    ok = fitted >= w - margin
    verdict = "pass" if ok else "fail"
    if ok and fitted > w + _WEAK_MARGIN:
        verdict = "pass-weak"
    return EstimateReport(
        estimate_id=f"nonlinear-growth-{prob.symbol.name}-k{prob.k:g}",
        theoretical_exponent=w,
        fitted_exponent=fitted,
        fit_window=(float(t_values[0]), float(t_values[-1])),
        residual=residual,
        empirical_constant=constant,
        tolerance=margin,
        verdict=verdict,
        notes={"lhs": [float(v) for v in lhs]},
    )


def contraction_probe_exponent(k: float) -> float:
    """Spectral slope of the scaling-critical pair family for degree k.

    A random-phase field with coefficient law (1+|xi|)^(-a) has, by the
    variance of the (k+1)-fold spectral convolution, a nonlinear term whose
    L^2 norm under the free flow carries the time weight (3k+2)/(2p) exactly
    when a = (1-2k)/(2(k+1)); for k = 1 that is a mildly growing spectrum.
    """
    return (1.0 - 2.0 * k) / (2.0 * (k + 1.0))


def default_contraction_window(prob: IvpProblem, span: float = 64.0) -> list[float]:
    """Geometric T window deep enough for the ratio scaling to be asymptotic.

    The effective bandwidth (eta*T)^(-1/p) must stay well below the dealias
    cutoff across the whole window, so T_lo pins it at cutoff/3.2 and the
    window spans the factor `span` upward.
    """
    cutoff_xi = prob.grid.dealias_cutoff * 2.0 * np.pi / prob.grid.length
    t_lo = (cutoff_xi / 3.2) ** (-prob.symbol.p) / prob.symbol.eta
    t_hi = min(span * t_lo, 1.0)
    return list(np.geomspace(t_hi / span, t_hi, 6))


def verify_contraction_scaling(
    prob: IvpProblem,
    t_values=None,
    n_pairs: int = 2,
    seed: int = 0,
    rel_tol: float = 0.15,
    panels: int = 10,
    grading: float = 2.0,
    n_times: int = 8,
) -> EstimateReport:
    """Fit the T-scaling of the Duhamel map's Lipschitz ratio on ball pairs.

    For pairs (v, w) of free evolutions of scaling-critical random data the
    measured rho(T) = max ||Psi(v)-Psi(w)|| / ||v-w|| should scale as
    T^omega_k; pass when the fitted exponent is within rel_tol of omega_k.
    Inadmissible (k, p) pairs produce a skipped report.

    The discrete sup over (0, T] samples down to an absolute time floor
    shared by every T in the sweep; a floor relative to T would drag a
    spurious T-dependence into the denominator.
    """
    w = omega_k(prob.k, prob.symbol.p)
    ident = f"contraction-scaling-{prob.symbol.name}-k{prob.k:g}"
    if w <= 0:
        return EstimateReport(
            estimate_id=ident,
            theoretical_exponent=w,
            fitted_exponent=None,
            fit_window=(0.0, 0.0),
            residual=0.0,
            empirical_constant=0.0,
            tolerance=rel_tol,
            verdict="skipped",
            notes={"status": "inadmissible", "reason": "contraction exponent nonpositive"},
        )
    if t_values is None:
        t_values = default_contraction_window(prob)
    t_values = np.asarray(sorted(t_values), dtype=float)
    t_floor = 1e-4 * t_values[0]
    prop = Propagator(prob.symbol, prob.grid)
    space = prob.space_norm
    probe_exp = contraction_probe_exponent(prob.k)

    pairs = []
    for i in range(n_pairs):
        gv = rough_field(prob.grid, seed=seed + 2 * i, spectral_exponent=probe_exp)
        gw = rough_field(prob.grid, seed=seed + 2 * i + 1, spectral_exponent=probe_exp)
        pairs.append((gv, gw))

    rhos = []
    for t_final in t_values:
        times = tuple(np.geomspace(t_floor, t_final, n_times))
        cfg = WeightedNormConfig(prob.s, prob.k, prob.symbol.p, t_final, times)
        best = 0.0
        for gv, gw in pairs:
            tv = free_trajectory(prop, gv)
            tw = free_trajectory(prop, gw)
            denom = space(lambda t: linear_combination(tv(t), tw(t), 1.0, -1.0), cfg).total
            if denom < 1e-12:
                continue
            forcing = lambda tau: linear_combination(
                nonlinearity_eval(tv(tau), prob.k, prob.mode),
                nonlinearity_eval(tw(tau), prob.k, prob.mode),
                1.0,
                -1.0,
            )
            num = space(
                lambda t: duhamel_integral(prop, forcing, t, panels=panels, grading=grading),
                cfg,
            ).total
            best = max(best, num / denom)
        rhos.append(best)
    rhos = np.array(rhos)
    fitted, constant, residual = fit_power_law(t_values, rhos)
    tol = rel_tol * abs(w)
    ok = abs(fitted - w) <= tol
    return EstimateReport(
        estimate_id=ident,
        theoretical_exponent=w,
        fitted_exponent=fitted,
        fit_window=(float(t_values[0]), float(t_values[-1])),
        residual=residual,
        empirical_constant=constant,
        tolerance=tol,
        verdict="pass" if ok else "fail",
        notes={
            "rhos": [float(v) for v in rhos],
            "t_values": [float(v) for v in t_values],
            "probe_spectral_exponent": probe_exp,
            "sample_time_floor": float(t_floor),
        },
    )


def verify_smoothing(
    prob: IvpProblem,
    s: float | None = None,
    t_probe: float | None = None,
    t_horizon: float | None = None,
    seed: int = 7,
    data_scale: float = 0.15,
    stab_tol: float = 0.10,
    n_approach: int = 5,
    panels: int = 16,
) -> EstimateReport:
    """Regularity gain of the free flow and of the Duhamel term of the fixed point.

    (a) free smoothing: ||V(t)w0||_{H^(s+mu)} for data with an H^s-law
    spectrum stabilizes between the problem grid and its 2x refinement;
    (b) the fixed point's Duhamel term does the same in H^(s+mu); (c) the
    H^(s+mu) continuity sequence along dyadic approaches to t0 decreases.
    mu = (p-1-s)/2 in the window s < p-1, else 1/2.

    The probe data is synthesized here (seeded, nested across the two grids);
    the problem's own initial_data field is not used.  t_horizon overrides
    the selection rule's existence time: the refinement comparison needs the
    probe time well above the coarse grid's smoothing scale nyquist^(-p), and
    the worst-case selection rule can land far below it.  Convergence of both
    fixed-point runs is part of the verdict.
    """
    if s is None:
        s = prob.s
    p = prob.symbol.p
    mu = 0.5 * (p - 1.0 - s) if s < p - 1.0 else 0.5
    coarse = prob.grid
    fine = GridSpec(coarse.length, 2 * coarse.n_points, coarse.dealias_fraction)

    data_c = rough_field(coarse, sobolev_index=s, seed=seed, amplitude=data_scale)
    data_f = rough_field(fine, sobolev_index=s, seed=seed, amplitude=data_scale)
    prob_c = replace_problem(prob, grid=coarse, initial_data=data_c, s=s)
    prob_f = replace_problem(prob, grid=fine, initial_data=data_f, s=s)

    c = calibrate_c(prob_c, [data_c], panels=panels)
    r, t_final = select_radius_and_time(prob_c, c)
    if t_horizon is not None:
        t_final = t_horizon
    sol_c, trace_c = picard_iterate(prob_c, r, t_final, panels=panels, calibrated_c=c)
    sol_f, trace_f = picard_iterate(prob_f, r, t_final, panels=panels, calibrated_c=c)
    if t_probe is None:
        t_probe = 0.5 * t_final

    prop_c = Propagator(prob.symbol, coarse)
    prop_f = Propagator(prob.symbol, fine)
    free_c = sobolev_norm(apply_semigroup(prop_c, data_c, t_probe), s + mu)
    free_f = sobolev_norm(apply_semigroup(prop_f, data_f, t_probe), s + mu)
    free_ratio = abs(free_f - free_c) / free_c

    duh_c = sobolev_norm(sol_c.duhamel_part(t_probe), s + mu)
    duh_f = sobolev_norm(sol_f.duhamel_part(t_probe), s + mu)
    duh_ratio = abs(duh_f - duh_c) / duh_c if duh_c > 0 else 0.0

    base = sol_c.duhamel_part(t_probe)
    deltas = []
    for j in range(1, n_approach + 1):
        tj = t_probe + (t_final - t_probe) * 2.0 ** (-j)
        deltas.append(
            sobolev_norm(linear_combination(sol_c.duhamel_part(tj), base, 1.0, -1.0), s + mu)
        )
    decreasing = all(b < a for a, b in zip(deltas[:-1], deltas[1:]))

    converged = trace_c.converged and trace_f.converged
    ok = converged and free_ratio <= stab_tol and duh_ratio <= stab_tol and decreasing
    return EstimateReport(
        estimate_id=f"smoothing-{prob.symbol.name}-s{s:g}",
        theoretical_exponent=None,
        fitted_exponent=None,
        fit_window=(float(coarse.n_points), float(fine.n_points)),
        residual=max(free_ratio, duh_ratio),
        empirical_constant=duh_c,
        tolerance=stab_tol,
        verdict="pass" if ok else "fail",
        notes={
            "mu": mu,
            "t_probe": float(t_probe),
            "t_final": float(t_final),
            "converged": converged,
            "free_refinement_ratio": free_ratio,
            "duhamel_refinement_ratio": duh_ratio,
            "continuity_deltas": [float(d) for d in deltas],
            "continuity_decreasing": decreasing,
        },
    )


def replace_problem(prob: IvpProblem, **changes) -> IvpProblem:
    return replace(prob, **changes)


def verify_hausdorff_young(
    field_set,
    p1: float,
    refined_set=None,
    stab_tol: float = 0.10,
) -> EstimateReport:
    """Empirical constant of ||f||_{L^p1} <= C ||f^||_{L^q1}, 1/p1 + 1/q1 = 1.

    At p1 = 2 the ratio is exactly 1 (Parseval).  When a refined field set is
    supplied, the constant must be stable under refinement within stab_tol.
    """
    if p1 < 2:
        raise ValueError(f"Hausdorff-Young needs p1 >= 2, got {p1}")
    q1 = p1 / (p1 - 1.0) if np.isfinite(p1) else 1.0
    ratios = [lebesgue_norm(f, p1) / spectral_lq_norm(f, q1) for f in field_set]
    constant = float(np.max(ratios))
    notes = {"ratios": [float(v) for v in ratios], "q1": q1}
    ok = np.isfinite(constant)
    if refined_set is not None:
        refined = float(np.max([lebesgue_norm(f, p1) / spectral_lq_norm(f, q1) for f in refined_set]))
        drift = abs(refined - constant) / constant
        notes["refined_constant"] = refined
        notes["refinement_drift"] = drift
        ok = ok and drift <= stab_tol
    return EstimateReport(
        estimate_id=f"hausdorff-young-p{p1:g}",
        theoretical_exponent=None,
        fitted_exponent=None,
        fit_window=(p1, q1),
        residual=0.0,
        empirical_constant=constant,
        tolerance=stab_tol,
        verdict="pass" if ok else "fail",
        notes=notes,
    )


def verify_threshold_conditions(
    sym: DissipativeSymbol,
    xi_max: float = 64.0,
    n_samples: int = 10 ** 4,
    tol: float = 1e-9,
    m_override: float | None = None,
) -> EstimateReport:
    """Re-validate the three high-frequency conditions above the threshold M.

    With m_override the scan starts at the given (possibly wrong) threshold
    instead, exposing violations below the true M.
    """
    m = m_override if m_override is not None else threshold_M(sym, xi_max, tol)
    xs = np.linspace(m, xi_max, n_samples)
    phi = np.asarray(evaluate_phi(sym, xs), dtype=float)
    lead = xs ** sym.p
    pert = np.zeros_like(xs) if sym.phi1 is None else np.asarray(sym.phi1(xs), dtype=float)
    viol = ~((phi < -1.0) & (np.abs(pert) <= 0.5 * lead) & (np.abs(phi) >= 0.5 * lead))
    n_viol = int(np.count_nonzero(viol))
    notes = {"threshold_m": float(m), "n_samples": n_samples, "violations": n_viol}
    if n_viol:
        notes["first_violating_xi"] = float(xs[np.argmax(viol)])
    return EstimateReport(
        estimate_id=f"threshold-conditions-{sym.name}",
        theoretical_exponent=None,
        fitted_exponent=None,
        fit_window=(float(m), float(xi_max)),
        residual=float(n_viol),
        empirical_constant=float(m),
        tolerance=0.0,
        verdict="pass" if n_viol == 0 else "fail",
        notes=notes,
    )

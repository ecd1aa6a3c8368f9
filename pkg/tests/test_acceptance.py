"""End-to-end acceptance gate.

Ten criteria, one test each, every test printing a single
``[acceptance] criterion N ...: PASS|FAIL`` line to the terminal even
under output capture. Criteria 8-10 share a single desk-profile sweep
(60 epsilon points, t_final = 3000) run once per session with the
calibrated default parameters.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from wavebox.dispersion import (
    rs_omega, capillary_only_omega, box_eigen_wavenumbers,
)
from wavebox.params import HydroParams, NormalizedParams, normalize_hydro
from wavebox.simulation import run
from wavebox.statistics import (
    detect_peaks, effective_box_length, extract_energy_levels, phase_space,
)
from wavebox.sweep import PROFILES, plan_sweep, execute
from wavebox.wavefield import (
    WaveField, ModePropagator, gaussian_width, project_forcing,
    oracle_complex_split_evolve,
)

# Calibrated operating point for the coupled runs (see README): with the
# default damping/coupling the sweep below holds the documented mode
# ladder. The reference epsilon sits inside the lowest stable window.
REFERENCE_EPSILON = 0.25


@pytest.fixture
def report(request):
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def _report(num, name, ok, detail=""):
        verdict = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        line = f"[acceptance] criterion {num:2d} {name}: {verdict}{suffix}"
        with capman.global_and_fixture_disabled():
            print(f"\n{line}", flush=True)
        assert ok, line

    return _report


@pytest.fixture(scope="session")
def desk_sweep(tmp_path_factory):
    """The calibrated desk-profile sweep shared by criteria 8 and 9."""
    profile = PROFILES["desk"]
    base = NormalizedParams(epsilon=1.0, t_final=profile["t_final"],
                            t_transient=profile["t_transient"])
    plan = plan_sweep(profile["eps_min"], profile["eps_max"],
                      profile["n_points"], base, parallelism=1,
                      output_dir=tmp_path_factory.mktemp("desk_sweep"))
    return execute(plan)


def test_criterion_1_dispersion_exactness(report):
    rng = np.random.default_rng(2026)
    k = rng.uniform(0.01, 6.0, size=1000)
    eps = rng.uniform(0.0, 4.0, size=1000)
    omega = rs_omega(k, eps)
    target = k**4 + eps * k**2 + eps**2 / 4.0
    rel = np.max(np.abs(omega**2 - target) / target)
    report(1, "dispersion exactness", rel <= 1e-12, f"max rel err {rel:.2e}")


def test_criterion_2_free_particle_analogy(report):
    h = HydroParams(sigma=0.25, rho=2.0, g=0.5, H=2.0)
    omega_n, k_n = normalize_hydro(h)
    k = box_eigen_wavenumbers(20.0, 400)
    normalized_capillary = capillary_only_omega(k * k_n, h) / omega_n
    rel = np.max(np.abs(rs_omega(k, 0.0) - normalized_capillary)
                 / normalized_capillary)
    report(2, "free-particle analogy", rel <= 1e-12, f"max rel err {rel:.2e}")


def test_criterion_3_solver_exactness(report):
    omega = np.array([1.7])
    period = 2.0 * math.pi / omega[0]
    n_steps = 1024
    prop = ModePropagator.build(omega, 0.0, period / n_steps)
    a, adot = np.array([0.8]), np.array([-0.3])
    zero = np.zeros(1)
    for _ in range(n_steps):
        a, adot = prop.step(a, adot, zero, zero)
    return_err = max(abs(a[0] - 0.8) / 0.8, abs(adot[0] + 0.3) / 0.3)

    rng = np.random.default_rng(7)
    field = WaveField(16, 20.0, 1.0, 0.0,
                      rng.normal(size=16), rng.normal(size=16))
    e0 = field.total_energy()
    zeros = np.zeros(16)
    n_long = 100_000
    for _ in range(n_long):
        field = field.step(zeros, zeros, 2e-3)
    drift_per_step = abs(field.total_energy() - e0) / e0 / n_long
    ok = return_err <= 1e-10 and drift_per_step < 1e-12
    report(3, "solver exactness", ok,
           f"period err {return_err:.2e}, drift/step {drift_per_step:.2e}")


def test_criterion_4_oracle_equivalence(report):
    L, eps = 20.0, 1.0
    omega1 = (math.pi / L) ** 2 + eps / 2.0
    t_final = 5.0 * 2.0 * math.pi / omega1

    modes, amps = [1, 3], [1.0, 0.4]
    coeffs = np.zeros(3)
    coeffs[0], coeffs[2] = amps
    field = WaveField(3, L, eps, 0.0, coeffs)
    zero = np.zeros(3)
    n_steps = 10_000
    for _ in range(n_steps):
        field = field.step(zero, zero, t_final / n_steps)

    def l2_error(n_grid):
        x = np.linspace(-L / 2, L / 2, n_grid)
        xi0 = sum(A * np.sin(np.pi * m * (x + L / 2) / L)
                  for m, A in zip(modes, amps))
        xi0[0] = xi0[-1] = 0.0
        _, fd = oracle_complex_split_evolve(xi0, np.zeros(n_grid), eps, L, t_final)
        return float(np.sqrt(np.mean((field.evaluate(x) - fd) ** 2)))

    err_512 = l2_error(512)
    err_1024 = l2_error(1024)
    ok = err_512 < 1e-3 and err_1024 < err_512
    report(4, "oracle equivalence", ok,
           f"L2 {err_512:.2e} at 512, {err_1024:.2e} at 1024")


def test_criterion_5_forcing_projection(report):
    worst = 0.0
    for eps in (0.5, 1.0, 2.3):
        p = NormalizedParams(epsilon=eps, gamma0=2.0).resolve()
        a = gaussian_width(eps)
        L = p.box_length
        wall_margin = L / 2 - 3.0 * a
        k = np.pi * np.arange(1, 9) / L
        amp = -p.gamma0 * p.epsilon * math.sin(2.0 * p.epsilon * 0.7)
        norm = 1.0 / (a * math.sqrt(math.pi))
        for x_p in (-wall_margin, 0.4, wall_margin):
            coeffs = project_forcing(x_p, 0.7, p, k)
            # 4096-point quadrature across the Gaussian's full support
            x = np.linspace(x_p - 8.0 * a, x_p + 8.0 * a, 4096)
            profile = amp * norm * np.exp(-(((x - x_p) / a) ** 2)) * 2.0 / L
            for m, km in enumerate(k):
                quadrature = trapezoid(profile * np.sin(km * (x + L / 2)), x)
                worst = max(worst, abs(coeffs[m] - quadrature))
    report(5, "forcing projection", worst < 1e-8, f"max abs err {worst:.2e}")


def test_criterion_6_symmetry_suite(report):
    base = NormalizedParams(epsilon=REFERENCE_EPSILON, t_final=3000.0,
                            t_transient=300.0)
    centered = run(replace(base, particle_x0=0.0))
    center_drift = float(np.max(np.abs(centered.x)))

    right = run(base)
    left = run(replace(base, particle_x0=-base.particle_x0))
    mirrored = (np.array_equal(left.x, -right.x)
                and np.array_equal(left.v, -right.v))
    ok = center_drift < 1e-9 and mirrored
    report(6, "symmetry suite", ok,
           f"center drift {center_drift:.2e}, mirror exact={mirrored}")


def test_criterion_7_convergence(report):
    base = NormalizedParams(epsilon=REFERENCE_EPSILON, t_final=100.0,
                            t_transient=0.0).resolve()

    def x_at_end(params):
        result = run(params)
        assert not result.escaped and not result.failed
        return float(np.interp(99.5, result.t, result.x))

    x_ref = x_at_end(base)
    dx_dt = abs(x_at_end(replace(base, dt=base.dt / 2.0)) - x_ref)
    dx_modes = abs(x_at_end(replace(base, n_modes=2 * base.n_modes)) - x_ref)
    ok = dx_dt < 1e-3 and dx_modes < 1e-3
    report(7, "convergence", ok,
           f"dt-halving {dx_dt:.2e}, mode-doubling {dx_modes:.2e}")


def test_criterion_8_quantization_law(report, desk_sweep):
    levels = extract_energy_levels(desk_sweep)
    l_eff = effective_box_length(desk_sweep.runs)
    n_levels = len(levels.mode_numbers)
    plateaus_ok = n_levels >= 3
    # mode numbers are the interior peak counts at the plateaus; the
    # extraction keeps them strictly increasing, so non-decreasing holds
    # exactly when >= 3 usable plateaus were found
    counts_ok = plateaus_ok and np.all(np.diff(levels.mode_numbers) > 0)
    fit_ok = plateaus_ok and levels.fit_quality >= 0.98
    if l_eff:
        c_expected = 2.0 * math.pi**2 / l_eff**2
        c_ok = abs(levels.fit_coefficient - c_expected) <= 0.25 * c_expected
        c_note = f"C={levels.fit_coefficient:.4f} vs {c_expected:.4f}"
    else:
        c_ok, c_note = False, "no effective box length"
    ok = plateaus_ok and counts_ok and fit_ok and c_ok
    report(8, "quantization law", ok,
           f"{n_levels} plateaus n={list(levels.mode_numbers)}, "
           f"R2={levels.fit_quality:.3f}, {c_note}, L_eff={l_eff}")


def test_criterion_9_five_peak_mode(report, desk_sweep):
    found = None
    for r in desk_sweep.runs:
        if not r.stable:
            continue
        analysis = detect_peaks(r.histogram)
        if analysis.interior_peak_count == 5 and len(analysis.peak_positions) == 7:
            # portrait over the settled second half of the run, away from
            # the slow-spot cluster the trajectory starts in after t=300
            portrait = phase_space(r.t, r.x, r.v, t_transient=1500.0)
            # a closed orbit crosses the center an even number of times per
            # recurrence period; one wall-to-wall traversal each way is
            # exactly two sign changes
            if portrait.period is not None and portrait.crossings_per_period == 2:
                found = (r.epsilon, portrait.period)
                break
    report(9, "five-peak mode", found is not None,
           f"eps={found[0]:.3f}, period {found[1]:.2f}" if found
           else "no five-peak periodic run")


def test_criterion_10_pipeline_determinism(report, tmp_path):
    profile = PROFILES["desk"]
    base = NormalizedParams(epsilon=1.0, t_final=profile["t_final"],
                            t_transient=profile["t_transient"])
    artifacts = ("bifurcation_map.csv", "kinetic_energy.csv", "stability.csv")
    bodies = []
    for jobs in (1, 2):
        out = tmp_path / f"jobs_{jobs}"
        execute(plan_sweep(profile["eps_min"], profile["eps_max"], 10, base,
                           parallelism=jobs, output_dir=out))
        bodies.append({name: (out / name).read_bytes() for name in artifacts})
    identical = all(bodies[0][name] == bodies[1][name] for name in artifacts)
    report(10, "pipeline determinism", identical,
           "1-worker vs 2-worker CSVs byte-identical" if identical
           else "CSV mismatch between worker counts")

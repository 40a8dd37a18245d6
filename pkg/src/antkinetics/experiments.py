"""Experiment harness: reproducible parameter studies built on the solver.

Every experiment resolves a flat key = value configuration, runs from a
fixed RNG seed, and emits a text manifest (config hash, code version,
seed) plus NDJSON observable streams or CSV tables, so reruns with the
same inputs reproduce outputs bit for bit.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .diagnostics import (
    ObservableCollector,
    fit_exponential_rate,
    write_ndjson,
    write_records_csv,
)
from .dynamics import (
    PhaseState,
    Scheme,
    StepperConfig,
    homogeneous_state,
    read_checkpoint,
    run,
    state_from_density,
    write_checkpoint,
)
from .linstab import (
    DispersionResult,
    assemble_viscous_operator,
    eigen_sweep,
    eigenfunction_field,
    find_unstable_root,
    rightmost_eigenvalues,
    rotated_eigenfunction,
    seed_profiles,
)
from .params import (
    ModelParams,
    condition_gap,
    config_hash,
    instability_margin,
    inviscid_threshold_chi,
    model_params_from_mapping,
    most_unstable_k,
    reduce_params,
)
from .spectral import SpectralGrid, fft3, ifft3, l2_norm3_hat

TWO_PI = 2.0 * math.pi


class ExperimentKind(enum.Enum):
    SIMULATE = "simulate"
    DISPERSION_MAP = "dispersion_map"
    GROWTH_MATCH = "growth_match"
    STABILITY_SWEEP = "stability_sweep"


@dataclass
class ExperimentConfig:
    kind: ExperimentKind
    params: ModelParams
    grid: SpectralGrid
    stepper: StepperConfig
    mapping: dict
    out_dir: str | None = None
    seed: int = 0
    threads: int = 1
    options: dict = field(default_factory=dict)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _as_bool(value, key: str) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"config key {key!r}: expected a boolean, got {value!r}")


def _get(mapping, key, default, cast=float):
    if key not in mapping or mapping[key] in (None, ""):
        return default
    if cast is bool:
        return _as_bool(mapping[key], key)
    try:
        return cast(mapping[key])
    except (TypeError, ValueError):
        raise ValueError(f"config key {key!r}: cannot parse {mapping[key]!r}") from None


def build_config(
    mapping: dict,
    kind: ExperimentKind,
    out_dir: str | None = None,
    seed: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    """Resolve a flat config mapping into a runnable experiment setup."""
    params = model_params_from_mapping(mapping)
    grid = SpectralGrid(
        _get(mapping, "n_x1", 64, int),
        _get(mapping, "n_x2", 64, int),
        _get(mapping, "n_theta", 64, int),
    )
    stepper = StepperConfig(
        dt=_get(mapping, "dt", 1.0e-3),
        scheme=_get(mapping, "scheme", Scheme.ETDRK2, str),
        dealias=_get(mapping, "dealias", True, bool),
        cfl_safety=_get(mapping, "cfl_safety", 0.5),
        positivity_tol=_get(mapping, "positivity_tol", 1.0e-8),
    )
    resolved_seed = seed if seed is not None else _get(mapping, "seed", 0, int)
    resolved_threads = threads if threads is not None else _get(mapping, "threads", 1, int)
    resolved = dict(mapping)
    resolved["seed"] = resolved_seed
    return ExperimentConfig(
        kind=kind,
        params=params,
        grid=grid,
        stepper=stepper,
        mapping=resolved,
        out_dir=out_dir,
        seed=int(resolved_seed),
        threads=max(1, int(resolved_threads)),
    )


def write_manifest(out_dir, mapping: dict, seed: int, extra: dict | None = None) -> str:
    """Text manifest sufficient to reproduce the run; returns the config hash."""
    os.makedirs(out_dir, exist_ok=True)
    digest = config_hash(mapping)
    lines = [
        f"code_version = {__version__}",
        f"config_hash = {digest}",
        f"rng_seed = {seed}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    lines.append("")
    lines.append("# resolved configuration")
    for key in sorted(mapping):
        lines.append(f"{key} = {mapping[key]}")
    with open(os.path.join(out_dir, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return digest


# --- initial data ------------------------------------------------------------------


def random_band_limited_state(
    grid: SpectralGrid,
    params: ModelParams,
    rng: np.random.Generator,
    max_mode: int = 4,
    amplitude: float = 0.1,
) -> PhaseState:
    """Homogeneous state with a smooth random perturbation.

    The perturbation is band-limited (all mode numbers <= ``max_mode``),
    scaled to sup-norm ``amplitude`` relative to the uniform density, kept
    positive, and renormalized to unit mass.
    """
    shape = grid.shape_four3
    coeffs = np.zeros(shape, dtype=complex)
    band = (
        (np.abs(grid.m1)[:, None, None] <= max_mode)
        & (grid.m2[None, :, None] <= max_mode)
        & (np.abs(grid.n_modes)[None, None, :] <= max_mode)
    )
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs[band] = noise[band]
    coeffs[0, 0, 0] = 0.0
    g = ifft3(coeffs, grid)
    g /= max(float(np.max(np.abs(g))), 1.0e-300)
    f = (1.0 + amplitude * g) / TWO_PI
    f /= f.mean() * TWO_PI  # unit mass on the grid
    return state_from_density(grid, params, f)


def bump_density(grid: SpectralGrid, l6_target: float, width: float = 0.08) -> np.ndarray:
    """Angular marginal rho >= 0 with unit mass and a prescribed L^6 norm.

    rho = 1 + A (G - mean G) with G a periodic Gaussian bump; A is found
    by bisection (the norm is strictly increasing in A).  ``l6_target``
    must be >= 1 and below the positivity cap for the chosen width.
    """
    if l6_target < 1.0:
        raise ValueError(f"l6_target must be >= 1, got {l6_target}")
    x1 = grid.x1[:, None]
    x2 = grid.x2[None, :]
    d1 = np.minimum(np.abs(x1 - 0.5), 1.0 - np.abs(x1 - 0.5))
    d2 = np.minimum(np.abs(x2 - 0.5), 1.0 - np.abs(x2 - 0.5))
    bump = np.exp(-(d1 * d1 + d2 * d2) / (width * width))
    bump -= bump.mean()

    def norm_at(a: float) -> float:
        rho = 1.0 + a * bump
        return float((np.mean(rho**6)) ** (1.0 / 6.0))

    if l6_target == 1.0:
        return np.ones(grid.shape_phys2)
    a_max = -1.0 / float(np.min(bump))  # positivity cap
    if norm_at(a_max) < l6_target:
        raise ValueError(
            f"l6_target {l6_target} unreachable with width {width} "
            f"(cap {norm_at(a_max):.3f})"
        )
    lo, hi = 0.0, a_max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if norm_at(mid) < l6_target:
            lo = mid
        else:
            hi = mid
    return 1.0 + 0.5 * (lo + hi) * bump


def eigen_seed_states(
    cfg: ExperimentConfig, k: int, amplitude_rel: float, n_modes: int = 64
):
    """The four orthogonal eigenfunction-seeded initial states at wavenumber k.

    Returns (mu, [(name, state, seed_field)]):  mu is the rightmost
    eigenvalue of the truncated wavenumber-k operator at the configured
    viscosities; seeds are the two mean directions and their quarter-turn
    images, each normalized to unit L^2 norm and scaled by
    amplitude_rel * ||uniform state||.  For stable or oscillatory
    rightmost eigenvalues the profiles are built at a safe positive rate
    instead (any smooth seed decays there).
    """
    params, grid = cfg.params, cfg.grid
    rp = reduce_params(params, k)
    spectrum = rightmost_eigenvalues(assemble_viscous_operator(rp, n_modes, params.coupling))
    mu = spectrum.rightmost
    if mu.real > 0.0 and abs(mu.imag) <= 1.0e-10 * (1.0 + abs(mu.real)):
        mu_build = float(mu.real)
    else:
        mu_build = abs(mu) + 1.0
    profiles = seed_profiles(rp, params.coupling, mu_build, grid.n_theta, n_modes)

    f_star_norm = 1.0 / math.sqrt(TWO_PI)
    eps = amplitude_rel * f_star_norm
    seeds = []
    for label, (pair, chem) in zip(("w1", "w2"), profiles):
        for rotated in (False, True):
            if rotated:
                field3 = rotated_eigenfunction(pair, grid, k)
            else:
                field3 = eigenfunction_field(pair, grid, k)
            f_hat = fft3(field3.values)
            norm = l2_norm3_hat(f_hat, grid)
            scale = eps / norm
            f = (1.0 / TWO_PI) + scale * field3.values
            c_values = None
            if chem is not None:
                alpha, beta = chem
                z = TWO_PI * k * (grid.x2 if rotated else grid.x1)
                c_pert = alpha * np.cos(z) + beta * np.sin(z)
                axis_shape = (1, -1) if rotated else (-1, 1)
                c_values = 1.0 / params.gamma + scale * c_pert.reshape(axis_shape) * np.ones(
                    grid.shape_phys2
                )
            state = state_from_density(grid, params, f, c_values=c_values)
            seeds.append((label + ("_rot" if rotated else ""), state, field3))
    return spectrum, seeds


# --- dispersion map / scan ----------------------------------------------------------


def dispersion_report(params: ModelParams, k: int) -> dict:
    """Margin, reduced scalars, and the positive root (if any) at wavenumber k."""
    rp = reduce_params(params, k)
    margin = instability_margin(params, k)
    root = find_unstable_root(rp, params.coupling)
    report = {
        "k": k,
        "coupling": params.coupling.value,
        "margin": margin,
        "condition_gap_4pi2": condition_gap(params, k, pi_squared=True),
        "condition_gap_4pi": condition_gap(params, k, pi_squared=False),
        "chi_breve": rp.chi_breve,
        "tau_breve": rp.tau_breve,
        "lambda_breve": rp.lambda_breve,
        "sigma_x_breve": rp.sigma_x_breve,
        "nu_breve": rp.nu_breve,
    }
    if isinstance(root, DispersionResult):
        report.update(mu0=root.mu0, residual=root.residual, root_exists=True)
    else:
        report.update(mu0=None, residual=None, root_exists=False,
                      boundary_value=root.boundary_value)
    return report


def run_eigen(
    cfg: ExperimentConfig,
    k: int,
    sigmas,
    n_modes: int = 64,
) -> dict:
    """Rightmost truncated-operator eigenvalues across an angular-viscosity sweep.

    ``persistent`` reports whether a positive real rightmost eigenvalue
    survives over the whole sweep.
    """
    rp = reduce_params(cfg.params, k)
    spectra = eigen_sweep(rp, cfg.params.coupling, sigmas, n_modes)
    rows = [
        {
            "sigma": spectrum.sigma,
            "rightmost_re": spectrum.rightmost.real,
            "rightmost_im": spectrum.rightmost.imag,
            "multiplicity": spectrum.multiplicity,
        }
        for spectrum in spectra
    ]
    persistent = all(row["rightmost_re"] > 0.0 for row in rows)
    result = {"k": k, "rows": rows, "persistent": persistent}
    if cfg.out_dir:
        write_manifest(cfg.out_dir, cfg.mapping, cfg.seed, {"kind": cfg.kind.value})
        _write_csv(
            os.path.join(cfg.out_dir, "eigen.csv"),
            ("sigma", "rightmost_re", "rightmost_im", "multiplicity"),
            rows,
        )
    return result


def _scan_row(args):
    params, k, n_modes = args
    row = {"k": k, "error": ""}
    try:
        report = dispersion_report(params, k)
        rp = reduce_params(params, k)
        spectrum = rightmost_eigenvalues(
            assemble_viscous_operator(rp, n_modes, params.coupling)
        )
        rightmost = spectrum.rightmost
        row.update(
            margin=report["margin"],
            condition_gap_4pi2=report["condition_gap_4pi2"],
            condition_gap_4pi=report["condition_gap_4pi"],
            mu0=report["mu0"],
            viscous_rightmost_re=rightmost.real,
            viscous_rightmost_im=rightmost.imag,
            multiplicity=spectrum.multiplicity,
        )
        consistent = True
        # eig real-part noise on the skew transport block sits near 1e-10
        if rightmost.real > 1.0e-8 and report["mu0"] is None:
            consistent = False
        if report["mu0"] is not None and report["margin"] <= 0.0:
            consistent = False
        row["consistent"] = consistent
    except Exception as exc:  # per-k failures must not abort the scan
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["consistent"] = False
    return row


def run_instability_scan(cfg: ExperimentConfig, k_max: int, n_modes: int = 64) -> dict:
    """Margins, roots, and truncated-operator eigenvalues for k = 1..k_max."""
    jobs = [(cfg.params, k, n_modes) for k in range(1, k_max + 1)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(_scan_row, jobs))
    else:
        rows = [_scan_row(job) for job in jobs]
    rows.sort(key=lambda row: row["k"])
    ok = all(row["consistent"] for row in rows)
    result = {"rows": rows, "ok": ok}
    if cfg.out_dir:
        write_manifest(cfg.out_dir, cfg.mapping, cfg.seed, {"kind": cfg.kind.value})
        _write_csv(
            os.path.join(cfg.out_dir, "scan.csv"),
            (
                "k",
                "margin",
                "condition_gap_4pi2",
                "condition_gap_4pi",
                "mu0",
                "viscous_rightmost_re",
                "viscous_rightmost_im",
                "multiplicity",
                "consistent",
                "error",
            ),
            rows,
        )
    return result


def _write_csv(path, columns, rows) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            out = []
            for col in columns:
                value = row.get(col, "")
                if value is None:
                    value = ""
                elif isinstance(value, float):
                    value = repr(value)
                out.append(value)
            writer.writerow(out)


# --- growth match -------------------------------------------------------------------


def run_growth_match(
    cfg: ExperimentConfig,
    k: int,
    t_end: float | None = None,
    amplitude_rel: float = 1.0e-6,
    n_modes: int = 64,
    n_samples: int = 60,
) -> dict:
    """Seed the four orthogonal eigenfunctions and match growth rates.

    The fit window covers growth by at most three decades from the seed
    amplitude.  Reports per-seed fitted rates, the predicted eigenvalue,
    and the Gram matrix of the seeds; ``ok`` demands 5 percent agreement
    and a diagonal Gram matrix when a positive eigenvalue exists, negative
    rates otherwise.
    """
    params, grid, stepper = cfg.params, cfg.grid, cfg.stepper
    spectrum, seeds = eigen_seed_states(cfg, k, amplitude_rel, n_modes)
    mu = spectrum.rightmost
    unstable = bool(mu.real > 0.0 and abs(mu.imag) <= 1.0e-10 * (1.0 + abs(mu.real)))

    if t_end is None:
        if unstable:
            t_end = 0.95 * math.log(1.0e3) / mu.real
        else:
            t_end = 2.0
    n_steps = max(int(math.ceil(t_end / stepper.dt)), n_samples)
    t_end = n_steps * stepper.dt
    stride = max(1, n_steps // n_samples)

    # Gram matrix of the raw seed fields
    vectors = [fft3(field3.values) for _, _, field3 in seeds]
    gram = np.zeros((4, 4))
    w3 = grid.half_weights[None, :, None]
    n_tot = grid.n_x1 * grid.n_x2 * grid.n_theta
    for i in range(4):
        for j in range(4):
            gram[i, j] = (
                TWO_PI
                * float(np.sum(w3 * (vectors[i] * np.conj(vectors[j])).real))
                / n_tot**2
            )
    off_diag = max(
        abs(gram[i, j]) / math.sqrt(gram[i, i] * gram[j, j])
        for i in range(4)
        for j in range(4)
        if i != j
    )

    table = []
    for name, state, _ in seeds:
        collector = ObservableCollector(params)
        run(state, stepper, params, t_end, observers=(collector,), stride=stride)
        times = [record.t for record in collector.records]
        devs = [record.l2_f_dev for record in collector.records]
        entry = {"seed": name}
        try:
            fit = fit_exponential_rate(
                times, devs, window=(0.1 * t_end, t_end)
            )
            entry.update(rate=fit.rate, r2=fit.r2, n_samples=fit.n_samples)
            if unstable:
                entry["relative_error"] = abs(fit.rate - mu.real) / abs(mu.real)
        except ValueError as exc:
            entry.update(rate=None, r2=None, diagnostic=str(exc))
        entry["mass_err"] = max(abs(record.mass - 1.0) for record in collector.records)
        entry["min_f"] = min(record.min_f for record in collector.records)
        table.append(entry)

    if unstable:
        ok = all(
            entry.get("relative_error") is not None
            and entry["relative_error"] <= 0.05
            for entry in table
        ) and bool(off_diag <= 1.0e-10)
    else:
        ok = all(entry.get("rate") is not None and entry["rate"] < 0.0 for entry in table)

    result = {
        "k": k,
        "mu_predicted_re": mu.real,
        "mu_predicted_im": mu.imag,
        "multiplicity": spectrum.multiplicity,
        "unstable": unstable,
        "gram_off_diagonal": off_diag,
        "t_end": t_end,
        "seeds": table,
        "ok": ok,
    }
    if cfg.out_dir:
        write_manifest(cfg.out_dir, cfg.mapping, cfg.seed, {"kind": cfg.kind.value})
        _write_csv(
            os.path.join(cfg.out_dir, "growth_match.csv"),
            ("seed", "rate", "r2", "relative_error", "n_samples", "mass_err", "min_f"),
            table,
        )
        with open(os.path.join(cfg.out_dir, "growth_match.json"), "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
    return result


# --- stability sweep ----------------------------------------------------------------


def run_stability_sweep(
    cfg: ExperimentConfig,
    chi_values=None,
    k_max: int = 4,
    t_end: float = 20.0,
    stride: int = 20,
    max_mode: int = 4,
    amplitude: float = 0.1,
) -> dict:
    """Sweep chi from common random smooth data and locate the empirical threshold.

    The default chi grid brackets the predicted inviscid threshold at the
    most unstable wavenumber symmetrically, so the sign-change midpoint can
    be compared against the prediction.  Rates are fitted on the second
    half of each run.
    """
    params, grid, stepper = cfg.params, cfg.grid, cfg.stepper
    probe = params if params.chi > 0.0 else params.replace(chi=1.0)
    k_star = most_unstable_k(probe, k_max)
    chi_star = inviscid_threshold_chi(probe, k_star)
    if chi_values is None:
        chi_values = [0.0, 0.4 * chi_star, 0.8 * chi_star, 1.2 * chi_star, 1.6 * chi_star]
    chi_values = sorted(float(c) for c in chi_values)

    rng = np.random.default_rng(cfg.seed)
    base_state = random_band_limited_state(grid, params, rng, max_mode, amplitude)
    dev_cap = 0.2 / math.sqrt(TWO_PI)  # stop well before trails saturate

    rows = []
    for chi in chi_values:
        run_params = params.replace(chi=chi)
        collector = ObservableCollector(run_params)
        state = base_state.copy()
        segment = stride * stepper.dt
        error = ""
        while state.t < t_end - 0.5 * stepper.dt:
            target = min(state.t + segment, t_end)
            try:
                state = run(
                    state, stepper, run_params, target,
                    observers=(collector,), stride=stride,
                    include_initial=state.step == 0,
                ).state
            except RuntimeError as exc:  # keep the clean samples from before blow-up
                error = str(exc)
                break
            if collector.records and collector.records[-1].l2_f_dev >= dev_cap:
                break
        times = np.array([record.t for record in collector.records])
        devs = np.array([record.l2_f_dev for record in collector.records])
        row = {"chi": chi, "t_stop": float(times[-1]) if len(times) else 0.0, "error": error}
        if collector.records:
            row["mass_err"] = max(abs(record.mass - 1.0) for record in collector.records)
            row["min_f"] = min(record.min_f for record in collector.records)
        try:
            fit = fit_exponential_rate(times, devs, window=(0.5 * row["t_stop"], row["t_stop"]))
            row.update(rate=fit.rate, r2=fit.r2)
        except ValueError as exc:
            row.update(rate=None, r2=None)
            row["error"] = row["error"] or str(exc)
        rows.append(row)

    threshold = None
    fitted = [row for row in rows if row["rate"] is not None]
    for left, right in zip(fitted, fitted[1:]):
        if left["rate"] < 0.0 <= right["rate"]:
            threshold = 0.5 * (left["chi"] + right["chi"])
            break

    result = {
        "rows": rows,
        "empirical_threshold": threshold,
        "most_unstable_k": k_star,
        "inviscid_threshold_chi": chi_star,
        "threshold_ok": threshold is None or threshold <= chi_star * (1.0 + 1.0e-9),
    }
    if cfg.out_dir:
        write_manifest(cfg.out_dir, cfg.mapping, cfg.seed, {"kind": cfg.kind.value})
        _write_csv(
            os.path.join(cfg.out_dir, "stability_sweep.csv"),
            ("chi", "rate", "r2", "t_stop", "mass_err", "min_f", "error"),
            rows,
        )
        with open(os.path.join(cfg.out_dir, "stability_sweep.json"), "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
    return result


# --- plain simulation ---------------------------------------------------------------


def initial_state(cfg: ExperimentConfig, init: str = "random") -> PhaseState:
    """Initial condition selected by name.

    ``random`` (band-limited perturbation, seeded), ``homogeneous``,
    ``bump:<l6>`` (angle-independent bump with that L^6 marginal norm), or
    ``checkpoint:<dir>``.
    """
    params, grid = cfg.params, cfg.grid
    if init == "homogeneous":
        return homogeneous_state(grid, params)
    if init == "random":
        rng = np.random.default_rng(cfg.seed)
        amplitude = _get(cfg.mapping, "amplitude", 0.1)
        max_mode = _get(cfg.mapping, "max_mode", 4, int)
        return random_band_limited_state(grid, params, rng, max_mode, amplitude)
    if init.startswith("bump:"):
        rho = bump_density(grid, float(init.split(":", 1)[1]))
        f = np.repeat(rho[:, :, None], grid.n_theta, axis=2) / TWO_PI
        return state_from_density(grid, params, f)
    if init.startswith("checkpoint:"):
        return read_checkpoint(init.split(":", 1)[1])
    raise ValueError(f"unknown initial condition {init!r}")


def run_simulate(
    cfg: ExperimentConfig,
    t_end: float,
    stride: int = 10,
    init: str = "random",
    checkpoint_every: int | None = None,
) -> dict:
    """Integrate and stream observables; writes NDJSON plus a final checkpoint."""
    state = initial_state(cfg, init)
    collector = ObservableCollector(cfg.params)
    digest = config_hash(cfg.mapping)
    checkpoint_dir = os.path.join(cfg.out_dir, "checkpoint") if cfg.out_dir else None
    result = run(
        state,
        cfg.stepper,
        cfg.params,
        t_end,
        observers=(collector,),
        stride=stride,
        include_initial=state.step == 0,
        checkpoint_dir=checkpoint_dir,
        checkpoint_every=checkpoint_every if checkpoint_dir else None,
        config_digest=digest,
    )
    if cfg.out_dir:
        write_manifest(cfg.out_dir, cfg.mapping, cfg.seed, {"kind": cfg.kind.value})
        write_ndjson(os.path.join(cfg.out_dir, "observables.ndjson"), collector.records)
        write_records_csv(os.path.join(cfg.out_dir, "observables.csv"), collector.records)
        if checkpoint_dir:
            write_checkpoint(checkpoint_dir, result.state, digest)
    final = collector.records[-1]
    return {
        "t": result.state.t,
        "n_steps": result.n_steps,
        "mass": final.mass,
        "l2_f_dev": final.l2_f_dev,
        "dominant_k": final.dominant_k,
        "trail_count": final.trail_count,
        "cfl_flagged": result.cfl_flagged,
        "positivity_flagged": result.positivity_flagged,
        "records": len(collector.records),
    }

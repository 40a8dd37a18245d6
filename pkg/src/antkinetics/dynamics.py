"""Time integration of the coupled kinetic/chemical system.

State is held in Fourier coefficients.  Each step integrates the diffusive
part exactly through its Fourier multiplier, treats drift and turning
explicitly (products formed in physical space, two-thirds dealiased), and
advances the chemical field either by the instantaneous elliptic solve or
by an exact exponential step with the production term frozen.  The zero
mode is never touched by the explicit terms, so total mass is conserved
to the bit.

Schemes: ``imex_euler`` (first order, Lie splitting) and ``etdrk2``
(second order exponential two-stage).  The homogeneous state
(f, c) = (1/2pi, 1/gamma) is a fixed point of both to round-off.
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .params import Coupling, ModelParams
from .spectral import (
    Representation,
    SpatialField2,
    SpectralField3,
    SpectralGrid,
    fft2,
    fft3,
    ifft2,
    ifft3,
    read_field,
    turning_bias_parts,
    write_field,
)

TWO_PI = 2.0 * math.pi


class Scheme(enum.Enum):
    IMEX_EULER = "imex_euler"
    ETDRK2 = "etdrk2"

    @property
    def order(self) -> int:
        return 1 if self is Scheme.IMEX_EULER else 2


def _coerce_scheme(value) -> Scheme:
    if isinstance(value, Scheme):
        return value
    try:
        return Scheme(str(value).strip().lower())
    except ValueError:
        raise ValueError(f"scheme must be 'imex_euler' or 'etdrk2', got {value!r}") from None


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping knobs.

    ``cfl_safety`` scales the advisory step bound dt <= safety * min(
    dx / lambda, dtheta / (chi max|B|)); exceeding it flags the state and
    warns but does not abort.  ``positivity_tol`` is the monitored floor
    min f >= -tol * max f.
    """

    dt: float
    scheme: Scheme = Scheme.ETDRK2
    dealias: bool = True
    cfl_safety: float = 0.5
    positivity_tol: float = 1.0e-8

    def __post_init__(self):
        object.__setattr__(self, "scheme", _coerce_scheme(self.scheme))
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be a positive real, got {self.dt}")


@dataclass
class PhaseState:
    """Fourier-space state of the walker density and chemical field."""

    grid: SpectralGrid
    f_hat: np.ndarray
    c_hat: np.ndarray
    t: float = 0.0
    step: int = 0
    flags: frozenset = frozenset()

    def f_physical(self) -> np.ndarray:
        return ifft3(self.f_hat, self.grid)

    def c_physical(self) -> np.ndarray:
        return ifft2(self.c_hat, self.grid)

    def rho_hat(self) -> np.ndarray:
        """2-D coefficients of the angular marginal rho = int f dtheta."""
        return self.f_hat[:, :, 0] * (TWO_PI / self.grid.n_theta)

    def mass(self) -> float:
        return float(self.f_hat[0, 0, 0].real) * self.grid.cell_volume

    def copy(self) -> "PhaseState":
        return PhaseState(
            self.grid, self.f_hat.copy(), self.c_hat.copy(), self.t, self.step, self.flags
        )


# --- chemical field ----------------------------------------------------------------


def elliptic_chemical_hat(rho_hat: np.ndarray, grid: SpectralGrid, params: ModelParams):
    """Instantaneous chemical solve gamma c - sigma_c Lap c = rho, in coefficients."""
    return rho_hat / (params.gamma + params.sigma_c * grid.ksq_2d)


def parabolic_chemical_step_hat(
    c_hat: np.ndarray, rho_hat: np.ndarray, dt: float, grid: SpectralGrid, params: ModelParams
):
    """Exact exponential step of dc/dt = -gamma c + sigma_c Lap c + rho.

    The production term is held frozen over the step; each mode relaxes as
    c -> e^{-nu dt} c + (1 - e^{-nu dt}) / nu rho with
    nu = gamma + sigma_c |2 pi m|^2.  The dt -> infinity limit is the
    elliptic solve.
    """
    nu = params.gamma + params.sigma_c * grid.ksq_2d
    decay = np.exp(-nu * dt)
    gain = -np.expm1(-nu * dt) / nu
    return decay * c_hat + gain * rho_hat


# --- stepper -----------------------------------------------------------------------


def _phi12(z: np.ndarray):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, stable near 0."""
    small = np.abs(z) < 1.0e-2
    zs = np.where(small, 1.0, z)
    em = np.expm1(zs)
    phi1 = np.where(
        small,
        1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0 + z**4 / 120.0 + z**5 / 720.0,
        em / zs,
    )
    phi2 = np.where(
        small,
        0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0 + z**4 / 720.0 + z**5 / 5040.0,
        (em - zs) / (zs * zs),
    )
    return phi1, phi2


class Stepper:
    """Precomputed multipliers and stage logic for one (grid, params, cfg)."""

    def __init__(self, grid: SpectralGrid, params: ModelParams, cfg: StepperConfig):
        self.grid = grid
        self.params = params
        self.cfg = cfg
        dt = cfg.dt
        nu_f = params.sigma_x * grid.ksq_3d + params.sigma_theta * grid.nsq_3d
        self.decay_f = np.exp(-nu_f * dt)
        if cfg.scheme is Scheme.ETDRK2:
            phi1, phi2 = _phi12(-nu_f * dt)
            self.phi1 = phi1
            self.phi2 = phi2
        self.rho_factor = TWO_PI / grid.n_theta
        if params.coupling is Coupling.ELLIPTIC:
            self.chem_mult = 1.0 / (params.gamma + params.sigma_c * grid.ksq_2d)
        else:
            nu_c = params.gamma + params.sigma_c * grid.ksq_2d
            self.chem_decay = np.exp(-nu_c * dt)
            self.chem_gain = -np.expm1(-nu_c * dt) / nu_c
        self.mask = grid.dealias_mask3 if cfg.dealias else None
        self.cos3 = grid.cos_theta[None, None, :]
        self.sin3 = grid.sin_theta[None, None, :]
        self.dx_min = min(1.0 / grid.n_x1, 1.0 / grid.n_x2)
        self.dtheta = TWO_PI / grid.n_theta

    # explicit part: -lambda div_x(v f) - chi d_theta(B f)
    def explicit_rhs(self, f_hat, c_hat):
        grid, params = self.grid, self.params
        f_phys = ifft3(f_hat, grid)
        rhs = np.zeros_like(f_hat)
        max_abs_b = 0.0
        if params.lam != 0.0:
            t1 = fft3(self.cos3 * f_phys)
            t2 = fft3(self.sin3 * f_phys)
            rhs -= params.lam * (grid.ik1_3d * t1 + grid.ik2_3d * t2)
        if params.chi != 0.0:
            c_field = SpatialField2(grid, c_hat, Representation.FOURIER)
            g1, g2, s, r = turning_bias_parts(c_field, params.tau)
            th = grid.theta
            bias = (
                -np.sin(th)[None, None, :] * g1[:, :, None]
                + np.cos(th)[None, None, :] * g2[:, :, None]
                + np.sin(2.0 * th)[None, None, :] * s[:, :, None]
                + np.cos(2.0 * th)[None, None, :] * r[:, :, None]
            )
            max_abs_b = float(np.max(np.abs(bias)))
            rhs -= params.chi * grid.in_3d * fft3(bias * f_phys)
        if self.mask is not None:
            rhs *= self.mask
        return rhs, max_abs_b, f_phys

    def chemical_of(self, f_hat, c_hat):
        """Chemical coefficients consistent with f for stage evaluations."""
        if self.params.coupling is Coupling.ELLIPTIC:
            return self.chem_mult * (f_hat[:, :, 0] * self.rho_factor)
        return c_hat

    def advisory_dt(self, max_abs_b: float) -> float:
        bound = math.inf
        if self.params.lam > 0.0:
            bound = min(bound, self.dx_min / self.params.lam)
        angular_speed = self.params.chi * max_abs_b
        if angular_speed > 0.0:
            bound = min(bound, self.dtheta / angular_speed)
        return self.cfg.cfl_safety * bound

    def step(self, state: PhaseState) -> PhaseState:
        grid, params, cfg = self.grid, self.params, self.cfg
        dt = cfg.dt
        f_hat, c_hat = state.f_hat, state.c_hat
        if params.coupling is Coupling.ELLIPTIC:
            c_hat = self.chemical_of(f_hat, c_hat)

        n1, max_abs_b, f_phys = self.explicit_rhs(f_hat, c_hat)
        flags = state.flags

        if cfg.scheme is Scheme.IMEX_EULER:
            f_new = self.decay_f * (f_hat + dt * n1)
            if params.coupling is Coupling.PARABOLIC:
                c_new = self.chem_decay * c_hat + self.chem_gain * (
                    f_hat[:, :, 0] * self.rho_factor
                )
            else:
                c_new = self.chemical_of(f_new, c_hat)
        else:
            stage = self.decay_f * f_hat + dt * self.phi1 * n1
            if params.coupling is Coupling.PARABOLIC:
                rho0 = f_hat[:, :, 0] * self.rho_factor
                c_stage = self.chem_decay * c_hat + self.chem_gain * rho0
            else:
                c_stage = self.chemical_of(stage, c_hat)
            n2, max_b2, _ = self.explicit_rhs(stage, c_stage)
            max_abs_b = max(max_abs_b, max_b2)
            f_new = stage + dt * self.phi2 * (n2 - n1)
            if params.coupling is Coupling.PARABOLIC:
                rho_mid = 0.5 * (rho0 + stage[:, :, 0] * self.rho_factor)
                c_new = self.chem_decay * c_hat + self.chem_gain * rho_mid
            else:
                c_new = self.chemical_of(f_new, c_hat)

        if not np.all(np.isfinite(f_new)) or not np.all(np.isfinite(c_new)):
            self._raise_nonfinite(state, n1)

        if dt > self.advisory_dt(max_abs_b):
            flags = flags | {"cfl"}
            if "cfl" not in state.flags:
                warnings.warn(
                    f"dt = {dt:g} exceeds the advisory CFL bound "
                    f"{self.advisory_dt(max_abs_b):g} at t = {state.t:g}",
                    RuntimeWarning,
                    stacklevel=3,
                )
        fmax = float(np.max(f_phys))
        fmin = float(np.min(f_phys))
        if fmin < -cfg.positivity_tol * max(fmax, 0.0):
            flags = flags | {"positivity"}

        return PhaseState(
            grid=grid,
            f_hat=f_new,
            c_hat=c_new,
            t=state.t + dt,
            step=state.step + 1,
            flags=flags,
        )

    def _raise_nonfinite(self, state: PhaseState, n1) -> None:
        culprits = []
        if not np.all(np.isfinite(state.f_hat)):
            culprits.append("walker density (input)")
        if not np.all(np.isfinite(state.c_hat)):
            culprits.append("chemical field (input)")
        if not np.all(np.isfinite(n1)):
            pieces = []
            f_phys = ifft3(state.f_hat, self.grid)
            if self.params.lam != 0.0:
                tr = self.grid.ik1_3d * fft3(self.cos3 * f_phys) + self.grid.ik2_3d * fft3(
                    self.sin3 * f_phys
                )
                if not np.all(np.isfinite(tr)):
                    pieces.append("drift transport")
            if self.params.chi != 0.0 and not pieces:
                pieces.append("turning interaction")
            culprits.append("explicit terms (" + ", ".join(pieces or ["unidentified"]) + ")")
        if not culprits:
            culprits.append("update (overflow during the step)")
        raise RuntimeError(
            f"non-finite values at t = {state.t:g}, step {state.step}: "
            + "; ".join(culprits)
        )


@lru_cache(maxsize=8)
def _stepper(grid: SpectralGrid, params: ModelParams, cfg: StepperConfig) -> Stepper:
    return Stepper(grid, params, cfg)


def fokker_planck_step(state: PhaseState, cfg: StepperConfig, params: ModelParams) -> PhaseState:
    """Advance the coupled system by one step of the configured scheme."""
    return _stepper(state.grid, params, cfg).step(state)


# --- initial states ----------------------------------------------------------------


def homogeneous_state(grid: SpectralGrid, params: ModelParams) -> PhaseState:
    """The uniform steady state f = 1/2pi, c = 1/gamma."""
    f = np.full(grid.shape_phys3, 1.0 / TWO_PI)
    f_hat = fft3(f)
    c = np.full(grid.shape_phys2, 1.0 / params.gamma)
    return PhaseState(grid, f_hat, fft2(c))


def state_from_density(
    grid: SpectralGrid,
    params: ModelParams,
    f_values: np.ndarray,
    c_values: np.ndarray | None = None,
    t: float = 0.0,
) -> PhaseState:
    """State from a physical walker density; the chemical defaults to the
    instantaneous solve (the natural quasi-steady start for both couplings)."""
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape != grid.shape_phys3:
        raise ValueError(
            f"f_values has shape {f_values.shape}, grid expects {grid.shape_phys3}"
        )
    f_hat = fft3(f_values)
    if c_values is not None:
        c_values = np.asarray(c_values, dtype=float)
        if c_values.shape != grid.shape_phys2:
            raise ValueError(
                f"c_values has shape {c_values.shape}, grid expects {grid.shape_phys2}"
            )
        c_hat = fft2(c_values)
    else:
        rho_hat = f_hat[:, :, 0] * (TWO_PI / grid.n_theta)
        c_hat = elliptic_chemical_hat(rho_hat, grid, params)
    return PhaseState(grid, f_hat, c_hat, t=t)


# --- run loop and checkpoints -------------------------------------------------------


@dataclass
class RunResult:
    state: PhaseState
    n_steps: int
    cfl_flagged: bool
    positivity_flagged: bool


def run(
    state: PhaseState,
    cfg: StepperConfig,
    params: ModelParams,
    t_end: float,
    observers=(),
    stride: int = 1,
    include_initial: bool = True,
    checkpoint_dir=None,
    checkpoint_every: int | None = None,
    config_digest: str = "",
) -> RunResult:
    """Advance to t_end, sampling observers every ``stride`` steps.

    t_end must be an integer number of steps away from state.t.  Observers
    are callables receiving the current state; they are invoked on the
    initial state (unless suppressed), on every stride-th step, and on the
    final one.  Checkpoints, when requested, are written every
    ``checkpoint_every`` steps and at the end.
    """
    dt = cfg.dt
    span = t_end - state.t
    if span < -1.0e-12:
        raise ValueError(f"t_end = {t_end} lies before the state time {state.t}")
    n_steps = int(round(span / dt))
    if abs(state.t + n_steps * dt - t_end) > 1.0e-6 * dt:
        raise ValueError(
            f"t_end - t = {span:g} is not an integer multiple of dt = {dt:g}"
        )
    if stride < 1:
        raise ValueError("stride must be >= 1")

    t0 = state.t
    if include_initial:
        for observer in observers:
            observer(state)
    for i in range(1, n_steps + 1):
        state = fokker_planck_step(state, cfg, params)
        # recompute t from the segment origin to avoid accumulated drift
        state.t = t0 + i * dt
        if i % stride == 0 or i == n_steps:
            for observer in observers:
                observer(state)
        if checkpoint_dir is not None and checkpoint_every and (
            i % checkpoint_every == 0 or i == n_steps
        ):
            write_checkpoint(checkpoint_dir, state, config_digest)
    return RunResult(
        state=state,
        n_steps=n_steps,
        cfl_flagged="cfl" in state.flags,
        positivity_flagged="positivity" in state.flags,
    )


def write_checkpoint(directory, state: PhaseState, config_digest: str = "") -> None:
    """Binary fields plus a text manifest; enough to resume bit-exactly."""
    os.makedirs(directory, exist_ok=True)
    grid = state.grid
    write_field(
        os.path.join(directory, "f.field"),
        SpectralField3(grid, state.f_hat, Representation.FOURIER),
    )
    write_field(
        os.path.join(directory, "c.field"),
        SpatialField2(grid, state.c_hat, Representation.FOURIER),
    )
    lines = [
        f"t = {state.t!r}",
        f"t_hex = {float(state.t).hex()}",
        f"step = {state.step}",
        f"config_hash = {config_digest}",
        f"grid = {grid.n_x1} {grid.n_x2} {grid.n_theta}",
    ]
    with open(os.path.join(directory, "checkpoint.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_checkpoint(directory, expected_config_digest: str | None = None) -> PhaseState:
    meta = {}
    with open(os.path.join(directory, "checkpoint.txt"), "r", encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                key, _, value = line.partition("=")
                meta[key.strip()] = value.strip()
    if expected_config_digest is not None and meta.get("config_hash") not in ("", None):
        if meta["config_hash"] != expected_config_digest:
            raise ValueError(
                "checkpoint was produced under a different configuration "
                f"(hash {meta['config_hash']} != {expected_config_digest})"
            )
    f_field = read_field(os.path.join(directory, "f.field"))
    c_field = read_field(os.path.join(directory, "c.field"), grid=f_field.grid)
    return PhaseState(
        grid=f_field.grid,
        f_hat=f_field.values,
        c_hat=c_field.values,
        t=float.fromhex(meta["t_hex"]),
        step=int(meta["step"]),
    )

"""Toy phase-field solver for liquid-metal dealloying.

Model: a non-conserved solid fraction phi evolving by relaxation of a
double-well free energy, coupled to two conserved concentrations c_A
(soluble species) and c_B (insoluble species); c_C = 1 - c_A - c_B is the
liquid solvent. The free-energy density is

    f = a phi^2 (1 - phi)^2 + 1/2 kappa_phi |grad phi|^2
      + h(phi) (lambda_c c_C + lambda_a c_A)
      + 1/2 w_a c_A^2 + omega_ac c_A c_C
      + 1/2 w_b c_B^2 + beta_b (c_B - cb_lo)^2 (c_B - cb_hi)^2
      + 1/2 kappa_c (|grad c_A|^2 + |grad c_B|^2)

with the smoothstep h(phi) = phi^2 (3 - 2 phi), whose derivative vanishes
in both bulk phases so the dissolution force acts only at the interface.

lambda_c makes solid in contact with solvent dissolve and lambda_a makes
A-rich solid dissolve faster, so the corrosion rate grows with the alloy
composition c_A. A negative omega_ac lets the dissolved A mix into the
liquid. The double well in c_B has minima at cb_lo (dilute solution)
and cb_hi (a dense passivating enrichment): the mixing zone at the
corrosion front always crosses the spinodal band between them, so the
insoluble species demixes laterally there, gating the local dissolution
rate and letting fingers grow. The quartic saturates the instability,
keeping the fields bounded.

Updates:
  phi     forward Euler on  dphi/dt = -m_phi (pi^2 / 8 eta) dF/dphi
  c_A,c_B semi-implicit on  dc/dt = div(M(phi) grad mu) with mobility
          M(phi) = m_liquid + (m_solid - m_liquid) phi; species B moves
          with mob_b_scale * M(phi), modelling the sluggish large
          insoluble atoms whose lingering enrichment passivates the
          front locally and lets fingers grow between. The stiff
          biharmonic part is stabilized by dividing each transform mode
          of the explicit increment by (1 + dt kappa_bar Lambda^2),
          where Lambda are the eigenvalues of the discrete Laplacian.

Boundary conditions: periodic in x; Dirichlet at the top row (held at
its inflow value, pure liquid in solver-generated states); zero-flux /
zero-gradient at the bottom. The transform pair matching the interior
operator is a DCT-II along y and a circular convolution along x; the
convolution is evaluated with paired np.roll shifts so that translating
or mirroring the initial state translates or mirrors every later frame
bit-for-bit.
"""

import math
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np
from scipy.fft import dct, idct
from scipy.ndimage import gaussian_filter1d

from .archive import ArchiveManifest, SnapshotArchive
from .errors import ConfigError, DivergenceError
from .fields import FieldState, pad_field, physics_padding


@dataclass(frozen=True)
class SolverConfig:
    """Grid, schedule, and toy-energy coefficients for one run.

    Construction validates ranges and runs a 10-step stability probe, so
    a config that constructs without raising is safe to integrate.
    """

    height: int = 64
    width: int = 64
    dx: float = 0.2
    dt: float = 0.01
    total_steps: int = 2600
    snapshot_stride: int = 50
    seed: int = 0
    ca_ideal: float = 0.3
    metal_fraction: float = 0.75
    noise_amplitude: float = 0.05
    interface_roughness_rows: float = 1.0
    m_phi: float = 1.0
    eta: float = 0.6
    a_dw: float = 0.3
    kappa_phi: float = 0.16
    lambda_c: float = 0.12
    lambda_a: float = 0.2
    w_a: float = 0.2
    w_b: float = 0.1
    omega_ac: float = -0.2
    beta_b: float = 1.5
    cb_lo: float = 0.1
    cb_hi: float = 0.85
    kappa_c: float = 0.05
    noise_corr_cells: float = 6.0
    m_solid: float = 0.02
    m_liquid: float = 1.0
    mob_b_scale: float = 0.5
    kappa_bar: float = None
    dt_seconds: float = None
    skip_probe: bool = False

    def __post_init__(self):
        if self.height < 8 or self.width < 8:
            raise ConfigError(
                f"grid must be at least 8x8, got {self.height}x{self.width}"
            )
        if not (self.dx > 0 and self.dt > 0):
            raise ConfigError("dx and dt must be positive")
        if self.total_steps < 0 or self.snapshot_stride < 1:
            raise ConfigError("total_steps must be >= 0 and snapshot_stride >= 1")
        if not 0.2 <= self.ca_ideal <= 0.4:
            raise ConfigError(
                f"ca_ideal must lie in [0.2, 0.4], got {self.ca_ideal}"
            )
        if not 0.0 < self.metal_fraction < 1.0:
            raise ConfigError("metal_fraction must lie in (0, 1)")
        if self.noise_amplitude < 0 or self.interface_roughness_rows < 0:
            raise ConfigError(
                "noise_amplitude and interface_roughness_rows must be >= 0"
            )
        if self.m_solid <= 0 or self.m_liquid <= 0 or self.mob_b_scale <= 0:
            raise ConfigError("mobilities must be positive")
        if min(self.eta, self.a_dw, self.kappa_phi, self.kappa_c) <= 0:
            raise ConfigError("eta, a_dw, kappa_phi, kappa_c must be positive")
        if self.beta_b < 0 or not 0.0 <= self.cb_lo < self.cb_hi <= 1.0:
            raise ConfigError(
                "beta_b must be >= 0 and 0 <= cb_lo < cb_hi <= 1"
            )
        if self.kappa_bar is not None and self.kappa_bar <= 0:
            raise ConfigError("kappa_bar must be positive when given")
        if not self.skip_probe:
            self._stability_probe()

    @property
    def kappa_bar_eff(self):
        if self.kappa_bar is not None:
            return self.kappa_bar
        return 2.0 * max(self.m_solid, self.m_liquid) * self.kappa_c

    @property
    def dt_seconds_eff(self):
        """Physical seconds per step; one model time unit is one microsecond."""
        if self.dt_seconds is not None:
            return self.dt_seconds
        return self.dt * 1e-6

    @property
    def phi_rate(self):
        """Prefactor m_phi * pi^2 / (8 eta) of the phase update."""
        return self.m_phi * math.pi**2 / (8.0 * self.eta)

    def _stability_probe(self):
        state = initialize_state(self)
        try:
            for k in range(10):
                phi = step_phase(state, self, step=k)
                ca, cb = step_species(state, self, step=k)
                state = FieldState(phi=phi, ca=ca, cb=cb, dx=self.dx)
        except DivergenceError as e:
            raise ConfigError(f"10-step stability probe diverged: {e}") from e
        peak = max(np.abs(state.phi).max(), np.abs(state.ca).max(),
                   np.abs(state.cb).max())
        if not np.isfinite(peak) or peak > 10.0:
            raise ConfigError(
                f"10-step stability probe produced runaway values (peak {peak:.3g})"
            )


def _smooth_noise(rng, shape, corr_cells, std):
    """x-correlated Gaussian noise with the requested standard deviation."""
    noise = rng.standard_normal(size=shape)
    if corr_cells > 0:
        noise = gaussian_filter1d(noise, corr_cells, axis=-1, mode="wrap")
    sd = noise.std()
    if sd > 0 and std > 0:
        noise *= std / sd
    return noise


def initialize_state(cfg, rng=None):
    """Near-flat interface with seeded noise in the solid.

    The top (1 - metal_fraction) of the rows is pure liquid solvent; the
    rest is solid alloy with c_A = ca_ideal plus noise, balanced by c_B
    so that c_A + c_B = 1 in the metal. Two seeded perturbations break
    the translational symmetry: the interface row meanders per column by
    interface_roughness_rows (standard deviation, in rows), and the
    alloy composition carries noise that is white in y but smoothed
    along x over noise_corr_cells columns, with standard deviation
    noise_amplitude. The laterally coherent components are what seed
    finger competition at the corrosion front.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    h, w = cfg.height, cfg.width
    r0 = int(round(h * (1.0 - cfg.metal_fraction)))
    r0 = min(max(r0, 1), h - 1)

    offsets = _smooth_noise(rng, (w,), cfg.noise_corr_cells,
                            cfg.interface_roughness_rows)
    r0_cols = np.clip(np.rint(r0 + offsets).astype(int), 1, h - 1)
    solid = np.arange(h)[:, None] >= r0_cols[None, :]

    comp_noise = _smooth_noise(rng, (h, w), cfg.noise_corr_cells,
                               cfg.noise_amplitude)
    phi = np.where(solid, 1.0, 0.0)
    ca = np.where(solid, np.clip(cfg.ca_ideal + comp_noise, 0.0, 1.0), 0.0)
    cb = np.where(solid, 1.0 - ca, 0.0)
    return FieldState(phi=phi, ca=ca, cb=cb, dx=cfg.dx)


def _lap_padded(x, dx, spec):
    """5-point Laplacian with boundary values supplied by a padding spec."""
    p = pad_field(x, spec)
    core = p[1:-1, 1:-1]
    vert = p[:-2, 1:-1] + p[2:, 1:-1]
    horz = p[1:-1, :-2] + p[1:-1, 2:]
    return ((vert - 2.0 * core) + (horz - 2.0 * core)) / (dx * dx)


def _lap_neumann(x, dx):
    """5-point Laplacian, replicate (zero-gradient) in y, periodic in x.

    This is the closure whose eigenmodes are the DCT-II / DFT products
    used by the semi-implicit species solve.
    """
    p = np.concatenate([x[:1], x, x[-1:]], axis=0)
    vert = p[:-2] + p[2:]
    horz = np.roll(x, 1, axis=1) + np.roll(x, -1, axis=1)
    return ((vert - 2.0 * x) + (horz - 2.0 * x)) / (dx * dx)


def _divergence_flux(mob, mu, dx):
    """div(M grad mu) in flux form: periodic x faces, closed top/bottom.

    The returned array sums to zero up to roundoff, which is what makes
    the species update conservative.
    """
    # x faces: face i sits between columns i and i+1 (wrapping)
    m_e = 0.5 * (mob + np.roll(mob, -1, axis=1))
    flux_e = m_e * (np.roll(mu, -1, axis=1) - mu) / dx
    div_x = (flux_e - np.roll(flux_e, 1, axis=1)) / dx
    # y faces: face j sits between rows j and j+1; boundary faces carry no flux
    m_f = 0.5 * (mob[:-1] + mob[1:])
    flux_f = m_f * (mu[1:] - mu[:-1]) / dx
    zrow = np.zeros((1, mu.shape[1]), dtype=mu.dtype)
    fpad = np.concatenate([zrow, flux_f, zrow], axis=0)
    div_y = (fpad[1:] - fpad[:-1]) / dx
    return div_x + div_y


def laplacian_eigenvalues(height, width, dx):
    """Eigenvalues of the discrete Laplacian behind _lap_neumann.

    Row m indexes the DCT-II mode along y, column n the DFT mode along x.
    All values are <= 0.
    """
    m = np.arange(height)
    n = np.arange(width)
    lam_y = (2.0 * np.cos(np.pi * m / height) - 2.0) / (dx * dx)
    lam_x = (2.0 * np.cos(2.0 * np.pi * n / width) - 2.0) / (dx * dx)
    return lam_y[:, None] + lam_x[None, :]


@lru_cache(maxsize=32)
def _damping_kernels(height, width, dx, dt, kappa_bar):
    """Per-y-mode circular x kernels for the semi-implicit damping.

    Row m of the result is the real, even kernel whose x-DFT equals
    1 / (1 + dt kappa_bar Lambda(m, n)^2).
    """
    lam = laplacian_eigenvalues(height, width, dx)
    symbol = 1.0 / (1.0 + dt * kappa_bar * lam**2)
    sym_half = symbol[:, : width // 2 + 1]
    kern = np.fft.irfft(sym_half, n=width, axis=1)
    kern.flags.writeable = False
    return kern


def _apply_damping(incr, cfg):
    """Divide each (DCT-y, DFT-x) mode of incr by 1 + dt kappa_bar Lambda^2.

    The x convolution is evaluated with paired rolls so that the result
    commutes bitwise with circular shifts and mirror flips in x.
    """
    h, w = incr.shape
    kern = _damping_kernels(h, w, cfg.dx, cfg.dt, cfg.kappa_bar_eff)
    z = dct(incr, type=2, axis=0)
    out = z * kern[:, 0:1]
    for j in range(1, w // 2):
        out = out + (np.roll(z, j, axis=1) + np.roll(z, -j, axis=1)) * kern[:, j:j + 1]
    if w % 2 == 0:
        out = out + np.roll(z, w // 2, axis=1) * kern[:, w // 2:w // 2 + 1]
    return idct(out, type=2, axis=0)


def _check_finite(arr, what, step):
    if not np.all(np.isfinite(arr)):
        at = "" if step is None else f" at step {step}"
        raise DivergenceError(f"non-finite {what}{at}", step=step)


def step_phase(state, cfg, pin_top=True, step=None):
    """One forward-Euler update of phi; returns the new phi array.

    With pin_top the top row is held at its incoming value, which is the
    Dirichlet inflow condition for solver-generated states.
    """
    phi, ca, cb = state.phi, state.ca, state.cb
    cc = 1.0 - ca - cb
    hprime = 6.0 * phi * (1.0 - phi)
    dfdphi = (
        2.0 * cfg.a_dw * phi * (1.0 - phi) * (1.0 - 2.0 * phi)
        + hprime * (cfg.lambda_c * cc + cfg.lambda_a * ca)
        - cfg.kappa_phi * _lap_padded(phi, cfg.dx, physics_padding(1))
    )
    out = phi - cfg.dt * cfg.phi_rate * dfdphi
    if pin_top:
        out[0] = phi[0]
    _check_finite(out, "phi", step)
    return out


def _chemical_potentials(state, cfg):
    phi, ca, cb = state.phi, state.ca, state.cb
    cc = 1.0 - ca - cb
    h = phi * phi * (3.0 - 2.0 * phi)
    mu_a = (
        cfg.w_a * ca
        + cfg.omega_ac * (cc - ca)
        + (cfg.lambda_a - cfg.lambda_c) * h
        - cfg.kappa_c * _lap_neumann(ca, cfg.dx)
    )
    mu_b = (
        cfg.w_b * cb
        + 2.0 * cfg.beta_b * (cb - cfg.cb_lo) * (cb - cfg.cb_hi)
        * (2.0 * cb - cfg.cb_lo - cfg.cb_hi)
        - cfg.omega_ac * ca
        - cfg.lambda_c * h
        - cfg.kappa_c * _lap_neumann(cb, cfg.dx)
    )
    return mu_a, mu_b


def step_species(state, cfg, pin_top=True, step=None):
    """One semi-implicit update of (c_A, c_B); returns the new arrays.

    The explicit increment dt * div(M grad mu) is damped mode-wise by
    1 / (1 + dt kappa_bar Lambda^2). Without top-row pinning the update
    is exactly conservative (fluxes through top and bottom are zero).
    """
    mu_a, mu_b = _chemical_potentials(state, cfg)
    mob = cfg.m_liquid + (cfg.m_solid - cfg.m_liquid) * np.clip(state.phi, 0.0, 1.0)
    mobs = (mob, cfg.mob_b_scale * mob)
    new = []
    for c, mu, mob_i in ((state.ca, mu_a, mobs[0]), (state.cb, mu_b, mobs[1])):
        incr = cfg.dt * _divergence_flux(mob_i, mu, cfg.dx)
        c_next = c + _apply_damping(incr, cfg)
        if pin_top:
            c_next[0] = c[0]
        new.append(c_next)
    _check_finite(new[0], "c_A", step)
    _check_finite(new[1], "c_B", step)
    return new[0], new[1]


def advance(state, cfg, steps, pin_top=True, first_step=0):
    """Apply `steps` phase+species updates and return the final state."""
    for k in range(first_step, first_step + steps):
        phi = step_phase(state, cfg, pin_top=pin_top, step=k)
        ca, cb = step_species(state, cfg, pin_top=pin_top, step=k)
        state = FieldState(phi=phi, ca=ca, cb=cb, dx=cfg.dx)
    return state


def run_simulation(cfg, initial_state=None):
    """Integrate cfg.total_steps steps, recording every snapshot_stride.

    Frame 0 is the initial state. Bit-identical archives come out of
    identical configs; passing initial_state overrides the seeded
    initialization (used by covariance tests).
    """
    state = initialize_state(cfg) if initial_state is None else initial_state
    if state.phi.shape != (cfg.height, cfg.width):
        raise ConfigError(
            f"initial state shape {state.phi.shape} does not match config "
            f"grid {(cfg.height, cfg.width)}"
        )
    dt_us = cfg.dt_seconds_eff * 1e6

    frames = [state]
    steps_at = [0]
    for k in range(cfg.total_steps):
        phi = step_phase(state, cfg, step=k)
        ca, cb = step_species(state, cfg, step=k)
        state = FieldState(phi=phi, ca=ca, cb=cb, dx=cfg.dx)
        if abs(phi).max() > 1e3:
            raise DivergenceError(f"phi runaway at step {k}", step=k)
        if (k + 1) % cfg.snapshot_stride == 0:
            frames.append(state)
            steps_at.append(k + 1)

    manifest = ArchiveManifest(
        c_a_ideal=cfg.ca_ideal,
        dt_seconds=cfg.dt_seconds_eff,
        snapshot_stride=cfg.snapshot_stride,
        seed=cfg.seed,
        height=cfg.height,
        width=cfg.width,
        dx=cfg.dx,
        extras={"solver_config": asdict(cfg)},
    )
    times = np.asarray(steps_at, dtype=np.float64) * dt_us
    return SnapshotArchive(frames=frames, times_us=times, manifest=manifest)

"""Ring-polymer path-integral core.

Bead arrays are shaped (N, d) for a single ring polymer and (B, N, d) for
a batch of B independent ones; every kernel in this module accepts either.
The classical limit is simply N = 1.  Atomic units throughout (hbar = 1);
the ring-polymer phase space is sampled from exp(-beta_N H_N) with
beta_N = beta/N.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .potentials import Potential

HBAR = 1.0


class TrajectoryError(RuntimeError):
    """Non-finite forces/positions encountered during propagation."""


# ---------------------------------------------------------------------------
# normal modes


class NormalModeTransform:
    """Real discrete Fourier transform between beads and ring-polymer modes.

    Rows of `matrix` are orthonormal: row 0 is the centroid, then
    (sin, cos) pairs for k = 1, 2, ... and, for even N, the alternating
    Nyquist mode.  `to_modes`/`from_modes` use the convention in which the
    centroid mode equals the arithmetic mean of the beads (an extra
    1/sqrt(N)); the `_ortho` variants use the orthonormal rows directly,
    which is what the dynamics and Hessian analysis work in.
    """

    def __init__(self, n_beads: int):
        if n_beads < 1:
            raise ValueError("n_beads must be >= 1")
        n = int(n_beads)
        T = np.empty((n, n))
        k_index = np.zeros(n, dtype=int)
        beads = np.arange(n)
        T[0] = 1.0 / np.sqrt(n)
        row = 1
        pairs = []
        for j in range(1, (n - 1) // 2 + 1):
            T[row] = np.sqrt(2.0 / n) * np.sin(2.0 * np.pi * j * beads / n)
            T[row + 1] = np.sqrt(2.0 / n) * np.cos(2.0 * np.pi * j * beads / n)
            k_index[row] = j
            k_index[row + 1] = -j
            pairs.append((row, row + 1, j))
            row += 2
        if n % 2 == 0 and n > 1:
            T[row] = (-1.0) ** beads / np.sqrt(n)
            k_index[row] = -(n // 2)
            row += 1
        assert row == n
        self.n_beads = n
        self.matrix = T
        self.k_index = k_index
        self.pairs = pairs  # (sin_row, cos_row, k) for paired modes

    def frequencies(self, beta_n: float) -> np.ndarray:
        """Free ring-polymer frequencies omega_k = 2 sin(|k| pi/N)/(beta_N hbar)."""
        n = self.n_beads
        return 2.0 / (beta_n * HBAR) * np.sin(np.abs(self.k_index) * np.pi / n)

    # bead -> mode maps; x has shape (..., N, d)
    def to_modes_ortho(self, x):
        return np.matmul(self.matrix, x)

    def from_modes_ortho(self, X):
        return np.matmul(self.matrix.T, X)

    def to_modes(self, x):
        """Paper-convention modes: X_0 is the bead average."""
        return np.matmul(self.matrix, x) / np.sqrt(self.n_beads)

    def from_modes(self, X):
        return np.matmul(self.matrix.T, X) * np.sqrt(self.n_beads)


# ---------------------------------------------------------------------------
# state and energies


@dataclass
class RingPolymerState:
    q: np.ndarray  # (N, d)
    p: np.ndarray  # (N, d)
    beta: float
    model: Potential

    def __post_init__(self):
        self.q = np.atleast_2d(np.asarray(self.q, dtype=float))
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p shapes differ")
        if self.q.shape[1] != self.model.dim:
            raise ValueError("bead dimension does not match the model")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def n_beads(self) -> int:
        return self.q.shape[0]

    @property
    def beta_n(self) -> float:
        return self.beta / self.n_beads

    def copy(self) -> "RingPolymerState":
        return replace(self, q=self.q.copy(), p=self.p.copy())


def spring_energy(q, beta_n, mass):
    """S_N = m/(2 beta_N^2 hbar^2) sum_n (q_n - q_{n+1})^2, cyclic."""
    dq = q - np.roll(q, -1, axis=-2)
    return mass / (2.0 * (beta_n * HBAR) ** 2) * np.sum(dq * dq, axis=(-2, -1))


def potential_energy(model, q):
    return np.sum(model.value(q), axis=-1)


def kinetic_energy(p, mass):
    return np.sum(p * p, axis=(-2, -1)) / (2.0 * mass)


def hamiltonian(state: RingPolymerState) -> float:
    """H_N = T_N + V_N + S_N for the state's ring polymer."""
    m = state.model.mass
    return float(
        kinetic_energy(state.p, m)
        + potential_energy(state.model, state.q)
        + spring_energy(state.q, state.beta_n, m)
    )


def ring_polymer_potential(model, q, beta_n):
    """U_N = V_N + S_N."""
    return potential_energy(model, q) + spring_energy(q, beta_n, model.mass)


def ring_polymer_gradient(model, q, beta_n):
    """Gradient of U_N in bead coordinates, same shape as q."""
    m = model.mass
    spring = 2.0 * q - np.roll(q, 1, axis=-2) - np.roll(q, -1, axis=-2)
    return model.gradient(q) + m / (beta_n * HBAR) ** 2 * spring


def ring_polymer_hessian(model, q, beta_n):
    """Dense Hessian of U_N, shape (N*d, N*d), bead-major ordering."""
    q = np.atleast_2d(q)
    n, d = q.shape
    m = model.mass
    h = np.zeros((n, d, n, d))
    hv = model.hessian(q)  # (N, d, d)
    idx = np.arange(n)
    h[idx, :, idx, :] = hv
    k = m / (beta_n * HBAR) ** 2
    if n > 1:
        for a in range(d):
            h[idx, a, idx, a] += 2.0 * k
            h[idx, a, (idx + 1) % n, a] -= k
            h[idx, a, (idx - 1) % n, a] -= k
    return h.reshape(n * d, n * d)


# ---------------------------------------------------------------------------
# integrators (array kernels)


class FreeRingPolymerPropagator:
    """Exact evolution of the free ring polymer over a fixed time step.

    Caches the per-mode rotation coefficients; apply() maps bead-space
    (q, p) and, because the map is linear, acts identically on tangent
    displacement columns.
    """

    def __init__(self, transform: NormalModeTransform, beta_n: float,
                 mass: float, dt: float):
        self.transform = transform
        self.mass = mass
        self.dt = dt
        w = transform.frequencies(beta_n)
        c = np.cos(w * dt)
        s = np.sin(w * dt)
        with np.errstate(divide="ignore", invalid="ignore"):
            s_over_mw = np.where(w > 0, s / (mass * np.where(w > 0, w, 1.0)),
                                 dt / mass)
        self.cos = c[:, None]
        self.q_from_p = s_over_mw[:, None]
        self.p_from_q = (-mass * w * s)[:, None]

    def apply(self, q, p):
        T = self.transform
        Xq = T.to_modes_ortho(q)
        Xp = T.to_modes_ortho(p)
        Xq_new = self.cos * Xq + self.q_from_p * Xp
        Xp_new = self.p_from_q * Xq + self.cos * Xp
        return T.from_modes_ortho(Xq_new), T.from_modes_ortho(Xp_new)


def _kick(model, q, p, h):
    p_new = p - h * model.gradient(q)
    if not np.all(np.isfinite(p_new)):
        raise TrajectoryError("non-finite force during kick")
    return p_new


def step_nve_arrays(model, q, p, beta_n, dt, propagator=None, transform=None):
    """One symplectic NVE step (half kick, exact spring drift, half kick)."""
    if propagator is None:
        if transform is None:
            transform = NormalModeTransform(q.shape[-2])
        propagator = FreeRingPolymerPropagator(transform, beta_n, model.mass, dt)
    p = _kick(model, q, p, 0.5 * dt)
    q, p = propagator.apply(q, p)
    p = _kick(model, q, p, 0.5 * dt)
    return q, p


# Yoshida composition: turns the second-order kick/drift split into a
# fourth-order symplectic step
YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
YOSHIDA_W0 = 1.0 - 2.0 * YOSHIDA_W1


def step_nve_arrays4(model, q, p, beta_n, dt, propagators=None, transform=None):
    """Fourth-order symplectic NVE step (three-fold Yoshida composition)."""
    if propagators is None:
        if transform is None:
            transform = NormalModeTransform(q.shape[-2])
        propagators = tuple(
            FreeRingPolymerPropagator(transform, beta_n, model.mass, w * dt)
            for w in (YOSHIDA_W1, YOSHIDA_W0)
        )
    p1, p0 = propagators
    for w, prop in ((YOSHIDA_W1, p1), (YOSHIDA_W0, p0), (YOSHIDA_W1, p1)):
        p = _kick(model, q, p, 0.5 * w * dt)
        q, p = prop.apply(q, p)
        p = _kick(model, q, p, 0.5 * w * dt)
    return q, p


def step_nve(state: RingPolymerState, dt: float, order: int = 4) -> RingPolymerState:
    """Propagate a single state by one NVE step of size dt (dt may be < 0)."""
    if dt == 0:
        return state.copy()
    step = {2: step_nve_arrays, 4: step_nve_arrays4}[order]
    q, p = step(state.model, state.q, state.p, state.beta_n, dt)
    return replace(state, q=q, p=p)


class PILEThermostat:
    """Path-integral Langevin thermostat (per-mode OU friction).

    Centroid friction gamma_0 = 1/tau0; internal modes gamma_k =
    2*lambda_scale*omega_k.  tau0 = inf together with lambda_scale = 0
    switches the thermostat off.
    """

    def __init__(self, transform, beta_n, mass, dt, tau0, lambda_scale=1.0):
        if tau0 <= 0:
            raise ValueError("tau0 must be positive (use np.inf to disable)")
        w = transform.frequencies(beta_n)
        gamma = 2.0 * lambda_scale * w
        gamma[0] = 0.0 if np.isinf(tau0) else 1.0 / tau0
        c1 = np.exp(-gamma * dt)
        self.transform = transform
        self.c1 = c1[:, None]
        self.c2 = np.sqrt((1.0 - c1**2) * mass / beta_n)[:, None]

    def apply(self, p, rng):
        Xp = self.transform.to_modes_ortho(p)
        noise = rng.standard_normal(Xp.shape)
        Xp = self.c1 * Xp + self.c2 * noise
        return self.transform.from_modes_ortho(Xp)


def thermostat_step(state: RingPolymerState, dt: float, tau0: float,
                    lambda_scale: float, rng) -> RingPolymerState:
    """One BAOAB step of thermostatted (NVT) ring-polymer dynamics."""
    transform = NormalModeTransform(state.n_beads)
    half = FreeRingPolymerPropagator(transform, state.beta_n, state.model.mass,
                                     0.5 * dt)
    ou = PILEThermostat(transform, state.beta_n, state.model.mass, dt, tau0,
                        lambda_scale)
    q, p = state.q, state.p
    p = _kick(state.model, q, p, 0.5 * dt)
    q, p = half.apply(q, p)
    p = ou.apply(p, rng)
    q, p = half.apply(q, p)
    p = _kick(state.model, q, p, 0.5 * dt)
    return replace(state, q=q, p=p)


# ---------------------------------------------------------------------------
# NVT sampling


@dataclass
class Ensemble:
    """A batch of ring-polymer phase points drawn from exp(-beta_N H_N)."""

    q: np.ndarray  # (n_traj, N, d)
    p: np.ndarray
    beta: float
    model: Potential
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def n_traj(self):
        return self.q.shape[0]

    @property
    def n_beads(self):
        return self.q.shape[1]

    @property
    def beta_n(self):
        return self.beta / self.n_beads


DEFAULT_BATCH = 4096


def _batch_rng(seed, batch_index):
    # counter-based streams: reproducible and independent of execution order
    return np.random.Generator(
        np.random.Philox(key=[np.uint64(seed), np.uint64(batch_index)])
    )


def sample_nvt(model, beta, n_beads, n_traj, *, dt=0.01, tau0=0.1,
               lambda_scale=100.0, t_thermalization=50.0, seed=0,
               q0=None, batch_size=DEFAULT_BATCH) -> Ensemble:
    """Draw an NVT ensemble by thermostatted ring-polymer dynamics.

    Trajectories are integrated in fixed-size batches, each driven by its
    own counter-based Philox stream keyed on (seed, batch index), so the
    result is bit-reproducible and independent of scheduling.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    n_beads = int(n_beads)
    d = model.dim
    m = model.mass
    beta_n = beta / n_beads
    transform = NormalModeTransform(n_beads)
    half = FreeRingPolymerPropagator(transform, beta_n, m, 0.5 * dt)
    ou = PILEThermostat(transform, beta_n, m, dt, tau0, lambda_scale)
    n_steps = max(1, int(round(t_thermalization / dt)))
    if q0 is None:
        q0 = np.zeros(d)
    q0 = np.asarray(q0, dtype=float).reshape(d)

    qs = np.empty((n_traj, n_beads, d))
    ps = np.empty((n_traj, n_beads, d))
    n_batches = (n_traj + batch_size - 1) // batch_size
    for b in range(n_batches):
        lo, hi = b * batch_size, min((b + 1) * batch_size, n_traj)
        nb = hi - lo
        rng = _batch_rng(seed, b)
        q = np.tile(q0, (nb, n_beads, 1))
        q += 0.01 * rng.standard_normal(q.shape)
        p = np.sqrt(m / beta_n) * rng.standard_normal(q.shape)
        try:
            for _ in range(n_steps):
                p = _kick(model, q, p, 0.5 * dt)
                q, p = half.apply(q, p)
                p = ou.apply(p, rng)
                q, p = half.apply(q, p)
                p = _kick(model, q, p, 0.5 * dt)
        except TrajectoryError as exc:
            raise TrajectoryError(f"batch {b} (trajectories {lo}:{hi}): {exc}")
        bad = ~np.all(np.isfinite(q.reshape(nb, -1)), axis=1)
        if np.any(bad):
            raise TrajectoryError(
                f"thermalization diverged for trajectories {lo + np.nonzero(bad)[0]}"
            )
        qs[lo:hi] = q
        ps[lo:hi] = p
    meta = dict(dt=dt, tau0=tau0, lambda_scale=lambda_scale,
                t_thermalization=t_thermalization, batch_size=batch_size)
    return Ensemble(qs, ps, beta, model, seed, meta)


# ---------------------------------------------------------------------------
# time correlation functions


def centroid(q):
    """X_0 per dimension: mean over the bead axis."""
    return np.mean(q, axis=-2)


def rpmd_tcf(ensemble: Ensemble, obs_a, obs_b, t_grid, *, dt=0.01,
             batch_size=DEFAULT_BATCH):
    """RPMD correlation function C_AB(t) = <A(0) B(t)> over the ensemble.

    Observables are callables f(p, q) -> (batch,) acting on bead arrays.
    The time grid must be commensurate with dt; negative times are run
    with the time-reversed integrator so detailed balance can be checked
    directly.  Returns (t_grid, values, stderr).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.round(t_grid / dt).astype(int)
    if not np.allclose(steps * dt, t_grid, atol=1e-10):
        raise ValueError("t_grid must be commensurate with dt")
    order = np.argsort(steps)
    model, beta_n = ensemble.model, ensemble.beta_n
    transform = NormalModeTransform(ensemble.n_beads)

    sums = np.zeros(len(t_grid))
    sq_sums = np.zeros(len(t_grid))
    n = ensemble.n_traj
    for lo in range(0, n, batch_size):
        hi = min(lo + batch_size, n)
        q0, p0 = ensemble.q[lo:hi], ensemble.p[lo:hi]
        a0 = np.asarray(obs_a(p0, q0), dtype=float)
        for sign in (1, -1):
            sel = [i for i in order if steps[i] * sign > 0 or steps[i] == 0]
            if sign == -1:
                sel = [i for i in sel if steps[i] != 0][::-1]
            if not sel:
                continue
            prop = FreeRingPolymerPropagator(transform, beta_n, model.mass,
                                             sign * dt)
            q, p = q0.copy(), p0.copy()
            done = 0
            for i in sel:
                target = abs(steps[i])
                for _ in range(target - done):
                    q, p = step_nve_arrays(model, q, p, beta_n, sign * dt,
                                           propagator=prop)
                done = target
                val = a0 * np.asarray(obs_b(p, q), dtype=float)
                sums[i] += val.sum()
                sq_sums[i] += (val * val).sum()
    mean = sums / n
    var = np.maximum(sq_sums / n - mean**2, 0.0)
    stderr = np.sqrt(var / n)
    return t_grid, mean, stderr

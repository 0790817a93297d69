"""Analytic model potentials with exact gradients and Hessians.

Everything is in atomic units (hbar = k_B = 1).  Positions are arrays of
shape (..., d); `value` returns shape (...), `gradient` (..., d) and
`hessian` (..., d, d), so the same call works for a single point, a bead
ring or a whole batch of trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class NoBarrierError(RuntimeError):
    """Raised when a potential has no negative-curvature stationary point."""


@dataclass(frozen=True)
class Potential:
    mass: float = 1.0
    dim: int = field(default=1, init=False)

    def value(self, q):
        raise NotImplementedError

    def gradient(self, q):
        raise NotImplementedError

    def hessian(self, q):
        raise NotImplementedError

    def _check(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape[-1:] != (self.dim,):
            raise ValueError(
                f"position has trailing dimension {q.shape[-1:]}, "
                f"model is {self.dim}-dimensional"
            )
        if not np.all(np.isfinite(q)):
            raise ValueError("non-finite position")
        return q


def _as1d(q):
    return q[..., 0]


@dataclass(frozen=True)
class Harmonic(Potential):
    """V(q) = m omega^2 q^2 / 2."""

    omega: float = 1.0

    def value(self, q):
        s = _as1d(self._check(q))
        return 0.5 * self.mass * self.omega**2 * s**2

    def gradient(self, q):
        q = self._check(q)
        return self.mass * self.omega**2 * q

    def hessian(self, q):
        q = self._check(q)
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = self.mass * self.omega**2
        return h


@dataclass(frozen=True)
class InvertedParabola(Potential):
    """V(q) = -m omega_b^2 q^2 / 2, a pure barrier."""

    omega_b: float = 1.0

    def value(self, q):
        s = _as1d(self._check(q))
        return -0.5 * self.mass * self.omega_b**2 * s**2

    def gradient(self, q):
        q = self._check(q)
        return -self.mass * self.omega_b**2 * q

    def hessian(self, q):
        q = self._check(q)
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = -self.mass * self.omega_b**2
        return h


@dataclass(frozen=True)
class DoubleWell(Potential):
    """V(q) = g q^4 - (lam^2/4) q^2 + lam^4/(64 g).

    Zero-energy minima at q = +-lam/sqrt(8 g), barrier of height
    lam^4/(64 g) at the origin.
    """

    g: float = 0.08
    lam: float = 2.0

    @property
    def barrier_height(self):
        return self.lam**4 / (64.0 * self.g)

    @property
    def half_width(self):
        """Distance from barrier top to either minimum."""
        return self.lam / np.sqrt(8.0 * self.g)

    def value(self, q):
        s = _as1d(self._check(q))
        return self.g * s**4 - 0.25 * self.lam**2 * s**2 + self.barrier_height

    def gradient(self, q):
        q = self._check(q)
        return 4.0 * self.g * q**3 - 0.5 * self.lam**2 * q

    def hessian(self, q):
        q = self._check(q)
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = 12.0 * self.g * q[..., 0] ** 2 - 0.5 * self.lam**2
        return h


@dataclass(frozen=True)
class ScatteringWell(Potential):
    """Double-well barrier cut off at its minima: identical to DoubleWell
    for |q| <= L/2 = lam/sqrt(8 g) and exactly zero outside.

    V and V' are continuous at +-L/2 (the cut sits at the minima); V''
    jumps there.
    """

    g: float = 0.08
    lam: float = 2.0

    @property
    def cutoff(self):
        return self.lam / np.sqrt(8.0 * self.g)

    @property
    def barrier_height(self):
        return self.lam**4 / (64.0 * self.g)

    def _inside(self, s):
        return np.abs(s) <= self.cutoff

    def value(self, q):
        s = _as1d(self._check(q))
        inner = self.g * s**4 - 0.25 * self.lam**2 * s**2 + self.barrier_height
        return np.where(self._inside(s), inner, 0.0)

    def gradient(self, q):
        q = self._check(q)
        s = q[..., 0]
        inner = 4.0 * self.g * s**3 - 0.5 * self.lam**2 * s
        g = np.where(self._inside(s), inner, 0.0)
        return g[..., None]

    def hessian(self, q):
        q = self._check(q)
        s = q[..., 0]
        inner = 12.0 * self.g * s**2 - 0.5 * self.lam**2
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = np.where(self._inside(s), inner, 0.0)
        return h


@dataclass(frozen=True)
class EckartSymmetric(Potential):
    """V(q) = v0 sech^2(q/a).

    There are no default parameters: pass v0 and a explicitly (the common
    literature values are model-specific and not baked in).
    """

    v0: float = None
    a: float = None

    def __post_init__(self):
        if self.v0 is None or self.a is None:
            raise ValueError("EckartSymmetric requires explicit v0 and a")

    def value(self, q):
        s = _as1d(self._check(q))
        return self.v0 / np.cosh(s / self.a) ** 2

    def gradient(self, q):
        q = self._check(q)
        u = q / self.a
        g = -2.0 * self.v0 / self.a * np.tanh(u) / np.cosh(u) ** 2
        return g

    def hessian(self, q):
        q = self._check(q)
        u = q[..., 0] / self.a
        sech2 = 1.0 / np.cosh(u) ** 2
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = 2.0 * self.v0 / self.a**2 * sech2 * (2.0 * np.tanh(u) ** 2 - sech2)
        return h


@dataclass(frozen=True)
class EckartAsymmetric(Potential):
    """V(q) = A y/(1+y) + B y/(1+y)^2 with y = exp(2 q/a).

    V -> 0 as q -> -inf and V -> A as q -> +inf; barrier height above the
    q -> -inf side is (A+B)^2/(4B).  No default parameters.
    """

    A: float = None
    B: float = None
    a: float = None

    def __post_init__(self):
        if self.A is None or self.B is None or self.a is None:
            raise ValueError("EckartAsymmetric requires explicit A, B and a")

    def _z(self, s):
        # z = 1/(1+y), evaluated overflow-free
        return expit(-2.0 * s / self.a)

    def value(self, q):
        s = _as1d(self._check(q))
        z = self._z(s)
        return self.A * (1.0 - z) + self.B * z * (1.0 - z)

    def gradient(self, q):
        q = self._check(q)
        z = self._z(q[..., 0])
        g = 2.0 / self.a * z * (1.0 - z) * (self.A - self.B * (1.0 - 2.0 * z))
        return g[..., None]

    def hessian(self, q):
        q = self._check(q)
        z = self._z(q[..., 0])
        w = 1.0 - 2.0 * z
        h = np.empty(q.shape + (1,))
        h[..., 0, 0] = (
            -4.0 / self.a**2 * z * (1.0 - z)
            * (w * (self.A - self.B * w) + 2.0 * self.B * z * (1.0 - z))
        )
        return h


@dataclass(frozen=True)
class Quartic2D(Potential):
    """V(x, y) = a (x^4 + y^4) + b (x y)^2; no stationary barrier, but
    large regions of negative curvature when b >> a."""

    a: float = 0.1
    b: float = 10.0
    dim: int = field(default=2, init=False)

    def value(self, q):
        q = self._check(q)
        x, y = q[..., 0], q[..., 1]
        return self.a * (x**4 + y**4) + self.b * (x * y) ** 2

    def gradient(self, q):
        q = self._check(q)
        x, y = q[..., 0], q[..., 1]
        g = np.empty_like(q)
        g[..., 0] = 4.0 * self.a * x**3 + 2.0 * self.b * x * y**2
        g[..., 1] = 4.0 * self.a * y**3 + 2.0 * self.b * x**2 * y
        return g

    def hessian(self, q):
        q = self._check(q)
        x, y = q[..., 0], q[..., 1]
        h = np.empty(q.shape + (2,))
        h[..., 0, 0] = 12.0 * self.a * x**2 + 2.0 * self.b * y**2
        h[..., 1, 1] = 12.0 * self.a * y**2 + 2.0 * self.b * x**2
        h[..., 0, 1] = h[..., 1, 0] = 4.0 * self.b * x * y
        return h


def evaluate(model: Potential, q, order: int = 2):
    """Return (V, grad, hess) up to the requested derivative order.

    Entries beyond `order` are None.  `q` must match the model dimension.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    v = model.value(q)
    g = model.gradient(q) if order >= 1 else None
    h = model.hessian(q) if order >= 2 else None
    return v, g, h


def barrier_frequency(model: Potential, guess=None, tol: float = 1e-12,
                      max_iter: int = 100):
    """Barrier frequency omega_b = sqrt(-V''/m) at the barrier top.

    The barrier is located by Newton iteration on the gradient starting
    from `guess` (default: the origin).  Raises NoBarrierError if the
    iteration does not converge to a stationary point with a negative
    Hessian eigenvalue.
    """
    q, _ = barrier_top(model, guess=guess, tol=tol, max_iter=max_iter)
    h = model.hessian(q[None, :])[0]
    evals = np.linalg.eigvalsh(h)
    if evals[0] >= 0.0:
        raise NoBarrierError(
            f"stationary point at {q} has no negative curvature"
        )
    return float(np.sqrt(-evals[0] / model.mass))


def barrier_top(model: Potential, guess=None, tol: float = 1e-12,
                max_iter: int = 100):
    """Locate a stationary point of V near `guess` by Newton iteration.

    Returns (q, |grad|).  Raises NoBarrierError on non-convergence or a
    singular Hessian (e.g. the flat origin of the 2D quartic model).
    """
    if guess is None:
        q = np.zeros(model.dim)
    else:
        q = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    for _ in range(max_iter):
        g = model.gradient(q[None, :])[0]
        gn = np.linalg.norm(g)
        if gn < tol:
            h = model.hessian(q[None, :])[0]
            if abs(np.linalg.det(h)) < 1e-14:
                raise NoBarrierError("degenerate (flat) stationary point")
            return q, gn
        h = model.hessian(q[None, :])[0]
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError as exc:
            raise NoBarrierError(f"singular Hessian during barrier search: {exc}")
        q = q - step
        if not np.all(np.isfinite(q)):
            raise NoBarrierError("barrier search diverged")
    raise NoBarrierError(f"barrier search did not converge in {max_iter} steps")


_KINDS = {
    "harmonic": Harmonic,
    "inverted_parabola": InvertedParabola,
    "double_well": DoubleWell,
    "scattering_well": ScatteringWell,
    "eckart_symmetric": EckartSymmetric,
    "eckart_asymmetric": EckartAsymmetric,
    "quartic_2d": Quartic2D,
}


def make_potential(cfg: dict) -> Potential:
    """Build a potential from a config mapping.

    Expected keys: kind plus the per-kind parameters, e.g.
    {kind="double_well", g=0.08, lambda=2.0, mass=0.5} or
    {kind="eckart_asymmetric", mass=1.0, eckart_params={A=..., B=..., a=...}}.
    """
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown potential kind {kind!r}; choose from {sorted(_KINDS)}")
    cls = _KINDS[kind]
    kwargs = {}
    if "mass" in cfg:
        kwargs["mass"] = float(cfg.pop("mass"))
    if "lambda" in cfg:
        cfg["lam"] = cfg.pop("lambda")
    eck = cfg.pop("eckart_params", None)
    if eck is not None:
        if kind not in ("eckart_symmetric", "eckart_asymmetric"):
            raise ValueError("eckart_params only applies to Eckart potentials")
        cfg.update(eck)
    if kind in ("eckart_symmetric", "eckart_asymmetric") and not cfg:
        raise ValueError(
            "Eckart potentials have no defaults: pass explicit parameters "
            "(symmetric: v0, a; asymmetric: A, B, a) via eckart_params"
        )
    allowed = {f for f in cls.__dataclass_fields__ if f not in ("dim",)}
    unknown = set(cfg) - allowed
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for potential {kind!r}")
    for k, v in cfg.items():
        kwargs[k] = float(v)
    return cls(**kwargs)

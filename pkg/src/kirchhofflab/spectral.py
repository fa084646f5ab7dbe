"""Discrete spectral universe: mode bases, states, norms and energies.

All dynamics in this package are diagonal in the eigenbasis of the Dirichlet
Laplacian, so a field is represented by its coefficient sequence against an
orthonormal eigenbasis.  Every norm and energy below is a plain weighted sum
over modes (Parseval, no extra normalisation factors).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RangeOverflowError

# Largest natural log whose exp is representable in a double.
_LOG_MAX = math.log(np.finfo(float).max)

BASIS_KINDS = ("interval-dirichlet", "torus")


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Finite family of Laplacian eigenmodes identified by their frequencies.

    ``frequencies`` holds mu_k > 0, strictly increasing; ``eigenvalues`` are
    exactly mu_k**2.  For the Dirichlet interval (0, pi) the frequencies are
    the integers 1..N; the torus basis keeps one real eigenfunction per
    positive integer frequency.
    """

    kind: str
    frequencies: np.ndarray
    eigenvalues: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        mu = _readonly(self.frequencies)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("frequencies must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(mu)) or mu[0] <= 0.0:
            raise ValueError("frequencies must be finite and positive")
        if np.any(np.diff(mu) <= 0.0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", mu)
        object.__setattr__(self, "eigenvalues", _readonly(mu * mu))

    @property
    def count(self) -> int:
        return self.frequencies.size

    @classmethod
    def interval_dirichlet(cls, count: int) -> "ModeBasis":
        """Sine eigenbasis of -d^2/dx^2 on (0, pi) with zero boundary values."""
        if count < 1:
            raise ValueError("count must be a positive integer")
        return cls("interval-dirichlet", np.arange(1, count + 1, dtype=float))

    @classmethod
    def torus(cls, count: int) -> "ModeBasis":
        """One real eigenfunction per positive integer frequency on the circle."""
        if count < 1:
            raise ValueError("count must be a positive integer")
        return cls("torus", np.arange(1, count + 1, dtype=float))


def same_basis(a: ModeBasis, b: ModeBasis) -> bool:
    return a is b or (a.kind == b.kind and np.array_equal(a.frequencies, b.frequencies))


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Coefficients of a field and its time derivative at one instant."""

    basis: ModeBasis
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = _readonly(self.position)
        vel = _readonly(self.velocity)
        n = self.basis.count
        if pos.shape != (n,) or vel.shape != (n,):
            raise ValueError(
                f"state length mismatch: basis has {n} modes, "
                f"got position {pos.shape} and velocity {vel.shape}"
            )
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("state coefficients must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    @classmethod
    def zero(cls, basis: ModeBasis) -> "SpectralState":
        z = np.zeros(basis.count)
        return cls(basis, z, z.copy())


@dataclass(frozen=True)
class GevreyParams:
    """Order s > 1 and radius eta > 0 of an exponentially weighted mode norm."""

    s: float
    eta: float

    def __post_init__(self):
        if not self.s > 1.0:
            raise ValueError(f"Gevrey order must satisfy s > 1, got {self.s}")
        if not self.eta > 0.0:
            raise ValueError(f"Gevrey radius must be positive, got {self.eta}")


def sobolev_norm(coeffs, basis: ModeBasis, sigma: float) -> float:
    """Homogeneous Sobolev norm sqrt(sum_k mu_k^(2*sigma) c_k^2).

    ``sigma = 0`` reduces to the Euclidean norm of the coefficients.
    """
    c = _as_coeffs(coeffs, basis)
    return float(np.sqrt(np.sum(basis.frequencies ** (2.0 * sigma) * c * c)))


def gevrey_norm(coeffs, basis: ModeBasis, gp: GevreyParams, sigma: float = 0.0) -> float:
    """Exponentially weighted norm sqrt(sum_k e^(eta*mu_k^(1/s)) mu_k^(2*sigma) c_k^2).

    Computed in log space so that huge weights paired with tiny coefficients
    do not overflow spuriously; raises :class:`RangeOverflowError` only when
    the norm itself exceeds the double range.
    """
    c = _as_coeffs(coeffs, basis)
    nz = c != 0.0
    if not nz.any():
        return 0.0
    mu = basis.frequencies[nz]
    log_terms = (
        gp.eta * mu ** (1.0 / gp.s)
        + 2.0 * sigma * np.log(mu)
        + 2.0 * np.log(np.abs(c[nz]))
    )
    top = float(log_terms.max())
    log_sq = top + math.log(float(np.sum(np.exp(log_terms - top))))
    if log_sq > 2.0 * _LOG_MAX:
        raise RangeOverflowError(
            f"weighted norm overflows double range (log value {0.5 * log_sq:.6g})",
            log_value=0.5 * log_sq,
        )
    return math.exp(0.5 * log_sq)


def dirichlet_energy(state: SpectralState) -> float:
    """Squared gradient norm sum_k lambda_k v_k^2 (the nonlocal coefficient's integrand)."""
    v = state.position
    return float(np.sum(state.basis.eigenvalues * v * v))


def hamiltonian(state: SpectralState) -> float:
    """Conserved energy (D + V)/2 + D^2/4 with D the Dirichlet energy, V the kinetic term."""
    d = dirichlet_energy(state)
    vdot = state.velocity
    v = float(np.sum(vdot * vdot))
    return 0.5 * (d + v) + 0.25 * d * d


def state_gevrey_norm(state: SpectralState, gp: GevreyParams) -> float:
    """Product norm sqrt(sum_k e^(eta*mu^(1/s)) (mu^3 v_k^2 + mu vdot_k^2)).

    This is the well-posedness norm of the pair (u, du/dt): position measured
    at order 3/2, velocity at order 1/2.
    """
    p = gevrey_norm(state.position, state.basis, gp, sigma=1.5)
    q = gevrey_norm(state.velocity, state.basis, gp, sigma=0.5)
    return math.hypot(p, q)


def _as_coeffs(coeffs, basis: ModeBasis) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.count,):
        raise ValueError(
            f"coefficient length mismatch: basis has {basis.count} modes, got shape {c.shape}"
        )
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite")
    return c


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-indexed coefficient history of a field and its time derivative.

    ``position`` and ``velocity`` have shape (modes, times); column i is the
    state at ``times[i]``.
    """

    basis: ModeBasis
    times: np.ndarray
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        t = _readonly(self.times)
        pos = _readonly(self.position)
        vel = _readonly(self.velocity)
        n, m = self.basis.count, t.size
        if t.ndim != 1 or m < 1 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if pos.shape != (n, m) or vel.shape != (n, m):
            raise ValueError(
                f"trajectory shape mismatch: expected ({n}, {m}), "
                f"got {pos.shape} and {vel.shape}"
            )
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("trajectory entries must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)

    def state_at(self, i: int) -> SpectralState:
        return SpectralState(self.basis, self.position[:, i], self.velocity[:, i])

    def dirichlet_series(self) -> np.ndarray:
        lam = self.basis.eigenvalues
        return lam @ (self.position * self.position)

    def hamiltonian_series(self) -> np.ndarray:
        d = self.dirichlet_series()
        v = np.sum(self.velocity * self.velocity, axis=0)
        return 0.5 * (d + v) + 0.25 * d * d

    def induced_speed_series(self) -> np.ndarray:
        """sqrt(1 + D(t)): the propagation speed the trajectory induces."""
        return np.sqrt(1.0 + self.dirichlet_series())

    def state_gevrey_series(self, gp: GevreyParams) -> np.ndarray:
        return np.array(
            [state_gevrey_norm(self.state_at(i), gp) for i in range(self.times.size)]
        )

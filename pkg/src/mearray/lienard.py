"""Exact field of a moving point charge from retarded potentials.

Used as an independent check on :mod:`mearray.fieldcore`; it evaluates one
charge on an analytically specified path, without the centroid or phasor
shortcuts of the array model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateGeometryError, LowVelocityWarning, SolverError, ValidationError
from .fieldcore import VACUUM, MediumConstants, as_vec3

Vec3Fn = Callable[[float], np.ndarray]

MAX_ITER = 200
LOW_VELOCITY_BETA = 0.01


@dataclass(frozen=True)
class ChargeTrajectory:
    """Closed-form path of a point charge.

    ``max_speed`` and ``excursion`` are optional bounds on |v| and on the
    distance from the path's reference point; the solver uses them for its
    bisection bracket and the low-velocity check.
    """

    position: Vec3Fn
    velocity: Vec3Fn
    acceleration: Vec3Fn
    charge: float = 1.0
    mass: float = 1.0
    max_speed: float | None = None
    excursion: float = 0.0


@dataclass(frozen=True)
class LWFieldSample:
    e_field: np.ndarray
    t_retarded: float
    coulomb_part: np.ndarray
    acceleration_part: np.ndarray


def static_charge(position, charge=1.0, mass=1.0) -> ChargeTrajectory:
    p = as_vec3(position, "position").copy()
    zero = np.zeros(3)
    return ChargeTrajectory(
        lambda t: p, lambda t: zero, lambda t: zero, charge, mass, max_speed=0.0
    )


def uniform_motion(start, velocity, charge=1.0, mass=1.0) -> ChargeTrajectory:
    p0 = as_vec3(start, "start").copy()
    v = as_vec3(velocity, "velocity").copy()
    zero = np.zeros(3)
    return ChargeTrajectory(
        lambda t: p0 + v * t,
        lambda t: v,
        lambda t: zero,
        charge,
        mass,
        max_speed=float(np.linalg.norm(v)),
    )


def harmonic_drive(center, force, omega, phase=0.0, charge=1.0, mass=1.0) -> ChargeTrajectory:
    """Charge driven by the real part of ``force * exp(i (phase - omega t))``.

    Newton's law gives acceleration ``Re[(F/m) e^{i(phase - omega t)}]``; the
    matching position oscillates about ``center`` with amplitude |F|/(m omega^2).
    """
    y0 = as_vec3(center, "center").copy()
    f = np.asarray(force, dtype=complex)
    if f.shape != (3,):
        raise ValidationError("force must have 3 components")
    if omega <= 0 or mass == 0:
        raise ValidationError("omega must be positive and mass non-zero")
    acc_amp = f / mass
    vel_amp = 1j * acc_amp / omega
    pos_amp = -acc_amp / omega**2

    def carrier(t):
        return np.exp(1j * (phase - omega * t))

    fnorm = float(np.linalg.norm(acc_amp))
    return ChargeTrajectory(
        position=lambda t: y0 + (pos_amp * carrier(t)).real,
        velocity=lambda t: (vel_amp * carrier(t)).real,
        acceleration=lambda t: (acc_amp * carrier(t)).real,
        charge=charge,
        mass=mass,
        max_speed=fnorm / omega,
        excursion=fnorm / omega**2,
    )


def _residual(traj, x, t, s, c):
    return s - t + float(np.linalg.norm(x - traj.position(s))) / c


def retarded_time(traj: ChargeTrajectory, x, t: float, medium: MediumConstants = VACUUM) -> float:
    """Solve ``t_r = t - |x - y(t_r)| / c`` for the emission time."""
    x = as_vec3(x, "x")
    c = medium.c
    if traj.max_speed is not None and traj.max_speed >= c:
        raise SolverError(f"trajectory speed bound {traj.max_speed:g} m/s is not below c")
    tol = 1e-15 * max(1.0, abs(t))

    s = t - float(np.linalg.norm(x - traj.position(t))) / c
    step = math.inf
    for _ in range(MAX_ITER):
        s_new = t - float(np.linalg.norm(x - traj.position(s))) / c
        new_step = abs(s_new - s)
        s = s_new
        if new_step == 0.0 or new_step >= step:
            break
        step = new_step

    if abs(_residual(traj, x, t, s, c)) >= tol:
        s = _bisect(traj, x, t, s, c, tol)
    if s >= t:
        raise DegenerateGeometryError("observation point lies on the charge")
    speed = float(np.linalg.norm(traj.velocity(s)))
    if speed >= c:
        raise SolverError(f"charge speed {speed:g} m/s at retarded time is not below c")
    return s


def _bisect(traj, x, t, s0, c, tol):
    # g(s) = s - t + |x - y(s)|/c is strictly increasing for subluminal paths
    hi = t
    if _residual(traj, x, t, hi, c) < 0:
        raise SolverError("residual negative at s = t; trajectory is not causal")
    width = max(2.0 * traj.excursion / c, abs(t - s0) * 1e-9, 1e-30)
    lo = s0 - width
    for _ in range(MAX_ITER):
        if _residual(traj, x, t, lo, c) < 0:
            break
        width *= 2.0
        lo = s0 - width
    else:
        raise SolverError("could not bracket the retarded time")
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _residual(traj, x, t, mid, c) < 0:
            lo = mid
        else:
            hi = mid
    s = hi if abs(_residual(traj, x, t, hi, c)) <= abs(_residual(traj, x, t, lo, c)) else lo
    if abs(_residual(traj, x, t, s, c)) >= tol:
        raise SolverError(f"retarded time did not converge after {MAX_ITER} iterations")
    return s


def lw_field_full(
    traj: ChargeTrajectory, x, t: float, medium: MediumConstants = VACUUM
) -> LWFieldSample:
    """Velocity (1/r^2) and acceleration (1/r) field terms at the retarded time."""
    x = as_vec3(x, "x")
    c = medium.c
    tr = retarded_time(traj, x, t, medium)
    rel = x - traj.position(tr)
    r = float(np.linalg.norm(rel))
    n = rel / r
    beta = np.asarray(traj.velocity(tr), dtype=float) / c
    beta_dot = np.asarray(traj.acceleration(tr), dtype=float) / c
    k = traj.charge / (4 * np.pi * medium.eps0)
    kappa = 1.0 - float(np.dot(n, beta))
    gamma_sq_inv = 1.0 - float(np.dot(beta, beta))
    coulomb = k * (n - beta) * gamma_sq_inv / (kappa**3 * r * r)
    accel = k * np.cross(n, np.cross(n - beta, beta_dot)) / (c * kappa**3 * r)
    return LWFieldSample(coulomb + accel, tr, coulomb, accel)


def lw_field_lowvel(
    traj: ChargeTrajectory, x, t: float, medium: MediumConstants = VACUUM
) -> np.ndarray:
    """Radiation term for |beta| << 1; the Coulomb term is dropped."""
    x = as_vec3(x, "x")
    c = medium.c
    tr = retarded_time(traj, x, t, medium)
    speed = traj.max_speed
    if speed is None:
        speed = float(np.linalg.norm(traj.velocity(tr)))
    if speed / c >= LOW_VELOCITY_BETA:
        warnings.warn(
            f"beta = {speed / c:.3g} exceeds {LOW_VELOCITY_BETA}; low-velocity field is inaccurate",
            LowVelocityWarning,
            stacklevel=2,
        )
    rel = x - traj.position(tr)
    r = float(np.linalg.norm(rel))
    n = rel / r
    a = np.asarray(traj.acceleration(tr), dtype=float)
    a_perp = a - np.dot(n, a) * n
    return -traj.charge / (4 * np.pi * medium.eps0 * c * c) * a_perp / r


def field_constant(charge: float, mass: float, medium: MediumConstants = VACUUM) -> float:
    """``k_el`` matching a charge/mass pair: -q / (4 pi eps0 c^2 m)."""
    return -charge / (4 * np.pi * medium.eps0 * medium.c**2 * mass)

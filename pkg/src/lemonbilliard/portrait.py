"""Phase portraits of the billiard map restricted to the right arc.

Initial conditions come from numpy's PCG64 generator seeded with the user
seed, drawn uniformly in phi in (-phi_a, phi_a) on the right arc and theta
in (0, pi).  Draws are consumed in a fixed order (phi then theta, one
trajectory at a time), so a seed gives the same portrait on any platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .billiard_core import billiard_step
from .errors import DomainError, LemonError
from .geometry import Arc, AngularState, Table
from .periodic import orbit_elliptic6


@dataclass
class Trajectory:
    traj_id: int
    steps: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    corner_hit: bool


def initial_conditions(t: Table, n: int, seed: int) -> list[AngularState]:
    rng = np.random.Generator(np.random.PCG64(seed))
    pa = t.corner_angle
    out = []
    for _ in range(n):
        phi = float(rng.uniform(-pa, pa))
        theta = float(rng.uniform(0.0, math.pi))
        out.append(AngularState(Arc.RIGHT, phi, theta))
    return out


def run_trajectory(t: Table, x: AngularState, iterations: int, traj_id: int = 0) -> Trajectory:
    """Iterate and keep right-arc samples; a corner hit ends the run early."""
    ks, ph, th = [], [], []
    hit = False
    for k in range(iterations + 1):
        if x.arc == Arc.RIGHT:
            ks.append(k)
            ph.append(x.phi)
            th.append(x.theta)
        if k == iterations:
            break
        try:
            x = billiard_step(t, x).end
        except LemonError:
            hit = True
            break
    return Trajectory(traj_id, np.array(ks, dtype=int), np.array(ph), np.array(th), hit)


def phase_portrait(b: float, n_traj: int, iterations: int, seed: int) -> list[Trajectory]:
    if n_traj < 1 or iterations < 0:
        raise DomainError("need at least one trajectory and iterations >= 0")
    t = Table(b)
    return [run_trajectory(t, x, iterations, i)
            for i, x in enumerate(initial_conditions(t, n_traj, seed))]


def island_centres(t: Table) -> np.ndarray:
    """(phi, theta) of the elliptic period-6 points on the right arc."""
    pts = orbit_elliptic6(t).points_angular
    return np.array([[p.phi, p.theta] for p in pts if p.arc == Arc.RIGHT])


def island_confined(tr: Trajectory, centres: np.ndarray, radius: float = 0.25) -> bool:
    """True when every sample stays within ``radius`` of a centre and all centres are visited."""
    if tr.corner_hit or len(tr.phi) < 2 * len(centres):
        return False
    p = np.column_stack([tr.phi, tr.theta])
    d = np.linalg.norm(p[:, None, :] - centres[None, :, :], axis=2)
    near = np.argmin(d, axis=1)
    return bool(d.min(axis=1).max() < radius and len(set(near.tolist())) == len(centres))

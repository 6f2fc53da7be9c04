"""Independent reference implementations used by the tests."""

import math
from itertools import product

import numpy as np

from flapplan.dynamics import integrate, DynamicsError
from flapplan.energy import maneuver_energy
from flapplan.trajectory import acceptance_radius, goal_distance

EULER_GAMMA = 0.5772156649015329


def _series_j(n, x, terms=60):
    return math.fsum((-1) ** m * (x / 2) ** (2 * m + n) / (math.factorial(m) * math.factorial(m + n))
                     for m in range(terms))


def _harmonic(m):
    return math.fsum(1.0 / i for i in range(1, m + 1))


def bessel_series(x, terms=60):
    """(J0, J1, Y0, Y1) from their ascending power series."""
    j0 = _series_j(0, x, terms)
    j1 = _series_j(1, x, terms)
    half = x / 2
    log_term = math.log(half) + EULER_GAMMA
    y0 = (2 / math.pi) * (log_term * j0 + math.fsum(
        (-1) ** (m + 1) * _harmonic(m) * half ** (2 * m) / math.factorial(m) ** 2
        for m in range(1, terms)))
    y1 = (-2 / (math.pi * x) + (2 / math.pi) * math.log(half) * j1
          - (1 / math.pi) * math.fsum(
              (-1) ** m * ((-EULER_GAMMA + _harmonic(m)) + (-EULER_GAMMA + _harmonic(m + 1)))
              * half ** (2 * m + 1) / (math.factorial(m) * math.factorial(m + 1))
              for m in range(terms)))
    return j0, j1, y0, y1


def theodorsen_series(k):
    j0, j1, y0, y1 = bessel_series(k)
    h0 = complex(j0, -y0)
    h1 = complex(j1, -y1)
    c = h1 / (h1 + 1j * h0)
    return c.real, c.imag


def curve_distance_bruteforce(curve, point, samples=1_000_000):
    xs = np.linspace(curve.x0, curve.xf, samples)
    zs = curve.z0 + curve.offset(xs)
    return float(np.sqrt(np.min((xs - point[0]) ** 2 + (zs - point[1]) ** 2)))


def exhaustive_best_energy(s0, sf, maneuvers, t_s, depth, tolerance, metric, params, scales,
                           energy_model=None, require_forward=True):
    """Minimum energy over every maneuver sequence of length <= depth.

    Branches stop when the vehicle passes the target along X, fails to
    advance, or the integration fails. Returns (energy, sequence) or
    (inf, None).
    """
    kw = {} if energy_model is None else {"model": energy_model}
    radius = acceptance_radius(tolerance, metric)
    best = (math.inf, None)
    frontier = [(s0, 0.0, ())]
    for _ in range(depth):
        nxt = []
        for state, energy, seq in frontier:
            for m in maneuvers:
                try:
                    s1 = integrate(state, m, t_s, params, scales)
                except DynamicsError:
                    continue
                if s1.x > sf.x or (require_forward and s1.x <= state.x):
                    continue
                e1 = energy + maneuver_energy(m, t_s, **kw)
                if goal_distance(s1, sf, metric, scales) <= radius and e1 < best[0]:
                    best = (e1, seq + (m,))
                nxt.append((s1, e1, seq + (m,)))
        frontier = nxt
    return best


def all_sequences(maneuvers, depth):
    for d in range(1, depth + 1):
        yield from product(maneuvers, repeat=d)

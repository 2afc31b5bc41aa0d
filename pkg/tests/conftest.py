"""Shared helpers for the test suite."""

import math

import numpy as np

from flowhar.attitude import G0


def rot_x(deg):
    a = math.radians(deg)
    return np.array(
        [[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]]
    )


def rot_y(deg):
    a = math.radians(deg)
    return np.array(
        [[math.cos(a), 0, math.sin(a)], [0, 1, 0], [-math.sin(a), 0, math.cos(a)]]
    )


def rot_z(deg):
    a = math.radians(deg)
    return np.array(
        [[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]]
    )


def random_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def quat_to_matrix(q):
    """Independent quaternion -> rotation matrix (textbook formula)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def static_stream(q, n, inclination_deg=60.0):
    """Noiseless static 9-axis stream for a sensor at attitude q (body->NED)."""
    m = quat_to_matrix(q)
    inc = math.radians(inclination_deg)
    b_ned = np.array([math.cos(inc), 0.0, math.sin(inc)])
    accel = m.T @ np.array([0.0, 0.0, -G0])
    mag = m.T @ b_ned
    row = np.concatenate([accel, mag, np.zeros(3)])
    return np.tile(row, (n, 1))


def attitude_error_deg(qa, qb):
    d = abs(float(np.dot(qa, qb)))
    return math.degrees(2.0 * math.acos(min(1.0, d)))


def fd_grad(f, x, eps=1e-6):
    """Central finite-difference gradient of scalar f at float64 array x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * eps)
    return g


def max_rel_err(analytic, numeric, floor=1e-8):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))

"""Fixed-step RK4 kernels for the matrix ODE dPhi/dt = A(t) Phi.

The coefficient matrix is sampled up front at the RK4 nodes t0 + j*h/2,
j = 0..2*steps, so the stepping loop never calls back into Python.  The
jitted kernels are used unless numba is missing or LPTV_NO_NUMBA=1.
"""

from __future__ import annotations

import os

import numpy as np


def _rk4_numpy(nodes, h, phi0):
    phi = phi0.copy()
    steps = (nodes.shape[0] - 1) // 2
    half = 0.5 * h
    for j in range(steps):
        a0 = nodes[2 * j]
        am = nodes[2 * j + 1]
        a1 = nodes[2 * j + 2]
        k1 = a0 @ phi
        k2 = am @ (phi + half * k1)
        k3 = am @ (phi + half * k2)
        k4 = a1 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def _rk4_path_numpy(nodes, h, phi0):
    steps = (nodes.shape[0] - 1) // 2
    out = np.empty((steps + 1,) + phi0.shape)
    out[0] = phi0
    phi = phi0.copy()
    half = 0.5 * h
    for j in range(steps):
        a0 = nodes[2 * j]
        am = nodes[2 * j + 1]
        a1 = nodes[2 * j + 2]
        k1 = a0 @ phi
        k2 = am @ (phi + half * k1)
        k3 = am @ (phi + half * k2)
        k4 = a1 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j + 1] = phi
    return out


def _want_numba() -> bool:
    return os.environ.get("LPTV_NO_NUMBA", "") not in ("1", "true", "yes")


BACKEND = "numpy"
rk4 = _rk4_numpy
rk4_path = _rk4_path_numpy

if _want_numba():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
    if njit is not None:

        @njit(cache=True)
        def _matmul(a, b):
            n, m, k = a.shape[0], b.shape[1], a.shape[1]
            out = np.zeros((n, m))
            for i in range(n):
                for q in range(k):
                    aiq = a[i, q]
                    if aiq != 0.0:
                        for j in range(m):
                            out[i, j] += aiq * b[q, j]
            return out

        @njit(cache=True)
        def _step(a0, am, a1, phi, h):
            half = 0.5 * h
            k1 = _matmul(a0, phi)
            k2 = _matmul(am, phi + half * k1)
            k3 = _matmul(am, phi + half * k2)
            k4 = _matmul(a1, phi + h * k3)
            return phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        @njit(cache=True)
        def _rk4_numba(nodes, h, phi0):
            phi = phi0.copy()
            steps = (nodes.shape[0] - 1) // 2
            for j in range(steps):
                phi = _step(nodes[2 * j], nodes[2 * j + 1], nodes[2 * j + 2], phi, h)
            return phi

        @njit(cache=True)
        def _rk4_path_numba(nodes, h, phi0):
            steps = (nodes.shape[0] - 1) // 2
            out = np.empty((steps + 1, phi0.shape[0], phi0.shape[1]))
            out[0] = phi0
            phi = phi0.copy()
            for j in range(steps):
                phi = _step(nodes[2 * j], nodes[2 * j + 1], nodes[2 * j + 2], phi, h)
                out[j + 1] = phi
            return out

        BACKEND = "numba"
        rk4 = _rk4_numba
        rk4_path = _rk4_path_numba


def integrate_nodes(nodes: np.ndarray, h: float, phi0: np.ndarray | None = None, path: bool = False):
    """Run RK4 over pre-sampled nodes (shape (2*steps+1, n, n))."""
    nodes = np.ascontiguousarray(nodes, dtype=float)
    n = nodes.shape[1]
    if phi0 is None:
        phi0 = np.eye(n)
    phi0 = np.ascontiguousarray(phi0, dtype=float)
    if path:
        return rk4_path(nodes, float(h), phi0)
    return rk4(nodes, float(h), phi0)

"""Numpy implementations of the numeric kernels.

These are the reference versions; ``_kernels`` (Cython) mirrors them loop for
loop and is preferred when it was compiled.
"""

import numpy as np


def eval_terms(ks, ps, ns, ss, cs, r, theta):
    """sum_t c_t r^k_t (ln r)^p_t trig(n_t theta) at each (r, theta) pair."""
    r = np.asarray(r, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    out = np.zeros_like(r)
    logr = np.log(r)
    for k, p, n, s, c in zip(ks, ps, ns, ss, cs):
        ang = np.sin(n * theta) if s else np.cos(n * theta)
        out += c * r ** float(k) * logr**p * ang
    return out


def eval_poly(exps_a, exps_b, coeffs, x, y):
    """sum_j c_j x^a_j y^b_j elementwise."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros(np.broadcast(x, y).shape)
    for a, b, c in zip(exps_a, exps_b, coeffs):
        out += c * x**a * y**b
    return out


def radial_panel_sums(a, p, nodes, weights, values, panel_index, n_panels):
    """Per-panel sums of w * r^a (ln r)^p * values over radial nodes."""
    contrib = weights * nodes**float(a) * np.log(nodes) ** p * values
    out = np.zeros(n_panels)
    np.add.at(out, panel_index, contrib)
    return out

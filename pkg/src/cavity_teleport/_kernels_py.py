"""Pure numpy versions of the state-vector kernels.

Same contracts as the compiled module: site 0 is the most significant bit of
the basis index and every function returns a new array.
"""
import numpy as np

BACKEND = "numpy"


def _move(amps, n, sites):
    t = np.asarray(amps).reshape((2,) * n)
    return np.moveaxis(t, list(sites), list(range(len(sites))))


def _apply(amps, n, sites, u):
    k = len(sites)
    t = _move(amps, n, sites)
    shape = t.shape
    t = (np.asarray(u) @ t.reshape(2**k, -1)).reshape(shape)
    return np.ascontiguousarray(np.moveaxis(t, list(range(k)), list(sites))).reshape(-1)


def apply_1q(amps, n, site, u):
    return _apply(amps, n, (site,), u)


def apply_2q(amps, n, site_a, site_b, u):
    return _apply(amps, n, (site_a, site_b), u)


def marginal(amps, n, sites):
    t = _move(amps, n, sites)
    k = len(sites)
    return np.sum(np.abs(t.reshape(2**k, -1)) ** 2, axis=1)


def project(amps, n, sites, outcome):
    k = len(sites)
    t = _move(amps, n, sites).reshape(2**k, -1)
    out = np.zeros_like(t, dtype=np.complex128)
    out[outcome] = t[outcome]
    norm2 = float(np.sum(np.abs(t[outcome]) ** 2))
    out = out.reshape((2,) * n)
    out = np.moveaxis(out, list(range(k)), list(sites))
    return np.ascontiguousarray(out).reshape(-1), norm2


def select(amps, n, sites, outcome):
    k = len(sites)
    t = _move(amps, n, sites).reshape(2**k, -1)
    return np.ascontiguousarray(t[outcome])

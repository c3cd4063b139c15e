"""Reference computations that share no code with the simulator paths."""
import itertools
import math

import numpy as np

I2 = np.eye(2)
SQ2 = 1 / math.sqrt(2)


def embed(u, sites, n):
    """Dense 2^n operator for ``u`` on ``sites`` (site 0 = most significant bit)."""
    k = len(sites)
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - s)) & 1 for s in range(n)]
        local_in = 0
        for s in sites:
            local_in = local_in * 2 + bits[s]
        for local_out in range(2**k):
            amp = u[local_out, local_in]
            if amp == 0:
                continue
            out = list(bits)
            for j, s in enumerate(sites):
                out[s] = (local_out >> (k - 1 - j)) & 1
            row = int("".join(map(str, out)), 2)
            full[row, col] += amp
    return full


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / abs(np.diag(r)))


def bell_vectors():
    # gg, ge, eg, ee amplitude order
    return {
        "PhiPlus": np.array([1j, 0, 0, 1]) * SQ2,
        "PhiMinus": np.array([-1j, 0, 0, 1]) * SQ2,
        "PsiPlus": np.array([0, 1, 1j, 0]) * SQ2,
        "PsiMinus": np.array([0, 1, -1j, 0]) * SQ2,
    }


def wootters_from_density(rho):
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(r))))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def ghz_register(a, b, channel_vectors):
    """Full register in atom order 1..3n for GHZ input and channels on (n+j, 2n+j)."""
    n = len(channel_vectors)
    ghz = np.zeros(2**n, dtype=complex)
    ghz[-1], ghz[0] = a, b
    t = ghz.reshape((2,) * n)
    for v in channel_vectors:
        t = np.multiply.outer(t, np.asarray(v).reshape(2, 2))
    # axes now: inputs 0..n-1, then (sender_j, receiver_j) pairs
    order = list(range(n))
    order += [n + 2 * j for j in range(n)]
    order += [n + 2 * j + 1 for j in range(n)]
    return np.transpose(t, order).reshape(-1)


def bell_projected_residual(full, n, kinds):
    """Unnormalized receiver vector after projecting pairs (j, n+j) onto Bell states."""
    bells = bell_vectors()
    t = full.reshape((2,) * (3 * n))
    order = [ax for j in range(n) for ax in (j, n + j)] + list(range(2 * n, 3 * n))
    m = np.transpose(t, order).reshape(4**n, 2**n)
    bra = np.ones(1, dtype=complex)
    for kind in kinds:
        bra = np.kron(bra, bells[kind].conj())
    return bra @ m


def filtered_success_probability(channel_vectors):
    """Post-selected success summed over Bell branches.

    For each branch the receiver residual is computed separately for the
    pure ``a`` and pure ``b`` inputs; an ideal amplitude filter keeps the
    smaller of the two norms, so the branch contributes ``min(|r_a|, |r_b|)**2``.
    """
    n = len(channel_vectors)
    total = 0.0
    for kinds in itertools.product(bell_vectors(), repeat=n):
        ra = bell_projected_residual(ghz_register(1, 0, channel_vectors), n, kinds)
        rb = bell_projected_residual(ghz_register(0, 1, channel_vectors), n, kinds)
        total += min(np.linalg.norm(ra), np.linalg.norm(rb)) ** 2
    return total

import math

import numpy as np

from cqwalk import ExperimentConfig
from cqwalk.idealwalk import coin_matrix

INF = math.inf


def zero_noise_config(**overrides) -> ExperimentConfig:
    """Config with every decoherence channel switched off."""
    base = dict(t1_cavity_us=INF, t1_ge_us=INF, t1_ef_us=INF,
                t1_gf_us=INF, tphi_e_us=INF, tphi_f_us=INF)
    base.update(overrides)
    return ExperimentConfig(**base)


def brute_force_walk(n, theta, coin):
    """Independent walk oracle: dense (shift @ (I x C))^n product.

    Sites and coin live in one 2(n+1)-dim vector; no amplitude-array
    shortcuts shared with the package implementation.
    """
    sites = n + 1
    dim = 2 * sites
    c = coin_matrix(theta)
    coin_op = np.kron(np.eye(sites), c)
    shift = np.zeros((dim, dim))
    for x in range(sites):
        shift[2 * x, 2 * x] = 1.0                    # coin 0 stays
        if x + 1 < sites:
            shift[2 * (x + 1) + 1, 2 * x + 1] = 1.0  # coin 1 hops right
    u = np.linalg.matrix_power(shift @ coin_op, n)
    psi = np.zeros(dim, dtype=complex)
    psi[0], psi[1] = coin.c0, coin.c1
    out = u @ psi
    return np.abs(out[0::2]) ** 2 + np.abs(out[1::2]) ** 2

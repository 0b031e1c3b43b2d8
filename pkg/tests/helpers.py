"""Shared generators and oracles for the test suite."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from priorsid import (
    FirstOrder,
    Integrator,
    IntegratorFirstOrder,
    SecondOrderOsc,
    StateSpaceModel,
    TwoTimeConstants,
    block_hankel,
    markov_sequence,
)


def random_stable_model(rng, n=None, n_u=None, n_y=None, rho=None, Ts=1.0):
    """Random stable model; eigenvalues rescaled to a target spectral radius."""
    if n is None:
        n = int(rng.integers(1, 7))
    if n_u is None:
        n_u = int(rng.integers(1, 4))
    if n_y is None:
        n_y = int(rng.integers(1, 4))
    if rho is None:
        rho = float(rng.uniform(0.3, 0.9))
    while True:
        A = rng.standard_normal((n, n))
        radius = np.max(np.abs(np.linalg.eigvals(A)))
        if radius > 1e-12:
            break
    A = A * (rho / radius)
    return StateSpaceModel(
        A=A,
        B=rng.standard_normal((n, n_u)),
        C=rng.standard_normal((n_y, n)),
        D=rng.standard_normal((n_y, n_u)),
        Ts=Ts,
    )


def random_minimal_model(rng, n_max=4, sv_floor=1e-6):
    """Random stable model whose Hankel singular values separate cleanly.

    Rejection sampling keeps sigma_n / sigma_1 >= sv_floor so the automatic
    order rule has a gap of at least 1e6 over the numerically zero tail.
    """
    while True:
        n = int(rng.integers(1, n_max + 1))
        model = random_stable_model(
            rng, n=n, n_u=int(rng.integers(1, 3)), n_y=int(rng.integers(1, 3))
        )
        q = p = n + 2
        seq = markov_sequence(model, q + p)
        s = np.linalg.svd(block_hankel(seq, q, p), compute_uv=False)
        if s[0] <= 0:
            continue
        tail_ok = len(s) <= n or s[n] / s[0] <= 1e-12
        if s[n - 1] / s[0] >= sv_floor and tail_ok:
            return model


def well_conditioned_transform(rng, n):
    """Random n x n transform with condition number at most 4."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q1 @ np.diag(rng.uniform(0.5, 2.0, n)) @ q2


def eig_multiset_distance(A, B):
    """Largest pairwise gap of the two eigenvalue multisets under optimal matching."""
    ea = np.linalg.eigvals(A) if A.size else np.zeros(0, dtype=complex)
    eb = np.linalg.eigvals(B) if B.size else np.zeros(0, dtype=complex)
    if ea.shape != eb.shape:
        return np.inf
    if ea.size == 0:
        return 0.0
    cost = np.abs(ea[:, None] - eb[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def random_prototype(rng, kind=None):
    """Random prototype model with sane parameter ranges."""
    if kind is None:
        kind = rng.integers(0, 5)
    K = float(rng.uniform(0.5, 3.0))
    if kind == 0:
        return Integrator(K=K)
    if kind == 1:
        return FirstOrder(K=K, tau=float(rng.uniform(0.5, 20.0)))
    if kind == 2:
        return IntegratorFirstOrder(K=K, tau=float(rng.uniform(0.5, 20.0)))
    if kind == 3:
        tau1 = float(rng.uniform(0.5, 10.0))
        return TwoTimeConstants(K=K, tau1=tau1, tau2=tau1 * float(rng.uniform(1.5, 3.0)))
    return SecondOrderOsc(
        K=K, omega0=float(rng.uniform(0.3, 3.0)), xi=float(rng.uniform(0.1, 0.9))
    )

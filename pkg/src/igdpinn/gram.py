"""Gram matrices G = D^T D, their spectra, and Monte-Carlo estimates of E[G(0)]."""

import numpy as np

from .errors import InvalidInputError
from .model import init_network
from .residual import Collocation

# above this size the LAPACK path is used unless the caller asks for Jacobi
JACOBI_MAX_N = 256
SYMMETRY_TOL = 1e-10


def gram(D):
    """Exact ``D^T D``, symmetrized."""
    D = np.asarray(D, dtype=float)
    G = D.T @ D
    return 0.5 * (G + G.T)


def _round_robin(n):
    """Disjoint index pairs for each round of a parallel Jacobi sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    N = len(players)
    rounds = []
    for _ in range(N - 1):
        top, bottom = players[: N // 2], players[N // 2:][::-1]
        pairs = [(p, q) for p, q in zip(top, bottom) if p >= 0 and q >= 0]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigvalsh(A, max_sweeps=60):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, so every round annihilates
    ``n // 2`` disjoint off-diagonal pairs at once.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return A.diagonal().copy()
    rounds = _round_robin(n)
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n)
    prev_off = np.inf
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(A.diagonal() ** 2), 0.0))
        if off <= 1e-15 * scale or off >= prev_off:
            break
        prev_off = off
        for p, q in rounds:
            apq = A[p, q]
            app, aqq = A[p, p], A[q, q]
            nz = apq != 0
            safe = np.where(nz, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0, 1.0, t)
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
    return np.sort(A.diagonal())


def _check_symmetric(G):
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidInputError("expected a square matrix")
    norm = np.linalg.norm(G)
    if np.linalg.norm(G - G.T) > SYMMETRY_TOL * max(norm, 1e-300):
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (G + G.T)


def eigenvalues(G, method="auto"):
    """Ascending eigenvalues of a symmetric matrix.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_N`` rows, LAPACK beyond).
    """
    G = _check_symmetric(G)
    if method == "auto":
        method = "jacobi" if G.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        return jacobi_eigvalsh(G)
    if method == "lapack":
        return np.linalg.eigvalsh(G)
    raise InvalidInputError(f"unknown eigen method {method!r}")


def min_eigenvalue(G, method="auto"):
    return float(eigenvalues(G, method)[0])


def spectral_norm(G, method="auto"):
    ev = eigenvalues(G, method)
    return float(max(abs(ev[0]), abs(ev[-1])))


def gram_deviation(Ga, Gb, method="auto"):
    Ga, Gb = np.asarray(Ga, dtype=float), np.asarray(Gb, dtype=float)
    if Ga.shape != Gb.shape:
        raise InvalidInputError("Gram matrices differ in shape")
    diff = Ga - Gb
    return {"frobenius": float(np.linalg.norm(diff)),
            "spectral": spectral_norm(0.5 * (diff + diff.T), method)}


def initial_gram(problem, samples, kind, scale, m, rng, bias_augmented=False, boundary_weight=1.0):
    """G(0) for one random initialization of width ``m``."""
    col = Collocation(problem, samples, boundary_weight)
    net = init_network(m, problem.dim - 1, kind, scale, rng, bias_augmented)
    return gram(col.jacobian(net))


def gram_infinity_mc(problem, samples, kind, scale, m_draw, reps, rng,
                     bias_augmented=False, boundary_weight=1.0):
    """Average of ``reps`` independent G(0) draws at width ``m_draw``.

    Returns ``(mean, stderr)``; ``stderr`` is NaN when ``reps == 1``.
    """
    if int(m_draw) < 1 or int(reps) < 1:
        raise InvalidInputError("m_draw and reps must be positive")
    col = Collocation(problem, samples, boundary_weight)
    draws = []
    for _ in range(int(reps)):
        net = init_network(int(m_draw), problem.dim - 1, kind, scale, rng, bias_augmented)
        draws.append(gram(col.jacobian(net)))
    draws = np.array(draws)
    mean = draws.mean(axis=0)
    if reps == 1:
        return mean, np.full_like(mean, np.nan)
    return mean, draws.std(axis=0, ddof=1) / np.sqrt(reps)

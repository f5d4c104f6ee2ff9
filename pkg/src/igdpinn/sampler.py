"""Seeded collocation sampling.

The generator is numpy's Philox (a counter-based 64-bit bit generator), so a
seed fixes the integer stream on every platform. Test vectors for
``make_rng(0).bit_generator.random_raw(4)`` live in ``tests/test_sampler.py``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SamplingError

PARALLEL_TOL = 1e-12


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def spawn_rngs(seed, n):
    """``n`` statistically independent Philox streams derived from one seed."""
    children = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).spawn(int(n))
    return [np.random.Generator(np.random.Philox(c)) for c in children]


@dataclass(frozen=True)
class SampleSet:
    """Interior and boundary points in network coordinates, plus their physical originals."""

    interior: np.ndarray
    boundary: np.ndarray
    interior_phys: np.ndarray
    boundary_phys: np.ndarray

    @property
    def n1(self):
        return self.interior.shape[0]

    @property
    def n2(self):
        return self.boundary.shape[0]

    def all_points(self):
        return np.vstack([self.interior, self.boundary])

    def to_csv(self, path):
        dim = self.interior.shape[1]
        header = ",".join([f"x{i}" for i in range(dim)] + ["flag"])
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for flag, pts in (("interior", self.interior), ("boundary", self.boundary)):
                for row in pts:
                    fh.write(",".join(repr(float(v)) for v in row) + f",{flag}\n")


def check_nonparallel(points, tol=PARALLEL_TOL):
    """True iff ``1 - |<u,v>| / (|u| |v|) > tol`` for every pair of rows."""
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    return not _parallel_pairs(np.atleast_2d(np.asarray(points, dtype=float)), tol).size


def _parallel_pairs(P, tol):
    norms = np.linalg.norm(P, axis=1)
    if np.any(norms == 0):
        raise InvalidInputError("zero-norm point")
    U = P / norms[:, None]
    C = np.abs(U @ U.T)
    bad = np.argwhere(np.triu(1.0 - C <= tol, k=1))
    return bad


def _sample_interior(box, n, rng):
    out = np.empty((0, box.dim))
    while out.shape[0] < n:
        X = box.lo + box.lengths * rng.random((n - out.shape[0], box.dim))
        out = np.vstack([out, X[box.is_interior(X)]])
    return out


def _sample_boundary(box, n, rng):
    faces = box.faces()
    weights = np.array([box.face_measure(f) for f in faces])
    which = rng.choice(len(faces), size=n, p=weights / weights.sum())
    X = box.lo + box.lengths * rng.random((n, box.dim))
    for k, (axis, side) in enumerate(faces):
        sel = which == k
        X[sel, axis] = box.lo[axis] if side == 0 else box.hi[axis]
    return X


def sample_problem_points(problem, n1, n2, rng, tol=PARALLEL_TOL, max_resample=1000):
    """Draw ``n1`` uniform interior and ``n2`` uniform boundary points.

    Boundary points pick a face with probability proportional to its measure.
    Any point (in network coordinates) parallel to an earlier one is redrawn.
    """
    if int(n1) < 1 or int(n2) < 1:
        raise InvalidInputError("n1 and n2 must be positive")
    box = problem.domain
    if not np.all(box.lengths > 0):
        raise InvalidInputError("domain has zero measure")
    xi = _sample_interior(box, int(n1), rng)
    yb = _sample_boundary(box, int(n2), rng)
    for _ in range(max_resample):
        pts = box.to_network(np.vstack([xi, yb]))
        bad = _parallel_pairs(pts, tol)
        if not bad.size:
            return SampleSet(pts[:n1], pts[n1:], xi, yb)
        for j in np.unique(bad[:, 1]):
            if j < n1:
                xi[j] = _sample_interior(box, 1, rng)[0]
            else:
                yb[j - n1] = _sample_boundary(box, 1, rng)[0]
    raise SamplingError("could not draw a non-parallel sample set")


def grid_points(problem, n_per_axis):
    """Regular grid covering the closed domain, shape ``(n_per_axis**dim, dim)`` (physical)."""
    box = problem.domain
    axes = [np.linspace(lo, hi, int(n_per_axis)) for lo, hi in zip(box.lo, box.hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)

"""Structured reservoir weight matrices and their scaling controls.

Recurrent matrices come in four flavours: plain sparse (the usual ESN
baseline), permutation (one non-zero per row and column, orthogonal up to
the weight value), ring (one global cycle) and chain (a delay line, which
is nilpotent).  Sparse and permutation matrices are drawn from an explicit
random stream; ring and chain are fully deterministic.

Sparse recurrent matrices are rescaled to a target spectral radius; input
and inter-layer matrices are rescaled to a target matrix 2-norm.  Both
measurements start with power iteration and fall back to a dense
eigensolver when the iteration does not settle (complex dominant pairs,
near-degenerate spectra).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

_MEASURE_TOL = 1e-10
_MEASURE_MAX_ITER = 10_000
_DEGENERATE_FLOOR = 1e-12
_MAX_DRAW_ATTEMPTS = 10


class DegenerateMatrixError(RuntimeError):
    """Raised when repeated random draws produce an unscalable matrix."""


@dataclass(frozen=True)
class Sparse:
    """Randomly connected layer; every unit receives ``fan_in`` inputs."""

    fan_in: int = 5


@dataclass(frozen=True)
class Permutation:
    """Recurrence matrix is a scaled random permutation (disjoint cycles)."""


@dataclass(frozen=True)
class Ring:
    """All units form a single cycle."""


@dataclass(frozen=True)
class Chain:
    """Units form a delay line; the matrix is nilpotent."""


TopologyKind = Union[Sparse, Permutation, Ring, Chain]

_TOPOLOGY_NAMES = {Sparse: "sparse", Permutation: "permutation", Ring: "ring", Chain: "chain"}


def topology_name(kind: TopologyKind) -> str:
    """Short lower-case label for a topology value."""
    return _TOPOLOGY_NAMES[type(kind)]


def parse_topology(name: str, fan_in: int = 5) -> TopologyKind:
    """Inverse of :func:`topology_name`; ``fan_in`` only applies to sparse."""
    table = {"sparse": Sparse(fan_in=fan_in), "permutation": Permutation(), "ring": Ring(), "chain": Chain()}
    try:
        return table[name.lower()]
    except KeyError:
        raise ValueError(f"unknown topology {name!r}; expected one of {sorted(table)}") from None


@dataclass(frozen=True)
class ScalingSpec:
    """Target spectral radius and 2-norm scalings of a reservoir.

    ``rho`` controls the recurrent matrices (applied as the plain weight
    value for permutation/ring/chain), ``omega_in`` the input matrix norm
    and ``omega_il`` the norm of each inter-layer matrix.
    """

    rho: float
    omega_in: float
    omega_il: float

    def __post_init__(self):
        for label, value in (("rho", self.rho), ("omega_in", self.omega_in), ("omega_il", self.omega_il)):
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{label} must be positive and finite, got {value!r}")


def random_stream(master_seed: int, *ids: int) -> np.random.Generator:
    """Independent counter-based random stream keyed by structural ids.

    Same key, same stream; different keys give statistically independent
    streams regardless of the order they are created or consumed in.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    entropy = [int(master_seed)] + [int(i) for i in ids]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _sparse_uniform(rows: int, cols: int, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Rows with exactly ``fan_in`` non-zeros at distinct columns, values uniform [-1, 1]."""
    out = np.zeros((rows, cols))
    for r in range(rows):
        idx = rng.choice(cols, size=fan_in, replace=False)
        out[r, idx] = rng.uniform(-1.0, 1.0, size=fan_in)
    return out


def make_sparse_recurrent(n: int, fan_in: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Sparse recurrent matrix with in-degree ``fan_in``, rescaled to spectral radius ``rho``.

    A draw whose raw spectral radius is numerically zero cannot be rescaled;
    it is rejected and redrawn from the same stream, up to a small number of
    attempts.
    """
    if not 1 <= fan_in <= n:
        raise ValueError(f"fan_in must be in [1, {n}], got {fan_in}")
    if not np.isfinite(rho) or rho <= 0.0:
        raise ValueError(f"rho must be positive and finite, got {rho!r}")
    for _ in range(_MAX_DRAW_ATTEMPTS):
        raw = _sparse_uniform(n, n, fan_in, rng)
        radius = spectral_radius(raw)
        if radius >= _DEGENERATE_FLOOR:
            raw *= rho / radius
            return raw
    raise DegenerateMatrixError(
        f"sparse draw of size {n} with fan_in {fan_in} kept a near-zero spectral radius "
        f"after {_MAX_DRAW_ATTEMPTS} attempts"
    )


def permutation_matrix(perm: np.ndarray, weight: float) -> np.ndarray:
    """``weight`` times the identity with its columns permuted by ``perm``.

    Column ``j`` carries its non-zero in row ``perm[j]``; the identity
    permutation gives ``weight * I``.
    """
    perm = np.asarray(perm)
    n = perm.shape[0]
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    out = np.zeros((n, n))
    out[perm, np.arange(n)] = weight
    return out


def make_permutation_recurrent(n: int, weight: float, rng: np.random.Generator) -> np.ndarray:
    """Scaled random permutation matrix; its spectral radius is exactly ``weight``."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    _require_positive("weight", weight)
    return permutation_matrix(rng.permutation(n), weight)


def make_ring_recurrent(n: int, weight: float) -> np.ndarray:
    """Single-cycle matrix: sub-diagonal plus the top-right corner, all ``weight``."""
    if n < 2:
        raise ValueError(f"ring needs at least 2 units, got {n}")
    _require_positive("weight", weight)
    out = np.zeros((n, n))
    out[np.arange(1, n), np.arange(0, n - 1)] = weight
    out[0, n - 1] = weight
    return out


def make_chain_recurrent(n: int, weight: float) -> np.ndarray:
    """Delay-line matrix: sub-diagonal entries only.  Nilpotent, spectral radius 0.

    The scaling hyperparameter is still applied as the sub-diagonal weight,
    so a chain layer shares the search space of the other topologies.
    """
    if n < 2:
        raise ValueError(f"chain needs at least 2 units, got {n}")
    _require_positive("weight", weight)
    out = np.zeros((n, n))
    out[np.arange(1, n), np.arange(0, n - 1)] = weight
    return out


def make_input_matrix(n_r: int, n_u: int, omega_in: float, rng: np.random.Generator) -> np.ndarray:
    """Dense uniform [-1, 1] matrix rescaled so its 2-norm equals ``omega_in``."""
    if n_r < 1 or n_u < 1:
        raise ValueError(f"matrix dimensions must be positive, got {n_r}x{n_u}")
    _require_positive("omega_in", omega_in)
    for _ in range(_MAX_DRAW_ATTEMPTS):
        raw = rng.uniform(-1.0, 1.0, size=(n_r, n_u))
        norm = operator_norm(raw)
        if norm >= _DEGENERATE_FLOOR:
            raw *= omega_in / norm
            return raw
    raise DegenerateMatrixError(f"input draw of size {n_r}x{n_u} was numerically zero")


def make_interlayer_matrix(n_to: int, n_from: int, fan_in: int, omega_il: float, rng: np.random.Generator) -> np.ndarray:
    """Layer-to-layer matrix: ``fan_in`` non-zeros per row, 2-norm rescaled to ``omega_il``."""
    if not 1 <= fan_in <= n_from:
        raise ValueError(f"fan_in must be in [1, {n_from}], got {fan_in}")
    if n_to < 1:
        raise ValueError(f"n_to must be positive, got {n_to}")
    _require_positive("omega_il", omega_il)
    for _ in range(_MAX_DRAW_ATTEMPTS):
        raw = _sparse_uniform(n_to, n_from, fan_in, rng)
        norm = operator_norm(raw)
        if norm >= _DEGENERATE_FLOOR:
            raw *= omega_il / norm
            return raw
    raise DegenerateMatrixError(f"inter-layer draw of size {n_to}x{n_from} was numerically zero")


def spectral_radius(m: np.ndarray) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Power iteration handles the common case of a simple real dominant
    eigenvalue and recognises scaled isometries (permutations, rings) by
    their exactly flat norm ratio.  Anything else, notably complex dominant
    pairs, is handed to the dense eigensolver.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"spectral radius needs a square matrix, got {m.shape}")
    if m.shape[0] == 1:
        return float(abs(m[0, 0]))
    estimate = _power_radius(m)
    if estimate is None:
        estimate = float(np.max(np.abs(np.linalg.eigvals(m))))
    return estimate


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value, via power iteration on the Gram matrix.

    The Gram matrix is symmetric positive semi-definite, so the Rayleigh
    quotient residual gives a direct error bound; the rare stalled case
    falls back to a dense symmetric eigensolver.
    """
    m = _as_matrix(m)
    if min(m.shape) == 1:
        return float(np.linalg.norm(m.ravel()))
    gram = m.T @ m if m.shape[0] >= m.shape[1] else m @ m.T
    gram = (gram + gram.T) * 0.5
    top = _power_psd_eigmax(gram)
    if top is None:
        top = float(np.linalg.eigvalsh(gram)[-1])
    return float(np.sqrt(max(top, 0.0)))


def _as_matrix(m) -> np.ndarray:
    out = np.asarray(m, dtype=float)
    if out.ndim != 2 or out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix entries must all be finite")
    return out


def _require_positive(label: str, value: float) -> None:
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{label} must be positive and finite, got {value!r}")


def _power_radius(m: np.ndarray, max_iter: int = _MEASURE_MAX_ITER, tol: float = _MEASURE_TOL):
    """Power-iteration spectral radius, or None when the iteration stalls."""
    n = m.shape[0]
    rng = np.random.default_rng(0x9E3779B9)  # fixed start keeps the function deterministic
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)

    # Phase 1: a scaled isometry keeps ||m @ x|| / ||x|| exactly constant from
    # the very first step, while a generic matrix is still far from converged
    # here; a flat opening window is therefore safe to return directly.
    opening = []
    for _ in range(20):
        y = m @ x
        r = float(np.linalg.norm(y))
        if r == 0.0:
            return 0.0  # orbit annihilated: nilpotent to machine precision
        opening.append(r)
        x = y / r
    scale = max(1.0, opening[-1])
    if max(opening) - min(opening) <= 1e-12 * scale:
        return opening[-1]

    prev = opening[-1]
    changes = []
    for k in range(max_iter):
        y = m @ x
        r = float(np.linalg.norm(y))
        if r == 0.0:
            return 0.0
        scale = max(1.0, r)
        if abs(r - prev) <= tol * scale:
            # confirm a genuine real dominant eigenpair before accepting
            if min(np.linalg.norm(y - r * x), np.linalg.norm(y + r * x)) <= tol * scale:
                return r
        changes.append(abs(r - prev))
        if k == 300:
            early = np.mean(changes[100:200])
            late = np.mean(changes[200:300])
            if late > 0.3 * max(early, 1e-300):
                return None  # oscillating estimate: complex dominant pair, go dense
        prev = r
        x = y / r
    return None


def _power_psd_eigmax(b: np.ndarray, max_iter: int = _MEASURE_MAX_ITER, tol: float = _MEASURE_TOL):
    """Dominant eigenvalue of a symmetric PSD matrix, or None on stall."""
    n = b.shape[0]
    rng = np.random.default_rng(0x51F15EED)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    for k in range(max_iter):
        y = b @ x
        lam = float(x @ y)
        norm_y = float(np.linalg.norm(y))
        if norm_y == 0.0:
            return 0.0
        # symmetric matrix: |lam - eigenvalue| is bounded by the residual norm
        if k >= 5 and np.linalg.norm(y - lam * x) <= tol * max(lam, 1e-300):
            return lam
        x = y / norm_y
    return None

"""Stacked reservoir construction and state-trajectory computation.

A deep reservoir is a pipeline of untrained tanh layers.  The external
input drives only the first layer; every later layer is driven by the
current-step state of the layer below it.  The readout consumes the
concatenation of all layer states, so :func:`run` returns the full
trajectory of that global state.

State updates, with ``u(t)`` the input and ``x_l(t)`` the state of layer
``l`` (zero at step 0, no bias terms):

    x_1(t) = tanh(W_in u(t)  + R_1 x_1(t-1))
    x_l(t) = tanh(V_l x_{l-1}(t) + R_l x_l(t-1))      for l > 1

where ``R_l`` is the layer's recurrent matrix and ``V_l`` its inbound
(inter-layer) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse

from .topology import (
    Chain,
    Permutation,
    Ring,
    ScalingSpec,
    Sparse,
    TopologyKind,
    make_chain_recurrent,
    make_input_matrix,
    make_interlayer_matrix,
    make_permutation_recurrent,
    make_ring_recurrent,
    make_sparse_recurrent,
    random_stream,
)

INTERLAYER_FAN_IN = 5

# stream ids so that each matrix draws from its own substream of the seed
_STREAM_INPUT = 0
_STREAM_RECURRENT = 1
_STREAM_INBOUND = 2


def layer_sizes(total_units: int, num_layers: int) -> tuple[int, ...]:
    """Split ``total_units`` as evenly as possible; earlier layers take the remainder."""
    if num_layers < 1:
        raise ValueError(f"num_layers must be at least 1, got {num_layers}")
    if total_units < num_layers:
        raise ValueError(f"need at least one unit per layer, got {total_units} for {num_layers} layers")
    base, rem = divmod(total_units, num_layers)
    return tuple(base + 1 if i < rem else base for i in range(num_layers))


@dataclass(frozen=True)
class ReservoirSpec:
    """Everything needed to build a deep reservoir deterministically."""

    total_units: int
    num_layers: int
    topology: TopologyKind
    scaling: ScalingSpec
    input_dim: int = 1
    seed: int = 0
    interlayer_fan_in: int = INTERLAYER_FAN_IN

    def __post_init__(self):
        layer_sizes(self.total_units, self.num_layers)  # validates the split
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be at least 1, got {self.input_dim}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.interlayer_fan_in < 1:
            raise ValueError("interlayer_fan_in must be at least 1")


@dataclass(frozen=True)
class LayerWeights:
    """Recurrent matrix of one layer plus its inbound matrix (absent for layer 1)."""

    recurrent: np.ndarray
    inbound: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DeepReservoir:
    """Immutable bundle of all untrained weights of a deep reservoir."""

    input_weights: np.ndarray
    layers: tuple[LayerWeights, ...]
    layer_sizes: tuple[int, ...]

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def total_units(self) -> int:
        return int(sum(self.layer_sizes))

    @property
    def input_dim(self) -> int:
        return int(self.input_weights.shape[1])


@dataclass(frozen=True)
class StateTrajectory:
    """Per-step concatenated layer states, one row per input step."""

    states: np.ndarray
    layer_sizes: tuple[int, ...]

    @property
    def num_steps(self) -> int:
        return int(self.states.shape[0])

    @property
    def width(self) -> int:
        return int(self.states.shape[1])

    @property
    def layer_offsets(self) -> tuple[int, ...]:
        out = [0]
        for n in self.layer_sizes:
            out.append(out[-1] + n)
        return tuple(out)

    def layer_states(self, index: int) -> np.ndarray:
        """View of one layer's trajectory (layers indexed from 0)."""
        offsets = self.layer_offsets
        return self.states[:, offsets[index]:offsets[index + 1]]


def _make_recurrent(kind: TopologyKind, n: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    if isinstance(kind, Sparse):
        return make_sparse_recurrent(n, kind.fan_in, rho, rng)
    if isinstance(kind, Permutation):
        return make_permutation_recurrent(n, rho, rng)
    if isinstance(kind, Ring):
        return make_ring_recurrent(n, rho)
    if isinstance(kind, Chain):
        return make_chain_recurrent(n, rho)
    raise TypeError(f"unknown topology kind: {kind!r}")


def build_reservoir(spec: ReservoirSpec) -> DeepReservoir:
    """Construct all weight matrices for ``spec``.

    Each matrix is drawn from its own random substream keyed on
    ``(spec.seed, role, layer index)``, so the result is bit-identical for
    equal specs and does not depend on construction order.
    """
    sizes = layer_sizes(spec.total_units, spec.num_layers)
    input_weights = make_input_matrix(
        sizes[0], spec.input_dim, spec.scaling.omega_in, random_stream(spec.seed, _STREAM_INPUT, 0)
    )
    input_weights.setflags(write=False)
    layers = []
    for index, n in enumerate(sizes):
        recurrent = _make_recurrent(
            spec.topology, n, spec.scaling.rho, random_stream(spec.seed, _STREAM_RECURRENT, index)
        )
        recurrent.setflags(write=False)
        inbound = None
        if index > 0:
            inbound = make_interlayer_matrix(
                n,
                sizes[index - 1],
                spec.interlayer_fan_in,
                spec.scaling.omega_il,
                random_stream(spec.seed, _STREAM_INBOUND, index),
            )
            inbound.setflags(write=False)
        layers.append(LayerWeights(recurrent=recurrent, inbound=inbound))
    return DeepReservoir(input_weights=input_weights, layers=tuple(layers), layer_sizes=sizes)


def run(reservoir: DeepReservoir, inputs: Sequence) -> StateTrajectory:
    """Drive the reservoir from the null state and collect the global states."""
    return run_from_state(reservoir, inputs, np.zeros(reservoir.total_units))


def run_from_state(reservoir: DeepReservoir, inputs: Sequence, initial_state: np.ndarray) -> StateTrajectory:
    """Like :func:`run` but starting from a caller-supplied concatenated state.

    Exists so stability properties (state contraction from perturbed initial
    conditions) can be exercised directly; normal use starts from zero.
    """
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[1] != reservoir.input_dim:
        raise ValueError(f"inputs must be (steps, {reservoir.input_dim}), got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("inputs must be finite")
    state0 = np.asarray(initial_state, dtype=float)
    if state0.shape != (reservoir.total_units,):
        raise ValueError(f"initial state must have length {reservoir.total_units}, got {state0.shape}")

    sizes = reservoir.layer_sizes
    offsets = [0]
    for n in sizes:
        offsets.append(offsets[-1] + n)
    num_layers = len(sizes)
    steps = u.shape[0]

    states = np.empty((steps, offsets[-1]))
    prev = [state0[offsets[l]:offsets[l + 1]].copy() for l in range(num_layers)]
    apply_recurrent = [_matvec(lw.recurrent) for lw in reservoir.layers]
    apply_inbound = [None if lw.inbound is None else _matvec(lw.inbound) for lw in reservoir.layers]
    input_proj = u @ reservoir.input_weights.T  # (steps, n_1), hoisted out of the loop

    for t in range(steps):
        row = states[t]
        below = None
        for l in range(num_layers):
            pre = apply_recurrent[l](prev[l])
            if l == 0:
                pre += input_proj[t]
            else:
                pre += apply_inbound[l](below)
            segment = row[offsets[l]:offsets[l + 1]]
            np.tanh(pre, out=segment)
            prev[l] = segment
            below = segment
    return StateTrajectory(states=states, layer_sizes=sizes)


# Dense mat-vec cost grows with the full matrix size while the structured
# matrices carry only a handful of non-zeros per row, so above this size a
# compressed-rows product is several times faster.  Below it the dense BLAS
# call wins on dispatch overhead.
_SPARSE_MATVEC_MIN_SIZE = 30_000
_SPARSE_MATVEC_MAX_DENSITY = 0.25


def _matvec(matrix: np.ndarray):
    """Pick the cheaper mat-vec form for this matrix; result may reuse a buffer."""
    dense = np.ascontiguousarray(matrix)
    nnz = np.count_nonzero(dense)
    if dense.size >= _SPARSE_MATVEC_MIN_SIZE and nnz <= _SPARSE_MATVEC_MAX_DENSITY * dense.size:
        compressed = scipy.sparse.csr_matrix(dense)
        return compressed.dot
    buffer = np.empty(dense.shape[0])

    def product(x, _m=dense, _out=buffer):
        return np.dot(_m, x, out=_out)

    return product

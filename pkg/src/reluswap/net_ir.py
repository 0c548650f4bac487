"""Dense feed-forward network IR: validation, evaluation, sampled sup distance and JSON I/O."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence, Union

import numpy as np
from scipy.stats import qmc

from reluswap import kernels
from reluswap.activations.registry import ActivationSpec, get_activation
from reluswap.errors import DimensionMismatch, NonFiniteParameter, ParseError, SchemaError

RELU = "relu"
IDENTITY = "identity"


@dataclass(frozen=True)
class ActivationRef:
    """Reference to a registry activation by name and parameters."""

    name: str
    params: tuple[tuple[str, float], ...] = ()

    @classmethod
    def of(cls, spec: ActivationSpec) -> "ActivationRef":
        return cls(spec.name, tuple(spec.params))

    @property
    def spec(self) -> ActivationSpec:
        return get_activation(self.name, dict(self.params))


ActivationTag = Union[str, ActivationRef]


@dataclass(frozen=True, eq=False)
class Layer:
    weights: np.ndarray
    bias: np.ndarray
    activation: ActivationTag = IDENTITY

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim == 1 and w.size == 0:
            w = w.reshape(0, 0)
        if w.ndim != 2:
            raise DimensionMismatch(-1, f"weights must be a matrix, got shape {w.shape}")
        b = np.array(self.bias, dtype=np.float64, copy=True).reshape(-1)
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        if isinstance(self.activation, ActivationSpec):
            object.__setattr__(self, "activation", ActivationRef.of(self.activation))

    @property
    def fan_in(self) -> int:
        return self.weights.shape[1]

    @property
    def fan_out(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return (self.activation == other.activation
                and self.weights.shape == other.weights.shape
                and self.weights.tobytes() == other.weights.tobytes()
                and self.bias.tobytes() == other.bias.tobytes())

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Network:
    input_dim: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    @property
    def hidden(self) -> tuple[Layer, ...]:
        return self.layers[:-1]

    @property
    def width(self) -> int:
        return max((layer.fan_out for layer in self.hidden), default=0)

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.input_dim == other.input_dim and self.layers == other.layers

    __hash__ = None


@dataclass(frozen=True)
class Box:
    half_width: float
    dim: int

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError(f"box half width must be positive and finite, got {self.half_width}")
        if self.dim < 1:
            raise ValueError(f"box dimension must be positive, got {self.dim}")


@dataclass(frozen=True)
class ShapeReport:
    width: int
    depth: int
    input_dim: int
    output_dim: int
    dims: tuple[tuple[int, int], ...]  # (fan_in, fan_out) per layer


def validate_network(net: Network) -> ShapeReport:
    if not isinstance(net.input_dim, (int, np.integer)) or net.input_dim < 1:
        raise DimensionMismatch(0, f"input_dim must be a positive integer, got {net.input_dim}")
    if not net.layers:
        raise DimensionMismatch(0, "network has no layers")
    fan_in = net.input_dim
    for i, layer in enumerate(net.layers):
        if layer.fan_in != fan_in:
            raise DimensionMismatch(i, f"expected {fan_in} columns, got {layer.fan_in}")
        if layer.bias.shape[0] != layer.fan_out:
            raise DimensionMismatch(i, f"bias length {layer.bias.shape[0]} != {layer.fan_out} rows")
        for arr, prefix in ((layer.weights, "weights"), (layer.bias, "bias")):
            bad = np.argwhere(~np.isfinite(arr))
            if bad.size:
                raise NonFiniteParameter(i, (prefix, *map(int, bad[0])))
        last = i == len(net.layers) - 1
        act = layer.activation
        if last and act != IDENTITY:
            raise SchemaError(f"layers[{i}].activation", "the final layer must be 'identity'")
        if isinstance(act, ActivationRef):
            act.spec  # raises UnknownActivation / ParameterDomainError
        elif act not in (RELU, IDENTITY):
            raise SchemaError(f"layers[{i}].activation", f"unknown activation tag {act!r}")
        fan_in = layer.fan_out
    return ShapeReport(width=net.width, depth=net.depth, input_dim=net.input_dim, output_dim=net.output_dim,
                       dims=tuple((layer.fan_in, layer.fan_out) for layer in net.layers))


def apply_activation(tag: ActivationTag, z: np.ndarray) -> np.ndarray:
    if tag == IDENTITY:
        return z
    if tag == RELU:
        return np.maximum(z, 0.0)
    return np.asarray(tag.spec.fn(z), dtype=np.float64)


_EVAL_CHUNK = 1 << 15


def pre_activations(net: Network, x: np.ndarray) -> list[np.ndarray]:
    """Pre-activation values of every layer for a batch x of shape (n, d)."""
    h = np.ascontiguousarray(x, dtype=np.float64)
    out = []
    for layer in net.layers:
        z = kernels.affine(h, layer.weights, layer.bias)
        out.append(z)
        h = np.ascontiguousarray(apply_activation(layer.activation, z))
    return out


def _forward(net: Network, x: np.ndarray) -> np.ndarray:
    h = np.ascontiguousarray(x, dtype=np.float64)
    for layer in net.layers:
        h = np.ascontiguousarray(apply_activation(layer.activation, kernels.affine(h, layer.weights, layer.bias)))
    return h


def eval_network(net: Network, x) -> np.ndarray:
    """Forward pass. x is one input vector (d,) or a batch (n, d)."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    batch = arr.reshape(1, -1) if single else arr
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise DimensionMismatch(0, f"input has shape {arr.shape}, network expects dimension {net.input_dim}")
    if batch.shape[0] <= _EVAL_CHUNK:
        out = _forward(net, batch)
    else:
        out = np.concatenate([_forward(net, batch[i:i + _EVAL_CHUNK])
                              for i in range(0, batch.shape[0], _EVAL_CHUNK)])
    return out[0] if single else out


# sampling

MAX_CORNER_DIMS = 10


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray
    n_lattice: int
    n_corners: int
    n_random: int


def sample_box(box: Box, n_samples: int, seed: int) -> SampleSet:
    """Half Halton lattice, half seeded uniform points, plus the box corners.

    With more than ten dimensions the corners span the first ten coordinates and the rest
    are zero.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    d, a = box.dim, box.half_width
    n_lat = n_samples // 2
    n_rnd = n_samples - n_lat
    parts = []
    if n_lat:
        lattice = qmc.Halton(d=d, scramble=False).random(n_lat)
        parts.append(a * (2.0 * lattice - 1.0))
    k = min(d, MAX_CORNER_DIMS)
    corners = np.zeros((2 ** k, d))
    corners[:, :k] = np.array(list(itertools.product((-a, a), repeat=k)))
    parts.append(corners)
    parts.append(np.random.default_rng(seed).uniform(-a, a, size=(n_rnd, d)))
    return SampleSet(np.vstack(parts), n_lat, corners.shape[0], n_rnd)


def _check_comparable(a: Network, b: Network, box: Box) -> None:
    if a.input_dim != b.input_dim or a.input_dim != box.dim:
        raise DimensionMismatch(0, f"input dims {a.input_dim}, {b.input_dim} and box dim {box.dim} differ")
    if a.output_dim != b.output_dim:
        raise DimensionMismatch(len(a.layers) - 1, f"output dims {a.output_dim} and {b.output_dim} differ")


def sup_distance_on(a: Network, b: Network, points: np.ndarray) -> float:
    diff = np.abs(eval_network(a, points) - eval_network(b, points))
    if np.isnan(diff).any():
        return math.inf
    return float(diff.max()) if diff.size else 0.0


def sup_distance(a: Network, b: Network, box: Box, n_samples: int, seed: int) -> float:
    """Sampled (lower) estimate of the sup-norm distance of a and b over the box."""
    _check_comparable(a, b, box)
    return sup_distance_on(a, b, sample_box(box, n_samples, seed).points)


def sup_distance_report(a: Network, b: Network, box: Box, n_samples: int, seed: int) -> dict:
    _check_comparable(a, b, box)
    s = sample_box(box, n_samples, seed)
    return {"sup_error_sampled": sup_distance_on(a, b, s.points), "estimate": "sampled",
            "n_lattice": s.n_lattice, "n_corners": s.n_corners, "n_random": s.n_random,
            "n_points": int(s.points.shape[0]), "half_width": box.half_width, "seed": seed}


# JSON

def _tag_to_json(tag: ActivationTag):
    if isinstance(tag, ActivationRef):
        return {"name": tag.name, "params": {k: v for k, v in tag.params}}
    return tag


def network_to_dict(net: Network) -> dict:
    return {"input_dim": int(net.input_dim),
            "layers": [{"weights": layer.weights.tolist(), "bias": layer.bias.tolist(),
                        "activation": _tag_to_json(layer.activation)} for layer in net.layers]}


def serialize(net: Network, metadata: Mapping[str, Any] | None = None) -> bytes:
    """JSON bytes. Floats use the shortest repr that round-trips, so values survive bit-exactly."""
    validate_network(net)
    doc = network_to_dict(net)
    if metadata is not None:
        doc["metadata"] = dict(metadata)
    return json.dumps(doc, allow_nan=False, indent=None).encode("utf-8")


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(v).__name__}")
    return float(v)


def _tag_from_json(v, path: str) -> ActivationTag:
    if isinstance(v, str):
        if v in (RELU, IDENTITY):
            return v
        return ActivationRef(v, ())
    if isinstance(v, dict):
        if not isinstance(v.get("name"), str):
            raise SchemaError(path + ".name", "missing or not a string")
        params = v.get("params", {})
        if not isinstance(params, dict):
            raise SchemaError(path + ".params", "expected an object")
        ps = tuple(sorted((str(k), _number(x, f"{path}.params.{k}")) for k, x in params.items()))
        if v["name"] in (RELU, IDENTITY) and not ps:
            return v["name"]
        return ActivationRef(v["name"], ps)
    raise SchemaError(path, "expected a string or an object with 'name'")


def network_from_dict(doc: Any) -> Network:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    for key in ("input_dim", "layers"):
        if key not in doc:
            raise SchemaError(f"$.{key}", "missing")
    d = doc["input_dim"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SchemaError("$.input_dim", "expected a positive integer")
    if not isinstance(doc["layers"], list) or not doc["layers"]:
        raise SchemaError("$.layers", "expected a non-empty list")
    layers = []
    for i, ld in enumerate(doc["layers"]):
        path = f"$.layers[{i}]"
        if not isinstance(ld, dict):
            raise SchemaError(path, "expected an object")
        for key in ("weights", "bias", "activation"):
            if key not in ld:
                raise SchemaError(f"{path}.{key}", "missing")
        w = ld["weights"]
        if not isinstance(w, list) or any(not isinstance(r, list) for r in w):
            raise SchemaError(f"{path}.weights", "expected a list of rows")
        rows = [[_number(x, f"{path}.weights[{r}][{c}]") for c, x in enumerate(row)] for r, row in enumerate(w)]
        if len({len(r) for r in rows}) > 1:
            raise SchemaError(f"{path}.weights", "rows have different lengths")
        if not isinstance(ld["bias"], list):
            raise SchemaError(f"{path}.bias", "expected a list")
        bias = [_number(x, f"{path}.bias[{j}]") for j, x in enumerate(ld["bias"])]
        n_cols = len(rows[0]) if rows else 0
        warr = np.array(rows, dtype=np.float64).reshape(len(rows), n_cols)
        layers.append(Layer(warr, np.array(bias, dtype=np.float64),
                            _tag_from_json(ld["activation"], f"{path}.activation")))
    return Network(d, tuple(layers))


def parse_document(data: bytes | str) -> tuple[Network, dict | None]:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    try:
        doc = json.loads(text, parse_constant=lambda c: _reject_constant(c))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    net = network_from_dict(doc)
    validate_network(net)
    meta = doc.get("metadata")
    return net, meta if isinstance(meta, dict) else None


def _reject_constant(c: str):
    raise SchemaError("$", f"non-finite number {c} is not allowed")


def parse(data: bytes | str) -> Network:
    return parse_document(data)[0]


def make_network(input_dim: int, layers: Sequence[tuple]) -> Network:
    """Convenience constructor from (weights, bias, activation) tuples; validates the result."""
    net = Network(input_dim, tuple(Layer(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64), act)
                                   for w, b, act in layers))
    validate_network(net)
    return net

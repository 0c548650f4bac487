"""Replace every ReLU neuron of a host network by a calibrated gadget, fuse the affine maps, verify."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from reluswap.activations.classify import classify
from reluswap.activations.registry import ActivationSpec
from reluswap.errors import CalibrationFailed, DimensionMismatch, NotReLUHost, UnfusableGadget
from reluswap.gadgets.base import Gadget
from reluswap.gadgets.relu import relu_gadget
from reluswap.net_ir import (
    RELU, Box, Layer, Network, pre_activations, sample_box, sup_distance_on, validate_network,
)

log = logging.getLogger(__name__)

RANGE_FACTOR = 1.5
MAX_ROUNDS = 8
VERIFY_FACTOR = 10


@dataclass(frozen=True)
class LayerRanges:
    M: tuple[float, ...]  # one bound per hidden layer


def estimate_layer_ranges(net: Network, box: Box, n_samples: int, seed: int) -> LayerRanges:
    """M_l = max(1, 1.5 * sampled max |pre-activation of layer l|) + 1."""
    validate_network(net)
    if box.dim != net.input_dim:
        raise DimensionMismatch(0, f"box dimension {box.dim} != input dimension {net.input_dim}")
    pts = sample_box(box, n_samples, seed).points
    pre = pre_activations(net, pts)[:-1]
    return LayerRanges(tuple(max(1.0, RANGE_FACTOR * float(np.max(np.abs(z)))) + 1.0 for z in pre))


def _gadget_layers(gadgets: Sequence[Gadget]) -> list[Layer]:
    first = gadgets[0].net
    if first.input_dim != 1 or first.output_dim != 1:
        raise UnfusableGadget("gadgets must map one input to one output")
    shape = [(layer.weights.shape, layer.activation) for layer in first.layers]
    for g in gadgets[1:]:
        if [(layer.weights.shape, layer.activation) for layer in g.net.layers] != shape:
            raise UnfusableGadget("gadgets of one layer must share their shape and activations")
    return list(first.layers)


def substitute(net: Network, layer: int, gadgets: Sequence[Gadget], target_spec: ActivationSpec | None = None) -> Network:
    """Replace the activations of hidden layer ``layer`` neuron-wise by gadgets, fusing affine maps.

    Neuron i of the host becomes the block (i, 0..w-1) of the gadget's first hidden layer,
    with rows a_j * W_i and bias a_j * b_i + c_j. Deeper gadget layers become block-diagonal.
    The gadget's output row o (bias o0) folds into the next host layer: column (i, j) gets
    W'[:, i] * o_j and the bias gains sum_i W'[:, i] * o0.
    """
    validate_network(net)
    if not 0 <= layer < net.depth:
        raise DimensionMismatch(layer, f"no hidden layer {layer} (depth {net.depth})")
    host, nxt = net.layers[layer], net.layers[layer + 1]
    n = host.fan_out
    if len(gadgets) != n:
        raise DimensionMismatch(layer, f"{len(gadgets)} gadgets for {n} neurons")
    glayers = _gadget_layers(gadgets)
    if target_spec is not None:
        for gl in glayers[:-1]:
            if getattr(gl.activation, "name", gl.activation) != target_spec.name:
                raise UnfusableGadget(f"gadget activation {gl.activation} is not {target_spec.name}")
    w = glayers[0].fan_out

    # first gadget layer fused with the host affine map
    a = np.stack([g.net.layers[0].weights[:, 0] for g in gadgets])  # (n, w)
    c = np.stack([g.net.layers[0].bias for g in gadgets])
    W0 = (a[:, :, None] * host.weights[:, None, :]).reshape(n * w, host.fan_in)
    b0 = (a * host.bias[:, None] + c).reshape(n * w)
    new_layers = [Layer(W0, b0, glayers[0].activation)]

    # inner gadget layers, block-diagonal over neurons
    for t in range(1, len(glayers) - 1):
        rows, cols = glayers[t].weights.shape
        W = np.zeros((n * rows, n * cols))
        b = np.empty(n * rows)
        for i, g in enumerate(gadgets):
            W[i * rows:(i + 1) * rows, i * cols:(i + 1) * cols] = g.net.layers[t].weights
            b[i * rows:(i + 1) * rows] = g.net.layers[t].bias
        new_layers.append(Layer(W, b, glayers[t].activation))

    # gadget output folded into the next host layer
    last = glayers[-1].fan_in
    o = np.stack([g.net.layers[-1].weights[0] for g in gadgets])  # (n, last)
    o0 = np.array([g.net.layers[-1].bias[0] for g in gadgets])
    Wn = (nxt.weights[:, :, None] * o[None, :, :]).reshape(nxt.fan_out, n * last)
    bn = nxt.bias + nxt.weights @ o0 if np.any(o0 != 0.0) else nxt.bias.copy()
    new_layers.append(Layer(Wn, bn, nxt.activation))

    out = Network(net.input_dim, net.layers[:layer] + tuple(new_layers) + net.layers[layer + 2:])
    validate_network(out)
    return out


@dataclass
class TranspileReport:
    eps_requested: float
    sup_error_sampled: float
    factors: tuple[float, float]
    rounds: int
    per_layer: list[dict]
    seed: int
    width_in: int
    depth_in: int
    width_out: int
    depth_out: int
    target: dict
    construction: str
    n_verify_points: int
    success: bool
    history: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"eps_requested": self.eps_requested, "sup_error_sampled": self.sup_error_sampled,
                "estimate": "sampled", "factors": list(self.factors), "rounds": self.rounds,
                "per_layer": self.per_layer, "seed": self.seed,
                "width_in": self.width_in, "depth_in": self.depth_in,
                "width_out": self.width_out, "depth_out": self.depth_out,
                "target": self.target, "construction": self.construction,
                "n_verify_points": self.n_verify_points, "success": self.success, "history": self.history}


def _factors(host: Network, out: Network) -> tuple[float, float]:
    if host.depth == 0:
        return (1.0, 1.0)
    return (out.width / host.width, out.depth / host.depth)


def _check_host(net: Network) -> None:
    for i, layer in enumerate(net.hidden):
        if layer.activation != RELU:
            name = getattr(layer.activation, "name", layer.activation)
            raise NotReLUHost(f"hidden layer {i} has activation {name!r}; only relu hosts are accepted")


def transpile(net: Network, target_spec: ActivationSpec, box: Box, eps: float, seed: int = 0, *,
              n_samples: int = 10_000, force_class: str | None = None) -> tuple[Network, TranspileReport]:
    """Rewrite a ReLU host over ``target_spec`` with sampled sup error below eps on the box.

    Per-neuron tolerance starts at eps / (2 * #ReLU neurons) and halves after each failed
    end-to-end check, for at most eight rounds. The returned report says whether the
    final network met eps; the network is the best one found either way.
    """
    validate_network(net)
    _check_host(net)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if box.dim != net.input_dim:
        raise DimensionMismatch(0, f"box dimension {box.dim} != input dimension {net.input_dim}")
    cls = classify(target_spec)
    target = {"name": target_spec.name, "params": dict(target_spec.params)}
    shape_in = (net.width, net.depth)

    if target_spec.name == RELU or net.depth == 0:
        # nothing is replaced, so nothing is sampled
        report = TranspileReport(eps, 0.0, (1.0, 1.0), 0, [], seed, *shape_in, *shape_in, target,
                                 "identical", 0, True)
        return net, report

    verify_points = sample_box(box, VERIFY_FACTOR * n_samples, seed).points

    ranges = estimate_layer_ranges(net, box, n_samples, seed)
    n_neurons = sum(layer.fan_out for layer in net.hidden)
    tau = eps / (2.0 * n_neurons)
    best: tuple[float, Network, list[dict], str] | None = None
    history = []
    rounds = 0
    for rounds in range(1, MAX_ROUNDS + 1):
        try:
            out, per_layer, construction = _substitute_all(net, cls, ranges, tau, force_class)
        except CalibrationFailed as e:
            history.append({"round": rounds, "tol": tau, "calibration_failed": e.best_error})
            if best is None:
                raise
            break
        err = sup_distance_on(net, out, verify_points)
        history.append({"round": rounds, "tol": tau, "sup_error_sampled": err})
        log.info("round %d: per-neuron tol %.3g, sampled error %.3g", rounds, tau, err)
        if best is None or err < best[0]:
            best = (err, out, per_layer, construction)
        if err < eps:
            break
        tau /= 2.0
    err, out, per_layer, construction = best
    report = TranspileReport(eps, err, _factors(net, out), rounds, per_layer, seed, *shape_in,
                             out.width, out.depth, target, construction, len(verify_points), err < eps, history)
    return out, report


def _substitute_all(net: Network, cls, ranges: LayerRanges, tau: float, force_class: str | None):
    out = net
    pos = 0  # index of the current host layer inside the growing network
    per_layer = []
    construction = ""
    for host_layer in range(net.depth):
        M = ranges.M[host_layer]
        g = relu_gadget(cls, M, tau, force_class=force_class)
        construction = g.construction
        n = net.layers[host_layer].fan_out
        out = substitute(out, pos, [g] * n, cls.spec)
        pos += g.depth
        per_layer.append({"M": M, "gadget_scale": g.scale_param, "gadget_error": g.reported_error,
                          "tol": tau, "construction": g.construction, "params": g.params})
    return out, per_layer, construction

"""Forward evaluation of Markov chain neural networks (MCNNs).

An MCNN with ``k`` layers maps an LMMC to a number:

* each layer ``phi_i`` replaces the label of state ``x`` by the average of
  ``phi_i`` over the labels of the states reachable in one step from ``x``;
* the readout averages ``phi_{k+1}`` of the final labels under the stationary
  distribution and applies ``psi`` to the result.

Layers are affine maps optionally followed by a componentwise ``relu`` or
``abs``, so each one carries a certified Lipschitz constant (the spectral
norm of its weight matrix).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import Lmmc, _frozen
from .exceptions import DimensionMismatch, ValidationError

ACTIVATIONS = (None, "relu", "abs")


def _activation_masks(activation, d_out):
    if activation is None or isinstance(activation, str):
        acts = [activation] * d_out
    else:
        acts = list(activation)
        if len(acts) != d_out:
            raise DimensionMismatch(f"{len(acts)} activations for {d_out} outputs")
    for a in acts:
        if a not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {a!r}")
    relu = np.array([a == "relu" for a in acts])
    absv = np.array([a == "abs" for a in acts])
    return tuple(acts), relu, absv


@dataclass(frozen=True, eq=False)
class LipschitzMap:
    """``x -> act(W x + b)`` with a componentwise 1-Lipschitz ``act``.

    Args:
        weight: ``(d_out, d_in)`` matrix.
        bias: length ``d_out`` vector (zeros by default).
        activation: ``None``, ``"relu"``, ``"abs"``, or one of these per
            output component.
    """

    weight: np.ndarray
    bias: np.ndarray = None
    activation: object = None
    _relu: np.ndarray = field(init=False, repr=False)
    _abs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weight, dtype=float))
        b = np.zeros(w.shape[0]) if self.bias is None else np.asarray(self.bias, dtype=float).ravel()
        if b.size != w.shape[0]:
            raise DimensionMismatch(f"bias has {b.size} entries, weight has {w.shape[0]} rows")
        acts, relu, absv = _activation_masks(self.activation, w.shape[0])
        object.__setattr__(self, "weight", _frozen(w))
        object.__setattr__(self, "bias", _frozen(b))
        object.__setattr__(self, "activation", acts)
        object.__setattr__(self, "_relu", relu)
        object.__setattr__(self, "_abs", absv)

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d))

    @property
    def d_in(self):
        return self.weight.shape[1]

    @property
    def d_out(self):
        return self.weight.shape[0]

    @property
    def lipschitz_bound(self):
        """Spectral norm of the weight; the activations add nothing."""
        return float(np.linalg.norm(self.weight, 2))

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        single = p.ndim == 1
        p = np.atleast_2d(p)
        if p.shape[1] != self.d_in:
            raise DimensionMismatch(f"map expects dimension {self.d_in}, got {p.shape[1]}")
        out = p @ self.weight.T + self.bias
        out[:, self._relu] = np.maximum(out[:, self._relu], 0.0)
        out[:, self._abs] = np.abs(out[:, self._abs])
        return out[0] if single else out

    def to_dict(self):
        acts = self.activation
        return {
            "weight": self.weight.tolist(),
            "bias": self.bias.tolist(),
            "activation": acts[0] if len(set(acts)) == 1 else list(acts),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["weight"], d.get("bias"), d.get("activation"))


def stack_maps(a: LipschitzMap, b: LipschitzMap) -> LipschitzMap:
    """``x -> (a(x), b(x))`` for maps sharing an input dimension."""
    if a.d_in != b.d_in:
        raise DimensionMismatch("stacked maps need the same input dimension")
    return LipschitzMap(np.vstack([a.weight, b.weight]), np.concatenate([a.bias, b.bias]), a.activation + b.activation)


def block_maps(a: LipschitzMap, b: LipschitzMap) -> LipschitzMap:
    """``(u, v) -> (a(u), b(v))``."""
    w = np.zeros((a.d_out + b.d_out, a.d_in + b.d_in))
    w[: a.d_out, : a.d_in] = a.weight
    w[a.d_out :, a.d_in :] = b.weight
    return LipschitzMap(w, np.concatenate([a.bias, b.bias]), a.activation + b.activation)


@dataclass(frozen=True, eq=False)
class McnnSpec:
    """Layers ``phi_1..phi_k``, readout map ``phi_{k+1}`` and final ``psi``.

    ``psi`` may be a :class:`LipschitzMap` to R or any callable taking the
    readout vector; only the former can be serialized.
    """

    layers: tuple
    readout_phi: LipschitzMap
    readout_psi: object

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        maps = list(self.layers) + [self.readout_phi]
        for i, (a, b) in enumerate(zip(maps, maps[1:])):
            if a.d_out != b.d_in:
                raise DimensionMismatch(f"map {i} outputs {a.d_out} dims, map {i + 1} expects {b.d_in}")
        psi = self.readout_psi
        if isinstance(psi, LipschitzMap) and (psi.d_in != self.readout_phi.d_out or psi.d_out != 1):
            raise DimensionMismatch("psi must map the readout dimension to R")

    @property
    def k(self):
        return len(self.layers)

    @property
    def d_in(self):
        return (self.layers[0] if self.layers else self.readout_phi).d_in

    def layer_bound(self):
        """Product of the layer Lipschitz bounds ``C_1 ... C_k``."""
        return float(np.prod([m.lipschitz_bound for m in self.layers]))

    def to_json(self):
        if not isinstance(self.readout_psi, LipschitzMap):
            raise ValidationError("only specs with an affine psi can be serialized")
        return json.dumps(
            {
                "layers": [m.to_dict() for m in self.layers],
                "readout_phi": self.readout_phi.to_dict(),
                "readout_psi": self.readout_psi.to_dict(),
            }
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            [LipschitzMap.from_dict(m) for m in d["layers"]],
            LipschitzMap.from_dict(d["readout_phi"]),
            LipschitzMap.from_dict(d["readout_psi"]),
        )


def q_phi(phi, weights, points):
    """Average of ``phi`` over the discrete measure ``sum_i weights[i] delta_{points[i]}``."""
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != p.shape[0]:
        raise DimensionMismatch(f"{w.shape[0]} weights for {p.shape[0]} points")
    return w @ phi(p)


def apply_F(phi, x: Lmmc) -> Lmmc:
    """New label of state ``v``: the average of ``phi`` over the labels of
    the next state under ``kernel[v]``."""
    if isinstance(phi, LipschitzMap) and phi.d_in != x.label_dim:
        raise DimensionMismatch(f"layer expects dimension {phi.d_in}, labels have {x.label_dim}")
    return x.with_labels(x.kernel @ phi(x.labels))


def mcnn_forward(spec: McnnSpec, x: Lmmc) -> float:
    """Evaluate the network on one chain."""
    if spec.d_in != x.label_dim:
        raise DimensionMismatch(f"network expects dimension {spec.d_in}, labels have {x.label_dim}")
    for phi in spec.layers:
        x = apply_F(phi, x)
    readout = q_phi(spec.readout_phi, x.stationary, x.labels)
    out = spec.readout_psi(readout)
    return float(np.asarray(out).ravel()[0])


class _PairReadout:
    """``psi(s) = op(psi_a(s[:da]), psi_b(s[da:]))``."""

    def __init__(self, psi_a, psi_b, split, op):
        self.psi_a, self.psi_b, self.split, self.op = psi_a, psi_b, split, op

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a = float(np.asarray(self.psi_a(s[: self.split])).ravel()[0])
        b = float(np.asarray(self.psi_b(s[self.split :])).ravel()[0])
        return a + b if self.op == "sum" else a * b


def combine_specs(a: McnnSpec, b: McnnSpec, op="sum") -> McnnSpec:
    """One network computing ``a(x) + b(x)`` or ``a(x) * b(x)``.

    The two networks run side by side on concatenated labels: the first
    layer stacks both first layers, later layers and the readout map are
    block diagonal, and ``psi`` combines the two halves.
    """
    if op not in ("sum", "product"):
        raise ValidationError(f"op must be 'sum' or 'product', got {op!r}")
    if a.k != b.k:
        raise ValidationError("combined networks need the same number of layers")
    if a.d_in != b.d_in:
        raise DimensionMismatch("combined networks need the same input dimension")
    if a.k == 0:
        layers = []
        readout = stack_maps(a.readout_phi, b.readout_phi)
    else:
        layers = [stack_maps(a.layers[0], b.layers[0])]
        layers += [block_maps(la, lb) for la, lb in zip(a.layers[1:], b.layers[1:])]
        readout = block_maps(a.readout_phi, b.readout_phi)
    psi = _PairReadout(a.readout_psi, b.readout_psi, a.readout_phi.d_out, op)
    return McnnSpec(layers, readout, psi)


def random_spec(d_in, k, rng, width=4, activation="relu", unit_readout=True, scale=1.0) -> McnnSpec:
    """Random network with Gaussian weights and a scalar identity ``psi``.

    Args:
        d_in: label dimension.
        k: number of layers.
        rng: numpy ``Generator``.
        width: hidden dimension.
        activation: activation for every hidden unit (``"mixed"`` draws one
            per unit).
        unit_readout: rescale ``phi_{k+1}`` to spectral norm 1.
        scale: standard deviation of weights and biases.
    """

    def draw(d_out, d_prev):
        act = activation
        if activation == "mixed":
            act = list(rng.choice(["relu", "abs", "none"], size=d_out))
            act = [None if a == "none" else a for a in act]
        return LipschitzMap(scale * rng.standard_normal((d_out, d_prev)), scale * rng.standard_normal(d_out), act)

    layers = []
    d = d_in
    for _ in range(k):
        layers.append(draw(width, d))
        d = width
    readout = draw(1, d)
    if unit_readout:
        norm = max(readout.lipschitz_bound, 1e-12)
        readout = LipschitzMap(readout.weight / norm, readout.bias / norm, readout.activation)
    return McnnSpec(layers, readout, LipschitzMap.identity(1))

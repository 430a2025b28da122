"""Minimal neural-network substrate: affine layers, reverse-mode gradients,
and an adaptive-moment optimizer.

Everything is float64 numpy. Layers accumulate gradients into their own
buffers (``grad_weight``/``grad_bias``); the training loop owns zeroing
and stepping. The ReLU subgradient at 0 is 0.
"""

from dataclasses import dataclass, field

import numpy as np

from ._binio import read_container, write_container
from .errors import DimensionMismatch
from .validation import as_float_matrix

__all__ = [
    "AffineLayer",
    "ParameterStore",
    "OptimizerState",
    "affine_forward",
    "affine_backward",
    "zero_grads",
    "optimizer_step",
    "build_parameter_store",
    "save_params",
    "load_params",
]

ACTIVATIONS = ("relu", "identity")


@dataclass
class AffineLayer:
    """One affine map with a pointwise nonlinearity and gradient buffers."""

    weight: np.ndarray   # in_dim x out_dim
    bias: np.ndarray     # out_dim
    activation: str = "relu"
    grad_weight: np.ndarray = None
    grad_bias: np.ndarray = None

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.grad_weight is None:
            self.grad_weight = np.zeros_like(self.weight)
        if self.grad_bias is None:
            self.grad_bias = np.zeros_like(self.bias)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def init(cls, rng: np.random.Generator, in_dim: int, out_dim: int,
             activation: str = "relu") -> "AffineLayer":
        # symmetric uniform init, scale sqrt(6 / (fan_in + fan_out)); bias 0
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        weight = rng.uniform(-limit, limit, size=(in_dim, out_dim))
        return cls(weight=weight, bias=np.zeros(out_dim), activation=activation)


def affine_forward(layer: AffineLayer, x, apply_activation: bool = True) -> np.ndarray:
    """``activation(x @ W + b)``, or the affine value when the flag is off."""
    x = as_float_matrix(x, "input")
    if x.shape[1] != layer.in_dim:
        raise DimensionMismatch(
            f"input has {x.shape[1]} columns, layer expects {layer.in_dim}"
        )
    out = x @ layer.weight + layer.bias
    if apply_activation and layer.activation == "relu":
        np.maximum(out, 0.0, out=out)
    return out


def affine_backward(layer: AffineLayer, x, upstream_grad,
                    output: np.ndarray | None = None,
                    apply_activation: bool = True) -> np.ndarray:
    """Accumulate parameter gradients and return the input gradient.

    ``x`` must be the same matrix passed to the matching forward call;
    ``output`` (the forward's return) avoids recomputing the
    pre-activation when the layer is ReLU.
    """
    x = as_float_matrix(x, "input")
    g = as_float_matrix(upstream_grad, "upstream_grad")
    if x.shape[1] != layer.in_dim:
        raise DimensionMismatch(
            f"input has {x.shape[1]} columns, layer expects {layer.in_dim}"
        )
    if g.shape != (x.shape[0], layer.out_dim):
        raise DimensionMismatch(
            f"upstream_grad shape {g.shape} != {(x.shape[0], layer.out_dim)}"
        )
    if apply_activation and layer.activation == "relu":
        if output is None:
            output = x @ layer.weight + layer.bias
        # output > 0 iff pre-activation > 0; subgradient at 0 is 0
        g = g * (output > 0.0)
    layer.grad_weight += x.T @ g
    layer.grad_bias += g.sum(axis=0)
    return g @ layer.weight.T


class ParameterStore:
    """All parameters of the two message-passing MLP families.

    ``vnn[l]`` (l = 0..L-1) and ``enn[l-1]`` (l = 1..L-1) are stacks of
    :class:`AffineLayer`; a stack of depth 1 is a single affine+ReLU map.
    ``version`` increments on every optimizer step so stale forward
    traces can be rejected.
    """

    def __init__(self, vnn: list[list[AffineLayer]], enn: list[list[AffineLayer]]):
        if not vnn:
            raise ValueError("need at least VNN^0")
        if len(enn) != len(vnn) - 1:
            raise ValueError("need exactly L-1 edge MLPs for L node MLPs")
        self.vnn = vnn
        self.enn = enn
        self.version = 0
        self._check_chaining()

    def _check_chaining(self) -> None:
        for stack in list(self.vnn) + list(self.enn):
            for a, b in zip(stack, stack[1:]):
                if a.out_dim != b.in_dim:
                    raise DimensionMismatch("stack dims do not chain")
        for l in range(1, len(self.vnn)):
            if self.vnn[l - 1][-1].out_dim != self.enn[l - 1][0].in_dim:
                raise DimensionMismatch(f"VNN^{l-1} out != ENN^{l} in")
            if self.enn[l - 1][-1].out_dim != self.vnn[l][0].in_dim:
                raise DimensionMismatch(f"ENN^{l} out != VNN^{l} in")

    @property
    def num_layers(self) -> int:
        return len(self.vnn)

    @property
    def input_dim(self) -> int:
        return self.vnn[0][0].in_dim

    @property
    def embedding_dim(self) -> int:
        return self.vnn[-1][-1].out_dim

    def stacks(self):
        """Stacks in application order: VNN^0, ENN^1, VNN^1, ENN^2, ..."""
        yield "vnn0", self.vnn[0]
        for l in range(1, len(self.vnn)):
            yield f"enn{l}", self.enn[l - 1]
            yield f"vnn{l}", self.vnn[l]

    def parameters(self):
        """Yield ``(name, value, grad)`` for every parameter array."""
        for stack_name, stack in self.stacks():
            for d, layer in enumerate(stack):
                yield f"{stack_name}.{d}.weight", layer.weight, layer.grad_weight
                yield f"{stack_name}.{d}.bias", layer.bias, layer.grad_bias

    def num_parameters(self) -> int:
        return sum(value.size for _, value, _ in self.parameters())


def build_parameter_store(feature_dim: int, hidden_dim: int, embedding_dim: int,
                          num_layers: int, mlp_depth: int = 1, seed: int = 0,
                          stack_activation: str = "identity") -> ParameterStore:
    """Seeded construction with the standard dimension chain.

    Every intermediate width is ``hidden_dim``; the last node MLP ends at
    ``embedding_dim``. ``stack_activation`` is the nonlinearity on each
    stack's output layer; inner layers of depth > 1 stacks are always
    ReLU (identity inner layers would collapse to one affine map). The
    identity default keeps the one-class objective from saturating every
    unit at exactly zero, which ReLU output stages do at small scales.
    """
    if num_layers < 1 or mlp_depth < 1:
        raise ValueError("num_layers and mlp_depth must be >= 1")
    if min(feature_dim, hidden_dim, embedding_dim) < 1:
        raise ValueError("dims must be >= 1")
    if stack_activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {stack_activation!r}")
    rng = np.random.default_rng(seed)

    def make_stack(in_dim, out_dim):
        dims = [in_dim] + [hidden_dim] * (mlp_depth - 1) + [out_dim]
        acts = ["relu"] * (mlp_depth - 1) + [stack_activation]
        return [AffineLayer.init(rng, dims[i], dims[i + 1], acts[i])
                for i in range(mlp_depth)]

    def vnn_out(l):
        return embedding_dim if l == num_layers - 1 else hidden_dim

    vnn = [make_stack(feature_dim, vnn_out(0))]
    enn = []
    for l in range(1, num_layers):
        enn.append(make_stack(vnn_out(l - 1), hidden_dim))
        vnn.append(make_stack(hidden_dim, vnn_out(l)))
    return ParameterStore(vnn, enn)


def zero_grads(store: ParameterStore) -> None:
    for _, _, grad in store.parameters():
        grad.fill(0.0)


@dataclass
class OptimizerState:
    """Adaptive-moment (Adam) state aligned with ``store.parameters()`` order."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moments: list = field(default_factory=list)
    second_moments: list = field(default_factory=list)

    @classmethod
    def for_store(cls, store: ParameterStore, learning_rate: float = 1e-3,
                  beta1: float = 0.9, beta2: float = 0.999,
                  eps: float = 1e-8) -> "OptimizerState":
        opt = cls(learning_rate=learning_rate, beta1=beta1, beta2=beta2, eps=eps)
        for _, value, _ in store.parameters():
            opt.first_moments.append(np.zeros_like(value))
            opt.second_moments.append(np.zeros_like(value))
        return opt


def optimizer_step(store: ParameterStore, opt: OptimizerState) -> None:
    """One Adam update from the accumulated gradients (grads left intact)."""
    params = list(store.parameters())
    if len(params) != len(opt.first_moments):
        raise DimensionMismatch("optimizer state does not match parameter store")
    opt.step += 1
    b1, b2 = opt.beta1, opt.beta2
    bias1 = 1.0 - b1 ** opt.step
    bias2 = 1.0 - b2 ** opt.step
    for (name, value, grad), m, v in zip(params, opt.first_moments,
                                         opt.second_moments):
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        value -= opt.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + opt.eps)
    store.version += 1


def save_params(store: ParameterStore, path) -> None:
    """Write the documented flat binary checkpoint (bitwise round-trip)."""
    specs = []
    arrays = []
    for stack_name, stack in store.stacks():
        for d, layer in enumerate(stack):
            specs.append({
                "name": f"{stack_name}.{d}",
                "in_dim": layer.in_dim,
                "out_dim": layer.out_dim,
                "activation": layer.activation,
            })
            arrays.append((f"{stack_name}.{d}.weight", layer.weight))
            arrays.append((f"{stack_name}.{d}.bias", layer.bias))
    meta = {"num_layers": store.num_layers, "layers": specs}
    write_container(path, "params", meta, arrays)


def load_params(path) -> ParameterStore:
    meta, arrays = read_container(path, "params")
    by_stack: dict[str, dict[int, AffineLayer]] = {}
    for spec in meta["layers"]:
        stack_name, d = spec["name"].rsplit(".", 1)
        layer = AffineLayer(
            weight=arrays[f"{spec['name']}.weight"],
            bias=arrays[f"{spec['name']}.bias"],
            activation=spec["activation"],
        )
        by_stack.setdefault(stack_name, {})[int(d)] = layer

    def stack_of(name):
        members = by_stack[name]
        return [members[d] for d in sorted(members)]

    num_layers = meta["num_layers"]
    vnn = [stack_of(f"vnn{l}") for l in range(num_layers)]
    enn = [stack_of(f"enn{l}") for l in range(1, num_layers)]
    return ParameterStore(vnn, enn)

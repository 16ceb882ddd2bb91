"""Random projection networks with fixed internal parameters.

A shallow network is

    f_N(x) = offset + sum_j w_j * psi(alpha_j * x + beta_j)

where only ``w`` and ``offset`` are trained.  The deep variant stacks fixed
hidden layers in front of the same affine readout.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class NumericalError(ArithmeticError):
    """A computation lost too much accuracy to return a trustworthy result."""


class Activation(enum.Enum):
    """Activation functions that can be used as basis functions."""

    LOGISTIC = "logistic"

    def apply(self, z):
        z = np.asarray(z, dtype=float)
        # exp(-|z|) never overflows; pick the branch that keeps the ratio exact
        with np.errstate(under="ignore"):
            e = np.exp(-np.abs(z))
        return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(under="ignore"):
            e = np.exp(-np.abs(z))
        return e / (1.0 + e) ** 2


def sigmoid(z):
    return Activation.LOGISTIC.apply(z)


def _as_interval(interval) -> tuple[float, float]:
    a, b = (float(v) for v in interval)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"interval endpoints must be finite, got [{a}, {b}]")
    if not b > a:
        raise ValueError(f"degenerate interval [{a}, {b}]: need b > a")
    return a, b


def normalize_inputs(points, interval):
    """Affinely map ``points`` from ``interval`` = [a, b] onto [-1, 1]."""
    a, b = _as_interval(interval)
    x = np.asarray(points, dtype=float)
    return (2.0 * x - a - b) / (b - a)


def denormalize_inputs(points, interval):
    """Inverse of :func:`normalize_inputs`."""
    a, b = _as_interval(interval)
    t = np.asarray(points, dtype=float)
    return 0.5 * ((b - a) * t + a + b)


def _frozen(values, name) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Collocation matrix with a leading column of ones for the offset."""

    entries: np.ndarray
    sample_points: np.ndarray

    @property
    def shape(self):
        return self.entries.shape


def basis_matrix(alphas, betas, points, activation=Activation.LOGISTIC):
    """Evaluate every basis function at every point, without the offset column."""
    x = np.asarray(points, dtype=float).reshape(-1, 1)
    return activation.apply(x * np.asarray(alphas, dtype=float) + np.asarray(betas, dtype=float))


def build_design_matrix(alphas, betas, sample_points, activation=Activation.LOGISTIC) -> DesignMatrix:
    """Assemble the (n+1) x (N+1) matrix ``[1, psi(alpha_j x_i + beta_j)]``.

    Raises
    ------
    ValueError
        If the parameter vectors differ in length or two sample points
        coincide (the interpolation problem is then not well posed).
    """
    alphas = np.asarray(alphas, dtype=float).reshape(-1)
    betas = np.asarray(betas, dtype=float).reshape(-1)
    if alphas.shape != betas.shape:
        raise ValueError(f"alphas and betas differ in length: {alphas.size} != {betas.size}")
    x = _frozen(sample_points, "sample_points")
    if np.unique(x).size != x.size:
        raise ValueError("sample points must be pairwise distinct")
    entries = np.empty((x.size, alphas.size + 1))
    entries[:, 0] = 1.0
    entries[:, 1:] = basis_matrix(alphas, betas, x, activation)
    entries.setflags(write=False)
    return DesignMatrix(entries, x)


@dataclass(frozen=True, eq=False)
class RpnnModel:
    """Single hidden layer network with fixed internal weights and biases.

    When ``normalized`` is set, inputs are mapped from ``domain`` to [-1, 1]
    before the hidden layer and outputs are mapped back from [-1, 1] to
    ``output_range``.
    """

    alphas: np.ndarray
    betas: np.ndarray
    weights: np.ndarray
    offset: float
    domain: tuple[float, float]
    output_range: tuple[float, float] | None = None
    normalized: bool = False
    activation: Activation = Activation.LOGISTIC

    def __post_init__(self):
        alphas = _frozen(self.alphas, "alphas")
        betas = _frozen(self.betas, "betas")
        weights = _frozen(self.weights, "weights")
        if not (alphas.size == betas.size == weights.size) or alphas.size < 1:
            raise ValueError(
                f"alphas, betas, weights need a common length >= 1, got "
                f"{alphas.size}, {betas.size}, {weights.size}"
            )
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "domain", _as_interval(self.domain))
        if self.normalized:
            if self.output_range is None:
                raise ValueError("a normalized model needs an output_range")
            object.__setattr__(self, "output_range", _as_interval(self.output_range))
        elif self.output_range is not None:
            raise ValueError("output_range is only meaningful for normalized models")
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def n_neurons(self) -> int:
        return self.alphas.size

    @property
    def centers(self) -> np.ndarray:
        """Transition abscissae -beta/alpha (nan where alpha == 0)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.alphas != 0, -self.betas / self.alphas, np.nan)

    def hidden_inputs(self, x):
        x = np.asarray(x, dtype=float)
        return normalize_inputs(x, self.domain) if self.normalized else x

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = self.hidden_inputs(x)
        out = self.offset + basis_matrix(self.alphas, self.betas, t.reshape(-1), self.activation) @ self.weights
        if self.normalized:
            out = denormalize_inputs(out, self.output_range)
        return out.reshape(x.shape)

    def with_readout(self, weights, offset) -> "RpnnModel":
        return RpnnModel(self.alphas, self.betas, weights, offset, self.domain,
                         self.output_range, self.normalized, self.activation)

    def in_domain(self, x) -> np.ndarray:
        a, b = self.domain
        x = np.asarray(x, dtype=float)
        return (x >= a) & (x <= b)

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "activation": self.activation.value,
            "alphas": self.alphas.tolist(),
            "betas": self.betas.tolist(),
            "weights": self.weights.tolist(),
            "offset": self.offset,
            "domain": list(self.domain),
            "output_range": list(self.output_range) if self.normalized else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RpnnModel":
        expected = {"activation", "alphas", "betas", "weights", "offset", "domain", "output_range"}
        if not isinstance(data, dict) or set(data) != expected:
            got = sorted(data) if isinstance(data, dict) else type(data).__name__
            raise ValueError(f"model document must have exactly the fields {sorted(expected)}, got {got}")
        output_range = data["output_range"]
        return cls(
            alphas=data["alphas"],
            betas=data["betas"],
            weights=data["weights"],
            offset=data["offset"],
            domain=data["domain"],
            output_range=output_range,
            normalized=output_range is not None,
            activation=Activation(data["activation"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "RpnnModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"model document is not valid JSON: {exc}") from exc
        try:
            return cls.from_dict(data)
        except (TypeError, KeyError) as exc:
            raise ValueError(f"malformed model document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "RpnnModel":
        return cls.loads(Path(path).read_text())


def evaluate(model: RpnnModel, x: float) -> float:
    """Evaluate ``model`` at a single finite abscissa."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot evaluate at non-finite x={x}")
    return float(model(np.array([x]))[0])


def pairs_independent(alphas, betas) -> bool:
    """True if no pair (alpha_j, beta_j) equals +-(alpha_k, beta_k) for j != k."""
    seen = set()
    for a, b in zip(np.asarray(alphas, dtype=float), np.asarray(betas, dtype=float)):
        key = (float(a), float(b))
        if key in seen or (-key[0], -key[1]) in seen:
            return False
        seen.add(key)
    return True


@dataclass(frozen=True, eq=False)
class DeepRpnnModel:
    """Stack of fixed hidden layers followed by a trainable affine readout.

    ``hidden_weights[i]`` has shape ``(layer_sizes[i+1], layer_sizes[i])`` and
    maps the outputs of hidden layer ``i+1`` to the pre-activations of layer
    ``i+2``; the first layer uses ``alphas``/``betas`` like the shallow model.
    """

    alphas: np.ndarray
    betas: np.ndarray
    hidden_weights: tuple = ()
    hidden_biases: tuple = ()
    weights: np.ndarray = field(default=None)
    offset: float = 0.0
    activation: Activation = Activation.LOGISTIC

    def __post_init__(self):
        alphas = _frozen(self.alphas, "alphas")
        betas = _frozen(self.betas, "betas")
        if alphas.size != betas.size or alphas.size < 1:
            raise ValueError("first layer alphas and betas need a common length >= 1")
        if len(self.hidden_weights) != len(self.hidden_biases):
            raise ValueError("need one bias vector per hidden weight matrix")
        sizes = [alphas.size]
        hw, hb = [], []
        for W, bias in zip(self.hidden_weights, self.hidden_biases):
            W = np.array(W, dtype=float, copy=True)
            bias = _frozen(bias, "hidden bias")
            if W.ndim != 2 or W.shape[1] != sizes[-1] or W.shape[0] != bias.size:
                raise ValueError(
                    f"hidden layer shape mismatch: weight {W.shape}, bias {bias.shape}, "
                    f"previous layer width {sizes[-1]}"
                )
            W.setflags(write=False)
            hw.append(W)
            hb.append(bias)
            sizes.append(W.shape[0])
        weights = np.zeros(sizes[-1]) if self.weights is None else self.weights
        weights = _frozen(weights, "weights")
        if weights.size != sizes[-1]:
            raise ValueError(f"readout has {weights.size} weights but last layer has {sizes[-1]} neurons")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "hidden_weights", tuple(hw))
        object.__setattr__(self, "hidden_biases", tuple(hb))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.alphas.size,) + tuple(W.shape[0] for W in self.hidden_weights)

    def features(self, x) -> np.ndarray:
        """Outputs of the last hidden layer, one row per abscissa."""
        x = np.asarray(x, dtype=float).reshape(-1)
        o = basis_matrix(self.alphas, self.betas, x, self.activation)
        for W, bias in zip(self.hidden_weights, self.hidden_biases):
            o = self.activation.apply(o @ W.T + bias)
        return o

    def design_matrix(self, x) -> np.ndarray:
        feats = self.features(x)
        return np.hstack([np.ones((feats.shape[0], 1)), feats])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (self.offset + self.features(x.reshape(-1)) @ self.weights).reshape(x.shape)

    def with_readout(self, weights, offset) -> "DeepRpnnModel":
        return DeepRpnnModel(self.alphas, self.betas, self.hidden_weights, self.hidden_biases,
                             weights, offset, self.activation)


def evaluate_deep(model: DeepRpnnModel, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot evaluate at non-finite x={x}")
    return float(model(np.array([x]))[0])


def random_deep_rpnn(layer_sizes, seed, scales=None) -> DeepRpnnModel:
    """Draw every hidden parameter uniformly from [-s_i, s_i].

    Layer ``i`` uses scale ``scales[i]`` (default 1 for every layer), i.e. the
    naive rule applied layer by layer.  Readout weights start at zero.
    """
    sizes = [int(n) for n in layer_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError(f"layer sizes must be positive, got {layer_sizes}")
    scales = [1.0] * len(sizes) if scales is None else [float(s) for s in scales]
    if len(scales) != len(sizes):
        raise ValueError("need one scale per layer")
    rng = np.random.default_rng(seed)
    s0 = scales[0]
    alphas = rng.uniform(-s0, s0, sizes[0])
    betas = rng.uniform(-s0, s0, sizes[0])
    hidden_w, hidden_b = [], []
    for prev, cur, s in zip(sizes[:-1], sizes[1:], scales[1:]):
        hidden_w.append(rng.uniform(-s, s, (cur, prev)))
        hidden_b.append(rng.uniform(-s, s, cur))
    return DeepRpnnModel(alphas, betas, tuple(hidden_w), tuple(hidden_b))

"""Sinusoidal coordinate MLP: evaluation, exact gradients, Adam, overfitting.

All math runs in float64. A network maps normalized ``(x, y)`` pixel
coordinates to RGB; hidden layers apply ``sin(w0 * (W h + b))`` and the last
layer is affine with no output nonlinearity.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericError, TrainingError

DEFAULT_W0 = 30.0


@dataclass(frozen=True)
class SirenNetwork:
    layer_dims: tuple
    weights: tuple
    biases: tuple
    w0: float = DEFAULT_W0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        object.__setattr__(self, "layer_dims", dims)
        if len(dims) < 2 or dims[0] != 2 or dims[-1] != 3 or min(dims) < 1:
            raise InvalidArgumentError(f"bad layer dims {dims}")
        if not self.w0 > 0:
            raise InvalidArgumentError("w0 must be positive")
        ws = tuple(np.asarray(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=np.float64) for b in self.biases)
        if len(ws) != len(dims) - 1 or len(bs) != len(dims) - 1:
            raise InvalidArgumentError("need one weight matrix and bias per layer")
        for l, (w, b) in enumerate(zip(ws, bs)):
            if w.shape != (dims[l + 1], dims[l]) or b.shape != (dims[l + 1],):
                raise InvalidArgumentError(f"layer {l} parameter shape mismatch")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InvalidArgumentError(f"layer {l} has non-finite parameters")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def params(self):
        """Flat list ``[W_1..W_L, b_1..b_L]``, the order Adam state follows."""
        return list(self.weights) + list(self.biases)

    def with_params(self, params):
        L = self.n_layers
        return SirenNetwork(self.layer_dims, params[:L], params[L:], self.w0)


def init_network(layer_dims, w0=DEFAULT_W0, seed=0):
    """Seeded sine-network initialization.

    First-layer weights are U(-1/fan_in, 1/fan_in); later weights are
    U(-sqrt(6/fan_in)/w0, +sqrt(6/fan_in)/w0). Biases are U(-1/sqrt(fan_in),
    1/sqrt(fan_in)).
    """
    rng = np.random.default_rng(seed)
    dims = [int(d) for d in layer_dims]
    weights, biases = [], []
    for l in range(len(dims) - 1):
        fan_in, fan_out = dims[l], dims[l + 1]
        if l == 0:
            bound = 1.0 / fan_in
        else:
            bound = np.sqrt(6.0 / fan_in) / w0
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        bb = 1.0 / np.sqrt(fan_in)
        biases.append(rng.uniform(-bb, bb, size=fan_out))
    return SirenNetwork(tuple(dims), weights, biases, w0)


@dataclass(frozen=True)
class CoordinateGrid:
    width: int
    height: int
    coords: np.ndarray


@dataclass(frozen=True)
class ImageBuffer:
    width: int
    height: int
    pixels: np.ndarray  # (width*height, 3), row-major

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("image dimensions must be positive")
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.shape != (self.width * self.height, 3):
            raise InvalidArgumentError(f"pixel array has shape {px.shape}")
        if not (np.all(px >= 0.0) and np.all(px <= 1.0)):
            raise InvalidArgumentError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_array(cls, array):
        """Build from an ``(H, W, 3)`` array of floats in [0, 1]."""
        array = np.asarray(array, dtype=np.float64)
        h, w = array.shape[:2]
        return cls(w, h, array.reshape(h * w, 3))

    def to_array(self):
        return self.pixels.reshape(self.height, self.width, 3)


def _axis(n):
    if n == 1:
        return np.zeros(1)
    return -1.0 + 2.0 * np.arange(n) / (n - 1)


def make_grid(width, height):
    if width < 1 or height < 1:
        raise InvalidArgumentError("grid dimensions must be >= 1")
    xs, ys = _axis(width), _axis(height)
    coords = np.empty((width * height, 2))
    coords[:, 0] = np.tile(xs, height)
    coords[:, 1] = np.repeat(ys, width)
    return CoordinateGrid(width, height, coords)


def _coords(grid):
    return grid.coords if isinstance(grid, CoordinateGrid) else np.asarray(grid, dtype=np.float64)


def _forward_trace(net, coords):
    """Forward pass keeping every layer input and every sine argument."""
    if coords.ndim != 2 or coords.shape[1] != net.layer_dims[0]:
        raise InvalidArgumentError("grid does not match network input dimension")
    h = coords
    inputs, args = [], []
    last = net.n_layers - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(h)
        z = h @ w.T + b
        if l == last:
            return z, inputs, args
        a = net.w0 * z
        args.append(a)
        h = np.sin(a)


def forward(net, grid):
    """Network predictions, shape ``(n_pixels, 3)``, unclamped."""
    with np.errstate(over="ignore", invalid="ignore"):
        out, _, _ = _forward_trace(net, _coords(grid))
    return out


def _pixels(image):
    return image.pixels if isinstance(image, ImageBuffer) else np.asarray(image, dtype=np.float64)


def mse_loss(predictions, image):
    """Mean squared error over every pixel and channel."""
    pred = np.asarray(predictions, dtype=np.float64)
    target = _pixels(image)
    if pred.shape != target.shape:
        raise InvalidArgumentError(f"shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.sum(diff * diff) / diff.size)


def loss_and_gradients(net, grid, image, extra_target=None, lam=0.0):
    """Loss ``mse(pred, image) + lam * mse(pred, extra_target)`` and its gradient.

    Returns ``(loss, predictions, grads)`` with ``grads`` in ``net.params()``
    order.
    """
    if lam < 0:
        raise InvalidArgumentError("lambda must be nonnegative")
    with np.errstate(over="ignore", invalid="ignore"):
        return _loss_and_gradients(net, _coords(grid), _pixels(image), extra_target, lam)


def _loss_and_gradients(net, coords, target, extra_target, lam):
    pred, inputs, args = _forward_trace(net, coords)
    if pred.shape != target.shape:
        raise InvalidArgumentError(f"shape mismatch {pred.shape} vs {target.shape}")
    scale = 2.0 / pred.size
    resid = pred - target
    loss = float(np.sum(resid * resid) / resid.size)
    d_out = scale * resid
    if extra_target is not None:
        extra = np.asarray(extra_target, dtype=np.float64)
        if extra.shape != pred.shape:
            raise InvalidArgumentError("extra_target shape mismatch")
        reg = pred - extra
        loss += lam * float(np.sum(reg * reg) / reg.size)
        d_out = d_out + lam * scale * reg
    elif lam > 0:
        raise InvalidArgumentError("lambda > 0 requires extra_target")

    L = net.n_layers
    gw, gb = [None] * L, [None] * L
    delta = d_out
    for l in range(L - 1, -1, -1):
        gw[l] = delta.T @ inputs[l]
        gb[l] = delta.sum(axis=0)
        if not (np.all(np.isfinite(gw[l])) and np.all(np.isfinite(gb[l]))):
            raise NumericError(f"non-finite gradient in layer {l}", layer=l)
        if l > 0:
            delta = (delta @ net.weights[l]) * (net.w0 * np.cos(args[l - 1]))
    return loss, pred, gw + gb


def gradients(net, grid, image, extra_target=None, lam=0.0):
    """Per-parameter gradient list, ordered as ``net.params()``."""
    return loss_and_gradients(net, grid, image, extra_target, lam)[2]


@dataclass
class AdamState:
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(state, params, grads):
    """One Adam update; mutates ``state`` and returns new parameter arrays."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient passed to Adam")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[i] / c1
        v_hat = state.v[i] / c2
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


@dataclass(frozen=True)
class FitConfig:
    layer_dims: tuple = (2, 32, 32, 32, 32, 32, 3)
    w0: float = DEFAULT_W0
    lr: float = 2e-4
    iterations: int = 5000
    seed: int = 0


def fit_full_precision(image, config=FitConfig(), init=None, trace=None):
    """Overfit a network to ``image`` with full-batch Adam.

    ``init`` overrides the seeded initialization. If ``trace`` is a list, the
    loss before every step is appended to it.
    """
    if config.iterations < 1:
        raise InvalidArgumentError("iterations must be >= 1")
    net = init if init is not None else init_network(config.layer_dims, config.w0, config.seed)
    grid = make_grid(image.width, image.height)
    state = AdamState(lr=config.lr)
    params = net.params()
    for it in range(config.iterations):
        try:
            loss, _, grads = loss_and_gradients(net, grid, image)
            if not np.isfinite(loss):
                raise NumericError("non-finite loss")
            params = adam_step(state, params, grads)
        except NumericError as exc:
            raise TrainingError(f"training diverged at iteration {it}: {exc}", iteration=it) from exc
        if trace is not None:
            trace.append(loss)
        net = net.with_params(params)
    return net

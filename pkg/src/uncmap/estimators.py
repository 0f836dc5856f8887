"""Pluggable obstacle-distance and uncertainty estimators.

An estimator is any callable ``estimator(x_scan, pose) -> EstimatorOutput``.
Three families ship here:

* ``OracleEstimator`` draws residuals from a known per-ray error model
  around the simulator's ground truth and reports the generating scale
  as its uncertainty, i.e. a distance network with perfectly calibrated
  confidence. Rays whose nearest true obstacle the laser cannot see get
  their own (typically larger) scale.
* ``UncertaintyHead`` is a small trainable per-ray MLP mapping windows
  of (scan, estimate) to a positive scale by minimizing the negative
  log-likelihood of the chosen family. Gradients are analytic.
* ``DropoutNet`` + ``mc_dropout_estimate`` is the sampling baseline:
  dropout stays active at test time, the sample mean is the prediction
  and the sample spread the uncertainty.

Networks are plain numpy with hand-written backprop; they are small
enough that a framework would be more code than the math.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, NumericError
from .sensor_models import U_MIN, UncertaintyVector
from .world import GridWorld, Pose2D, true_distance_profile, visible_distance_profile

ESTIMATOR_SCHEMA = 1

LOG_2 = float(np.log(2.0))
HALF_LOG_2PI = 0.5 * float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class EstimatorOutput:
    """Per-ray distance estimates with their uncertainty."""

    y_hat: np.ndarray
    u_hat: UncertaintyVector

    def __post_init__(self):
        y = np.asarray(self.y_hat, dtype=float)
        if y.shape != self.u_hat.values.shape:
            raise ValueError("y_hat and u_hat lengths differ")
        object.__setattr__(self, "y_hat", y)


# -- oracle -------------------------------------------------------------------

@dataclass(frozen=True)
class ErrorModel:
    """Per-ray residual model for the oracle estimator.

    ``scale_hidden`` applies to rays whose nearest true obstacle does
    not return at scan height (glass, overhangs); a ray is classified
    hidden when the visible profile exceeds the true distance by more
    than ``hidden_margin``.
    """

    kind: str = "laplace"
    scale_visible: float = 0.1
    scale_hidden: float | None = None
    hidden_margin: float = 0.1

    def __post_init__(self):
        if self.kind not in ("gaussian", "laplace"):
            raise ConfigError(f"unknown error model kind {self.kind!r}")
        if self.scale_visible < 0 or (self.scale_hidden is not None and self.scale_hidden < 0):
            raise ConfigError("error model scales must be >= 0")


class OracleEstimator:
    """Calibrated synthetic estimator built on simulator ground truth."""

    def __init__(self, world: GridWorld, error_model: ErrorModel,
                 rng: np.random.Generator | int = 0):
        self.world = world
        self.error_model = error_model
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def ray_scales(self, pose: Pose2D, y_true: np.ndarray | None = None) -> np.ndarray:
        em = self.error_model
        if y_true is None:
            y_true = true_distance_profile(self.world, pose)
        hidden_scale = em.scale_visible if em.scale_hidden is None else em.scale_hidden
        visible = visible_distance_profile(self.world, pose)
        hidden = (visible - y_true) > em.hidden_margin
        return np.where(hidden, hidden_scale, em.scale_visible)

    def __call__(self, x_scan, pose: Pose2D) -> EstimatorOutput:
        y_true = true_distance_profile(self.world, pose)
        scales = self.ray_scales(pose, y_true)
        if self.error_model.kind == "laplace":
            resid = self.rng.laplace(0.0, scales)
        else:
            resid = self.rng.normal(0.0, scales)
        y_hat = np.clip(y_true + resid, 1e-6, self.world.config.max_range)
        return EstimatorOutput(y_hat, UncertaintyVector(scales, self.error_model.kind))


def oracle_estimate(world: GridWorld, pose: Pose2D, error_model: ErrorModel,
                    rng: np.random.Generator | int = 0) -> EstimatorOutput:
    """One-shot oracle estimate for a pose (see OracleEstimator)."""
    return OracleEstimator(world, error_model, rng)(None, pose)


class RawScanEstimator:
    """Baseline that trusts the raw scan with a small constant uncertainty."""

    def __init__(self, u_const: float = 0.05, kind: str = "laplace",
                 max_range: float = 8.0):
        self.u_const = float(u_const)
        self.kind = kind
        self.max_range = float(max_range)

    def __call__(self, x_scan, pose: Pose2D) -> EstimatorOutput:
        x = np.clip(np.asarray(x_scan, dtype=float), 1e-6, self.max_range)
        return EstimatorOutput(x, UncertaintyVector(np.full(x.shape, self.u_const), self.kind))


# -- shared MLP machinery ------------------------------------------------------

def _layer_dims(n_features: int, hidden: tuple[int, ...]) -> tuple[int, ...]:
    return (n_features, *hidden, 1)


def _unpack(params: np.ndarray, dims) -> tuple[list[np.ndarray], list[np.ndarray]]:
    Ws, bs, k = [], [], 0
    for i in range(len(dims) - 1):
        n = dims[i] * dims[i + 1]
        Ws.append(params[k:k + n].reshape(dims[i], dims[i + 1]))
        k += n
        bs.append(params[k:k + dims[i + 1]])
        k += dims[i + 1]
    return Ws, bs


def _init_params(dims, rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
    parts = []
    for i in range(len(dims) - 1):
        parts.append(rng.normal(0.0, scale, size=dims[i] * dims[i + 1]))
        parts.append(np.zeros(dims[i + 1]))
    return np.concatenate(parts)


def _windows(values: np.ndarray, radius: int) -> np.ndarray:
    """Circular per-ray windows, shape (N, 2*radius + 1)."""
    return np.stack([np.roll(values, -o) for o in range(-radius, radius + 1)], axis=1)


class _Adam:
    def __init__(self, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _tanh_forward(params, dims, X):
    Ws, bs = _unpack(params, dims)
    acts = [X]
    A = X
    for W, b in zip(Ws[:-1], bs[:-1]):
        A = np.tanh(A @ W + b)
        acts.append(A)
    z = (A @ Ws[-1] + bs[-1])[:, 0]
    return z, acts, Ws


def _backprop(delta, acts, Ws, dims, kind="tanh", masks=None):
    """Gradient of a scalar loss given d(loss)/d(output) ``delta`` (M, 1)."""
    grads_W = [None] * len(Ws)
    grads_b = [None] * len(Ws)
    for layer in range(len(Ws) - 1, -1, -1):
        grads_W[layer] = acts[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ Ws[layer].T
            if masks is not None:
                delta = delta * masks[layer - 1]
            if kind == "tanh":
                delta = delta * (1.0 - acts[layer] ** 2)
            else:  # relu
                delta = delta * (acts[layer] > 0)
    flat = []
    for gW, gb in zip(grads_W, grads_b):
        flat.append(gW.ravel())
        flat.append(gb)
    return np.concatenate(flat)


def nll_loss_and_grad(params: np.ndarray, dims, X: np.ndarray, abs_residuals: np.ndarray,
                      kind: str) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and its analytic parameter gradient.

    The network output z parameterizes the scale as u = exp(z), which
    keeps the loss smooth in the parameters:

        laplace:  ln(2) + z + |r| * exp(-z)
        gaussian: 0.5*ln(2*pi) + z + 0.5 * r^2 * exp(-2z)
    """
    z, acts, Ws = _tanh_forward(params, dims, X)
    m = X.shape[0]
    r = abs_residuals
    if kind == "laplace":
        e = r * np.exp(-z)
        loss = float(np.mean(LOG_2 + z + e))
        dz = (1.0 - e) / m
    elif kind == "gaussian":
        e = r**2 * np.exp(-2.0 * z)
        loss = float(np.mean(HALF_LOG_2PI + z + 0.5 * e))
        dz = (1.0 - e) / m
    else:
        raise ValueError(f"unknown likelihood kind {kind!r}")
    grad = _backprop(dz[:, None], acts, Ws, dims, kind="tanh")
    return loss, grad


@dataclass
class UncertaintyHead:
    """Per-ray windowed MLP producing a positive uncertainty scale.

    Input features are the circular windows of the raw scan and the
    distance estimate around each ray, scaled to [0, 1] by max_range;
    weight sharing across rays makes the output rotation-equivariant.
    """

    kind: str
    window_radius: int
    hidden: tuple[int, ...]
    max_range: float
    params: np.ndarray
    history: list = field(default_factory=list, repr=False)

    @property
    def dims(self) -> tuple[int, ...]:
        return _layer_dims(2 * (2 * self.window_radius + 1), self.hidden)

    def features(self, x_scan, y_hat) -> np.ndarray:
        x = np.asarray(x_scan, dtype=float) / self.max_range
        y = np.asarray(y_hat, dtype=float) / self.max_range
        return np.hstack((_windows(x, self.window_radius), _windows(y, self.window_radius)))

    def log_scale(self, x_scan, y_hat) -> np.ndarray:
        z, _, _ = _tanh_forward(self.params, self.dims, self.features(x_scan, y_hat))
        return z

    def to_json(self) -> dict:
        return {
            "schema": ESTIMATOR_SCHEMA,
            "type": "uncertainty_head",
            "model_kind": self.kind,
            "window_radius": self.window_radius,
            "hidden": list(self.hidden),
            "max_range": self.max_range,
            "params": self.params.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "UncertaintyHead":
        return cls(kind=data["model_kind"], window_radius=int(data["window_radius"]),
                   hidden=tuple(data["hidden"]), max_range=float(data["max_range"]),
                   params=np.asarray(data["params"], dtype=float))


def predict_uncertainty(head: UncertaintyHead, x_scan, y_hat) -> UncertaintyVector:
    """Positive per-ray scales, floored at U_MIN and capped at max_range."""
    if not np.all(np.isfinite(head.params)):
        raise NumericError("uncertainty head has non-finite parameters")
    u = np.exp(head.log_scale(x_scan, y_hat))
    return UncertaintyVector(np.minimum(u, head.max_range), head.kind)


def train_uncertainty_head(dataset, kind: str = "laplace", epochs: int = 2000,
                           lr: float = 1e-4, batch: int = 32, seed: int = 0,
                           window_radius: int = 4, hidden: tuple[int, ...] = (32, 32),
                           max_range: float = 8.0, init_scale: float = 0.1) -> UncertaintyHead:
    """Fit an uncertainty head by Adam on the mean negative log-likelihood.

    ``dataset`` is a sequence of (x_scan, y_hat, y_true) triples with a
    consistent ray count. Residuals are capped at max_range to bound
    gradients. Records the per-epoch training loss in ``head.history``
    (computed before each update, so a full batch gives the exact loss
    curve). Raises NumericError if the loss goes non-finite.
    """
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty training dataset")
    rng = np.random.default_rng(seed)
    head = UncertaintyHead(kind=kind, window_radius=window_radius, hidden=tuple(hidden),
                           max_range=float(max_range), params=np.empty(0))
    feats = []
    resid = []
    for x_scan, y_hat, y_true in dataset:
        x_scan = np.asarray(x_scan, dtype=float)
        y_hat = np.asarray(y_hat, dtype=float)
        y_true = np.asarray(y_true, dtype=float)
        if not (x_scan.shape == y_hat.shape == y_true.shape):
            raise DataError("inconsistent ray counts in training dataset")
        feats.append(head.features(x_scan, y_hat))
        resid.append(np.minimum(np.abs(y_hat - y_true), max_range))
    X = np.vstack(feats)
    r = np.concatenate(resid)

    dims = head.dims
    params = _init_params(dims, rng, init_scale)
    opt = _Adam(params.size, lr)
    n = X.shape[0]
    batch = max(1, min(batch, n))
    for epoch in range(epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, grad = nll_loss_and_grad(params, dims, X[idx], r[idx], kind)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch} "
                                   f"(lr={lr}, batch={batch})")
            params = opt.step(params, grad)
            losses.append(loss)
        head.history.append(float(np.mean(losses)))
    head.params = params
    return head


# -- MC-dropout baseline -------------------------------------------------------

@dataclass
class DropoutNet:
    """Per-ray distance regressor with dropout on its hidden units."""

    window_radius: int
    hidden: tuple[int, ...]
    p: float
    n_samples: int
    max_range: float
    params: np.ndarray
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ConfigError(f"dropout probability must lie in (0, 1), got {self.p}")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")

    @property
    def dims(self) -> tuple[int, ...]:
        return _layer_dims(2 * self.window_radius + 1, self.hidden)

    def features(self, x_scan) -> np.ndarray:
        return _windows(np.asarray(x_scan, dtype=float) / self.max_range, self.window_radius)

    def _forward(self, X, masks=None):
        Ws, bs = _unpack(self.params, self.dims)
        acts = [X]
        A = X
        for i, (W, b) in enumerate(zip(Ws[:-1], bs[:-1])):
            A = np.maximum(A @ W + b, 0.0)
            if masks is not None:
                A = A * masks[i]
            acts.append(A)
        out = (A @ Ws[-1] + bs[-1])[:, 0]
        return out, acts, Ws

    def sample_masks(self, n_rows: int, rng: np.random.Generator):
        """Inverted-dropout masks for one stochastic forward pass."""
        return [(rng.random((n_rows, h)) >= self.p) / (1.0 - self.p) for h in self.hidden]

    def predict(self, x_scan, masks=None) -> np.ndarray:
        out, _, _ = self._forward(self.features(x_scan), masks)
        return np.clip(out, 1e-6 / self.max_range, 1.0) * self.max_range

    def to_json(self) -> dict:
        return {
            "schema": ESTIMATOR_SCHEMA,
            "type": "dropout_net",
            "window_radius": self.window_radius,
            "hidden": list(self.hidden),
            "p": self.p,
            "n_samples": self.n_samples,
            "max_range": self.max_range,
            "params": self.params.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "DropoutNet":
        return cls(window_radius=int(data["window_radius"]), hidden=tuple(data["hidden"]),
                   p=float(data["p"]), n_samples=int(data["n_samples"]),
                   max_range=float(data["max_range"]),
                   params=np.asarray(data["params"], dtype=float))


def train_dropout_net(dataset, p: float = 0.5, epochs: int = 300, lr: float = 3e-3,
                      batch: int = 256, seed: int = 0, window_radius: int = 4,
                      hidden: tuple[int, ...] = (64, 64), max_range: float = 8.0,
                      n_samples: int = 50, init_scale: float = 0.3) -> DropoutNet:
    """Train the dropout distance net on mean squared error.

    ``dataset`` is a sequence of (x_scan, y_true) pairs. Dropout is
    active during training, as it will be at prediction time.
    """
    dataset = list(dataset)
    if not dataset:
        raise DataError("empty training dataset")
    rng = np.random.default_rng(seed)
    net = DropoutNet(window_radius=window_radius, hidden=tuple(hidden), p=p,
                     n_samples=n_samples, max_range=float(max_range), params=np.empty(0))
    X = np.vstack([net.features(x) for x, _ in dataset])
    y = np.concatenate([np.asarray(t, dtype=float) for _, t in dataset]) / max_range

    dims = net.dims
    params = _init_params(dims, rng, init_scale)
    opt = _Adam(params.size, lr)
    n = X.shape[0]
    batch = max(1, min(batch, n))
    for epoch in range(epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            net.params = params
            masks = net.sample_masks(len(idx), rng)
            out, acts, Ws = net._forward(X[idx], masks)
            err = out - y[idx]
            loss = float(np.mean(err**2))
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            delta = (2.0 * err / len(idx))[:, None]
            grad = _backprop(delta, acts, Ws, dims, kind="relu", masks=masks)
            params = opt.step(params, grad)
            losses.append(loss)
        net.history.append(float(np.mean(losses)))
    net.params = params
    return net


def mc_dropout_estimate(net: DropoutNet, x_scan, seed: int, n_samples: int | None = None,
                        use_variance: bool = False) -> EstimatorOutput:
    """Stochastic forward passes with dropout active at test time.

    The per-ray sample mean is the distance estimate; the sample
    standard deviation (or variance when ``use_variance`` is set) is
    the uncertainty, floored at U_MIN. Per-sample random streams are
    split from the seed by counter, so results do not depend on any
    evaluation order.
    """
    S = net.n_samples if n_samples is None else int(n_samples)
    if S < 2:
        raise ValueError("mc_dropout_estimate needs at least 2 samples")
    children = np.random.SeedSequence(seed).spawn(S)
    x = np.asarray(x_scan, dtype=float)
    preds = np.empty((S, x.size))
    for i in range(S):
        rng = np.random.default_rng(children[i])
        preds[i] = net.predict(x, net.sample_masks(x.size, rng))
    y_hat = np.clip(preds.mean(axis=0), 1e-6, net.max_range)
    spread = preds.var(axis=0) if use_variance else preds.std(axis=0)
    return EstimatorOutput(y_hat, UncertaintyVector(spread, "gaussian"))


# -- adapters used by the mapper ------------------------------------------------

class HeadEstimator:
    """Distance from a base estimator, uncertainty from a trained head."""

    def __init__(self, base, head: UncertaintyHead):
        self.base = base
        self.head = head

    def __call__(self, x_scan, pose: Pose2D) -> EstimatorOutput:
        base_out = self.base(x_scan, pose)
        return EstimatorOutput(base_out.y_hat,
                               predict_uncertainty(self.head, x_scan, base_out.y_hat))


class MCDropoutEstimator:
    """Sequentially seeded MC-dropout estimator for map building."""

    def __init__(self, net: DropoutNet, seed: int = 0, n_samples: int | None = None,
                 use_variance: bool = False):
        self.net = net
        self.seed = seed
        self.n_samples = n_samples
        self.use_variance = use_variance
        self._calls = 0

    def __call__(self, x_scan, pose: Pose2D) -> EstimatorOutput:
        call_seed = int(np.random.SeedSequence([self.seed, self._calls])
                        .generate_state(1, np.uint64)[0])
        self._calls += 1
        return mc_dropout_estimate(self.net, x_scan, seed=call_seed,
                                   n_samples=self.n_samples, use_variance=self.use_variance)


# -- artifact I/O ---------------------------------------------------------------

def save_estimator_artifact(spec: dict, path):
    if "type" not in spec:
        raise DataError("estimator artifact needs a 'type' field")
    spec = {"schema": ESTIMATOR_SCHEMA, **spec}
    with open(path, "w") as f:
        json.dump(spec, f, indent=2, sort_keys=True)
        f.write("\n")


def load_estimator_artifact(path, world: GridWorld | None = None):
    """Rebuild an estimator callable from its JSON artifact.

    Oracle-backed artifacts need the world they were defined against.
    """
    with open(path) as f:
        spec = json.load(f)
    return estimator_from_spec(spec, world)


def estimator_from_spec(spec: dict, world: GridWorld | None = None):
    if spec.get("schema") != ESTIMATOR_SCHEMA:
        raise DataError(f"unsupported estimator schema {spec.get('schema')!r}")
    kind = spec.get("type")
    if kind == "oracle":
        if world is None:
            raise DataError("oracle estimator artifact requires a world")
        em = ErrorModel(kind=spec["error_model"]["kind"],
                        scale_visible=float(spec["error_model"]["scale_visible"]),
                        scale_hidden=spec["error_model"].get("scale_hidden"),
                        hidden_margin=float(spec["error_model"].get("hidden_margin", 0.1)))
        return OracleEstimator(world, em, int(spec.get("seed", 0)))
    if kind == "raw_scan":
        return RawScanEstimator(u_const=float(spec["u_const"]),
                                kind=spec.get("model_kind", "laplace"),
                                max_range=float(spec["max_range"]))
    if kind == "uncertainty_head":
        head = UncertaintyHead.from_json(spec)
        base = estimator_from_spec(spec["base"], world) if "base" in spec else None
        if base is None:
            raise DataError("uncertainty_head artifact requires a 'base' estimator spec")
        return HeadEstimator(base, head)
    if kind == "dropout_net":
        net = DropoutNet.from_json(spec)
        return MCDropoutEstimator(net, seed=int(spec.get("seed", 0)),
                                  use_variance=bool(spec.get("use_variance", False)))
    raise DataError(f"unknown estimator artifact type {kind!r}")

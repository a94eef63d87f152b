"""Compact CNN trained from scratch with plain SGD.

Stack: three blocks of conv3x3(pad 1) + ReLU + maxpool2, then
dense + ReLU, dense(2), softmax. Tensors are float64, layout NCHW.
Class 0 is legitimate, class 1 phishing.
"""
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bytevis import check_image, read_png
from .errors import BadShape, DegenerateDataset, ModelFormat
from .store import LABELS

MAGIC = b"PVM1"
FORMAT_VERSION = 1
N_LAYERS = 5


@dataclass
class TrainConfig:
    learning_rate: float = 0.005
    steps: int = 4000
    batch_size: int = 32
    seed: int = 0
    input_side: int = 64
    channels: tuple = (8, 16, 32)
    hidden: int = 64

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be >= 1")
        if self.input_side < 8 or self.input_side % 8:
            raise BadShape(f"input_side must be a positive multiple of 8, got {self.input_side}")
        if len(self.channels) != 3 or min(self.channels) < 1 or self.hidden < 1:
            raise BadShape("need three positive conv widths and a positive hidden size")


@dataclass
class Model:
    input_side: int
    params: list  # [conv1 W, b, conv2 W, b, conv3 W, b, dense1 W, b, dense2 W, b]

    @property
    def channels(self):
        return tuple(self.params[2 * i].shape[0] for i in range(3))

    @property
    def hidden(self):
        return self.params[6].shape[1]

    def copy(self):
        return Model(self.input_side, [p.copy() for p in self.params])


@dataclass(frozen=True)
class Verdict:
    label: str
    confidence: float


@dataclass
class TrainingLog:
    losses: list = field(default_factory=list)


def param_shapes(input_side, channels=(8, 16, 32), hidden=64):
    shapes = []
    c_in = 3
    for c_out in channels:
        shapes += [(c_out, c_in, 3, 3), (c_out,)]
        c_in = c_out
    flat = channels[-1] * (input_side // 8) ** 2
    shapes += [(flat, hidden), (hidden,), (hidden, 2), (2,)]
    return shapes


def init_model(cfg):
    """He-normal weights from ``cfg.seed``, zero biases."""
    rng = np.random.default_rng(cfg.seed)
    params = []
    for shape in param_shapes(cfg.input_side, cfg.channels, cfg.hidden):
        if len(shape) == 1:
            params.append(np.zeros(shape))
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
            params.append(rng.standard_normal(shape) * math.sqrt(2.0 / fan_in))
    return Model(cfg.input_side, params)


def downsample(img, out_side):
    """Block-average pooling; channel means rounded half up."""
    img = check_image(img)
    side = img.shape[0]
    if out_side < 1 or side % out_side:
        raise BadShape(f"cannot pool {side} down to {out_side}")
    f = side // out_side
    if f == 1:
        return img.copy()
    sums = img.reshape(out_side, f, out_side, f, 3).astype(np.int64).sum(axis=(1, 3))
    n = f * f
    return ((2 * sums + n) // (2 * n)).astype(np.uint8)


def to_tensor(images):
    """uint8 ``(N, S, S, 3)`` (or a single image) -> float64 ``(N, 3, S, S)`` in [0, 1]."""
    arr = np.asarray(images)
    if arr.ndim == 3:
        arr = arr[None]
    return np.ascontiguousarray(arr.transpose(0, 3, 1, 2), dtype=np.float64) / 255.0


def _check_input(model, x):
    s = model.input_side
    if x.ndim != 4 or x.shape[1:] != (3, s, s):
        raise BadShape(f"model expects (N, 3, {s}, {s}) input, got {x.shape}")


def log_softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward(params, x):
    n = x.shape[0]
    h = x
    trace = []
    for i in range(3):
        w, b = params[2 * i], params[2 * i + 1]
        f, s = w.shape[0], h.shape[2]
        cols = kernels.im2col(h)
        z = w.reshape(f, -1) @ cols + b[:, None]
        pooled, arg = kernels.maxpool2(np.maximum(z, 0.0).reshape(n, f, s, s))
        trace.append((cols, z, arg))
        h = pooled
    flat = h.reshape(n, -1)
    z4 = flat @ params[6] + params[7]
    a4 = np.maximum(z4, 0.0)
    logits = a4 @ params[8] + params[9]
    return logits, (trace, flat, z4, a4)


def _backward(params, trace, dlogits):
    convs, flat, z4, a4 = trace
    n = dlogits.shape[0]
    grads = [None] * len(params)
    grads[8] = a4.T @ dlogits
    grads[9] = dlogits.sum(axis=0)
    dz4 = (dlogits @ params[8].T) * (z4 > 0)
    grads[6] = flat.T @ dz4
    grads[7] = dz4.sum(axis=0)
    c3 = params[4].shape[0]
    s3 = int(round(math.sqrt(flat.shape[1] // c3)))
    dh = (dz4 @ params[6].T).reshape(n, c3, s3, s3)
    for i in reversed(range(3)):
        w = params[2 * i]
        f = w.shape[0]
        cols, z, arg = convs[i]
        s = 2 * dh.shape[2]
        dz = kernels.maxpool2_backward(dh, arg).reshape(n, f, s * s) * (z > 0)
        grads[2 * i] = (dz @ cols.transpose(0, 2, 1)).sum(axis=0).reshape(w.shape)
        grads[2 * i + 1] = dz.sum(axis=(0, 2))
        if i:
            dh = kernels.col2im(w.reshape(f, -1).T @ dz, s, s)
    return grads


def forward_batch(model, x):
    """Class probabilities ``(N, 2)`` for a float input batch ``(N, 3, S, S)``."""
    x = np.asarray(x, dtype=np.float64)
    _check_input(model, x)
    logits, _ = _forward(model.params, x)
    return softmax(logits)


def forward(model, img):
    """Probability pair ``(p_legitimate, p_phishing)`` for one uint8 image."""
    probs = forward_batch(model, to_tensor(check_image(img)))[0]
    return float(probs[0]), float(probs[1])


def loss(model, x, y):
    x = np.asarray(x, dtype=np.float64)
    _check_input(model, x)
    logits, _ = _forward(model.params, x)
    return float(-log_softmax(logits)[np.arange(len(y)), y].mean())


def loss_and_gradients(model, x, y):
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    _check_input(model, x)
    if x.shape[0] == 0 or y.shape != (x.shape[0],):
        raise BadShape(f"batch of {x.shape[0]} inputs with labels of shape {y.shape}")
    logits, trace = _forward(model.params, x)
    logp = log_softmax(logits)
    n = len(y)
    dlogits = np.exp(logp)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    value = float(-logp[np.arange(n), y].mean())
    return value, _backward(model.params, trace, dlogits)


def gradients(model, x, y):
    return loss_and_gradients(model, x, y)[1]


def verdict_from_probs(probs):
    k = 1 if probs[1] > probs[0] else 0  # exact ties go to legitimate
    return Verdict(LABELS[k], float(probs[k]))


def predict(model, img):
    return verdict_from_probs(forward(model, img))


def predict_batch(model, images, chunk=256):
    out = []
    for start in range(0, len(images), chunk):
        probs = forward_batch(model, to_tensor(images[start:start + chunk]))
        out.extend(verdict_from_probs(p) for p in probs)
    return out


def load_images(samples, side, root="."):
    """Decode sample PNGs and pool them to ``side``; returns ``(images, targets)``."""
    images = np.empty((len(samples), side, side, 3), dtype=np.uint8)
    for i, s in enumerate(samples):
        images[i] = downsample(read_png(s.resolve(root)), side)
    return images, np.array([s.target for s in samples], dtype=np.intp)


def _index_stream(rng, n, batch):
    pool = np.empty(0, dtype=np.intp)
    while True:
        while len(pool) < batch:
            pool = np.concatenate([pool, rng.permutation(n)])
        yield pool[:batch]
        pool = pool[batch:]


def train_arrays(images, targets, cfg, progress=None):
    """SGD on uint8 images ``(N, S, S, 3)`` with integer targets."""
    images = np.asarray(images)
    targets = np.asarray(targets, dtype=np.intp)
    if images.ndim != 4 or images.shape[1:] != (cfg.input_side, cfg.input_side, 3):
        raise BadShape(f"training images must be (N, {cfg.input_side}, {cfg.input_side}, 3), "
                       f"got {images.shape}")
    if len(targets) != len(images):
        raise BadShape("one target per image required")
    if set(np.unique(targets).tolist()) != {0, 1}:
        raise DegenerateDataset("training needs at least one sample of each class")
    model = init_model(cfg)
    log = TrainingLog()
    batches = _index_stream(np.random.default_rng([cfg.seed, 1]), len(images), cfg.batch_size)
    for step in range(cfg.steps):
        idx = next(batches)
        value, grads = loss_and_gradients(model, to_tensor(images[idx]), targets[idx])
        for p, g in zip(model.params, grads):
            p -= cfg.learning_rate * g
        log.losses.append(value)
        if progress is not None:
            progress(step, value)
    return model, log


def train(dataset, cfg, root=".", progress=None):
    """Train on manifest samples; image paths resolve against ``root``."""
    labels = {s.label for s in dataset}
    if labels != set(LABELS):
        raise DegenerateDataset(f"training needs both classes, got {sorted(labels)}")
    images, targets = load_images(dataset, cfg.input_side, root)
    return train_arrays(images, targets, cfg, progress=progress)


def save_model(model, path):
    header = [MAGIC, struct.pack("<BI", FORMAT_VERSION, N_LAYERS)]
    for i in range(N_LAYERS):
        for p in model.params[2 * i:2 * i + 2]:
            header.append(struct.pack(f"<I{p.ndim}I", p.ndim, *p.shape))
    body = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes() for p in model.params)
    with open(path, "wb") as f:
        f.write(b"".join(header) + body)


def _validate_shapes(shapes):
    if [len(s) for s in shapes] != [4, 1, 4, 1, 4, 1, 2, 1, 2, 1]:
        raise ModelFormat("unexpected tensor ranks")
    c_in = 3
    for i in range(3):
        w, b = shapes[2 * i], shapes[2 * i + 1]
        if w[1] != c_in or w[2:] != (3, 3) or b != (w[0],):
            raise ModelFormat(f"conv layer {i + 1} shape mismatch: {w}, {b}")
        c_in = w[0]
    (flat, hidden), b4, (h2, out), b5 = shapes[6:]
    if b4 != (hidden,) or h2 != hidden or out != 2 or b5 != (2,):
        raise ModelFormat("dense layer shape mismatch")
    cells, rem = divmod(flat, c_in)
    side = math.isqrt(cells) if cells > 0 else 0
    if rem or side < 1 or side * side != cells:
        raise ModelFormat(f"dense input {flat} does not chain from conv output")
    return 8 * side


def load_model(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise ModelFormat(f"bad magic {data[:4]!r}")
    try:
        version, n_layers = struct.unpack_from("<BI", data, 4)
        if version != FORMAT_VERSION:
            raise ModelFormat(f"unsupported model version {version}")
        if n_layers != N_LAYERS:
            raise ModelFormat(f"expected {N_LAYERS} layers, file has {n_layers}")
        pos = 9
        shapes = []
        for _ in range(2 * n_layers):
            (ndim,) = struct.unpack_from("<I", data, pos)
            if not 1 <= ndim <= 4:
                raise ModelFormat(f"bad tensor rank {ndim}")
            shapes.append(struct.unpack_from(f"<{ndim}I", data, pos + 4))
            pos += 4 + 4 * ndim
    except struct.error:
        raise ModelFormat("truncated model header") from None
    side = _validate_shapes(shapes)
    expected = pos + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(data) != expected:
        raise ModelFormat(f"model body is {len(data) - pos} bytes, expected {expected - pos}")
    params = []
    for shape in shapes:
        count = int(np.prod(shape))
        params.append(np.frombuffer(data, dtype="<f8", count=count, offset=pos)
                      .astype(np.float64).reshape(shape))
        pos += 8 * count
    if not all(np.isfinite(p).all() for p in params):
        raise ModelFormat("non-finite parameters")
    return Model(side, params)


def models_equal(a, b):
    return (a.input_side == b.input_side and len(a.params) == len(b.params)
            and all(p.shape == q.shape and p.tobytes() == q.tobytes()
                    for p, q in zip(a.params, b.params)))

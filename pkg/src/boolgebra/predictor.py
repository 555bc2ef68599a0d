"""Graph-learning surrogate for traversal outcomes, implemented on numpy.

Architecture: three graph-convolution layers with separate self and
mean-neighbor weight paths (ReLU6 activations, dropout 0.1 after each layer
in train mode), global mean pooling, then a dense regression head
1000 -> 200 -> 1 with two batch-norm stages and a sigmoid output in [0, 1].
Forward, backward, and the adaptive-moment optimizer are written out
explicitly; gradients are validated against finite differences in the test
suite.

Mean reductions run over a canonical byte-order of their contribution rows,
so node relabelings reproduce bit-identical scores in eval mode.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, asdict

import numpy as np
import scipy.sparse as sp

from .aig import AigError

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def _mean_operator(edges: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    """Sparse row-normalized adjacency: (Av)[u] = mean of v over u's inputs."""
    if edges.size == 0:
        return sp.csr_matrix((n_nodes, n_nodes))
    src, dst = edges[:, 0], edges[:, 1]
    deg = np.bincount(dst, minlength=n_nodes).astype(np.float64)
    weights = 1.0 / deg[dst]
    return sp.csr_matrix((weights, (dst, src)), shape=(n_nodes, n_nodes))


def _pool_operator(segments: np.ndarray, n_graphs: int) -> sp.csr_matrix:
    counts = np.bincount(segments, minlength=n_graphs).astype(np.float64)
    counts = np.maximum(counts, 1.0)
    weights = 1.0 / counts[segments]
    cols = np.arange(segments.shape[0])
    return sp.csr_matrix((weights, (segments, cols)),
                         shape=(n_graphs, segments.shape[0]))


@dataclass
class GraphSample:
    """One model input: structure, 12-column node features, optional label."""
    edges: np.ndarray          # (E, 2) int64 src,dst pairs
    features: np.ndarray       # (N, 12)
    label: float | None = None
    design_id: str = ""


@dataclass(frozen=True)
class ModelConfig:
    in_dim: int = 12
    conv_hidden: int = 512
    conv_out: int = 64
    n_conv: int = 3
    dropout: float = 0.1
    dense_dims: tuple[int, ...] = (1000, 200, 1)
    input_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        dims = (self.in_dim, self.conv_hidden, self.conv_out, *self.dense_dims)
        if any(d <= 0 for d in dims):
            raise AigError("all layer dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise AigError("dropout must lie in [0, 1)")
        if self.dense_dims[-1] != 1:
            raise AigError("the head must end in a single regression output")

    @property
    def conv_dims(self) -> tuple[int, ...]:
        hidden = [self.conv_hidden] * (self.n_conv - 1)
        return (self.in_dim, *hidden, self.conv_out)

    @classmethod
    def paper_profile(cls, seed: int = 0) -> "ModelConfig":
        return cls(seed=seed)

    @classmethod
    def reduced_profile(cls, seed: int = 0) -> "ModelConfig":
        return cls(conv_hidden=64, conv_out=32, dense_dims=(128, 32, 1),
                   seed=seed)

    @classmethod
    def gradcheck_profile(cls, seed: int = 0) -> "ModelConfig":
        return cls(conv_hidden=8, conv_out=4, dense_dims=(16, 8, 1), seed=seed)


class Model:
    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray],
                 running: dict[str, np.ndarray], mode: str = "train",
                 train_seed: int | None = None):
        self.config = config
        self.params = params
        self.running = running
        self.mode = mode
        self.train_seed = train_seed  # seed lineage of the last training run

    def eval(self) -> "Model":
        self.mode = "eval"
        return self

    def train_mode(self) -> "Model":
        self.mode = "train"
        return self

    def param_names(self) -> list[str]:
        return sorted(self.params)


def model_init(config: ModelConfig) -> Model:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights; BN scale 1 shift 0."""
    rng = np.random.default_rng(config.seed)
    params: dict[str, np.ndarray] = {}

    def uniform(shape, fan_in):
        bound = np.sqrt(1.0 / fan_in)
        return rng.uniform(-bound, bound, size=shape)

    dims = config.conv_dims
    for i in range(config.n_conv):
        d_in, d_out = dims[i], dims[i + 1]
        params[f"conv{i}_self"] = uniform((d_in, d_out), d_in)
        params[f"conv{i}_neigh"] = uniform((d_in, d_out), d_in)
        params[f"conv{i}_bias"] = uniform((d_out,), d_in)
    head = (config.conv_out, *config.dense_dims)
    for i in range(len(config.dense_dims)):
        d_in, d_out = head[i], head[i + 1]
        params[f"dense{i}_w"] = uniform((d_in, d_out), d_in)
        params[f"dense{i}_b"] = uniform((d_out,), d_in)
    for i, dim in enumerate(config.dense_dims[:2]):
        params[f"bn{i}_gamma"] = np.ones(dim)
        params[f"bn{i}_beta"] = np.zeros(dim)
    running = {
        "bn0_mean": np.zeros(config.dense_dims[0]),
        "bn0_var": np.ones(config.dense_dims[0]),
        "bn1_mean": np.zeros(config.dense_dims[1]),
        "bn1_var": np.ones(config.dense_dims[1]),
    }
    return Model(config, params, running, mode="train")


# ---------------------------------------------------------------- reductions

def _canonical_order(values: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Deterministic row order: by segment, then by raw row bytes.

    Sorting contributions into a label-independent order makes segment sums
    bit-identical under any relabeling of the incoming rows.
    """
    arr = np.ascontiguousarray(values)
    if arr.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    as_bytes = arr.view(np.dtype((np.void, arr.dtype.itemsize * arr.shape[1])))
    byte_order = np.argsort(as_bytes.ravel(), kind="stable")
    return byte_order[np.argsort(segments[byte_order], kind="stable")]


def _segment_sums(sorted_values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Sums of contiguous row blocks via one cumulative pass."""
    csum = np.cumsum(sorted_values, axis=0)
    ends = np.r_[starts[1:] - 1, sorted_values.shape[0] - 1]
    sums = csum[ends]
    sums[1:] -= csum[starts[1:] - 1]
    return sums


def segment_mean(values: np.ndarray, segments: np.ndarray, n_segments: int,
                 canonical: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment mean of rows; empty segments yield zero rows.

    With ``canonical`` set, contributions are summed in a label-independent
    row order so relabeled inputs reproduce identical bits (the eval-mode
    contract).  Training skips that extra sort.  Returns (means, counts)."""
    counts = np.bincount(segments, minlength=n_segments).astype(np.float64)
    out = np.zeros((n_segments, values.shape[1]))
    if values.shape[0]:
        if canonical:
            order = _canonical_order(values, segments)
        else:
            order = np.argsort(segments, kind="stable")
        sv = values[order]
        ss = segments[order]
        starts = np.flatnonzero(np.r_[True, ss[1:] != ss[:-1]])
        sums = _segment_sums(sv, starts)
        present = ss[starts]
        out[present] = sums / counts[present, None]
    return out, counts


def _relu6(z: np.ndarray) -> np.ndarray:
    return np.clip(z, 0.0, 6.0)


def _relu6_grad(z: np.ndarray) -> np.ndarray:
    return ((z > 0.0) & (z < 6.0)).astype(np.float64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------- batching

def batch_graphs(samples: list[GraphSample]
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Disjoint union of the sample graphs with per-graph segment ids."""
    edges, feats, seg = [], [], []
    offset = 0
    for i, s in enumerate(samples):
        n = s.features.shape[0]
        feats.append(np.asarray(s.features, dtype=np.float64))
        if s.edges.size:
            edges.append(np.asarray(s.edges, dtype=np.int64) + offset)
        seg.append(np.full(n, i, dtype=np.int64))
        offset += n
    all_edges = (np.concatenate(edges) if edges
                 else np.zeros((0, 2), dtype=np.int64))
    return (all_edges, np.concatenate(feats), np.concatenate(seg),
            len(samples))


# ---------------------------------------------------------------- forward

def forward(model: Model, edges: np.ndarray, features: np.ndarray,
            segments: np.ndarray | None = None, n_graphs: int = 1,
            dropout_rng: np.random.Generator | None = None,
            want_cache: bool = False):
    """Scores in (0, 1), one per graph segment.

    Train mode applies dropout (an rng must be supplied) and uses batch
    statistics in the batch-norm stages; eval mode is deterministic and uses
    running statistics.
    """
    cfg = model.config
    p = model.params
    train = model.mode == "train"
    if train and cfg.dropout > 0.0 and dropout_rng is None:
        raise AigError("train-mode forward needs a dropout rng")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != cfg.in_dim:
        raise AigError(f"expected (N, {cfg.in_dim}) features,"
                       f" got {features.shape}")
    if edges.size and int(edges.max()) >= features.shape[0]:
        raise AigError("edge endpoint out of range")
    if segments is None:
        segments = np.zeros(features.shape[0], dtype=np.int64)
    cache: dict = {"edges": edges, "segments": segments, "n_graphs": n_graphs,
                   "convs": []}
    h = features * cfg.input_scale
    n_nodes = features.shape[0]
    use_ops = train or want_cache
    if use_ops:
        # sparse operators carry the aggregation and its adjoint cheaply
        agg = _mean_operator(edges, n_nodes)
        pool = _pool_operator(segments, n_graphs)
        cache["agg"] = agg
        cache["pool"] = pool
    else:
        agg = pool = None
        src = edges[:, 0] if edges.size else np.zeros(0, dtype=np.int64)
        dst = edges[:, 1] if edges.size else np.zeros(0, dtype=np.int64)
    for i in range(cfg.n_conv):
        if use_ops:
            m = agg @ h
        else:
            contrib = h[src] if edges.size else np.zeros((0, h.shape[1]))
            m, _ = segment_mean(contrib, dst, n_nodes)
        z = h @ p[f"conv{i}_self"] + m @ p[f"conv{i}_neigh"] + p[f"conv{i}_bias"]
        a = _relu6(z)
        if train and cfg.dropout > 0.0:
            mask = (dropout_rng.random(a.shape) >= cfg.dropout) / (1.0 - cfg.dropout)
            out = a * mask
        else:
            mask = None
            out = a
        cache["convs"].append({"h_in": h, "m": m, "z": z, "mask": mask})
        h = out
    if use_ops:
        pooled = pool @ h
    else:
        pooled, _ = segment_mean(h, segments, n_graphs)
    cache.update(h_final=h, pooled=pooled)
    z1 = pooled @ p["dense0_w"] + p["dense0_b"]
    a1 = _relu6(z1)
    y0, bn0_cache = _batchnorm(model, "bn0", a1, train)
    z2 = y0 @ p["dense1_w"] + p["dense1_b"]
    y1, bn1_cache = _batchnorm(model, "bn1", z2, train)
    z3 = y1 @ p["dense2_w"] + p["dense2_b"]
    scores = _sigmoid(z3)[:, 0]
    if not np.isfinite(scores).all():
        raise FloatingPointError("non-finite prediction scores")
    cache.update(z1=z1, a1=a1, y0=y0, bn0=bn0_cache, z2=z2, y1=y1,
                 bn1=bn1_cache, z3=z3, scores=scores)
    return (scores, cache) if want_cache else (scores, None)


def _batchnorm(model: Model, name: str, x: np.ndarray, train: bool):
    gamma = model.params[f"{name}_gamma"]
    beta = model.params[f"{name}_beta"]
    if train:
        mean = x.mean(axis=0)
        var = x.var(axis=0)
        model.running[f"{name}_mean"] = (
            (1 - BN_MOMENTUM) * model.running[f"{name}_mean"] + BN_MOMENTUM * mean)
        model.running[f"{name}_var"] = (
            (1 - BN_MOMENTUM) * model.running[f"{name}_var"] + BN_MOMENTUM * var)
    else:
        mean = model.running[f"{name}_mean"]
        var = model.running[f"{name}_var"]
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean) * inv_std
    out = gamma * xhat + beta
    return out, {"xhat": xhat, "inv_std": inv_std, "train": train}


# ---------------------------------------------------------------- backward

def loss_and_backward(model: Model, samples: list[GraphSample],
                      dropout_rng: np.random.Generator | None = None
                      ) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss over the batch and analytic gradients."""
    if not samples:
        raise AigError("empty batch")
    edges, feats, segments, n_graphs = batch_graphs(samples)
    labels = np.array([s.label for s in samples], dtype=np.float64)
    scores, cache = forward(model, edges, feats, segments, n_graphs,
                            dropout_rng=dropout_rng, want_cache=True)
    diff = scores - labels
    loss = float(np.mean(diff ** 2))
    p = model.params
    grads = {name: np.zeros_like(arr) for name, arr in p.items()}

    b = len(samples)
    ds = (2.0 / b) * diff
    dz3 = (ds * scores * (1.0 - scores))[:, None]
    grads["dense2_w"] = cache["y1"].T @ dz3
    grads["dense2_b"] = dz3.sum(axis=0)
    dy1 = dz3 @ p["dense2_w"].T
    dz2 = _batchnorm_backward(model, "bn1", dy1, cache["bn1"], grads)
    grads["dense1_w"] = cache["y0"].T @ dz2
    grads["dense1_b"] = dz2.sum(axis=0)
    dy0 = dz2 @ p["dense1_w"].T
    da1 = _batchnorm_backward(model, "bn0", dy0, cache["bn0"], grads)
    dz1 = da1 * _relu6_grad(cache["z1"])
    grads["dense0_w"] = cache["pooled"].T @ dz1
    grads["dense0_b"] = dz1.sum(axis=0)
    dpooled = dz1 @ p["dense0_w"].T

    # pooling backward: the adjoint of the pooling operator
    dh = cache["pool"].T @ dpooled

    agg_t = cache["agg"].T.tocsr()
    for i in reversed(range(model.config.n_conv)):
        conv = cache["convs"][i]
        if conv["mask"] is not None:
            dh = dh * conv["mask"]
        dz = dh * _relu6_grad(conv["z"])
        grads[f"conv{i}_self"] = conv["h_in"].T @ dz
        grads[f"conv{i}_neigh"] = conv["m"].T @ dz
        grads[f"conv{i}_bias"] = dz.sum(axis=0)
        dh = dz @ p[f"conv{i}_self"].T + agg_t @ (dz @ p[f"conv{i}_neigh"].T)
    return loss, grads


def _batchnorm_backward(model: Model, name: str, dout: np.ndarray,
                        bn_cache: dict, grads: dict) -> np.ndarray:
    gamma = model.params[f"{name}_gamma"]
    xhat, inv_std = bn_cache["xhat"], bn_cache["inv_std"]
    grads[f"{name}_gamma"] = (dout * xhat).sum(axis=0)
    grads[f"{name}_beta"] = dout.sum(axis=0)
    if not bn_cache["train"]:
        return dout * gamma * inv_std
    b = dout.shape[0]
    dxhat = dout * gamma
    return (inv_std / b) * (b * dxhat - dxhat.sum(axis=0)
                            - xhat * (dxhat * xhat).sum(axis=0))


# ---------------------------------------------------------------- optimizer

@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 100
    lr: float = 8e-7
    lr_decay: float = 0.5
    lr_decay_every: int = 100
    epochs: int = 1500
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    split_fraction: float = 0.8
    seed: int = 0

    def lr_at(self, epoch: int) -> float:
        return self.lr * self.lr_decay ** (epoch // self.lr_decay_every)

    @classmethod
    def paper_profile(cls, seed: int = 0) -> "TrainConfig":
        return cls(seed=seed)

    @classmethod
    def reduced_profile(cls, seed: int = 0, epochs: int = 200) -> "TrainConfig":
        return cls(lr=1e-3, epochs=epochs, seed=seed)


class AdamState:
    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
             lr: float, cfg: TrainConfig) -> None:
        self.t += 1
        b1, b2 = cfg.beta1, cfg.beta2
        for k in sorted(params):
            g = grads[k]
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            mhat = self.m[k] / (1 - b1 ** self.t)
            vhat = self.v[k] / (1 - b2 ** self.t)
            params[k] -= lr * mhat / (np.sqrt(vhat) + cfg.eps)


# ---------------------------------------------------------------- training

def train(model: Model, samples: list[GraphSample], tcfg: TrainConfig
          ) -> tuple[Model, list[tuple[int, float, float]]]:
    """Seeded training loop; returns the model and the per-epoch loss curve.

    The curve rows are (epoch, train_loss, test_loss) with a seeded
    80/20-style split taken before the first epoch.
    """
    if not samples:
        raise AigError("empty dataset")
    if any(s.label is None for s in samples):
        raise AigError("all samples must be labeled")
    rng = np.random.default_rng([model.config.seed, tcfg.seed])
    order = rng.permutation(len(samples))
    n_train = max(1, int(round(tcfg.split_fraction * len(samples))))
    if len(samples) > 1:
        n_train = min(n_train, len(samples) - 1)
    train_set = [samples[i] for i in order[:n_train]]
    test_set = [samples[i] for i in order[n_train:]]
    adam = AdamState(model.params)
    model.train_seed = tcfg.seed
    curve: list[tuple[int, float, float]] = []
    for epoch in range(tcfg.epochs):
        lr = tcfg.lr_at(epoch)
        perm = rng.permutation(len(train_set))
        losses = []
        for start in range(0, len(train_set), tcfg.batch_size):
            batch = [train_set[i] for i in perm[start:start + tcfg.batch_size]]
            drop_rng = np.random.default_rng(
                [model.config.seed, tcfg.seed, epoch, start])
            model.train_mode()
            loss, grads = loss_and_backward(model, batch, dropout_rng=drop_rng)
            adam.step(model.params, grads, lr, tcfg)
            losses.append(loss)
        test_loss = evaluate(model, test_set) if test_set else float("nan")
        curve.append((epoch + 1, float(np.mean(losses)), test_loss))
    model.eval()
    return model, curve


def evaluate(model: Model, samples: list[GraphSample]) -> float:
    if not samples:
        raise AigError("empty evaluation set")
    mode = model.mode
    model.eval()
    scores = predict_batch(model, samples)
    model.mode = mode
    labels = np.array([s.label for s in samples], dtype=np.float64)
    return float(np.mean((scores - labels) ** 2))


def predict_batch(model: Model, samples: list[GraphSample],
                  chunk: int = 128) -> np.ndarray:
    """Eval-mode scores, one per sample; smaller means predicted-better."""
    if model.mode != "eval":
        raise AigError("predict_batch requires eval mode")
    out = []
    for start in range(0, len(samples), chunk):
        part = samples[start:start + chunk]
        edges, feats, segments, n_graphs = batch_graphs(part)
        scores, _ = forward(model, edges, feats, segments, n_graphs)
        out.append(scores)
    return np.concatenate(out) if out else np.zeros(0)


def curve_to_csv(curve: list[tuple[int, float, float]]) -> str:
    lines = ["epoch,train_loss,test_loss"]
    for epoch, tr, te in curve:
        lines.append(f"{epoch},{tr!r},{te!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- persistence

_MAGIC = b"BGNN"
_FORMAT_VERSION = 1


def save_model(model: Model, path) -> None:
    """Versioned binary: magic, json header with config and shapes, raw
    float64 arrays in sorted name order, and a payload checksum."""
    names = sorted(model.params) + sorted(model.running)
    header = {
        "format_version": _FORMAT_VERSION,
        "config": asdict(model.config),
        "mode": model.mode,
        "train_seed": model.train_seed,
        "arrays": {name: list((model.params | model.running)[name].shape)
                   for name in names},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    payload = b"".join(
        np.ascontiguousarray((model.params | model.running)[name],
                             dtype="<f8").tobytes()
        for name in names)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _FORMAT_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", zlib.crc32(payload)))
        fh.write(payload)


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise AigError(f"{path} is not a model file")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != _FORMAT_VERSION:
            raise AigError(f"unsupported model format version {version}")
        header = json.loads(fh.read(header_len))
        crc = struct.unpack("<I", fh.read(4))[0]
        payload = fh.read()
    if zlib.crc32(payload) != crc:
        raise AigError(f"{path} payload checksum mismatch")
    cfg_dict = dict(header["config"])
    cfg_dict["dense_dims"] = tuple(cfg_dict["dense_dims"])
    config = ModelConfig(**cfg_dict)
    model = model_init(config)
    expected = {name: tuple(arr.shape)
                for name, arr in (model.params | model.running).items()}
    declared = {name: tuple(shape) for name, shape in header["arrays"].items()}
    if expected != declared:
        raise AigError("model dimension header does not match its config")
    offset = 0
    for name in sorted(model.params) + sorted(model.running):
        shape = expected[name]
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(payload, dtype="<f8", count=count,
                            offset=offset).reshape(shape).copy()
        offset += count * 8
        if name in model.params:
            model.params[name] = arr
        else:
            model.running[name] = arr
    if offset != len(payload):
        raise AigError("model payload size mismatch")
    model.mode = header["mode"]
    model.train_seed = header["train_seed"]
    return model

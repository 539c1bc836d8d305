"""Peephole Bi-LSTM with self-attention pooling and a sigmoid head.

Everything is plain numpy with hand-written reverse-mode gradients. Batches
are right-padded; padded positions are excluded from attention, so they never
influence valid outputs (the forward scan only looks left, and the backward
scan runs over per-sequence reversed inputs that keep padding at the tail).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

GATES = ("forget", "input", "candidate", "output")


class StaleTraceError(RuntimeError):
    """A trace was computed against parameters that have since changed."""


def sigmoid(x):
    # split on sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# Parameters


@dataclass
class LstmGateParams:
    W: np.ndarray  # (d_h, d_x) input weights
    U: np.ndarray  # (d_h, d_h) recurrent weights
    V: np.ndarray  # (d_h, d_h) peephole weights on c_{t-1}
    b: np.ndarray  # (d_h,)


@dataclass
class LstmCellParams:
    forget: LstmGateParams
    input: LstmGateParams
    candidate: LstmGateParams
    output: LstmGateParams

    def gates(self):
        return [getattr(self, g) for g in GATES]

    def stacked(self):
        """Gate matrices stacked in forget/input/candidate/output order."""
        gs = self.gates()
        return (np.concatenate([g.W for g in gs]), np.concatenate([g.U for g in gs]),
                np.concatenate([g.V for g in gs]), np.concatenate([g.b for g in gs]))


@dataclass
class ModelConfig:
    d_x: int
    d_h: int = 128
    d_a: int = 128
    dropout_rate: float = 0.4
    init_range: float = 0.08
    forget_bias: float = 1.0
    dtype: str = "float32"

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if min(self.d_x, self.d_h, self.d_a) < 1:
            raise ValueError("model dimensions must be positive")


class BiLstmAttentionModel:
    """All trainable parameters plus the dropout rate.

    ``version`` increases on every parameter update so traces can detect
    staleness.
    """

    def __init__(self, embedding, forward_cell, backward_cell, W_a, b_a, u_w, w_o, b_o, dropout_rate=0.4):
        self.embedding = embedding
        self.forward_cell = forward_cell
        self.backward_cell = backward_cell
        self.W_a = W_a
        self.b_a = b_a
        self.u_w = u_w
        self.w_o = w_o
        self.b_o = b_o
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        self.dropout_rate = float(dropout_rate)
        self.version = 0

    @property
    def d_x(self):
        return self.embedding.shape[1]

    @property
    def d_h(self):
        return self.forward_cell.forget.U.shape[0]

    @property
    def d_a(self):
        return self.W_a.shape[0]

    @property
    def dtype(self):
        return self.embedding.dtype

    @classmethod
    def initialize(cls, embedding: np.ndarray, config: ModelConfig, rng: np.random.Generator) -> "BiLstmAttentionModel":
        """Uniform(-r, r) weights, forget bias +1, embedding copied in."""
        dt = np.dtype(config.dtype)
        r = config.init_range
        h, x, a = config.d_h, config.d_x, config.d_a
        if embedding.shape[1] != x:
            raise ValueError(f"embedding width {embedding.shape[1]} != d_x {x}")

        def uni(*shape):
            return rng.uniform(-r, r, size=shape).astype(dt)

        def cell():
            gates = {}
            for name in GATES:
                b = uni(h)
                if name == "forget":
                    b = np.full(h, config.forget_bias, dtype=dt)
                gates[name] = LstmGateParams(uni(h, x), uni(h, h), uni(h, h), b)
            return LstmCellParams(**gates)

        fwd, bwd = cell(), cell()
        W_a, b_a = uni(a, 2 * h), uni(a)
        u_w = uni(a)
        while not np.any(u_w):
            u_w = uni(a)
        w_o, b_o = uni(2 * h), np.zeros((), dtype=dt)
        emb = np.array(embedding, dtype=dt, copy=True)
        emb[0] = 0
        return cls(emb, fwd, bwd, W_a, b_a, u_w, w_o, b_o, config.dropout_rate)

    def parameters(self) -> dict[str, np.ndarray]:
        """Name -> array (the live arrays, not copies), in a fixed order."""
        out = {"embedding": self.embedding}
        for prefix, cell in (("forward", self.forward_cell), ("backward", self.backward_cell)):
            for name in GATES:
                g = getattr(cell, name)
                for field_name in ("W", "U", "V", "b"):
                    out[f"{prefix}.{name}.{field_name}"] = getattr(g, field_name)
        out.update({"attention.W": self.W_a, "attention.b": self.b_a, "attention.u_w": self.u_w,
                    "head.w": self.w_o, "head.b": self.b_o})
        return out

    def copy(self) -> "BiLstmAttentionModel":
        clone = self.from_parameters({k: v.copy() for k, v in self.parameters().items()}, self.dropout_rate)
        clone.version = self.version
        return clone

    def astype(self, dtype) -> "BiLstmAttentionModel":
        return self.from_parameters({k: v.astype(dtype) for k, v in self.parameters().items()}, self.dropout_rate)

    @classmethod
    def from_parameters(cls, params: dict[str, np.ndarray], dropout_rate: float = 0.0) -> "BiLstmAttentionModel":
        def cell(prefix):
            return LstmCellParams(**{
                g: LstmGateParams(*(params[f"{prefix}.{g}.{f}"] for f in ("W", "U", "V", "b"))) for g in GATES})

        return cls(params["embedding"], cell("forward"), cell("backward"), params["attention.W"],
                   params["attention.b"], params["attention.u_w"], params["head.w"],
                   np.asarray(params["head.b"]).reshape(()), dropout_rate)

    def touch(self):
        self.version += 1


# ---------------------------------------------------------------------------
# Forward pass


def lstm_cell_forward(cell: LstmCellParams, x_t, h_prev, c_prev):
    """One peephole LSTM step; every gate (the candidate included) sees c_{t-1}.

    Returns ``(h_t, c_t, gates)`` where ``gates`` maps gate name to its
    activation.
    """
    x_t, h_prev, c_prev = np.asarray(x_t), np.asarray(h_prev), np.asarray(c_prev)
    d_h, d_x = cell.forget.W.shape
    if x_t.shape[-1] != d_x or h_prev.shape[-1] != d_h or c_prev.shape[-1] != d_h:
        raise ValueError(f"shape mismatch: x {x_t.shape}, h {h_prev.shape}, c {c_prev.shape} for d_x={d_x}, d_h={d_h}")

    def pre(g):
        return x_t @ g.W.T + h_prev @ g.U.T + c_prev @ g.V.T + g.b

    f = sigmoid(pre(cell.forget))
    i = sigmoid(pre(cell.input))
    c_in = np.tanh(pre(cell.candidate))
    c_t = f * c_prev + i * c_in
    o = sigmoid(pre(cell.output))
    h_t = o * np.tanh(c_t)
    return h_t, c_t, {"forget": f, "input": i, "candidate": c_in, "output": o}


@dataclass
class _ScanTrace:
    X: np.ndarray  # (B, T, d_x)
    H: np.ndarray  # (B, T+1, d_h), H[:, 0] = 0
    C: np.ndarray  # (B, T+1, d_h)
    act: np.ndarray  # (B, T, 4 d_h) gate activations
    tanh_c: np.ndarray  # (B, T, d_h)


def _scan(cell: LstmCellParams, X: np.ndarray) -> _ScanTrace:
    W, U, V, b = cell.stacked()
    B, T, _ = X.shape
    h = U.shape[1]
    dt = X.dtype
    H = np.zeros((B, T + 1, h), dtype=dt)
    C = np.zeros((B, T + 1, h), dtype=dt)
    act = np.empty((B, T, 4 * h), dtype=dt)
    tanh_c = np.empty((B, T, h), dtype=dt)
    XW = X @ W.T + b
    for t in range(T):
        pre = XW[:, t] + H[:, t] @ U.T + C[:, t] @ V.T
        a = act[:, t]
        a[:, : 2 * h] = sigmoid(pre[:, : 2 * h])
        a[:, 2 * h: 3 * h] = np.tanh(pre[:, 2 * h: 3 * h])
        a[:, 3 * h:] = sigmoid(pre[:, 3 * h:])
        C[:, t + 1] = a[:, :h] * C[:, t] + a[:, h: 2 * h] * a[:, 2 * h: 3 * h]
        tanh_c[:, t] = np.tanh(C[:, t + 1])
        H[:, t + 1] = a[:, 3 * h:] * tanh_c[:, t]
    return _ScanTrace(X, H, C, act, tanh_c)


def _scan_backward(cell: LstmCellParams, tr: _ScanTrace, dH: np.ndarray):
    """Backprop through time; returns (dX, {gate: LstmGateParams of grads})."""
    W, U, V, _ = cell.stacked()
    B, T, _ = tr.X.shape
    h = U.shape[1]
    DP = np.zeros((B, T, 4 * h), dtype=dH.dtype)
    dh_next = np.zeros((B, h), dtype=dH.dtype)
    dc_next = np.zeros((B, h), dtype=dH.dtype)
    for t in reversed(range(T)):
        a = tr.act[:, t]
        f, i, g, o = a[:, :h], a[:, h: 2 * h], a[:, 2 * h: 3 * h], a[:, 3 * h:]
        tc = tr.tanh_c[:, t]
        dh = dH[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dp = DP[:, t]
        dp[:, :h] = dc * tr.C[:, t] * f * (1.0 - f)
        dp[:, h: 2 * h] = dc * g * i * (1.0 - i)
        dp[:, 2 * h: 3 * h] = dc * i * (1.0 - g * g)
        dp[:, 3 * h:] = dh * tc * o * (1.0 - o)
        dh_next = dp @ U
        dc_next = dc * f + dp @ V
    flat = DP.reshape(B * T, 4 * h)
    dW = flat.T @ tr.X.reshape(B * T, -1)
    dU = flat.T @ tr.H[:, :-1].reshape(B * T, h)
    dV = flat.T @ tr.C[:, :-1].reshape(B * T, h)
    db = flat.sum(axis=0)
    dX = DP @ W
    grads = {name: LstmGateParams(dW[k * h:(k + 1) * h], dU[k * h:(k + 1) * h],
                                  dV[k * h:(k + 1) * h], db[k * h:(k + 1) * h])
             for k, name in enumerate(GATES)}
    return dX, grads


@dataclass
class Batch:
    """Right-padded token ids with per-token lexicon weights."""

    ids: np.ndarray  # (B, T) int64, 0 = pad/unknown
    weights: np.ndarray  # (B, T) senti(w) per token, 0 at padding
    lengths: np.ndarray  # (B,)

    @classmethod
    def from_sequences(cls, ids_list, weights_list) -> "Batch":
        lengths = np.array([len(s) for s in ids_list], dtype=np.int64)
        if lengths.size == 0 or lengths.min() < 1:
            raise ValueError("every sequence must be non-empty")
        B, T = len(ids_list), int(lengths.max())
        ids = np.zeros((B, T), dtype=np.int64)
        weights = np.zeros((B, T), dtype=np.float64)
        for k, (s, w) in enumerate(zip(ids_list, weights_list)):
            if len(w) != len(s):
                raise ValueError("ids and weights differ in length")
            ids[k, : len(s)] = s
            weights[k, : len(s)] = w
        return cls(ids, weights, lengths)

    @property
    def valid(self) -> np.ndarray:
        return np.arange(self.ids.shape[1])[None, :] < self.lengths[:, None]

    def reverse_index(self) -> np.ndarray:
        """Per row, reverses the valid prefix and leaves padding in place (an involution)."""
        t = np.arange(self.ids.shape[1])[None, :]
        L = self.lengths[:, None]
        return np.where(t < L, L - 1 - t, t)


@dataclass
class ForwardTrace:
    batch: Batch
    version: int
    model_id: int
    fwd: _ScanTrace
    bwd: _ScanTrace
    rev: np.ndarray
    hidden: np.ndarray  # (B, T, 2 d_h) concatenated Bi-LSTM outputs
    dropout_mask: np.ndarray  # (B, T, 2 d_h), already scaled by 1/(1-rate)
    dropped: np.ndarray  # hidden * mask
    u: np.ndarray  # (B, T, d_a) attention projections
    logits: np.ndarray  # (B, T), -inf at padding
    attention: np.ndarray  # (B, T), 0 at padding
    features: np.ndarray  # (B, T, 2 d_h) a_i * h_i
    context: np.ndarray  # (B, 2 d_h)
    z: np.ndarray  # (B,) head pre-activation
    prob: np.ndarray  # (B,)

    def attention_weights(self, row: int = 0) -> np.ndarray:
        return self.attention[row, : self.batch.lengths[row]]


def bilstm_forward(model: BiLstmAttentionModel, X: np.ndarray, lengths=None):
    """Run both directions over ``X`` (T, d_x) or (B, T, d_x).

    Returns the (…, T, 2 d_h) concatenation ``[forward h_i, backward h_i]``.
    """
    X = np.asarray(X, dtype=model.dtype)
    single = X.ndim == 2
    if single:
        X = X[None]
    if X.shape[1] == 0:
        raise ValueError("empty sequence")
    if lengths is None:
        lengths = np.full(X.shape[0], X.shape[1], dtype=np.int64)
    batch = Batch(np.zeros(X.shape[:2], dtype=np.int64), np.zeros(X.shape[:2]), np.asarray(lengths))
    hidden, *_ = _bilstm(model, X, batch)
    return hidden[0] if single else hidden


def _bilstm(model, X, batch):
    rev = batch.reverse_index()
    rows = np.arange(X.shape[0])[:, None]
    fwd = _scan(model.forward_cell, X)
    bwd = _scan(model.backward_cell, X[rows, rev])
    hidden = np.concatenate([fwd.H[:, 1:], bwd.H[:, 1:][rows, rev]], axis=-1)
    return hidden, fwd, bwd, rev


def attention_forward(model: BiLstmAttentionModel, hidden: np.ndarray, valid=None):
    """Self-attention over ``hidden`` (T, 2 d_h) or (B, T, 2 d_h).

    Returns ``(weights, context, u, logits)``.
    """
    hidden = np.asarray(hidden)
    single = hidden.ndim == 2
    if single:
        hidden = hidden[None]
    if hidden.shape[1] == 0:
        raise ValueError("empty sequence")
    if hidden.shape[-1] != model.W_a.shape[1]:
        raise ValueError(f"hidden width {hidden.shape[-1]} != {model.W_a.shape[1]}")
    if valid is None:
        valid = np.ones(hidden.shape[:2], dtype=bool)
    u = np.tanh(hidden @ model.W_a.T + model.b_a)
    logits = np.where(valid, u @ model.u_w, -np.inf)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    a = e / e.sum(axis=1, keepdims=True)
    context = np.einsum("bt,btk->bk", a, hidden)
    if single:
        return a[0], context[0], u[0], logits[0]
    return a, context, u, logits


def forward(model: BiLstmAttentionModel, batch: Batch, train_mode: bool = False,
            rng: Optional[np.random.Generator] = None, dropout_mask: Optional[np.ndarray] = None) -> ForwardTrace:
    """Full forward pass with every intermediate cached for ``backward``.

    In train mode, inverted dropout is applied to the Bi-LSTM outputs; pass
    ``dropout_mask`` to reuse a fixed mask (gradient checks do this).
    """
    dt = model.dtype
    X = model.embedding[batch.ids] * batch.weights[..., None].astype(dt)
    hidden, fwd, bwd, rev = _bilstm(model, X, batch)
    if dropout_mask is not None:
        mask = np.asarray(dropout_mask, dtype=dt)
    elif train_mode and model.dropout_rate > 0:
        if rng is None:
            raise ValueError("train_mode with dropout needs an rng")
        keep = 1.0 - model.dropout_rate
        mask = (rng.random(hidden.shape) < keep).astype(dt) / dt.type(keep)
    else:
        mask = np.ones_like(hidden)
    dropped = hidden * mask
    a, context, u, logits = attention_forward(model, dropped, batch.valid)
    z = context @ model.w_o + model.b_o
    return ForwardTrace(batch, model.version, id(model), fwd, bwd, rev, hidden, mask, dropped, u, logits,
                        a, a[..., None] * dropped, context, z, sigmoid(z))


def predict(model: BiLstmAttentionModel, ids, weights, train_mode: bool = False,
            rng: Optional[np.random.Generator] = None) -> ForwardTrace:
    """Single-sequence forward pass (a batch of one)."""
    if len(ids) == 0:
        raise ValueError("cannot predict on an empty token list")
    return forward(model, Batch.from_sequences([ids], [weights]), train_mode, rng)


def predict_proba(model: BiLstmAttentionModel, batch: Batch) -> np.ndarray:
    return forward(model, batch).prob


# ---------------------------------------------------------------------------
# Loss


@dataclass(frozen=True)
class LossConfig:
    """Half root-mean-square error plus half positive-class cross entropy.

    ``rooted=False`` drops the square root; ``two_term_ce=True`` swaps in
    standard binary cross entropy. Both default to the as-published form.
    """

    rooted: bool = True
    two_term_ce: bool = False
    eps: float = 1e-7


def _loss_parts(y, p, cfg: LossConfig):
    y = np.asarray(y, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if y.size == 0:
        raise ValueError("loss over an empty batch")
    if y.shape != p.shape:
        raise ValueError("labels and probabilities differ in shape")
    return y, np.clip(p, cfg.eps, 1.0 - cfg.eps), y.size


def loss(y, p, cfg: LossConfig = LossConfig()) -> float:
    y, pc, n = _loss_parts(y, p, cfg)
    sq = np.mean((y - pc) ** 2)
    err = np.sqrt(sq) if cfg.rooted else sq
    if cfg.two_term_ce:
        ce = -np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))
    else:
        ce = -np.mean(y * np.log(pc))
    return float(0.5 * err + 0.5 * ce)


def loss_grad(y, p, cfg: LossConfig = LossConfig()) -> np.ndarray:
    """d loss / d p, with zero gradient where the clamp is active."""
    y, pc, n = _loss_parts(y, p, cfg)
    resid = y - pc
    if cfg.rooted:
        rms = np.sqrt(np.mean(resid ** 2))
        d_err = -resid / (n * rms) if rms > 0 else np.zeros_like(resid)
    else:
        d_err = -2.0 * resid / n
    if cfg.two_term_ce:
        d_ce = -(y / pc - (1.0 - y) / (1.0 - pc)) / n
    else:
        d_ce = -(y / pc) / n
    inside = (np.asarray(p) > cfg.eps) & (np.asarray(p) < 1.0 - cfg.eps)
    return (0.5 * d_err + 0.5 * d_ce) * inside


# ---------------------------------------------------------------------------
# Backward pass


def backward(model: BiLstmAttentionModel, trace: ForwardTrace, y, cfg: LossConfig = LossConfig()) -> dict[str, np.ndarray]:
    """Exact gradient of the batch loss for every entry of ``model.parameters()``.

    The embedding padding row (index 0) is frozen and always gets zero.
    """
    if trace.version != model.version or trace.model_id != id(model):
        raise StaleTraceError("trace does not match the current model parameters")
    dt = model.dtype
    B = trace.prob.shape[0]
    y = np.asarray(y, dtype=np.float64).reshape(B)
    p = trace.prob.astype(np.float64)
    dz = (loss_grad(y, p, cfg) * p * (1.0 - p)).astype(dt)

    grads: dict[str, np.ndarray] = {}
    grads["head.w"] = trace.context.T @ dz
    grads["head.b"] = np.asarray(dz.sum(), dtype=dt)
    dctx = dz[:, None] * model.w_o[None, :]

    a, Hd, u = trace.attention, trace.dropped, trace.u
    dHd = a[..., None] * dctx[:, None, :]
    da = np.einsum("btk,bk->bt", Hd, dctx)
    de = a * (da - (a * da).sum(axis=1, keepdims=True))
    grads["attention.u_w"] = np.einsum("bt,bta->a", de, u)
    dpre = de[..., None] * model.u_w * (1.0 - u * u)
    flat = dpre.reshape(-1, dpre.shape[-1])
    grads["attention.W"] = flat.T @ Hd.reshape(-1, Hd.shape[-1])
    grads["attention.b"] = flat.sum(axis=0)
    dHd += dpre @ model.W_a

    dhidden = dHd * trace.dropout_mask
    h = model.d_h
    rows = np.arange(B)[:, None]
    dX_f, g_f = _scan_backward(model.forward_cell, trace.fwd, dhidden[..., :h])
    dX_b, g_b = _scan_backward(model.backward_cell, trace.bwd, dhidden[..., h:][rows, trace.rev])
    dX = dX_f + dX_b[rows, trace.rev]

    for prefix, gg in (("forward", g_f), ("backward", g_b)):
        for name in GATES:
            for field_name in ("W", "U", "V", "b"):
                grads[f"{prefix}.{name}.{field_name}"] = getattr(gg[name], field_name)

    dE = np.zeros_like(model.embedding)
    np.add.at(dE, trace.batch.ids, dX * trace.batch.weights[..., None].astype(dt))
    dE[0] = 0
    grads["embedding"] = dE
    return {k: grads[k] for k in model.parameters()}


# ---------------------------------------------------------------------------
# Checkpoints

MAGIC = b"BLSTMATT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIIII32sdI")


@dataclass
class CheckpointHeader:
    format_version: int
    d_x: int
    d_h: int
    d_a: int
    n_rows: int
    vocab_hash: bytes
    dropout_rate: float
    names: list[str] = field(default_factory=list)


def checkpoint_bytes(model: BiLstmAttentionModel, vocab_hash: bytes = b"") -> bytes:
    vocab_hash = vocab_hash.ljust(32, b"\0")[:32]
    params = model.parameters()
    out = [_HEADER.pack(MAGIC, FORMAT_VERSION, model.d_x, model.d_h, model.d_a, model.embedding.shape[0],
                        vocab_hash, model.dropout_rate, len(params))]
    for name, arr in params.items():
        raw = name.encode()
        out.append(struct.pack("<HB", len(raw), arr.ndim) + raw)
        out.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(out)


def save_checkpoint(model: BiLstmAttentionModel, path, vocab_hash: bytes = b"", sidecar: Optional[dict] = None) -> Path:
    """Binary container (little-endian f32 tensors) plus a JSON sidecar."""
    path = Path(path)
    path.write_bytes(checkpoint_bytes(model, vocab_hash))
    meta = {"format_version": FORMAT_VERSION, "d_x": model.d_x, "d_h": model.d_h, "d_a": model.d_a,
            "vocab_hash": vocab_hash.hex(),
            "config": sidecar or {}}
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_checkpoint(data: bytes):
    magic, version, d_x, d_h, d_a, n_rows, vhash, rate, n = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ValueError("not a checkpoint file")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    off = _HEADER.size
    params = {}
    for _ in range(n):
        name_len, ndim = struct.unpack_from("<HB", data, off)
        off += 3
        name = data[off: off + name_len].decode()
        off += name_len
        shape = struct.unpack_from(f"<{ndim}I", data, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        params[name] = np.frombuffer(data, dtype="<f4", count=count, offset=off).reshape(shape).astype(np.float32)
        off += 4 * count
    if off != len(data):
        raise ValueError("trailing bytes in checkpoint")
    header = CheckpointHeader(version, d_x, d_h, d_a, n_rows, vhash, rate, list(params))
    model = BiLstmAttentionModel.from_parameters(params, rate)
    return model, header


def load_checkpoint(path):
    """Returns ``(model, header, sidecar)``; sidecar is ``{}`` when absent."""
    path = Path(path)
    model, header = read_checkpoint(path.read_bytes())
    side = path.with_suffix(".json")
    sidecar = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    return model, header, sidecar

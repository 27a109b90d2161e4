"""Neural layers with hand-written forward and backward passes.

Each forward returns (output, cache); the matching backward consumes the
cache plus the upstream gradient and returns parameter gradients (keyed
by the same names as the parameter dict) and input gradients. Recurrent
parameters live in a flat dict under a caller-chosen prefix, e.g.
"tagger.fwd.W_z".
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    EmptySequence,
    EvenWidth,
    IndexOutOfRange,
    ShapeMismatch,
)
from .ops import sigmoid, softmax, softmax_backward
from .params import Grads, ModelParameters

ParamDict = dict[str, np.ndarray]


def _p(params, name: str) -> np.ndarray:
    entries = params.entries if isinstance(params, ModelParameters) else params
    return entries[name]


# ---------------------------------------------------------------------------
# linear
# ---------------------------------------------------------------------------

def linear_forward(W: np.ndarray, b: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """y = x W^T + b for x[batch, in], W[out, in], b[out]."""
    if x.ndim != 2 or W.ndim != 2 or x.shape[1] != W.shape[1] or b.shape != (W.shape[0],):
        raise ShapeMismatch(f"linear: x{x.shape} W{W.shape} b{b.shape}")
    y = x @ W.T + b
    return y, {"x": x, "W": W}


def linear_backward(grad_out: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (grad_W, grad_b, grad_x)."""
    x, W = cache["x"], cache["W"]
    grad_W = grad_out.T @ x
    grad_b = grad_out.sum(axis=0)
    grad_x = grad_out @ W
    return grad_W, grad_b, grad_x


# ---------------------------------------------------------------------------
# embedding
# ---------------------------------------------------------------------------

def embedding_lookup(table: np.ndarray, ids: list[int]) -> np.ndarray:
    for i in ids:
        if i < 0 or i >= table.shape[0]:
            raise IndexOutOfRange(f"id {i} outside vocab of {table.shape[0]}")
    return table[np.asarray(ids, dtype=np.intp)]


def embedding_backward(grad_out: np.ndarray, ids: list[int], vocab_size: int) -> np.ndarray:
    """Scatter-add of per-position gradients; duplicate ids accumulate."""
    grad = np.zeros((vocab_size, grad_out.shape[1]), dtype=np.float64)
    np.add.at(grad, np.asarray(ids, dtype=np.intp), grad_out)
    return grad


# ---------------------------------------------------------------------------
# 1-d convolution over the sequence axis, zero same-padding
# ---------------------------------------------------------------------------

def conv1d_forward(filters: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Cross-correlation: filters[c_out, width, d] over x[len, d] -> [len, c_out]."""
    c_out, width, d = filters.shape
    if width % 2 == 0:
        raise EvenWidth(f"filter width {width} must be odd")
    if x.ndim != 2 or x.shape[1] != d:
        raise ShapeMismatch(f"conv1d: x{x.shape} vs filters{filters.shape}")
    n = x.shape[0]
    pad = width // 2
    xpad = np.zeros((n + 2 * pad, d), dtype=np.float64)
    xpad[pad : pad + n] = x
    y = np.zeros((n, c_out), dtype=np.float64)
    for w in range(width):
        # window rows t+w of xpad align with output position t
        y += xpad[w : w + n] @ filters[:, w, :].T
    return y, {"xpad": xpad, "filters": filters, "n": n, "pad": pad}


def conv1d_backward(grad_out: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray]:
    """Returns (grad_filters, grad_x)."""
    xpad, filters = cache["xpad"], cache["filters"]
    n, pad = cache["n"], cache["pad"]
    c_out, width, d = filters.shape
    grad_f = np.zeros_like(filters)
    grad_xpad = np.zeros_like(xpad)
    for w in range(width):
        grad_f[:, w, :] = grad_out.T @ xpad[w : w + n]
        grad_xpad[w : w + n] += grad_out @ filters[:, w, :]
    return grad_f, grad_xpad[pad : pad + n]


# ---------------------------------------------------------------------------
# gated recurrences
# ---------------------------------------------------------------------------

GRU_PARAM_NAMES = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")
LSTM_PARAM_NAMES = (
    "W_i", "U_i", "b_i", "W_f", "U_f", "b_f",
    "W_o", "U_o", "b_o", "W_g", "U_g", "b_g",
)


def init_gru(params: ModelParameters, prefix: str, d: int, h: int) -> None:
    for gate in ("z", "r", "h"):
        params.add(f"{prefix}W_{gate}", (h, d))
        params.add(f"{prefix}U_{gate}", (h, h))
        params.add_zeros(f"{prefix}b_{gate}", (h,))


def init_lstm(params: ModelParameters, prefix: str, d: int, h: int) -> None:
    for gate in ("i", "f", "o", "g"):
        params.add(f"{prefix}W_{gate}", (h, d))
        params.add(f"{prefix}U_{gate}", (h, h))
        params.add_zeros(f"{prefix}b_{gate}", (h,))


def gru_step(params, prefix: str, x_t: np.ndarray, h_prev: np.ndarray) -> tuple[np.ndarray, dict]:
    """One GRU step: h' = z*h_prev + (1-z)*candidate."""
    g = lambda n: _p(params, prefix + n)
    if g("W_z").shape[1] != x_t.shape[0] or g("U_z").shape[1] != h_prev.shape[0]:
        raise ShapeMismatch("gru_step: input/state sizes disagree with parameters")
    z = sigmoid(g("W_z") @ x_t + g("U_z") @ h_prev + g("b_z"))
    r = sigmoid(g("W_r") @ x_t + g("U_r") @ h_prev + g("b_r"))
    rh = r * h_prev
    cand = np.tanh(g("W_h") @ x_t + g("U_h") @ rh + g("b_h"))
    h = z * h_prev + (1.0 - z) * cand
    cache = {"x": x_t, "h_prev": h_prev, "z": z, "r": r, "rh": rh, "cand": cand}
    return h, cache


def gru_step_backward(params, prefix: str, cache: dict, dh: np.ndarray) -> tuple[Grads, np.ndarray, np.ndarray]:
    """Returns (param grads, dx, dh_prev)."""
    g = lambda n: _p(params, prefix + n)
    x, h_prev = cache["x"], cache["h_prev"]
    z, r, rh, cand = cache["z"], cache["r"], cache["rh"], cache["cand"]

    dz = dh * (h_prev - cand)
    dcand = dh * (1.0 - z)
    dh_prev = dh * z

    da_cand = dcand * (1.0 - cand * cand)
    drh = g("U_h").T @ da_cand
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)

    grads: Grads = {
        prefix + "W_z": np.outer(da_z, x),
        prefix + "U_z": np.outer(da_z, h_prev),
        prefix + "b_z": da_z,
        prefix + "W_r": np.outer(da_r, x),
        prefix + "U_r": np.outer(da_r, h_prev),
        prefix + "b_r": da_r,
        prefix + "W_h": np.outer(da_cand, x),
        prefix + "U_h": np.outer(da_cand, rh),
        prefix + "b_h": da_cand,
    }
    dx = g("W_z").T @ da_z + g("W_r").T @ da_r + g("W_h").T @ da_cand
    dh_prev = dh_prev + g("U_z").T @ da_z + g("U_r").T @ da_r
    return grads, dx, dh_prev


def lstm_step(params, prefix: str, x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    g = lambda n: _p(params, prefix + n)
    if g("W_i").shape[1] != x_t.shape[0] or g("U_i").shape[1] != h_prev.shape[0]:
        raise ShapeMismatch("lstm_step: input/state sizes disagree with parameters")
    i = sigmoid(g("W_i") @ x_t + g("U_i") @ h_prev + g("b_i"))
    f = sigmoid(g("W_f") @ x_t + g("U_f") @ h_prev + g("b_f"))
    o = sigmoid(g("W_o") @ x_t + g("U_o") @ h_prev + g("b_o"))
    cand = np.tanh(g("W_g") @ x_t + g("U_g") @ h_prev + g("b_g"))
    c = f * c_prev + i * cand
    tc = np.tanh(c)
    h = o * tc
    cache = {"x": x_t, "h_prev": h_prev, "c_prev": c_prev, "i": i, "f": f, "o": o, "cand": cand, "tc": tc}
    return h, c, cache


def lstm_step_backward(params, prefix: str, cache: dict, dh: np.ndarray, dc: np.ndarray) -> tuple[Grads, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (param grads, dx, dh_prev, dc_prev)."""
    g = lambda n: _p(params, prefix + n)
    x, h_prev, c_prev = cache["x"], cache["h_prev"], cache["c_prev"]
    i, f, o, cand, tc = cache["i"], cache["f"], cache["o"], cache["cand"], cache["tc"]

    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    df = dc_total * c_prev
    di = dc_total * cand
    dcand = dc_total * i
    dc_prev = dc_total * f

    da_i = di * i * (1.0 - i)
    da_f = df * f * (1.0 - f)
    da_o = do * o * (1.0 - o)
    da_g = dcand * (1.0 - cand * cand)

    grads: Grads = {}
    dx = np.zeros_like(x)
    dh_prev = np.zeros_like(h_prev)
    for gate, da in (("i", da_i), ("f", da_f), ("o", da_o), ("g", da_g)):
        grads[f"{prefix}W_{gate}"] = np.outer(da, x)
        grads[f"{prefix}U_{gate}"] = np.outer(da, h_prev)
        grads[f"{prefix}b_{gate}"] = da
        dx += g(f"W_{gate}").T @ da
        dh_prev += g(f"U_{gate}").T @ da
    return grads, dx, dh_prev, dc_prev


def init_bidirectional(params: ModelParameters, prefix: str, cell_kind: str, d: int, h: int) -> None:
    init = init_lstm if cell_kind == "lstm" else init_gru
    init(params, prefix + "fwd.", d, h)
    init(params, prefix + "bwd.", d, h)


def bidirectional_encode(cell_kind: str, params, prefix: str, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Independent left-to-right and right-to-left passes, concatenated per position.

    Output is [len, 2h]; the first h columns are the forward pass.
    """
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptySequence("bidirectional_encode needs at least one position")
    n = x.shape[0]
    h_size = _p(params, prefix + "fwd.W_z" if cell_kind == "gru" else prefix + "fwd.W_i").shape[0]

    def run(direction: str, order: range):
        h = np.zeros(h_size, dtype=np.float64)
        c = np.zeros(h_size, dtype=np.float64)
        outs = [None] * n
        caches = [None] * n
        for t in order:
            if cell_kind == "gru":
                h, cache = gru_step(params, prefix + direction + ".", x[t], h)
            else:
                h, c, cache = lstm_step(params, prefix + direction + ".", x[t], h, c)
            outs[t] = h
            caches[t] = cache
        return np.stack(outs), caches

    fwd, fwd_caches = run("fwd", range(n))
    bwd, bwd_caches = run("bwd", range(n - 1, -1, -1))
    out = np.concatenate([fwd, bwd], axis=1)
    cache = {"cell_kind": cell_kind, "prefix": prefix, "n": n, "h": h_size,
             "fwd_caches": fwd_caches, "bwd_caches": bwd_caches, "d": x.shape[1]}
    return out, cache


def bidirectional_backward(params, cache: dict, grad_out: np.ndarray) -> tuple[Grads, np.ndarray]:
    """BPTT through both directions; returns (param grads, grad_x)."""
    from .params import accumulate

    cell_kind, prefix = cache["cell_kind"], cache["prefix"]
    n, h_size, d = cache["n"], cache["h"], cache["d"]
    grads: Grads = {}
    dx = np.zeros((n, d), dtype=np.float64)

    def run(direction: str, caches, order, grad_slice):
        dh_carry = np.zeros(h_size, dtype=np.float64)
        dc_carry = np.zeros(h_size, dtype=np.float64)
        for t in order:
            dh = grad_slice[t] + dh_carry
            if cell_kind == "gru":
                g, dxt, dh_carry = gru_step_backward(params, prefix + direction + ".", caches[t], dh)
            else:
                g, dxt, dh_carry, dc_carry = lstm_step_backward(params, prefix + direction + ".", caches[t], dh, dc_carry)
            accumulate(grads, g)
            dx[t] += dxt

    # forward direction processed t = n-1 .. 0; backward direction t = 0 .. n-1
    run("fwd", cache["fwd_caches"], range(n - 1, -1, -1), grad_out[:, :h_size])
    run("bwd", cache["bwd_caches"], range(n), grad_out[:, h_size:])
    return grads, dx


# ---------------------------------------------------------------------------
# scaled dot-product attention
# ---------------------------------------------------------------------------

def attention(query: np.ndarray, keys: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    """weights = softmax(keys . query / sqrt(d)); context = weights^T values."""
    if keys.ndim != 2 or keys.shape[0] == 0:
        raise EmptySequence("attention needs at least one key")
    if keys.shape[0] != values.shape[0] or keys.shape[1] != query.shape[0]:
        raise ShapeMismatch(f"attention: q{query.shape} K{keys.shape} V{values.shape}")
    scale = 1.0 / np.sqrt(query.shape[0])
    scores = keys @ query * scale
    weights = softmax(scores)
    context = weights @ values
    cache = {"query": query, "keys": keys, "values": values, "weights": weights, "scale": scale}
    return context, weights, cache


def attention_backward(cache: dict, grad_context: np.ndarray, grad_weights: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (grad_query, grad_keys, grad_values)."""
    q, K, V, w, scale = cache["query"], cache["keys"], cache["values"], cache["weights"], cache["scale"]
    dV = np.outer(w, grad_context)
    dw = V @ grad_context
    if grad_weights is not None:
        dw = dw + grad_weights
    ds = softmax_backward(w, dw)
    dK = np.outer(ds, q) * scale
    dq = (K.T @ ds) * scale
    return dq, dK, dV


# ---------------------------------------------------------------------------
# layer normalization
# ---------------------------------------------------------------------------

_LN_EPS = 1e-12


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, dict]:
    """Per-row normalization to mean 0 / variance 1, then affine scale/shift."""
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mean) * inv
    y = gamma * xhat + beta
    return y, {"xhat": xhat, "inv": inv, "gamma": gamma}


def layer_norm_backward(grad_out: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (grad_x, grad_gamma, grad_beta)."""
    xhat, inv, gamma = cache["xhat"], cache["inv"], cache["gamma"]
    d = xhat.shape[-1]
    dgamma = (grad_out * xhat).sum(axis=tuple(range(grad_out.ndim - 1)))
    dbeta = grad_out.sum(axis=tuple(range(grad_out.ndim - 1)))
    dxhat = grad_out * gamma
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# transformer encoder layer (post-norm, ReLU feed-forward)
# ---------------------------------------------------------------------------

def init_transformer_layer(params: ModelParameters, prefix: str, d: int, heads: int, d_ff: int | None = None) -> None:
    if d % heads != 0:
        raise ShapeMismatch(f"model dim {d} not divisible by {heads} heads")
    d_ff = d_ff or 4 * d
    for name in ("Wq", "Wk", "Wv", "Wo"):
        params.add(f"{prefix}{name}", (d, d))
    # no key bias: a shared offset on every key cancels in the row softmax
    for name in ("bq", "bv", "bo"):
        params.add_zeros(f"{prefix}{name}", (d,))
    params.add(f"{prefix}W1", (d_ff, d))
    params.add_zeros(f"{prefix}b1", (d_ff,))
    params.add(f"{prefix}W2", (d, d_ff))
    params.add_zeros(f"{prefix}b2", (d,))
    for name in ("ln1_g", "ln2_g"):
        params.add_zeros(f"{prefix}{name}", (d,))
        params.entries[f"{prefix}{name}"][:] = 1.0
    for name in ("ln1_b", "ln2_b"):
        params.add_zeros(f"{prefix}{name}", (d,))


def _mha_forward(params, prefix: str, x: np.ndarray, heads: int) -> tuple[np.ndarray, dict]:
    g = lambda n: _p(params, prefix + n)
    n, d = x.shape
    dh = d // heads
    scale = 1.0 / np.sqrt(dh)
    Q = x @ g("Wq").T + g("bq")
    K = x @ g("Wk").T
    V = x @ g("Wv").T + g("bv")
    Qh = Q.reshape(n, heads, dh)
    Kh = K.reshape(n, heads, dh)
    Vh = V.reshape(n, heads, dh)
    A = np.empty((heads, n, n), dtype=np.float64)
    Oh = np.empty((n, heads, dh), dtype=np.float64)
    for h in range(heads):
        scores = Qh[:, h] @ Kh[:, h].T * scale
        A[h] = softmax(scores, axis=-1)
        Oh[:, h] = A[h] @ Vh[:, h]
    O = Oh.reshape(n, d)
    out = O @ g("Wo").T + g("bo")
    cache = {"x": x, "Qh": Qh, "Kh": Kh, "Vh": Vh, "A": A, "O": O,
             "heads": heads, "dh": dh, "scale": scale}
    return out, cache


def _mha_backward(params, prefix: str, cache: dict, grad_out: np.ndarray) -> tuple[Grads, np.ndarray]:
    g = lambda name: _p(params, prefix + name)
    x, Qh, Kh, Vh, A, O = cache["x"], cache["Qh"], cache["Kh"], cache["Vh"], cache["A"], cache["O"]
    heads, dh, scale = cache["heads"], cache["dh"], cache["scale"]
    n, d = x.shape

    grads: Grads = {
        prefix + "Wo": grad_out.T @ O,
        prefix + "bo": grad_out.sum(axis=0),
    }
    dO = (grad_out @ g("Wo")).reshape(n, heads, dh)
    dQ = np.empty_like(Qh)
    dK = np.empty_like(Kh)
    dV = np.empty_like(Vh)
    for h in range(heads):
        dA = dO[:, h] @ Vh[:, h].T
        dV[:, h] = A[h].T @ dO[:, h]
        dS = softmax_backward(A[h], dA, axis=-1)
        dQ[:, h] = dS @ Kh[:, h] * scale
        dK[:, h] = dS.T @ Qh[:, h] * scale
    dQ2, dK2, dV2 = dQ.reshape(n, d), dK.reshape(n, d), dV.reshape(n, d)

    dx = np.zeros_like(x)
    for name, dmat in (("Wq", dQ2), ("Wk", dK2), ("Wv", dV2)):
        grads[prefix + name] = dmat.T @ x
        if name != "Wk":
            grads[prefix + "b" + name[1]] = dmat.sum(axis=0)
        dx += dmat @ g(name)
    return grads, dx


def transformer_encoder_layer(params, prefix: str, x: np.ndarray, heads: int) -> tuple[np.ndarray, dict]:
    """Self-attention + residual + layer norm, then FFN + residual + layer norm."""
    g = lambda n: _p(params, prefix + n)
    if x.ndim != 2 or x.shape[1] % heads != 0:
        raise ShapeMismatch(f"transformer layer: x{x.shape} with {heads} heads")
    a, mha_cache = _mha_forward(params, prefix, x, heads)
    r1 = x + a
    n1, ln1_cache = layer_norm(r1, g("ln1_g"), g("ln1_b"))
    pre = n1 @ g("W1").T + g("b1")
    hidden = np.maximum(pre, 0.0)
    f = hidden @ g("W2").T + g("b2")
    r2 = n1 + f
    y, ln2_cache = layer_norm(r2, g("ln2_g"), g("ln2_b"))
    cache = {"mha": mha_cache, "ln1": ln1_cache, "ln2": ln2_cache,
             "n1": n1, "pre": pre, "hidden": hidden, "prefix": prefix}
    return y, cache


def transformer_encoder_layer_backward(params, cache: dict, grad_out: np.ndarray) -> tuple[Grads, np.ndarray]:
    from .params import accumulate

    prefix = cache["prefix"]
    g = lambda n: _p(params, prefix + n)
    n1, pre, hidden = cache["n1"], cache["pre"], cache["hidden"]

    dr2, dg2, db2 = layer_norm_backward(grad_out, cache["ln2"])
    grads: Grads = {prefix + "ln2_g": dg2, prefix + "ln2_b": db2}

    df = dr2
    dn1 = dr2.copy()
    dhidden = df @ g("W2")
    grads[prefix + "W2"] = df.T @ hidden
    grads[prefix + "b2"] = df.sum(axis=0)
    dpre = dhidden * (pre > 0)
    grads[prefix + "W1"] = dpre.T @ n1
    grads[prefix + "b1"] = dpre.sum(axis=0)
    dn1 += dpre @ g("W1")

    dr1, dg1, db1 = layer_norm_backward(dn1, cache["ln1"])
    grads[prefix + "ln1_g"] = dg1
    grads[prefix + "ln1_b"] = db1

    da = dr1
    dx = dr1.copy()
    mha_grads, dx2 = _mha_backward(params, prefix, cache["mha"], da)
    accumulate(grads, mha_grads)
    dx += dx2
    return grads, dx

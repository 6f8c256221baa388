"""Dense neural-network syndrome decoder, trained from scratch.

Architecture: input, two hidden layers, output; sizes interpolate linearly
from the input size d*(d^2+2d-3)/2 (every stabilizer value for each of the d
cycles) down to the output size 2d^2 (an X and a Z correction bit per data
qubit, interleaved).  Hidden activations are ReLU, the output is a sigmoid,
and training minimizes mean binary cross-entropy with mini-batch Adam.

Input encoding (one row of S stabilizer bits per cycle, Z family first):

* basis-type family: cycles 1..d-1 as measured; the last row carries the
  values reconstructed from the final transversal data readout, which is
  also the consistency target during decoding;
* opposite-type family: each cycle XORed against its own first cycle, so
  every channel is zero on a noiseless run.

Decoding truncates the network outputs at 0.5; if the implied correction is
consistent with the final syndrome it is returned, otherwise candidates are
redrawn as independent Bernoulli trials up to ``max_resamples`` times before
a logical failure is declared.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .code import HeavyHexCode, stabilizer_count
from .noise import NoiseModel
from .pauli import PauliFrame
from .sim import Basis, CompiledExperiment, compile_experiment, run_batch


class DeclaredLogicalFailure:
    """Returned when no syndrome-consistent correction was found in time."""

    def __repr__(self):
        return "DeclaredLogicalFailure"

    def __eq__(self, other):
        return isinstance(other, DeclaredLogicalFailure)

    def __hash__(self):
        return hash("DeclaredLogicalFailure")


DECLARED_FAILURE = DeclaredLogicalFailure()


def mlp_layer_sizes(d: int) -> list[int]:
    n_in = d * stabilizer_count(d)
    n_out = 2 * d * d
    h1 = int(np.floor(n_in + (n_out - n_in) / 3.0 + 0.5))
    h2 = int(np.floor(n_in + 2.0 * (n_out - n_in) / 3.0 + 0.5))
    return [n_in, h1, h2, n_out]


@dataclass
class Mlp:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # per layer, shape (n_out, n_in)
    biases: list[np.ndarray]
    d: int | None = None
    config: dict = field(default_factory=dict)


def init_mlp(d: int, seed: int) -> Mlp:
    sizes = mlp_layer_sizes(d)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return Mlp(sizes, weights, biases, d=d, config={"seed": seed})


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def forward(mlp: Mlp, x) -> np.ndarray:
    """Network output probabilities, strictly inside (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.shape[1] != mlp.layer_sizes[0]:
        raise ValueError(
            f"input length {a.shape[1]} != expected {mlp.layer_sizes[0]}"
        )
    for w, b in zip(mlp.weights[:-1], mlp.biases[:-1]):
        a = np.maximum(a @ w.T + b, 0.0)
    a = _sigmoid(a @ mlp.weights[-1].T + mlp.biases[-1])
    return a[0] if single else a


def _forward_trace(mlp: Mlp, x):
    acts = [x]
    pre = []
    a = x
    for w, b in zip(mlp.weights[:-1], mlp.biases[:-1]):
        z = a @ w.T + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    z = a @ mlp.weights[-1].T + mlp.biases[-1]
    pre.append(z)
    acts.append(_sigmoid(z))
    return acts, pre


def bce_loss(probs, labels) -> float:
    p = np.clip(probs, 1e-12, 1.0 - 1e-12)
    return float(-(labels * np.log(p) + (1 - labels) * np.log(1 - p)).mean())


def bce_gradients(mlp: Mlp, x, y):
    """Mean-BCE gradients for a batch; output-layer delta is (p - y)/(B*n)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    acts, pre = _forward_trace(mlp, x)
    batch, n_out = y.shape
    delta = (acts[-1] - y) / (batch * n_out)
    grads_w, grads_b = [], []
    for layer in range(len(mlp.weights) - 1, -1, -1):
        grads_w.append(delta.T @ acts[layer])
        grads_b.append(delta.sum(axis=0))
        if layer > 0:
            delta = (delta @ mlp.weights[layer]) * (pre[layer - 1] > 0)
    return grads_w[::-1], grads_b[::-1], bce_loss(acts[-1], y)


@dataclass
class TrainConfig:
    epochs: int = 10
    batch: int = 256
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr_decay: float = 1.0  # multiplicative, per epoch


def train(mlp: Mlp, dataset, hyper: TrainConfig, rng: np.random.Generator):
    """Mini-batch Adam on mean binary cross-entropy.

    ``dataset`` is a pair (inputs, labels) of arrays; rows are shuffled each
    epoch with the supplied generator, so results are deterministic given the
    seed.  Returns the trained network and the per-epoch mean loss trace.
    """
    x_all, y_all = dataset
    x_all = np.asarray(x_all)
    y_all = np.asarray(y_all)
    if len(x_all) == 0:
        raise ValueError("empty dataset")
    m_w = [np.zeros_like(w) for w in mlp.weights]
    v_w = [np.zeros_like(w) for w in mlp.weights]
    m_b = [np.zeros_like(b) for b in mlp.biases]
    v_b = [np.zeros_like(b) for b in mlp.biases]
    step = 0
    trace = []
    lr = hyper.lr
    for _epoch in range(hyper.epochs):
        order = rng.permutation(len(x_all))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(x_all), hyper.batch):
            idx = order[start:start + hyper.batch]
            gw, gb, loss = bce_gradients(
                mlp, x_all[idx].astype(np.float64), y_all[idx].astype(np.float64)
            )
            if not np.isfinite(loss):
                raise RuntimeError(f"training diverged: loss={loss} at step {step}")
            step += 1
            b1c = 1.0 - hyper.beta1 ** step
            b2c = 1.0 - hyper.beta2 ** step
            for i in range(len(mlp.weights)):
                m_w[i] = hyper.beta1 * m_w[i] + (1 - hyper.beta1) * gw[i]
                v_w[i] = hyper.beta2 * v_w[i] + (1 - hyper.beta2) * gw[i] ** 2
                mlp.weights[i] -= lr * (m_w[i] / b1c) / (
                    np.sqrt(v_w[i] / b2c) + hyper.eps
                )
                m_b[i] = hyper.beta1 * m_b[i] + (1 - hyper.beta1) * gb[i]
                v_b[i] = hyper.beta2 * v_b[i] + (1 - hyper.beta2) * gb[i] ** 2
                mlp.biases[i] -= lr * (m_b[i] / b1c) / (
                    np.sqrt(v_b[i] / b2c) + hyper.eps
                )
            epoch_loss += loss
            n_batches += 1
        trace.append(epoch_loss / n_batches)
        lr *= hyper.lr_decay
    return mlp, trace


def gradient_check(mlp: Mlp, example, epsilon: float) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon outside [1e-7, 1e-3]")
    x, y = example
    gw, gb, _ = bce_gradients(mlp, x, y)
    worst = 0.0
    params = [(mlp.weights, gw), (mlp.biases, gb)]
    for arrays, grads in params:
        for arr, grad in zip(arrays, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                _, _, up = bce_gradients(mlp, x, y)
                flat[i] = orig - epsilon
                _, _, down = bce_gradients(mlp, x, y)
                flat[i] = orig
                numeric = (up - down) / (2 * epsilon)
                denom = max(abs(gflat[i]) + abs(numeric), 1e-8)
                worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst


# -- dataset generation ------------------------------------------------------


@dataclass(frozen=True)
class TrainingExample:
    basis: str
    input: np.ndarray
    label: np.ndarray


def encode_batch(exp: CompiledExperiment, record) -> tuple[np.ndarray, np.ndarray]:
    """ANN inputs and labels for a BatchRecord of the same experiment."""
    code = exp.code
    c = exp.cycles
    stab = record.stabilizer_outcomes  # (B, C, S)
    basis_cols = np.array(
        list(code.z_family if exp.basis is Basis.MemZ else code.x_family)
    )
    opp_cols = np.array(
        list(code.x_family if exp.basis is Basis.MemZ else code.z_family)
    )
    inp = stab.copy()
    inp[:, :, opp_cols] ^= stab[:, 0:1, opp_cols]
    # last basis-family row: reconstruction from the final data readout
    recon = record.detection_events[:, c, basis_cols] ^ stab[:, c - 1, basis_cols]
    inp[:, c - 1, basis_cols] = recon
    x = inp.reshape(len(stab), -1)
    labels = np.empty((len(stab), 2 * code.n_data), dtype=np.uint8)
    labels[:, 0::2] = record.true_x
    labels[:, 1::2] = record.true_z
    return x, labels


def generate_dataset(
    code: HeavyHexCode,
    model: NoiseModel,
    count: int,
    cycles: int | None,
    rng: np.random.Generator,
    basis="memz",
    chunk: int = 20_000,
):
    """Stream (inputs, labels) chunks from fresh memory experiments."""
    if count < 1:
        raise ValueError("count must be >= 1")
    exp = compile_experiment(code, None, cycles, basis)
    remaining = count
    while remaining > 0:
        n = min(chunk, remaining)
        record = run_batch(exp, model, n, rng)
        yield encode_batch(exp, record)
        remaining -= n


def collect_dataset(code, model, count, cycles, rng, basis="memz"):
    xs, ys = [], []
    for x, y in generate_dataset(code, model, count, cycles, rng, basis):
        xs.append(x)
        ys.append(y)
    return np.concatenate(xs), np.concatenate(ys)


def iter_examples(code, model, count, cycles, rng, basis="memz"):
    """TrainingExample stream (one object per shot)."""
    basis_val = Basis(str(basis).lower()).value
    for x, y in generate_dataset(code, model, count, cycles, rng, basis):
        for row_x, row_y in zip(x, y):
            yield TrainingExample(basis_val, row_x, row_y)


def write_jsonl(path, examples) -> int:
    n = 0
    with open(path, "w") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {
                        "basis": ex.basis,
                        "input": "".join(str(int(b)) for b in ex.input),
                        "label": "".join(str(int(b)) for b in ex.label),
                    }
                )
                + "\n"
            )
            n += 1
    return n


def read_jsonl(path) -> tuple[np.ndarray, np.ndarray, str]:
    xs, ys, basis = [], [], None
    with open(path) as fh:
        for line in fh:
            doc = json.loads(line)
            basis = doc["basis"]
            xs.append(np.frombuffer(doc["input"].encode(), dtype=np.uint8) - ord("0"))
            ys.append(np.frombuffer(doc["label"].encode(), dtype=np.uint8) - ord("0"))
    return np.array(xs), np.array(ys), basis


# -- decoding ----------------------------------------------------------------


def correction_frame(code: HeavyHexCode, bits) -> PauliFrame:
    """Interleaved correction bits -> Pauli frame on the data register."""
    x = z = 0
    for q in range(code.n_data):
        if bits[2 * q]:
            x |= 1 << q
        if bits[2 * q + 1]:
            z |= 1 << q
    return PauliFrame(code.n_data, x, z)


def syndrome_matrix(code: HeavyHexCode, indices) -> np.ndarray:
    """Rows: selected stabilizers; columns: interleaved correction bits."""
    n_z = len(code.z_stabilizers)
    mat = np.zeros((len(indices), 2 * code.n_data), dtype=np.uint8)
    for row, s in enumerate(indices):
        if s < n_z:
            mask = code.z_stabilizers[s].z
            col0 = 0  # Z stabilizers check X bits (even positions)
        else:
            mask = code.x_stabilizers[s - n_z].x
            col0 = 1
        for q in range(code.n_data):
            if (mask >> q) & 1:
                mat[row, 2 * q + col0] = 1
    return mat


def decode_ann(
    code: HeavyHexCode,
    mlp: Mlp,
    inp,
    final_syndrome,
    max_resamples: int,
    rng: np.random.Generator,
    check_indices=None,
):
    """Truncate-then-resample decoding against the final syndrome.

    ``final_syndrome`` holds the target bits for ``check_indices`` (all
    stabilizers by default).  Every returned correction satisfies them
    exactly; if no candidate does within ``max_resamples`` Bernoulli draws,
    DECLARED_FAILURE is returned.
    """
    if max_resamples < 0:
        raise ValueError("max_resamples must be >= 0")
    if check_indices is None:
        check_indices = list(range(code.n_stabilizers))
    target = np.asarray(final_syndrome, dtype=np.uint8)
    mat = syndrome_matrix(code, check_indices)
    probs = forward(mlp, inp)
    bits = (probs > 0.5).astype(np.uint8)
    if np.array_equal((mat @ bits) % 2, target):
        return correction_frame(code, bits)
    for _ in range(max_resamples):
        bits = (rng.random(len(probs)) < probs).astype(np.uint8)
        if np.array_equal((mat @ bits) % 2, target):
            return correction_frame(code, bits)
    return DECLARED_FAILURE


def decode_ann_batch(
    mat: np.ndarray,
    probs: np.ndarray,
    targets: np.ndarray,
    max_resamples: int,
    rng: np.random.Generator,
):
    """Vectorized truncate-then-resample over a batch.

    Returns (corrections (B, 2n) uint8, declared (B,) bool).  ``mat`` maps
    interleaved correction bits to the checked syndrome bits.
    """
    bits = (probs > 0.5).astype(np.uint8)
    syn = (bits @ mat.T) % 2
    ok = (syn == targets).all(axis=1)
    corrections = bits
    active = np.flatnonzero(~ok)
    for _ in range(max_resamples):
        if len(active) == 0:
            break
        draw = (rng.random((len(active), probs.shape[1])) < probs[active]).astype(
            np.uint8
        )
        syn = (draw @ mat.T) % 2
        good = (syn == targets[active]).all(axis=1)
        hit = active[good]
        corrections[hit] = draw[good]
        active = active[~good]
    declared = np.zeros(len(probs), dtype=bool)
    declared[active] = True
    return corrections, declared


# -- model file --------------------------------------------------------------

MODEL_FORMAT = "hh-mlp/1"


def save_mlp(mlp: Mlp, path: str) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "d": mlp.d,
        "layer_sizes": list(mlp.layer_sizes),
        "weights": [w.tolist() for w in mlp.weights],
        "biases": [b.tolist() for b in mlp.biases],
        "config": mlp.config,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_mlp(path: str) -> Mlp:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {doc.get('format')!r}")
    return Mlp(
        layer_sizes=list(doc["layer_sizes"]),
        weights=[np.array(w) for w in doc["weights"]],
        biases=[np.array(b) for b in doc["biases"]],
        d=doc.get("d"),
        config=doc.get("config", {}),
    )

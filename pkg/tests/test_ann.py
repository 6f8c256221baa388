import numpy as np
import pytest

import heavyhex as hh
from heavyhex.ann import (
    DECLARED_FAILURE,
    Mlp,
    TrainConfig,
    bce_gradients,
    collect_dataset,
    correction_frame,
    decode_ann,
    decode_ann_batch,
    encode_batch,
    forward,
    generate_dataset,
    gradient_check,
    init_mlp,
    iter_examples,
    load_mlp,
    mlp_layer_sizes,
    read_jsonl,
    save_mlp,
    syndrome_matrix,
    train,
    write_jsonl,
)
from heavyhex.noise import Fault, FaultPattern, NoiseModel, uniform_model
from heavyhex.sim import compile_experiment, run_batch


def tiny_mlp(weights, biases):
    return Mlp([2, 2, 2, 2], [np.array(w, float) for w in weights],
               [np.array(b, float) for b in biases])


def test_layer_sizes_frozen():
    assert mlp_layer_sizes(3) == [18, 18, 18, 18]
    assert mlp_layer_sizes(5) == [80, 70, 60, 50]
    # d=7 from the stated formulas: in = 7*(49+14-3)/2 = 210, out = 2*49 = 98
    assert mlp_layer_sizes(7) == [210, 173, 135, 98]


def test_init_deterministic():
    a = init_mlp(3, seed=9)
    b = init_mlp(3, seed=9)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    assert all((b == 0).all() for b in a.biases)


def test_zero_network_outputs_half():
    mlp = Mlp([4, 3, 3, 2], [np.zeros((3, 4)), np.zeros((3, 3)), np.zeros((2, 3))],
              [np.zeros(3), np.zeros(3), np.zeros(2)])
    out = forward(mlp, np.zeros(4))
    assert np.allclose(out, 0.5)


def test_outputs_strictly_inside_unit_interval():
    mlp = init_mlp(3, seed=0)
    rng = np.random.default_rng(1)
    x = rng.integers(0, 2, size=(50, 18))
    probs = forward(mlp, x)
    assert (probs > 0).all() and (probs < 1).all()


def test_forward_rejects_bad_length():
    mlp = init_mlp(3, seed=0)
    with pytest.raises(ValueError):
        forward(mlp, np.zeros(17))


def test_forward_matches_hand_computation():
    w1 = [[0.5, -0.25], [1.0, 0.75]]
    w2 = [[-0.5, 0.3], [0.2, -0.1]]
    w3 = [[0.7, -0.6], [0.4, 0.9]]
    b1, b2, b3 = [0.1, -0.2], [0.05, 0.0], [-0.3, 0.2]
    mlp = tiny_mlp([w1, w2, w3], [b1, b2, b3])
    x = np.array([1.0, 0.0])
    h1 = np.maximum(np.array(w1) @ x + b1, 0)
    h2 = np.maximum(np.array(w2) @ h1 + b2, 0)
    want = 1 / (1 + np.exp(-(np.array(w3) @ h2 + b3)))
    assert np.allclose(forward(mlp, x), want, atol=1e-12)


def test_output_layer_gradient_is_error_times_input():
    # hand-derived: dL/dW3 = (p - y)/n_out (x) h2 for a single example
    rng = np.random.default_rng(3)
    mlp = tiny_mlp([rng.normal(size=(2, 2)) for _ in range(3)],
                   [rng.normal(size=2) for _ in range(3)])
    x = np.array([1.0, -1.0])
    y = np.array([1.0, 0.0])
    gw, gb, _ = bce_gradients(mlp, x, y)
    h1 = np.maximum(mlp.weights[0] @ x + mlp.biases[0], 0)
    h2 = np.maximum(mlp.weights[1] @ h1 + mlp.biases[1], 0)
    p = forward(mlp, x)
    delta = (p - y) / 2.0
    assert np.allclose(gw[2], np.outer(delta, h2), atol=1e-10)
    assert np.allclose(gb[2], delta, atol=1e-10)


def test_gradient_check_small_networks():
    rng = np.random.default_rng(7)
    for trial in range(5):
        sizes = [int(rng.integers(2, 5)) for _ in range(4)]
        weights = [
            rng.normal(scale=0.7, size=(sizes[i + 1], sizes[i])) for i in range(3)
        ]
        biases = [rng.normal(scale=0.3, size=sizes[i + 1]) for i in range(3)]
        mlp = Mlp(sizes, weights, biases)
        x = rng.integers(0, 2, sizes[0]).astype(float)
        y = rng.integers(0, 2, sizes[3]).astype(float)
        assert gradient_check(mlp, (x, y), 1e-5) < 1e-4


def test_gradient_check_zero_point():
    mlp = Mlp([2, 2, 2, 2], [np.zeros((2, 2))] * 3, [np.zeros(2)] * 3)
    x = np.array([0.0, 0.0])
    y = np.array([0.5, 0.5])  # sigmoid(0) == target: zero gradient everywhere
    gw, gb, _ = bce_gradients(mlp, x, y)
    assert all(np.allclose(g, 0) for g in gw + gb)
    assert gradient_check(mlp, (x, y), 1e-5) < 1e-6


def test_gradient_check_epsilon_bounds():
    mlp = init_mlp(3, seed=0)
    with pytest.raises(ValueError):
        gradient_check(mlp, (np.zeros(18), np.zeros(18)), 1e-2)


def test_finite_difference_error_shrinks_with_epsilon():
    # central differences have O(eps^2) truncation error
    rng = np.random.default_rng(11)
    mlp = tiny_mlp([rng.normal(size=(2, 2)) for _ in range(3)],
                   [rng.normal(size=2) for _ in range(3)])
    x = np.array([1.0, 1.0])
    y = np.array([0.0, 1.0])
    gw, _, _ = bce_gradients(mlp, x, y)
    exact = gw[0][0, 0]

    def fd(eps):
        orig = mlp.weights[0][0, 0]
        mlp.weights[0][0, 0] = orig + eps
        _, _, up = bce_gradients(mlp, x, y)
        mlp.weights[0][0, 0] = orig - eps
        _, _, down = bce_gradients(mlp, x, y)
        mlp.weights[0][0, 0] = orig
        return (up - down) / (2 * eps)

    err_small = abs(fd(2.5e-4) - exact)
    err_big = abs(fd(1e-3) - exact)
    # quartic ratio expected (16); allow a broad band around it
    assert err_big < 64 * err_small + 1e-12
    assert err_big > 2 * err_small or err_big < 1e-11


def test_training_memorizes_single_example():
    rng = np.random.default_rng(5)
    x = np.tile(rng.integers(0, 2, 18), (256, 1)).astype(np.uint8)
    y = np.tile(rng.integers(0, 2, 18), (256, 1)).astype(np.uint8)
    mlp = init_mlp(3, seed=1)
    mlp, trace = train(mlp, (x, y), TrainConfig(epochs=500, batch=256),
                       np.random.default_rng(2))
    assert trace[-1] < 0.01


def test_training_zero_labels_converges_to_zero_output():
    rng = np.random.default_rng(6)
    x = rng.integers(0, 2, size=(2048, 18)).astype(np.uint8)
    y = np.zeros((2048, 18), dtype=np.uint8)
    mlp = init_mlp(3, seed=1)
    mlp, trace = train(mlp, (x, y), TrainConfig(epochs=40),
                       np.random.default_rng(2))
    assert forward(mlp, x[:100]).mean() < 0.05


def test_training_rejects_empty_dataset():
    with pytest.raises(ValueError):
        train(init_mlp(3, 0), (np.zeros((0, 18)), np.zeros((0, 18))),
              TrainConfig(epochs=1), np.random.default_rng(0))


def test_training_aborts_on_divergence():
    mlp = init_mlp(3, seed=1)
    mlp.weights[0][:] = np.inf
    x = np.ones((4, 18), dtype=np.uint8)
    y = np.ones((4, 18), dtype=np.uint8)
    with pytest.raises(RuntimeError):
        train(mlp, (x, y), TrainConfig(epochs=1, batch=4),
              np.random.default_rng(0))


def test_trained_network_beats_constant_predictor_on_held_out_data():
    # held-out BCE must fall below the entropy of the best constant
    # (per-bit base rate) predictor: the network learns signal
    code = hh.build_code(3)
    rng = np.random.default_rng(21)
    x, y = collect_dataset(code, uniform_model(1e-3), 150_000, None, rng, "memx")
    x_train, y_train = x[:120_000], y[:120_000]
    x_test, y_test = x[120_000:], y[120_000:]
    mlp = init_mlp(3, seed=2)
    mlp, _ = train(mlp, (x_train, y_train), TrainConfig(epochs=6),
                   np.random.default_rng(3))
    probs = forward(mlp, x_test)
    eps = 1e-12
    held_out = -(y_test * np.log(probs + eps)
                 + (1 - y_test) * np.log(1 - probs + eps)).mean()
    base = y_train.mean(axis=0).clip(eps, 1 - eps)
    baseline = -(y_test * np.log(base) + (1 - y_test) * np.log(1 - base)).mean()
    assert held_out < baseline


def test_training_deterministic_given_seed():
    rng = np.random.default_rng(8)
    x = rng.integers(0, 2, size=(512, 18)).astype(np.uint8)
    y = rng.integers(0, 2, size=(512, 18)).astype(np.uint8)
    out = []
    for _ in range(2):
        mlp = init_mlp(3, seed=4)
        mlp, trace = train(mlp, (x, y), TrainConfig(epochs=3),
                           np.random.default_rng(9))
        out.append((mlp.weights[0].copy(), tuple(trace)))
    assert np.array_equal(out[0][0], out[1][0])
    assert out[0][1] == out[1][1]


# -- dataset -------------------------------------------------------------


def test_zero_noise_dataset_all_zero():
    code = hh.build_code(3)
    x, y = collect_dataset(code, uniform_model(0.0), 64, None,
                           np.random.default_rng(0), "memz")
    assert x.shape == (64, 18) and y.shape == (64, 18)
    assert x.sum() == 0 and y.sum() == 0


def test_input_sizes_match_formula():
    for d in (3, 5):
        code = hh.build_code(d)
        x, y = collect_dataset(code, uniform_model(1e-3), 8, None,
                               np.random.default_rng(0), "memx")
        assert x.shape[1] == mlp_layer_sizes(d)[0]
        assert y.shape[1] == mlp_layer_sizes(d)[3]


def test_label_syndrome_matches_final_cycle_with_data_faults_only():
    # inject data-initialisation faults only: the label's Z-family syndrome
    # must equal the reconstructed final row, and its X-family syndrome the
    # raw final measured row
    code = hh.build_code(3)
    exp = compile_experiment(code, cycles=3, basis="memz")
    rng = np.random.default_rng(3)
    for _ in range(20):
        faults = []
        for q in rng.choice(9, size=2, replace=False):
            loc = [l for l in exp.locations if l.kind == "init" and l.qubits == (int(q),)][0]
            faults.append(Fault(loc, "XYZ"[rng.integers(0, 3)]))
        batch = run_batch(exp, NoiseModel(), 1, np.random.default_rng(0),
                          forced=FaultPattern(faults))
        x, y = encode_batch(exp, batch)
        label_frame = correction_frame(code, y[0])
        syn = hh.static_syndrome(code, label_frame)
        s_total = code.n_stabilizers
        final_row = x[0][(exp.cycles - 1) * s_total:]
        assert np.array_equal(syn[list(code.z_family)], final_row[list(code.z_family)])
        raw_x_row = batch.stabilizer_outcomes[0, exp.cycles - 1, list(code.x_family)]
        assert np.array_equal(syn[list(code.x_family)], raw_x_row)


def test_generate_dataset_streams_in_chunks():
    code = hh.build_code(3)
    chunks = list(generate_dataset(code, uniform_model(1e-3), 2500, None,
                                   np.random.default_rng(1), "memx", chunk=1000))
    assert [len(c[0]) for c in chunks] == [1000, 1000, 500]


def test_generate_dataset_rejects_bad_count():
    code = hh.build_code(3)
    with pytest.raises(ValueError):
        list(generate_dataset(code, uniform_model(1e-3), 0, None,
                              np.random.default_rng(1)))


def test_jsonl_roundtrip(tmp_path):
    code = hh.build_code(3)
    path = tmp_path / "data.jsonl"
    n = write_jsonl(path, iter_examples(code, uniform_model(5e-3), 50, None,
                                        np.random.default_rng(2), "memx"))
    assert n == 50
    x, y, basis = read_jsonl(path)
    assert basis == "memx"
    assert x.shape == (50, 18) and y.shape == (50, 18)


# -- decoding ------------------------------------------------------------


def test_decode_truncation_accepts_identity():
    code = hh.build_code(3)
    mlp = init_mlp(3, seed=0)
    # shrink outputs towards zero so truncation yields the identity
    mlp.biases[-1][:] = -5.0
    out = decode_ann(code, mlp, np.zeros(18), np.zeros(6, dtype=np.uint8),
                     10, np.random.default_rng(0))
    assert out.is_identity()


def test_decode_constructed_single_error_pattern():
    # memorize one example, then decoding its input must reproduce a
    # correction consistent with the example's syndrome without resampling
    code = hh.build_code(3)
    exp = compile_experiment(code, cycles=3, basis="memz")
    q = code.data_index(2, 2)
    loc = [l for l in exp.locations if l.kind == "init" and l.qubits == (q,)][0]
    batch = run_batch(exp, NoiseModel(), 1, np.random.default_rng(0),
                      forced=FaultPattern([Fault(loc, "X")]))
    x, y = encode_batch(exp, batch)
    xs = np.tile(x[0], (256, 1))
    ys = np.tile(y[0], (256, 1))
    mlp = init_mlp(3, seed=3)
    mlp, _ = train(mlp, (xs, ys), TrainConfig(epochs=300), np.random.default_rng(1))
    target = hh.static_syndrome(code, batch.shot(0).true_frame)
    out = decode_ann(code, mlp, x[0], target, 0, np.random.default_rng(0))
    assert not isinstance(out, type(DECLARED_FAILURE))
    assert np.array_equal(hh.static_syndrome(code, out), target)


def test_decode_declares_failure_with_no_resamples():
    code = hh.build_code(3)
    mlp = init_mlp(3, seed=0)
    mlp.biases[-1][:] = -5.0  # truncation gives identity
    target = np.zeros(6, dtype=np.uint8)
    target[0] = 1  # inconsistent with identity
    out = decode_ann(code, mlp, np.zeros(18), target, 0, np.random.default_rng(0))
    assert out == DECLARED_FAILURE


def test_accepted_corrections_always_consistent():
    code = hh.build_code(3)
    mlp = init_mlp(3, seed=1)
    rng = np.random.default_rng(5)
    accepted = 0
    for _ in range(40):
        inp = rng.integers(0, 2, 18)
        frame = hh.PauliFrame(9, int(rng.integers(0, 2**9)), int(rng.integers(0, 2**9)))
        target = hh.static_syndrome(code, frame)
        out = decode_ann(code, mlp, inp, target, 30, rng)
        if not isinstance(out, type(DECLARED_FAILURE)):
            accepted += 1
            assert np.array_equal(hh.static_syndrome(code, out), target)
    assert accepted > 0


def test_decode_batch_matches_consistency_contract():
    code = hh.build_code(3)
    rng = np.random.default_rng(6)
    fam = list(code.z_family)
    mat = syndrome_matrix(code, fam)
    probs = rng.random((200, 18)) * 0.4
    targets = rng.integers(0, 2, size=(200, len(fam))).astype(np.uint8)
    corrections, declared = decode_ann_batch(mat, probs, targets, 50, rng)
    good = ~declared
    assert good.any()
    syn = (corrections[good] @ mat.T) % 2
    assert (syn == targets[good]).all()


def test_model_file_roundtrip(tmp_path):
    mlp = init_mlp(3, seed=12)
    mlp.config["training_p"] = 1e-3
    path = tmp_path / "model.json"
    save_mlp(mlp, path)
    back = load_mlp(path)
    assert back.layer_sizes == mlp.layer_sizes
    assert back.d == 3
    assert back.config["training_p"] == 1e-3
    for a, b in zip(back.weights, mlp.weights):
        assert np.allclose(a, b)
    import json

    doc = json.loads(open(path).read())
    assert doc["format"] == "hh-mlp/1"


def test_model_file_rejects_unknown_format(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other/9"}')
    with pytest.raises(ValueError):
        load_mlp(path)

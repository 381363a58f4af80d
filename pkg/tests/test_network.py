"""Tests for the network container, backward pass, SGD, and training loop."""

import numpy as np
import pytest

import handworked as hw
from sigcnn.errors import ConfigError, ShapeError, TapeMismatchError
from sigcnn.initializers import InitScheme, conv_fans, dense_fans, init_draw
from sigcnn.layers import ConvLayer, DenseLayer
from sigcnn.losses import loss_value
from sigcnn.network import (
    ConvBlock,
    DenseBlock,
    Network,
    TrainConfig,
    backward,
    evaluate,
    forward,
    sgd_step,
    train,
    train_streams,
)
from sigcnn.signal_ops import ordered_sum


def handworked_net() -> Network:
    return Network(
        8,
        [ConvBlock(ConvLayer(hw.CONV_WEIGHTS.copy(), hw.CONV_BIAS.copy()), pool_width=3)],
        [DenseBlock(DenseLayer(hw.DENSE_WEIGHTS.copy()))],
    )


def random_net(seed: int, input_len: int = 16) -> Network:
    """2 conv blocks + 2 dense blocks, He-normal initialized."""
    rng = np.random.default_rng(seed)

    def conv(in_ch, out_ch, taps, pool):
        fan_in, fan_out = conv_fans(in_ch, out_ch, taps)
        w = init_draw(InitScheme("he_normal", fan_in, fan_out), out_ch * in_ch * taps, rng)
        return ConvBlock(
            ConvLayer(w.reshape(out_ch, in_ch, taps), np.zeros(out_ch)), pool_width=pool
        )

    def dense(in_size, out_size, relu):
        w = init_draw(InitScheme("he_normal", *dense_fans(in_size, out_size)), in_size * out_size, rng)
        return DenseBlock(
            DenseLayer(w.reshape(out_size, in_size), bias=np.zeros(out_size)), relu=relu
        )

    blocks = [conv(1, 2, 3, 2), conv(2, 3, 3, 1)]
    # 16 -> 14 -> pool 7 -> 12 taps? no: conv over 7 with 3 taps -> 5; flat 3*5
    return Network(input_len, blocks, [dense(15, 4, True), dense(4, 2, False)])


class TestConstruction:
    def test_shape_walk_and_param_count(self):
        net = handworked_net()
        assert net.shape_walk() == [
            {"stage": "input", "shape": [1, 8]},
            {"stage": "conv0", "shape": [3, 6]},
            {"stage": "pool0", "shape": [3, 2]},
            {"stage": "flatten", "shape": [6]},
            {"stage": "dense0", "shape": [2]},
            {"stage": "output", "shape": [2]},
        ]
        assert net.param_count() == 3 * (3 + 1) + 12

    def test_rejects_relu_on_last_dense(self):
        with pytest.raises(ConfigError):
            Network(8, [], [DenseBlock(DenseLayer(np.zeros((2, 8))), relu=True)])

    def test_rejects_empty_dense_stack(self):
        with pytest.raises(ConfigError):
            Network(8, [], [])

    def test_rejects_channel_mismatch(self):
        blocks = [
            ConvBlock(ConvLayer(np.zeros((2, 1, 3)), np.zeros(2))),
            ConvBlock(ConvLayer(np.zeros((2, 3, 3)), np.zeros(2))),
        ]
        with pytest.raises(ShapeError, match="conv block 1"):
            Network(8, blocks, [DenseBlock(DenseLayer(np.zeros((2, 8))))])

    def test_rejects_dense_size_mismatch(self):
        with pytest.raises(ShapeError, match="dense block 0"):
            Network(8, [], [DenseBlock(DenseLayer(np.zeros((2, 5))))])

    def test_rejects_oversized_kernel(self):
        blocks = [ConvBlock(ConvLayer(np.zeros((1, 1, 9)), np.zeros(1)))]
        with pytest.raises(ShapeError, match="does not fit"):
            Network(8, blocks, [DenseBlock(DenseLayer(np.zeros((2, 1))))])

    def test_conv_free_network_flattens_the_input(self):
        net = Network(4, [], [DenseBlock(DenseLayer(np.eye(4)))], loss_kind="mse")
        out, tape = forward(net, [1.0, 2.0, 3.0, 4.0])
        assert out.tolist() == [1.0, 2.0, 3.0, 4.0]
        assert tape.flat.tolist() == [1.0, 2.0, 3.0, 4.0]


class TestForward:
    def test_handworked_probabilities(self):
        out, tape = forward(handworked_net(), hw.X)
        np.testing.assert_allclose(out, hw.PROBS, atol=0.005)
        np.testing.assert_array_equal(tape.conv[0].relu_mask, hw.RELU_MASK)

    def test_zero_weights_give_uniform_probabilities(self):
        net = Network(
            8,
            [ConvBlock(ConvLayer(np.zeros((3, 1, 3)), np.zeros(3)), pool_width=3)],
            [DenseBlock(DenseLayer(np.zeros((2, 6))))],
        )
        out, _ = forward(net, hw.X)
        assert out.tolist() == [0.5, 0.5]

    def test_replay_is_bit_identical(self):
        net = random_net(3)
        x = np.random.default_rng(4).normal(size=16)
        a, _ = forward(net, x)
        b, _ = forward(net, x)
        assert a.tolist() == b.tolist()

    def test_mse_network_returns_raw_outputs(self):
        w = np.array([[1.0, -2.0, 0.5]])
        net = Network(3, [], [DenseBlock(DenseLayer(w))], loss_kind="mse")
        out, _ = forward(net, [2.0, 1.0, 4.0])
        assert out.tolist() == [2.0 - 2.0 + 2.0]

    def test_wrong_input_length_rejected(self):
        with pytest.raises(ShapeError):
            forward(handworked_net(), np.zeros(9))

    def test_keep_prob_one_consumes_no_randomness(self):
        rng = np.random.default_rng(7)
        forward(handworked_net(), hw.X, dropout_rng=rng, keep_prob=1.0)
        assert rng.random() == np.random.default_rng(7).random()

    def test_dropout_masks_recorded_and_applied(self):
        net = random_net(9)
        x = np.random.default_rng(10).normal(size=16)
        out, tape = forward(net, x, dropout_rng=np.random.default_rng(11), keep_prob=0.5)
        assert tape.conv[0].dropout is not None
        assert tape.dense[0].dropout is not None
        assert tape.dense[1].dropout is None  # never on the output layer
        survivors = tape.conv[0].pooled * tape.conv[0].dropout / 0.5
        assert tape.conv[0].output.tolist() == survivors.tolist()


class TestBackward:
    def test_gradients_zero_when_output_matches_target(self):
        w = np.random.default_rng(1).normal(size=(2, 4))
        net = Network(4, [], [DenseBlock(DenseLayer(w))], loss_kind="mse")
        x = np.array([0.5, -1.0, 2.0, 0.25])
        out, tape = forward(net, x)
        grads = backward(net, tape, out)  # target == output
        assert np.all(grads.dense_weights[0] == 0.0)

    def test_bias_gradient_is_ordered_sum_of_repositioned_deltas(self):
        net = handworked_net()
        _, tape = forward(net, hw.X)
        grads = backward(net, tape, hw.TARGET)
        for k in range(3):
            assert grads.conv_bias[0][k] == ordered_sum(grads.conv_deltas[0][k])

    def test_repositioning_moves_but_never_rescales(self):
        # Sum of |deltas| after repositioning equals the sum of the incoming
        # pooled |deltas| kept by the rectifier indicator at the argmax slots.
        net = random_net(21)
        x = np.random.default_rng(22).normal(size=16)
        _, tape = forward(net, x)
        grads = backward(net, tape, [1.0, 0.0])
        for tr, delta_full in zip(tape.conv, grads.conv_deltas):
            # every non-zero delta sits on an argmax slot the rectifier kept
            assert np.all((delta_full != 0) <= (tr.pool_mask * tr.relu_mask == 1))
            # left-fold |delta| mass is identical with and without the zeros,
            # i.e. repositioning only moved values around
            moved = ordered_sum(np.abs(delta_full).ravel())
            kept = ordered_sum(np.abs(delta_full[tr.pool_mask * tr.relu_mask == 1]))
            assert moved == kept

    def test_full_finite_difference_audit_random_net(self):
        # Every weight and bias of a 2-conv + 2-dense network against central
        # differences.
        net = random_net(23)
        rng = np.random.default_rng(23)
        while True:
            x = rng.normal(size=16)
            _, tape = forward(net, x)
            pre = np.concatenate(
                [t.pre_act.ravel() for t in tape.conv]
                + [t.pre_act.ravel() for t in tape.dense]
            )
            if np.min(np.abs(pre)) > 1e-4:
                break
        t = np.array([0.0, 1.0])
        _, tape = forward(net, x)
        grads = backward(net, tape, t)

        def loss_at():
            out, _ = forward(net, x)
            return loss_value(net.loss_kind, out, t)

        checked = 0
        h = 1e-6
        params = []
        for i, blk in enumerate(net.conv_blocks):
            params.append((blk.layer.weights, grads.conv_weights[i]))
            params.append((blk.layer.bias, grads.conv_bias[i]))
        for j, blk in enumerate(net.dense_blocks):
            params.append((blk.layer.weights, grads.dense_weights[j]))
            params.append((blk.layer.bias, grads.dense_bias[j]))
        for arr, g in params:
            flat_a, flat_g = arr.reshape(-1), g.reshape(-1)
            for idx in range(flat_a.size):
                old = flat_a[idx]
                flat_a[idx] = old + h
                lp = loss_at()
                flat_a[idx] = old - h
                lm = loss_at()
                flat_a[idx] = old
                numeric = (lp - lm) / (2 * h)
                diff = abs(flat_g[idx] - numeric)
                err = 0.0 if diff <= 1e-10 else diff / max(abs(flat_g[idx]), abs(numeric))
                assert err <= 1e-6, f"param {checked}: rel err {err}"
                checked += 1
        assert checked == net.param_count()

    def test_tape_mismatch_rejected(self):
        net_a = handworked_net()
        net_b = random_net(5)
        _, tape = forward(net_a, hw.X)
        with pytest.raises(TapeMismatchError):
            backward(net_b, tape, [1.0, 0.0])

    def test_gradient_shapes_are_congruent(self):
        net = random_net(31)
        _, tape = forward(net, np.random.default_rng(32).normal(size=16))
        grads = backward(net, tape, [1.0, 0.0])
        for blk, gw, gb in zip(net.conv_blocks, grads.conv_weights, grads.conv_bias):
            assert gw.shape == blk.layer.weights.shape
            assert gb.shape == blk.layer.bias.shape
            assert np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))
        for blk, gw in zip(net.dense_blocks, grads.dense_weights):
            assert gw.shape == blk.layer.weights.shape
            assert np.all(np.isfinite(gw))


class TestSgdStep:
    def test_printed_gradient_update(self):
        # w(0,0) = -0.47 stepping against gradient -0.12 at rate 0.1 -> -0.458.
        net = handworked_net()
        grads = backward(net, forward(net, hw.X)[1], hw.TARGET)
        grads.dense_weights[0][:] = 0.0
        grads.dense_weights[0][0, 0] = -0.12
        grads.conv_weights[0][:] = 0.0
        grads.conv_bias[0][:] = 0.0
        sgd_step(net, grads, TrainConfig())
        assert abs(net.dense_blocks[0].layer.weights[0, 0] - (-0.458)) < 1e-12

    def test_zero_gradient_leaves_parameters_bit_identical(self):
        net = random_net(41)
        before = [b.layer.weights.copy() for b in net.conv_blocks + net.dense_blocks]
        _, tape = forward(net, np.random.default_rng(42).normal(size=16))
        grads = backward(net, tape, [1.0, 0.0])
        for g in grads.conv_weights + grads.dense_weights:
            g[:] = 0.0
        for g in grads.conv_bias + [g for g in grads.dense_bias if g is not None]:
            g[:] = 0.0
        sgd_step(net, grads, TrainConfig())
        after = [b.layer.weights for b in net.conv_blocks + net.dense_blocks]
        for b, a in zip(before, after):
            assert b.tolist() == a.tolist()

    def test_step_and_counter_step_restore_parameters(self):
        net = random_net(43)
        w0 = net.conv_blocks[0].layer.weights.copy()
        _, tape = forward(net, np.random.default_rng(44).normal(size=16))
        grads = backward(net, tape, [0.0, 1.0])
        sgd_step(net, grads, TrainConfig())
        for g in grads.conv_weights + grads.dense_weights:
            g *= -1.0
        for g in grads.conv_bias + [g for g in grads.dense_bias if g is not None]:
            g *= -1.0
        sgd_step(net, grads, TrainConfig())
        np.testing.assert_allclose(net.conv_blocks[0].layer.weights, w0, atol=1e-15)

    def test_single_small_step_decreases_loss(self):
        cfg = TrainConfig(lr_weights=1e-4, lr_bias=1e-4)
        done = 0
        for seed in range(20):
            net = random_net(100 + seed)
            x = np.random.default_rng(200 + seed).normal(size=16)
            t = [1.0, 0.0] if seed % 2 else [0.0, 1.0]
            out, tape = forward(net, x)
            before = loss_value(net.loss_kind, out, t)
            grads = backward(net, tape, t)
            norm = sum(float(np.abs(g).sum()) for g in grads.conv_weights + grads.dense_weights)
            if norm < 1e-12:
                continue
            sgd_step(net, grads, cfg)
            after = loss_value(net.loss_kind, forward(net, x)[0], t)
            assert after < before
            done += 1
        assert done >= 15

    def test_mismatched_gradients_rejected(self):
        net_a, net_b = handworked_net(), random_net(51)
        grads = backward(net_b, forward(net_b, np.zeros(16))[1], [1.0, 0.0])
        with pytest.raises(ShapeError):
            sgd_step(net_a, grads, TrainConfig())


class TestTrainConfig:
    def test_defaults_mirror_reference_protocol(self):
        cfg = TrainConfig()
        assert (cfg.lr_weights, cfg.lr_bias) == (0.1, 0.05)
        assert (cfg.epochs, cfg.realizations_per_epoch) == (10, 200)
        assert cfg.keep_prob == 1.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            TrainConfig(lr_weights=-0.1)
        with pytest.raises(ConfigError):
            TrainConfig(epochs=0)
        with pytest.raises(ConfigError):
            TrainConfig(realizations_per_epoch=0)
        with pytest.raises(ConfigError):
            TrainConfig(keep_prob=0.0)
        with pytest.raises(ConfigError):
            TrainConfig(keep_prob=1.5)


class TestTrain:
    def dataset(self, n=8, seed=61):
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(n):
            x = rng.normal(size=8)
            t = [1.0, 0.0] if rng.random() < 0.5 else [0.0, 1.0]
            out.append((x, np.array(t)))
        return out

    def test_zero_learning_rates_change_nothing(self):
        net = handworked_net()
        before = net.dense_blocks[0].layer.weights.copy()
        cfg = TrainConfig(lr_weights=0.0, lr_bias=0.0, epochs=2)
        train(net, self.dataset(), cfg)
        assert net.dense_blocks[0].layer.weights.tolist() == before.tolist()

    def test_log_shapes_and_probability_complement(self):
        net = handworked_net()
        data = self.dataset(5)
        log = train(net, data, TrainConfig(epochs=3))
        assert log.iterations == 15
        assert log.epochs == 3
        assert len(log.epoch_mean_losses()) == 3
        assert len(log.weight_rows) == 15
        assert all(row.size == 12 for row in log.weight_rows)
        for pt, po in zip(log.p_target, log.p_other):
            assert abs(pt + po - 1.0) < 1e-12
        assert log.clamp_events == 0

    def test_keep_prob_one_with_rng_matches_dropout_free_run(self):
        data = self.dataset(6, seed=62)
        net_a, net_b = handworked_net(), handworked_net()
        cfg = TrainConfig(epochs=2, keep_prob=1.0)
        _, drop_rng = train_streams(9)
        log_a = train(net_a, data, cfg, dropout_rng=drop_rng)
        log_b = train(net_b, data, cfg, dropout_rng=None)
        assert log_a.losses == log_b.losses
        assert (
            net_a.dense_blocks[0].layer.weights.tolist()
            == net_b.dense_blocks[0].layer.weights.tolist()
        )

    def test_repeating_one_sample_drives_loss_down(self):
        net = handworked_net()
        log = train(net, [(hw.X, hw.TARGET)], TrainConfig(epochs=6))
        assert log.losses[0] > log.losses[-1]
        assert all(b <= a + 1e-12 for a, b in zip(log.losses, log.losses[1:]))

    def test_training_is_reproducible_bit_for_bit(self):
        data = self.dataset(6, seed=63)
        runs = []
        for _ in range(2):
            net = handworked_net()
            log = train(net, data, TrainConfig(epochs=2, keep_prob=0.8), train_streams(5)[1])
            runs.append((log.losses, net.dense_blocks[0].layer.weights.tolist()))
        assert runs[0] == runs[1]

    def test_train_streams_are_distinct_and_deterministic(self):
        init_a, drop_a = train_streams(11)
        init_b, drop_b = train_streams(11)
        assert init_a.random() == init_b.random()
        assert drop_a.random() == drop_b.random()
        init_c, drop_c = train_streams(11)
        assert init_c.random() != drop_c.random()


class TestEvaluate:
    def test_tie_counts_as_incorrect(self):
        net = Network(
            8,
            [ConvBlock(ConvLayer(np.zeros((3, 1, 3)), np.zeros(3)), pool_width=3)],
            [DenseBlock(DenseLayer(np.zeros((2, 6))))],
        )
        acc, correct, ties = evaluate(net, [(hw.X, hw.TARGET)] * 4)
        assert (acc, correct, ties) == (0.0, 0, 4)

    def test_trained_handworked_sample_is_classified(self):
        net = handworked_net()
        train(net, [(hw.X, hw.TARGET)], TrainConfig(epochs=5))
        acc, correct, ties = evaluate(net, [(hw.X, hw.TARGET)])
        assert (acc, correct, ties) == (1.0, 1, 0)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ConfigError):
            evaluate(handworked_net(), [])

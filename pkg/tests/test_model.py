"""Model assembly tests: architecture anchors, inference, checkpoints."""

import numpy as np
import pytest

import coilscope as cs
from coilscope.model import (CHECKPOINT_MAGIC, CheckpointError, NormStats,
                             backward, forward, forward_cached, init, load,
                             predict, save)
from coilscope.ops import ShapeError, pool_forward, relu_forward
from coilscope.ops import conv2d_forward


@pytest.fixture(scope="module")
def net():
    return init(0)


@pytest.fixture
def image():
    return np.random.default_rng(42).random((1, 64, 64))


class TestInit:
    def test_same_seed_bitwise_identical(self):
        a, b = init(7), init(7)
        for name, arr in a.parameters().items():
            np.testing.assert_array_equal(arr, b.parameters()[name])

    def test_different_seeds_differ(self):
        a, b = init(0), init(1)
        assert any(not np.array_equal(arr, b.parameters()[name])
                   for name, arr in a.parameters().items())

    def test_biases_zero(self, net):
        for name, arr in net.parameters().items():
            if name.endswith("bias"):
                assert np.all(arr == 0.0)

    def test_forward_finite(self, net, image):
        out = forward(net, image, 6.78e6)
        assert out.shape == (2,) and np.all(np.isfinite(out))


class TestForward:
    def test_flatten_width_is_8192(self, net, image):
        h = image
        for conv in (net.conv1, net.conv2, net.conv3):
            h = pool_forward(relu_forward(conv2d_forward(h, conv, (1, 1))),
                             net.pool)
        assert h.size == 8192
        assert h.shape == (128, 8, 8)

    def test_decoder_widths(self, net):
        assert net.fc1.weights.shape[0] == 128
        assert net.fc2.weights.shape == (2, 128)

    def test_zero_image_zero_decoder_gives_zero(self):
        n = init(3)
        n.fc2.weights[:] = 0.0
        n.fc2.bias[:] = 0.0
        out = forward(n, np.zeros((1, 64, 64)), 1e6)
        np.testing.assert_array_equal(out, np.zeros(2))

    def test_frequency_path_liveness(self, net, image):
        out_a = forward(net, image, 85e3)
        out_b = forward(net, image, 13.56e6)
        assert not np.array_equal(out_a, out_b)

    def test_wrong_shape_rejected(self, net):
        with pytest.raises(ShapeError):
            forward(net, np.zeros((1, 32, 32)), 1e6)

    def test_nonpositive_frequency_rejected(self, net, image):
        with pytest.raises(ValueError, match="frequency"):
            forward(net, image, -5.0)

    def test_pixels_out_of_range_rejected(self, net):
        with pytest.raises(ValueError, match="0,1"):
            forward(net, np.full((1, 64, 64), 2.0), 1e6)


class TestPredict:
    def test_positive_outputs(self, net, image):
        pred = predict(net, image, 1e6)
        assert pred.inductance_h > 0 and pred.quality > 0

    def test_zero_output_maps_to_means(self, image):
        n = init(5)
        n.fc2.weights[:] = 0.0
        n.fc2.bias[:] = 0.0
        n.norm = NormStats(mean_log_l=-6.0, std_log_l=0.5,
                           mean_log_q=2.0, std_log_q=0.3,
                           mean_log_f=6.0, std_log_f=1.0)
        pred = predict(n, image, 1e6)
        assert pred.inductance_h == pytest.approx(1e-6, rel=1e-12)
        assert pred.quality == pytest.approx(100.0, rel=1e-12)

    def test_normalization_roundtrip(self):
        stats = NormStats(mean_log_l=-5.5, std_log_l=0.7, mean_log_q=1.8,
                          std_log_q=0.4, mean_log_f=5.9, std_log_f=1.1)
        l_h, q = 3.2e-6, 140.0
        v = stats.normalize_labels(l_h, q)
        back_l, back_q = stats.denormalize(v)
        assert back_l == pytest.approx(l_h, rel=1e-12)
        assert back_q == pytest.approx(q, rel=1e-12)

    def test_norm_stats_rejects_nonpositive_std(self):
        with pytest.raises(ValueError, match="std"):
            NormStats(std_log_l=0.0)


class TestWholeModelGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        n = init(2)
        image = rng.random((1, 64, 64))
        freq = 2e6
        up = rng.standard_normal(2)
        cache = forward_cached(n, image, freq)
        grads = backward(n, cache, up)
        params = n.parameters()
        h = 1e-5
        checked = 0
        names = list(params)
        while checked < 60:
            name = names[int(rng.integers(len(names)))]
            flat = params[name].reshape(-1)
            i = int(rng.integers(flat.size))
            orig = flat[i]

            def fd(step):
                flat[i] = orig + step
                fp = float(up @ forward(n, image, freq))
                flat[i] = orig - step
                fm = float(up @ forward(n, image, freq))
                flat[i] = orig
                return (fp - fm) / (2 * step)

            fd1, fd2 = fd(h), fd(h / 4)
            # the model is piecewise linear in one parameter; step-size
            # disagreement means a ReLU/argmax kink sits inside the stencil
            if abs(fd1 - fd2) > 1e-7 * max(1.0, abs(fd1)):
                continue
            an = grads[name].reshape(-1)[i]
            assert abs(fd1 - an) <= 1e-4 * max(abs(fd1), abs(an), 1e-10), \
                f"{name}[{i}]: fd={fd1} analytic={an}"
            checked += 1


class TestCheckpoint:
    def test_roundtrip_bitwise(self, tmp_path, image):
        n = init(9)
        n.norm = NormStats(mean_log_l=-6.1, std_log_l=0.4, mean_log_q=2.1,
                           std_log_q=0.6, mean_log_f=6.2, std_log_f=0.9)
        path = tmp_path / "net.cnet"
        save(n, path)
        m = load(path)
        for name, arr in n.parameters().items():
            np.testing.assert_array_equal(arr, m.parameters()[name])
        assert m.norm.as_tuple() == n.norm.as_tuple()
        np.testing.assert_array_equal(forward(n, image, 1e6),
                                      forward(m, image, 1e6))

    def test_corrupted_magic_rejected(self, tmp_path):
        path = tmp_path / "net.cnet"
        save(init(1), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="magic"):
            load(path)

    def test_bit_flip_fails_crc(self, tmp_path):
        path = tmp_path / "net.cnet"
        save(init(1), path)
        blob = bytearray(path.read_bytes())
        blob[100] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="CRC"):
            load(path)

    def test_truncation_rejected(self, tmp_path):
        path = tmp_path / "net.cnet"
        save(init(1), path)
        path.write_bytes(path.read_bytes()[:200])
        with pytest.raises(CheckpointError):
            load(path)

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "net.cnet"
        save(init(1), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="version"):
            load(path)

    def test_magic_constant(self):
        assert CHECKPOINT_MAGIC == b"CNET"

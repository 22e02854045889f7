import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from rqat_inr.binary16 import is_f16_exact
from rqat_inr.errors import CorruptDataError, InvalidArgumentError
from rqat_inr.quantizer import (
    QuantizedNetwork,
    dequantize_group,
    dequantize_network,
    fake_quantize_group,
    k_of,
    quantize_group,
    quantize_network,
    round_half_away,
)
from rqat_inr.siren import SirenNetwork, init_network


@pytest.mark.parametrize("q, k", [(8, 127), (10, 511), (2, 1), (15, 16383)])
def test_k_of(q, k):
    assert k_of(q) == k


@pytest.mark.parametrize("q", [1, 16, 0, 8.0])
def test_k_of_range(q):
    with pytest.raises(InvalidArgumentError):
        k_of(q)


def test_k_monotone():
    ks = [k_of(q) for q in range(2, 16)]
    assert ks == sorted(ks) and len(set(ks)) == len(ks)


def test_round_half_away():
    x = np.array([0.5, -0.5, 1.5, -2.5, 0.49999999999999994, 63.5, -63.49])
    assert round_half_away(x).tolist() == [1, -1, 2, -3, 0, 64, -63]


class TestGroup:
    def test_ties_round_away(self):
        # absmax 0.75 is binary16-exact: 0.375/0.75*127 = 63.5, 0.09375/0.75*127 = 15.875
        sym, amax = quantize_group([0.375, -0.75, 0.09375], 8)
        assert amax == 0.75
        assert sym.tolist() == [64, -127, 16]

    def test_scale_rounded_up_to_binary16(self):
        # 0.8 is not binary16-exact; the stored scale is the next half above it
        sym, amax = quantize_group([0.4, -0.8, 0.1], 8)
        assert amax == 0.80029296875
        assert sym.tolist() == [63, -127, 16]

    def test_extremes(self):
        sym, amax = quantize_group([1.0, -1.0, 0.0], 8)
        assert sym.tolist() == [127, -127, 0] and amax == 1.0

    @pytest.mark.parametrize("q", [2, 8, 10])
    def test_zero_group(self, q):
        sym, amax = quantize_group([0.0, 0.0], q)
        assert sym.tolist() == [0, 0] and amax == 0.0
        assert dequantize_group(sym, amax, q).tolist() == [0.0, 0.0]

    def test_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            quantize_group([1.0, np.inf], 8)

    def test_dequantize_values(self):
        assert dequantize_group([127, -127, 0], 0.8, 8).tolist() == [0.8, -0.8, 0.0]
        assert dequantize_group([64], 0.8, 8)[0] == pytest.approx(64 / 127 * 0.8, rel=1e-15)
        assert dequantize_group([64], 0.8, 8)[0] == pytest.approx(0.40314960629921, abs=1e-13)

    def test_dequantize_rejects_out_of_range(self):
        with pytest.raises(CorruptDataError):
            dequantize_group([128], 1.0, 8)

    def test_fake_quantize_fixed_points(self):
        lattice = np.array([-127, -3, 0, 5, 127]) / 127 * 0.5
        np.testing.assert_array_equal(fake_quantize_group(lattice, 8), lattice)

    def test_fake_quantize_zero(self):
        assert not fake_quantize_group(np.zeros(7), 8).any()


groups = st.tuples(
    st.integers(min_value=0, max_value=2**31 - 1),
    st.integers(min_value=1, max_value=400),
    st.sampled_from([8, 10]),
    st.floats(min_value=1e-3, max_value=100.0),
)


@settings(max_examples=300, deadline=None)
@given(groups)
def test_error_bound_and_peak_symbol(params):
    seed, n, q, scale = params
    v = np.random.default_rng(seed).normal(0, scale, n)
    k = k_of(q)
    sym, amax = quantize_group(v, q)
    # below 2**-14 the scale is a subnormal half whose spacing can exceed half a step
    assume(amax >= 2.0**-14)
    assert is_f16_exact(amax) and amax >= np.max(np.abs(v))
    rec = dequantize_group(sym, amax, q)
    bound = amax / (2 * k) + 4 * np.spacing(np.maximum(np.abs(v), amax))
    assert np.all(np.abs(v - rec) <= bound)
    assert np.max(np.abs(sym)) == k


def test_subnormal_scale_keeps_error_bound():
    v = np.array([-6.82677987e-06, 1e-6])
    sym, amax = quantize_group(v, 8)
    assert amax < 2.0**-14
    assert np.all(np.abs(v - dequantize_group(sym, amax, 8)) <= amax / 254 + 4 * np.spacing(amax))
    assert np.max(np.abs(sym)) >= 126


def random_net(seed, dims=(2, 6, 5, 3)):
    net = init_network(dims, seed=seed)
    rng = np.random.default_rng(seed + 1)
    scaled = [p * rng.uniform(0.1, 20) for p in net.params()]
    return net.with_params(scaled)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.sampled_from([4, 8, 10]))
def test_network_quantization_idempotent(seed, q):
    qnet = quantize_network(random_net(seed), q)
    again = quantize_network(dequantize_network(qnet), q)
    for a, b in zip(qnet.weight_symbols + qnet.bias_symbols, again.weight_symbols + again.bias_symbols):
        np.testing.assert_array_equal(a, b)
    assert again.weight_absmax == qnet.weight_absmax
    assert again.bias_absmax == qnet.bias_absmax


def test_two_layer_side_values():
    qnet = quantize_network(init_network((2, 4, 3), seed=0), 8)
    assert len(qnet.weight_absmax) == 2 and len(qnet.bias_absmax) == 2
    assert qnet.layer_dims == (2, 4, 3)


def test_zero_network():
    dims = (2, 4, 3)
    zero = SirenNetwork(dims, [np.zeros((4, 2)), np.zeros((3, 4))], [np.zeros(4), np.zeros(3)])
    qnet = quantize_network(zero, 8)
    assert not qnet.symbols().any()
    assert qnet.weight_absmax == (0.0, 0.0) and qnet.bias_absmax == (0.0, 0.0)
    assert not any(p.any() for p in dequantize_network(qnet).params())


def test_extremes_reproduce_absmax():
    net = SirenNetwork((2, 3), [np.array([[0.5, -0.5], [0.25, 0.0], [0.0, 0.1]])], [np.array([2.0, -2.0, 1.0])])
    rec = dequantize_network(quantize_network(net, 8))
    assert rec.weights[0][0].tolist() == [0.5, -0.5]
    assert rec.biases[0][:2].tolist() == [2.0, -2.0]


def test_validate_catches_corruption():
    qnet = quantize_network(init_network((2, 4, 3), seed=0), 8)
    bad = QuantizedNetwork(qnet.layer_dims, 8, qnet.weight_symbols, qnet.bias_symbols, (0.1, 0.2), qnet.bias_absmax)
    with pytest.raises(CorruptDataError):
        bad.validate()
    ws = list(qnet.weight_symbols)
    ws[0] = ws[0].copy()
    ws[0][0, 0] = 200
    with pytest.raises(CorruptDataError):
        QuantizedNetwork(qnet.layer_dims, 8, tuple(ws), qnet.bias_symbols, qnet.weight_absmax, qnet.bias_absmax).validate()


def test_symbol_order():
    qnet = quantize_network(init_network((2, 4, 3), seed=1), 8)
    s = qnet.symbols()
    assert s.size == 8 + 12 + 4 + 3
    np.testing.assert_array_equal(s[:8], qnet.weight_symbols[0].ravel())
    np.testing.assert_array_equal(s[20:24], qnet.bias_symbols[0])

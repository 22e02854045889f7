import numpy as np
import pytest

from rqat_inr import rqat
from rqat_inr.bitstream import reconstruct
from rqat_inr.errors import InvalidArgumentError, TrainingError
from rqat_inr.quantizer import dequantize_network, quantize_network
from rqat_inr.rqat import (
    DEFAULT_LAMBDA_GRID,
    RqatConfig,
    psnr_from_mse,
    rqat_loss,
    select_lambda,
    train_qat,
    train_rqat,
)
from rqat_inr.siren import (
    FitConfig,
    ImageBuffer,
    SirenNetwork,
    fit_full_precision,
    forward,
    init_network,
    make_grid,
    mse_loss,
)

SMALL = (2, 12, 12, 3)


def same_qnet(a, b):
    return np.array_equal(a.symbols(), b.symbols()) and a.weight_absmax == b.weight_absmax and a.bias_absmax == b.bias_absmax


@pytest.fixture(scope="module")
def small_fit(request):
    crop = request.getfixturevalue("crop16")
    return crop, fit_full_precision(crop, FitConfig(SMALL, lr=1e-3, iterations=200, seed=3))


class TestLoss:
    def test_hand_value(self):
        img = np.full((4, 3), 0.5)
        assert rqat_loss(img, np.full((4, 3), 0.6), np.full((4, 3), 0.55), 0.1) == pytest.approx(0.01025)

    def test_zero_lambda_is_plain_mse(self, rng):
        img, pq, pf = rng.random((3, 10, 3))
        assert rqat_loss(img, pq, pf, 0.0) == mse_loss(pq, img)

    def test_psnr_from_mse(self):
        assert psnr_from_mse(0.01) == pytest.approx(20.0)
        assert psnr_from_mse(0.0) == float("inf")


class TestConfig:
    @pytest.mark.parametrize("kw", [{"lam": -0.1}, {"q": 1}, {"q": 16}, {"iterations": 0}, {"lr": 0.0}])
    def test_rejects(self, kw):
        with pytest.raises(InvalidArgumentError):
            RqatConfig(**kw)


def test_zero_gradient_corner():
    # all weights zero, final bias 0.5, target 0.5: loss and gradients vanish
    dims = (2, 4, 3)
    net = SirenNetwork(dims, [np.zeros((4, 2)), np.zeros((3, 4))], [np.zeros(4), np.full(3, 0.5)])
    img = ImageBuffer(4, 4, np.full((16, 3), 0.5))
    res = train_rqat(img, net, RqatConfig(lam=0.1, iterations=1))
    assert res.loss_trace == [0.0]
    assert same_qnet(res.qnet, quantize_network(net, 8))
    assert res.final_psnr_quantized == float("inf")


def test_lambda_zero_equals_plain_qat(small_fit):
    img, net = small_fit
    a = train_rqat(img, net, RqatConfig(lam=0.0, iterations=15, lr=1e-3))
    b = train_qat(img, net, 8, 15, 1e-3)
    assert a.loss_trace == b.loss_trace
    assert same_qnet(a.qnet, b.qnet)


def test_regularizer_changes_the_trajectory(small_fit):
    img, net = small_fit
    a = train_rqat(img, net, RqatConfig(lam=0.0, iterations=10, lr=1e-3))
    b = train_rqat(img, net, RqatConfig(lam=0.1, iterations=10, lr=1e-3))
    assert a.loss_trace != b.loss_trace
    assert b.lam == 0.1 and a.lam == 0.0


def test_straight_through_gradient(small_fit, monkeypatch):
    """The update uses the gradient of the loss evaluated at the quantized point."""
    img, net = small_fit
    lam = 0.05
    seen = []
    real_step = rqat.adam_step

    def spy(state, params, grads):
        seen.append([g.copy() for g in grads])
        return real_step(state, params, grads)

    monkeypatch.setattr(rqat, "adam_step", spy)
    train_rqat(img, net, RqatConfig(lam=lam, iterations=1))

    grid = make_grid(img.width, img.height)
    target = forward(net, grid)
    fq = dequantize_network(quantize_network(net, 8), net.w0)
    params = fq.params()

    def loss_at(ps):
        return rqat_loss(img.pixels, forward(fq.with_params(ps), grid), target, lam)

    h = 1e-6
    rng = np.random.default_rng(0)
    for j in rng.choice(len(params), 6, replace=False):
        flat = params[j].ravel()
        for idx in rng.choice(flat.size, min(3, flat.size), replace=False):
            plus = [p.copy() for p in params]
            minus = [p.copy() for p in params]
            plus[j].ravel()[idx] += h
            minus[j].ravel()[idx] -= h
            fd = (loss_at(plus) - loss_at(minus)) / (2 * h)
            got = seen[0][j].ravel()[idx]
            assert abs(got - fd) <= 1e-4 * max(abs(got), abs(fd)) + 1e-9


def test_final_prediction_matches_decoder(small_fit):
    img, net = small_fit
    before = [p.copy() for p in net.params()]
    res = train_rqat(img, net, RqatConfig(lam=0.01, iterations=5, q=6))
    recon = reconstruct(res.qnet, img.width, img.height, net.w0)
    assert res.final_prediction.tobytes() == recon.tobytes()
    assert res.qnet.q == 6
    assert all(np.array_equal(a, b) for a, b in zip(before, net.params()))


def test_non_finite_training_raises():
    net = init_network((2, 3), seed=0)
    img = ImageBuffer(2, 2, np.full((4, 3), 0.5))
    with pytest.raises(TrainingError):
        train_rqat(img, net, RqatConfig(lam=0.0, iterations=3, lr=1e308))


class TestSelectLambda:
    def test_single_value(self, small_fit):
        img, net = small_fit
        lam, res = select_lambda(img, net, RqatConfig(iterations=3), grid=[0.05])
        assert lam == 0.05 and res.lam == 0.05

    def test_default_grid_and_dedup(self, small_fit):
        img, net = small_fit
        out = {}
        lam, res = select_lambda(img, net, RqatConfig(iterations=3), all_results=out)
        assert sorted(out) == sorted(DEFAULT_LAMBDA_GRID)
        assert res.final_psnr_quantized == max(r.final_psnr_quantized for r in out.values())
        out2 = {}
        select_lambda(img, net, RqatConfig(iterations=3), grid=[0.1, 0.1, 0.01], all_results=out2)
        assert sorted(out2) == [0.01, 0.1]

    def test_ties_prefer_smaller_lambda(self):
        dims = (2, 4, 3)
        net = SirenNetwork(dims, [np.zeros((4, 2)), np.zeros((3, 4))], [np.zeros(4), np.full(3, 0.5)])
        img = ImageBuffer(3, 3, np.full((9, 3), 0.5))
        lam, _ = select_lambda(img, net, RqatConfig(iterations=1), grid=[0.1, 0.05, 0.01])
        assert lam == 0.01

    def test_empty_grid(self, small_fit):
        img, net = small_fit
        with pytest.raises(InvalidArgumentError):
            select_lambda(img, net, RqatConfig(iterations=1), grid=[])


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_training_does_not_regress_below_naive_quantization(crop16, seed):
    net = fit_full_precision(crop16, FitConfig(SMALL, lr=1e-3, iterations=150, seed=seed))
    grid = make_grid(crop16.width, crop16.height)
    naive = forward(dequantize_network(quantize_network(net, 5), net.w0), grid)
    naive_psnr = psnr_from_mse(mse_loss(np.clip(naive, 0, 1), crop16.pixels))
    res = train_rqat(crop16, net, RqatConfig(lam=0.01, q=5, iterations=60, lr=1e-3))
    assert np.all(np.isfinite(res.loss_trace))
    assert res.final_psnr_quantized >= naive_psnr

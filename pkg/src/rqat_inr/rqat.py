"""Regularized quantization-aware training.

Full-precision shadow parameters are fake-quantized every step; the quantized
network's prediction is pulled toward the image and, with weight ``lam``,
toward the fixed prediction of a full-precision teacher network. Rounding is
bypassed in the backward pass (straight-through), and the per-group absmax
scales are treated as constants for the step.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericError, TrainingError
from .quantizer import dequantize_network, k_of, quantize_network
from .siren import AdamState, adam_step, forward, loss_and_gradients, make_grid, mse_loss

DEFAULT_LAMBDA_GRID = (0.005, 0.05, 0.01, 0.1)


@dataclass(frozen=True)
class RqatConfig:
    lam: float = 0.01
    q: int = 8
    iterations: int = 2000
    lr: float = 2e-4
    seed: int = 0

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidArgumentError("lambda must be nonnegative")
        k_of(self.q)
        if self.iterations < 1:
            raise InvalidArgumentError("iterations must be >= 1")
        if not self.lr > 0:
            raise InvalidArgumentError("lr must be positive")


@dataclass
class RqatResult:
    qnet: object
    final_loss: float
    final_psnr_quantized: float
    loss_trace: list = field(default_factory=list)
    lam: float = 0.0
    final_prediction: np.ndarray = None


def psnr_from_mse(mse):
    return float("inf") if mse == 0 else 10.0 * np.log10(1.0 / mse)


def rqat_loss(image, pred_quantized, pred_full_precision, lam):
    return mse_loss(pred_quantized, image) + lam * mse_loss(pred_quantized, pred_full_precision)


def _checksum(array):
    return hashlib.sha256(np.ascontiguousarray(array).tobytes()).hexdigest()


def train_rqat(image, init, cfg, teacher=None, regularize=True):
    """Run RQAT from ``init``; the teacher defaults to ``init`` itself.

    With ``regularize=False`` (or no teacher prediction needed) the distillation
    term is dropped entirely, which is plain quantization-aware training.
    ``cfg.seed`` is recorded for reproducibility; the loop itself draws no
    random numbers.
    """
    grid = make_grid(image.width, image.height)
    teacher = init if teacher is None else teacher
    use_reg = regularize and cfg.lam > 0
    target = forward(teacher, grid) if use_reg else None
    target_sum = _checksum(target) if use_reg else None

    shadow = init
    state = AdamState(lr=cfg.lr)
    params = shadow.params()
    trace = []
    for it in range(cfg.iterations):
        try:
            fq = dequantize_network(quantize_network(shadow, cfg.q), shadow.w0)
            loss, _, grads = loss_and_gradients(fq, grid, image, target, cfg.lam if use_reg else 0.0)
            if not np.isfinite(loss):
                raise NumericError("non-finite loss")
            # straight-through: gradients at the quantized point update the shadow weights
            params = adam_step(state, params, grads)
            shadow = shadow.with_params(params)
        except (NumericError, InvalidArgumentError) as exc:
            raise TrainingError(f"RQAT failed at iteration {it}: {exc}", iteration=it) from exc
        trace.append(loss)

    if use_reg and _checksum(target) != target_sum:
        raise RuntimeError("teacher predictions changed during training")
    qnet = quantize_network(shadow, cfg.q)
    pred = forward(dequantize_network(qnet, shadow.w0), grid)
    final_loss = rqat_loss(image, pred, target, cfg.lam) if use_reg else mse_loss(pred, image)
    psnr = psnr_from_mse(mse_loss(np.clip(pred, 0.0, 1.0), image))
    return RqatResult(qnet, final_loss, psnr, trace, cfg.lam if use_reg else 0.0, pred)


def train_qat(image, init, q=8, iterations=2000, lr=2e-4):
    """Quantization-aware training without the distillation term."""
    return train_rqat(image, init, RqatConfig(0.0, q, iterations, lr), regularize=False)


def select_lambda(image, init, cfg, grid=None, teacher=None, all_results=None):
    """Train once per distinct lambda and keep the best quantized PSNR.

    Ties go to the smaller lambda. If ``all_results`` is a dict it receives
    every ``lambda -> RqatResult``.
    """
    lams = sorted(set(float(x) for x in (DEFAULT_LAMBDA_GRID if grid is None else grid)))
    if not lams:
        raise InvalidArgumentError("lambda grid is empty")
    best = None
    for lam in lams:
        cfg_l = RqatConfig(lam, cfg.q, cfg.iterations, cfg.lr, cfg.seed)
        res = train_rqat(image, init, cfg_l, teacher=teacher)
        if all_results is not None:
            all_results[lam] = res
        if best is None or res.final_psnr_quantized > best[1].final_psnr_quantized:
            best = (lam, res)
    return best

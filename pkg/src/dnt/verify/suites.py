"""Self-check suites behind ``dnt verify``: LBP oracles, gradient checks, invariants."""

from dataclasses import dataclass

import numpy as np

from ..data.augment import AugmentationConfig, erase_region, random_erase
from ..data.rng import Rng
from ..lbp import (DEFAULT_CONFIGS, LbpConfig, available_backends, histogram, lbp_code_map,
                   uniform_bin_map)
from ..model import DntModel, ModelConfig
from ..model.network import PatchPool
from ..runtime import (BatchNorm, BilinearResize, Conv2d, Dense, Dropout, GlobalAvgPool, LSTMCell,
                       MaxPool2, ReLU, check_scalar_function, gradient_check, softmax_cross_entropy)
from .oracles import naive_histogram, naive_lbp_code_map, naive_uniform_bins

OP_TOL = 1e-5
MODEL_TOL = 1e-4


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def random_gray(rng, low=16, high=64):
    h = rng.integers(low, high + 1)
    w = rng.integers(low, high + 1)
    return rng.uniform((h, w), 0.0, 255.0)


# ----- LBP ----------------------------------------------------------------------------
def lbp_suite(n_images=50, seed=0):
    rng = Rng.substream(seed, 0x1B9)
    images = [random_gray(rng) for _ in range(n_images)]
    results = []
    for backend in available_backends():
        mismatched, total = 0, 0
        for img in images:
            rows = img.tolist()
            for cfg in DEFAULT_CONFIGS:
                fast = lbp_code_map(img, cfg, backend)
                ref = np.array(naive_lbp_code_map(rows, cfg.P, cfg.R, cfg.sampling))
                mismatched += int((fast != ref).sum())
                total += ref.size
        results.append(CheckResult(f"lbp.oracle[{backend}]", mismatched == 0,
                                   f"{mismatched} of {total} codes differ over {n_images} images"))
    for P in (8, 16):
        ref, nbins = naive_uniform_bins(P)
        ok = np.array_equal(uniform_bin_map(P), ref) and nbins == P * (P - 1) + 3
        results.append(CheckResult(f"lbp.uniform_bins[P={P}]", ok, f"{nbins} bins"))
    bad = 0
    for img in images[:10]:
        for cfg in DEFAULT_CONFIGS:
            codes = lbp_code_map(img, cfg)
            ref = naive_histogram(codes.tolist(), cfg.P, cfg.binning)
            bad += int(not np.array_equal(histogram(codes, cfg, normalize=False), ref))
    results.append(CheckResult("lbp.histogram_oracle", bad == 0, f"{bad} mismatching blocks"))
    return results


# ----- gradients ----------------------------------------------------------------------
def _op_cases(seed):
    rng = Rng.substream(seed, 0x6AD)
    return [
        ("conv2d", Conv2d(3, 4, 3, 1, 1, rng=rng, name="conv"), [(2, 8, 8, 3)]),
        ("conv2d_stride2", Conv2d(2, 3, 3, 2, 1, rng=rng, name="conv"), [(1, 7, 7, 2)]),
        ("dense", Dense(4, 3, rng=rng), [(5, 4)]),
        ("relu", ReLU(), [(4, 6)]),
        ("maxpool2", MaxPool2(), [(2, 6, 6, 3)]),
        ("batchnorm", BatchNorm(3), [(4, 3, 3, 3)]),
        ("dropout", Dropout(0.2, rng=Rng.substream(seed, 0xD0)), [(4, 5)]),
        ("global_average_pool", GlobalAvgPool(), [(2, 3, 4, 5)]),
        ("bilinear_resize", BilinearResize(48, 48), [(1, 7, 7, 1)]),
        ("patch_pool", PatchPool(ModelConfig().grid), [(1, 3, 3, 4)]),
        ("lstm", LSTMCell(6, 5, rng=rng), [(1, 16, 6)]),
    ]


def _softmax_ce_check(seed):
    rng = Rng.substream(seed, 0x50F)
    logits = rng.normal((3, 5))
    labels = np.array([0, 4, 2])
    _, _, grad = softmax_cross_entropy(logits, labels)
    return check_scalar_function(lambda: softmax_cross_entropy(logits, labels)[0],
                                 {"logits": logits}, {"logits": grad})


def miniature_model_check(seed=0, max_entries=None):
    """Finite-difference check of every parameter of a 2-block, v=8, Y=3 model on 32x32 inputs."""
    cfg = ModelConfig(num_classes=3, input_size=32, backbone=[(4, True), (8, True)],
                      lstm_hidden=8, dtype="float64", init_seed=seed)
    model = DntModel(cfg)
    rng = Rng.substream(seed, 0xF11)
    images = rng.uniform((2, 32, 32, 3), 0.0, 255.0)
    labels = np.array([0, 2])
    textures = model.textures(images)
    state = model.dropout.rng.state

    def loss():
        model.dropout.rng.state = state
        return softmax_cross_entropy(model.forward(images, textures), labels)[0]

    model.zero_grad()
    model.dropout.rng.state = state
    model.loss_and_backward(images, labels, textures)
    params = model.parameters()
    return check_scalar_function(loss, {p.name: p.value for p in params},
                                 {p.name: p.grad.copy() for p in params},
                                 max_entries=max_entries, seed=seed)


def grad_suite(seeds=5, model_seeds=1, max_entries=200):
    results = []
    worst = {}
    for seed in range(seeds):
        for name, op, shapes in _op_cases(seed):
            rep = gradient_check(op, shapes, seed=seed, max_entries=max_entries)
            worst[name] = max(worst.get(name, 0.0), rep.max_rel_error)
        rep = _softmax_ce_check(seed)
        worst["softmax_cross_entropy"] = max(worst.get("softmax_cross_entropy", 0.0),
                                             rep.max_rel_error)
    for name, err in worst.items():
        results.append(CheckResult(f"grad.{name}", err < OP_TOL,
                                   f"max rel err {err:.2e} over {seeds} seeds (tol {OP_TOL:g})"))
    for seed in range(model_seeds):
        rep = miniature_model_check(seed)
        results.append(CheckResult(f"grad.full_model[seed={seed}]", rep.max_rel_error < MODEL_TOL,
                                   f"max rel err {rep.max_rel_error:.2e} over {rep.checked} "
                                   f"parameters (tol {MODEL_TOL:g})"))
    return results


# ----- invariants ---------------------------------------------------------------------
def invariants_suite(seed=0, draws=20):
    rng = Rng.substream(seed, 0x1A7)
    results = []
    bad = 0
    for _ in range(draws):
        img = random_gray(rng, 24, 48)
        base = lbp_code_map(img, LbpConfig(8, 1))
        k = rng.uniform(low=0.5, high=3.0)
        bad += int(not np.array_equal(base, lbp_code_map(np.exp(img / 255.0 * k) + img ** 3,
                                                         LbpConfig(8, 1))))
    results.append(CheckResult("lbp.monotone_invariance[8,1]", bad == 0,
                               f"{bad} of {draws} draws changed the code map"))
    bad = 0
    for _ in range(draws):
        img = random_gray(rng, 24, 48)
        a = rng.uniform(low=0.5, high=2.0)
        b = rng.uniform(low=-50.0, high=50.0)
        for cfg in DEFAULT_CONFIGS:
            bad += int(not np.array_equal(lbp_code_map(img, cfg), lbp_code_map(a * img + b, cfg)))
    results.append(CheckResult("lbp.affine_invariance", bad == 0,
                               f"{bad} of {draws * len(DEFAULT_CONFIGS)} maps changed"))

    probs_ok = True
    for _ in range(draws):
        logits = rng.normal(6) * 5
        _, p, _ = softmax_cross_entropy(logits, 0)
        _, q, _ = softmax_cross_entropy(logits + 1000.0, 0)
        probs_ok &= bool(np.all(p >= 0) and abs(p.sum() - 1) < 1e-6 and np.allclose(p, q, atol=1e-12))
    results.append(CheckResult("runtime.softmax_probability", probs_ok))

    cell = LSTMCell(4, 3, rng=rng)
    x = rng.normal((1, 1, 4))
    h_seq = cell.forward(x)
    h_step, _, _ = cell.step(x[:, 0], np.zeros((1, 3)), np.zeros((1, 3)))
    results.append(CheckResult("runtime.lstm_sequence_step", bool(np.array_equal(h_seq, h_step))))

    cfg = AugmentationConfig()
    erase_bad = 0
    img = rng.uniform((224, 224, 3), 0.0, 255.0)
    for k in range(1000):
        r = Rng.substream(seed, 0xE7A5, k)
        top, left, eh, ew = erase_region(img.shape, cfg, Rng(r.state))
        out = random_erase(img, cfg, r)
        inside = np.zeros(img.shape[:2], dtype=bool)
        inside[top:top + eh, left:left + ew] = True
        ok = (0.2 <= eh / 224 <= 0.8 and 0.2 <= ew / 224 <= 0.8
              and np.all(out[inside] == 127.0) and np.array_equal(out[~inside], img[~inside]))
        erase_bad += int(not ok)
    results.append(CheckResult("data.random_erase_contract", erase_bad == 0,
                               f"{erase_bad} of 1000 draws violated the contract"))

    model = DntModel(ModelConfig(num_classes=3, input_size=32, backbone=[(4, True), (8, True)],
                                 lstm_hidden=8, dtype="float64"))
    imgs = rng.uniform((2, 32, 32, 3), 0.0, 255.0)
    runs = []
    for _ in range(2):
        m = DntModel(model.config)
        m.loss_and_backward(imgs, [0, 1])
        runs.append(np.concatenate([p.grad.ravel() for p in m.parameters()]))
    results.append(CheckResult("model.bitwise_determinism", bool(np.array_equal(runs[0], runs[1]))))
    return results


SUITES = {"lbp": lbp_suite, "grad": grad_suite, "invariants": invariants_suite}


def run_suite(name):
    if name == "all":
        return [r for fn in SUITES.values() for r in fn()]
    return SUITES[name]()

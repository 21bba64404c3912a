"""The two-stream network: conv backbone -> patch sequence -> LSTM, fused with LBP histograms."""

import numpy as np

from ..data.rng import Rng
from ..errors import ConfigError
from ..lbp import batch_descriptors
from ..runtime import (BatchNorm, BilinearResize, Conv2d, Dense, Dropout, GlobalAvgPool,
                       LSTMCell, MaxPool2, ReLU, softmax, softmax_cross_entropy)
from .config import ModelConfig


def normalize_pixels(images, dtype):
    """[0, 255] -> [-1, 1]."""
    return (np.asarray(images, dtype=np.float64) / 127.5 - 1.0).astype(dtype)


class PatchPool:
    """Upsample, tile row-major into a x a patches, resample each patch, average.

    (n, hf, wf, c) -> (n, e, c). Parameter-free.
    """

    def __init__(self, grid):
        self.grid = grid
        self.upsample = BilinearResize(*grid.upsampled_size)
        a = grid.patch_side
        pooled = grid.pooled_size or (a, a)
        self.pooled = pooled
        self.patch_resize = None if tuple(pooled) == (a, a) else BilinearResize(*pooled)

    def forward(self, fmap):
        up = self.upsample.forward(fmap)
        n, h, w, c = up.shape
        a = self.grid.patch_side
        gh, gw = h // a, w // a
        patches = up.reshape(n, gh, a, gw, a, c).transpose(0, 1, 3, 2, 4, 5).reshape(n * gh * gw, a, a, c)
        if self.patch_resize is not None:
            patches = self.patch_resize.forward(patches)
        feats = patches.mean(axis=(1, 2))
        self._shape = (n, gh, gw, a, c, patches.shape[1:3])
        return feats.reshape(n, gh * gw, c)

    def backward(self, dfeats):
        n, gh, gw, a, c, (ph, pw) = self._shape
        d = dfeats.reshape(n * gh * gw, 1, 1, c) / (ph * pw)
        d = np.broadcast_to(d, (n * gh * gw, ph, pw, c))
        if self.patch_resize is not None:
            d = self.patch_resize.backward(np.ascontiguousarray(d))
        d = d.reshape(n, gh, gw, a, a, c).transpose(0, 1, 3, 2, 4, 5).reshape(n, gh * a, gw * a, c)
        return self.upsample.backward(np.ascontiguousarray(d))


def partition_patches(fmap, grid):
    """Single (hf, wf, c) map -> list of e (a, a, c) patches, row-major, after upsampling."""
    up = BilinearResize(*grid.upsampled_size).forward(np.asarray(fmap)[None])[0]
    a = grid.patch_side
    gh, gw = grid.grid_shape
    return [up[r * a:(r + 1) * a, q * a:(q + 1) * a] for r in range(gh) for q in range(gw)]


def patch_features(patches, pooled_size=None):
    """Resample each patch to ``pooled_size`` (default: unchanged) and average -> list of c-vectors."""
    if not patches:
        raise ConfigError("patch list is empty")
    out = []
    for p in patches:
        if pooled_size is not None and tuple(pooled_size) != p.shape[:2]:
            p = BilinearResize(*pooled_size).forward(p[None])[0]
        out.append(p.mean(axis=(0, 1)))
    return out


class DntModel:
    def __init__(self, config: ModelConfig):
        self.config = config
        cfg = config
        dtype = np.dtype(cfg.dtype)
        self.dtype = dtype
        rng = Rng.substream(cfg.init_seed, 0xD17)
        self.blocks = []
        cin = 3
        for k, (cout, use_bn) in enumerate(cfg.backbone):
            # conv bias is redundant in front of batchnorm
            layers = [Conv2d(cin, cout, 3, 1, 1, bias=not use_bn, rng=rng, dtype=dtype,
                             name=f"backbone.{k}.conv")]
            if use_bn:
                layers.append(BatchNorm(cout, dtype=dtype, name=f"backbone.{k}.bn"))
            layers += [ReLU(), MaxPool2()]
            self.blocks.append(layers)
            cin = cout
        if cfg.patch_encoder:
            self.patch_pool = PatchPool(cfg.grid)
            self.lstm = LSTMCell(cfg.feature_channels, cfg.lstm_hidden, rng=rng, dtype=dtype,
                                 name="lstm")
        else:
            self.patch_pool = None
            self.lstm = None
            self.gap = GlobalAvgPool()
        self.projection = None
        if cfg.use_lbp and cfg.fusion == "addition":
            self.projection = Dense(cfg.texture_width, cfg.deep_width, bias=False, rng=rng,
                                    dtype=dtype, name="projection")
        self.fusion_bn = (BatchNorm(cfg.fused_width, dtype=dtype, name="fusion.bn")
                          if cfg.fusion_batchnorm else None)
        self.dropout = Dropout(cfg.dropout_rate, rng=Rng.substream(cfg.init_seed, 0xD80))
        self.classifier = Dense(cfg.fused_width, cfg.num_classes, rng=rng, dtype=dtype,
                                name="classifier")
        self.training = True

    # ----- bookkeeping -------------------------------------------------------------
    def _layers(self):
        out = [layer for block in self.blocks for layer in block]
        out += [m for m in (self.lstm, self.projection, self.fusion_bn, self.dropout,
                            self.classifier) if m is not None]
        return out

    def component_parameters(self):
        comps = {
            "backbone": [p for block in self.blocks for layer in block for p in layer.parameters()],
            "lstm": self.lstm.parameters() if self.lstm else [],
            "projection": self.projection.parameters() if self.projection else [],
            "classifier": (self.fusion_bn.parameters() if self.fusion_bn else [])
            + self.classifier.parameters(),
        }
        return comps

    def parameters(self):
        return [p for ps in self.component_parameters().values() for p in ps]

    def state_tensors(self):
        """Parameters followed by batchnorm running statistics, in declaration order."""
        buffers = [b for layer in self._layers() for b in layer.buffers()]
        return self.parameters() + buffers

    def param_count(self):
        """Exact scalar parameter count, total and per component."""
        per = {k: sum(p.size for p in ps) for k, ps in self.component_parameters().items()}
        return sum(per.values()), per

    def train(self, mode=True):
        self.training = mode
        for layer in self._layers():
            layer.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    # ----- forward / backward ------------------------------------------------------
    def textures(self, images):
        """LBP descriptors of the (augmented, un-normalised) RGB views."""
        if not self.config.use_lbp:
            return None
        return batch_descriptors(images, self.config.lbp(), self.config.lbp_normalize)

    def backbone_forward(self, x):
        for block in self.blocks:
            for layer in block:
                x = layer.forward(x)
        return x

    def backbone_backward(self, d):
        for block in reversed(self.blocks):
            for layer in reversed(block):
                d = layer.backward(d)
        return d

    def encode(self, fmap):
        if self.lstm is None:
            return self.gap.forward(fmap)
        return self.lstm.forward(self.patch_pool.forward(fmap))

    def fuse(self, deep, texture):
        if texture is None:
            return deep
        texture = np.asarray(texture, dtype=self.dtype)
        if texture.shape[-1] != self.config.texture_width:
            raise ConfigError(f"texture width {texture.shape[-1]} does not match the configured "
                              f"{self.config.texture_width}")
        if self.projection is not None:
            return deep + self.projection.forward(texture)
        return np.concatenate([deep, texture], axis=1)

    def forward(self, images, textures=None):
        """Logits for a batch of (n, h, w, 3) images in [0, 255]."""
        images = np.asarray(images)
        if images.ndim == 3:
            images = images[None]
        if self.config.use_lbp and textures is None:
            textures = self.textures(images)
        fmap = self.backbone_forward(normalize_pixels(images, self.dtype))
        deep = self.encode(fmap)
        fused = self.fuse(deep, textures if self.config.use_lbp else None)
        if self.fusion_bn is not None:
            fused = self.fusion_bn.forward(fused)
        fused = self.dropout.forward(fused)
        self._fused_width = fused.shape[1]
        return self.classifier.forward(fused)

    def backward(self, dlogits):
        d = self.classifier.backward(dlogits)
        d = self.dropout.backward(d)
        if self.fusion_bn is not None:
            d = self.fusion_bn.backward(d)
        deep_width = self.config.deep_width
        if self.projection is not None:
            self.projection.backward(d)
        d_deep = d[:, :deep_width]
        if self.lstm is None:
            dfmap = self.gap.backward(d_deep)
        else:
            dfmap = self.patch_pool.backward(self.lstm.backward(np.ascontiguousarray(d_deep)))
        self.backbone_backward(dfmap)

    def loss_and_backward(self, images, labels, textures=None):
        """Forward with mean cross-entropy, backward into parameter grads; returns (loss, probs)."""
        logits = self.forward(images, textures)
        loss, probs, dlogits = softmax_cross_entropy(logits, labels)
        self.backward(dlogits.astype(self.dtype))
        return loss, probs

    def predict_proba(self, images, textures=None):
        logits = self.forward(images, textures)
        return softmax(logits.astype(np.float64))


def forward(model, images, labels=None, textures=None):
    """Class probabilities and, if labels are given, the mean cross-entropy loss."""
    logits = model.forward(images, textures)
    if labels is None:
        return softmax(logits.astype(np.float64)), None
    loss, probs, _ = softmax_cross_entropy(logits.astype(np.float64), labels)
    return probs, loss


def param_count(model):
    return model.param_count()

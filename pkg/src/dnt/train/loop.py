"""Mini-batch SGD training and deterministic evaluation."""

import csv
import io
import logging
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..data.augment import AugmentationConfig, augment_eval, augment_train
from ..data.netpbm import load_image
from ..data.manifest import DatasetManifest
from ..data.rng import Rng
from ..errors import ConfigError, UsageError
from ..model import checkpoint
from ..runtime import sgd_step, softmax_cross_entropy
from .metrics import compute_metrics
from .schedule import TrainConfig, lr_schedule

log = logging.getLogger(__name__)

LOG_HEADER = ["epoch", "lr", "train_loss", "train_acc", "seconds"]
VAL_HEADER = ["epoch", "val_loss", "val_acc"]
_SHUFFLE_KEY = 0x5E1F
_HOLDOUT_KEY = 0x7A1


def holdout_split(manifest, fraction, seed):
    """Split the train records into (train, val) lists, holding out ``fraction`` per class.

    Each class with at least two train images keeps one or more of them for
    training and gives up ``floor(fraction * n)`` (at least one) to validation.
    """
    train_recs = manifest.split("train")
    if fraction <= 0:
        return train_recs, []
    val = []
    for k in range(manifest.num_classes):
        recs = [r for r in train_recs if r.class_index == k]
        n_val = min(max(int(fraction * len(recs)), 1), len(recs) - 1) if len(recs) > 1 else 0
        order = Rng.substream(seed, _HOLDOUT_KEY, k).permutation(len(recs))
        val += [recs[i] for i in order[:n_val]]
    held = set(r.path for r in val)
    return [r for r in train_recs if r.path not in held], val


class ImageCache:
    """Decoded manifest images, loaded once."""

    def __init__(self, manifest):
        self.manifest = manifest
        self._images = {}

    def __getitem__(self, record):
        if record.path not in self._images:
            self._images[record.path] = load_image(self.manifest.resolve(record))
        return self._images[record.path]


@dataclass
class EpochLog:
    rows: list = field(default_factory=list)

    def append(self, epoch, lr, loss, acc, seconds):
        self.rows.append((epoch, lr, loss, acc, seconds))

    @property
    def losses(self):
        return [r[2] for r in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for epoch, lr, loss, acc, sec in self.rows:
            w.writerow([epoch, repr(lr), repr(loss), repr(acc), f"{sec:.3f}"])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @staticmethod
    def read(path):
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [{k: float(v) for k, v in r.items()} for r in rows]


def train(model, manifest, train_cfg: TrainConfig, aug_cfg: AugmentationConfig, run_dir=None,
          images=None, on_step=None):
    """Train in place; returns the per-epoch log.

    Writes ``epoch_log.csv`` and ``checkpoint.dnt`` into ``run_dir`` when given,
    plus ``val_log.csv`` when ``train_cfg.val_fraction`` holds out validation
    images. ``on_step(epoch, step, loss)`` is called after every optimizer step.
    """
    if model.config.num_classes != manifest.num_classes:
        raise ConfigError(f"model has {model.config.num_classes} classes, manifest has "
                          f"{manifest.num_classes}")
    records, val_records = holdout_split(manifest, train_cfg.val_fraction, train_cfg.seed)
    if not records:
        raise UsageError("manifest has an empty train split")
    val_set = None
    if val_records:
        val_set = DatasetManifest([replace(r, split="test") for r in val_records],
                                  manifest.classes, manifest.base_dir)
    val_rows = []
    aug = replace(aug_cfg, erase=aug_cfg.erase and train_cfg.use_erase, seed=train_cfg.seed)
    images = images or ImageCache(manifest)
    params = model.parameters()
    model.zero_grad()
    epoch_log = EpochLog()
    bs = train_cfg.batch_size
    for epoch in range(train_cfg.epochs):
        model.train()
        start = time.perf_counter()
        lr = lr_schedule(train_cfg, epoch)
        order = Rng.substream(train_cfg.seed, epoch, _SHUFFLE_KEY).permutation(len(records))
        total_loss, correct = 0.0, 0
        for step, b0 in enumerate(range(0, len(order), bs)):
            idx = order[b0:b0 + bs]
            views = np.stack([
                augment_train(images[records[i]], aug, Rng.substream(aug.seed, epoch, i))
                for i in idx
            ])
            labels = np.array([records[i].class_index for i in idx])
            loss, probs = model.loss_and_backward(views, labels)
            sgd_step(params, lr)
            total_loss += loss * len(idx)
            correct += int((probs.argmax(axis=1) == labels).sum())
            if on_step is not None:
                on_step(epoch, step, loss)
        mean_loss = total_loss / len(records)
        acc = 100.0 * correct / len(records)
        seconds = time.perf_counter() - start
        epoch_log.append(epoch, lr, mean_loss, acc, seconds)
        log.info("epoch %d lr %.1e loss %.4f acc %.2f (%.1fs)", epoch, lr, mean_loss, acc, seconds)
        if val_set is not None:
            y, pred, val_loss = predict(model, val_set, aug_cfg=aug, images=images)
            val_acc = 100.0 * sum(a == b for a, b in zip(y, pred)) / len(y)
            val_rows.append((epoch, val_loss, val_acc))
            log.info("epoch %d val loss %.4f acc %.2f", epoch, val_loss, val_acc)
        if run_dir and train_cfg.checkpoint_every and (epoch + 1) % train_cfg.checkpoint_every == 0:
            checkpoint.save(model, os.path.join(run_dir, f"checkpoint-epoch{epoch + 1}.dnt"))
    if run_dir:
        epoch_log.write(os.path.join(run_dir, "epoch_log.csv"))
        if val_rows:
            with open(os.path.join(run_dir, "val_log.csv"), "w", encoding="utf-8",
                      newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(VAL_HEADER)
                w.writerows([e, repr(l), repr(a)] for e, l, a in val_rows)
        checkpoint.save(model, os.path.join(run_dir, "checkpoint.dnt"))
    return epoch_log


def predict(model, manifest, split="test", aug_cfg=None, batch_size=32, images=None):
    """Deterministic center-crop pass; returns (labels, predictions, mean loss)."""
    aug_cfg = aug_cfg or AugmentationConfig()
    records = manifest.split(split)
    if not records:
        raise UsageError(f"manifest has an empty {split} split")
    images = images or ImageCache(manifest)
    model.eval()
    labels, preds, total = [], [], 0.0
    for b0 in range(0, len(records), batch_size):
        batch = records[b0:b0 + batch_size]
        views = np.stack([augment_eval(images[r], aug_cfg) for r in batch])
        y = np.array([r.class_index for r in batch])
        logits = model.forward(views).astype(np.float64)
        loss, probs, _ = softmax_cross_entropy(logits, y)
        total += loss * len(batch)
        labels.extend(y.tolist())
        preds.extend(probs.argmax(axis=1).tolist())
    return labels, preds, total / len(records)


def evaluate(model, manifest, split="test", aug_cfg=None, run_dir=None, images=None):
    """MetricsReport on ``split``; writes metrics.json and confusion.csv into ``run_dir``."""
    labels, preds, loss = predict(model, manifest, split, aug_cfg, images=images)
    report = compute_metrics(labels, preds, manifest.classes, loss)
    if run_dir:
        report.write(os.path.join(run_dir, "metrics.json"), os.path.join(run_dir, "confusion.csv"))
    return report

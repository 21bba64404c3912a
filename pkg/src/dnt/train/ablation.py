"""Ablation runs: train several configurations at equal seed and budget, tabulate top-1."""

import csv
import io
import os
from dataclasses import dataclass, field, replace

from ..errors import ConfigError
from ..model import DntModel, PatchGrid
from .loop import ImageCache, evaluate, train

TABLE_HEADER = ["row", "configuration", "patches", "lbp", "fusion", "erase", "top1", "params"]


@dataclass
class AblationRow:
    name: str
    model: dict = field(default_factory=dict)  # ModelConfig field overrides
    erase: bool = True


def _row(name, erase=True, **model):
    return AblationRow(name, model, erase)


PRESETS = {
    "abln-paper": [
        _row("backbone + common image augmentation", erase=False, patch_encoder=False,
             use_lbp=False),
        _row("backbone + common + random erasing", patch_encoder=False, use_lbp=False),
        _row("DNT with 9 patches, and LBP (addition)", grid=PatchGrid((48, 48), 16),
             use_lbp=True, fusion="addition"),
        _row("DNT with 16 patches, and without LBP", grid=PatchGrid((48, 48), 12), use_lbp=False),
        _row("DNT with 16 patches, and LBP (concatenation)", grid=PatchGrid((48, 48), 12),
             use_lbp=True, fusion="concatenation"),
    ],
}


def preset(name):
    try:
        return list(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown ablation preset {name!r}; have {sorted(PRESETS)}") from None


def run_ablation(rows, model_cfg, train_cfg, aug_cfg, manifest, run_dir=None, log=None):
    """Train and evaluate each row from the same seeds; returns a list of result dicts.

    Writes ``ablation.csv`` (and one sub-directory per row) into ``run_dir``.
    """
    images = ImageCache(manifest)
    results = []
    for k, row in enumerate(rows, start=1):
        cfg = replace(model_cfg, **row.model)
        model = DntModel(cfg)
        row_dir = None
        if run_dir:
            row_dir = os.path.join(run_dir, f"row{k}")
            os.makedirs(row_dir, exist_ok=True)
        train(model, manifest, replace(train_cfg, use_erase=row.erase), aug_cfg, row_dir,
              images=images)
        report = evaluate(model, manifest, aug_cfg=aug_cfg, run_dir=row_dir, images=images)
        total, _ = model.param_count()
        result = {
            "row": k,
            "configuration": row.name,
            "patches": cfg.grid.patch_count if cfg.patch_encoder else 0,
            "lbp": "none" if not cfg.use_lbp else cfg.texture_width,
            "fusion": cfg.fusion if cfg.use_lbp else "-",
            "erase": "on" if row.erase else "off",
            "top1": report.top1_accuracy,
            "params": total,
        }
        results.append(result)
        if log:
            log(f"row {k}: {row.name}: top1 {report.top1_accuracy:.2f} params {total}")
    if run_dir:
        with open(os.path.join(run_dir, "ablation.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(ablation_csv(results))
    return results


def ablation_csv(results):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_HEADER, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow({**r, "top1": f"{r['top1']:.2f}"})
    return buf.getvalue()

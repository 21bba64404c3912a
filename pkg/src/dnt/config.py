"""Run configuration files.

Grammar (one statement per line, ``#`` starts a comment)::

    [section]
    key = value
    section.key = value      # also accepted anywhere, overrides the header

Values are parsed as JSON when possible (``3``, ``1e-3``, ``true``,
``"text"``, ``[1, 2]``) and otherwise taken as a bare string. Every key must
belong to the schema below; unknown sections or keys are errors. The same
``section.key=value`` syntax is used by ``--override``.
"""

import copy
import json

from .data.augment import AugmentationConfig
from .errors import ConfigError
from .model import ModelConfig, PatchGrid
from .train import TrainConfig

DEFAULTS = {
    "model": {
        "num_classes": 0,  # 0: take from the manifest
        "backbone": "16,32,64,128",
        "batchnorm": True,
        "upsampled_size": 48,
        "patches": 16,
        "pooled_size": 0,  # 0: keep each patch at its native a x a size
        "lstm_hidden": 128,
        "patch_encoder": True,
        "fusion": "concatenation",
        "fusion_batchnorm": False,
        "dropout_rate": 0.2,
        "dtype": "float32",
    },
    "lbp": {
        "enabled": True,
        "configs": "8,1 8,2 16,1 16,2",
        "normalize": True,
    },
    "augmentation": {
        "rotation_degrees": 25.0,
        "scale_jitter": 0.25,
        "crop_size": 56,
        "erase": True,
        "erase_scale_min": 0.2,
        "erase_scale_max": 0.8,
        "fill": 127.0,
    },
    "training": {
        "epochs": 200,
        "batch_size": 8,
        "lr0": 1e-3,
        "lr_drop_epoch": 100,
        "lr_drop_factor": 10.0,
        "checkpoint_every": 0,
        "val_fraction": 0.0,
    },
    "data": {
        "manifest": "",
    },
    "run": {
        "seed": 1,
        "deterministic": True,
        "threads": 1,
    },
}

PRESETS = {
    "desk": {},
    "paper-geometry": {
        "model.backbone": "64,128,256,512,1024",
        "model.lstm_hidden": 1024,
        "augmentation.crop_size": 224,
    },
}


def parse_value(text):
    text = text.strip()
    try:
        return json.loads(text)
    except ValueError:
        return text


def _strip_comment(line):
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _coerce(section, key, value):
    default = DEFAULTS[section][key]
    name = f"{section}.{key}"
    if isinstance(default, bool):
        if isinstance(value, str) and value.lower() in ("true", "false", "yes", "no", "on", "off"):
            return value.lower() in ("true", "yes", "on")
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return str(value)


class RunConfig:
    """Schema-checked nested settings: ``cfg["training"]["epochs"]``."""

    def __init__(self, values=None):
        self.values = copy.deepcopy(DEFAULTS)
        for dotted, value in (values or {}).items():
            self.set(dotted, value)

    def __getitem__(self, section):
        return self.values[section]

    def set(self, dotted, value):
        section, _, key = dotted.partition(".")
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section {section!r} in {dotted!r}")
        if key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key {dotted!r}")
        self.values[section][key] = _coerce(section, key, value)

    def apply_text(self, text, source="<config>"):
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = _strip_comment(raw).strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in DEFAULTS:
                    raise ConfigError(f"{source}:{lineno}: unknown config section {section!r}")
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            dotted = key if "." in key else (f"{section}.{key}" if section else key)
            if "." not in dotted:
                raise ConfigError(f"{source}:{lineno}: key {key!r} outside any section")
            try:
                self.set(dotted, parse_value(value))
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
        return self

    def apply_override(self, text):
        if "=" not in text:
            raise ConfigError(f"override must look like section.key=value, got {text!r}")
        key, value = text.split("=", 1)
        self.set(key.strip(), parse_value(value))
        return self

    @classmethod
    def load(cls, path=None, overrides=(), preset=None):
        cfg = cls()
        if preset:
            if preset not in PRESETS:
                raise ConfigError(f"unknown config preset {preset!r}; have {sorted(PRESETS)}")
            for k, v in PRESETS[preset].items():
                cfg.set(k, v)
        if path:
            try:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
            cfg.apply_text(text, str(path))
        for o in overrides:
            cfg.apply_override(o)
        return cfg

    def dumps(self):
        lines = []
        for section, items in self.values.items():
            lines.append(f"[{section}]")
            lines += [f"{k} = {json.dumps(v)}" for k, v in items.items()]
            lines.append("")
        return "\n".join(lines)

    # ----- typed views -------------------------------------------------------------
    def model_config(self, num_classes=None):
        m, lbp = self.values["model"], self.values["lbp"]
        classes = m["num_classes"] or num_classes
        if not classes:
            raise ConfigError("model.num_classes unset and no manifest to infer it from")
        if num_classes and m["num_classes"] and m["num_classes"] != num_classes:
            raise ConfigError(f"model.num_classes={m['num_classes']} but manifest has "
                              f"{num_classes} classes")
        try:
            channels = [int(c) for c in str(m["backbone"]).replace(" ", "").split(",") if c]
        except ValueError:
            raise ConfigError(f"model.backbone must be comma-separated integers, "
                              f"got {m['backbone']!r}") from None
        up = m["upsampled_size"]
        grid = PatchGrid.for_patch_count(m["patches"], up)
        if m["pooled_size"]:
            grid = PatchGrid(grid.upsampled_size, grid.patch_side, (m["pooled_size"],) * 2)
        return ModelConfig(
            num_classes=classes,
            input_size=self.values["augmentation"]["crop_size"],
            backbone=[(c, m["batchnorm"]) for c in channels],
            grid=grid,
            lstm_hidden=m["lstm_hidden"],
            patch_encoder=m["patch_encoder"],
            use_lbp=lbp["enabled"],
            lbp_configs=str(lbp["configs"]).split(),
            lbp_normalize=lbp["normalize"],
            fusion=m["fusion"],
            fusion_batchnorm=m["fusion_batchnorm"],
            dropout_rate=m["dropout_rate"],
            dtype=m["dtype"],
            init_seed=self.values["run"]["seed"],
        )

    def train_config(self):
        t = self.values["training"]
        return TrainConfig(seed=self.values["run"]["seed"],
                           use_erase=self.values["augmentation"]["erase"], **t)

    def augmentation_config(self):
        a = self.values["augmentation"]
        return AugmentationConfig(
            rotation_degrees=a["rotation_degrees"],
            scale_jitter=a["scale_jitter"],
            crop_size=a["crop_size"],
            erase=a["erase"],
            erase_scale=(a["erase_scale_min"], a["erase_scale_max"]),
            fill=a["fill"],
            seed=self.values["run"]["seed"],
        )

import json
from dataclasses import asdict, dataclass, field

from ..errors import ConfigError
from ..lbp import BLOCK_WIDTH, LbpConfig

FUSION_MODES = ("concatenation", "addition")
DTYPES = ("float32", "float64")


@dataclass
class PatchGrid:
    upsampled_size: tuple = (48, 48)
    patch_side: int = 12
    pooled_size: tuple = None  # per-patch bilinear resample target; None keeps (a, a)

    def __post_init__(self):
        self.upsampled_size = tuple(int(v) for v in self.upsampled_size)
        if self.pooled_size is not None:
            self.pooled_size = tuple(int(v) for v in self.pooled_size)
        h, w = self.upsampled_size
        a = self.patch_side
        if a < 1 or h % a or w % a:
            raise ConfigError(f"{h}x{w} map does not tile into {a}x{a} patches")

    @property
    def grid_shape(self):
        h, w = self.upsampled_size
        return h // self.patch_side, w // self.patch_side

    @property
    def patch_count(self):
        h, w = self.upsampled_size
        return (h * w) // (self.patch_side ** 2)

    @classmethod
    def for_patch_count(cls, count, upsampled=48):
        side = int(round(count ** 0.5))
        if side * side != count or upsampled % side:
            raise ConfigError(f"{count} patches do not tile a {upsampled}x{upsampled} map")
        return cls((upsampled, upsampled), upsampled // side)


@dataclass
class ModelConfig:
    """Architecture of the two-stream model.

    ``backbone`` lists ``(out_channels, use_batchnorm)`` per conv block; each
    block is conv3x3 (stride 1, pad 1) -> [batchnorm] -> relu -> maxpool2.
    ``patch_encoder=False`` replaces patch partition + LSTM with a plain
    global average pool of the backbone map (the baseline ablation rows).
    """

    num_classes: int = 4
    input_size: int = 56
    backbone: list = field(default_factory=lambda: [(16, True), (32, True), (64, True), (128, True)])
    grid: PatchGrid = field(default_factory=PatchGrid)
    lstm_hidden: int = 128
    patch_encoder: bool = True
    use_lbp: bool = True
    lbp_configs: list = field(default_factory=lambda: ["8,1", "8,2", "16,1", "16,2"])
    lbp_normalize: bool = True
    fusion: str = "concatenation"
    fusion_batchnorm: bool = False
    dropout_rate: float = 0.2
    dtype: str = "float32"
    init_seed: int = 0

    def __post_init__(self):
        if isinstance(self.grid, dict):
            self.grid = PatchGrid(**self.grid)
        self.backbone = [(int(c), bool(bn)) for c, bn in self.backbone]
        self.lbp_configs = [str(LbpConfig.parse(c)) if not isinstance(c, LbpConfig) else str(c)
                            for c in self.lbp_configs]
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if not self.backbone:
            raise ConfigError("backbone needs at least one block")
        if self.final_extent < 1:
            raise ConfigError(f"{len(self.backbone)} pooling blocks reduce a {self.input_size}px "
                              f"input to nothing")
        if self.fusion not in FUSION_MODES:
            raise ConfigError(f"fusion must be one of {FUSION_MODES}, got {self.fusion!r}")
        if self.dtype not in DTYPES:
            raise ConfigError(f"dtype must be one of {DTYPES}, got {self.dtype!r}")
        if self.lstm_hidden < 1:
            raise ConfigError("lstm_hidden must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {self.dropout_rate}")
        if self.use_lbp and not self.lbp_configs:
            raise ConfigError("LBP branch enabled with no configs")

    @property
    def final_extent(self):
        size = self.input_size
        for _ in self.backbone:
            size //= 2
        return size

    @property
    def feature_channels(self):
        return self.backbone[-1][0]

    @property
    def deep_width(self):
        return self.lstm_hidden if self.patch_encoder else self.feature_channels

    @property
    def texture_width(self):
        return BLOCK_WIDTH * len(self.lbp_configs) if self.use_lbp else 0

    @property
    def fused_width(self):
        if self.use_lbp and self.fusion == "concatenation":
            return self.deep_width + self.texture_width
        return self.deep_width

    def lbp(self):
        return [LbpConfig.parse(c) for c in self.lbp_configs]

    def to_dict(self):
        d = asdict(self)
        d["backbone"] = [list(b) for b in self.backbone]
        g = d["grid"]
        g["upsampled_size"] = list(g["upsampled_size"])
        if g["pooled_size"] is not None:
            g["pooled_size"] = list(g["pooled_size"])
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown model config key(s): {', '.join(sorted(unknown))}")
        if "grid" in d and isinstance(d["grid"], dict):
            d["grid"] = PatchGrid(**d["grid"])
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

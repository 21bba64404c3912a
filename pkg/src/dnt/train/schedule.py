from dataclasses import dataclass

from ..errors import ConfigError


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 8
    lr0: float = 1e-3
    lr_drop_epoch: int = 100
    lr_drop_factor: float = 10.0
    seed: int = 1
    use_erase: bool = True
    checkpoint_every: int = 0
    val_fraction: float = 0.0  # per-class share of the train split held out for validation

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr0 > 0:
            raise ConfigError(f"lr0 must be positive, got {self.lr0}")
        if not self.lr_drop_factor > 1:
            raise ConfigError(f"lr_drop_factor must exceed 1, got {self.lr_drop_factor}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError(f"val_fraction must lie in [0, 1), got {self.val_fraction}")


def lr_schedule(cfg, epoch):
    """Single step decay: lr0 before ``lr_drop_epoch``, lr0 / factor from then on."""
    return cfg.lr0 if epoch < cfg.lr_drop_epoch else cfg.lr0 / cfg.lr_drop_factor

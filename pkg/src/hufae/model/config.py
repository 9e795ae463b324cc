"""Configuration records for the three autoencoder blocks and the classifier."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

from ..errors import ConfigError

AXES = ("ax", "ay", "az", "gx", "gy", "gz")


def _from_dict(cls, data):
    if data is None:
        return cls()
    if isinstance(data, cls):
        return data
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    kwargs = {k: (tuple(v) if isinstance(v, list) else v) for k, v in data.items()}
    return cls(**kwargs).validate()


@dataclass
class SensorLayout:
    """Which IMU units exist and which of them are live.

    Channel ``6 * j + a`` holds axis ``AXES[a]`` of unit ``j``.
    """

    n_units: int = 1
    unit_names: Optional[Sequence[str]] = None
    active_mask: Optional[Sequence[bool]] = None

    def __post_init__(self):
        if self.unit_names is None:
            self.unit_names = tuple(f"unit{j}" for j in range(self.n_units))
        if self.active_mask is None:
            self.active_mask = (True,) * self.n_units
        self.unit_names = tuple(self.unit_names)
        self.active_mask = tuple(bool(a) for a in self.active_mask)
        self.validate()

    def validate(self):
        if self.n_units < 1:
            raise ConfigError("layout needs at least one unit")
        if len(self.unit_names) != self.n_units or len(self.active_mask) != self.n_units:
            raise ConfigError("unit_names and active_mask must have n_units entries")
        if len(set(self.unit_names)) != self.n_units:
            raise ConfigError("unit names must be unique")
        if not any(self.active_mask):
            raise ConfigError("at least one sensor unit must be active")
        return self

    @property
    def n_channels(self):
        return 6 * self.n_units

    @property
    def axes_per_unit(self):
        return len(AXES)

    def channel_names(self):
        return [f"{u}_{a}" for u in self.unit_names for a in AXES]

    def unit_channels(self, j):
        return slice(6 * j, 6 * j + 6)

    def with_mask(self, active_mask):
        return SensorLayout(self.n_units, self.unit_names, active_mask)

    def to_dict(self):
        return {"n_units": self.n_units, "unit_names": list(self.unit_names),
                "active_mask": list(self.active_mask)}

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data)


@dataclass
class DrSaeConfig:
    channels: Sequence[int] = (16, 32, 64, 128, 256)
    kernel_size: int = 3
    activation: str = "selu"

    def __post_init__(self):
        self.channels = tuple(int(c) for c in self.channels)

    @property
    def num_encoder_convs(self):
        return len(self.channels)

    @property
    def code_channels(self):
        return self.channels[-1]

    def validate(self):
        if not self.channels or any(c < 1 for c in self.channels):
            raise ConfigError(f"invalid DR-SAE channel progression {self.channels}")
        if self.code_channels <= 1:
            raise ConfigError("DR-SAE must be overcomplete (code channels > 1)")
        if self.kernel_size < 1:
            raise ConfigError("kernel size must be positive")
        return self

    def to_dict(self):
        d = asdict(self)
        d["channels"] = list(self.channels)
        return d

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data)


@dataclass
class FusionAeConfig:
    """Four encoder convs; pools after convs 1 and 2; batchnorm after conv 3."""

    channels: Sequence[int] = (512, 384, 320, 256)
    kernel_size: int = 3
    pool_sizes: Sequence[int] = (4, 3)
    pool_stride: int = 2
    activation: str = "selu"

    def __post_init__(self):
        self.channels = tuple(int(c) for c in self.channels)
        self.pool_sizes = tuple(int(p) for p in self.pool_sizes)

    @property
    def code_channels(self):
        return self.channels[-1]

    def validate(self):
        if len(self.channels) != 4 or any(c < 1 for c in self.channels):
            raise ConfigError("fusion autoencoder needs exactly four positive channel counts")
        if len(self.pool_sizes) != 2 or any(p < 1 for p in self.pool_sizes):
            raise ConfigError("fusion autoencoder needs two pool sizes")
        if self.pool_stride < 1 or self.kernel_size < 1:
            raise ConfigError("pool stride and kernel size must be positive")
        return self

    def to_dict(self):
        d = asdict(self)
        d["channels"], d["pool_sizes"] = list(self.channels), list(self.pool_sizes)
        return d

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data)


def lff_default():
    return FusionAeConfig(channels=(512, 384, 320, 256))


def gff_default():
    return FusionAeConfig(channels=(512, 256, 128, 64))


@dataclass
class TrainConfig:
    """Stopping rule and optimizer settings for one autoencoder block.

    A run stops once the mean epoch loss is below ``loss_threshold`` and at
    least ``min_epochs`` epochs have passed, or at ``max_epochs``.
    ``max_windows`` caps how many training examples are drawn (None = all).
    """

    loss_threshold: float = 0.005
    min_epochs: int = 5
    max_epochs: int = 500
    batch_size: int = 16
    lr: float = 1e-3
    algorithm: str = "adam"
    max_windows: Optional[int] = None

    def validate(self):
        if self.min_epochs < 0 or self.max_epochs < 1 or self.max_epochs < self.min_epochs:
            raise ConfigError("need 0 <= min_epochs <= max_epochs and max_epochs >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch size must be positive")
        if not self.lr > 0:
            raise ConfigError("learning rate must be positive")
        if self.max_windows is not None and self.max_windows < 1:
            raise ConfigError("max_windows must be positive")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data)


@dataclass
class ClassifierConfig:
    hidden: Sequence[int] = (512, 256)
    epochs: int = 60
    batch_size: int = 32
    lr: float = 1e-3
    standardize: bool = True

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)

    def validate(self):
        if any(h < 1 for h in self.hidden):
            raise ConfigError("hidden widths must be positive")
        if self.epochs < 1 or self.batch_size < 1 or not self.lr > 0:
            raise ConfigError("invalid classifier training settings")
        return self

    def to_dict(self):
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, data):
        return _from_dict(cls, data)


@dataclass
class HufConfig:
    """Architecture and training settings for the whole feature extractor."""

    dr_sae: DrSaeConfig = field(default_factory=DrSaeConfig)
    lff: FusionAeConfig = field(default_factory=lff_default)
    gff: FusionAeConfig = field(default_factory=gff_default)
    dr_train: TrainConfig = field(default_factory=TrainConfig)
    lff_train: TrainConfig = field(default_factory=TrainConfig)
    gff_train: TrainConfig = field(default_factory=TrainConfig)
    share_axis_weights: bool = False

    def validate(self):
        for part in (self.dr_sae, self.lff, self.gff, self.dr_train, self.lff_train,
                     self.gff_train):
            part.validate()
        return self

    def to_dict(self):
        return {
            "dr_sae": self.dr_sae.to_dict(), "lff": self.lff.to_dict(),
            "gff": self.gff.to_dict(), "dr_train": self.dr_train.to_dict(),
            "lff_train": self.lff_train.to_dict(), "gff_train": self.gff_train.to_dict(),
            "share_axis_weights": self.share_axis_weights,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data or {})
        parsers = {"dr_sae": DrSaeConfig, "lff": FusionAeConfig, "gff": FusionAeConfig,
                   "dr_train": TrainConfig, "lff_train": TrainConfig,
                   "gff_train": TrainConfig}
        unknown = set(data) - set(parsers) - {"share_axis_weights"}
        if unknown:
            raise ConfigError(f"unknown keys for HufConfig: {sorted(unknown)}")
        base = cls()
        kwargs = {"share_axis_weights": bool(data.get("share_axis_weights", False))}
        for key, typ in parsers.items():
            if key in data:
                _from_dict(typ, data[key])  # reject unknown keys before merging
                merged = {**getattr(base, key).to_dict(), **data[key]}
                kwargs[key] = _from_dict(typ, merged)
            else:
                kwargs[key] = getattr(base, key)
        return cls(**kwargs).validate()


def desk_config():
    """Reduced widths and budgets that train the synthetic corpus on one CPU core.

    Architecture shape (depths, pools, kernel sizes) is unchanged; only channel
    counts, sampled training windows and the fusion epoch caps shrink.
    """
    return HufConfig(
        dr_sae=DrSaeConfig(channels=(4, 8, 16)),
        lff=FusionAeConfig(channels=(48, 40, 32, 32)),
        gff=FusionAeConfig(channels=(48, 32, 32, 16)),
        dr_train=TrainConfig(lr=3e-3, max_windows=128, max_epochs=500),
        lff_train=TrainConfig(lr=3e-3, max_windows=128, max_epochs=30),
        gff_train=TrainConfig(lr=3e-3, max_windows=128, max_epochs=30),
        share_axis_weights=True,
    )


def desk_classifier_config():
    return ClassifierConfig(hidden=(512, 256), epochs=30)

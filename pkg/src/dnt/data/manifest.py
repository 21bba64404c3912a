"""Dataset manifests: label-mapped image lists with a seeded per-class train/test split."""

import csv
import io
import math
import os
from dataclasses import dataclass, field

from ..errors import ManifestError
from .rng import Rng

IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm", ".png")
HEADER = ["path", "class_name", "class_index", "split"]


@dataclass(frozen=True)
class Record:
    path: str
    class_name: str
    class_index: int
    split: str


@dataclass
class DatasetManifest:
    records: list
    classes: list
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        table = {name: k for k, name in enumerate(self.classes)}
        seen = {}
        for r in self.records:
            if table.get(r.class_name) != r.class_index:
                raise ManifestError(f"{r.path}: class index {r.class_index} does not match "
                                    f"class table entry for {r.class_name!r}")
            if r.split not in ("train", "test"):
                raise ManifestError(f"{r.path}: unknown split {r.split!r}")
            if seen.setdefault(r.path, r.split) != r.split:
                raise ManifestError(f"{r.path} appears in both splits")

    @property
    def num_classes(self):
        return len(self.classes)

    def split(self, name):
        return [r for r in self.records if r.split == name]

    def resolve(self, record):
        return record.path if os.path.isabs(record.path) else os.path.join(self.base_dir, record.path)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(HEADER)
        for r in self.records:
            writer.writerow([r.path, r.class_name, r.class_index, r.split])
        return buf.getvalue()

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read(cls, path):
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != HEADER:
            raise ManifestError(f"{path}: expected header {','.join(HEADER)}")
        records, classes = [], {}
        for line, row in enumerate(rows[1:], start=2):
            if len(row) != 4:
                raise ManifestError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            try:
                rec = Record(row[0], row[1], int(row[2]), row[3])
            except ValueError:
                raise ManifestError(f"{path}:{line}: bad class index {row[2]!r}") from None
            records.append(rec)
            classes.setdefault(rec.class_index, rec.class_name)
        if sorted(classes) != list(range(len(classes))):
            raise ManifestError(f"{path}: class indices are not contiguous from 0")
        return cls(records, [classes[k] for k in range(len(classes))],
                   os.path.dirname(os.path.abspath(path)))


def split_counts(n, ratio):
    """(train, test) sizes for a class of ``n`` images; both at least 1."""
    n_train = int(math.floor(ratio * n + 1e-9))
    n_train = min(max(n_train, 1), n - 1)
    return n_train, n - n_train


def build_manifest(root_dir, split_ratio=0.6, seed=0):
    """Scan ``root/<class>/<image>`` and split every class by ``split_ratio``.

    Paths are stored relative to ``root_dir``.
    """
    if not 0 < split_ratio < 1:
        raise ManifestError(f"split ratio must lie in (0, 1), got {split_ratio}")
    class_dirs = sorted(d for d in os.listdir(root_dir) if os.path.isdir(os.path.join(root_dir, d)))
    if len(class_dirs) < 2:
        raise ManifestError(f"{root_dir}: need at least 2 class subdirectories, "
                            f"found {len(class_dirs)}")
    records = []
    for k, name in enumerate(class_dirs):
        files = sorted(f for f in os.listdir(os.path.join(root_dir, name))
                       if f.lower().endswith(IMAGE_SUFFIXES))
        if len(files) < 2:
            raise ManifestError(f"class {name!r} has {len(files)} image(s); at least 2 required")
        n_train, _ = split_counts(len(files), split_ratio)
        order = Rng.substream(seed, k).permutation(len(files))
        train = {order[j] for j in range(n_train)}
        for j, f in enumerate(files):
            records.append(Record(f"{name}/{f}", name, k, "train" if j in train else "test"))
    return DatasetManifest(records, class_dirs, os.path.abspath(root_dir))

"""Synthetic probabilistic segmenter.

Generates ground-truth masks and stacks of sampled probability maps with
controllable per-image difficulty (logit noise) and a systematic
miscalibration temperature.  Every image is generated from its own
sub-seed, so images are i.i.d. given the configuration and can be
produced in any order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._rng import LCG, sub_seed
from .dataio import Manifest, ManifestRecord, write_manifest, write_tensor
from .metrics import PROB_EPS, logistic, true_dsc
from .ranges import estimate_performance, mean_map

N_BUMPS = 8
FOREGROUND_PERCENTILE = 70.0
BASE_LOGIT = 4.0
LOW_QUALITY_TOP = 0.2
SHARED_NOISE_SCALE = 2.0


@dataclass(frozen=True)
class SimConfig:
    n_images: int = 100
    height: int = 64
    width: int = 64
    n_samples: int = 20
    seed: int = 0
    difficulty_range: tuple[float, float] = (0.5, 3.0)
    miscal_temperature: float = 1.0
    low_quality_fraction: float = 0.0

    def __post_init__(self):
        d_min, d_max = self.difficulty_range
        object.__setattr__(self, "difficulty_range", (float(d_min), float(d_max)))
        if self.n_images < 1:
            raise ValueError("n_images must be at least 1")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.height < 8 or self.width < 8:
            raise ValueError("images must be at least 8x8")
        if not (math.isfinite(d_min) and math.isfinite(d_max) and 0 <= d_min <= d_max):
            raise ValueError(f"difficulty_range must satisfy 0 <= min <= max, got {self.difficulty_range}")
        if not (math.isfinite(self.miscal_temperature) and self.miscal_temperature > 0):
            raise ValueError("miscal_temperature must be positive")
        if not 0.0 <= self.low_quality_fraction <= 1.0:
            raise ValueError("low_quality_fraction must be in [0, 1]")

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if "difficulty_range" in data:
            data["difficulty_range"] = tuple(data["difficulty_range"])
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["difficulty_range"] = list(self.difficulty_range)
        return d


def box3(field: np.ndarray) -> np.ndarray:
    """3x3 mean filter over the last two axes, edge-replicated borders."""
    pad = [(0, 0)] * (field.ndim - 2) + [(1, 1), (1, 1)]
    p = np.pad(field, pad, mode="edge")
    h, w = field.shape[-2:]
    out = np.zeros(field.shape, dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            out += p[..., dy : dy + h, dx : dx + w]
    return out / 9.0


def generate_ground_truth(height: int, width: int, rng: LCG) -> np.ndarray:
    """Binary mask from thresholded anisotropic Gaussian bumps."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    max_scale = max(3.0, width / 4.0)
    params = rng.uniform(N_BUMPS * 5).reshape(N_BUMPS, 5)
    field = np.zeros((height, width))
    for u_cy, u_cx, u_s1, u_s2, u_theta in params:
        cy, cx = u_cy * height, u_cx * width
        s1 = 3.0 + (max_scale - 3.0) * u_s1
        s2 = 3.0 + (max_scale - 3.0) * u_s2
        theta = math.pi * u_theta
        dy, dx = yy - cy, xx - cx
        a = dx * math.cos(theta) + dy * math.sin(theta)
        b = -dx * math.sin(theta) + dy * math.cos(theta)
        field += np.exp(-0.5 * ((a / s1) ** 2 + (b / s2) ** 2))
    return (field > np.percentile(field, FOREGROUND_PERCENTILE)).astype(np.uint8)


def base_logits(gt: np.ndarray) -> np.ndarray:
    """Signed logits of magnitude 4 in object interiors.

    The magnitude is scaled by the local 3x3 agreement of the mask, so
    confidence drops toward boundaries without ever changing sign.
    """
    s = 2.0 * np.asarray(gt, dtype=np.float64) - 1.0
    return BASE_LOGIT * s * (1.0 + np.abs(box3(s))) / 2.0


def generate_stack(gt, difficulty: float, temperature: float, n_samples: int, rng: LCG) -> np.ndarray:
    """Sample ``n_samples`` probability maps around ``gt``.

    Each sample's logits are the base logits plus two 3x3-smoothed Gaussian
    noise fields: one of std ``2 * difficulty`` drawn once per image and
    shared by all samples (errors the averaged segmentation inherits), and
    one of std ``difficulty`` drawn per sample (the spread between samples).  Logits are divided by
    ``temperature`` before the logistic.
    """
    gt = np.asarray(gt)
    if difficulty < 0 or temperature <= 0 or n_samples < 2:
        raise ValueError("need difficulty >= 0, temperature > 0 and n_samples >= 2")
    h, w = gt.shape
    logits = base_logits(gt)
    if difficulty > 0:
        shared = box3(rng.normal(h * w, scale=SHARED_NOISE_SCALE * difficulty).reshape(h, w))
        own = box3(rng.normal(n_samples * h * w, scale=difficulty).reshape(n_samples, h, w))
        logits = logits + shared + own
    logits = np.broadcast_to(logits, (n_samples, h, w))
    if temperature != 1.0:
        logits = logits / temperature
    return np.clip(logistic(logits), PROB_EPS, 1 - PROB_EPS).astype(np.float32)


@dataclass(frozen=True)
class SimImage:
    image_id: str
    gt: np.ndarray
    stack: np.ndarray
    difficulty: float
    quality_label: str


def low_quality_indices(config: SimConfig) -> frozenset[int]:
    n_low = int(math.floor(config.low_quality_fraction * config.n_images + 0.5))
    order = LCG(config.seed).shuffle(list(range(config.n_images)))
    return frozenset(order[:n_low])


def image_id(index: int) -> str:
    return f"img{index:05d}"


def simulate_image(config: SimConfig, index: int, low_quality: bool = False) -> SimImage:
    """Generate image ``index`` of the dataset described by ``config``.

    Depends only on ``(config, index, low_quality)``, so images can be
    produced in parallel or out of order.
    """
    rng = LCG(sub_seed(config.seed, index))
    d_min, d_max = config.difficulty_range
    if low_quality:
        d_min = d_max - LOW_QUALITY_TOP * (d_max - d_min)
    difficulty = d_min + (d_max - d_min) * rng.random()
    gt = generate_ground_truth(config.height, config.width, rng)
    stack = generate_stack(gt, difficulty, config.miscal_temperature, config.n_samples, rng)
    return SimImage(image_id(index), gt, stack, difficulty, "low" if low_quality else "high")


def iter_images(config: SimConfig):
    low = low_quality_indices(config)
    for i in range(config.n_images):
        yield simulate_image(config, i, i in low)


def simulate_dataset(config: SimConfig, out_dir) -> Manifest:
    """Write every image's stack and mask plus ``manifest.csv`` to ``out_dir``.

    Tensors go to ``out_dir/data``; the split column is left unassigned.
    """
    out_dir = Path(out_dir)
    (out_dir / "data").mkdir(parents=True, exist_ok=True)
    records = []
    for img in iter_images(config):
        stack_rel = f"data/{img.image_id}_stack.cprp"
        gt_rel = f"data/{img.image_id}_gt.cprp"
        write_tensor(out_dir / stack_rel, img.stack)
        write_tensor(out_dir / gt_rel, img.gt)
        records.append(ManifestRecord(img.image_id, stack_rel, gt_rel, img.quality_label))
    manifest = Manifest(records, root=out_dir)
    write_manifest(manifest, out_dir / "manifest.csv")
    with open(out_dir / "sim_config.json", "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
    return manifest


def simulate_estimates(config: SimConfig) -> dict[str, np.ndarray]:
    """In-memory version of the pipeline front half.

    Returns arrays ``y_true`` (DSC of the thresholded mean map), ``y_hat``,
    ``sigma`` and ``quality`` for every image, without touching disk.
    """
    y_true, y_hat, sigma, quality = [], [], [], []
    for img in iter_images(config):
        est = estimate_performance(img.stack)
        y_true.append(true_dsc(mean_map(img.stack) > 0.5, img.gt))
        y_hat.append(est.y_hat)
        sigma.append(est.sigma)
        quality.append(img.quality_label)
    return {
        "y_true": np.array(y_true),
        "y_hat": np.array(y_hat),
        "sigma": np.array(sigma),
        "quality": np.array(quality),
    }

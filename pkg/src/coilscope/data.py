"""Dataset construction: synthetic generation, manifests, photo ingestion.

A dataset is a directory of binary PGM images plus a JSON-lines manifest;
each line is {image, coil_id, freq_hz, L_h, Q, provenance?} with image
paths relative to the manifest's directory. The synthetic generator
samples coil geometries, renders each coil once, and labels every
(coil, frequency) pair with the physics oracles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pgm
from .physics import CoilGeometry, oracle_inductance, oracle_quality
from .render import rasterize

DEFAULT_NUM_COILS = 20
DEFAULT_FREQS_HZ = (85e3, 200e3, 1e6, 6.78e6, 13.56e6)

# constructive label bounds; a sample outside these is a generator bug
L_BOUNDS_H = (1e-8, 1e-4)
Q_BOUNDS = (1.0, 2000.0)

_MM = 1e-3


@dataclass
class Sample:
    """One training/eval record."""

    image: np.ndarray  # [1,64,64] in [0,1]
    freq_hz: float
    l_label_h: float
    q_label: float
    coil_id: str

    def __post_init__(self):
        self.image = np.asarray(self.image, dtype=np.float64)
        if self.image.shape != (1, 64, 64):
            raise ValueError(f"sample image must be [1,64,64], got {self.image.shape}")
        if self.image.min() < 0.0 or self.image.max() > 1.0:
            raise ValueError("sample pixel values must lie in [0,1]")
        if not (self.freq_hz > 0.0 and self.l_label_h > 0.0 and self.q_label > 0.0):
            raise ValueError(
                f"freq/L/Q must be positive, got {self.freq_hz}, "
                f"{self.l_label_h}, {self.q_label}")


@dataclass
class ManifestRecord:
    image: str
    coil_id: str
    freq_hz: float
    l_h: float
    q: float
    provenance: dict | None = None

    def to_json(self) -> str:
        obj = {"image": self.image, "coil_id": self.coil_id,
               "freq_hz": self.freq_hz, "L_h": self.l_h, "Q": self.q}
        if self.provenance is not None:
            obj["provenance"] = self.provenance
        return json.dumps(obj)


@dataclass
class DatasetManifest:
    records: list[ManifestRecord] = field(default_factory=list)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.records:
                fh.write(rec.to_json() + "\n")

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        records = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                records.append(ManifestRecord(
                    image=obj["image"], coil_id=obj["coil_id"],
                    freq_hz=obj["freq_hz"], l_h=obj["L_h"], q=obj["Q"],
                    provenance=obj.get("provenance")))
        return cls(records)


def _sample_geometry(rng: np.random.Generator) -> CoilGeometry:
    shape = "circular" if rng.random() < 0.5 else "square"
    d_out = rng.uniform(10.0, 60.0) * _MM
    # keep the annulus wide enough that `turns` loops of >= 0.1 mm wire fit
    n_max = min(12, int(750.0 * d_out))
    turns = int(rng.integers(1, n_max + 1))
    d_in_hi = min(0.7 * d_out, d_out - 4.0 * turns * 0.1 * _MM)
    d_in = rng.uniform(0.2 * d_out, d_in_hi)
    r_max = min(1.5 * _MM, (d_out - d_in) / (4.0 * turns))
    wire_r = rng.uniform(0.1 * _MM, r_max)
    has_core = rng.random() < 0.5
    mu_eff = rng.uniform(2.0, 5.0) if has_core else 1.0
    return CoilGeometry(shape=shape, turns=turns, outer_diameter_m=d_out,
                        inner_diameter_m=d_in, wire_radius_m=wire_r,
                        has_core=has_core, core_mu_eff=mu_eff)


def sample_geometry(rng: np.random.Generator, freqs_hz,
                    max_attempts: int = 10_000) -> CoilGeometry:
    """Draw a geometry whose labels fall inside the documented bounds.

    Rejection-samples until L and every Q(f) are in range; extreme corners
    of the raw parameter box (e.g. large high-frequency coils with Q in the
    thousands) are discarded.
    """
    for _ in range(max_attempts):
        g = _sample_geometry(rng)
        l_h = oracle_inductance(g)
        if not L_BOUNDS_H[0] <= l_h <= L_BOUNDS_H[1]:
            continue
        if all(Q_BOUNDS[0] <= oracle_quality(g, f) <= Q_BOUNDS[1] for f in freqs_hz):
            return g
    raise RuntimeError(f"no admissible geometry found in {max_attempts} attempts")


def _geometry_provenance(g: CoilGeometry, seed: int, coil_index: int) -> dict:
    return {"seed": seed, "coil_index": coil_index, "shape": g.shape,
            "turns": g.turns, "outer_diameter_m": g.outer_diameter_m,
            "inner_diameter_m": g.inner_diameter_m,
            "wire_radius_m": g.wire_radius_m, "has_core": g.has_core,
            "core_mu_eff": g.core_mu_eff, "resistivity": g.resistivity}


def generate_dataset(num_coils: int = DEFAULT_NUM_COILS,
                     freqs_hz=DEFAULT_FREQS_HZ,
                     seed: int = 0) -> tuple[list[Sample], DatasetManifest, list[np.ndarray]]:
    """Generate num_coils x len(freqs_hz) labelled samples.

    Per-coil RNGs are derived from (seed, coil_index), so output is
    independent of generation order. Images are quantized to the 8-bit
    grid so in-memory samples match their PGM files exactly.
    Returns (samples, manifest, images) with one image per coil.
    """
    if num_coils < 1:
        raise ValueError(f"num_coils must be >= 1, got {num_coils}")
    freqs_hz = list(freqs_hz)
    if not freqs_hz:
        raise ValueError("at least one frequency is required")
    samples: list[Sample] = []
    manifest = DatasetManifest()
    images: list[np.ndarray] = []
    for i in range(num_coils):
        rng = np.random.default_rng([seed, i])
        g = sample_geometry(rng, freqs_hz)
        render_seed = int(rng.integers(0, 2**31))
        img = rasterize(g, render_seed)
        img = np.rint(img * 255.0) / 255.0  # 8-bit grid, PGM-exact
        images.append(img)
        coil_id = f"coil{i:04d}"
        l_h = oracle_inductance(g)
        prov = _geometry_provenance(g, seed, i)
        prov["render_seed"] = render_seed
        for f in freqs_hz:
            q = oracle_quality(g, f)
            samples.append(Sample(image=img, freq_hz=f, l_label_h=l_h,
                                  q_label=q, coil_id=coil_id))
            manifest.records.append(ManifestRecord(
                image=f"images/{coil_id}.pgm", coil_id=coil_id, freq_hz=f,
                l_h=l_h, q=q, provenance=prov))
    return samples, manifest, images


def write_dataset(out_dir, samples: list[Sample], manifest: DatasetManifest,
                  images: list[np.ndarray]) -> Path:
    """Write PGM images and the manifest under out_dir; returns manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    seen = set()
    for rec, img in zip(_unique_by_image(manifest.records), images):
        pgm.write_pgm(out_dir / rec.image, img)
        seen.add(rec.image)
    manifest_path = out_dir / "manifest.jsonl"
    manifest.write(manifest_path)
    return manifest_path


def _unique_by_image(records):
    seen = set()
    for rec in records:
        if rec.image not in seen:
            seen.add(rec.image)
            yield rec


def load_dataset(manifest_path) -> list[Sample]:
    """Load every manifest row back into a Sample."""
    manifest_path = Path(manifest_path)
    manifest = DatasetManifest.read(manifest_path)
    base = manifest_path.parent
    cache: dict[str, np.ndarray] = {}
    samples = []
    for rec in manifest.records:
        if rec.image not in cache:
            cache[rec.image] = pgm.read_pgm(base / rec.image)
        samples.append(Sample(image=cache[rec.image], freq_hz=rec.freq_hz,
                              l_label_h=rec.l_h, q_label=rec.q,
                              coil_id=rec.coil_id))
    return samples

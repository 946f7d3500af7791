"""Seeded synthetic phantoms: dark elliptical lesions on a speckled background.

Rendering model, applied in order and finally clipped to [0, 1]:

1. constant background at ``BACKGROUND_LEVEL`` (0.6);
2. each lesion is an ellipse in normalized coordinates whose interior takes
   intensity ``background * (1 - depth)``; with ``edge_fuzz > 0`` the value
   ramps back to the background over that many pixels outside the boundary
   using a smoothstep; overlapping lesions keep the darker value;
3. multiplicative speckle ``1 + strength * (u - 0.5)`` with u uniform from a
   generator seeded by ``rng_seed``;
4. an optional vertical shadow band multiplies its columns by an attenuation.

The ground-truth mask is the exact analytic ellipse interior (the pre-fuzz
boundary), so every mask pixel is checkable against the ellipse inequality.
Identical specs (including the seed) produce bit-identical outputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import BinaryMask, GrayImage

__all__ = [
    "BACKGROUND_LEVEL",
    "TumorSpec",
    "ShadowSpec",
    "PhantomSpec",
    "generate_phantom",
    "phantom_spec_from_json",
    "phantom_spec_to_json",
    "suite_specs",
]

BACKGROUND_LEVEL = 0.6


@dataclass(frozen=True)
class TumorSpec:
    """One elliptical lesion; center/semi-axes in normalized [0, 1] coordinates."""

    cx: float
    cy: float
    a: float
    b: float
    depth: float
    edge_fuzz: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError("tumor center outside the unit square")
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("tumor semi-axes must be positive")
        if not 0.0 < self.depth <= 1.0:
            raise ValueError("tumor depth must lie in (0, 1]")
        if self.edge_fuzz < 0.0:
            raise ValueError("edge fuzz must be non-negative")


@dataclass(frozen=True)
class ShadowSpec:
    """Vertical attenuation band over columns [col_start, col_end)."""

    col_start: int
    col_end: int
    attenuation: float

    def __post_init__(self) -> None:
        if self.col_start < 0 or self.col_end <= self.col_start:
            raise ValueError("shadow column range is empty or negative")
        if not 0.0 < self.attenuation <= 1.0:
            raise ValueError("shadow attenuation must lie in (0, 1]")


@dataclass(frozen=True)
class PhantomSpec:
    width: int
    height: int
    tumors: tuple[TumorSpec, ...] = field(default_factory=tuple)
    speckle_strength: float = 0.0
    shadow: ShadowSpec | None = None
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("phantom dimensions must be positive")
        if self.speckle_strength < 0.0:
            raise ValueError("speckle strength must be non-negative")
        object.__setattr__(self, "tumors", tuple(self.tumors))


def _normalized_grid(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.arange(width, dtype=np.float64) / (width - 1) if width > 1 else np.zeros(width)
    ys = np.arange(height, dtype=np.float64) / (height - 1) if height > 1 else np.zeros(height)
    return np.meshgrid(xs, ys)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


def generate_phantom(spec: PhantomSpec) -> tuple[GrayImage, BinaryMask]:
    """Render a phantom image and its analytic ground-truth mask."""
    w, h = spec.width, spec.height
    xn, yn = _normalized_grid(w, h)
    img = np.full((h, w), BACKGROUND_LEVEL)
    mask = np.zeros((h, w), dtype=bool)

    for tumor in spec.tumors:
        radial = np.hypot((xn - tumor.cx) / tumor.a, (yn - tumor.cy) / tumor.b)
        inside = radial <= 1.0
        mask |= inside
        interior = BACKGROUND_LEVEL * (1.0 - tumor.depth)
        if tumor.edge_fuzz == 0.0:
            surface = np.where(inside, interior, BACKGROUND_LEVEL)
        else:
            # Pixel-scale distance beyond the boundary, measured along the
            # smaller semi-axis so the ramp width is edge_fuzz pixels there.
            axis_px = min(tumor.a * max(w - 1, 1), tumor.b * max(h - 1, 1))
            t = np.clip((radial - 1.0) * axis_px / tumor.edge_fuzz, 0.0, 1.0)
            surface = interior + (BACKGROUND_LEVEL - interior) * _smoothstep(t)
        img = np.minimum(img, surface)

    border = np.zeros((h, w), dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    if bool((mask & border).any()):
        raise ValueError("tumor touches the image border")

    if spec.speckle_strength > 0.0:
        rng = np.random.default_rng(spec.rng_seed)
        img = img * (1.0 + spec.speckle_strength * (rng.random((h, w)) - 0.5))

    if spec.shadow is not None:
        img = img.copy()
        img[:, spec.shadow.col_start : spec.shadow.col_end] *= spec.shadow.attenuation

    return GrayImage(np.clip(img, 0.0, 1.0)), BinaryMask(mask)


def phantom_spec_to_json(spec: PhantomSpec) -> str:
    doc = {
        "width": spec.width,
        "height": spec.height,
        "tumors": [
            {
                "cx": t.cx,
                "cy": t.cy,
                "a": t.a,
                "b": t.b,
                "depth": t.depth,
                "edge_fuzz": t.edge_fuzz,
            }
            for t in spec.tumors
        ],
        "speckle_strength": spec.speckle_strength,
        "shadow": None
        if spec.shadow is None
        else {
            "col_start": spec.shadow.col_start,
            "col_end": spec.shadow.col_end,
            "attenuation": spec.shadow.attenuation,
        },
        "rng_seed": spec.rng_seed,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def phantom_spec_from_json(text: str) -> PhantomSpec:
    doc = json.loads(text)
    tumors = tuple(
        TumorSpec(
            cx=t["cx"],
            cy=t["cy"],
            a=t["a"],
            b=t["b"],
            depth=t["depth"],
            edge_fuzz=t.get("edge_fuzz", 0.0),
        )
        for t in doc.get("tumors", [])
    )
    shadow = doc.get("shadow")
    return PhantomSpec(
        width=doc["width"],
        height=doc["height"],
        tumors=tumors,
        speckle_strength=doc.get("speckle_strength", 0.0),
        shadow=None if shadow is None else ShadowSpec(**shadow),
        rng_seed=doc.get("rng_seed", 0),
    )


def load_phantom_spec(path: str | Path) -> PhantomSpec:
    return phantom_spec_from_json(Path(path).read_text())


def suite_specs(
    n_tumor: int = 20,
    n_plain: int = 20,
    size: int = 96,
    speckle: float = 0.1,
    seed: int = 20260808,
) -> list[tuple[str, PhantomSpec]]:
    """Deterministic desk-scale benchmark suite of (name, spec) pairs.

    Tumor phantoms carry one lesion with depth >= 0.5 and normalized radius
    >= 0.08; plain phantoms have no lesion. Per-phantom render seeds are
    drawn from one generator seeded by ``seed`` so the whole suite is
    reproducible from a single number.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[str, PhantomSpec]] = []
    for k in range(n_tumor):
        a = float(rng.uniform(0.12, 0.2))
        b = float(a * rng.uniform(0.8, 1.2))
        reach = max(a, b)
        cx = float(rng.uniform(0.3 + reach, 0.7 - reach)) if 0.3 + reach < 0.7 - reach else 0.5
        cy = float(rng.uniform(0.3 + reach, 0.7 - reach)) if 0.3 + reach < 0.7 - reach else 0.5
        tumor = TumorSpec(
            cx=cx,
            cy=cy,
            a=a,
            b=b,
            depth=float(rng.uniform(0.6, 0.9)),
            edge_fuzz=float(rng.integers(0, 3)),
        )
        spec = PhantomSpec(
            width=size,
            height=size,
            tumors=(tumor,),
            speckle_strength=speckle,
            rng_seed=int(rng.integers(0, 2**63 - 1)),
        )
        out.append((f"tumor_{k:02d}", spec))
    for k in range(n_plain):
        spec = PhantomSpec(
            width=size,
            height=size,
            tumors=(),
            speckle_strength=speckle,
            rng_seed=int(rng.integers(0, 2**63 - 1)),
        )
        out.append((f"plain_{k:02d}", spec))
    return out

"""Image ingestion, masks, overlays, and synthetic phantom generation.

Intensities are stored as float64 in [0, 1] (raw 8-bit values divided by
255 at ingestion). Phantoms are two-tone shapes with known ground-truth
masks, standing in for clinical ROI patches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


class ImageFormatError(ValueError):
    """Unsupported or malformed image file."""


@dataclass(frozen=True)
class GrayImage:
    """2-D grayscale intensity grid, values in [0, 1], at least 2x2."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected 2-D pixels, got shape {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(f"image must be at least 2x2, got {arr.shape}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """2-D boolean object/background mask."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected 2-D mask, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def area(self) -> int:
        return int(self.values.sum())


PHANTOM_KINDS = ("disk", "ellipse", "star")


@dataclass(frozen=True)
class PhantomSpec:
    """Synthetic lesion phantom: a bright shape on a darker background.

    ``star`` modulates a base disk of radius ``rx`` by
    r(angle) = rx * (1 + spike_amp * |sin(spikes * angle / 2)|),
    a simple spiculated-lesion stand-in. A pixel belongs to the shape iff
    its center is inside; boundary ties count as inside.
    """

    kind: str
    width: int = 128
    height: int = 128
    cx: float = 63.5
    cy: float = 63.5
    rx: float = 24.0
    ry: float = 24.0
    spikes: int = 7
    spike_amp: float = 0.3
    fg: float = 0.8
    bg: float = 0.2
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"unknown phantom kind {self.kind!r}")
        if self.width < 2 or self.height < 2:
            raise ValueError("phantom image must be at least 2x2")
        if not (0.0 <= self.bg < self.fg <= 1.0):
            raise ValueError("need 0 <= bg < fg <= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.rx <= 0 or self.ry <= 0:
            raise ValueError("radii must be positive")
        if self.kind == "star" and (self.spikes < 1 or self.spike_amp < 0):
            raise ValueError("star needs spikes >= 1 and spike_amp >= 0")

    def extent(self) -> tuple[float, float]:
        """Maximum shape reach from the center along x and y."""
        if self.kind == "disk":
            return self.rx, self.rx
        if self.kind == "ellipse":
            return self.rx, self.ry
        r = self.rx * (1.0 + self.spike_amp)
        return r, r

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "PhantomSpec":
        return cls(**data)


def synth_phantom(spec: PhantomSpec) -> tuple[GrayImage, BinaryMask]:
    """Render a phantom and its exact noiseless ground-truth mask.

    The image is fg/bg constants plus clipped Gaussian noise, then
    quantized to the 8-bit grid so that writing and re-reading the file
    reproduces it exactly. Deterministic given ``spec.rng_seed``.
    """
    ex, ey = spec.extent()
    if (spec.cx - ex < 0 or spec.cx + ex > spec.width - 1
            or spec.cy - ey < 0 or spec.cy + ey > spec.height - 1):
        raise ValueError(
            f"{spec.kind} phantom exceeds {spec.width}x{spec.height} bounds"
        )
    yy, xx = np.mgrid[0:spec.height, 0:spec.width]
    dx = xx - spec.cx
    dy = yy - spec.cy
    if spec.kind == "disk":
        inside = dx * dx + dy * dy <= spec.rx * spec.rx
    elif spec.kind == "ellipse":
        inside = (dx / spec.rx) ** 2 + (dy / spec.ry) ** 2 <= 1.0
    else:
        theta = np.arctan2(dy, dx)
        r_theta = spec.rx * (1.0 + spec.spike_amp * np.abs(np.sin(spec.spikes * theta / 2.0)))
        inside = np.hypot(dx, dy) <= r_theta
    img = np.where(inside, spec.fg, spec.bg)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.rng_seed)
        img = np.clip(img + rng.normal(0.0, spec.noise_sigma, img.shape), 0.0, 1.0)
    img = np.round(img * 255.0) / 255.0
    return GrayImage(img), BinaryMask(inside)


def _parse_pgm(data: bytes, path: str) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"{path}: not a PGM file (magic {magic!r})")

    # Tokenize the header, honoring '#' comments up to end of line.
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PGM header")
        tokens.append(int(data[start:pos]))
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if maxval > 255:
        raise ImageFormatError(
            f"{path}: unsupported 16-bit PGM (maxval {maxval}); only 8-bit supported"
        )
    if maxval < 1:
        raise ImageFormatError(f"{path}: bad PGM maxval {maxval}")

    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        raw = data[pos:pos + width * height]
        if len(raw) < width * height:
            raise ImageFormatError(f"{path}: truncated P5 pixel data")
        values = np.frombuffer(raw, dtype=np.uint8)
    else:
        fields: list[bytes] = []
        for line in data[pos:].split(b"\n"):
            fields.extend(line.split(b"#")[0].split())
        if len(fields) < width * height:
            raise ImageFormatError(f"{path}: truncated P2 pixel data")
        values = np.array(fields[:width * height], dtype=np.int64)
        if values.min() < 0 or values.max() > maxval:
            raise ImageFormatError(f"{path}: P2 sample outside [0, {maxval}]")
        values = values.astype(np.uint8)
    return values.reshape(height, width)


def _load_png_gray(path: str) -> np.ndarray:
    with PILImage.open(path) as im:
        if im.format != "PNG":
            raise ImageFormatError(f"{path}: expected PNG, got {im.format}")
        if im.mode != "L":
            raise ImageFormatError(
                f"{path}: unsupported PNG mode {im.mode!r}; "
                "only 8-bit grayscale ('L') is supported"
            )
        return np.asarray(im, dtype=np.uint8)


def load_image(path: str | Path) -> GrayImage:
    """Load an 8-bit grayscale PGM (P2/P5) or PNG; intensities become raw/255."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P2", b"P5"):
        raw = _parse_pgm(data, str(path))
    elif data[:8] == b"\x89PNG\r\n\x1a\n":
        raw = _load_png_gray(str(path))
    else:
        raise ImageFormatError(f"{path}: unrecognized format (not PGM P2/P5 or PNG)")
    return GrayImage(raw.astype(np.float64) / 255.0)


def save_image(image: GrayImage, path: str | Path) -> None:
    """Write an 8-bit grayscale image; format chosen by suffix (.pgm or .png)."""
    path = Path(path)
    raw = np.round(image.pixels * 255.0).astype(np.uint8)
    if path.suffix.lower() == ".pgm":
        header = f"P5\n{image.width} {image.height}\n255\n".encode()
        path.write_bytes(header + raw.tobytes())
    elif path.suffix.lower() == ".png":
        PILImage.fromarray(raw, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported output suffix {path.suffix!r}; use .pgm or .png")


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write a mask as an 8-bit PNG with values 0/255."""
    raw = np.where(mask.values, 255, 0).astype(np.uint8)
    PILImage.fromarray(raw, mode="L").save(Path(path), format="PNG")


def load_mask(path: str | Path) -> BinaryMask:
    """Read a mask image; any nonzero pixel counts as object."""
    img = load_image(path)
    return BinaryMask(img.pixels > 0.0)


def mask_contour(mask: BinaryMask | np.ndarray) -> np.ndarray:
    """8-connected inner boundary: mask pixels with a neighbor that is
    outside the mask or outside the image."""
    values = mask.values if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    h, w = values.shape
    padded = np.pad(values, 1, constant_values=False)
    all_neighbors = np.ones_like(values)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            all_neighbors &= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return values & ~all_neighbors


def contour_overlay(image: GrayImage, mask: BinaryMask) -> np.ndarray:
    """RGB rendering of the image with the mask contour painted green."""
    if (image.height, image.width) != (mask.height, mask.width):
        raise ValueError(
            f"image {image.width}x{image.height} and mask "
            f"{mask.width}x{mask.height} dimensions differ"
        )
    gray = np.round(image.pixels * 255.0).astype(np.uint8)
    rgb = np.stack([gray, gray, gray], axis=-1)
    contour = mask_contour(mask)
    rgb[contour] = (0, 255, 0)
    return rgb


def save_overlay(overlay: np.ndarray, path: str | Path) -> None:
    PILImage.fromarray(overlay, mode="RGB").save(Path(path), format="PNG")


def load_phantom_specs(path: str | Path) -> list[PhantomSpec]:
    """Read one spec or a list of specs from a JSON file."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [PhantomSpec.from_json(d) for d in data]


def sample_phantom_spec(
    kind: str,
    rng_seed: int,
    size: int = 128,
    noise_sigma: float = 0.03,
) -> PhantomSpec:
    """Randomized spec from the standard phantom family: a bright mass of
    roughly half the patch width, jittered a few pixels off center.
    Ellipses and disks stand in for smooth (benign-looking) masses, stars
    for spiculated (malignant-looking) ones."""
    rng = np.random.default_rng(rng_seed)
    scale = size / 128.0
    center = (size - 1) / 2.0
    cx = center + float(rng.integers(-6, 7)) * scale
    cy = center + float(rng.integers(-6, 7)) * scale
    fg = float(rng.uniform(0.75, 0.85))
    bg = float(rng.uniform(0.15, 0.25))
    common = dict(width=size, height=size, cx=cx, cy=cy, fg=fg, bg=bg,
                  noise_sigma=noise_sigma, rng_seed=rng_seed)
    if kind == "disk":
        r = float(rng.uniform(24, 30)) * scale
        return PhantomSpec(kind="disk", rx=r, ry=r, **common)
    if kind == "ellipse":
        return PhantomSpec(
            kind="ellipse",
            rx=float(rng.uniform(22, 30)) * scale,
            ry=float(rng.uniform(22, 30)) * scale,
            **common,
        )
    if kind == "star":
        return PhantomSpec(
            kind="star",
            rx=float(rng.uniform(17, 21)) * scale,
            ry=float(rng.uniform(17, 21)) * scale,
            spikes=int(rng.integers(5, 10)),
            spike_amp=float(rng.uniform(0.28, 0.42)),
            **common,
        )
    raise ValueError(f"unknown phantom kind {kind!r}")

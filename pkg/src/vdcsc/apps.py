"""Use cases driven by SC sine/cosine: image rotation and a two-link arm."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuits import DomainError, builtin_spec, canonical_variant, evaluate
from .evaluation import trial_seed


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.width < 1 or self.height < 1:
            raise ValueError("image must be non-empty")
        if self.pixels.shape != (self.height, self.width):
            raise ValueError("pixel array does not match width x height")

    @classmethod
    def from_array(cls, a) -> "GrayImage":
        a = np.asarray(a)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("expected a non-empty 2-D array")
        return cls(a.shape[1], a.shape[0], a)


def read_pgm(path) -> GrayImage:
    """Binary PGM (P5, maxval <= 255)."""
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pix = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos + 1)
    return GrayImage(w, h, pix.reshape(h, w))


def write_pgm(img: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode())
        fh.write(np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes())


def checkerboard(size: int = 128, square: int = 16) -> GrayImage:
    yy, xx = np.mgrid[0:size, 0:size]
    return GrayImage.from_array(np.where(((yy // square) + (xx // square)) % 2 == 0, 255, 0))


def marker_pattern(size: int = 128) -> GrayImage:
    """Three nested-square markers in three corners on a white field."""
    img = np.full((size, size), 255, dtype=np.uint8)
    m = size // 4
    for oy, ox in ((0, 0), (0, size - m), (size - m, 0)):
        blk = np.zeros((m, m), dtype=np.uint8)
        k = max(m // 7, 1)
        blk[k:-k, k:-k] = 255
        blk[2 * k : -2 * k, 2 * k : -2 * k] = 0
        img[oy : oy + m, ox : ox + m] = blk
    return GrayImage.from_array(img)


class SinCosProvider:
    """Source of (sin a, cos a) for a in [0, 1].

    ``SinCosProvider()`` is exact; ``SinCosProvider(variant, N)`` evaluates
    the bundled SC circuits at X = round(a * N).  LFSR circuits use the seed
    of trial ``trial`` from the sweep schedule.
    """

    def __init__(self, variant: str | None = None, N: int = 1024, trial: int = 0):
        self.variant = canonical_variant(variant) if variant else None
        self.N = N
        self.trial = trial
        if self.variant:
            self._tables = _sc_tables(self.variant, N, trial)

    @property
    def exact(self) -> bool:
        return self.variant is None

    def __repr__(self):
        return "SinCosProvider(exact)" if self.exact else f"SinCosProvider({self.variant}, N={self.N})"

    def __call__(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0) or np.any(a > 1):
            raise DomainError("angle must lie in [0, 1] rad")
        if self.exact:
            s, c = np.sin(a), np.cos(a)
        else:
            X = np.rint(a * self.N).astype(np.int64)
            s, c = self._tables[0][X], self._tables[1][X]
        if np.ndim(s) == 0:
            return float(s), float(c)
        return s, c


@functools.lru_cache(maxsize=None)
def _sc_tables(variant: str, N: int, trial: int):
    X = np.arange(N + 1)
    out = []
    for fn in ("sin", "cos"):
        spec = builtin_spec(fn, variant, N)
        if variant.endswith("lfsr"):
            spec = spec.with_seed(trial_seed(trial, N.bit_length() - 1))
        out.append(np.asarray(evaluate(spec, X), dtype=float))
    return tuple(out)


def rotate_pixels(img: GrayImage, s: float, c: float, inverse: bool = False, interp: str = "nearest"):
    """Rotate about the image centre with the matrix [[c, -s], [s, c]].

    Output pixels are filled by inverse mapping.  Returns the rotated image
    and a mask of output pixels whose source fell outside the frame.
    """
    h, w = img.height, img.width
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w]
    dx, dy = xx - cx, yy - cy
    if inverse:
        s = -s
    # source = R^-1 * dest
    sx = c * dx + s * dy + cx
    sy = -s * dx + c * dy + cy
    src = img.pixels.astype(float)
    if interp == "nearest":
        ix = np.rint(sx).astype(np.int64)
        iy = np.rint(sy).astype(np.int64)
        outside = (ix < 0) | (ix >= w) | (iy < 0) | (iy >= h)
        out = np.zeros((h, w), dtype=np.uint8)
        out[~outside] = img.pixels[iy[~outside], ix[~outside]]
    elif interp == "bilinear":
        x0 = np.floor(sx).astype(np.int64)
        y0 = np.floor(sy).astype(np.int64)
        outside = (x0 < 0) | (x0 + 1 >= w) | (y0 < 0) | (y0 + 1 >= h)
        fx, fy = sx - x0, sy - y0
        x0c, y0c = np.clip(x0, 0, w - 2), np.clip(y0, 0, h - 2)
        val = (
            src[y0c, x0c] * (1 - fx) * (1 - fy)
            + src[y0c, x0c + 1] * fx * (1 - fy)
            + src[y0c + 1, x0c] * (1 - fx) * fy
            + src[y0c + 1, x0c + 1] * fx * fy
        )
        out = np.where(outside, 0, np.clip(np.rint(val), 0, 255)).astype(np.uint8)
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    return GrayImage(w, h, out), outside


def rotate_image(img: GrayImage, alpha: float, provider: SinCosProvider, interp: str = "nearest") -> GrayImage:
    if not 0 <= alpha <= 1:
        raise DomainError("angle must lie in [0, 1] rad")
    s, c = provider(alpha)
    return rotate_pixels(img, s, c, interp=interp)[0]


def psnr(a: GrayImage, b: GrayImage) -> float:
    mse = np.mean((a.pixels.astype(float) - b.pixels.astype(float)) ** 2)
    return math.inf if mse == 0 else 10 * math.log10(255.0**2 / mse)


def angle_error(alpha: float, provider: SinCosProvider) -> float:
    """|alpha - atan2(s, c)| in degrees."""
    if not 0 < alpha <= 1:
        raise DomainError("angle must lie in (0, 1] rad")
    s, c = provider(alpha)
    return abs(alpha - math.atan2(s, c)) * 180.0 / math.pi


def alpha_grid(step: float = 0.01) -> np.ndarray:
    n = int(round(1 / step))
    return np.arange(1, n + 1) / n


def mean_angle_error(provider: SinCosProvider, alphas=None) -> float:
    alphas = alpha_grid() if alphas is None else alphas
    return float(np.mean([angle_error(float(a), provider) for a in alphas]))


def forward_kinematics(L1: float, L2: float, alpha1: float, alpha2: float, provider: SinCosProvider):
    """End point of a planar two-link arm; both angles are taken from the
    provider (alpha1 and the absolute angle alpha1 + alpha2)."""
    a12 = alpha1 + alpha2
    if not (0 <= alpha1 <= 1 and 0 <= a12 <= 1 + 1e-12):
        raise DomainError("requires 0 <= alpha1 and alpha1 + alpha2 <= 1")
    a12 = min(a12, 1.0)
    s1, c1 = provider(alpha1)
    s12, c12 = provider(a12)
    return L1 * c1 + L2 * c12, L1 * s1 + L2 * s12


def arm_grid(grid_steps: int) -> list:
    """Admissible (alpha1, alpha2) pairs: both >= 0, sum <= 1."""
    g = grid_steps
    return [(i / g, j / g) for i in range(g + 1) for j in range(g + 1 - i)]


def perr_records(L1: float, L2: float, grid_steps: int, provider: SinCosProvider, reference: SinCosProvider | None = None):
    ref = reference or SinCosProvider()
    rows = []
    for a1, a2 in arm_grid(grid_steps):
        xr, yr = forward_kinematics(L1, L2, a1, a2, ref)
        xs, ys = forward_kinematics(L1, L2, a1, a2, provider)
        rows.append((a1, a2, xr, yr, xs, ys, math.hypot(xs - xr, ys - yr)))
    return rows


def perr_sweep(
    L1: float = 0.5,
    L2: float = 0.5,
    grid_steps: int = 32,
    variant: str | None = "transc-star",
    N: int = 1024,
    provider: SinCosProvider | None = None,
    reference: SinCosProvider | None = None,
) -> float:
    """Mean Euclidean gap between provider and exact arm end points."""
    provider = provider or SinCosProvider(variant, N)
    rows = perr_records(L1, L2, grid_steps, provider, reference)
    return float(np.mean([r[-1] for r in rows]))

"""Synthetic point-cloud generators and CSV ingestion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PointCloud

KINDS = ("hypercubes", "spheres", "dollar_sign", "three_planes")


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    d: int
    D: int
    n: int
    theta: float = math.pi / 2   # intersection angle (hypercubes/planes)
    sigma: float = 0.0           # per-structure noise scale
    seed: int = 0

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.D <= self.d:
            raise ValueError("ambient dimension D must exceed d")
        if self.n < 2 * (self.d + 2):
            raise ValueError("n too small for the requested dimension")
        if not (0.0 < self.theta <= math.pi / 2):
            raise ValueError("theta must lie in (0, pi/2]")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.kind == "dollar_sign" and self.d != 1:
            raise ValueError("dollar_sign requires d=1")
        if self.kind == "three_planes" and self.d != 2:
            raise ValueError("three_planes requires d=2")


def _split(n, parts):
    """Split n into `parts` counts balanced within +-1."""
    base = n // parts
    counts = [base] * parts
    for i in range(n - base * parts):
        counts[i] += 1
    return counts


def _box_noise(rng, count, width, complement):
    """Uniform box noise of half-width `width` along an orthonormal
    complement basis with shape (count, D, c) or (D, c)."""
    c = complement.shape[-1]
    xi = rng.uniform(-width, width, size=(count, c))
    if complement.ndim == 2:
        return xi @ complement.T
    return np.einsum("pdc,pc->pd", complement, xi)


def _pad_basis(D, cols):
    """Columns of the identity for the listed ambient axes."""
    basis = np.zeros((D, len(cols)))
    for j, axis in enumerate(cols):
        basis[axis, j] = 1.0
    return basis


def _gen_hypercubes(spec, rng):
    d, D, theta = spec.d, spec.D, spec.theta
    counts = _split(spec.n, 2)
    # structure 0 spans e_1..e_d; structure 1 shares the first d-1 axes and
    # tilts the last spanning direction by theta into e_{d+1}
    span0 = _pad_basis(D, list(range(d)))
    w = np.zeros(D)
    w[d - 1] = math.cos(theta)
    w[d] = math.sin(theta)
    span1 = np.concatenate([_pad_basis(D, list(range(d - 1))), w[:, None]], axis=1)
    comp0 = _pad_basis(D, list(range(d, D)))
    u = np.zeros(D)
    u[d - 1] = -math.sin(theta)
    u[d] = math.cos(theta)
    comp1 = np.concatenate([u[:, None], _pad_basis(D, list(range(d + 1, D)))], axis=1)
    width = math.sqrt(3.0) * spec.sigma / math.sqrt(D - d)
    blocks, labels = [], []
    for label, (span, comp, cnt) in enumerate(
            [(span0, comp0, counts[0]), (span1, comp1, counts[1])]):
        local = rng.uniform(0.0, 1.0, size=(cnt, d))
        pts = local @ span.T
        if spec.sigma > 0:
            pts = pts + _box_noise(rng, cnt, width, comp)
        blocks.append(pts)
        labels.append(np.full(cnt, label))
    return np.concatenate(blocks), np.concatenate(labels)


def _gen_spheres(spec, rng):
    d, D = spec.d, spec.D
    counts = _split(spec.n, 2)
    centers = [np.zeros(D), np.zeros(D)]
    centers[1][0] = 1.0  # unit radii, centers 1 apart: (d-1)-sphere overlap
    width = math.sqrt(3.0) * spec.sigma / math.sqrt(D - d)
    pad = _pad_basis(D, list(range(d + 1, D)))
    blocks, labels = [], []
    for label, (center, cnt) in enumerate(zip(centers, counts)):
        u = rng.normal(size=(cnt, d + 1))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = np.zeros((cnt, D))
        pts[:, :d + 1] = u
        pts += center
        if spec.sigma > 0:
            radial = np.zeros((cnt, D, 1))
            radial[:, :d + 1, 0] = u
            comp = np.concatenate(
                [radial, np.broadcast_to(pad, (cnt, D, D - d - 1))], axis=2)
            pts = pts + _box_noise(rng, cnt, width, comp)
        blocks.append(pts)
        labels.append(np.full(cnt, label))
    return np.concatenate(blocks), np.concatenate(labels)


def _scurve(t):
    """Unit-speed S shape in the plane for t in [-3pi/2, 3pi/2]."""
    return np.stack([np.sin(t), np.sign(t) * (np.cos(t) - 1.0)], axis=1)


def _gen_dollar_sign(spec, rng):
    D = spec.D
    counts = _split(spec.n, 2)
    width = math.sqrt(3.0) * spec.sigma / math.sqrt(D - 1)
    pad = _pad_basis(D, list(range(2, D)))
    # S-curve
    t = rng.uniform(-1.5 * math.pi, 1.5 * math.pi, size=counts[0])
    plane = _scurve(t)
    pts0 = np.zeros((counts[0], D))
    pts0[:, :2] = plane
    if spec.sigma > 0:
        tangent = np.stack([np.cos(t), -np.sign(t) * np.sin(t)], axis=1)
        normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1)
        norm3 = np.zeros((counts[0], D, 1))
        norm3[:, :2, 0] = normal
        comp = np.concatenate(
            [norm3, np.broadcast_to(pad, (counts[0], D, D - 2))], axis=2)
        pts0 = pts0 + _box_noise(rng, counts[0], width, comp)
    # vertical stroke through the curve
    y = rng.uniform(-2.4, 2.4, size=counts[1])
    pts1 = np.zeros((counts[1], D))
    pts1[:, 1] = y
    if spec.sigma > 0:
        comp = np.concatenate([_pad_basis(D, [0]), pad], axis=1)
        pts1 = pts1 + _box_noise(rng, counts[1], width, comp)
    labels = np.concatenate([np.zeros(counts[0], int), np.ones(counts[1], int)])
    return np.concatenate([pts0, pts1]), labels


def _gen_three_planes(spec, rng):
    D = spec.D
    counts = _split(spec.n, 3)
    width = math.sqrt(3.0) * spec.sigma / math.sqrt(D - 2)
    # three unit squares sharing the e_1 axis, tilted by 0, pi/2 and pi/5
    angles = [0.0, math.pi / 2, math.pi / 5]
    blocks, labels = [], []
    for label, (phi, cnt) in enumerate(zip(angles, counts)):
        w = np.zeros(D)
        w[1] = math.cos(phi)
        w[2] = math.sin(phi)
        span = np.concatenate([_pad_basis(D, [0]), w[:, None]], axis=1)
        u = np.zeros(D)
        u[1] = -math.sin(phi)
        u[2] = math.cos(phi)
        comp = np.concatenate(
            [u[:, None], _pad_basis(D, list(range(3, D)))], axis=1)
        local = rng.uniform(0.0, 1.0, size=(cnt, 2))
        pts = local @ span.T
        if spec.sigma > 0:
            pts = pts + _box_noise(rng, cnt, width, comp)
        blocks.append(pts)
        labels.append(np.full(cnt, label))
    return np.concatenate(blocks), np.concatenate(labels)


_GENERATORS = {
    "hypercubes": _gen_hypercubes,
    "spheres": _gen_spheres,
    "dollar_sign": _gen_dollar_sign,
    "three_planes": _gen_three_planes,
}


def generate(spec):
    """Sample a labeled point cloud for the given shape specification.

    Deterministic given (spec, seed). Noise is applied along the D-d
    directions orthogonal to the local structure with half-width
    sqrt(3)*sigma/sqrt(D-d), so the total noise variance is sigma^2.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    coords, labels = _GENERATORS[spec.kind](spec, rng)
    return PointCloud(coords=coords, truth=labels)


def save_csv(path, cloud):
    """One point per row, %.17g coordinates, comma separated, no header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in cloud.coords:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def save_labels(path, labels):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def load_labels(path):
    with open(path, "r", encoding="utf-8") as fh:
        return np.array([int(line.strip()) for line in fh if line.strip()],
                        dtype=int)


def load_csv(path, labels_path=None):
    """Read a point cloud from CSV, with an optional companion label file."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ValueError(f"{path}: ragged row at line {lineno}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise ValueError(
                    f"{path}: non-numeric field at line {lineno}") from exc
    if not rows:
        raise ValueError(f"{path}: empty point file")
    coords = np.asarray(rows, dtype=float)
    truth = None
    if labels_path is not None:
        truth = load_labels(labels_path)
        if truth.shape[0] != coords.shape[0]:
            raise ValueError("label count does not match point count")
    return PointCloud(coords=coords, truth=truth)

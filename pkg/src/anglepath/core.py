"""Shared domain types and parameter resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace, fields

import numpy as np


class ParameterError(ValueError):
    """Invalid or unresolvable parameter set."""


class PipelineError(RuntimeError):
    """Fatal error in a pipeline stage; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class Params:
    """Parameters of the clustering algorithm.

    Unset fields are None and are filled in by :func:`resolve_params`.
    ``eta`` and ``m`` left as None mean "determine automatically" and are
    resolved inside the pipeline, not here.
    """

    d: int | None = None            # intrinsic dimension
    tau: float | None = None        # noise level (ambient length units)
    e: float | None = None          # minimal simplex edge length
    q: float | None = None          # edge-length distortion ratio in (0,1)
    r0: float | None = None         # volume distortion floor; 0 disables
    B: int | None = None            # annular neighbor count
    kappa: int | None = None        # denoising neighbor count
    eta: float | None = None        # denoising threshold (None = auto elbow)
    k: int | None = None            # number of scales for quantized profiles
    m: int | None = None            # cluster count (None = auto persistence)
    weight_mode: str = "one-sided"  # "one-sided" or "two-sided"
    delta: float | None = None      # numerical weight floor
    nu: float | None = None         # nontrivial-component fraction
    seed: int = 0

    def is_resolved(self):
        required = ("d", "tau", "e", "q", "r0", "B", "kappa", "k", "delta", "nu")
        return all(getattr(self, name) is not None for name in required)


@dataclass(frozen=True)
class PointCloud:
    """n points in D-dimensional ambient space, optionally labeled."""

    coords: np.ndarray               # (n, D) float
    truth: np.ndarray | None = None  # (n,) int or None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2:
            raise ValueError("coords must be a 2-d array")
        object.__setattr__(self, "coords", coords)
        if self.truth is not None:
            truth = np.asarray(self.truth, dtype=int)
            if truth.shape != (coords.shape[0],):
                raise ValueError("truth length must match point count")
            object.__setattr__(self, "truth", truth)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]


def default_q(d):
    """Default edge-distortion ratio; decreasing in d for d >= 2."""
    return 1.0 / (1.25 + 0.15 * (d - 2))


def fallback_edge_length(coords, d=1, q=None):
    """Edge scale for noiseless data, from local neighbor radii.

    Picks the smallest e such that the edge band [e, e/q] around a typical
    point is expected to hold about 2.5*ln(n) neighbors. That keeps the
    band population above the connectivity threshold of a random geometric
    graph, so the simplex chains stay connected along each structure
    instead of fragmenting at sampling gaps.
    """
    from scipy.spatial import cKDTree

    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 points to estimate an edge scale")
    if q is None:
        q = default_q(d)
    target = max(2 * (d + 1), math.ceil(2.5 * math.log(n)))
    # the band holds roughly (1 - q^d) of the e/q-ball population
    frac = 1.0 - q ** d
    kq = min(n - 1, max(64, math.ceil(4 * target / frac)))
    tree = cKDTree(coords)
    dist, _ = tree.query(coords, k=kq + 1)
    med = np.median(dist[:, 1:], axis=0)    # typical k-th neighbor radius
    if med[-1] <= 0:
        raise ParameterError("degenerate point cloud: zero neighbor radius")
    # candidate band tops are the median k-th radii; count band occupancy
    for k in range(target, kq):
        top = med[k]
        lo = q * top
        count = k + 1 - np.searchsorted(med, lo)
        if count >= target:
            return float(lo)
    return float(q * med[-1])


def resolve_params(user, n, coords=None):
    """Fill in defaults for every unset field of ``user``.

    ``eta`` and ``m`` stay None when unset (resolved downstream).
    ``coords`` is only needed for the noiseless edge-length fallback.
    Idempotent: resolving a resolved Params returns an equal Params.
    """
    if n < 1:
        raise ParameterError("point count must be positive")
    d = user.d
    if d is None or d < 1:
        raise ParameterError("intrinsic dimension d is required and must be >= 1")
    tau = user.tau if user.tau is not None else 0.0
    if tau < 0:
        raise ParameterError("tau must be >= 0")
    q = user.q if user.q is not None else default_q(d)
    if not (0.0 < q < 1.0):
        raise ParameterError("q must lie in (0, 1)")
    e = user.e
    if e is None:
        if tau > 0:
            e = math.sqrt(2.0) * tau
        elif coords is not None:
            e = fallback_edge_length(coords, d=d, q=q)
        else:
            raise ParameterError(
                "tau=0 with e unset: supply e directly or pass the point "
                "cloud so an edge scale can be estimated from neighbor "
                "distances")
    if e <= 0:
        raise ParameterError("e must be > 0")
    B = user.B if user.B is not None else 25
    if B < d:
        raise ParameterError(f"B={B} < d={d}: no simplex can form")
    kappa = user.kappa if user.kappa is not None else math.ceil(10 * math.log(n))
    if kappa < 1:
        raise ParameterError("kappa must be >= 1")
    k = user.k if user.k is not None else 100
    if k < 2:
        raise ParameterError("k must be >= 2")
    delta = user.delta if user.delta is not None else 1e-8
    if delta <= 0:
        raise ParameterError("delta must be > 0")
    r0 = user.r0 if user.r0 is not None else 0.0
    if not (0.0 <= r0 <= 1.0):
        raise ParameterError("r0 must lie in [0, 1]")
    nu = user.nu if user.nu is not None else 0.01
    if not (0.0 <= nu < 1.0):
        raise ParameterError("nu must lie in [0, 1)")
    if user.weight_mode not in ("one-sided", "two-sided"):
        raise ParameterError(f"unknown weight_mode {user.weight_mode!r}")
    if user.m is not None and user.m < 1:
        raise ParameterError("m must be >= 1")
    return replace(user, d=d, tau=tau, e=e, q=q, r0=r0, B=B, kappa=kappa,
                   k=k, delta=delta, nu=nu)


_INT_FIELDS = {"d", "B", "kappa", "k", "m", "seed"}


def params_to_config(params):
    """Serialize to the flat ``key = value`` config format; unset omitted."""
    lines = []
    for f in fields(Params):
        value = getattr(params, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def params_from_config(text):
    """Parse the flat ``key = value`` config format."""
    known = {f.name for f in fields(Params)}
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        if key == "weight_mode":
            kwargs[key] = value
        elif key in _INT_FIELDS:
            kwargs[key] = int(value)
        else:
            kwargs[key] = float(value)
    return Params(**kwargs)

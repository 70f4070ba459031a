"""Reproducible network instance generation and (de)serialization.

A network instance is a set of node positions plus four linear
channel-gain tensors, one per link family (SBS->user, user->SBS,
SBS->SBS, user->user), each drawn independently per subchannel as
distance path loss times a unit-mean exponential fading variate
(squared-magnitude Rayleigh fading).
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig

INSTANCE_SCHEMA = 1

# Floor distance: co-located nodes are evaluated at 1 m so the log stays
# finite.  Fading variates are clamped below so every gain is positive.
D_MIN_M = 1.0
FADING_FLOOR = 1e-12


class SchemaError(ValueError):
    """Raised when an instance file cannot be parsed into the expected layout."""


def pathloss_db(d: float, cfg: NetworkConfig) -> float:
    """Distance path loss pl0_db + 10*theta*log10(d), d in meters.

    Distances below ``D_MIN_M`` are clamped to it.  Negative or
    non-finite distances are rejected.
    """
    d = float(d)
    if not math.isfinite(d):
        raise ValueError(f"distance must be finite, got {d}")
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    return cfg.pl0_db + 10.0 * cfg.theta * math.log10(max(d, D_MIN_M))


@dataclass(frozen=True)
class Placement:
    """Node coordinates in meters: ``sbs_xy`` is (B, 2), ``user_xy`` is (N, 2)."""

    sbs_xy: np.ndarray
    user_xy: np.ndarray

    def to_dict(self) -> dict:
        return {"sbs_xy": self.sbs_xy.tolist(), "user_xy": self.user_xy.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(
            sbs_xy=np.asarray(d["sbs_xy"], dtype=float),
            user_xy=np.asarray(d["user_xy"], dtype=float),
        )


@dataclass(frozen=True)
class Instance:
    """One concrete network realization.

    Gain tensor shapes: ``g_bs_user`` (B, N, K), ``g_user_bs`` (N, B, K),
    ``g_bs_bs`` (B, B, K), ``g_user_user`` (N, N, K).  The diagonals of
    the last two are placeholders and must never be read: self paths are
    modeled by the SI factors, not by gains.  Arrays are frozen
    (non-writeable) after construction and safe to share between workers.
    """

    config: NetworkConfig
    placement: Placement
    g_bs_user: np.ndarray
    g_user_bs: np.ndarray
    g_bs_bs: np.ndarray
    g_user_user: np.ndarray

    def __post_init__(self):
        B, N, K = self.config.B, self.config.N, self.config.K
        shapes = {
            "g_bs_user": (B, N, K),
            "g_user_bs": (N, B, K),
            "g_bs_bs": (B, B, K),
            "g_user_user": (N, N, K),
        }
        for name, want in shapes.items():
            arr = getattr(self, name)
            if arr.shape != want:
                raise SchemaError(f"{name} has shape {arr.shape}, expected {want}")
            if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
                raise SchemaError(f"{name} must be finite and strictly positive")
            arr.flags.writeable = False

    def equals(self, other: "Instance") -> bool:
        return (
            self.config == other.config
            and np.array_equal(self.placement.sbs_xy, other.placement.sbs_xy)
            and np.array_equal(self.placement.user_xy, other.placement.user_xy)
            and np.array_equal(self.g_bs_user, other.g_bs_user)
            and np.array_equal(self.g_user_bs, other.g_user_bs)
            and np.array_equal(self.g_bs_bs, other.g_bs_bs)
            and np.array_equal(self.g_user_user, other.g_user_user)
        )


def default_sbs_layout(cfg: NetworkConfig) -> np.ndarray:
    """Deterministic SBS positions: B points on a circle around the origin.

    The circle radius is chosen so adjacent SBSs sit 2*cell_radius apart
    (for B=3 this is an equilateral triangle of side 2*cell_radius).  A
    single SBS sits at the origin.
    """
    B, R = cfg.B, cfg.cell_radius
    if B == 1:
        return np.zeros((1, 2))
    rho = R / math.sin(math.pi / B)
    ang = 2.0 * math.pi * np.arange(B) / B
    return rho * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _pairwise_gains(rng, tx_xy, rx_xy, K, cfg):
    """Gain tensor (n_tx, n_rx, K): path loss at pair distance times fading."""
    diff = tx_xy[:, None, :] - rx_xy[None, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), D_MIN_M)
    pl_db = cfg.pl0_db + 10.0 * cfg.theta * np.log10(dist)
    mean_gain = 10.0 ** (-pl_db / 10.0)
    fading = np.maximum(rng.exponential(1.0, size=dist.shape + (K,)), FADING_FLOOR)
    return mean_gain[..., None] * fading


def generate_instance(cfg: NetworkConfig, placement: Placement | None = None) -> Instance:
    """Draw one instance from ``cfg.rng_seed``; identical seeds give identical bits.

    SBSs use the deterministic layout unless an explicit placement is
    passed.  Users are placed uniformly in per-cell disks, round-robin
    over cells, so every cell hosts at least floor(N/B) users.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    if placement is None:
        sbs_xy = default_sbs_layout(cfg)
        cells = np.arange(cfg.N) % cfg.B
        radii = cfg.cell_radius * np.sqrt(rng.uniform(size=cfg.N))
        angles = rng.uniform(0.0, 2.0 * math.pi, size=cfg.N)
        user_xy = sbs_xy[cells] + radii[:, None] * np.stack(
            [np.cos(angles), np.sin(angles)], axis=1
        )
        placement = Placement(sbs_xy=sbs_xy, user_xy=user_xy)
    K = cfg.K
    g_bs_user = _pairwise_gains(rng, placement.sbs_xy, placement.user_xy, K, cfg)
    g_user_bs = _pairwise_gains(rng, placement.user_xy, placement.sbs_xy, K, cfg)
    g_bs_bs = _pairwise_gains(rng, placement.sbs_xy, placement.sbs_xy, K, cfg)
    g_user_user = _pairwise_gains(rng, placement.user_xy, placement.user_xy, K, cfg)
    return Instance(cfg, placement, g_bs_user, g_user_bs, g_bs_bs, g_user_user)


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    """Write an instance to JSON; floats keep full round-trip precision."""
    doc = {
        "schema": INSTANCE_SCHEMA,
        "config": inst.config.to_dict(),
        "placement": inst.placement.to_dict(),
        "gains": {
            "bs_user": inst.g_bs_user.tolist(),
            "user_bs": inst.g_user_bs.tolist(),
            "bs_bs": inst.g_bs_bs.tolist(),
            "user_user": inst.g_user_user.tolist(),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_instance(path: str | os.PathLike) -> Instance:
    """Read an instance written by :func:`save_instance`."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a valid instance file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != INSTANCE_SCHEMA:
        raise SchemaError(
            f"unsupported instance schema {doc.get('schema')!r}, "
            f"expected {INSTANCE_SCHEMA}"
        )
    try:
        cfg = NetworkConfig.from_dict(doc["config"])
        placement = Placement.from_dict(doc["placement"])
        gains = doc["gains"]
        return Instance(
            config=cfg,
            placement=placement,
            g_bs_user=np.asarray(gains["bs_user"], dtype=float),
            g_user_bs=np.asarray(gains["user_bs"], dtype=float),
            g_bs_bs=np.asarray(gains["bs_bs"], dtype=float),
            g_user_user=np.asarray(gains["user_user"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"malformed instance file: {exc}") from exc

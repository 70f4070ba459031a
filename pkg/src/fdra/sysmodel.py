"""Exact physical-layer evaluation: interference, SINR, rates, energy, EE.

Two evaluation modes exist everywhere a rate appears:

* ``"weighted"`` — the original mixed-integer form: each link rate is
  multiplied by its assignment variable and interference sums carry the
  assignment weights of the interfering links.
* ``"reformulated"`` — the relaxed continuous form used inside the
  solver: assignment weights are dropped from rates and interference
  (the per-link power caps force powers to zero wherever the assignment
  is zero, so nothing is lost on binary points, and dropping the
  products keeps the rate expressions concave in the powers).

All operations are pure functions of (Instance, Allocation) and safe
for concurrent read-only use.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .netgen import Instance, SchemaError

ALLOCATION_SCHEMA = 1
LN2 = float(np.log(2.0))


@dataclass
class Allocation:
    """Decision variables, each shaped (N, B, K).

    ``a`` is the (relaxed) assignment in [0, 1]; ``p`` and ``q`` are the
    downlink and uplink transmit powers in Watts.
    """

    a: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def validate(self) -> None:
        if not (self.a.shape == self.p.shape == self.q.shape):
            raise ValueError("a, p, q must share one (N, B, K) shape")
        for name, arr in (("a", self.a), ("p", self.p), ("q", self.q)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            if np.any(arr < 0):
                raise ValueError(f"{name} contains negative entries")
        if np.any(self.a > 1.0):
            raise ValueError("a exceeds 1")

    @classmethod
    def zeros(cls, shape_or_cfg) -> "Allocation":
        if hasattr(shape_or_cfg, "N"):
            c = shape_or_cfg
            shape = (c.N, c.B, c.K)
        else:
            shape = shape_or_cfg
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    def copy(self) -> "Allocation":
        return Allocation(self.a.copy(), self.p.copy(), self.q.copy())

    def save(self, path: str | os.PathLike) -> None:
        doc = {
            "schema": ALLOCATION_SCHEMA,
            "a": self.a.tolist(),
            "p": self.p.tolist(),
            "q": self.q.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Allocation":
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("schema") != ALLOCATION_SCHEMA:
            raise SchemaError(f"unsupported allocation schema {doc.get('schema')!r}")
        alloc = cls(
            np.asarray(doc["a"], dtype=float),
            np.asarray(doc["p"], dtype=float),
            np.asarray(doc["q"], dtype=float),
        )
        alloc.validate()
        return alloc


@dataclass
class LinkMetrics:
    """Everything the physical layer derives from one allocation."""

    i_dl: np.ndarray          # (N, B, K) inter-cell interference at users, W
    i_ul: np.ndarray          # (N, B, K) inter-cell interference at SBSs, W
    sinr_dl: np.ndarray       # (N, B, K)
    sinr_ul: np.ndarray       # (N, B, K)
    r_dl: np.ndarray          # (N, B, K) bps/Hz
    r_ul: np.ndarray          # (N, B, K) bps/Hz
    user_rate_dl: np.ndarray  # (N,) bps/Hz
    user_rate_ul: np.ndarray  # (N,) bps/Hz
    total_rate: float         # bps/Hz
    total_energy: float       # W
    ee: float                 # bps/Hz/W


def _zero_diag(t: np.ndarray) -> np.ndarray:
    out = t.copy()
    idx = np.arange(t.shape[0])
    out[idx, idx, :] = 0.0
    return out


def interference_tensors(inst: Instance, alloc: Allocation, weighted: bool):
    """Inter-cell interference tensors (i_dl, i_ul), each (N, B, K).

    In weighted mode the interfering powers carry their assignment
    variables; in the reformulated mode the raw powers are used.
    """
    a, p, q = alloc.a, alloc.p, alloc.q
    if weighted:
        wp, wq = a * p, a * q
    else:
        wp, wq = p, q
    h_bu = inst.g_bs_user          # (B, N, K)
    h_uu = _zero_diag(inst.g_user_user)  # (N, N, K), self row removed
    h_bb = _zero_diag(inst.g_bs_bs)      # (B, B, K)
    h_ub = inst.g_user_bs          # (N, B, K)

    cell_p = wp.sum(axis=0)        # (B, K) total weighted DL power per cell
    # DL: from every other cell, its BS's signal to every other user on k
    # plus every other user's UL leakage; own cell and the user itself are
    # excluded from the sums.
    t_bs = np.einsum("bnk,bk->nbk", h_bu, cell_p) - np.einsum("bnk,nbk->nbk", h_bu, wp)
    t_ue = np.einsum("mck,mnk->nck", wq, h_uu)
    both = t_bs + t_ue             # (N, B', K) contribution of cell b'
    i_dl = both.sum(axis=1, keepdims=True) - both
    i_dl = np.ascontiguousarray(np.swapaxes(i_dl, 1, 1))  # (N, B, K)

    # UL: all users of other cells leak into this SBS, and other SBSs'
    # DL signals arrive over the SBS-to-SBS channels.  Independent of n.
    u_bs = np.einsum("cbk,ck->bk", h_bb, cell_p)   # diag zeroed => b' != b
    v = np.einsum("mck,mbk->cbk", wq, h_ub)        # (B', B, K)
    u_ue = v.sum(axis=0) - np.einsum("bbk->bk", v) # exclude b' == b
    j = u_bs + u_ue                                # (B, K)
    i_ul = np.broadcast_to(j[None, :, :], a.shape).copy()
    return i_dl, i_ul


def interference_dl(inst: Instance, alloc: Allocation, n: int, b: int, k: int) -> float:
    """Inter-cell interference seen by user n of cell b on subchannel k (W)."""
    total = 0.0
    B, N = inst.config.B, inst.config.N
    for bp in range(B):
        if bp == b:
            continue
        for m in range(N):
            if m == n:
                continue
            total += alloc.a[m, bp, k] * (
                alloc.p[m, bp, k] * inst.g_bs_user[bp, n, k]
                + alloc.q[m, bp, k] * inst.g_user_user[m, n, k]
            )
    return total


def interference_ul(inst: Instance, alloc: Allocation, n: int, b: int, k: int) -> float:
    """Inter-cell interference seen by cell b's SBS on subchannel k (W)."""
    total = 0.0
    B, N = inst.config.B, inst.config.N
    for bp in range(B):
        if bp == b:
            continue
        for m in range(N):
            total += alloc.a[m, bp, k] * (
                alloc.p[m, bp, k] * inst.g_bs_bs[bp, b, k]
                + alloc.q[m, bp, k] * inst.g_user_bs[m, b, k]
            )
    return total


def sinr_dl(inst: Instance, alloc: Allocation, n: int, b: int, k: int) -> float:
    """Downlink SINR: own signal over residual SI + interference + noise."""
    cfg = inst.config
    den = (
        alloc.q[n, b, k] * cfg.delta_u
        + interference_dl(inst, alloc, n, b, k)
        + cfg.noise_w
    )
    return alloc.p[n, b, k] * inst.g_bs_user[b, n, k] / den


def sinr_ul(inst: Instance, alloc: Allocation, n: int, b: int, k: int) -> float:
    """Uplink SINR: own signal over residual SI + interference + noise."""
    cfg = inst.config
    den = (
        alloc.p[n, b, k] * cfg.delta_bs
        + interference_ul(inst, alloc, n, b, k)
        + cfg.noise_w
    )
    return alloc.q[n, b, k] * inst.g_user_bs[n, b, k] / den


def sinr_tensors(inst: Instance, alloc: Allocation, weighted: bool):
    cfg = inst.config
    i_dl, i_ul = interference_tensors(inst, alloc, weighted)
    own_dl = alloc.p * np.swapaxes(inst.g_bs_user, 0, 1)
    own_ul = alloc.q * inst.g_user_bs
    g_dl = own_dl / (alloc.q * cfg.delta_u + i_dl + cfg.noise_w)
    g_ul = own_ul / (alloc.p * cfg.delta_bs + i_ul + cfg.noise_w)
    return i_dl, i_ul, g_dl, g_ul


def total_energy(inst: Instance, alloc: Allocation, weighted: bool = False) -> float:
    """Total consumed power: amplifier draw plus circuit power (W).

    With ``weighted=True`` the transmit terms carry their assignment
    variables (the original mixed-integer form); both forms agree on any
    point whose powers vanish off the assignment support.
    """
    cfg = inst.config
    if weighted:
        tx = np.sum(alloc.a * (alloc.p / cfg.kappa + alloc.q / cfg.psi_amp))
    else:
        tx = np.sum(alloc.p / cfg.kappa + alloc.q / cfg.psi_amp)
    return float(tx + cfg.circuit_power_w)


def rate(inst: Instance, alloc: Allocation, mode: str = "reformulated") -> LinkMetrics:
    """Evaluate all link metrics for one allocation.

    ``mode`` selects weighted (original) or reformulated rate forms; the
    energy reported in the metrics is always the affine form.
    """
    if mode not in ("weighted", "reformulated"):
        raise ValueError(f"unknown rate mode {mode!r}")
    weighted = mode == "weighted"
    i_dl, i_ul, g_dl, g_ul = sinr_tensors(inst, alloc, weighted)
    r_dl = np.log2(1.0 + g_dl)
    r_ul = np.log2(1.0 + g_ul)
    if weighted:
        r_dl = alloc.a * r_dl
        r_ul = alloc.a * r_ul
    user_dl = r_dl.sum(axis=(1, 2))
    user_ul = r_ul.sum(axis=(1, 2))
    total = float(user_dl.sum() + user_ul.sum())
    energy = total_energy(inst, alloc, weighted=False)
    return LinkMetrics(
        i_dl=i_dl,
        i_ul=i_ul,
        sinr_dl=g_dl,
        sinr_ul=g_ul,
        r_dl=r_dl,
        r_ul=r_ul,
        user_rate_dl=user_dl,
        user_rate_ul=user_ul,
        total_rate=total,
        total_energy=energy,
        ee=total / energy,
    )


def energy_efficiency(inst: Instance, alloc: Allocation, mode: str = "reformulated") -> float:
    """Throughput over consumed power, bps/Hz/W."""
    return rate(inst, alloc, mode).ee


@dataclass
class FeasibilityReport:
    """Worst signed violation per constraint family; <= 0 means satisfied."""

    variant: str
    violations: dict = field(default_factory=dict)
    overall: bool = False
    tol: float = 1e-6
    bin_tol: float = 1e-3

    def worst(self) -> float:
        return max(self.violations.values()) if self.violations else 0.0


def _strong_assoc_violation(a: np.ndarray) -> float:
    """Single-BS association: an assignment at one BS excludes all others.

    Worst over users of max_{b,k} a[n,b,k] + max_{k'} sum_{b'!=b} a[n,b',k'].
    """
    N, B, K = a.shape
    worst = -1.0
    col_sum = a.sum(axis=1)  # (N, K) sum over BSs
    for n in range(N):
        for b in range(B):
            own = a[n, b, :].max()
            other = (col_sum[n, :] - a[n, b, :]).max()
            worst = max(worst, own + other - 1.0)
    return worst


def check_feasibility(
    inst: Instance,
    alloc: Allocation,
    eps: float | None = None,
    tol: float = 1e-6,
    variant: str = "relaxed-37",
    bin_tol: float = 1e-3,
) -> FeasibilityReport:
    """Evaluate every constraint of the selected problem variant.

    ``"original-13"`` checks the mixed-integer problem: assignment-
    weighted power budgets and rates, binariness of ``a`` within
    ``bin_tol``, and the strong one-BS-per-user exclusivity.
    ``"relaxed-37"`` checks the continuous solver form: split power
    caps, per-link gating caps, reformulated rates, the box on ``a``
    and the per-subchannel linear association limit.
    """
    cfg = inst.config
    a, p, q = alloc.a, alloc.p, alloc.q
    v: dict[str, float] = {}
    if variant == "original-13":
        m = rate(inst, alloc, mode="weighted")
        v["C1"] = float((a * p).sum(axis=(0, 2)).max() - cfg.pmax_w)
        v["C2"] = float((a * q).sum(axis=(1, 2)).max() - cfg.pmax_u_w)
        v["C3"] = float((cfg.rmin_dl - m.user_rate_dl).max())
        v["C4"] = float((cfg.rmin_ul - m.user_rate_ul).max())
        v["C5"] = float(a.sum(axis=0).max() - 1.0)
        v["C6"] = float(np.minimum(a, 1.0 - a).max())
        v["C7"] = float(_strong_assoc_violation(a))
        if eps is not None:
            v["C0"] = float(eps - m.total_rate)
    elif variant == "relaxed-37":
        m = rate(inst, alloc, mode="reformulated")
        v["C1p"] = float(p.sum(axis=(0, 2)).max() - cfg.pmax_w)
        v["C1pp"] = float((p - a * cfg.pmax_w).max())
        v["C2p"] = float(q.sum(axis=(1, 2)).max() - cfg.pmax_u_w)
        v["C2pp"] = float((q - a * cfg.pmax_u_w).max())
        v["C3"] = float((cfg.rmin_dl - m.user_rate_dl).max())
        v["C4"] = float((cfg.rmin_ul - m.user_rate_ul).max())
        v["C5"] = float(a.sum(axis=0).max() - 1.0)
        v["C6p"] = float(max((-a).max(), (a - 1.0).max()))
        v["C7"] = float(a.sum(axis=1).max() - 1.0)
        if eps is not None:
            v["C0"] = float(eps - m.total_rate)
    else:
        raise ValueError(f"unknown problem variant {variant!r}")
    ok = all(
        val <= (bin_tol if name == "C6" else tol) for name, val in v.items()
    )
    return FeasibilityReport(variant=variant, violations=v, overall=ok,
                             tol=tol, bin_tol=bin_tol)

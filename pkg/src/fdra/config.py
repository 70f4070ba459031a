"""Network and algorithm constants for the full-duplex small-cell simulator.

All radio quantities are stored in the units they are usually quoted in
(dBm for powers, dB for gains/losses) and converted to linear scale on
access.  Rates are per-Hz throughout: the subchannel bandwidth is kept in
the config but never multiplies a rate.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict, replace


class ConfigError(ValueError):
    """Raised when a NetworkConfig fails validation."""


def dbm_to_watt(x_dbm: float) -> float:
    """Convert a power from dBm to Watts: x_W = 10**((x_dBm - 30) / 10)."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    """Convert a gain/attenuation factor from dB to linear scale."""
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and algorithmic constants of one network scenario.

    Defaults follow the standard small-cell parameter set: 3 base
    stations of radius 100 m, 32 subchannels, 12 users, -120 dBm noise
    per subchannel, 32/23 dBm power caps, 4/2 bps/Hz rate floors,
    -70 dB residual self-interference, 38%/20% amplifier efficiencies,
    0.1/1.0 W circuit powers and a 1e6 binarization penalty weight.
    """

    B: int = 3                   # number of small base stations
    N: int = 12                  # number of users
    K: int = 32                  # number of subchannels
    cell_radius: float = 100.0   # m
    theta: float = 3.0           # path-loss exponent
    pl0_db: float = 38.1         # constant path-loss term at 1 m, dB
    noise_dbm: float = -120.0    # per-subchannel noise power, dBm
    pmax_dbm: float = 32.0       # SBS total transmit power cap, dBm
    pmax_u_dbm: float = 23.0     # user total transmit power cap, dBm
    rmin_dl: float = 4.0         # downlink rate floor per user, bps/Hz
    rmin_ul: float = 2.0         # uplink rate floor per user, bps/Hz
    delta_u_db: float = -70.0    # residual SI factor at the user, dB
    delta_bs_db: float = -70.0   # residual SI factor at the SBS, dB
    kappa: float = 0.38          # SBS power-amplifier efficiency
    psi_amp: float = 0.20        # user power-amplifier efficiency
    pc_u_w: float = 0.1          # user circuit power, W
    pc_bs_w: float = 1.0         # SBS circuit power, W
    lambda_pen: float = 1e6      # binarization penalty weight
    nu: float = 0.1              # throughput-fraction sweep step
    omega_hz: float = 1.0        # subchannel bandwidth (rates stay per-Hz)
    rng_seed: int = 0

    def __post_init__(self):
        if self.B < 1 or self.N < 1 or self.K < 1:
            raise ConfigError("B, N, K must all be >= 1")
        for name in ("cell_radius", "omega_hz", "pc_u_w", "pc_bs_w"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if not (0.0 < self.kappa <= 1.0) or not (0.0 < self.psi_amp <= 1.0):
            raise ConfigError("amplifier efficiencies must lie in (0, 1]")
        if not (0.0 < self.nu <= 1.0):
            raise ConfigError("nu must lie in (0, 1]")
        if self.rmin_dl < 0 or self.rmin_ul < 0:
            raise ConfigError("rate floors must be non-negative")
        if self.lambda_pen < 0:
            raise ConfigError("lambda_pen must be non-negative")
        for name in ("theta", "pl0_db", "noise_dbm", "pmax_dbm", "pmax_u_dbm",
                     "delta_u_db", "delta_bs_db"):
            v = getattr(self, name)
            if v != v or v in (float("inf"), float("-inf")):
                raise ConfigError(f"{name} must be finite")

    # Linear-scale views.
    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def pmax_w(self) -> float:
        return dbm_to_watt(self.pmax_dbm)

    @property
    def pmax_u_w(self) -> float:
        return dbm_to_watt(self.pmax_u_dbm)

    @property
    def delta_u(self) -> float:
        return db_to_linear(self.delta_u_db)

    @property
    def delta_bs(self) -> float:
        return db_to_linear(self.delta_bs_db)

    @property
    def circuit_power_w(self) -> float:
        """Power drawn with all transmitters off: N*Pc_u + B*Pc_bs."""
        return self.N * self.pc_u_w + self.B * self.pc_bs_w

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(**d)

    def with_(self, **kwargs) -> "NetworkConfig":
        """Return a copy with the given fields replaced."""
        return replace(self, **kwargs)


def desk_config(**overrides) -> NetworkConfig:
    """A small scenario solvable in seconds, for tests and experiments.

    Shrinks the network to 2 cells / 4 users / 4 subchannels of radius
    30 m and relaxes the QoS floors so that instances drawn at any seed
    are almost surely feasible.  Any field can still be overridden.
    """
    base = dict(
        B=2, N=4, K=4,
        cell_radius=30.0,
        rmin_dl=1.0, rmin_ul=0.5,
        delta_u_db=-90.0, delta_bs_db=-90.0,
    )
    base.update(overrides)
    return NetworkConfig(**base)

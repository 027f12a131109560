"""Per-link large-scale parameters.

Mean delay and RMS delay spread are the first two power-weighted moments of
the denoised PDP. The Rician K-factor comes from the moment-method estimate
over raw frequency samples. Pathloss is the mean received power of the
(windowed) frequency response corrected for the window and antenna gains;
excess pathloss is its difference from free space.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .campaign import FrequencySweep, LosClass
from .cir import PowerDelayProfile, hann_power_ratio

SPEED_OF_LIGHT = 299_792_458.0

#: dB value reported when the moment estimator cannot resolve a specular
#: component (second-moment ratio >= 1).
K_FLOOR_DB = -30.0
#: dB cap for (near-)zero-variance inputs, where the estimate diverges.
K_CAP_DB = 40.0

GAIN_POLICIES = ("both", "single", "none")


@dataclass(frozen=True)
class KFactorEstimate:
    """Moment-method K estimate.

    gamma is the population variance of the power samples over their squared
    mean; K = sqrt(1-gamma) / (1 - sqrt(1-gamma)). gamma >= 1 means no
    resolvable specular component: the estimate is flagged invalid and k_db
    reports the floor.
    """

    gamma: float
    k_linear: float
    k_db: float
    n_samples: int
    valid: bool
    capped: bool = False


@dataclass(frozen=True)
class LargeScaleParams:
    link_id: str
    tx: str
    rx: str
    los: LosClass
    distance_m: float
    rms_ds_s: float
    mean_delay_s: float
    k_db: float
    k_valid: bool
    pathloss_db: float
    free_space_pl_db: float
    excess_pl_db: float


def mean_delay(pdp: PowerDelayProfile) -> float:
    """Power-weighted mean delay in seconds."""
    if pdp.total_power <= 0:
        raise ValueError("PDP has no power")
    return float(np.sum(pdp.delays_s * pdp.powers) / pdp.total_power)


def rms_delay_spread(pdp: PowerDelayProfile) -> float:
    """Power-weighted delay standard deviation (RMS delay spread) in seconds."""
    mu = mean_delay(pdp)
    return float(np.sqrt(np.sum((pdp.delays_s - mu) ** 2 * pdp.powers) / pdp.total_power))


def k_factor_greenstein(
    sweep: FrequencySweep,
    floor_db: float = K_FLOOR_DB,
    cap_db: float = K_CAP_DB,
    min_samples: int = 100,
) -> KFactorEstimate:
    """Moment-method Rician K-factor over the frequency samples of a raw
    (unwindowed) sweep.

    The power-sample moments of a Rician variate satisfy
    gamma = (1 + 2K) / (1 + K)^2, which the closed form below inverts.
    """
    n = sweep.config.n_points
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n}")
    g = np.abs(sweep.samples) ** 2
    mean_g = float(np.mean(g))
    if mean_g == 0.0:
        raise ValueError("zero mean power")
    gamma = float(np.var(g)) / mean_g**2

    if gamma >= 1.0:
        return KFactorEstimate(gamma, 0.0, floor_db, n, valid=False)
    s = math.sqrt(1.0 - gamma)
    if s >= 1.0:  # gamma == 0: zero variance, pure specular
        return KFactorEstimate(gamma, 10.0 ** (cap_db / 10.0), cap_db, n, valid=True, capped=True)
    k_linear = s / (1.0 - s)
    k_db = 10.0 * math.log10(k_linear) if k_linear > 0 else floor_db
    if k_db >= cap_db:
        return KFactorEstimate(gamma, k_linear, cap_db, n, valid=True, capped=True)
    return KFactorEstimate(gamma, k_linear, k_db, n, valid=True)


def _gain_db(sweep: FrequencySweep, gain_policy: str) -> float:
    cfg = sweep.config
    if gain_policy == "both":
        return cfg.antenna_gain_tx_db + cfg.antenna_gain_rx_db
    if gain_policy == "single":
        return cfg.antenna_gain_tx_db
    if gain_policy == "none":
        return 0.0
    raise ValueError(f"gain_policy must be one of {GAIN_POLICIES}, got {gain_policy!r}")


def pathloss(sweep: FrequencySweep, windowed: bool, gain_policy: str = "both") -> float:
    """Pathloss in dB from the mean power of the frequency response.

    Set ``windowed`` when the sweep has been Hann-tapered: the mean power is
    then divided by sum(w^2)/N so absolute levels match the raw response.
    """
    mean_power = float(np.mean(np.abs(sweep.samples) ** 2))
    if mean_power == 0.0:
        raise ValueError("zero mean power")
    correction = hann_power_ratio(sweep.config.n_points) if windowed else 1.0
    return -10.0 * math.log10(mean_power / correction) - _gain_db(sweep, gain_policy)


def free_space_pathloss(distance_m: float, frequency_hz: float) -> float:
    """Friis free-space pathloss 20*log10(4*pi*d*f/c) in dB."""
    if distance_m <= 0:
        raise ValueError(f"distance must be > 0, got {distance_m}")
    if frequency_hz <= 0:
        raise ValueError(f"frequency must be > 0, got {frequency_hz}")
    return 20.0 * math.log10(4.0 * math.pi * distance_m * frequency_hz / SPEED_OF_LIGHT)


def excess_pathloss(pathloss_db: float, free_space_pl_db: float) -> float:
    """Measured minus free-space pathloss, dB. Negative values are legal."""
    if not (math.isfinite(pathloss_db) and math.isfinite(free_space_pl_db)):
        raise ValueError("pathloss values must be finite")
    return pathloss_db - free_space_pl_db


LSP_CSV_COLUMNS = (
    "link_id", "tx", "rx", "los", "distance_m", "rms_ds_ns", "mean_delay_ns",
    "k_db", "k_valid", "pl_db", "fspl_db", "epl_db",
)


def write_lsp_csv(records: list[LargeScaleParams], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LSP_CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.link_id, r.tx, r.rx, r.los.value,
                f"{r.distance_m:.12g}",
                f"{r.rms_ds_s * 1e9:.12g}",
                f"{r.mean_delay_s * 1e9:.12g}",
                f"{r.k_db:.12g}",
                int(r.k_valid),
                f"{r.pathloss_db:.12g}",
                f"{r.free_space_pl_db:.12g}",
                f"{r.excess_pl_db:.12g}",
            ])


def read_lsp_csv(path: str | Path) -> list[LargeScaleParams]:
    records = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(LSP_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            records.append(LargeScaleParams(
                link_id=row["link_id"],
                tx=row["tx"],
                rx=row["rx"],
                los=LosClass(row["los"]),
                distance_m=float(row["distance_m"]),
                rms_ds_s=float(row["rms_ds_ns"]) * 1e-9,
                mean_delay_s=float(row["mean_delay_ns"]) * 1e-9,
                k_db=float(row["k_db"]),
                k_valid=bool(int(row["k_valid"])),
                pathloss_db=float(row["pl_db"]),
                free_space_pl_db=float(row["fspl_db"]),
                excess_pl_db=float(row["epl_db"]),
            ))
    return records

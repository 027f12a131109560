"""3GPP TR 38.901 Indoor Factory reference statistics.

Delay spread is lognormal with a hall-geometry-driven median (independent of
carrier frequency), the LOS K-factor is N(7 dB, 8 dB), and pathloss follows
the InF-LOS / InF-SL / InF-DL models with NLOS variants floored so they never
undercut the LOS curve. All numeric coefficients live in
``data/tr38901_inf.json`` so the transcription from the standard stays
auditable; they are never hard-coded here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.special import ndtri

from .campaign import LosClass


class ValidityRangeError(ValueError):
    """Model evaluated outside its stated distance/frequency validity."""


@dataclass(frozen=True)
class HallGeometry:
    length_m: float
    width_m: float
    height_m: float

    def __post_init__(self):
        if min(self.length_m, self.width_m, self.height_m) <= 0:
            raise ValueError("hall dimensions must be > 0")

    @property
    def volume_m3(self) -> float:
        return self.length_m * self.width_m * self.height_m

    @property
    def surface_m2(self) -> float:
        l, w, h = self.length_m, self.width_m, self.height_m
        return 2.0 * (l * w + l * h + w * h)


@dataclass(frozen=True)
class LspDistribution:
    """Marginal distribution of one large-scale parameter.

    kind "lognormal_log10": value = 10**x with x ~ N(mu, sigma); mu/sigma in
    log10 units of the value (seconds for delay spread).
    kind "normal": value ~ N(mu, sigma) directly (dB for the K-factor).
    """

    kind: str
    mu: float
    sigma: float

    def __post_init__(self):
        if self.kind not in ("lognormal_log10", "normal"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    def median(self) -> float:
        return 10.0**self.mu if self.kind == "lognormal_log10" else self.mu


@dataclass(frozen=True)
class PathlossModel:
    """PL = A + B*log10(d_3D/m) + C*log10(fc/GHz), plus lognormal shadow
    fading with shadow_sigma_db. floor_variants lists models whose raw
    pathloss lower-bounds this one (NLOS never undercuts LOS)."""

    variant: str
    a_db: float
    b_dist: float
    c_freq: float
    shadow_sigma_db: float
    d_min_m: float
    d_max_m: float
    f_min_ghz: float
    f_max_ghz: float
    floor_variants: tuple[str, ...] = ()

    def __post_init__(self):
        if self.b_dist <= 0 or self.c_freq <= 0:
            raise ValueError("distance and frequency slopes must be > 0")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be >= 0")

    def shadow_distribution(self) -> LspDistribution:
        return LspDistribution("normal", 0.0, self.shadow_sigma_db)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Seed-reproducible draw from one distribution."""

    values: np.ndarray
    seed: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.values) != self.n:
            raise ValueError("values length must equal n")


@lru_cache(maxsize=1)
def _coefficients() -> dict:
    text = resources.files("chansounder").joinpath("data/tr38901_inf.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=1)
def load_inf_models() -> dict[str, PathlossModel]:
    """Bundled InF pathloss models keyed by variant name."""
    models = {}
    for row in _coefficients()["variants"]:
        v = row["validity"]
        models[row["name"]] = PathlossModel(
            variant=row["name"],
            a_db=row["A"],
            b_dist=row["B"],
            c_freq=row["C"],
            shadow_sigma_db=row["shadow_sigma_db"],
            d_min_m=v["d_min_m"],
            d_max_m=v["d_max_m"],
            f_min_ghz=v["f_min_ghz"],
            f_max_ghz=v["f_max_ghz"],
            floor_variants=tuple(row["floor"]),
        )
    return models


def inf_delay_spread_distribution(hall: HallGeometry, los: LosClass | str) -> LspDistribution:
    """Hall-geometry-driven lognormal delay-spread distribution (seconds).

    The median grows with the volume-to-surface ratio of the hall and does
    not depend on the carrier frequency.
    """
    los = LosClass(los)
    if los is LosClass.UNKNOWN:
        raise ValueError("delay-spread model requires a LOS or NLOS class")
    key = "inf_los_ds" if los is LosClass.LOS else "inf_nlos_ds"
    c = _coefficients()["lsp"][key]
    ratio = hall.volume_m3 / hall.surface_m2
    mu = math.log10(c["vs_scale"] * ratio + c["vs_offset"]) + c["log_offset"]
    return LspDistribution("lognormal_log10", mu, c["sigma_lg"])


def inf_k_distribution() -> LspDistribution:
    """InF LOS Rician K-factor distribution, N(7 dB, 8 dB)."""
    c = _coefficients()["lsp"]["inf_los_k"]
    return LspDistribution("normal", c["mu_db"], c["sigma_db"])


def _raw_pathloss(model: PathlossModel, d3d_m: float, fc_ghz: float) -> float:
    return model.a_db + model.b_dist * math.log10(d3d_m) + model.c_freq * math.log10(fc_ghz)


def inf_pathloss(
    model: PathlossModel,
    d3d_m: float,
    fc_ghz: float,
    models: dict[str, PathlossModel] | None = None,
) -> float:
    """Median pathloss in dB (no shadow fading) with the NLOS floor applied."""
    if not model.d_min_m <= d3d_m <= model.d_max_m:
        raise ValidityRangeError(
            f"{model.variant}: distance {d3d_m} m outside validity "
            f"[{model.d_min_m}, {model.d_max_m}] m"
        )
    if not model.f_min_ghz <= fc_ghz <= model.f_max_ghz:
        raise ValidityRangeError(
            f"{model.variant}: frequency {fc_ghz} GHz outside validity "
            f"[{model.f_min_ghz}, {model.f_max_ghz}] GHz"
        )
    if models is None:
        models = load_inf_models()
    pl = _raw_pathloss(model, d3d_m, fc_ghz)
    for name in model.floor_variants:
        pl = max(pl, _raw_pathloss(models[name], d3d_m, fc_ghz))
    return pl


def scenario_pathloss(
    variant: str,
    los: LosClass | str,
    d3d_m: float,
    fc_ghz: float,
    models: dict[str, PathlossModel] | None = None,
) -> float:
    """Pathloss of an InF scenario variant given the link's LOS state.

    Under LOS every variant reduces to the InF-LOS model; under NLOS the
    named variant applies (with its floor).
    """
    if models is None:
        models = load_inf_models()
    name = "InF-LOS" if LosClass(los) is LosClass.LOS else variant
    return inf_pathloss(models[name], d3d_m, fc_ghz, models)


def sample(dist: LspDistribution, n: int, seed: int) -> SampleSet:
    """Draw n reproducible values from a distribution.

    Variates are generated by inverse-CDF transform: PCG64(seed) uniforms
    mapped through the AS241 normal quantile (scipy ndtri), so the stream is
    fixed by (distribution, n, seed) alone, never by platform RNG defaults.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = np.maximum(rng.random(n), 2.0**-53)  # ndtri(0) would be -inf
    z = ndtri(u)
    if dist.kind == "normal":
        values = dist.mu + dist.sigma * z
    else:
        values = 10.0 ** (dist.mu + dist.sigma * z)
    return SampleSet(values, seed=seed, n=n)

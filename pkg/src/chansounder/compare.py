"""Empirical CDFs, per-class summary statistics, and measured-vs-model reports.

The benchmark report puts measured large-scale parameters next to the InF
reference statistics: delay spread (LOS/NLOS) against the hall-geometry
lognormal, the LOS K-factor against N(7, 8) dB, and pathloss against the
InF-SL / InF-DL curves evaluated at each link's distance. Deltas and KS
distances quantify the curve gaps; CDF point lists are emitted for external
plotting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .campaign import LosClass
from .inf_model import (
    HallGeometry,
    inf_delay_spread_distribution,
    inf_k_distribution,
    load_inf_models,
    sample,
    scenario_pathloss,
)
from .lsp import LargeScaleParams

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)

#: Section deltas compare the model's central value (distribution median;
#: for the lognormal delay spread this equals the log-domain mean) with the
#: measured sample mean/median.
DELTA_CONVENTION = "model central value (median) minus measured statistic"


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Right-continuous empirical CDF: F(x) = #{values <= x} / n."""

    sorted_values: np.ndarray
    n: int

    def evaluate(self, x):
        return np.searchsorted(self.sorted_values, x, side="right") / self.n

    def quantile(self, q: float) -> float:
        """Smallest value v with F(v) >= q."""
        if not 0.0 <= q <= 1.0:
            raise ValueError("quantile level must be in [0, 1]")
        k = max(int(np.ceil(q * self.n)) - 1, 0)
        return float(self.sorted_values[k])


def ecdf(values) -> Ecdf:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot build an ECDF from an empty sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("ECDF input must be finite")
    return Ecdf(np.sort(arr), int(arr.size))


def ks_distance(a: Ecdf, b: Ecdf) -> float:
    """Sup of |F_a - F_b| over the merged support."""
    support = np.concatenate([a.sorted_values, b.sorted_values])
    return float(np.max(np.abs(a.evaluate(support) - b.evaluate(support))))


@dataclass(frozen=True)
class SummaryStats:
    los: LosClass
    parameter: str
    mu: float
    sigma: float  # unbiased, n-1 divisor
    n: int
    units: str
    n_excluded: int = 0


# parameter name -> (accessor returning the paper's units, units, validity filter)
_PARAMETERS = {
    "rms_ds_ns": (lambda r: r.rms_ds_s * 1e9, "ns", None),
    "mean_delay_ns": (lambda r: r.mean_delay_s * 1e9, "ns", None),
    "k_db": (lambda r: r.k_db, "dB", lambda r: r.k_valid),
    "pl_db": (lambda r: r.pathloss_db, "dB", None),
    "epl_db": (lambda r: r.excess_pl_db, "dB", None),
}


def class_values(
    records: list[LargeScaleParams], los: LosClass, parameter: str
) -> tuple[np.ndarray, int]:
    """Values of one parameter for one LOS class, plus the count of records
    excluded by the parameter's validity flag. UNKNOWN links never enter
    per-class statistics."""
    accessor, _, valid = _PARAMETERS[parameter]
    in_class = [r for r in records if r.los is los]
    if valid is None:
        return np.array([accessor(r) for r in in_class]), 0
    usable = [r for r in in_class if valid(r)]
    return np.array([accessor(r) for r in usable]), len(in_class) - len(usable)


def summarize(records: list[LargeScaleParams], los: LosClass, parameter: str) -> SummaryStats:
    """Mean and standard deviation of one parameter over one LOS class."""
    if parameter not in _PARAMETERS:
        raise ValueError(f"unknown parameter {parameter!r}; choose from {sorted(_PARAMETERS)}")
    values, n_excluded = class_values(records, los, parameter)
    if len(values) < 2:
        raise ValueError(
            f"need at least 2 {los.value} links with valid {parameter}, got {len(values)}"
        )
    return SummaryStats(
        los=los,
        parameter=parameter,
        mu=float(np.mean(values)),
        sigma=float(np.std(values, ddof=1)),
        n=len(values),
        units=_PARAMETERS[parameter][1],
        n_excluded=n_excluded,
    )


@lru_cache(maxsize=1)
def reference_campaign() -> dict:
    """Bundled summary statistics of the reference measurement campaign."""
    text = resources.files("chansounder").joinpath("data/reference_campaign.json").read_text()
    return json.loads(text)


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    config: dict
    sections: dict
    summary_stats: dict
    reference: dict
    curves: dict = field(repr=False)  # section -> {"measured": Ecdf, "model": Ecdf}

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "sections": self.sections,
            "summary_stats": self.summary_stats,
            "reference": self.reference,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        return _render_markdown(self)


def _quantile_row(e: Ecdf) -> dict:
    return {f"{int(q * 100)}%": e.quantile(q) for q in QUANTILE_LEVELS}


def _section(measured: np.ndarray, model_values: np.ndarray, model_info: dict,
             units: str, n_excluded: int = 0) -> tuple[dict, dict]:
    me, mo = ecdf(measured), ecdf(model_values)
    measured_mean = float(np.mean(measured))
    central = model_info.get("median", float(np.median(model_values)))
    section = {
        "status": "ok",
        "units": units,
        "n_measured": int(len(measured)),
        "n_model": int(len(model_values)),
        "n_excluded": int(n_excluded),
        "measured": {
            "mean": measured_mean,
            "std": float(np.std(measured, ddof=1)) if len(measured) > 1 else 0.0,
            "median": me.quantile(0.5),
        },
        "model": model_info,
        "ks_distance": ks_distance(me, mo),
        "mean_delta": central - measured_mean,
        "median_delta": central - me.quantile(0.5),
        "quantiles": {"measured": _quantile_row(me), "model": _quantile_row(mo)},
    }
    return section, {"measured": me, "model": mo}


def _no_data(reason: str) -> dict:
    return {"status": "no data", "reason": reason}


def build_report(
    measured: list[LargeScaleParams],
    hall: HallGeometry,
    seed: int,
    n_samples: int = 10_000,
    fc_ghz: float = 11.0,
    config_echo: dict | None = None,
) -> ComparisonReport:
    """Assemble the measured-vs-model comparison.

    Model sample seeds are derived as seed, seed+1, seed+2 for the LOS
    delay spread, NLOS delay spread and K-factor sections; the pathloss
    curves are deterministic (median model at each link distance).
    """
    if not measured:
        raise ValueError("measured LSP table is empty")
    models = load_inf_models()

    config = dict(config_echo or {})
    config.update({
        "hall_m": [hall.length_m, hall.width_m, hall.height_m],
        "seed": seed,
        "n_samples": n_samples,
        "fc_ghz": fc_ghz,
        "delta_convention": DELTA_CONVENTION,
        "section_seeds": {"ds_los": seed, "ds_nlos": seed + 1, "k_los": seed + 2},
    })

    sections: dict = {}
    curves: dict = {}

    # Delay spread: per-class measured vs geometry-driven lognormal.
    for name, los, sub_seed in (("ds_los", LosClass.LOS, seed), ("ds_nlos", LosClass.NLOS, seed + 1)):
        values, _ = class_values(measured, los, "rms_ds_ns")
        if len(values) == 0:
            sections[name] = _no_data(f"no {los.value} links")
            continue
        dist = inf_delay_spread_distribution(hall, los)
        model_ns = sample(dist, n_samples, sub_seed).values * 1e9
        info = {
            "kind": dist.kind, "mu_lg_s": dist.mu, "sigma_lg": dist.sigma,
            "median": dist.median() * 1e9, "seed": sub_seed,
        }
        sections[name], curves[name] = _section(values, model_ns, info, "ns")

    # K-factor: LOS links with a valid estimate vs N(7, 8) dB. The InF model
    # defines K statistics for LOS only; NLOS K appears in summary_stats.
    k_values, k_excluded = class_values(measured, LosClass.LOS, "k_db")
    if len(k_values) == 0:
        sections["k_los"] = _no_data("no LOS links with a valid K estimate")
    else:
        dist = inf_k_distribution()
        model_k = sample(dist, n_samples, seed + 2).values
        info = {
            "kind": dist.kind, "mu_db": dist.mu, "sigma_db": dist.sigma,
            "median": dist.median(), "seed": seed + 2,
        }
        sections["k_los"], curves["k_los"] = _section(k_values, model_k, info, "dB",
                                                      n_excluded=k_excluded)

    # Pathloss: model evaluated at each measured link's distance, then ECDF'd.
    pl_los_values, _ = class_values(measured, LosClass.LOS, "pl_db")
    los_dist = [r.distance_m for r in measured if r.los is LosClass.LOS]
    if len(pl_los_values) == 0:
        sections["pl_los"] = _no_data("no LOS links")
    else:
        model_pl = np.array([scenario_pathloss("InF-SL", LosClass.LOS, d, fc_ghz, models)
                             for d in los_dist])
        info = {"variant": "InF-LOS", "note": "InF-SL and InF-DL coincide under LOS",
                "fc_ghz": fc_ghz, "median": float(np.median(model_pl))}
        sections["pl_los"], curves["pl_los"] = _section(pl_los_values, model_pl, info, "dB")

    pl_nlos_values, _ = class_values(measured, LosClass.NLOS, "pl_db")
    nlos_dist = [r.distance_m for r in measured if r.los is LosClass.NLOS]
    for name, variant in (("pl_nlos_inf_sl", "InF-SL"), ("pl_nlos_inf_dl", "InF-DL")):
        if len(pl_nlos_values) == 0:
            sections[name] = _no_data("no NLOS links")
            continue
        model_pl = np.array([scenario_pathloss(variant, LosClass.NLOS, d, fc_ghz, models)
                             for d in nlos_dist])
        info = {"variant": variant, "fc_ghz": fc_ghz, "median": float(np.median(model_pl)),
                "shadow_sigma_db": models[variant].shadow_sigma_db}
        sections[name], curves[name] = _section(pl_nlos_values, model_pl, info, "dB")

    summary = _summary_stats(measured)
    reference = _reference_comparison(summary)
    return ComparisonReport(config, sections, summary, reference, curves)


def _summary_stats(measured: list[LargeScaleParams]) -> dict:
    out: dict = {}
    for los in (LosClass.LOS, LosClass.NLOS):
        row: dict = {}
        for parameter in ("rms_ds_ns", "k_db", "pl_db", "epl_db"):
            try:
                s = summarize(measured, los, parameter)
            except ValueError:
                row[parameter] = _no_data("fewer than 2 valid links")
                continue
            entry = {"mean": s.mu, "std": s.sigma, "n": s.n, "units": s.units}
            if s.n_excluded:
                entry["n_excluded"] = s.n_excluded
            row[parameter] = entry
        out[los.value] = row
    out["std_divisor"] = "n-1"
    return out


def _reference_comparison(summary: dict) -> dict:
    ref = reference_campaign()
    out: dict = {"campaign": ref["campaign"], "ranges": ref["ranges"]}
    for cls_key, los in (("los", "LOS"), ("nlos", "NLOS")):
        rows = {}
        for parameter, ref_entry in ref[cls_key].items():
            row = {"reference_mean": ref_entry["mean"], "reference_std": ref_entry["std"]}
            ours = summary.get(los, {}).get(parameter, {})
            if ours.get("mean") is not None:
                row["measured_mean"] = ours["mean"]
                row["mean_delta"] = ours["mean"] - ref_entry["mean"]
            rows[parameter] = row
        out[cls_key] = rows
    return out


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join(["---"] * len(header)) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return lines


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.3f}"
    return str(x)


def _render_markdown(report: ComparisonReport) -> str:
    lines = ["# Measured vs 3GPP InF comparison", ""]
    lines += ["## Configuration", "", "```json",
              json.dumps(report.config, indent=2, sort_keys=True), "```", ""]

    lines += ["## Per-class summary statistics", ""]
    rows = []
    for los in ("LOS", "NLOS"):
        for parameter, entry in report.summary_stats[los].items():
            if entry.get("status") == "no data":
                rows.append([los, parameter, "no data", "", ""])
            else:
                rows.append([los, parameter, _fmt(entry["mean"]), _fmt(entry["std"]),
                             str(entry["n"])])
    lines += _md_table(["class", "parameter", "mean", "std (n-1)", "n"], rows)
    lines.append("")

    lines += ["## Model comparison sections", ""]
    rows = []
    for name in sorted(report.sections):
        s = report.sections[name]
        if s["status"] != "ok":
            rows.append([name, "no data", "", "", "", ""])
            continue
        rows.append([name, s["units"], _fmt(s["measured"]["mean"]),
                     _fmt(s["model"]["median"]), _fmt(s["mean_delta"]),
                     _fmt(s["ks_distance"])])
    lines += _md_table(
        ["section", "units", "measured mean", "model central", "mean delta", "KS"], rows)
    lines.append("")

    lines += ["## Reference campaign context", ""]
    rows = []
    for cls_key in ("los", "nlos"):
        for parameter, row in report.reference[cls_key].items():
            rows.append([
                cls_key.upper(), parameter, _fmt(row["reference_mean"]),
                _fmt(row.get("measured_mean", "")) if "measured_mean" in row else "-",
                _fmt(row.get("mean_delta", "")) if "mean_delta" in row else "-",
            ])
    lines += _md_table(["class", "parameter", "reference mean", "measured mean", "delta"], rows)
    lines.append("")
    return "\n".join(lines)

"""Campaign dataset model and I/O.

A campaign is a JSON manifest (node positions, LOS labels, link table) plus
one frequency-sweep CSV per link. Loading validates geometry and grid
consistency; all returned structures are immutable and safe to share.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class ManifestError(ValueError):
    """Campaign manifest is missing, malformed, or internally inconsistent."""


class SweepFormatError(ValueError):
    """Sweep file does not match the expected CSV format or grid."""


class LosClass(str, Enum):
    LOS = "LOS"
    NLOS = "NLOS"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SweepConfig:
    """Frequency-sweep grid and antenna gains for one campaign."""

    f_start_hz: float
    f_stop_hz: float
    n_points: int
    antenna_gain_tx_db: float = 3.2
    antenna_gain_rx_db: float = 3.2

    def __post_init__(self):
        if not self.f_stop_hz > self.f_start_hz:
            raise ValueError(f"f_stop_hz ({self.f_stop_hz}) must exceed f_start_hz ({self.f_start_hz})")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")

    @property
    def df_hz(self) -> float:
        return (self.f_stop_hz - self.f_start_hz) / (self.n_points - 1)

    @property
    def center_hz(self) -> float:
        return 0.5 * (self.f_start_hz + self.f_stop_hz)

    def frequencies_hz(self) -> np.ndarray:
        return self.f_start_hz + np.arange(self.n_points) * self.df_hz


#: 10-12 GHz, 2001 points (1 MHz spacing), 3.2 dB biconical antennas.
DEFAULT_SWEEP_CONFIG = SweepConfig(10e9, 12e9, 2001, 3.2, 3.2)


@dataclass(frozen=True)
class Node:
    node_id: str
    position_m: tuple[float, ...]  # (x, y) or (x, y, z)


@dataclass(frozen=True)
class Link:
    tx: str
    rx: str
    los: LosClass
    sweep_file: str


@dataclass(frozen=True)
class CampaignLayout:
    sweep_config: SweepConfig
    tx_nodes: tuple[Node, ...]
    rx_nodes: tuple[Node, ...]
    links: tuple[Link, ...]

    def __post_init__(self):
        _validate_layout(self)

    def tx_by_id(self, node_id: str) -> Node:
        for n in self.tx_nodes:
            if n.node_id == node_id:
                return n
        raise ManifestError(f"unknown tx node '{node_id}'")

    def rx_by_id(self, node_id: str) -> Node:
        for n in self.rx_nodes:
            if n.node_id == node_id:
                return n
        raise ManifestError(f"unknown rx node '{node_id}'")


@dataclass(frozen=True, eq=False)
class FrequencySweep:
    """Complex S21 samples on the configured uniform frequency grid."""

    config: SweepConfig
    samples: np.ndarray  # complex, length n_points
    link_id: str | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.config.n_points,):
            raise ValueError(
                f"sweep has {samples.shape[0] if samples.ndim == 1 else samples.shape} samples, "
                f"config expects {self.config.n_points}"
            )
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise ValueError(f"non-finite sample at index {bad}")


def _validate_layout(layout: CampaignLayout) -> None:
    seen: set[str] = set()
    for node in (*layout.tx_nodes, *layout.rx_nodes):
        if node.node_id in seen:
            raise ManifestError(f"duplicate node id '{node.node_id}'")
        seen.add(node.node_id)
        if len(node.position_m) not in (2, 3):
            raise ManifestError(f"node '{node.node_id}': position must be 2D or 3D")

    dims = {len(n.position_m) for n in (*layout.tx_nodes, *layout.rx_nodes)}
    if len(dims) > 1:
        raise ManifestError("mixed 2D and 3D node positions in one campaign")

    tx_ids = {n.node_id for n in layout.tx_nodes}
    rx_ids = {n.node_id for n in layout.rx_nodes}
    for i, link in enumerate(layout.links):
        if link.tx not in tx_ids:
            raise ManifestError(f"link {i}: unknown tx node '{link.tx}'")
        if link.rx not in rx_ids:
            raise ManifestError(f"link {i}: unknown rx node '{link.rx}'")
        d = _distance(layout.tx_by_id(link.tx).position_m, layout.rx_by_id(link.rx).position_m)
        if d <= 0.0:
            raise ManifestError(f"link {i} ({link.tx}-{link.rx}): zero link distance")


def _distance(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    return math.dist(a, b)


def link_distance(layout: CampaignLayout, tx_id: str, rx_id: str) -> float:
    """Euclidean TX-RX distance in meters (3D when heights are present)."""
    if not any(l.tx == tx_id and l.rx == rx_id for l in layout.links):
        raise ManifestError(f"unknown link '{tx_id}-{rx_id}'")
    return _distance(layout.tx_by_id(tx_id).position_m, layout.rx_by_id(rx_id).position_m)


def _node_from_json(obj: dict, where: str) -> Node:
    try:
        node_id = str(obj["id"])
        pos = [float(obj["x_m"]), float(obj["y_m"])]
    except KeyError as e:
        raise ManifestError(f"{where}: missing key {e}") from None
    if "z_m" in obj and obj["z_m"] is not None:
        pos.append(float(obj["z_m"]))
    return Node(node_id, tuple(pos))


def _node_to_json(node: Node) -> dict:
    out = {"id": node.node_id, "x_m": node.position_m[0], "y_m": node.position_m[1]}
    if len(node.position_m) == 3:
        out["z_m"] = node.position_m[2]
    return out


def load_campaign(manifest_path: str | Path) -> CampaignLayout:
    """Load and validate a campaign manifest (JSON).

    Sweep files are not read here; resolve each link's ``sweep_file``
    relative to the manifest's directory.
    """
    path = Path(manifest_path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest is not valid JSON: {e}") from None

    for key in ("sweep_config", "tx_nodes", "rx_nodes", "links"):
        if key not in raw:
            raise ManifestError(f"manifest: missing key '{key}'")
    sc = raw["sweep_config"]
    try:
        config = SweepConfig(
            f_start_hz=float(sc["f_start_hz"]),
            f_stop_hz=float(sc["f_stop_hz"]),
            n_points=int(sc["n_points"]),
            antenna_gain_tx_db=float(sc["antenna_gain_tx_db"]),
            antenna_gain_rx_db=float(sc["antenna_gain_rx_db"]),
        )
    except KeyError as e:
        raise ManifestError(f"sweep_config: missing key {e}") from None
    except ValueError as e:
        raise ManifestError(f"sweep_config: {e}") from None

    tx_nodes = tuple(_node_from_json(o, f"tx_nodes[{i}]") for i, o in enumerate(raw["tx_nodes"]))
    rx_nodes = tuple(_node_from_json(o, f"rx_nodes[{i}]") for i, o in enumerate(raw["rx_nodes"]))

    links = []
    for i, obj in enumerate(raw["links"]):
        try:
            los = LosClass(obj["los"])
        except ValueError:
            raise ManifestError(
                f"links[{i}]: los must be one of LOS/NLOS/UNKNOWN, got {obj.get('los')!r}"
            ) from None
        except KeyError as e:
            raise ManifestError(f"links[{i}]: missing key {e}") from None
        try:
            links.append(Link(str(obj["tx"]), str(obj["rx"]), los, str(obj["sweep"])))
        except KeyError as e:
            raise ManifestError(f"links[{i}]: missing key {e}") from None

    return CampaignLayout(config, tx_nodes, rx_nodes, tuple(links))


def save_campaign(layout: CampaignLayout, manifest_path: str | Path) -> None:
    """Write the manifest JSON; inverse of load_campaign."""
    doc = {
        "sweep_config": {
            "f_start_hz": layout.sweep_config.f_start_hz,
            "f_stop_hz": layout.sweep_config.f_stop_hz,
            "n_points": layout.sweep_config.n_points,
            "antenna_gain_tx_db": layout.sweep_config.antenna_gain_tx_db,
            "antenna_gain_rx_db": layout.sweep_config.antenna_gain_rx_db,
        },
        "tx_nodes": [_node_to_json(n) for n in layout.tx_nodes],
        "rx_nodes": [_node_to_json(n) for n in layout.rx_nodes],
        "links": [
            {"tx": l.tx, "rx": l.rx, "los": l.los.value, "sweep": l.sweep_file}
            for l in layout.links
        ],
    }
    Path(manifest_path).write_text(json.dumps(doc, indent=2) + "\n")


SWEEP_CSV_HEADER = "freq_hz,re,im"


def load_sweep(path: str | Path, config: SweepConfig, link_id: str | None = None) -> FrequencySweep:
    """Read one sweep CSV (header ``freq_hz,re,im``) and check it against the grid."""
    path = Path(path)
    if not path.is_file():
        raise SweepFormatError(f"sweep file not found: {path}")
    with path.open() as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != SWEEP_CSV_HEADER:
            raise SweepFormatError(f"{path}: expected header '{SWEEP_CSV_HEADER}', got '{header}'")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as e:
            raise SweepFormatError(f"{path}: unparseable row: {e}") from None

    if data.shape[0] != config.n_points or data.shape[1] != 3:
        raise SweepFormatError(
            f"{path}: expected {config.n_points} rows of 3 columns, got shape {data.shape}"
        )
    freq = data[:, 0]
    if np.any(np.diff(freq) <= 0):
        bad = int(np.flatnonzero(np.diff(freq) <= 0)[0]) + 1
        raise SweepFormatError(f"{path}: frequency column not strictly ascending at row {bad}")
    expected = config.frequencies_hz()
    rel = np.abs(freq - expected) / np.maximum(np.abs(expected), 1.0)
    if np.any(rel > 1e-6):
        bad = int(np.argmax(rel))
        raise SweepFormatError(
            f"{path}: row {bad}: frequency {freq[bad]} does not match grid value {expected[bad]}"
        )
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise SweepFormatError(f"{path}: non-finite sample at row {bad}")

    return FrequencySweep(config, data[:, 1] + 1j * data[:, 2], link_id=link_id)


def save_sweep(path: str | Path, sweep: FrequencySweep) -> None:
    """Write a sweep CSV that load_sweep accepts (full float precision)."""
    freq = sweep.config.frequencies_hz()
    with Path(path).open("w") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for f, s in zip(freq, sweep.samples):
            fh.write(f"{f:.17g},{s.real:.17g},{s.imag:.17g}\n")

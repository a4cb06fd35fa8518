"""
Scenario, frame and multipath-profile serialisation.

Scenario JSON (``schema_version`` 1)::

    {
      "schema_version": 1,
      "metadata": {"name": str, "center_frequency": Hz, "bandwidth": Hz, "duration": s},
      "nodes": [{"id": int, "label": str,
                 "position": [x, y, z] | null,
                 "mobility": {"speed": m/s, "waypoints": [[x, y, z], ...]} | null}],
      "frames": [{"timestamp_ms": int,
                  "links": [{"tx": int, "rx": int,
                             "taps": [{"index": int, "re": float, "im": float}]}]}]
    }

ChannelFrame binary record (little-endian)::

    header  : magic b"TWFR" | version u16 | timestamp_ms u32 | link_count u16   (12 bytes)
    per link: tx u16 | rx u16 | 4 x {index u16, re f32, im f32}                (44 bytes)

Unused tap slots carry index 0xFFFF and zero gain. Gains are stored as
float32, so round trips are bit-exact for float32-representable gains.
A `.frames` file is a plain concatenation of records.
"""
import csv
import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from dsp.channel import MAX_NONZERO_TAPS, ChannelFrame, TapSet
from utils.errors import ProfileFormatError, ScenarioError
from utils.export import write_json

from .approx import MultipathComponent, MultipathProfile
from .model import Mobility, Node, Scenario, ScenarioMetadata

SCHEMA_VERSION = 1
FRAME_MAGIC = b"TWFR"
FRAME_VERSION = 1
EMPTY_SLOT = 0xFFFF

_HEADER = struct.Struct("<4sHIH")
_LINK = struct.Struct("<HH")
_SLOT = struct.Struct("<Hff")


# ---------------------------------------------------------------------------
# Scenario JSON
# ---------------------------------------------------------------------------

def frame_to_dict(frame: ChannelFrame) -> Dict[str, Any]:
    return {
        "timestamp_ms": frame.timestamp_ms,
        "links": [
            {"tx": tx, "rx": rx,
             "taps": [{"index": i, "re": g.real, "im": g.imag} for i, g in taps.taps]}
            for (tx, rx), taps in frame.links.items()
        ],
    }


def frame_from_dict(data: Dict[str, Any]) -> ChannelFrame:
    links = {}
    for entry in data.get("links", []):
        taps = TapSet(tuple((int(t["index"]), complex(float(t["re"]), float(t["im"])))
                            for t in entry.get("taps", [])))
        links[(int(entry["tx"]), int(entry["rx"]))] = taps
    return ChannelFrame(int(data["timestamp_ms"]), links)


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    meta = scenario.metadata
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {"name": meta.name, "center_frequency": meta.center_frequency,
                     "bandwidth": meta.bandwidth, "duration": meta.duration},
        "nodes": [
            {"id": n.id, "label": n.label,
             "position": list(n.position) if n.position is not None else None,
             "mobility": None if n.mobility is None else {
                 "speed": n.mobility.speed,
                 "waypoints": [list(w) for w in n.mobility.waypoints]}}
            for n in scenario.nodes
        ],
        "frames": [frame_to_dict(f) for f in scenario.frames],
    }


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario must be a JSON object, got {type(data).__name__}")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported scenario schema_version {version!r} "
                            f"(expected {SCHEMA_VERSION})", schema_version=version)
    try:
        meta = data.get("metadata", {})
        nodes = []
        for n in data["nodes"]:
            mob = n.get("mobility")
            nodes.append(Node(
                id=int(n["id"]),
                label=str(n.get("label", "")),
                position=tuple(float(v) for v in n["position"]) if n.get("position") is not None else None,
                mobility=None if mob is None else Mobility(
                    float(mob["speed"]),
                    tuple(tuple(float(v) for v in w) for w in mob.get("waypoints", []))),
            ))
        frames = [frame_from_dict(f) for f in data.get("frames", [])]
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario: {e}") from e
    return Scenario(
        nodes=tuple(nodes),
        frames=tuple(frames),
        metadata=ScenarioMetadata(
            center_frequency=float(meta.get("center_frequency", ScenarioMetadata.center_frequency)),
            bandwidth=float(meta.get("bandwidth", ScenarioMetadata.bandwidth)),
            duration=float(meta.get("duration", 0.0)),
            name=str(meta.get("name", "")),
        ),
    )


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    return write_json(path, scenario_to_dict(scenario))


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ScenarioError(f"{path}: cannot read scenario ({e.strerror or e})", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON ({e})") from e
    return scenario_from_dict(data)


# ---------------------------------------------------------------------------
# ChannelFrame binary
# ---------------------------------------------------------------------------

def encode_frame(frame: ChannelFrame) -> bytes:
    parts = [_HEADER.pack(FRAME_MAGIC, FRAME_VERSION, frame.timestamp_ms, len(frame.links))]
    for (tx, rx), taps in frame.links.items():
        parts.append(_LINK.pack(tx, rx))
        slots = list(taps.taps) + [(EMPTY_SLOT, 0j)] * (MAX_NONZERO_TAPS - len(taps))
        for index, gain in slots:
            parts.append(_SLOT.pack(index, gain.real, gain.imag))
    return b"".join(parts)


def decode_frame(data: bytes, offset: int = 0) -> Tuple[ChannelFrame, int]:
    """Decode one record starting at ``offset``; returns the frame and the next offset."""
    if len(data) - offset < _HEADER.size:
        raise ScenarioError(f"truncated frame header at byte {offset}")
    magic, version, timestamp, count = _HEADER.unpack_from(data, offset)
    if magic != FRAME_MAGIC:
        raise ScenarioError(f"bad frame magic {magic!r} at byte {offset}")
    if version != FRAME_VERSION:
        raise ScenarioError(f"unsupported frame version {version}")
    offset += _HEADER.size
    record = _LINK.size + MAX_NONZERO_TAPS * _SLOT.size
    if len(data) - offset < count * record:
        raise ScenarioError(f"truncated frame body: {count} links need {count * record} bytes")
    links = {}
    for _ in range(count):
        tx, rx = _LINK.unpack_from(data, offset)
        offset += _LINK.size
        taps = []
        for _ in range(MAX_NONZERO_TAPS):
            index, re, im = _SLOT.unpack_from(data, offset)
            offset += _SLOT.size
            if index != EMPTY_SLOT:
                taps.append((index, complex(re, im)))
        links[(tx, rx)] = TapSet(tuple(taps))
    return ChannelFrame(timestamp, links), offset


def save_frames(frames: List[ChannelFrame], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(encode_frame(f) for f in frames))
    return path


def load_frames(path: Union[str, Path]) -> List[ChannelFrame]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ScenarioError(f"{path}: cannot read frames ({e.strerror or e})", path=str(path)) from e
    frames, offset = [], 0
    while offset < len(data):
        frame, offset = decode_frame(data, offset)
        frames.append(frame)
    return frames


# ---------------------------------------------------------------------------
# Multipath profiles
# ---------------------------------------------------------------------------

AMPLITUDE_COLUMNS = {"amplitude_linear": "linear", "amplitude_db": "db"}


def _amplitude(value: float, unit: str) -> float:
    return 10.0 ** (value / 20.0) if unit == "db" else value


def _unreadable(path: Path, error: Exception) -> ProfileFormatError:
    reason = getattr(error, "strerror", None) or error
    return ProfileFormatError(f"{path}: cannot read profile ({reason})",
                              path=str(path))


def load_profile_csv(path: Union[str, Path]) -> MultipathProfile:
    """
    Columns ``toa_s, amplitude_linear|amplitude_db, phase_rad``; the header
    names the amplitude unit. Lines starting with '#' are ignored.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            lines = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as e:
        raise _unreadable(path, e) from e
    components = []
    unit = None
    for row_no, row in enumerate(lines, start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if unit is None:
            header = [c.lower() for c in cells]
            if len(header) != 3 or header[0] != "toa_s" or header[2] != "phase_rad" \
                    or header[1] not in AMPLITUDE_COLUMNS:
                raise ProfileFormatError(
                    "header must be toa_s,amplitude_linear|amplitude_db,phase_rad",
                    row=row_no)
            unit = AMPLITUDE_COLUMNS[header[1]]
            continue
        if len(cells) != 3:
            raise ProfileFormatError(f"expected 3 columns, got {len(cells)}", row=row_no)
        try:
            toa, amp, phase = (float(c) for c in cells)
            components.append(MultipathComponent(toa, _amplitude(amp, unit), phase))
        except ValueError as e:
            raise ProfileFormatError(str(e), row=row_no) from e
    if unit is None:
        raise ProfileFormatError("missing header", row=1)
    if not components:
        raise ProfileFormatError("profile has no components", row=None)
    return MultipathProfile(tuple(components))


def load_profile_json(path: Union[str, Path]) -> MultipathProfile:
    """``{"amplitude_unit": "linear"|"db", "components": [{toa_s, amplitude, phase_rad}]}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError) as e:
        raise _unreadable(path, e) from e
    except json.JSONDecodeError as e:
        raise ProfileFormatError(f"{path}: invalid JSON ({e.msg})", row=e.lineno) from e
    if isinstance(data, list):
        data = {"components": data}
    if not isinstance(data, dict):
        raise ProfileFormatError(f"{path}: expected an object or a list of components")
    unit = str(data.get("amplitude_unit", "linear")).lower()
    if unit not in ("linear", "db"):
        raise ProfileFormatError(f"amplitude_unit must be 'linear' or 'db', got {unit!r}")
    components = []
    for n, c in enumerate(data.get("components", []), start=1):
        try:
            components.append(MultipathComponent(
                float(c["toa_s"]), _amplitude(float(c["amplitude"]), unit),
                float(c.get("phase_rad", 0.0))))
        except (KeyError, TypeError, ValueError) as e:
            raise ProfileFormatError(f"component {n}: {e}", row=n) from e
    if not components:
        raise ProfileFormatError("profile has no components")
    return MultipathProfile(tuple(components))


def load_profile(path: Union[str, Path]) -> MultipathProfile:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_profile_json(path)
    return load_profile_csv(path)

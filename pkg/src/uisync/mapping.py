"""Mapping store: encoded local inputs -> ordered remote event sequences.

The store is a fixed array of buckets, each holding an ordered chain of
(key, sequence) entries; a key hashes over all four identity fields and a
static mix picks the bucket. Sequences are authored in absolute pixels
against a declared reference resolution and held internally in relative
coordinates, so one table serves remote screens of any resolution.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Optional, Union

from .events import (
    CoordOutOfRange,
    Drag,
    EventCodecError,
    MouseClick,
    MouseMove,
    PixelCoord,
    Rect,
    Resolution,
    UIEvent,
    event_from_dict,
    map_event_coords,
    round_half_up,
    to_absolute,
    to_relative,
)
from .slider import SliderGeometry


class MappingError(Exception):
    """Base class for mapping-store and mapping-config failures."""


class DuplicateKey(MappingError):
    pass


class SchemaError(MappingError):
    pass


class UnmappedInput(MappingError, LookupError):
    """No sequence is configured for this input key."""


class ValueOutOfRange(MappingError):
    pass


class PlanInfeasible(MappingError):
    """No click count within the limit reaches the knob; the slider entry is misconfigured."""


class Action(enum.Enum):
    CLICK = "click"
    TOGGLE = "toggle"
    SET_VALUE = "set_value"
    SET_TEXT = "set_text"
    KEY = "key"

    @classmethod
    def parse(cls, name: str) -> "Action":
        try:
            return cls(name.lower())
        except (ValueError, AttributeError):
            raise SchemaError(f"unknown action {name!r}") from None


@dataclass(frozen=True)
class InputKey:
    """Canonical identity of one local user action; all four fields count."""

    interface_id: str
    widget_id: str
    action: Action
    payload: Optional[str] = None

    def stable_hash(self) -> int:
        """64-bit FNV-1a over the canonical field encoding; process-stable."""
        h = 0xCBF29CE484222325
        for part in (
            self.interface_id.encode(),
            self.widget_id.encode(),
            self.action.value.encode(),
            b"\x00" if self.payload is None else b"\x01" + self.payload.encode(),
        ):
            for b in part + b"\x1f":
                h ^= b
                h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
        return h


@dataclass(frozen=True)
class EventSequence:
    """Ordered event list; order is significant and preserved exactly."""

    events: tuple[UIEvent, ...]
    reference_resolution: Resolution


def _splitmix64(h: int) -> int:
    # Static hash applied to the key's own hash to pick a bucket.
    mask = 0xFFFFFFFFFFFFFFFF
    h = (h + 0x9E3779B97F4A7C15) & mask
    h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & mask
    h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & mask
    return h ^ (h >> 31)


class MappingTable:
    """Bucketized key-value store; behavior, not the hash constants, is the contract.

    Built once at load time and immutable afterwards by convention, so any
    number of threads may read it concurrently; hot reload swaps the whole
    table object.
    """

    def __init__(
        self,
        bucket_count: int = 256,
        hash_fn: Callable[[InputKey], int] | None = None,
    ):
        if bucket_count < 1:
            raise ValueError("bucket_count must be positive")
        self._buckets: list[list[tuple[InputKey, EventSequence]]] = [
            [] for _ in range(bucket_count)
        ]
        self._hash_fn = hash_fn or (lambda k: k.stable_hash())
        self._size = 0

    def _bucket(self, key: InputKey) -> list[tuple[InputKey, EventSequence]]:
        return self._buckets[_splitmix64(self._hash_fn(key)) % len(self._buckets)]

    def put(self, key: InputKey, seq: EventSequence) -> None:
        """Insert or replace; other entries are untouched."""
        chain = self._bucket(key)
        for i, (existing, _) in enumerate(chain):
            if existing == key:
                chain[i] = (key, seq)
                return
        chain.append((key, seq))
        self._size += 1

    def get(self, key: InputKey) -> EventSequence | None:
        """The stored sequence for an equal key; None on a miss."""
        for existing, seq in self._bucket(key):
            if existing == key:
                return seq
        return None

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[tuple[InputKey, EventSequence]]:
        for chain in self._buckets:
            yield from chain

    def resolve(self, key: InputKey, target: Resolution) -> EventSequence:
        """Look up and convert every coordinate to absolute pixels on `target`.

        Composite events (MouseClick, TypeText) stay unexpanded; expansion is
        replay-time work on the remote side.
        """
        seq = self.get(key)
        if seq is None:
            raise UnmappedInput(f"no mapping for {key}")
        events = tuple(
            map_event_coords(ev, lambda c: to_absolute(c, target)) for ev in seq.events
        )
        return EventSequence(events=events, reference_resolution=target)


@dataclass(frozen=True)
class SliderSpec:
    """Track geometry for planning, in reference-resolution pixels.

    `initial_value` is the planner's assumption about where the knob sits;
    None means unknown, which plans for the worst case (the knob at the far
    end of the track) so the sequence is safe from any actual start.
    """

    geometry: SliderGeometry
    page_step: float
    initial_value: Optional[int] = None


@dataclass(frozen=True)
class SliderPlanConfig:
    max_clicks: int = 4
    endpoint: str = "left"  # which track end the clicks push toward
    assume_knob_left: Optional[float] = None  # overrides initial_value (pixel edge)


def plan_slider_set(
    slider: SliderSpec, target_value: int, cfg: SliderPlanConfig = SliderPlanConfig()
) -> list[UIEvent]:
    """Click-then-drag plan that sets a slider whose knob position may be unknown.

    Moves the pointer to one track endpoint, clicks until the page-step model
    says the knob has arrived under the pointer, then drags the knob to the
    pixel of the target value. Returned events are in reference pixels.
    """
    geo = slider.geometry
    if not (geo.min_value <= target_value <= geo.max_value):
        raise ValueOutOfRange(
            f"target {target_value} outside [{geo.min_value}, {geo.max_value}]"
        )
    if cfg.endpoint not in ("left", "right"):
        raise SchemaError(f"unknown endpoint policy {cfg.endpoint!r}")

    pointer_x = geo.left_endpoint_x() if cfg.endpoint == "left" else geo.right_endpoint_x()
    cy = geo.track.y + geo.track.h // 2

    if cfg.assume_knob_left is not None:
        knob_left = cfg.assume_knob_left
    elif slider.initial_value is not None:
        knob_left = geo.knob_left_for_value(slider.initial_value)
    else:
        # Unknown start: assume the far end, the position needing the most clicks.
        knob_left = geo.knob_left_for_value(
            geo.max_value if cfg.endpoint == "left" else geo.min_value
        )

    clicks = 0
    while not geo.knob_contains(knob_left, pointer_x):
        if clicks >= cfg.max_clicks:
            raise PlanInfeasible(
                f"knob not reachable in {cfg.max_clicks} clicks with page_step {slider.page_step}"
            )
        knob_left = geo.track_click(knob_left, pointer_x, slider.page_step)
        clicks += 1

    from_x = round_half_up(knob_left + geo.knob_width / 2)
    to_x = round_half_up(geo.center_for_value(target_value))
    events: list[UIEvent] = [MouseMove(PixelCoord(pointer_x, cy))]
    events.extend(MouseClick() for _ in range(clicks))
    events.append(Drag(PixelCoord(from_x, cy), PixelCoord(to_x, cy)))
    return events


@dataclass(frozen=True)
class LoadedMapping:
    table: MappingTable
    reference_resolution: Resolution
    click_delay_ms: int
    page_step_fraction: float


_HEADER_FIELDS = {"reference_resolution", "click_delay_ms", "page_step_fraction", "entries"}
_ENTRY_FIELDS = {"key", "events", "noop"}
_KEY_FIELDS = {"interface_id", "widget_id", "action", "payload"}
_SLIDER_FIELDS = {
    "type",
    "track",
    "knob_width",
    "min",
    "max",
    "value",
    "page_step",
    "endpoint",
    "assume_start",
    "max_clicks",
}

DEFAULT_CLICK_DELAY_MS = 200
DEFAULT_PAGE_STEP_FRACTION = 0.25


def _parse_resolution(d: object, where: str) -> Resolution:
    if not isinstance(d, dict) or set(d) != {"width", "height"}:
        raise SchemaError(f"{where}: expected {{width, height}}")
    try:
        return Resolution(int(d["width"]), int(d["height"]))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: {e}") from None


def _parse_rect(d: object, where: str) -> Rect:
    if not isinstance(d, dict) or set(d) != {"x", "y", "w", "h"}:
        raise SchemaError(f"{where}: expected {{x, y, w, h}}")
    try:
        return Rect(int(d["x"]), int(d["y"]), int(d["w"]), int(d["h"]))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: {e}") from None


def _parse_key(d: object, where: str) -> InputKey:
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: key must be an object")
    extra = set(d) - _KEY_FIELDS
    if extra:
        raise SchemaError(f"{where}: unknown key field(s) {sorted(extra)}")
    for req in ("interface_id", "widget_id", "action"):
        if not isinstance(d.get(req), str) or not d[req]:
            raise SchemaError(f"{where}: key.{req} must be a non-empty string")
    payload = d.get("payload")
    if payload is not None and not isinstance(payload, str):
        raise SchemaError(f"{where}: key.payload must be a string when present")
    return InputKey(d["interface_id"], d["widget_id"], Action.parse(d["action"]), payload)


def _plan_from_slider_decl(
    d: dict, where: str, page_step_fraction: float
) -> list[UIEvent]:
    extra = set(d) - _SLIDER_FIELDS
    if extra:
        raise SchemaError(f"{where}: unknown slider_set field(s) {sorted(extra)}")
    for req in ("track", "knob_width", "min", "max", "value"):
        if req not in d:
            raise SchemaError(f"{where}: slider_set missing field {req!r}")
    track = _parse_rect(d["track"], f"{where}.track")
    try:
        geo = SliderGeometry(track, int(d["knob_width"]), int(d["min"]), int(d["max"]))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: {e}") from None
    page_step = float(d.get("page_step", page_step_fraction * geo.usable))
    if page_step <= 0:
        raise SchemaError(f"{where}: page_step must be positive")
    spec = SliderSpec(geo, page_step, d.get("assume_start"))
    cfg = SliderPlanConfig(
        max_clicks=int(d.get("max_clicks", 4)),
        endpoint=d.get("endpoint", "left"),
    )
    return plan_slider_set(spec, int(d["value"]), cfg)


def _check_event_coords(ev: UIEvent, ref: Resolution, where: str) -> None:
    def check(c):
        if isinstance(c, PixelCoord) and not (0 <= c.x < ref.width and 0 <= c.y < ref.height):
            raise CoordOutOfRange(
                f"{where}: pixel ({c.x},{c.y}) outside reference {ref.width}x{ref.height}"
            )
        return c

    map_event_coords(ev, check)


def load_mapping(source: Union[str, Path, dict]) -> LoadedMapping:
    """Parse a mapping config document into an immutable table.

    Entries are validated strictly (unknown fields rejected, coordinates
    checked against the reference resolution, duplicate keys refused) and
    slider_set declarations are planned into click-and-drag sequences here,
    so a loaded table contains only plain events.
    """
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as e:
            raise SchemaError(f"{source}: not valid JSON: {e}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise SchemaError("mapping document must be a JSON object")
    extra = set(doc) - _HEADER_FIELDS
    if extra:
        raise SchemaError(f"unknown top-level field(s) {sorted(extra)}")
    if "reference_resolution" not in doc or "entries" not in doc:
        raise SchemaError("mapping document needs reference_resolution and entries")

    ref = _parse_resolution(doc["reference_resolution"], "reference_resolution")
    click_delay_ms = int(doc.get("click_delay_ms", DEFAULT_CLICK_DELAY_MS))
    page_step_fraction = float(doc.get("page_step_fraction", DEFAULT_PAGE_STEP_FRACTION))
    if not isinstance(doc["entries"], list):
        raise SchemaError("entries must be a list")

    table = MappingTable()
    for i, entry in enumerate(doc["entries"]):
        where = f"entry {i}"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        extra = set(entry) - _ENTRY_FIELDS
        if extra:
            raise SchemaError(f"{where}: unknown field(s) {sorted(extra)}")
        if "key" not in entry or "events" not in entry:
            raise SchemaError(f"{where}: needs key and events")
        key = _parse_key(entry["key"], where)
        where = f"entry {i} ({key.interface_id}/{key.widget_id}/{key.action.value}" + (
            f"/{key.payload})" if key.payload is not None else ")"
        )
        if table.get(key) is not None:
            raise DuplicateKey(f"{where}: key declared twice")
        if not isinstance(entry["events"], list):
            raise SchemaError(f"{where}: events must be a list")
        if not entry["events"] and not entry.get("noop", False):
            raise SchemaError(f"{where}: empty events list requires noop: true")

        pixel_events: list[UIEvent] = []
        for j, ev_doc in enumerate(entry["events"]):
            ev_where = f"{where} event {j}"
            if isinstance(ev_doc, dict) and ev_doc.get("type") == "slider_set":
                pixel_events.extend(
                    _plan_from_slider_decl(ev_doc, ev_where, page_step_fraction)
                )
                continue
            try:
                ev = event_from_dict(ev_doc)
            except EventCodecError as e:
                raise SchemaError(f"{ev_where}: {e}") from None
            pixel_events.append(ev)
        for j, ev in enumerate(pixel_events):
            _check_event_coords(ev, ref, f"{where} event {j}")
        relative = tuple(
            map_event_coords(ev, lambda c: to_relative(c, ref)) for ev in pixel_events
        )
        table.put(key, EventSequence(events=relative, reference_resolution=ref))

    return LoadedMapping(
        table=table,
        reference_resolution=ref,
        click_delay_ms=click_delay_ms,
        page_step_fraction=page_step_fraction,
    )

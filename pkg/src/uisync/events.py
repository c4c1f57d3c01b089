"""Core UI-event and coordinate types shared by the mapping store, the wire
payloads, and the virtual screen.

Coordinates come in two flavours: authored/stored positions are *relative*
(fractions of the screen extent, so a sequence replays at any resolution),
and replayed positions are *absolute* pixels on a concrete screen. The
conversion uses (dimension - 1) as the denominator so both extremes of the
screen are exactly representable, and rounds half-up on the way back.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Union


class CoordOutOfRange(ValueError):
    """A pixel coordinate lies outside its governing resolution."""


def round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


@dataclass(frozen=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"resolution must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class PixelCoord:
    x: int
    y: int


@dataclass(frozen=True)
class RelativeCoord:
    rx: float
    ry: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.rx <= 1.0 and 0.0 <= self.ry <= 1.0):
            raise ValueError(f"relative coordinate out of [0,1]: ({self.rx}, {self.ry})")


@dataclass(frozen=True)
class Rect:
    """Pixel rectangle; covers x..x+w-1, y..y+h-1 inclusive."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"rect must have positive extent, got {self.w}x{self.h}")

    def contains(self, x: int, y: int) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h

    def intersects(self, other: "Rect") -> bool:
        return not (
            self.x + self.w <= other.x
            or other.x + other.w <= self.x
            or self.y + self.h <= other.y
            or other.y + other.h <= self.y
        )

    @property
    def center(self) -> PixelCoord:
        return PixelCoord(self.x + self.w // 2, self.y + self.h // 2)


def to_relative(p: PixelCoord, ref: Resolution) -> RelativeCoord:
    """Map a pixel on `ref` to resolution-independent fractions.

    rx = x / (width - 1) so that x=0 maps to 0.0 and x=width-1 maps to 1.0.
    A 1-pixel-wide axis has a single valid index which maps to 0.
    """
    if not (0 <= p.x < ref.width and 0 <= p.y < ref.height):
        raise CoordOutOfRange(f"pixel ({p.x},{p.y}) outside {ref.width}x{ref.height}")
    rx = p.x / (ref.width - 1) if ref.width > 1 else 0.0
    ry = p.y / (ref.height - 1) if ref.height > 1 else 0.0
    return RelativeCoord(rx, ry)


def to_absolute(r: RelativeCoord, target: Resolution) -> PixelCoord:
    """Inverse of to_relative against `target`; rounds half-up, always in range."""
    x = round_half_up(r.rx * (target.width - 1))
    y = round_half_up(r.ry * (target.height - 1))
    return PixelCoord(x, y)


class MouseButton(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


Coord = Union[PixelCoord, RelativeCoord]


@dataclass(frozen=True)
class MouseMove:
    pos: Coord


@dataclass(frozen=True)
class MousePress:
    button: MouseButton = MouseButton.LEFT


@dataclass(frozen=True)
class MouseRelease:
    button: MouseButton = MouseButton.LEFT


@dataclass(frozen=True)
class MouseClick:
    """Composite; expands at replay time to press / delay / release."""

    button: MouseButton = MouseButton.LEFT


@dataclass(frozen=True)
class KeyPress:
    key: str  # symbolic name: "ENTER", "DIGIT_7", "CTRL_A", or a single character


@dataclass(frozen=True)
class TypeText:
    """Composite; expands at replay time to one KeyPress per character."""

    text: str


@dataclass(frozen=True)
class Drag:
    start: Coord
    end: Coord


@dataclass(frozen=True)
class Delay:
    ms: int


UIEvent = Union[MouseMove, MousePress, MouseRelease, MouseClick, KeyPress, TypeText, Drag, Delay]

#: Events that apply_event accepts directly (composites must be expanded first).
ATOMIC_EVENTS = (MouseMove, MousePress, MouseRelease, KeyPress, Delay)


def map_event_coords(ev: UIEvent, fn: Callable[[Coord], Coord]) -> UIEvent:
    """Return `ev` with every coordinate passed through `fn`."""
    if isinstance(ev, MouseMove):
        return MouseMove(fn(ev.pos))
    if isinstance(ev, Drag):
        return Drag(fn(ev.start), fn(ev.end))
    return ev


# Keyboard model: symbolic key names <-> characters typed into a focused field.
# DIGIT_* names exist so mappings read like the hardware keys being pressed;
# any single-character name types that character verbatim.

_SPECIAL_CHARS = {" ": "SPACE"}
_CHAR_BY_KEY = {"SPACE": " "}


def char_to_key(ch: str) -> str:
    if ch.isdigit():
        return f"DIGIT_{ch}"
    return _SPECIAL_CHARS.get(ch, ch)


def key_to_char(key: str) -> str | None:
    """Character a key press types, or None for non-printing keys."""
    if key.startswith("DIGIT_") and len(key) == 7 and key[6].isdigit():
        return key[6]
    if key in _CHAR_BY_KEY:
        return _CHAR_BY_KEY[key]
    if len(key) == 1:
        return key
    return None


class EventCodecError(ValueError):
    """A wire/config event dictionary does not match the documented shape."""


def _coord_to_dict(c: Coord) -> dict:
    if isinstance(c, PixelCoord):
        return {"x": c.x, "y": c.y}
    raise EventCodecError(f"only pixel coordinates serialize, got {c!r}")


def _coord_from_dict(d: dict, where: str) -> PixelCoord:
    if not isinstance(d, dict) or set(d) != {"x", "y"}:
        raise EventCodecError(f"{where}: expected {{x, y}}, got {d!r}")
    x, y = d["x"], d["y"]
    if not isinstance(x, int) or not isinstance(y, int) or isinstance(x, bool) or isinstance(y, bool):
        raise EventCodecError(f"{where}: coordinates must be integers")
    return PixelCoord(x, y)


def _button_from(name: object, where: str) -> MouseButton:
    try:
        return MouseButton(name)
    except ValueError:
        raise EventCodecError(f"{where}: unknown button {name!r}") from None


def event_to_dict(ev: UIEvent) -> dict:
    """Serialize a pixel-coordinate event to its wire/config dictionary."""
    if isinstance(ev, MouseMove):
        return {"type": "move", **_coord_to_dict(ev.pos)}
    if isinstance(ev, MousePress):
        return {"type": "press", "button": ev.button.value}
    if isinstance(ev, MouseRelease):
        return {"type": "release", "button": ev.button.value}
    if isinstance(ev, MouseClick):
        return {"type": "click", "button": ev.button.value}
    if isinstance(ev, KeyPress):
        return {"type": "key", "key": ev.key}
    if isinstance(ev, TypeText):
        return {"type": "type_text", "text": ev.text}
    if isinstance(ev, Drag):
        return {"type": "drag", "from": _coord_to_dict(ev.start), "to": _coord_to_dict(ev.end)}
    if isinstance(ev, Delay):
        return {"type": "delay", "ms": ev.ms}
    raise EventCodecError(f"unserializable event {ev!r}")


_EVENT_FIELDS = {
    "move": {"x", "y"},
    "press": {"button"},
    "release": {"button"},
    "click": {"button"},
    "key": {"key"},
    "type_text": {"text"},
    "drag": {"from", "to"},
    "delay": {"ms"},
}


def event_from_dict(d: dict) -> UIEvent:
    """Parse a wire/config event dictionary (strict: unknown fields rejected)."""
    if not isinstance(d, dict):
        raise EventCodecError(f"event must be an object, got {type(d).__name__}")
    kind = d.get("type")
    if kind not in _EVENT_FIELDS:
        raise EventCodecError(f"unknown event type {kind!r}")
    extra = set(d) - _EVENT_FIELDS[kind] - {"type"}
    if extra:
        raise EventCodecError(f"{kind}: unknown field(s) {sorted(extra)}")
    missing = _EVENT_FIELDS[kind] - set(d)
    if kind in ("press", "release", "click"):
        missing -= {"button"}  # button defaults to left
    if missing:
        raise EventCodecError(f"{kind}: missing field(s) {sorted(missing)}")

    if kind == "move":
        return MouseMove(_coord_from_dict({"x": d["x"], "y": d["y"]}, "move"))
    if kind == "press":
        return MousePress(_button_from(d.get("button", "left"), "press"))
    if kind == "release":
        return MouseRelease(_button_from(d.get("button", "left"), "release"))
    if kind == "click":
        return MouseClick(_button_from(d.get("button", "left"), "click"))
    if kind == "key":
        if not isinstance(d["key"], str) or not d["key"]:
            raise EventCodecError("key: key name must be a non-empty string")
        return KeyPress(d["key"])
    if kind == "type_text":
        if not isinstance(d["text"], str):
            raise EventCodecError("type_text: text must be a string")
        return TypeText(d["text"])
    if kind == "drag":
        return Drag(_coord_from_dict(d["from"], "drag.from"), _coord_from_dict(d["to"], "drag.to"))
    # delay
    ms = d["ms"]
    if not isinstance(ms, int) or isinstance(ms, bool) or ms < 0:
        raise EventCodecError("delay: ms must be a non-negative integer")
    return Delay(ms)

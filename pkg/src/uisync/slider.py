"""Horizontal slider geometry shared by the event planner and the screen.

The knob is a `knob_width`-pixel box riding inside the track rectangle, so
its left edge moves across `usable = track.w - knob_width` pixels. A value
v in [min, max] places the knob left edge at

    track.x + (v - min) / (max - min) * usable

and reading a value back quantizes the knob center to the nearest
representable integer value (round half-up). Track clicks shift the knob a
fixed page step toward the pointer without snapping; drags snap the knob to
the value nearest the drop point. Both consumers must share this arithmetic
exactly, otherwise planned click counts and replayed end values drift.
"""

from __future__ import annotations

from dataclasses import dataclass

from .events import Rect, round_half_up


@dataclass(frozen=True)
class SliderGeometry:
    track: Rect
    knob_width: int
    min_value: int
    max_value: int

    def __post_init__(self) -> None:
        if self.knob_width < 2:
            raise ValueError("knob_width must be at least 2 pixels")
        if self.knob_width >= self.track.w:
            raise ValueError("knob must be narrower than the track")
        if self.max_value <= self.min_value:
            raise ValueError("max_value must exceed min_value")

    @property
    def usable(self) -> int:
        return self.track.w - self.knob_width

    @property
    def span(self) -> int:
        return self.max_value - self.min_value

    def default_page_step(self) -> float:
        # One quarter of the usable travel: any start reaches an endpoint
        # within four clicks.
        return self.usable / 4

    def knob_left_for_value(self, value: int) -> float:
        if not (self.min_value <= value <= self.max_value):
            raise ValueError(f"value {value} outside [{self.min_value}, {self.max_value}]")
        return self.track.x + (value - self.min_value) / self.span * self.usable

    def value_for_center(self, center_x: float) -> int:
        """Quantization rule: nearest representable value for a knob center."""
        offset = center_x - self.track.x - self.knob_width / 2
        v = round_half_up(offset / self.usable * self.span) + self.min_value
        return max(self.min_value, min(self.max_value, v))

    def center_for_value(self, value: int) -> float:
        return self.knob_left_for_value(value) + self.knob_width / 2

    def clamp_center(self, x: float) -> float:
        lo = self.track.x + self.knob_width / 2
        hi = self.track.x + self.track.w - self.knob_width / 2
        return min(hi, max(lo, x))

    def knob_contains(self, knob_left: float, x: int) -> bool:
        return knob_left <= x < knob_left + self.knob_width

    def track_click(self, knob_left: float, pointer_x: int, page_step: float) -> float:
        """Knob left edge after one click on the track at pointer_x.

        Moves the knob page_step pixels toward the pointer, clamped to the
        track; no snapping to a representable value.
        """
        center = knob_left + self.knob_width / 2
        if pointer_x > center:
            moved = knob_left + page_step
        else:
            moved = knob_left - page_step
        return min(float(self.usable + self.track.x), max(float(self.track.x), moved))

    def left_endpoint_x(self) -> int:
        return self.track.x

    def right_endpoint_x(self) -> int:
        return self.track.x + self.track.w - 1

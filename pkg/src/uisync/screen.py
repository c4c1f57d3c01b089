"""Deterministic headless widget model: the replay target and test oracle.

Widgets live at fixed pixel rectangles, never overlap, and react to atomic
events exactly as documented on apply_event. All timing is a simulated
clock advanced by Delay events, so identical (initial state, event list)
pairs always produce identical snapshots; live-mode sleeping is layered on
top by the remote agent, never in here.

Gesture rules worth spelling out:
  * A press followed by a release over a different widget activates nothing.
  * A click on a slider track (press and release at the same pixel, off the
    knob) shifts the knob one page step toward the pointer, without value
    snapping. Pressing the knob and releasing elsewhere drags it, snapping
    to the nearest representable value. A press that misses the knob and
    releases at a different pixel does nothing, so a misaimed drag cannot
    corrupt the value.
  * Key presses go to the focused text field; ENTER commits (unfocuses and
    marks the log entry), CTRL_A selects all, DELETE clears a selection,
    BACKSPACE deletes backwards. Printable keys replace the selection or
    append. With no focus, key presses are logged and ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

from .events import (
    ATOMIC_EVENTS,
    CoordOutOfRange,
    Delay,
    Drag,
    KeyPress,
    MouseButton,
    MouseClick,
    MouseMove,
    MousePress,
    MouseRelease,
    PixelCoord,
    Rect,
    Resolution,
    TypeText,
    UIEvent,
    char_to_key,
    key_to_char,
)
from .mapping import EventSequence
from .slider import SliderGeometry

WIDGET_KINDS = ("button", "text_field", "checkbox", "slider", "tab_bar")


class ScreenError(Exception):
    pass


class ScreenSpecError(ScreenError):
    pass


class ReplayError(ScreenError):
    """An event in a sequence failed to apply; carries the failing index."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"event {index} failed: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class WidgetSpec:
    id: str
    kind: str
    rect: Rect
    min_value: int = 0
    max_value: int = 100
    knob_width: int = 10
    page_step: Optional[float] = None  # pixels; None = quarter of usable travel
    initial_value: Optional[int] = None
    tabs: tuple[str, ...] = ()
    tab: Optional[tuple[str, int]] = None  # visible only while (tab_bar, index) is active

    def slider_geometry(self) -> SliderGeometry:
        return SliderGeometry(self.rect, self.knob_width, self.min_value, self.max_value)


@dataclass(frozen=True)
class ScreenSpec:
    resolution: Resolution
    widgets: tuple[WidgetSpec, ...]

    def widget(self, widget_id: str) -> WidgetSpec:
        for w in self.widgets:
            if w.id == widget_id:
                return w
        raise KeyError(widget_id)


def _validate_spec(spec: ScreenSpec) -> None:
    seen: set[str] = set()
    by_id = {w.id: w for w in spec.widgets}
    for w in spec.widgets:
        if w.id in seen:
            raise ScreenSpecError(f"duplicate widget id {w.id!r}")
        seen.add(w.id)
        if w.kind not in WIDGET_KINDS:
            raise ScreenSpecError(f"widget {w.id!r}: unknown kind {w.kind!r}")
        r = w.rect
        res = spec.resolution
        if r.x < 0 or r.y < 0 or r.x + r.w > res.width or r.y + r.h > res.height:
            raise ScreenSpecError(f"widget {w.id!r}: rect outside {res.width}x{res.height}")
        if w.kind == "slider":
            w.slider_geometry()  # raises on bad geometry
            if w.initial_value is not None and not (
                w.min_value <= w.initial_value <= w.max_value
            ):
                raise ScreenSpecError(f"widget {w.id!r}: initial_value outside range")
        if w.kind == "tab_bar" and len(w.tabs) < 1:
            raise ScreenSpecError(f"widget {w.id!r}: tab_bar needs at least one tab")
        if w.tab is not None:
            bar = by_id.get(w.tab[0])
            if bar is None or bar.kind != "tab_bar":
                raise ScreenSpecError(f"widget {w.id!r}: tab refers to missing tab_bar {w.tab[0]!r}")
            if not (0 <= w.tab[1] < len(bar.tabs)):
                raise ScreenSpecError(f"widget {w.id!r}: tab index {w.tab[1]} out of range")
    # Overlap is allowed only between widgets that can never be visible together.
    ws = spec.widgets
    for i in range(len(ws)):
        for j in range(i + 1, len(ws)):
            a, b = ws[i], ws[j]
            if not a.rect.intersects(b.rect):
                continue
            if (
                a.tab is not None
                and b.tab is not None
                and a.tab[0] == b.tab[0]
                and a.tab[1] != b.tab[1]
            ):
                continue
            raise ScreenSpecError(f"widgets {a.id!r} and {b.id!r} overlap")


_SPEC_FIELDS = {"resolution", "widgets"}
_WIDGET_FIELDS = {
    "id",
    "kind",
    "rect",
    "min",
    "max",
    "knob_width",
    "page_step",
    "initial",
    "tabs",
    "tab",
}


def load_screen_spec(source: Union[str, Path, dict]) -> ScreenSpec:
    """Parse and validate a screen spec document (strict fields)."""
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text())
        except json.JSONDecodeError as e:
            raise ScreenSpecError(f"{source}: not valid JSON: {e}") from None
    else:
        doc = source
    if not isinstance(doc, dict) or set(doc) - _SPEC_FIELDS:
        raise ScreenSpecError("screen spec must be an object with resolution and widgets")
    res_doc = doc.get("resolution")
    if not isinstance(res_doc, dict) or set(res_doc) != {"width", "height"}:
        raise ScreenSpecError("resolution: expected {width, height}")
    resolution = Resolution(int(res_doc["width"]), int(res_doc["height"]))
    widgets = []
    for i, wd in enumerate(doc.get("widgets", [])):
        where = f"widget {i}"
        if not isinstance(wd, dict):
            raise ScreenSpecError(f"{where}: must be an object")
        extra = set(wd) - _WIDGET_FIELDS
        if extra:
            raise ScreenSpecError(f"{where}: unknown field(s) {sorted(extra)}")
        for req in ("id", "kind", "rect"):
            if req not in wd:
                raise ScreenSpecError(f"{where}: missing field {req!r}")
        rd = wd["rect"]
        if not isinstance(rd, dict) or set(rd) != {"x", "y", "w", "h"}:
            raise ScreenSpecError(f"{where}: rect must be {{x, y, w, h}}")
        tab = None
        if "tab" in wd:
            td = wd["tab"]
            if not isinstance(td, dict) or set(td) != {"bar", "index"}:
                raise ScreenSpecError(f"{where}: tab must be {{bar, index}}")
            tab = (str(td["bar"]), int(td["index"]))
        widgets.append(
            WidgetSpec(
                id=str(wd["id"]),
                kind=str(wd["kind"]),
                rect=Rect(int(rd["x"]), int(rd["y"]), int(rd["w"]), int(rd["h"])),
                min_value=int(wd.get("min", 0)),
                max_value=int(wd.get("max", 100)),
                knob_width=int(wd.get("knob_width", 10)),
                page_step=float(wd["page_step"]) if "page_step" in wd else None,
                initial_value=int(wd["initial"]) if "initial" in wd else None,
                tabs=tuple(str(t) for t in wd.get("tabs", ())),
                tab=tab,
            )
        )
    spec = ScreenSpec(resolution=resolution, widgets=tuple(widgets))
    _validate_spec(spec)
    return spec


@dataclass(frozen=True)
class ClickConfig:
    click_delay_ms: int = 200


def expand(ev: UIEvent, cfg: ClickConfig = ClickConfig()) -> list[UIEvent]:
    """Rewrite composite events into the atomic events the screen executes.

    A click is press / delay / release with the configured intermediate
    delay (200 ms by default); typed text becomes one key press per
    character; a drag becomes move, press, move, release.
    """
    if isinstance(ev, MouseClick):
        return [
            MousePress(ev.button),
            Delay(cfg.click_delay_ms),
            MouseRelease(ev.button),
        ]
    if isinstance(ev, TypeText):
        return [KeyPress(char_to_key(ch)) for ch in ev.text]
    if isinstance(ev, Drag):
        return [
            MouseMove(ev.start),
            MousePress(MouseButton.LEFT),
            MouseMove(ev.end),
            MouseRelease(MouseButton.LEFT),
        ]
    return [ev]


@dataclass
class ButtonState:
    click_count: int = 0


@dataclass
class TextFieldState:
    content: str = ""
    focused: bool = False
    selected: bool = False


@dataclass
class CheckboxState:
    checked: bool = False


@dataclass
class SliderState:
    knob_left: float  # continuous; value is quantized on read


@dataclass
class TabBarState:
    active_tab: int = 0


@dataclass
class LogEntry:
    t_ms: int
    event: UIEvent
    note: Optional[str] = None


@dataclass
class _PressInfo:
    button: MouseButton
    pos: PixelCoord
    widget_id: Optional[str]
    on_knob: bool


class VirtualScreen:
    """Mutable screen state; owned by one session handler at a time."""

    def __init__(self, spec: ScreenSpec):
        _validate_spec(spec)
        self.spec = spec
        self.pointer = PixelCoord(0, 0)
        self.press: Optional[_PressInfo] = None
        self.focus: Optional[str] = None
        self.clock_ms = 0
        self.event_log: list[LogEntry] = []
        self._states: dict[str, object] = {}
        self._geo: dict[str, SliderGeometry] = {}
        # flat bounds for the hit-test hot path
        self._hit_rects = [
            (w.rect.x, w.rect.y, w.rect.x + w.rect.w, w.rect.y + w.rect.h, w)
            for w in spec.widgets
        ]
        for w in spec.widgets:
            if w.kind == "button":
                self._states[w.id] = ButtonState()
            elif w.kind == "text_field":
                self._states[w.id] = TextFieldState()
            elif w.kind == "checkbox":
                self._states[w.id] = CheckboxState()
            elif w.kind == "slider":
                geo = w.slider_geometry()
                self._geo[w.id] = geo
                start = w.initial_value if w.initial_value is not None else w.min_value
                self._states[w.id] = SliderState(knob_left=geo.knob_left_for_value(start))
            elif w.kind == "tab_bar":
                self._states[w.id] = TabBarState()

    # -- queries ------------------------------------------------------------

    def state(self, widget_id: str):
        return self._states[widget_id]

    def slider_value(self, widget_id: str) -> int:
        geo = self._geo[widget_id]
        st: SliderState = self._states[widget_id]  # type: ignore[assignment]
        return geo.value_for_center(st.knob_left + geo.knob_width / 2)

    def _visible(self, w: WidgetSpec) -> bool:
        if w.tab is None:
            return True
        bar: TabBarState = self._states[w.tab[0]]  # type: ignore[assignment]
        return bar.active_tab == w.tab[1]

    def _widget_at(self, x: int, y: int) -> Optional[WidgetSpec]:
        for x1, y1, x2, y2, w in self._hit_rects:
            if x1 <= x < x2 and y1 <= y < y2 and self._visible(w):
                return w
        return None

    def force_slider_knob(self, widget_id: str, knob_left: float) -> None:
        """Test/setup hook: place a slider knob at an arbitrary track pixel."""
        geo = self._geo[widget_id]
        if not (geo.track.x <= knob_left <= geo.track.x + geo.usable):
            raise ValueError(f"knob_left {knob_left} outside track")
        st: SliderState = self._states[widget_id]  # type: ignore[assignment]
        st.knob_left = knob_left

    # -- transitions ----------------------------------------------------------

    def apply_event(self, ev: UIEvent) -> None:
        """Apply one atomic event; composites must go through expand() first."""
        if not isinstance(ev, ATOMIC_EVENTS):
            raise ScreenError(f"{type(ev).__name__} must be expanded before apply_event")
        note: Optional[str] = None

        if isinstance(ev, Delay):
            self.clock_ms += ev.ms
        elif isinstance(ev, MouseMove):
            p = ev.pos
            if not isinstance(p, PixelCoord):
                raise ScreenError("unresolved relative coordinate reached the screen")
            res = self.spec.resolution
            if not (0 <= p.x < res.width and 0 <= p.y < res.height):
                raise CoordOutOfRange(f"pointer ({p.x},{p.y}) outside {res.width}x{res.height}")
            self.pointer = p
        elif isinstance(ev, MousePress):
            note = self._on_press(ev)
        elif isinstance(ev, MouseRelease):
            note = self._on_release(ev)
        elif isinstance(ev, KeyPress):
            note = self._on_key(ev)

        self.event_log.append(LogEntry(t_ms=self.clock_ms, event=ev, note=note))

    def _on_press(self, ev: MousePress) -> Optional[str]:
        if self.press is not None:
            return "ignored: button already down"
        w = self._widget_at(self.pointer.x, self.pointer.y)
        on_knob = False
        if w is not None and w.kind == "slider":
            st: SliderState = self._states[w.id]  # type: ignore[assignment]
            on_knob = self._geo[w.id].knob_contains(st.knob_left, self.pointer.x)
        self.press = _PressInfo(ev.button, self.pointer, w.id if w else None, on_knob)
        return None

    def _on_release(self, ev: MouseRelease) -> Optional[str]:
        press = self.press
        if press is None or press.button != ev.button:
            return "ignored: no matching press"
        self.press = None
        target = self._widget_at(self.pointer.x, self.pointer.y)
        if press.widget_id is None or target is None or target.id != press.widget_id:
            return None  # press and release disagree: activates neither
        w = target
        st = self._states[w.id]
        if w.kind == "button":
            st.click_count += 1  # type: ignore[union-attr]
            return f"click:{w.id}"
        if w.kind == "checkbox":
            st.checked = not st.checked  # type: ignore[union-attr]
            return f"toggle:{w.id}"
        if w.kind == "text_field":
            self._set_focus(w.id)
            return f"focus:{w.id}"
        if w.kind == "tab_bar":
            idx = min(len(w.tabs) - 1, (self.pointer.x - w.rect.x) * len(w.tabs) // w.rect.w)
            st.active_tab = idx  # type: ignore[union-attr]
            if self.focus is not None:
                fw = self.spec.widget(self.focus)
                if not self._visible(fw):
                    self._set_focus(None)
            return f"tab:{w.id}:{idx}"
        if w.kind == "slider":
            return self._on_slider_release(w, press)
        return None

    def _on_slider_release(self, w: WidgetSpec, press: _PressInfo) -> Optional[str]:
        geo = self._geo[w.id]
        st: SliderState = self._states[w.id]  # type: ignore[assignment]
        if press.on_knob:
            # Drag (possibly degenerate): knob center to the clamped pointer x,
            # snapped to the nearest representable value.
            center = geo.clamp_center(float(self.pointer.x))
            value = geo.value_for_center(center)
            st.knob_left = geo.knob_left_for_value(value)
            return f"slider:{w.id}={value}"
        if self.pointer == press.pos:
            st.knob_left = geo.track_click(st.knob_left, self.pointer.x, self._page_step(w, geo))
            return f"slider_page:{w.id}"
        return None  # press missed the knob and the pointer moved: no action

    def _page_step(self, w: WidgetSpec, geo: SliderGeometry) -> float:
        return w.page_step if w.page_step is not None else geo.default_page_step()

    def _set_focus(self, widget_id: Optional[str]) -> None:
        if self.focus is not None and self.focus != widget_id:
            old: TextFieldState = self._states[self.focus]  # type: ignore[assignment]
            old.focused = False
        self.focus = widget_id
        if widget_id is not None:
            fs: TextFieldState = self._states[widget_id]  # type: ignore[assignment]
            fs.focused = True
            fs.selected = False

    def _on_key(self, ev: KeyPress) -> Optional[str]:
        if self.focus is None:
            return "ignored: no focus"
        st: TextFieldState = self._states[self.focus]  # type: ignore[assignment]
        key = ev.key
        if key == "ENTER":
            widget_id = self.focus
            st.focused = False
            st.selected = False
            self.focus = None
            return f"committed:{widget_id}"
        if key == "CTRL_A":
            st.selected = True
            return None
        if key == "DELETE":
            if st.selected:
                st.content = ""
                st.selected = False
            return None
        if key == "BACKSPACE":
            if st.selected:
                st.content = ""
                st.selected = False
            else:
                st.content = st.content[:-1]
            return None
        ch = key_to_char(key)
        if ch is None:
            return f"ignored: unknown key {key}"
        if st.selected:
            st.content = ch
            st.selected = False
        else:
            st.content += ch
        return None

    def replay(
        self,
        seq: Union[EventSequence, Sequence[UIEvent]],
        cfg: ClickConfig = ClickConfig(),
        sleeper: Optional[Callable[[float], None]] = None,
    ) -> None:
        """Expand and apply a resolved sequence in order.

        `sleeper`, when given, receives each Delay in seconds (live mode);
        by default delays only advance the simulated clock.
        """
        events: Iterable[UIEvent] = seq.events if isinstance(seq, EventSequence) else seq
        for i, ev in enumerate(events):
            atomics = (ev,) if isinstance(ev, ATOMIC_EVENTS) else expand(ev, cfg)
            for atomic in atomics:
                try:
                    self.apply_event(atomic)
                except ScreenError as e:
                    raise ReplayError(i, e) from e
                except CoordOutOfRange as e:
                    raise ReplayError(i, e) from e
                if sleeper is not None and isinstance(atomic, Delay):
                    sleeper(atomic.ms / 1000.0)

    # -- snapshots ------------------------------------------------------------

    def snapshot(self) -> dict:
        """Complete, deterministic state document; equal states serialize identically."""
        widgets: dict[str, dict] = {}
        for w in self.spec.widgets:
            st = self._states[w.id]
            if w.kind == "button":
                widgets[w.id] = {"kind": "button", "click_count": st.click_count}
            elif w.kind == "text_field":
                widgets[w.id] = {
                    "kind": "text_field",
                    "content": st.content,
                    "focused": st.focused,
                }
            elif w.kind == "checkbox":
                widgets[w.id] = {"kind": "checkbox", "checked": st.checked}
            elif w.kind == "slider":
                widgets[w.id] = {
                    "kind": "slider",
                    "value": self.slider_value(w.id),
                    "min": w.min_value,
                    "max": w.max_value,
                    "knob_x": st.knob_left,
                }
            elif w.kind == "tab_bar":
                widgets[w.id] = {
                    "kind": "tab_bar",
                    "active_tab": st.active_tab,
                    "tabs": list(w.tabs),
                }
        return {
            "resolution": {"width": self.spec.resolution.width, "height": self.spec.resolution.height},
            "clock_ms": self.clock_ms,
            "pointer": {"x": self.pointer.x, "y": self.pointer.y},
            "focus": self.focus,
            "event_count": len(self.event_log),
            "widgets": widgets,
        }

    def canonical_snapshot(self) -> bytes:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":")).encode()


#: Log-note prefixes proving an event actually landed on a widget.
INTERACTION_PREFIXES = (
    "click:",
    "toggle:",
    "focus:",
    "tab:",
    "slider:",
    "slider_page:",
    "committed:",
)


def interaction_count(log: Sequence[LogEntry]) -> int:
    """How many logged events hit a widget (vs. landing on dead space)."""
    return sum(
        1 for e in log if e.note is not None and e.note.startswith(INTERACTION_PREFIXES)
    )


_COORDINATE_KEYS = {"knob_x"}


def logical_state(snapshot: dict) -> dict:
    """Widget states with everything pixel-dependent stripped.

    Two screens at different resolutions that replayed the same logical
    actions compare equal under this projection.
    """
    widgets = {
        wid: {k: v for k, v in wstate.items() if k not in _COORDINATE_KEYS}
        for wid, wstate in snapshot["widgets"].items()
    }
    return {"focus": snapshot["focus"], "widgets": widgets}

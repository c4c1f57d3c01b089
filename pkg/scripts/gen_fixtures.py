#!/usr/bin/env python3
"""Generate (and verify) the demo fixtures: two remote screen specs at
different resolutions, the 20-entry mapping, the 20-step scenario script,
and the local agent config.

The 800x600 screen is derived from the 1920x1080 one by mapping rect
corners through the relative-coordinate transform, except the slider, whose
geometry is fitted so that every mapped target value quantizes exactly at
the smaller resolution too. The script refuses to write fixtures that do
not survive its own exhaustive checks, so a committed fixture set is known
good by construction.

Usage: python scripts/gen_fixtures.py [--out fixtures/]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from uisync.events import PixelCoord, Rect, Resolution, round_half_up, to_absolute, to_relative
from uisync.mapping import load_mapping
from uisync.screen import ClickConfig, VirtualScreen, load_screen_spec, logical_state
from uisync.slider import SliderGeometry

REF = Resolution(1920, 1080)
SMALL = Resolution(800, 600)

# -- 1920x1080 layout ---------------------------------------------------------

SLIDER_TRACK = Rect(200, 700, 612, 40)  # usable travel 600 px, 6 px per value unit
SLIDER_KNOB = 12

REMOTE_1920 = {
    "resolution": {"width": REF.width, "height": REF.height},
    "widgets": [
        {"id": "main_tabs", "kind": "tab_bar", "rect": {"x": 40, "y": 40, "w": 400, "h": 50},
         "tabs": ["Vitals", "Alarms"]},
        {"id": "hr_field", "kind": "text_field", "rect": {"x": 200, "y": 150, "w": 300, "h": 48}},
        {"id": "note_field", "kind": "text_field", "rect": {"x": 200, "y": 250, "w": 500, "h": 48}},
        {"id": "alarm_enabled", "kind": "checkbox", "rect": {"x": 200, "y": 350, "w": 40, "h": 40}},
        {"id": "apply_btn", "kind": "button", "rect": {"x": 200, "y": 450, "w": 160, "h": 56}},
        {"id": "silence_btn", "kind": "button", "rect": {"x": 420, "y": 450, "w": 160, "h": 56}},
        {"id": "o2_alert", "kind": "checkbox", "rect": {"x": 200, "y": 560, "w": 40, "h": 40},
         "tab": {"bar": "main_tabs", "index": 1}},
        {"id": "volume_slider", "kind": "slider",
         "rect": {"x": SLIDER_TRACK.x, "y": SLIDER_TRACK.y, "w": SLIDER_TRACK.w, "h": SLIDER_TRACK.h},
         "min": 0, "max": 100, "knob_width": SLIDER_KNOB, "initial": 20},
    ],
}


def scale_point(x: int, y: int) -> tuple[int, int]:
    p = to_absolute(to_relative(PixelCoord(x, y), REF), SMALL)
    return p.x, p.y


def scale_rect(r: dict) -> dict:
    x1, y1 = scale_point(r["x"], r["y"])
    x2, y2 = scale_point(r["x"] + r["w"] - 1, r["y"] + r["h"] - 1)
    return {"x": x1, "y": y1, "w": x2 - x1 + 1, "h": y2 - y1 + 1}


def fit_small_slider() -> dict:
    """Pick slider geometry at SMALL so every target value lands exactly.

    A drag target for value v is authored at the reference knob center
    (integer pixel), stored relative, and resolved by rounding; the fitted
    geometry must quantize each resolved pixel back to v, with margin.
    """
    ref_geo = SliderGeometry(SLIDER_TRACK, SLIDER_KNOB, 0, 100)
    resolved = {
        v: to_absolute(to_relative(PixelCoord(round_half_up(ref_geo.center_for_value(v)),
                                              SLIDER_TRACK.y), REF), SMALL).x
        for v in range(0, 101)
    }
    span = 100
    best = None
    y1, y2 = scale_point(SLIDER_TRACK.x, SLIDER_TRACK.y)[1], scale_point(
        SLIDER_TRACK.x, SLIDER_TRACK.y + SLIDER_TRACK.h - 1)[1]
    endpoint_x = scale_point(SLIDER_TRACK.x, SLIDER_TRACK.y)[0]
    for usable in (249, 250, 251):
        for kw in (6, 7, 8):
            for track_x in range(endpoint_x - kw, endpoint_x + 1):
                geo = SliderGeometry(Rect(track_x, y1, usable + kw, y2 - y1 + 1), kw, 0, span)
                worst = max(
                    abs(resolved[v] - geo.center_for_value(v)) for v in range(0, span + 1)
                )
                exact = all(geo.value_for_center(resolved[v]) == v for v in range(0, span + 1))
                # the endpoint click must land on the track and pin to min
                pin_ok = geo.track.contains(endpoint_x, y1) and endpoint_x <= geo.clamp_center(endpoint_x)
                if exact and pin_ok and (best is None or worst < best[0]):
                    best = (worst, geo)
    if best is None:
        raise SystemExit("no exact small-slider geometry found; adjust the layout")
    worst, geo = best
    print(f"small slider fit: track={geo.track} kw={geo.knob_width} worst error {worst:.2f} px")
    return {
        "id": "volume_slider", "kind": "slider",
        "rect": {"x": geo.track.x, "y": geo.track.y, "w": geo.track.w, "h": geo.track.h},
        "min": 0, "max": span, "knob_width": geo.knob_width, "initial": 20,
    }


def build_remote_800() -> dict:
    widgets = []
    for w in REMOTE_1920["widgets"]:
        if w["id"] == "volume_slider":
            widgets.append(fit_small_slider())
            continue
        scaled = dict(w)
        scaled["rect"] = scale_rect(w["rect"])
        widgets.append(scaled)
    return {"resolution": {"width": SMALL.width, "height": SMALL.height}, "widgets": widgets}


# -- mapping ------------------------------------------------------------------

def center_of(widget_id: str) -> tuple[int, int]:
    for w in REMOTE_1920["widgets"]:
        if w["id"] == widget_id:
            r = w["rect"]
            return r["x"] + r["w"] // 2, r["y"] + r["h"] // 2
    raise KeyError(widget_id)


def set_field(widget_id: str, text: str) -> list[dict]:
    x, y = center_of(widget_id)
    return [
        {"type": "move", "x": x, "y": y},
        {"type": "click"},
        {"type": "key", "key": "CTRL_A"},
        {"type": "key", "key": "DELETE"},
        {"type": "type_text", "text": text},
        {"type": "key", "key": "ENTER"},
    ]


def click_widget(widget_id: str) -> list[dict]:
    x, y = center_of(widget_id)
    return [{"type": "move", "x": x, "y": y}, {"type": "click"}]


def tab_click(index: int) -> list[dict]:
    bar = REMOTE_1920["widgets"][0]["rect"]
    x = bar["x"] + bar["w"] * (2 * index + 1) // 4  # center of the tab slice
    return [{"type": "move", "x": x, "y": bar["y"] + bar["h"] // 2}, {"type": "click"}]


def slider_set(value: int) -> list[dict]:
    t = SLIDER_TRACK
    return [{
        "type": "slider_set",
        "track": {"x": t.x, "y": t.y, "w": t.w, "h": t.h},
        "knob_width": SLIDER_KNOB, "min": 0, "max": 100, "value": value,
    }]


def entry(widget_id: str, action: str, payload, events: list[dict]) -> dict:
    key = {"interface_id": "local", "widget_id": widget_id, "action": action}
    if payload is not None:
        key["payload"] = payload
    return {"key": key, "events": events}


def build_mapping() -> dict:
    ref_geo = SliderGeometry(SLIDER_TRACK, SLIDER_KNOB, 0, 100)
    cy = SLIDER_TRACK.y + SLIDER_TRACK.h // 2
    drag_from = round_half_up(ref_geo.center_for_value(55))
    drag_to = round_half_up(ref_geo.center_for_value(60))
    entries = [
        entry("hr_field", "set_value", "72", set_field("hr_field", "72")),
        entry("hr_field", "set_value", "80", set_field("hr_field", "80")),
        entry("hr_field", "set_value", "64", set_field("hr_field", "64")),
        entry("note_field", "set_text", "stable", set_field("note_field", "stable")),
        entry("note_field", "set_text", "bp low", set_field("note_field", "bp low")),
        entry("note_commit", "key", "ENTER", [
            {"type": "move", "x": center_of("note_field")[0], "y": center_of("note_field")[1]},
            {"type": "click"},
            {"type": "type_text", "text": "!"},
            {"type": "key", "key": "ENTER"},
        ]),
        entry("alarm_enabled", "toggle", None, click_widget("alarm_enabled")),
        entry("apply_btn", "click", None, click_widget("apply_btn")),
        entry("silence_btn", "click", None, [
            {"type": "move", "x": center_of("silence_btn")[0], "y": center_of("silence_btn")[1]},
            {"type": "press"},
            {"type": "delay", "ms": 120},
            {"type": "release"},
        ]),
        # o2_alert lives on the Alarms tab; the entry switches there first so
        # it is self-contained on a fresh screen.
        entry("o2_alert", "toggle", None, tab_click(1) + click_widget("o2_alert")),
        entry("main_tabs", "set_value", "Alarms", tab_click(1)),
        entry("main_tabs", "set_value", "Vitals", tab_click(0)),
        # A hand-authored drag needs the knob at a known spot first, so the
        # entry pins it to 55 before dragging; that keeps it valid on a
        # fresh screen, not just mid-scenario.
        entry("vol_drag", "set_value", "60", slider_set(55) + [
            {"type": "drag", "from": {"x": drag_from, "y": cy}, "to": {"x": drag_to, "y": cy}},
        ]),
    ]
    for value in (0, 25, 30, 50, 55, 75, 100):
        entries.append(entry("volume_slider", "set_value", str(value), slider_set(value)))
    return {
        "reference_resolution": {"width": REF.width, "height": REF.height},
        "click_delay_ms": 200,
        "page_step_fraction": 0.25,
        "entries": entries,
    }


SCENARIOS = """\
# Demo synchronization requirements: 20 actions covering every widget kind
# and every event variant. Lines are <interface> <widget> <action> [payload];
# `sleep <ms>` pauses between actions.
local hr_field set_value 72
local apply_btn click
sleep 10
local alarm_enabled toggle
local note_field set_text stable
local volume_slider set_value 75
sleep 10
local hr_field set_value 80
local volume_slider set_value 30
local silence_btn click
local main_tabs set_value Alarms
local o2_alert toggle
sleep 10
local main_tabs set_value Vitals
local volume_slider set_value 100
local note_field set_text "bp low"
local volume_slider set_value 55
local vol_drag set_value 60
sleep 10
local apply_btn click
local hr_field set_value 64
local note_commit key ENTER
local alarm_enabled toggle
local apply_btn click
"""

LOCAL_CONFIG = {
    "endpoints": [
        {"host": "127.0.0.1", "port": 7001, "interface_id": "remote-a"},
        {"host": "127.0.0.1", "port": 7002, "interface_id": "remote-b"},
    ],
    "session_key_hex": "8e7d3f2a1b4c5d6e7f8091a2b3c4d5e6",
    "mapping_path": "demo_mapping.json",
    "keepalive_interval_ms": 5000,
    "ack_wait_ms": 5000,
}


# -- verification ---------------------------------------------------------------

def verify(out: Path) -> None:
    loaded = load_mapping(out / "demo_mapping.json")
    specs = {
        "1920": load_screen_spec(out / "demo_remote_1920.json"),
        "800": load_screen_spec(out / "demo_remote_800.json"),
    }
    cfg = ClickConfig(click_delay_ms=loaded.click_delay_ms)

    # every mapped slider target must land exactly at both resolutions,
    # from a spread of knob start positions
    from uisync.mapping import Action, InputKey

    for name, spec in specs.items():
        for value in (0, 25, 30, 50, 55, 75, 100):
            key = InputKey("local", "volume_slider", Action.SET_VALUE, str(value))
            resolved = loaded.table.resolve(key, spec.resolution)
            for start in range(0, spec.widget("volume_slider").slider_geometry().usable + 1, 7):
                screen = VirtualScreen(spec)
                screen.force_slider_knob(
                    "volume_slider", spec.widget("volume_slider").rect.x + start
                )
                screen.replay(resolved, cfg)
                got = screen.slider_value("volume_slider")
                assert got == value, f"{name}: target {value} from start {start} gave {got}"

    # the whole scenario suite must leave both screens in identical logical states
    from uisync.local_agent import parse_script
    from uisync.local_agent import encode_input
    entries = parse_script((out / "demo_scenarios.txt").read_text())
    finals = {}
    for name, spec in specs.items():
        screen = VirtualScreen(spec)
        for _line_no, _text, parsed in entries:
            if isinstance(parsed, int):
                continue
            key = encode_input(parsed)
            resolved = loaded.table.resolve(key, spec.resolution)
            screen.replay(resolved, cfg)
        finals[name] = logical_state(screen.snapshot())
    assert finals["1920"] == finals["800"], (
        "logical end states differ:\n"
        + json.dumps(finals["1920"], indent=2)
        + "\n"
        + json.dumps(finals["800"], indent=2)
    )
    n_actions = sum(1 for _, _, p in entries if isinstance(p, dict))
    print(f"verified: {n_actions} scenario actions, logical end states identical")
    print(json.dumps(finals["1920"], indent=2))


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "fixtures"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    (out / "demo_remote_1920.json").write_text(json.dumps(REMOTE_1920, indent=2) + "\n")
    (out / "demo_remote_800.json").write_text(json.dumps(build_remote_800(), indent=2) + "\n")
    (out / "demo_mapping.json").write_text(json.dumps(build_mapping(), indent=2) + "\n")
    (out / "demo_scenarios.txt").write_text(SCENARIOS)
    (out / "demo_local_config.json").write_text(json.dumps(LOCAL_CONFIG, indent=2) + "\n")
    (out / "demo_key.txt").write_text(LOCAL_CONFIG["session_key_hex"] + "\n")
    verify(out)
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()

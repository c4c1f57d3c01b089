"""Slider planning checked against replay on the virtual screen: the plan is
analytic, the oracle is the event-level state machine, and they must agree
exactly under the shared quantization rule."""

import random

import pytest

from uisync.events import Drag, MouseClick, MouseMove, PixelCoord, Rect
from uisync.mapping import (
    PlanInfeasible,
    SliderPlanConfig,
    SliderSpec,
    ValueOutOfRange,
    plan_slider_set,
)
from uisync.screen import VirtualScreen, load_screen_spec
from uisync.slider import SliderGeometry


def make_screen(track: Rect, kw: int, vmin: int, vmax: int, page_step=None, initial=None):
    widget = {
        "id": "sl",
        "kind": "slider",
        "rect": {"x": track.x, "y": track.y, "w": track.w, "h": track.h},
        "min": vmin,
        "max": vmax,
        "knob_width": kw,
    }
    if page_step is not None:
        widget["page_step"] = page_step
    if initial is not None:
        widget["initial"] = initial
    return load_screen_spec(
        {"resolution": {"width": 1920, "height": 1080}, "widgets": [widget]}
    )


TRACK = Rect(100, 500, 210, 20)  # usable 200 with kw 10
GEO = SliderGeometry(TRACK, 10, 0, 100)


def spec_for(page_step=None, initial=None) -> SliderSpec:
    return SliderSpec(GEO, page_step if page_step is not None else GEO.default_page_step(), initial)


def test_degenerate_plan_no_clicks():
    plan = plan_slider_set(spec_for(initial=0), 0)
    assert [type(e) for e in plan] == [MouseMove, Drag]
    drag = plan[1]
    assert drag.start == drag.end


def test_unknown_start_plans_max_clicks():
    plan = plan_slider_set(spec_for(), 75)
    clicks = [e for e in plan if isinstance(e, MouseClick)]
    assert len(clicks) == 4  # worst case with the default quarter page step


def test_known_start_plans_fewer_clicks():
    plan = plan_slider_set(spec_for(initial=25), 75)
    clicks = [e for e in plan if isinstance(e, MouseClick)]
    assert len(clicks) == 1  # 25% of travel is one page step away


def test_target_out_of_range():
    with pytest.raises(ValueOutOfRange):
        plan_slider_set(spec_for(), 101)
    with pytest.raises(ValueOutOfRange):
        plan_slider_set(spec_for(), -1)


def test_plan_infeasible_with_tiny_page_step():
    with pytest.raises(PlanInfeasible):
        plan_slider_set(SliderSpec(GEO, page_step=5.0), 50)


def test_right_endpoint_policy():
    plan = plan_slider_set(spec_for(), 30, SliderPlanConfig(endpoint="right"))
    move = plan[0]
    assert isinstance(move, MouseMove)
    assert move.pos.x == GEO.right_endpoint_x()


def test_plan_spec_example_oracle():
    # slider min=0 max=100, track x in [100,300], knob 10, knob at 50, target 75:
    # oracle = replay on the virtual screen, asserted equal to the plan's result
    track = Rect(100, 500, 200, 20)
    geo = SliderGeometry(track, 10, 0, 100)
    plan = plan_slider_set(SliderSpec(geo, geo.default_page_step(), initial_value=50), 75)
    screen = VirtualScreen(make_screen(track, 10, 0, 100, initial=50))
    screen.replay(plan)
    assert screen.slider_value("sl") == 75


@pytest.mark.parametrize("endpoint", ["left", "right"])
def test_plans_sound_from_any_actual_start(endpoint):
    # worst-case plans must land exactly even when the real knob position
    # differs from any assumption (extra clicks pin the knob at the endpoint)
    screen_spec = make_screen(TRACK, 10, 0, 100)
    rng = random.Random(3)
    for _ in range(40):
        target = rng.randrange(0, 101)
        start = rng.randrange(0, GEO.usable + 1)
        plan = plan_slider_set(spec_for(), target, SliderPlanConfig(endpoint=endpoint))
        screen = VirtualScreen(screen_spec)
        screen.force_slider_knob("sl", TRACK.x + start)
        screen.replay(plan)
        assert screen.slider_value("sl") == target, (endpoint, start, target)


def test_500_random_specs_and_targets_replay_exactly():
    rng = random.Random(12345)
    for trial in range(500):
        vmin = rng.randrange(-50, 50)
        vmax = vmin + rng.randrange(2, 120)
        span = vmax - vmin
        kw = rng.randrange(4, 20)
        usable = rng.randrange(max(span, 40), 600)  # at least ~1 px per unit
        track = Rect(rng.randrange(0, 800), rng.randrange(0, 900), usable + kw, 24)
        geo = SliderGeometry(track, kw, vmin, vmax)
        page = geo.default_page_step()
        target = rng.randrange(vmin, vmax + 1)
        start_value = rng.randrange(vmin, vmax + 1)
        plan = plan_slider_set(SliderSpec(geo, page), target)
        screen = VirtualScreen(
            make_screen(track, kw, vmin, vmax, initial=start_value)
        )
        screen.replay(plan)
        got = screen.slider_value("sl")
        assert got == target, (trial, track, kw, vmin, vmax, start_value, target, got)


def test_click_bound_exhaustive_small_slider():
    # page_step >= usable/4 keeps every start within four clicks (1-px sweep)
    geo = SliderGeometry(Rect(50, 50, 130, 12), 10, 0, 30)  # usable 120
    page = geo.usable / 4
    for start in range(0, geo.usable + 1):
        plan = plan_slider_set(
            SliderSpec(geo, page),
            15,
            SliderPlanConfig(assume_knob_left=float(geo.track.x + start)),
        )
        clicks = sum(isinstance(e, MouseClick) for e in plan)
        assert clicks <= 4, (start, clicks)


def test_fixed_point_drag_quantization():
    # drag to x, read value, drag to that value's own pixel: value unchanged
    screen_spec = make_screen(TRACK, 10, 0, 100, initial=0)
    geo = GEO
    cy = TRACK.y + TRACK.h // 2
    for x in range(TRACK.x, TRACK.x + TRACK.w, 7):
        screen = VirtualScreen(screen_spec)
        knob_center = geo.center_for_value(0)
        screen.replay([Drag(PixelCoord(int(knob_center), cy), PixelCoord(x, cy))])
        v1 = screen.slider_value("sl")
        vx = int(geo.center_for_value(v1))
        screen.replay([Drag(PixelCoord(vx, cy), PixelCoord(vx, cy))])
        assert screen.slider_value("sl") == v1, x

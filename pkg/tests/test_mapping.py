import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from uisync.events import (
    CoordOutOfRange,
    Delay,
    Drag,
    KeyPress,
    MouseClick,
    MouseMove,
    PixelCoord,
    RelativeCoord,
    Resolution,
    TypeText,
    to_absolute,
    to_relative,
)
from uisync.mapping import (
    Action,
    DuplicateKey,
    EventSequence,
    InputKey,
    MappingTable,
    SchemaError,
    UnmappedInput,
    load_mapping,
)

REF = Resolution(1920, 1080)


def seq_of(*events) -> EventSequence:
    return EventSequence(events=tuple(events), reference_resolution=REF)


# -- coordinate adaptation ------------------------------------------------------


def test_origin_maps_to_zero():
    for res in (Resolution(1920, 1080), Resolution(2, 2), Resolution(1, 1)):
        assert to_relative(PixelCoord(0, 0), res) == RelativeCoord(0.0, 0.0)


def test_max_index_maps_to_one():
    assert to_relative(PixelCoord(1919, 1079), REF) == RelativeCoord(1.0, 1.0)


def test_center_fractions():
    r = to_relative(PixelCoord(959, 539), REF)
    assert r.rx == pytest.approx(959 / 1919)
    assert r.ry == pytest.approx(539 / 1079)
    assert r.rx == pytest.approx(0.49974, abs=1e-5)
    assert r.ry == pytest.approx(0.49954, abs=1e-5)


def test_absolute_extremes():
    assert to_absolute(RelativeCoord(1.0, 1.0), Resolution(800, 600)) == PixelCoord(799, 599)
    assert to_absolute(RelativeCoord(0.0, 0.0), Resolution(800, 600)) == PixelCoord(0, 0)


def test_absolute_midpoint_odd_dimensions():
    assert to_absolute(RelativeCoord(0.5, 0.5), Resolution(801, 601)) == PixelCoord(400, 300)


def test_out_of_range_pixel_rejected():
    with pytest.raises(CoordOutOfRange):
        to_relative(PixelCoord(1920, 0), REF)
    with pytest.raises(CoordOutOfRange):
        to_relative(PixelCoord(0, -1), REF)


def test_roundtrip_exhaustive_37x23():
    res = Resolution(37, 23)
    mismatches = 0
    for x in range(37):
        for y in range(23):
            p = PixelCoord(x, y)
            if to_absolute(to_relative(p, res), res) != p:
                mismatches += 1
    assert mismatches == 0


@given(
    st.integers(min_value=1, max_value=4000),
    st.integers(min_value=1, max_value=4000),
    st.data(),
)
def test_roundtrip_random_resolutions(w, h, data):
    res = Resolution(w, h)
    x = data.draw(st.integers(min_value=0, max_value=w - 1))
    y = data.draw(st.integers(min_value=0, max_value=h - 1))
    p = PixelCoord(x, y)
    assert to_absolute(to_relative(p, res), res) == p


@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.integers(min_value=1, max_value=5000),
)
def test_to_absolute_monotone(rx1, rx2, width):
    lo, hi = sorted((rx1, rx2))
    res = Resolution(width, 100)
    x1 = to_absolute(RelativeCoord(lo, 0.0), res).x
    x2 = to_absolute(RelativeCoord(hi, 0.0), res).x
    assert x1 <= x2
    assert 0 <= x1 and x2 < width


def test_relative_coord_validates_range():
    with pytest.raises(ValueError):
        RelativeCoord(1.0001, 0.0)


# -- input keys ------------------------------------------------------------------


def test_key_identity_includes_payload():
    a = InputKey("local", "hr", Action.SET_VALUE, "72")
    b = InputKey("local", "hr", Action.SET_VALUE, "73")
    assert a != b
    assert a.stable_hash() != b.stable_hash()
    assert a == InputKey("local", "hr", Action.SET_VALUE, "72")


def test_key_none_payload_distinct_from_empty():
    assert InputKey("i", "w", Action.KEY, None) != InputKey("i", "w", Action.KEY, "")
    assert (
        InputKey("i", "w", Action.KEY, None).stable_hash()
        != InputKey("i", "w", Action.KEY, "").stable_hash()
    )


def test_action_parse():
    assert Action.parse("set_value") is Action.SET_VALUE
    assert Action.parse("CLICK") is Action.CLICK
    with pytest.raises(SchemaError):
        Action.parse("mash")


# -- store ------------------------------------------------------------------------


def test_put_then_get():
    t = MappingTable()
    k = InputKey("local", "hr", Action.SET_VALUE, "72")
    s = seq_of(MouseClick())
    t.put(k, s)
    assert t.get(k) == s


def test_put_replaces_equal_key():
    t = MappingTable()
    k = InputKey("local", "hr", Action.SET_VALUE, "72")
    s1, s2 = seq_of(MouseClick()), seq_of(KeyPress("ENTER"))
    t.put(k, s1)
    t.put(k, s2)
    assert t.get(k) == s2
    assert len(t) == 1


def test_get_on_empty_table_is_miss():
    assert MappingTable().get(InputKey("i", "w", Action.CLICK)) is None


def _random_key(rng: random.Random) -> InputKey:
    return InputKey(
        rng.choice(["a", "b", "local"]),
        f"w{rng.randrange(4000)}",
        rng.choice(list(Action)),
        rng.choice([None, str(rng.randrange(100))]),
    )


def test_store_matches_dict_oracle_bulk():
    rng = random.Random(7)
    t = MappingTable()
    oracle: dict[InputKey, EventSequence] = {}
    for i in range(10_000):
        k = _random_key(rng)
        s = seq_of(Delay(i))
        t.put(k, s)
        oracle[k] = s
    assert len(t) == len(oracle)
    for k, s in oracle.items():
        assert t.get(k) == s
    for _ in range(500):
        k = _random_key(rng)
        assert t.get(k) == oracle.get(k)


def test_collisions_all_in_one_bucket_still_work():
    t = MappingTable(hash_fn=lambda k: 0)  # every key collides
    keys = [InputKey("i", f"w{i}", Action.CLICK, None) for i in range(200)]
    for i, k in enumerate(keys):
        t.put(k, seq_of(Delay(i)))
    for i, k in enumerate(keys):
        assert t.get(k) == seq_of(Delay(i))
    assert t.get(InputKey("i", "nope", Action.CLICK, None)) is None


def test_hash_independence():
    # behavior identical under the default hash and a constant hash
    rng = random.Random(11)
    ops = [(_random_key(rng), seq_of(Delay(i))) for i in range(800)]
    t_default, t_const = MappingTable(), MappingTable(hash_fn=lambda k: 12345)
    for k, s in ops:
        t_default.put(k, s)
        t_const.put(k, s)
    assert len(t_default) == len(t_const)
    for k, _ in ops:
        assert t_default.get(k) == t_const.get(k)


def test_table_iterates_all_entries():
    t = MappingTable()
    keys = {InputKey("i", f"w{i}", Action.CLICK, None) for i in range(50)}
    for k in keys:
        t.put(k, seq_of(Delay(1)))
    assert {k for k, _ in t} == keys


# -- resolve -----------------------------------------------------------------------


def figure3_table() -> MappingTable:
    doc = {
        "reference_resolution": {"width": 1920, "height": 1080},
        "entries": [
            {
                "key": {
                    "interface_id": "local",
                    "widget_id": "hr_field",
                    "action": "set_value",
                    "payload": "72",
                },
                "events": [
                    {"type": "move", "x": 350, "y": 174},
                    {"type": "click"},
                    {"type": "type_text", "text": "72"},
                    {"type": "key", "key": "ENTER"},
                ],
            }
        ],
    }
    return load_mapping(doc).table


def test_figure3_entry_structure():
    table = figure3_table()
    seq = table.get(InputKey("local", "hr_field", Action.SET_VALUE, "72"))
    assert seq is not None
    kinds = [type(e).__name__ for e in seq.events]
    assert kinds == ["MouseMove", "MouseClick", "TypeText", "KeyPress"]
    assert seq.events[2] == TypeText("72")
    assert seq.events[3] == KeyPress("ENTER")


def test_resolve_differs_only_in_coordinates():
    table = figure3_table()
    k = InputKey("local", "hr_field", Action.SET_VALUE, "72")
    big = table.resolve(k, Resolution(1920, 1080))
    small = table.resolve(k, Resolution(800, 600))
    assert [type(e) for e in big.events] == [type(e) for e in small.events]
    assert big.events[1:] == small.events[1:]  # only the move carries coordinates
    assert big.events[0] != small.events[0]


def test_resolve_at_reference_reproduces_authored_pixels():
    table = figure3_table()
    k = InputKey("local", "hr_field", Action.SET_VALUE, "72")
    resolved = table.resolve(k, Resolution(1920, 1080))
    assert resolved.events[0] == MouseMove(PixelCoord(350, 174))


def test_resolve_miss_is_unmapped_input():
    with pytest.raises(UnmappedInput):
        figure3_table().resolve(InputKey("local", "nope", Action.CLICK, None), REF)


def test_resolve_keeps_composites_unexpanded():
    table = figure3_table()
    k = InputKey("local", "hr_field", Action.SET_VALUE, "72")
    resolved = table.resolve(k, Resolution(800, 600))
    assert isinstance(resolved.events[1], MouseClick)
    assert isinstance(resolved.events[2], TypeText)


# -- loader ---------------------------------------------------------------------


def _doc(entries, **header):
    return {
        "reference_resolution": {"width": 1920, "height": 1080},
        "entries": entries,
        **header,
    }


def _entry(widget="w", action="click", payload=None, events=None):
    key = {"interface_id": "local", "widget_id": widget, "action": action}
    if payload is not None:
        key["payload"] = payload
    return {"key": key, "events": events if events is not None else [{"type": "click"}]}


def test_load_three_entries():
    loaded = load_mapping(_doc([_entry("a"), _entry("b"), _entry("c")]))
    assert len(loaded.table) == 3
    assert loaded.click_delay_ms == 200


def test_load_rejects_duplicate_key():
    with pytest.raises(DuplicateKey):
        load_mapping(_doc([_entry("a"), _entry("a")]))


def test_load_rejects_coordinate_at_width():
    doc = _doc([_entry(events=[{"type": "move", "x": 1920, "y": 0}])])
    with pytest.raises(CoordOutOfRange) as exc:
        load_mapping(doc)
    assert "1920" in str(exc.value)


def test_load_rejects_unknown_event():
    with pytest.raises(SchemaError):
        load_mapping(_doc([_entry(events=[{"type": "warp", "x": 1, "y": 1}])]))


def test_load_rejects_unknown_entry_field():
    doc = _doc([{**_entry(), "color": "red"}])
    with pytest.raises(SchemaError):
        load_mapping(doc)


def test_load_rejects_unknown_header_field():
    with pytest.raises(SchemaError):
        load_mapping(_doc([_entry()], retries=3))


def test_load_rejects_unknown_event_field():
    with pytest.raises(SchemaError):
        load_mapping(_doc([_entry(events=[{"type": "move", "x": 1, "y": 1, "z": 9}])]))


def test_load_rejects_empty_events_without_noop():
    with pytest.raises(SchemaError):
        load_mapping(_doc([_entry(events=[])]))


def test_load_allows_declared_noop():
    doc = _doc([{**_entry(events=[]), "noop": True}])
    loaded = load_mapping(doc)
    key = InputKey("local", "w", Action.CLICK, None)
    assert loaded.table.get(key) == EventSequence(events=(), reference_resolution=REF)


def test_load_reports_entry_context():
    doc = _doc([_entry("ok"), _entry("bad", events=[{"type": "move", "x": -1, "y": 0}])])
    with pytest.raises(CoordOutOfRange) as exc:
        load_mapping(doc)
    assert "bad" in str(exc.value)


def test_load_converts_drag_coords_relative():
    doc = _doc(
        [_entry(events=[{"type": "drag", "from": {"x": 0, "y": 0}, "to": {"x": 1919, "y": 1079}}])]
    )
    loaded = load_mapping(doc)
    seq = loaded.table.get(InputKey("local", "w", Action.CLICK, None))
    drag = seq.events[0]
    assert isinstance(drag, Drag)
    assert drag.start == RelativeCoord(0.0, 0.0)
    assert drag.end == RelativeCoord(1.0, 1.0)


def test_shipped_demo_mapping_loads_clean():
    from conftest import FIXTURES

    loaded = load_mapping(FIXTURES / "demo_mapping.json")
    assert len(loaded.table) == 20
    assert loaded.click_delay_ms == 200

import json
import subprocess
import sys

import pytest

from conftest import FIXTURES, KEY_HEX, make_remote, write_config_file
from uisync.cli import main
from uisync.protocol import SessionKey
from uisync.screen import load_screen_spec

KEY = SessionKey.from_hex(KEY_HEX)


@pytest.fixture
def demo_remotes():
    ra = make_remote(load_screen_spec(FIXTURES / "demo_remote_1920.json"), KEY)
    rb = make_remote(load_screen_spec(FIXTURES / "demo_remote_800.json"), KEY)
    yield ra, rb
    ra.stop()
    rb.stop()


# -- map-validate ------------------------------------------------------------


def test_map_validate_shipped_fixtures_pass(capsys):
    rc = main([
        "map-validate",
        str(FIXTURES / "demo_mapping.json"),
        str(FIXTURES / "demo_remote_1920.json"),
        str(FIXTURES / "demo_remote_800.json"),
    ])
    out = capsys.readouterr().out
    assert rc == 0
    assert "all entries validated" in out
    assert "FAIL" not in out


def test_map_validate_flags_absent_widget(tmp_path, capsys):
    mapping = {
        "reference_resolution": {"width": 1920, "height": 1080},
        "entries": [
            {
                "key": {"interface_id": "local", "widget_id": "ghost", "action": "click"},
                "events": [{"type": "move", "x": 10, "y": 1000}, {"type": "click"}],
            }
        ],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mapping))
    rc = main(["map-validate", str(path), str(FIXTURES / "demo_remote_1920.json")])
    out = capsys.readouterr().out
    assert rc == 3
    assert "FAIL" in out and "ghost" in out


def test_map_validate_flags_slider_target_out_of_range(tmp_path, capsys):
    mapping = {
        "reference_resolution": {"width": 1920, "height": 1080},
        "entries": [
            {
                "key": {"interface_id": "local", "widget_id": "vol", "action": "set_value",
                        "payload": "150"},
                "events": [{
                    "type": "slider_set",
                    "track": {"x": 200, "y": 700, "w": 612, "h": 40},
                    "knob_width": 12, "min": 0, "max": 100, "value": 150,
                }],
            }
        ],
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(mapping))
    rc = main(["map-validate", str(path), str(FIXTURES / "demo_remote_1920.json")])
    err = capsys.readouterr().err
    assert rc == 3
    assert "150" in err


def test_map_validate_reports_schema_error_location(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({
        "reference_resolution": {"width": 100, "height": 100},
        "entries": [{"key": {"interface_id": "a", "widget_id": "b", "action": "click"},
                     "events": [{"type": "sparkle"}]}],
    }))
    rc = main(["map-validate", str(path), str(FIXTURES / "demo_remote_1920.json")])
    err = capsys.readouterr().err
    assert rc == 3
    assert "sparkle" in err and "entry 0" in err


# -- connect send / run-script -------------------------------------------------


def test_send_one_action_end_to_end(tmp_path, capsys, demo_remotes):
    ra, rb = demo_remotes
    cfg = write_config_file(tmp_path, [(ra.port, "remote-a"), (rb.port, "remote-b")])
    rc = main(["connect", "--config", str(cfg), "send", "local", "hr_field", "set_value", "72"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "2 endpoint(s) synchronized" in out
    assert ra.snapshot()["widgets"]["hr_field"]["content"] == "72"
    assert rb.snapshot()["widgets"]["hr_field"]["content"] == "72"


def test_send_unmapped_warns_exit_zero(tmp_path, capsys, demo_remotes):
    ra, rb = demo_remotes
    cfg = write_config_file(tmp_path, [(ra.port, "remote-a"), (rb.port, "remote-b")])
    rc = main(["connect", "--config", str(cfg), "send", "local", "nosuch", "click"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "unmapped" in out
    assert "0 endpoint(s) synchronized" in out


def test_send_all_endpoints_down_exits_2(tmp_path, capsys):
    import socket

    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    dead = probe.getsockname()[1]
    probe.close()
    cfg = write_config_file(tmp_path, [(dead, "remote-a")], max_retries=1,
                            backoff_initial_ms=10)
    rc = main(["connect", "--config", str(cfg), "send", "local", "hr_field", "set_value", "72"])
    assert rc == 2


def test_run_script_demo_suite(tmp_path, capsys, demo_remotes):
    ra, rb = demo_remotes
    cfg = write_config_file(tmp_path, [(ra.port, "remote-a"), (rb.port, "remote-b")])
    rc = main(["connect", "--config", str(cfg), "run-script", str(FIXTURES / "demo_scenarios.txt")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "20/20 passed" in out
    assert "ack latency" in out


def test_config_error_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    rc = main(["connect", "--config", str(path), "send", "a", "b", "click"])
    assert rc == 1


def test_bad_key_file_exits_1_naming_file(tmp_path, capsys):
    key_path = tmp_path / "short_key.txt"
    key_path.write_text("abcd")
    rc = main(["serve", "--key-file", str(key_path), "--screen-spec",
               str(FIXTURES / "demo_remote_1920.json")])
    err = capsys.readouterr().err
    assert rc == 1
    assert "short_key.txt" in err


# -- serve as a subprocess ---------------------------------------------------------


def _spawn_serve(port, extra=()):
    return subprocess.Popen(
        [sys.executable, "-m", "uisync", "serve", "--port", str(port),
         "--key-file", str(FIXTURES / "demo_key.txt"),
         "--screen-spec", str(FIXTURES / "demo_remote_1920.json"), *extra],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )


def test_serve_listens_and_port_conflict_exits_nonzero(tmp_path):
    import socket

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    proc = _spawn_serve(port)
    try:
        line = proc.stdout.readline()
        assert f"listening on port {port}" in line
        # second serve on the same port must fail fast with AddressInUse
        second = _spawn_serve(port)
        out, _ = second.communicate(timeout=15)
        assert second.returncode == 2
        assert "AddressInUse" in out
    finally:
        proc.terminate()
        proc.wait(timeout=10)

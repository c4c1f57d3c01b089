"""Command-line entry points: serve, connect (send / run-script / bridge),
and map-validate.

Exit codes: 0 success or partial-with-warnings, 1 config error,
2 connectivity failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import errno
import logging
import sys
import time
from pathlib import Path

from .events import CoordOutOfRange
from .local_agent import (
    BadInput,
    ConfigError,
    LocalAgent,
    ScriptError,
    build_bridge_app,
    load_agent_config,
)
from .mapping import MappingError, load_mapping
from .protocol import SessionKey
from .remote_agent import RemoteAgent
from .screen import (
    ClickConfig,
    ReplayError,
    ScreenSpecError,
    VirtualScreen,
    interaction_count,
    load_screen_spec,
    logical_state,
)
from .webutil import HttpServerThread

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONNECTIVITY = 2
EXIT_VALIDATION = 3


def _read_key_file(path: str) -> SessionKey:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read key file {path}: {e}") from None
    try:
        return SessionKey.from_hex(text)
    except ValueError as e:
        raise ConfigError(f"key file {path}: {e}") from None


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        key = _read_key_file(args.key_file)
        spec = load_screen_spec(args.screen_spec)
    except (ConfigError, ScreenSpecError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    agent = RemoteAgent(
        spec,
        key,
        port=args.port,
        real_time=args.real_time,
        ack_enabled=not args.no_ack,
        multi_writer=args.multi_writer,
        state_port=args.state_port,
    )
    try:
        agent.start()
    except OSError as e:
        if e.errno == errno.EADDRINUSE:
            print(f"error: AddressInUse: port {args.port} is taken", file=sys.stderr)
        else:
            print(f"error: cannot bind port {args.port}: {e}", file=sys.stderr)
        return EXIT_CONNECTIVITY
    print(f"listening on port {agent.port}", flush=True)
    if args.state_port is not None:
        print(f"state endpoint on http://127.0.0.1:{agent.http_port}/state", flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        agent.stop()
    return EXIT_OK


def _start_agent(config_path: str) -> tuple[LocalAgent, int]:
    try:
        config = load_agent_config(config_path)
        agent = LocalAgent(config)
    except (ConfigError, MappingError, CoordOutOfRange, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return None, EXIT_CONFIG  # type: ignore[return-value]
    agent.start()
    states = agent.wait_ready()
    for iface, state in states.items():
        print(f"endpoint {iface}: {state}")
    if all(state == "down" for state in states.values()):
        print("error: all endpoints are down", file=sys.stderr)
        agent.stop()
        return None, EXIT_CONNECTIVITY  # type: ignore[return-value]
    return agent, EXIT_OK


def cmd_send(args: argparse.Namespace) -> int:
    agent, rc = _start_agent(args.config)
    if agent is None:
        return rc
    try:
        raw = {"interface_id": args.interface, "widget_id": args.widget, "action": args.action}
        if args.payload is not None:
            raw["payload"] = args.payload
        try:
            result = agent.send_action(raw)
        except BadInput as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        for handle in result.handles:
            handle.wait(agent._config.ack_wait_ms / 1000)
        for iface, reason in result.skipped:
            print(f"warning: {iface}: {reason}")
        applied = 0
        for h in result.handles:
            status = h.status or "timeout"
            lat = f" ({h.latency_ms:.1f} ms)" if h.latency_ms is not None else ""
            print(f"{h.interface_id}: {status}{lat}")
            applied += status == "applied"
        print(f"{applied} endpoint(s) synchronized")
        return EXIT_OK
    finally:
        agent.stop()


def cmd_run_script(args: argparse.Namespace) -> int:
    agent, rc = _start_agent(args.config)
    if agent is None:
        return rc
    try:
        try:
            report = agent.run_script(args.script)
        except (ScriptError, OSError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{'line':>4}  {'result':6}  {'acks':>9}  action")
        for a in report.actions:
            marks = ", ".join(
                f"{iface}={status}" + (f":{lat:.0f}ms" if lat is not None else "")
                for iface, status, lat in a.statuses
            )
            result = "PASS" if a.passed else "FAIL"
            print(f"{a.line_no:>4}  {result:6}  {a.applied}/{a.dispatched:<7}  {a.text}  [{marks}]")
            for iface, reason in a.skipped:
                print(f"      warning: {iface}: {reason}")
        lats = sorted(report.latencies_ms())
        if lats:
            p50 = lats[len(lats) // 2]
            p99 = lats[min(len(lats) - 1, int(len(lats) * 0.99))]
            print(f"ack latency: p50={p50:.1f} ms p99={p99:.1f} ms over {len(lats)} acks")
        print(f"{report.passed}/{report.total} passed")
        return EXIT_OK
    finally:
        agent.stop()


def cmd_bridge(args: argparse.Namespace) -> int:
    agent, rc = _start_agent(args.config)
    if agent is None:
        return rc
    server = HttpServerThread(build_bridge_app(agent), port=args.http_port)
    server.start()
    print(f"bridge on http://127.0.0.1:{server.port} (POST /action, WS /confirmations)", flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        agent.stop()
    return EXIT_OK


def cmd_map_validate(args: argparse.Namespace) -> int:
    try:
        loaded = load_mapping(args.mapping)
    except (MappingError, CoordOutOfRange, OSError) as e:
        print(f"FAIL: mapping did not load: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"loaded {len(loaded.table)} entries from {args.mapping}")
    failures = 0
    for spec_path in args.screen_specs:
        try:
            spec = load_screen_spec(spec_path)
        except (ScreenSpecError, OSError) as e:
            print(f"FAIL: screen spec {spec_path}: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        cfg = ClickConfig(click_delay_ms=loaded.click_delay_ms)
        print(f"-- {spec_path} ({spec.resolution.width}x{spec.resolution.height})")
        for key, _seq in loaded.table:
            name = f"{key.interface_id}/{key.widget_id}/{key.action.value}" + (
                f"/{key.payload}" if key.payload is not None else ""
            )
            resolved = loaded.table.resolve(key, spec.resolution)
            screen = VirtualScreen(spec)
            before = logical_state(screen.snapshot())
            try:
                screen.replay(resolved, cfg)
            except ReplayError as e:
                print(f"FAIL  {name}: event {e.index}: {e.cause}")
                failures += 1
                continue
            if not resolved.events:
                print(f"PASS  {name} (declared no-op)")
                continue
            # A valid entry either changes widget state or at least provably
            # hits a widget (e.g. re-activating the already-active tab).
            if logical_state(screen.snapshot()) == before and interaction_count(screen.event_log) == 0:
                print(f"FAIL  {name}: no widget reacts on this screen")
                failures += 1
                continue
            print(f"PASS  {name}")
    if failures:
        print(f"{failures} entr{'y' if failures == 1 else 'ies'} failed validation")
        return EXIT_VALIDATION
    print("all entries validated")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uisync",
        description="Synchronize heterogeneous GUIs by replaying mapped input events on remote screens.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run a remote agent (control server)")
    serve.add_argument("--port", type=int, default=7001)
    serve.add_argument("--key-file", required=True, help="file with 32 hex chars (AES-128 key)")
    serve.add_argument("--screen-spec", required=True, help="screen spec JSON")
    serve.add_argument("--state-port", type=int, default=None, help="HTTP/WS state endpoint port")
    serve.add_argument("--real-time", action="store_true", help="sleep for Delay events")
    serve.add_argument("--no-ack", action="store_true", help="do not acknowledge CONTROL messages")
    serve.add_argument("--multi-writer", action="store_true", help="allow several concurrent controllers")
    serve.set_defaults(fn=cmd_serve)

    connect = sub.add_parser("connect", help="run the local agent (control client)")
    connect.add_argument("--config", required=True, help="agent config JSON")
    csub = connect.add_subparsers(dest="subcommand", required=True)

    send = csub.add_parser("send", help="dispatch one action")
    send.add_argument("interface")
    send.add_argument("widget")
    send.add_argument("action")
    send.add_argument("payload", nargs="?", default=None)
    send.set_defaults(fn=cmd_send)

    runs = csub.add_parser("run-script", help="execute a scenario script")
    runs.add_argument("script")
    runs.set_defaults(fn=cmd_run_script)

    bridge = csub.add_parser("bridge", help="HTTP+WebSocket bridge for the demo UI")
    bridge.add_argument("--http-port", type=int, default=7080)
    bridge.set_defaults(fn=cmd_bridge)

    validate = sub.add_parser("map-validate", help="dry-replay a mapping against screen specs")
    validate.add_argument("mapping")
    validate.add_argument("screen_specs", nargs="+")
    validate.set_defaults(fn=cmd_map_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

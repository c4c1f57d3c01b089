"""Message payload schemas riding inside the encrypted envelope.

HELLO   {"version": int, "resolution": {"width", "height"} | null}
CONTROL {"interface_id": str, "click_delay_ms": int, "events": [event dicts]}
ACK     {"seq": int, "status": "applied"|"stale"|"error", "detail"?, "index"?}

Events in CONTROL are fully resolved absolute-pixel events (the shapes in
events.event_to_dict). PING and PONG carry empty payloads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .events import EventCodecError, Resolution, UIEvent, event_from_dict, event_to_dict
from .protocol import ProtocolError

ACK_APPLIED = "applied"
ACK_STALE = "stale"
ACK_ERROR = "error"


class PayloadError(ProtocolError):
    """Payload bytes decrypted fine but do not parse as the declared schema."""


def _loads(data: bytes, what: str) -> dict:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise PayloadError(f"bad {what} payload: {e}") from None
    if not isinstance(doc, dict):
        raise PayloadError(f"bad {what} payload: expected an object")
    return doc


@dataclass(frozen=True)
class HelloInfo:
    version: int
    resolution: Optional[Resolution]


def encode_hello(version: int, resolution: Optional[Resolution]) -> bytes:
    res = None
    if resolution is not None:
        res = {"width": resolution.width, "height": resolution.height}
    return json.dumps({"version": version, "resolution": res}).encode()


def decode_hello(data: bytes) -> HelloInfo:
    doc = _loads(data, "HELLO")
    try:
        version = int(doc["version"])
        res_doc = doc.get("resolution")
        res = None if res_doc is None else Resolution(int(res_doc["width"]), int(res_doc["height"]))
    except (KeyError, TypeError, ValueError) as e:
        raise PayloadError(f"bad HELLO payload: {e}") from None
    return HelloInfo(version=version, resolution=res)


@dataclass(frozen=True)
class ControlPayload:
    interface_id: str
    events: tuple[UIEvent, ...]
    click_delay_ms: int


def encode_control(interface_id: str, events: tuple[UIEvent, ...], click_delay_ms: int) -> bytes:
    return json.dumps(
        {
            "interface_id": interface_id,
            "click_delay_ms": click_delay_ms,
            "events": [event_to_dict(ev) for ev in events],
        }
    ).encode()


def decode_control(data: bytes) -> ControlPayload:
    doc = _loads(data, "CONTROL")
    try:
        interface_id = doc["interface_id"]
        click_delay_ms = int(doc.get("click_delay_ms", 200))
        raw_events = doc["events"]
    except KeyError as e:
        raise PayloadError(f"bad CONTROL payload: missing {e}") from None
    if not isinstance(interface_id, str) or not isinstance(raw_events, list):
        raise PayloadError("bad CONTROL payload: wrong field types")
    try:
        events = tuple(event_from_dict(d) for d in raw_events)
    except EventCodecError as e:
        raise PayloadError(f"bad CONTROL payload: {e}") from None
    return ControlPayload(interface_id, events, click_delay_ms)


@dataclass(frozen=True)
class AckInfo:
    seq: int
    status: str
    detail: Optional[str] = None
    index: Optional[int] = None  # failing event index when status == "error"


def encode_ack(seq: int, status: str, detail: Optional[str] = None, index: Optional[int] = None) -> bytes:
    doc: dict = {"seq": seq, "status": status}
    if detail is not None:
        doc["detail"] = detail
    if index is not None:
        doc["index"] = index
    return json.dumps(doc).encode()


def decode_ack(data: bytes) -> AckInfo:
    doc = _loads(data, "ACK")
    try:
        seq = int(doc["seq"])
        status = doc["status"]
    except (KeyError, TypeError, ValueError) as e:
        raise PayloadError(f"bad ACK payload: {e}") from None
    if status not in (ACK_APPLIED, ACK_STALE, ACK_ERROR):
        raise PayloadError(f"bad ACK payload: unknown status {status!r}")
    index = doc.get("index")
    return AckInfo(seq=seq, status=status, detail=doc.get("detail"), index=None if index is None else int(index))

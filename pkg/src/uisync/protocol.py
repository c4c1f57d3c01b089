"""Wire protocol: message envelope, block cipher, and stream framing.

Serialized message layout (big-endian throughout):

    ┌──────────┬──────────────────┬──────────┬────────────────┬─────────┐
    │ kind (1B)│ session id (16B) │ seq (8B) │ payload len(4B)│ payload │
    └──────────┴──────────────────┴──────────┴────────────────┴─────────┘

The serialized message is PKCS#7-padded, encrypted with AES-128 in ECB
mode, and written to the stream as one length-prefixed frame:

    ┌──────────────┬───────────────────────────────┐
    │ length (4B)  │ ciphertext (`length` bytes,   │
    │ u32 BE       │  a positive multiple of 16)   │
    └──────────────┴───────────────────────────────┘

ECB is deliberate for fidelity with the deployed design but leaks
block-level plaintext patterns; see the README security note. The cipher
sits behind encrypt_frame/decrypt_frame so it can be swapped wholesale.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

BLOCK = 16
HEADER_LEN = 1 + 16 + 8 + 4

#: Hard cap on a message payload (fits the 3-byte length budget).
PAYLOAD_MAX = 2**24 - 1

#: Padded ciphertext of a maximum-size serialized message. The payload cap
#: of 2^24-1 plus the 29-byte envelope pads out to two blocks past 2^24, so
#: the frame guard sits there rather than at a bare 2^24.
FRAME_MAX = ((HEADER_LEN + PAYLOAD_MAX) // BLOCK + 1) * BLOCK

#: Largest plaintext that still pads into FRAME_MAX.
PLAINTEXT_MAX = FRAME_MAX - 1


class ProtocolError(Exception):
    """Base for every typed wire-format failure."""


class OversizePayload(ProtocolError):
    pass


class Truncated(ProtocolError):
    pass


class UnknownKind(ProtocolError):
    pass


class LengthMismatch(ProtocolError):
    pass


class BadPadding(ProtocolError):
    """Padding check failed after decryption: wrong key or corrupted frame."""


class BadFrame(ProtocolError):
    pass


class MessageKind(enum.IntEnum):
    HELLO = 0x01
    CONTROL = 0x02
    PING = 0x03
    PONG = 0x04
    ACK = 0x05


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    session_id: bytes  # exactly 16 opaque bytes
    seq: int  # unsigned 64-bit, monotonically increasing per session
    payload: bytes = b""

    def __post_init__(self) -> None:
        if len(self.session_id) != 16:
            raise ValueError(f"session_id must be 16 bytes, got {len(self.session_id)}")
        if not (0 <= self.seq < 2**64):
            raise ValueError(f"seq out of u64 range: {self.seq}")


@dataclass(frozen=True)
class SessionKey:
    """Pre-shared AES-128 key; loaded from config, never transmitted."""

    key: bytes

    def __post_init__(self) -> None:
        if len(self.key) != 16:
            raise ValueError(f"session key must be exactly 16 bytes, got {len(self.key)}")

    @classmethod
    def from_hex(cls, text: str) -> "SessionKey":
        text = text.strip()
        if len(text) != 32:
            raise ValueError(f"session_key_hex must be 32 hex chars, got {len(text)}")
        try:
            return cls(bytes.fromhex(text))
        except ValueError:
            raise ValueError("session_key_hex is not valid hex") from None


@dataclass(frozen=True)
class Frame:
    """One encrypted unit on the stream; `to_bytes` prepends the length."""

    ciphertext: bytes

    @property
    def length(self) -> int:
        return len(self.ciphertext)

    def to_bytes(self) -> bytes:
        return struct.pack(">I", len(self.ciphertext)) + self.ciphertext


def serialize_message(msg: Message) -> bytes:
    """Canonical byte layout; equal messages serialize identically."""
    if len(msg.payload) > PAYLOAD_MAX:
        raise OversizePayload(f"payload of {len(msg.payload)} bytes exceeds {PAYLOAD_MAX}")
    return (
        struct.pack(">B", msg.kind.value)
        + msg.session_id
        + struct.pack(">Q", msg.seq)
        + struct.pack(">I", len(msg.payload))
        + msg.payload
    )


def deserialize_message(data: bytes) -> Message:
    """Exact inverse of serialize_message; total over arbitrary bytes."""
    if len(data) < HEADER_LEN:
        raise Truncated(f"need {HEADER_LEN} header bytes, got {len(data)}")
    kind_byte = data[0]
    try:
        kind = MessageKind(kind_byte)
    except ValueError:
        raise UnknownKind(f"unknown message kind 0x{kind_byte:02x}") from None
    session_id = data[1:17]
    (seq,) = struct.unpack(">Q", data[17:25])
    (plen,) = struct.unpack(">I", data[25:29])
    if plen > PAYLOAD_MAX:
        raise OversizePayload(f"declared payload of {plen} bytes exceeds {PAYLOAD_MAX}")
    remaining = len(data) - HEADER_LEN
    if remaining < plen:
        raise Truncated(f"declared {plen} payload bytes, only {remaining} present")
    if remaining > plen:
        raise LengthMismatch(f"{remaining - plen} trailing bytes after declared payload")
    return Message(kind=kind, session_id=session_id, seq=seq, payload=data[HEADER_LEN:])


def pkcs7_pad(data: bytes, block: int = BLOCK) -> bytes:
    pad = block - (len(data) % block)
    return data + bytes([pad]) * pad


def pkcs7_unpad(data: bytes, block: int = BLOCK) -> bytes:
    if not data or len(data) % block != 0:
        raise BadPadding("padded data must be a positive multiple of the block size")
    pad = data[-1]
    if pad < 1 or pad > block:
        raise BadPadding(f"illegal pad count {pad}")
    if data[-pad:] != bytes([pad]) * pad:
        raise BadPadding("pad bytes do not match pad count")
    return data[:-pad]


def _cipher(key: SessionKey) -> Cipher:
    return Cipher(algorithms.AES(key.key), modes.ECB())


def encrypt_frame(plain: bytes, key: SessionKey) -> Frame:
    """AES-128-ECB over the PKCS#7-padded plaintext."""
    if len(plain) > PLAINTEXT_MAX:
        raise OversizePayload(f"plaintext of {len(plain)} bytes exceeds {PLAINTEXT_MAX}")
    enc = _cipher(key).encryptor()
    return Frame(enc.update(pkcs7_pad(plain)) + enc.finalize())


def decrypt_frame(frame: Frame, key: SessionKey) -> bytes:
    """Inverse of encrypt_frame; validates and strips the padding."""
    n = frame.length
    if n == 0 or n % BLOCK != 0 or n > FRAME_MAX:
        raise BadFrame(f"frame length {n} is not a positive multiple of {BLOCK} within bounds")
    dec = _cipher(key).decryptor()
    return pkcs7_unpad(dec.update(frame.ciphertext) + dec.finalize())


def encode_message(msg: Message, key: SessionKey) -> bytes:
    """serialize -> encrypt -> frame: the bytes actually written to a socket."""
    return encrypt_frame(serialize_message(msg), key).to_bytes()


def decode_message(frame: Frame, key: SessionKey) -> Message:
    return deserialize_message(decrypt_frame(frame, key))


@dataclass
class FrameBuffer:
    """Reassembles frames from an arbitrarily-chunked byte stream.

    Splitting never depends on read boundaries: feed() may receive any
    prefix/suffix slicing of the stream and yields exactly the frames that
    were written.
    """

    _buf: bytearray = field(default_factory=bytearray)

    def feed(self, data: bytes) -> list[Frame]:
        self._buf.extend(data)
        frames: list[Frame] = []
        while len(self._buf) >= 4:
            (length,) = struct.unpack(">I", self._buf[:4])
            if length == 0 or length % BLOCK != 0 or length > FRAME_MAX:
                raise BadFrame(f"corrupt frame length prefix {length}")
            if len(self._buf) < 4 + length:
                break
            frames.append(Frame(bytes(self._buf[4 : 4 + length])))
            del self._buf[: 4 + length]
        return frames

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


def keepalive_due(last_send_ms: int, now_ms: int, interval_ms: int) -> bool:
    """True once a full interval has elapsed since the last send (inclusive)."""
    return now_ms - last_send_ms >= interval_ms

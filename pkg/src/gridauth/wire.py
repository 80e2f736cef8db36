"""Canonical byte layouts, text transcripts, and persisted state files.

Binary layout: fixed-width fields in declaration order.  32-octet values
are raw; timestamps are 8-octet big-endian milliseconds; points are a
one-octet flag (0 = affine, 1 = identity) followed by ``x || y``, each
``curve.byte_len`` octets big-endian.  Identity strings in registration
messages are a 2-octet length prefix plus UTF-8.
"""
from __future__ import annotations

import json
import struct
from dataclasses import fields

from gridauth.errors import DecodeError, InvalidPoint
from gridauth.fuzzy import FEParams, HelperData
from gridauth.group import IDENTITY, WIDTH, CurveParams, Point, scalar_mul, xor32
from gridauth.protocol import (
    DeviceStore,
    MsgA1,
    MsgA2,
    RegRequest,
    RegResponse,
    ServerState,
    SystemParams,
    UpdateRequest,
    UpdateResponse,
    UserRecord,
    _server_r2,
)

FORMAT_VERSION = 1
SERVER_FORMAT = "gridauth/server-state"
DEVICE_FORMAT = "gridauth/device-store"
POINT_AFFINE, POINT_IDENTITY = 0, 1


def point_size(curve: CurveParams) -> int:
    return 1 + 2 * curve.byte_len


def encode_point_wire(P: Point, curve: CurveParams) -> bytes:
    n = curve.byte_len
    if P.is_identity:
        return bytes([POINT_IDENTITY]) + bytes(2 * n)
    return bytes([POINT_AFFINE]) + P.x.to_bytes(n, "big") + P.y.to_bytes(n, "big")


def decode_point_wire(buf: bytes, curve: CurveParams) -> Point:
    """Parse a point; membership is checked later by the receiver."""
    n = curve.byte_len
    if len(buf) != 1 + 2 * n:
        raise DecodeError("point field has %d octets" % len(buf))
    flag = buf[0]
    if flag == POINT_IDENTITY:
        return IDENTITY
    if flag != POINT_AFFINE:
        raise InvalidPoint("unknown point flag %#x" % flag)
    x = int.from_bytes(buf[1:1 + n], "big")
    y = int.from_bytes(buf[1 + n:], "big")
    if x >= curve.p or y >= curve.p:
        raise InvalidPoint("coordinate outside the field")
    return Point(x, y)


def _ts(t: int) -> bytes:
    return struct.pack(">Q", t)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.pos = bytes(buf), 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise DecodeError("message truncated")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def ts(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def text(self) -> str:
        (n,) = struct.unpack(">H", self.take(2))
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError:
            raise DecodeError("identity is not UTF-8") from None

    def done(self):
        if self.pos != len(self.buf):
            raise DecodeError("%d trailing octets" % (len(self.buf) - self.pos))


def _text(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("identity too long")
    return struct.pack(">H", len(raw)) + raw


# field name -> (offset, length) inside the canonical layout
def field_spans(kind: str, curve: CurveParams) -> dict:
    ps = point_size(curve)
    if kind == "MsgA1":
        return {"S1": (0, WIDTH), "ID_U1": (WIDTH, WIDTH), "U_point": (2 * WIDTH, ps),
                "t1": (2 * WIDTH + ps, 8)}
    if kind == "MsgA2":
        return {"ID_S1": (0, WIDTH), "S2": (WIDTH, WIDTH), "S_point": (2 * WIDTH, ps),
                "t3": (2 * WIDTH + ps, 8)}
    raise ValueError("no fixed layout for %s" % kind)


def encode_message(msg, curve: CurveParams) -> bytes:
    if isinstance(msg, MsgA1):
        return msg.S1 + msg.ID_U1 + encode_point_wire(msg.U_point, curve) + _ts(msg.t1)
    if isinstance(msg, MsgA2):
        return msg.ID_S1 + msg.S2 + encode_point_wire(msg.S_point, curve) + _ts(msg.t3)
    if isinstance(msg, RegRequest):
        return _text(msg.id) + msg.R1 + _ts(msg.t_RG1)
    if isinstance(msg, UpdateRequest):
        return _text(msg.id) + msg.R1_star + _ts(msg.t_RG1)
    if isinstance(msg, RegResponse):
        return msg.R3 + _ts(msg.t)
    if isinstance(msg, UpdateResponse):
        return msg.R3_star + _ts(msg.t)
    raise TypeError("not a protocol message: %r" % (msg,))


def decode_message(kind: str, buf: bytes, curve: CurveParams):
    r = _Reader(buf)
    if kind in ("MsgA1", "MsgA2"):
        a, b = r.take(WIDTH), r.take(WIDTH)
        P = decode_point_wire(r.take(point_size(curve)), curve)
        t = r.ts()
        msg = MsgA1(a, b, P, t) if kind == "MsgA1" else MsgA2(a, b, P, t)
    elif kind in ("RegRequest", "UpdateRequest"):
        ident = r.text()
        msg = (RegRequest if kind == "RegRequest" else UpdateRequest)(ident, r.take(WIDTH), r.ts())
    elif kind in ("RegResponse", "UpdateResponse"):
        msg = (RegResponse if kind == "RegResponse" else UpdateResponse)(r.take(WIDTH), r.ts())
    else:
        raise DecodeError("unknown message kind %r" % kind)
    r.done()
    return msg


def message_text(msg, curve: CurveParams) -> str:
    """Human-readable form: one ``field-name: hex`` line per field."""
    lines = []
    for f in fields(msg):
        v = getattr(msg, f.name)
        if isinstance(v, Point):
            v = encode_point_wire(v, curve).hex()
        elif isinstance(v, int):
            v = _ts(v).hex()
        elif isinstance(v, str):
            v = v.encode("utf-8").hex()
        else:
            v = v.hex()
        lines.append("%s: %s" % (f.name, v))
    return "\n".join(lines)


# persistence


def _params_doc(params: SystemParams) -> dict:
    return {
        "profile": params.curve.name,
        "curve": params.curve.to_hex(),
        "hash_id": params.hash_id,
        "delta_t": params.delta_t,
        "fe": {"k": params.fe.k, "rho": params.fe.rho},
        "server_id": params.server_id,
        "PK_S": encode_point_wire(params.PK_S, params.curve).hex(),
    }


def _params_from_doc(doc: dict) -> SystemParams:
    curve = CurveParams.from_hex(doc["profile"], doc["curve"])
    return SystemParams(
        curve=curve,
        PK_S=decode_point_wire(bytes.fromhex(doc["PK_S"]), curve),
        hash_id=doc["hash_id"],
        delta_t=int(doc["delta_t"]),
        fe=FEParams(int(doc["fe"]["k"]), int(doc["fe"]["rho"])),
        server_id=doc["server_id"],
    )


def dump_server(server: ServerState) -> str:
    doc = {"format": SERVER_FORMAT, "version": FORMAT_VERSION}
    doc.update(_params_doc(server.params))
    doc["X"] = format(server.X, "x")
    doc["next_counter"] = server.next_counter
    doc["users"] = [
        {"id": rec.id, "R1": rec.R1.hex(), "R3": rec.R3.hex(), "y": rec.y}
        for rec in server.users.values()
    ]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _hex32(v) -> bytes:
    b = bytes.fromhex(v)
    if len(b) != WIDTH:
        raise ValueError("expected %d octets" % WIDTH)
    return b


def load_server(text: str) -> ServerState:
    """Parse and re-check a persisted server state."""
    try:
        doc = json.loads(text)
        if doc.get("format") != SERVER_FORMAT or doc.get("version") != FORMAT_VERSION:
            raise DecodeError("not a version-%d server state file" % FORMAT_VERSION)
        params = _params_from_doc(doc)
        server = ServerState(
            X=int(doc["X"], 16),
            params=params,
            server_id=params.server_id,
            users={u["id"]: UserRecord(u["id"], _hex32(u["R1"]), _hex32(u["R3"]), int(u["y"]))
                   for u in doc["users"]},
            next_counter=int(doc["next_counter"]),
        )
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DecodeError("corrupted server state: %s" % exc) from None
    curve = params.curve
    if not 1 <= server.X < curve.q or scalar_mul(server.X, curve.G, curve) != params.PK_S:
        raise DecodeError("corrupted server state: PK_S != X * G")
    for rec in server.users.values():
        if xor32(rec.R3, rec.R1) != _server_r2(server, rec.id, rec.y):
            raise DecodeError("corrupted server state: record %r fails R3 = R2 xor R1" % rec.id)
    return server


def dump_device(dev: DeviceStore, params: SystemParams) -> str:
    doc = {
        "format": DEVICE_FORMAT,
        "version": FORMAT_VERSION,
        "profile": params.curve.name,
        "user_id": dev.user_id,
        "R3": dev.R3.hex(),
        "R4": dev.R4.hex(),
        "R5": dev.R5.hex(),
        "helper": dev.helper.serialize(),
        "r": format(dev.r, "x"),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_device(text: str) -> DeviceStore:
    try:
        doc = json.loads(text)
        if doc.get("format") != DEVICE_FORMAT or doc.get("version") != FORMAT_VERSION:
            raise DecodeError("not a version-%d device store file" % FORMAT_VERSION)
        return DeviceStore(
            user_id=doc["user_id"],
            R3=_hex32(doc["R3"]),
            R4=_hex32(doc["R4"]),
            R5=_hex32(doc["R5"]),
            helper=HelperData.deserialize(doc["helper"]),
            r=int(doc["r"], 16),
        )
    except DecodeError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DecodeError("corrupted device store: %s" % exc) from None

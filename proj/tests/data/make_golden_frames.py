"""Writes the golden wire frames used by the protocol tests.

Built straight from the byte layout, without the library, so the C++ encoder
is checked against an independent producer.
"""
import pathlib
import struct

HERE = pathlib.Path(__file__).resolve().parent


def frame(msg_type, body):
    return b"ZKMF" + struct.pack(">BBI", 1, msg_type, len(body)) + body


def challenge():
    session_id = bytes(range(16))
    rn1 = bytes(range(64))
    rn2 = bytes(255 - i for i in range(64))
    params = struct.pack(">BBHHBB", 7, 1, 384, 256, 4, 3)
    mask = bytearray(8192)
    # X at cells 0, 9 and 65535; bit j is cell j, MSB first.
    for j in (0, 9, 65535):
        mask[j // 8] |= 0x80 >> (j % 8)
    return frame(1, session_id + rn1 + rn2 + params + bytes(mask))


def response():
    session_id = bytes(range(16))
    return frame(2, session_id + bytes([2]) + b"\x11" * 32 + b"\x22" * 32)


def verdict():
    return frame(3, bytes(range(16)) + bytes([0]) + struct.pack(">H", 5))


if __name__ == "__main__":
    for name, data in (("challenge", challenge()), ("response", response()), ("verdict", verdict())):
        (HERE / f"golden_{name}.hex").write_text(data.hex() + "\n")

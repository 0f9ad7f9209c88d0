"""Modified UTF-8, the JVM's constant-pool string encoding.

Differs from standard UTF-8 in two ways: U+0000 is encoded as the two-byte
sequence C0 80, and supplementary characters are encoded as a surrogate
pair of two three-byte sequences (CESU-8 style), never as four bytes.
"""

from __future__ import annotations


def encode(text: str) -> bytes:
    out = bytearray()
    for ch in text:
        cp = ord(ch)
        if cp == 0:
            out += b"\xc0\x80"
        elif cp < 0x80:
            out.append(cp)
        elif cp < 0x800:
            out.append(0xC0 | (cp >> 6))
            out.append(0x80 | (cp & 0x3F))
        elif cp < 0x10000:
            _encode3(out, cp)
        else:
            cp -= 0x10000
            _encode3(out, 0xD800 | (cp >> 10))
            _encode3(out, 0xDC00 | (cp & 0x3FF))
    return bytes(out)


def _encode3(out: bytearray, cp: int) -> None:
    out.append(0xE0 | (cp >> 12))
    out.append(0x80 | ((cp >> 6) & 0x3F))
    out.append(0x80 | (cp & 0x3F))


def decode(data: bytes) -> str:
    chars: list[str] = []
    i = 0
    n = len(data)
    while i < n:
        b0 = data[i]
        if b0 & 0x80 == 0:
            if b0 == 0:
                raise ValueError(f"raw NUL byte at offset {i}")
            chars.append(chr(b0))
            i += 1
        elif b0 & 0xE0 == 0xC0:
            b1 = _cont(data, i + 1)
            chars.append(chr(((b0 & 0x1F) << 6) | (b1 & 0x3F)))
            i += 2
        elif b0 & 0xF0 == 0xE0:
            b1 = _cont(data, i + 1)
            b2 = _cont(data, i + 2)
            cp = ((b0 & 0x0F) << 12) | ((b1 & 0x3F) << 6) | (b2 & 0x3F)
            i += 3
            if 0xD800 <= cp <= 0xDBFF and i + 2 < n and data[i] & 0xF0 == 0xE0:
                # possible low half of a surrogate pair
                c1 = _cont(data, i + 1)
                c2 = _cont(data, i + 2)
                lo = ((data[i] & 0x0F) << 12) | ((c1 & 0x3F) << 6) | (c2 & 0x3F)
                if 0xDC00 <= lo <= 0xDFFF:
                    cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00)
                    i += 3
            chars.append(chr(cp))
        else:
            raise ValueError(f"invalid lead byte 0x{b0:02X} at offset {i}")
    return "".join(chars)


def _cont(data: bytes, i: int) -> int:
    if i >= len(data):
        raise ValueError(f"truncated sequence at offset {i}")
    b = data[i]
    if b & 0xC0 != 0x80:
        raise ValueError(f"invalid continuation byte 0x{b:02X} at offset {i}")
    return b

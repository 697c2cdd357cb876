"""Compact Keccak-f[1600] sponge, pure Python.

Used for the keccak-256 hash variant (stdlib hashlib only ships the FIPS
202 padding) and as the reference the compiled core is checked against.
Slow, but scenario-scale inputs are short and few.
"""

_MASK = (1 << 64) - 1

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# Rotation offset of lane (x, y) at index x + 5*y.
_ROTATION = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)

_RATE = 136  # sponge rate in bytes for 256-bit output


def _rotl(v: int, s: int) -> int:
    if s == 0:
        return v
    return ((v << s) | (v >> (64 - s))) & _MASK


def _keccak_f(a: list[int]) -> None:
    for rc in _ROUND_CONSTANTS:
        c = [a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20] for x in range(5)]
        for x in range(5):
            d = c[(x - 1) % 5] ^ _rotl(c[(x + 1) % 5], 1)
            for y in range(0, 25, 5):
                a[x + y] ^= d
        b = [0] * 25
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl(a[x + 5 * y], _ROTATION[x + 5 * y])
        for x in range(5):
            for y in range(0, 25, 5):
                a[x + y] = b[x + y] ^ ((~b[(x + 1) % 5 + y]) & b[(x + 2) % 5 + y] & _MASK)
        a[0] ^= rc


def _sponge_256(data: bytes, pad_byte: int) -> bytes:
    state = [0] * 25
    offset = 0
    while len(data) - offset >= _RATE:
        for i in range(17):
            state[i] ^= int.from_bytes(data[offset + 8 * i : offset + 8 * i + 8], "little")
        _keccak_f(state)
        offset += _RATE
    tail = bytearray(_RATE)
    tail[: len(data) - offset] = data[offset:]
    tail[len(data) - offset] ^= pad_byte
    tail[_RATE - 1] ^= 0x80
    for i in range(17):
        state[i] ^= int.from_bytes(tail[8 * i : 8 * i + 8], "little")
    _keccak_f(state)
    return b"".join(state[i].to_bytes(8, "little") for i in range(4))


def sha3_256(data: bytes) -> bytes:
    """FIPS 202 SHA3-256 (0x06 domain padding)."""
    return _sponge_256(data, 0x06)


def keccak_256(data: bytes) -> bytes:
    """Original Keccak-256 (0x01 padding), as used for Ethereum block hashes."""
    return _sponge_256(data, 0x01)

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled competition core.

Same trial semantics, tags, and counter-derived randomness as
``_biascore_py`` (the authoritative description lives there); this module
exists purely to make the Monte Carlo loops fast.  Equality of the two
backends is pinned by tests.
"""

from libc.stdint cimport uint8_t, uint64_t
from libc.string cimport memcpy, memset

BACKEND = "cython"

cdef enum:
    C_MODE_RAW = 0
    C_MODE_NO_COLLUSION = 1
    C_MODE_FULL_COLLUSION = 2

MODE_RAW = C_MODE_RAW
MODE_NO_COLLUSION = C_MODE_NO_COLLUSION
MODE_FULL_COLLUSION = C_MODE_FULL_COLLUSION

DEFAULT_DISCARD_CAP = 10_000

cdef uint64_t ROUND_CONSTANTS[24]
cdef int ROTATION[25]

_RC_VALUES = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)
_ROT_VALUES = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)

cdef int _init_i
for _init_i in range(24):
    ROUND_CONSTANTS[_init_i] = <uint64_t> _RC_VALUES[_init_i]
for _init_i in range(25):
    ROTATION[_init_i] = _ROT_VALUES[_init_i]

cdef int RATE = 136


cdef inline uint64_t _rotl(uint64_t v, int s) noexcept nogil:
    return (v << s) | (v >> ((64 - s) & 63))


cdef void _keccak_f(uint64_t *a) noexcept nogil:
    cdef uint64_t b[25]
    cdef uint64_t c[5]
    cdef uint64_t d
    cdef int rnd, x, y
    for rnd in range(24):
        for x in range(5):
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20]
        for x in range(5):
            d = c[(x + 4) % 5] ^ _rotl(c[(x + 1) % 5], 1)
            for y in range(0, 25, 5):
                a[x + y] ^= d
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl(a[x + 5 * y], ROTATION[x + 5 * y])
        for x in range(5):
            for y in range(0, 25, 5):
                a[x + y] = b[x + y] ^ ((~b[(x + 1) % 5 + y]) & b[(x + 2) % 5 + y])
        a[0] ^= ROUND_CONSTANTS[rnd]


cdef inline uint64_t _load_le64(const uint8_t *p) noexcept nogil:
    return (
        (<uint64_t> p[0])
        | (<uint64_t> p[1]) << 8
        | (<uint64_t> p[2]) << 16
        | (<uint64_t> p[3]) << 24
        | (<uint64_t> p[4]) << 32
        | (<uint64_t> p[5]) << 40
        | (<uint64_t> p[6]) << 48
        | (<uint64_t> p[7]) << 56
    )


cdef inline void _store_le64(uint8_t *p, uint64_t v) noexcept nogil:
    cdef int i
    for i in range(8):
        p[i] = <uint8_t> (v >> (8 * i))


cdef void _sponge256(const uint8_t *msg, size_t n, uint8_t pad_byte, uint8_t *out32) noexcept nogil:
    cdef uint64_t state[25]
    cdef uint8_t tail[136]
    cdef size_t offset = 0
    cdef int i
    memset(state, 0, sizeof(state))
    while n - offset >= <size_t> RATE:
        for i in range(17):
            state[i] ^= _load_le64(msg + offset + 8 * i)
        _keccak_f(state)
        offset += RATE
    memset(tail, 0, RATE)
    if n > offset:
        memcpy(tail, msg + offset, n - offset)
    tail[n - offset] ^= pad_byte
    tail[RATE - 1] ^= 0x80
    for i in range(17):
        state[i] ^= _load_le64(tail + 8 * i)
    _keccak_f(state)
    for i in range(4):
        _store_le64(out32 + 8 * i, state[i])


cdef inline uint64_t _splitmix_next(uint64_t *state) noexcept nogil:
    state[0] += 0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _splitmix_double(uint64_t *state) noexcept nogil:
    return (_splitmix_next(state) >> 11) * (1.0 / 9007199254740992.0)


def sha3_256(data: bytes) -> bytes:
    cdef const uint8_t *buf = data
    cdef uint8_t out[32]
    _sponge256(buf, len(data), 0x06, out)
    return bytes(out[:32])


def keccak_256(data: bytes) -> bytes:
    cdef const uint8_t *buf = data
    cdef uint8_t out[32]
    _sponge256(buf, len(data), 0x01, out)
    return bytes(out[:32])


def bias_trials(
    mode: int,
    seed: int,
    trials: int,
    fraction: float,
    bit_index: int,
    desired: int,
    discard_cap: int = DEFAULT_DISCARD_CAP,
):
    """Compiled mirror of ``_biascore_py.bias_trials``."""
    if mode not in (MODE_RAW, MODE_NO_COLLUSION, MODE_FULL_COLLUSION):
        raise ValueError(f"unknown mode {mode}")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    if not 0 <= bit_index < 256:
        raise ValueError("bit_index must be in [0, 255]")
    if desired not in (0, 1):
        raise ValueError("desired must be 0 or 1")

    # Message layouts (tag, then 8-byte little-endian counters):
    #   stream init: "lh-bias-rng:"  seed mode trial          (36 bytes)
    #   value:       "lh-bias-v:"    seed trial               (26 bytes)
    #   candidate:   "lh-bias-cand:" seed trial j             (37 bytes)
    cdef uint8_t rng_msg[36]
    cdef uint8_t v_msg[26]
    cdef uint8_t cand_msg[37]
    memcpy(rng_msg, <const char *> b"lh-bias-rng:", 12)
    memcpy(v_msg, <const char *> b"lh-bias-v:", 10)
    memcpy(cand_msg, <const char *> b"lh-bias-cand:", 13)

    cdef uint64_t seed_u = <uint64_t> (seed & ((1 << 64) - 1))
    cdef int cmode = mode
    cdef double frac = fraction
    cdef int byte_pos = bit_index >> 3
    cdef int shift = bit_index & 7
    cdef int want = desired
    cdef uint64_t n_trials = trials
    cdef uint64_t cap = discard_cap

    _store_le64(rng_msg + 12, seed_u)
    _store_le64(rng_msg + 20, <uint64_t> cmode)
    _store_le64(v_msg + 10, seed_u)
    _store_le64(cand_msg + 13, seed_u)

    cdef uint64_t hits = 0
    cdef uint64_t discards = 0
    cdef uint64_t livelocks = 0
    cdef uint64_t trial, j, trial_discards, stream
    cdef uint8_t digest[32]
    cdef uint8_t value[32]
    cdef uint8_t block_hash[32]
    cdef uint8_t out[32]
    cdef uint8_t combined[64]
    cdef int bit, coalition_won

    with nogil:
        for trial in range(n_trials):
            _store_le64(rng_msg + 28, trial)
            _sponge256(rng_msg, 36, 0x06, digest)
            stream = _load_le64(digest)
            if cmode != C_MODE_RAW:
                _store_le64(v_msg + 18, trial)
                _sponge256(v_msg, 26, 0x06, value)
                memcpy(combined, value, 32)
            _store_le64(cand_msg + 21, trial)

            trial_discards = 0
            j = 0
            while True:
                coalition_won = _splitmix_double(&stream) < frac
                _store_le64(cand_msg + 29, j)
                _sponge256(cand_msg, 37, 0x06, block_hash)
                j += 1
                if cmode == C_MODE_FULL_COLLUSION:
                    memcpy(combined + 32, block_hash, 32)
                    _sponge256(combined, 64, 0x06, out)
                    bit = (out[byte_pos] >> shift) & 1
                else:
                    bit = (block_hash[byte_pos] >> shift) & 1
                if coalition_won and bit != want:
                    trial_discards += 1
                    if trial_discards >= cap:
                        livelocks += 1
                        break
                    continue
                break

            if cmode == C_MODE_NO_COLLUSION:
                memcpy(combined + 32, block_hash, 32)
                _sponge256(combined, 64, 0x06, out)
                bit = (out[byte_pos] >> shift) & 1
            elif cmode == C_MODE_RAW:
                bit = (block_hash[byte_pos] >> shift) & 1
            # full collusion: bit already holds the published output bit

            if bit == want:
                hits += 1
            discards += trial_discards

    return int(hits), int(discards), int(livelocks)

"""Adaptive binary range coder.

Carry-less 32-bit low/range coder (Subbotin style) over 12-bit adaptive
binary contexts.  Encoder and decoder renormalize on identical conditions,
so the byte-emission schedule matches on both sides; `bytes_done` exposes it
for per-block bit accounting.
"""

from __future__ import annotations

from .errors import CorruptStream

TOP = 1 << 24
BOT = 1 << 16
MASK = 0xFFFFFFFF

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
PROB_HALF = PROB_ONE >> 1
PROB_MIN = 32
PROB_MAX = PROB_ONE - 32
ADAPT_SHIFT = 5

FLUSH_BYTES = 4


def new_context(p_zero: int = PROB_HALF) -> list[int]:
    """A context is a single-element list holding P(bit == 0) in 1/4096."""
    return [p_zero]


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK
        self.out = bytearray()
        self._symbols = 0

    @property
    def bytes_done(self) -> int:
        return len(self.out)

    def _renorm(self):
        low = self.low
        rng = self.range
        out = self.out
        while True:
            if (low ^ (low + rng)) & MASK < TOP:
                pass
            elif rng < BOT:
                rng = (-low) & (BOT - 1)
            else:
                break
            out.append((low >> 24) & 0xFF)
            low = (low << 8) & MASK
            rng = (rng << 8) & MASK
        self.low = low
        self.range = rng

    def encode_bit(self, ctx: list[int], bit: int):
        self._symbols += 1
        p = ctx[0]
        split = (self.range >> PROB_BITS) * p
        if bit == 0:
            self.range = split
            ctx[0] = min(p + ((PROB_ONE - p) >> ADAPT_SHIFT), PROB_MAX)
        else:
            self.low = (self.low + split) & MASK
            self.range -= split
            ctx[0] = max(p - (p >> ADAPT_SHIFT), PROB_MIN)
        self._renorm()

    def encode_bit_bypass(self, bit: int):
        self._symbols += 1
        split = (self.range >> 1)
        if bit == 0:
            self.range = split
        else:
            self.low = (self.low + split) & MASK
            self.range -= split
        self._renorm()

    def encode_unary(self, ctx: list[int], value: int, cap: int) -> int:
        """Capped unary: `value` ones then a zero (omitted at the cap).

        Returns the remainder still to be coded (value - cap, or 0).
        """
        for _ in range(min(value, cap)):
            self.encode_bit(ctx, 1)
        if value < cap:
            self.encode_bit(ctx, 0)
            return 0
        return value - cap

    def encode_eg0_bypass(self, value: int):
        """Order-0 exp-Golomb, bypass coded."""
        v = value + 1
        nbits = v.bit_length() - 1
        for _ in range(nbits):
            self.encode_bit_bypass(1)
        self.encode_bit_bypass(0)
        for i in range(nbits - 1, -1, -1):
            self.encode_bit_bypass((v >> i) & 1)

    def encode_ue(self, ctx: list[int], value: int, cap: int = 8):
        """Unsigned value: adaptive capped unary prefix + EG0 remainder."""
        rem = self.encode_unary(ctx, value, cap)
        if value >= cap:
            self.encode_eg0_bypass(rem)

    def encode_se(self, ctx: list[int], value: int, cap: int = 8):
        mapped = 2 * value - 1 if value > 0 else -2 * value
        self.encode_ue(ctx, mapped, cap)

    def flush(self) -> bytes:
        if self._symbols == 0:
            return b""
        low = self.low
        for _ in range(FLUSH_BYTES):
            self.out.append((low >> 24) & 0xFF)
            low = (low << 8) & MASK
        return bytes(self.out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.low = 0
        self.range = MASK
        self.code = 0
        for _ in range(4):
            self.code = (self.code << 8) | self._next_byte()
        self._init_bytes = self.pos

    @property
    def bytes_done(self) -> int:
        """Bytes consumed past the initial fill; mirrors encoder emission."""
        return self.pos - self._init_bytes

    def _next_byte(self) -> int:
        if self.pos >= len(self.data):
            raise CorruptStream("range coder ran past end of payload")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def _renorm(self):
        low = self.low
        rng = self.range
        code = self.code
        while True:
            if (low ^ (low + rng)) & MASK < TOP:
                pass
            elif rng < BOT:
                rng = (-low) & (BOT - 1)
            else:
                break
            code = ((code << 8) | self._next_byte()) & MASK
            low = (low << 8) & MASK
            rng = (rng << 8) & MASK
        self.low = low
        self.range = rng
        self.code = code

    def decode_bit(self, ctx: list[int]) -> int:
        p = ctx[0]
        split = (self.range >> PROB_BITS) * p
        if ((self.code - self.low) & MASK) < split:
            bit = 0
            self.range = split
            ctx[0] = min(p + ((PROB_ONE - p) >> ADAPT_SHIFT), PROB_MAX)
        else:
            bit = 1
            self.low = (self.low + split) & MASK
            self.range -= split
            ctx[0] = max(p - (p >> ADAPT_SHIFT), PROB_MIN)
        self._renorm()
        return bit

    def decode_bit_bypass(self) -> int:
        split = (self.range >> 1)
        if ((self.code - self.low) & MASK) < split:
            bit = 0
            self.range = split
        else:
            bit = 1
            self.low = (self.low + split) & MASK
            self.range -= split
        self._renorm()
        return bit

    def decode_unary(self, ctx: list[int], cap: int) -> int:
        value = 0
        while value < cap and self.decode_bit(ctx) == 1:
            value += 1
        return value

    def decode_eg0_bypass(self) -> int:
        nbits = 0
        while self.decode_bit_bypass() == 1:
            nbits += 1
            if nbits > 32:
                raise CorruptStream("oversized exp-Golomb prefix")
        v = 1
        for _ in range(nbits):
            v = (v << 1) | self.decode_bit_bypass()
        return v - 1

    def decode_ue(self, ctx: list[int], cap: int = 8) -> int:
        value = self.decode_unary(ctx, cap)
        if value == cap:
            value += self.decode_eg0_bypass()
        return value

    def decode_se(self, ctx: list[int], cap: int = 8) -> int:
        mapped = self.decode_ue(ctx, cap)
        if mapped & 1:
            return (mapped + 1) // 2
        return -(mapped // 2)

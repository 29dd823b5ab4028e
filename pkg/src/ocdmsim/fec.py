"""Rate-1/2 recursive systematic convolutional code with an exact log-MAP
soft-in/soft-out decoder, plus the interleaving and frame-validity helpers
of the iterative receiver.

The code is the 64-state {133,171} octal pair: feedback polynomial 133,
feedforward polynomial 171, constraint length 7.  Frames are terminated with
6 feedback-driven tail bits so the encoder ends in state 0, which pins both
trellis boundaries for the decoder.

The forward/backward recursions run under numba when available; the same
loops execute as plain Python otherwise (slow but identical results).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .mapping import LLR_CAP, clip_llrs

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

FEEDBACK_POLY = 0o133
FEEDFORWARD_POLY = 0o171
CONSTRAINT_LENGTH = 7
MEMORY = CONSTRAINT_LENGTH - 1
N_STATES = 1 << MEMORY
TAIL_BITS = MEMORY

CRC24_POLY = 0x1864CFB
CRC24_LEN = 24


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _poly_coeffs(poly: int) -> list[int]:
    # coefficient of the delay-i register value, i = 0 (current) .. MEMORY
    return [(poly >> (MEMORY - i)) & 1 for i in range(CONSTRAINT_LENGTH)]


@dataclass(frozen=True, eq=False)
class RscTrellis:
    """Precomputed state-transition tables of the recursive systematic code.

    State packs the last MEMORY feedback-register bits, newest in the MSB.
    ``next_state[u, s]`` / ``parity[u, s]`` give the transition for input bit
    u from state s; ``tail_bit[s]`` is the input that steps the register
    toward zero during termination.
    """

    feedback_poly: int = FEEDBACK_POLY
    feedforward_poly: int = FEEDFORWARD_POLY
    next_state: np.ndarray = field(init=False, repr=False)
    parity: np.ndarray = field(init=False, repr=False)
    parity_sign: np.ndarray = field(init=False, repr=False)
    prev_state: np.ndarray = field(init=False, repr=False)
    prev_bit: np.ndarray = field(init=False, repr=False)
    tail_bit: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        fb = _poly_coeffs(self.feedback_poly)
        ff = _poly_coeffs(self.feedforward_poly)
        if fb[0] != 1:
            raise ValueError("feedback polynomial must have the current-bit tap set")
        nxt = np.zeros((2, N_STATES), dtype=np.int64)
        par = np.zeros((2, N_STATES), dtype=np.uint8)
        tail = np.zeros(N_STATES, dtype=np.uint8)
        for s in range(N_STATES):
            # register bit for delay i (i=1..MEMORY) sits at position MEMORY-i
            reg_fb = _parity(s & _mask(fb))
            reg_ff = _parity(s & _mask(ff))
            tail[s] = reg_fb
            for u in (0, 1):
                s_new = u ^ reg_fb
                nxt[u, s] = (s_new << (MEMORY - 1)) | (s >> 1)
                par[u, s] = (ff[0] & s_new) ^ reg_ff
        prev_state = np.zeros((N_STATES, 2), dtype=np.int64)
        prev_bit = np.zeros((N_STATES, 2), dtype=np.int64)
        fill = np.zeros(N_STATES, dtype=np.int64)
        for s in range(N_STATES):
            for u in (0, 1):
                ns = nxt[u, s]
                prev_state[ns, fill[ns]] = s
                prev_bit[ns, fill[ns]] = u
                fill[ns] += 1
        if not np.all(fill == 2):
            raise ValueError("trellis is not binary-regular")
        object.__setattr__(self, "next_state", nxt)
        object.__setattr__(self, "parity", par)
        object.__setattr__(self, "parity_sign", 1.0 - 2.0 * par.astype(np.float64))
        object.__setattr__(self, "prev_state", prev_state)
        object.__setattr__(self, "prev_bit", prev_bit)
        object.__setattr__(self, "tail_bit", tail)


def _mask(coeffs: list[int]) -> int:
    m = 0
    for i in range(1, CONSTRAINT_LENGTH):
        if coeffs[i]:
            m |= 1 << (MEMORY - i)
    return m


_TRELLIS = RscTrellis()


@njit(cache=True)
def _encode_kernel(bits, next_state, parity, tail_bit):
    k = bits.size
    out = np.empty(2 * (k + TAIL_BITS), dtype=np.uint8)
    s = 0
    for i in range(k + TAIL_BITS):
        u = bits[i] if i < k else tail_bit[s]
        out[2 * i] = u
        out[2 * i + 1] = parity[u, s]
        s = next_state[u, s]
    return out, s


def rsc_encode(info_bits: np.ndarray) -> np.ndarray:
    """Encode info bits; output alternates systematic and parity bits and
    includes the 6 termination steps.  Length is 2 * (K + 6)."""
    bits = np.ascontiguousarray(info_bits, dtype=np.uint8)
    if bits.size == 0:
        raise ValueError("rsc_encode: empty input")
    if bits.max(initial=0) > 1:
        raise ValueError("rsc_encode: input must be 0/1 valued")
    out, end_state = _encode_kernel(
        bits, _TRELLIS.next_state, _TRELLIS.parity, _TRELLIS.tail_bit
    )
    assert end_state == 0
    return out


@njit(cache=True, inline="always")
def _maxstar(a, b):
    if a >= b:
        m, d = a, a - b
    else:
        m, d = b, b - a
    if d > 40.0:
        return m
    return m + math.log1p(math.exp(-d))


@njit(cache=True)
def _bcjr_kernel(ls, lp, next_state, parity_sign, prev_state, prev_bit):
    steps = ls.size
    neg = -1.0e18
    alpha = np.full((steps + 1, N_STATES), neg)
    alpha[0, 0] = 0.0
    for t in range(steps):
        hs = 0.5 * ls[t]
        hp = 0.5 * lp[t]
        for ns in range(N_STATES):
            s0 = prev_state[ns, 0]
            u0 = prev_bit[ns, 0]
            s1 = prev_state[ns, 1]
            u1 = prev_bit[ns, 1]
            a = alpha[t, s0] + (hs if u0 == 0 else -hs) + hp * parity_sign[u0, s0]
            b = alpha[t, s1] + (hs if u1 == 0 else -hs) + hp * parity_sign[u1, s1]
            alpha[t + 1, ns] = _maxstar(a, b)
    beta = np.full((steps + 1, N_STATES), neg)
    beta[steps, 0] = 0.0
    for t in range(steps - 1, -1, -1):
        hs = 0.5 * ls[t]
        hp = 0.5 * lp[t]
        for s in range(N_STATES):
            a = beta[t + 1, next_state[0, s]] + hs + hp * parity_sign[0, s]
            b = beta[t + 1, next_state[1, s]] - hs + hp * parity_sign[1, s]
            beta[t, s] = _maxstar(a, b)
    post_sys = np.empty(steps)
    post_par = np.empty(steps)
    for t in range(steps):
        hs = 0.5 * ls[t]
        hp = 0.5 * lp[t]
        m_s0 = neg
        m_s1 = neg
        m_p0 = neg
        m_p1 = neg
        for s in range(N_STATES):
            m = alpha[t, s] + hs + hp * parity_sign[0, s] + beta[t + 1, next_state[0, s]]
            m_s0 = _maxstar(m_s0, m)
            if parity_sign[0, s] > 0.0:
                m_p0 = _maxstar(m_p0, m)
            else:
                m_p1 = _maxstar(m_p1, m)
            m = alpha[t, s] - hs + hp * parity_sign[1, s] + beta[t + 1, next_state[1, s]]
            m_s1 = _maxstar(m_s1, m)
            if parity_sign[1, s] > 0.0:
                m_p0 = _maxstar(m_p0, m)
            else:
                m_p1 = _maxstar(m_p1, m)
        post_sys[t] = m_s0 - m_s1
        post_par[t] = m_p0 - m_p1
    return post_sys, post_par


def bcjr_siso(channel_llrs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact log-MAP decode of one terminated frame.

    Input: LLRs over all 2*(K+6) coded bits in transmit order (systematic,
    parity alternating).  Returns a-posteriori LLRs for every coded bit in
    the same order (clipped) and raw a-posteriori LLRs for the K info bits.
    """
    llrs = np.ascontiguousarray(channel_llrs, dtype=float)
    if llrs.ndim != 1 or llrs.size % 2 != 0 or llrs.size < 2 * (TAIL_BITS + 1):
        raise ValueError("bcjr_siso: input must hold 2*(K+6) LLRs with K >= 1")
    ls = np.ascontiguousarray(llrs[0::2])
    lp = np.ascontiguousarray(llrs[1::2])
    post_sys, post_par = _bcjr_kernel(
        ls,
        lp,
        _TRELLIS.next_state,
        _TRELLIS.parity_sign,
        _TRELLIS.prev_state,
        _TRELLIS.prev_bit,
    )
    coded = np.empty(llrs.size)
    coded[0::2] = post_sys
    coded[1::2] = post_par
    k = llrs.size // 2 - TAIL_BITS
    return clip_llrs(coded), post_sys[:k].copy()


def extrinsic_from_decoder(coded_post: np.ndarray, decoder_input: np.ndarray) -> np.ndarray:
    """Decoder output minus decoder input, clipped: the extrinsic part that
    feeds back to the equalizer."""
    a = np.asarray(coded_post, dtype=float)
    b = np.asarray(decoder_input, dtype=float)
    if a.shape != b.shape:
        raise ValueError("extrinsic_from_decoder: length mismatch")
    return clip_llrs(a - b)


@dataclass(frozen=True, eq=False)
class Interleaver:
    """Seed-derived bijection on coded-bit positions."""

    permutation: np.ndarray
    inverse: np.ndarray

    @property
    def size(self) -> int:
        return self.permutation.size


def make_interleaver(n: int, rng: np.random.Generator) -> Interleaver:
    if n < 1:
        raise ValueError("make_interleaver: size must be >= 1")
    perm = rng.permutation(n)
    inv = np.empty(n, dtype=perm.dtype)
    inv[perm] = np.arange(n)
    return Interleaver(perm, inv)


def interleave(x: np.ndarray, ilv: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != ilv.size:
        raise ValueError("interleave: length does not match permutation")
    return x[ilv.permutation]


def deinterleave(x: np.ndarray, ilv: Interleaver) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1] != ilv.size:
        raise ValueError("deinterleave: length does not match permutation")
    return x[ilv.inverse]


def crc24_remainder(bits: np.ndarray) -> int:
    """Remainder of bits * x^24 modulo the CRC-24 generator (MSB-first,
    zero initial register)."""
    reg = 0
    for b in np.asarray(bits, dtype=np.uint8):
        reg = (reg << 1) | int(b)
        if reg & (1 << CRC24_LEN):
            reg ^= CRC24_POLY
    for _ in range(CRC24_LEN):
        reg <<= 1
        if reg & (1 << CRC24_LEN):
            reg ^= CRC24_POLY
    return reg


def crc24_bits(payload_bits: np.ndarray) -> np.ndarray:
    """CRC-24 checksum bits (MSB first) to append to a payload."""
    rem = crc24_remainder(payload_bits)
    return np.array([(rem >> (CRC24_LEN - 1 - i)) & 1 for i in range(CRC24_LEN)], dtype=np.uint8)


def attach_crc24(payload_bits: np.ndarray) -> np.ndarray:
    payload_bits = np.asarray(payload_bits, dtype=np.uint8)
    return np.concatenate([payload_bits, crc24_bits(payload_bits)])


def check_crc24(frame_bits: np.ndarray) -> bool:
    """True iff the frame is a payload with a valid appended CRC-24."""
    frame_bits = np.asarray(frame_bits, dtype=np.uint8)
    if frame_bits.size <= CRC24_LEN:
        return False
    return crc24_remainder(frame_bits[:-CRC24_LEN]) == _crc_int(frame_bits[-CRC24_LEN:])


def _crc_int(bits: np.ndarray) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def frame_check(decoded_info: np.ndarray, mode: str = "genie", truth: np.ndarray | None = None) -> bool:
    """Frame-validity test: 'genie' compares against the true info bits
    (an idealized CRC), 'crc24' validates the appended checksum."""
    if mode == "genie":
        if truth is None:
            raise ValueError("frame_check: genie mode needs the true info bits")
        return bool(np.array_equal(np.asarray(decoded_info, dtype=np.uint8), np.asarray(truth, dtype=np.uint8)))
    if mode == "crc24":
        return check_crc24(decoded_info)
    raise ValueError(f"frame_check: unknown mode {mode!r}")

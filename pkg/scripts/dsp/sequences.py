"""
Sounding code sequences.

Generates and characterizes the four code families used for channel
sounding: Galois LFSR m-sequences, Gold codes, Golay complementary
sequences and loosely synchronous (LS) sequences.

Conventions (fixed for every family):
  - bit 0 maps to chip +1, bit 1 maps to chip -1
  - polynomials are tuples of exponents in descending order, so
    x^8+x^6+x^5+x^4+1 is ``(8, 6, 5, 4, 0)``
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import max_len_seq

from utils.errors import SequenceError

logger = logging.getLogger(__name__)

Polynomial = Tuple[int, ...]
BitVector = Union[int, Sequence[int]]


class SequenceFamily(Enum):
    """Code-sequence families."""
    GLFSR = "glfsr"
    GOLD = "gold"
    GOLAY_A = "golay_a"
    GOLAY_B = "golay_b"
    LS = "ls"


class CorrelationKind(Enum):
    """Lag handling for auto/cross-correlation profiles."""
    PERIODIC = "periodic"
    APERIODIC = "aperiodic"


# Primitive feedback polynomial per register degree
PRIMITIVE_POLYNOMIALS: Dict[int, Polynomial] = {
    2: (2, 1, 0),
    3: (3, 2, 0),
    4: (4, 3, 0),
    5: (5, 3, 0),
    6: (6, 5, 0),
    7: (7, 6, 0),
    8: (8, 6, 5, 4, 0),
    9: (9, 5, 0),
    10: (10, 7, 0),
    11: (11, 9, 0),
    12: (12, 11, 10, 4, 0),
    13: (13, 12, 11, 8, 0),
    14: (14, 13, 12, 2, 0),
    15: (15, 14, 0),
    16: (16, 15, 13, 4, 0),
}

# Preferred pairs (octal 45/75, 103/147, 211/217, 1021/1131, 2011/2415, 4005/4445).
# No preferred pairs exist for degrees divisible by 4.
PREFERRED_PAIRS: Dict[int, Tuple[Polynomial, Polynomial]] = {
    5: ((5, 2, 0), (5, 4, 3, 2, 0)),
    6: ((6, 1, 0), (6, 5, 2, 1, 0)),
    7: ((7, 3, 0), (7, 3, 2, 1, 0)),
    9: ((9, 4, 0), (9, 6, 4, 3, 0)),
    10: ((10, 3, 0), (10, 8, 3, 2, 0)),
    11: ((11, 2, 0), (11, 8, 5, 2, 0)),
}

# Delay / weight vectors of the recursive Golay construction, indexed by length.
GOLAY_RECURSIONS: Dict[int, Tuple[Tuple[int, ...], Tuple[int, ...]]] = {
    2: ((1,), (1,)),
    32: ((1, 4, 8, 2, 16), (-1, 1, -1, 1, -1)),
    64: ((2, 1, 4, 8, 16, 32), (1, 1, -1, -1, 1, -1)),
    128: ((1, 8, 2, 4, 16, 32, 64), (-1, -1, -1, -1, 1, -1, -1)),
}


@dataclass(frozen=True, eq=False)
class CodeSequence:
    """Bipolar sounding code with the parameters that produced it."""
    family: SequenceFamily
    chips: np.ndarray
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.int8).reshape(-1)
        if chips.size == 0:
            raise SequenceError("sequence must contain at least one chip")
        bad = np.flatnonzero(np.abs(chips) != 1)
        if bad.size:
            raise SequenceError(
                f"chip {int(bad[0])} is {int(chips[bad[0]])}, expected -1 or +1",
                index=int(bad[0]),
            )
        chips = chips.copy()
        chips.flags.writeable = False
        object.__setattr__(self, "chips", chips)

    @property
    def length(self) -> int:
        return int(self.chips.size)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CodeSequence):
            return NotImplemented
        return self.family is other.family and np.array_equal(self.chips, other.chips)

    def __hash__(self) -> int:
        return hash((self.family, self.chips.tobytes()))


def bits_to_chips(bits: Iterable[int]) -> np.ndarray:
    """Map bits to bipolar chips (0 -> +1, 1 -> -1)."""
    return (1 - 2 * np.fromiter(bits, dtype=np.int8)).astype(np.int8)


def _bits_to_int(value: BitVector, width: int, name: str) -> int:
    """Accept an integer or an MSB-first bit list and return the integer."""
    if isinstance(value, (int, np.integer)):
        out = int(value)
    else:
        out = 0
        for bit in value:
            if bit not in (0, 1):
                raise SequenceError(f"{name} must contain only 0/1 bits")
            out = (out << 1) | int(bit)
    if out < 0 or out >= (1 << width):
        raise SequenceError(f"{name} {out:#x} does not fit in {width} bits")
    return out


def parse_polynomial(text: Union[str, Sequence[int]]) -> Polynomial:
    """
    Parse a GF(2) polynomial.

    Accepts ``z^6+z+1`` / ``x^6+x+1`` notation or an exponent list such as
    ``"6,1,0"`` or ``[6, 1, 0]``.
    """
    if not isinstance(text, str):
        exps = [int(e) for e in text]
    else:
        cleaned = text.replace(" ", "").lower()
        if re.fullmatch(r"[\[\(]?\d+(,\d+)*[\]\)]?", cleaned):
            exps = [int(e) for e in cleaned.strip("[]()").split(",")]
        else:
            exps = []
            for term in cleaned.split("+"):
                m = re.fullmatch(r"([xz])(\^(\d+))?|1", term)
                if not m:
                    raise SequenceError(f"cannot parse polynomial term '{term}' in '{text}'")
                if term == "1":
                    exps.append(0)
                else:
                    exps.append(int(m.group(3)) if m.group(3) else 1)
    if len(set(exps)) != len(exps):
        raise SequenceError(f"repeated exponent in polynomial {text}")
    poly = tuple(sorted(exps, reverse=True))
    if not poly or poly[-1] != 0 or poly[0] < 2:
        raise SequenceError(f"polynomial {text} must have degree >= 2 and a constant term")
    return poly


def format_polynomial(poly: Polynomial, var: str = "z") -> str:
    terms = []
    for e in poly:
        terms.append("1" if e == 0 else var if e == 1 else f"{var}^{e}")
    return "+".join(terms)


def m_sequence_bits(poly: Polynomial) -> np.ndarray:
    """One period of the m-sequence of ``poly`` (all-ones initial state)."""
    degree = poly[0]
    # s[n+m] = s[n] ^ sum(s[n+e]) for the inner exponents e
    taps = list(poly[1:-1])
    bits, _ = max_len_seq(degree, state=np.ones(degree, dtype=np.int8), taps=taps)
    return bits.astype(np.int8)


def _is_two_valued(chips: np.ndarray) -> bool:
    profile = _periodic_correlation(chips, chips)
    return profile[0] == chips.size and bool(np.all(profile[1:] == -1))


def generate_glfsr(degree: int, mask: BitVector = 0, seed: BitVector = 1) -> CodeSequence:
    """
    Galois LFSR sequence of period 2^degree - 1.

    The register shifts right; when the bit leaving stage 0 is 1 the feedback
    word of the degree's primitive polynomial is XORed into the state. With
    ``mask == 0`` the output is the stage-0 bit, i.e. the m-sequence itself;
    a nonzero mask outputs the parity of ``state & mask`` (a cyclic shift of
    the same m-sequence).
    """
    if degree not in PRIMITIVE_POLYNOMIALS:
        raise SequenceError(f"degree must be in 2..16, got {degree}", degree=degree)
    mask_int = _bits_to_int(mask, degree, "mask")
    seed_int = _bits_to_int(seed, degree, "seed")
    if seed_int == 0:
        raise SequenceError("seed must be nonzero (an all-zero register never leaves zero)")

    poly = PRIMITIVE_POLYNOMIALS[degree]
    feedback = 0
    for e in poly:
        if e >= 1:
            feedback |= 1 << (e - 1)

    period = (1 << degree) - 1
    bits = np.empty(period, dtype=np.int8)
    state = seed_int
    for n in range(period):
        if mask_int:
            bits[n] = bin(state & mask_int).count("1") & 1
        else:
            bits[n] = state & 1
        lsb = state & 1
        state >>= 1
        if lsb:
            state ^= feedback

    return CodeSequence(
        family=SequenceFamily.GLFSR,
        chips=bits_to_chips(bits),
        params={"degree": degree, "mask": mask_int, "seed": seed_int,
                "polynomial": format_polynomial(poly, "x")},
    )


def gold_correlation_values(degree: int) -> Tuple[int, int, int]:
    """The three cross-correlation values {-1, -t, t-2} of a preferred pair."""
    t = 1 + 2 ** ((degree + 2) // 2)
    return (-1, -t, t - 2)


def is_preferred_pair(poly1: Polynomial, poly2: Polynomial) -> bool:
    """Both polynomials primitive, distinct, and three-valued cross-correlation."""
    if poly1[0] != poly2[0] or poly1 == poly2:
        return False
    a = bits_to_chips(m_sequence_bits(poly1))
    b = bits_to_chips(m_sequence_bits(poly2))
    if not (_is_two_valued(a) and _is_two_valued(b)):
        return False
    values = set(np.unique(_periodic_correlation(a, b)).tolist())
    return values <= set(gold_correlation_values(poly1[0]))


def generate_gold(poly1: Optional[Union[str, Polynomial]] = None,
                  poly2: Optional[Union[str, Polynomial]] = None,
                  shift: int = 0,
                  degree: Optional[int] = None) -> CodeSequence:
    """
    Gold sequence: chipwise product of two preferred m-sequences, the second
    cyclically advanced by ``shift`` chips.

    When no polynomials are given the documented preferred pair for
    ``degree`` is used.
    """
    if poly1 is None or poly2 is None:
        if degree not in PREFERRED_PAIRS:
            raise SequenceError(
                f"no preferred pair on record for degree {degree}; "
                f"known degrees: {sorted(PREFERRED_PAIRS)}", degree=degree)
        p1, p2 = PREFERRED_PAIRS[degree]
    else:
        p1 = parse_polynomial(poly1) if isinstance(poly1, str) else tuple(poly1)
        p2 = parse_polynomial(poly2) if isinstance(poly2, str) else tuple(poly2)

    if p1[0] != p2[0]:
        raise SequenceError(
            f"polynomials have unequal degree ({p1[0]} vs {p2[0]})",
            degree1=p1[0], degree2=p2[0])
    m = p1[0]
    period = (1 << m) - 1
    if not 0 <= shift < period:
        raise SequenceError(f"shift must be in [0, {period}), got {shift}", shift=shift)
    if not is_preferred_pair(p1, p2):
        raise SequenceError(
            f"{format_polynomial(p1)} and {format_polynomial(p2)} are not a preferred pair")

    a = bits_to_chips(m_sequence_bits(p1))
    b = bits_to_chips(m_sequence_bits(p2))
    chips = a * np.roll(b, -shift)
    return CodeSequence(
        family=SequenceFamily.GOLD,
        chips=chips,
        params={"degree": m, "poly1": format_polynomial(p1), "poly2": format_polynomial(p2),
                "shift": shift},
    )


def golay_pair(length: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Golay complementary pair (Ga, Gb) from the recursive delay/weight rule:

        A_k(n) = W_k A_{k-1}(n) + B_{k-1}(n - D_k)
        B_k(n) = W_k A_{k-1}(n) - B_{k-1}(n - D_k)

    starting from A_0 = B_0 = delta(n).
    """
    if length not in GOLAY_RECURSIONS:
        raise SequenceError(
            f"unsupported Golay length {length}; supported: {sorted(GOLAY_RECURSIONS)}",
            length=length)
    delays, weights = GOLAY_RECURSIONS[length]
    a = np.zeros(length, dtype=np.int64)
    b = np.zeros(length, dtype=np.int64)
    a[0] = b[0] = 1
    for d, w in zip(delays, weights):
        shifted = np.zeros_like(b)
        shifted[d:] = b[:length - d]
        a, b = w * a + shifted, w * a - shifted
    return a.astype(np.int8), b.astype(np.int8)


def generate_golay(length: int, which: str = "A") -> CodeSequence:
    """Ga_length or Gb_length."""
    which = which.upper()
    if which not in ("A", "B"):
        raise SequenceError(f"which must be 'A' or 'B', got {which!r}")
    a, b = golay_pair(length)
    family = SequenceFamily.GOLAY_A if which == "A" else SequenceFamily.GOLAY_B
    return CodeSequence(family=family, chips=a if which == "A" else b,
                        params={"length": length})


def generate_ls(base_pair_length: int, member: int = 0) -> CodeSequence:
    """
    Loosely synchronous sequence from a Golay pair, first codeset, no
    interference-free window: member 0 is A||B, member 1 is A||-B.
    """
    if member not in (0, 1):
        raise SequenceError(f"LS member must be 0 or 1, got {member}")
    if base_pair_length not in GOLAY_RECURSIONS:
        raise SequenceError(
            f"unsupported LS base length {base_pair_length}; "
            f"supported: {sorted(GOLAY_RECURSIONS)}", length=base_pair_length)
    a, b = golay_pair(base_pair_length)
    chips = np.concatenate([a, b if member == 0 else -b])
    return CodeSequence(family=SequenceFamily.LS, chips=chips,
                        params={"base_pair_length": base_pair_length, "member": member})


def _periodic_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_n a[n] b[(n+k) mod N] for k = 0..N-1, exact for integer chips."""
    fa = np.fft.fft(np.asarray(a, dtype=float))
    fb = np.fft.fft(np.asarray(b, dtype=float))
    return np.rint(np.fft.ifft(np.conj(fa) * fb).real).astype(np.int64)


def cross_correlation(a: Union[CodeSequence, np.ndarray], b: Union[CodeSequence, np.ndarray],
                      mode: Union[str, CorrelationKind] = CorrelationKind.PERIODIC) -> np.ndarray:
    """
    chi(k) = sum_n a[n] b[n+k] for k = 0..N-1.

    Periodic mode wraps indices; aperiodic mode zero-extends (sequences of
    unequal length allowed, profile length = len(b)).
    """
    mode = CorrelationKind(mode) if not isinstance(mode, CorrelationKind) else mode
    x = np.asarray(a.chips if isinstance(a, CodeSequence) else a, dtype=np.int64)
    y = np.asarray(b.chips if isinstance(b, CodeSequence) else b, dtype=np.int64)
    if mode is CorrelationKind.PERIODIC:
        if x.size != y.size:
            raise SequenceError("periodic correlation needs equal-length sequences")
        return _periodic_correlation(x, y)
    full = np.correlate(y, x, mode="full")
    return full[x.size - 1:x.size - 1 + y.size].astype(np.int64)


def autocorrelation(seq: CodeSequence,
                    mode: Union[str, CorrelationKind] = CorrelationKind.PERIODIC) -> np.ndarray:
    """Autocorrelation profile over lags 0..N-1."""
    return cross_correlation(seq, seq, mode)


def sequence_stats(seq: CodeSequence,
                   mode: Union[str, CorrelationKind] = CorrelationKind.PERIODIC) -> Dict[str, float]:
    """Peak, largest sidelobe magnitude and peak-to-sidelobe ratio in dB."""
    profile = autocorrelation(seq, mode)
    peak = int(profile[0])
    sidelobe = int(np.max(np.abs(profile[1:]))) if profile.size > 1 else 0
    psr = float("inf") if sidelobe == 0 else 20.0 * np.log10(peak / sidelobe)
    return {"length": seq.length, "peak": peak, "max_sidelobe": sidelobe, "psr_db": psr}


def save_chips(seq: CodeSequence, path: Union[str, Path]) -> Path:
    """One chip per line (+1/-1), preceded by '#' metadata lines."""
    path = Path(path)
    lines = [f"# family={seq.family.value}", f"# length={seq.length}"]
    lines += [f"# {k}={v}" for k, v in seq.params.items()]
    lines += ["+1" if c > 0 else "-1" for c in seq.chips]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_chips(path: Union[str, Path],
               family: Optional[SequenceFamily] = None) -> CodeSequence:
    """Read a chip file written by :func:`save_chips` (or any +1/-1 list)."""
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise SequenceError(f"{path}: cannot read chip file ({getattr(e, 'strerror', None) or e})",
                            path=str(path)) from e
    chips = []
    params: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key == "family" and family is None:
                family = SequenceFamily(value)
            elif key and key != "length":
                params[key] = value
            continue
        if line not in ("+1", "-1", "1"):
            raise SequenceError(f"{path}:{lineno}: expected '+1' or '-1', got {line!r}",
                                line=lineno)
        chips.append(-1 if line == "-1" else 1)
    return CodeSequence(family=family or SequenceFamily.GLFSR, chips=np.array(chips),
                        params=params)



#!/usr/bin/env python3
"""
Bit Stream Test - measurement bit strings, self-contained codecs and the
compression form of the tripartite inequality

Bit mapping (fixed everywhere): outcome +1 -> bit 0, outcome -1 -> bit 1,
so the product of outcomes is the XOR of bits. Bits are packed MSB-first.

Codec streams (sizes in CompressionReport count these bits exactly):

  rle-elias      32-bit length | 8-bit first-bit marker | Elias-gamma run lengths
  block-huffman  32-bit length | 8-bit block size | 8-bit tail length | 8-bit mode | body
                 mode 0: empty, no body
                 mode 1: single symbol, body = symbol (block bits) + 32-bit block count
                 mode 2: 5-bit code length per possible symbol, then canonical codes

Blob files add a container prefix: version byte 0x01 and a codec id byte.
See FORMAT_REFERENCE.md for the full layout.
"""

import heapq
import logging
import math
import multiprocessing
import pathlib
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ghz_errors import ArityError, CodecError, LengthMismatchError, RangeError
from inequalities import InequalityReport, make_report
from qstate import DensityMatrix, MeasurementSetting, joint_outcome_distribution

log = logging.getLogger("BITSTREAM")

# ============================================================================
# CONFIGURATION
# ============================================================================

BLOB_VERSION = 0x01

CODEC_RLE_ELIAS = "rle-elias"
CODEC_BLOCK_HUFFMAN = "block-huffman"
CODEC_IDS = {CODEC_RLE_ELIAS: 1, CODEC_BLOCK_HUFFMAN: 2}

LENGTH_BITS = 32
RLE_HEADER_BITS = 40
HUFFMAN_HEADER_BITS = 56
CODE_LENGTH_BITS = 5
MAX_CODE_LENGTH = (1 << CODE_LENGTH_BITS) - 1

HUFFMAN_EMPTY, HUFFMAN_SINGLE, HUFFMAN_TREE = 0, 1, 2

# operational O(log n) side condition: output_bits <= SIDE_CONDITION_FACTOR * log2 n
SIDE_CONDITION_FACTOR = 64

SAMPLING_ZERO = 1e-15

# Contexts in report order; per party, 0 selects setting 1 and 1 selects setting 2
CONTEXTS = (
    ("111", (0, 0, 0)),
    ("122", (0, 1, 1)),
    ("212", (1, 0, 1)),
    ("221", (1, 1, 0)),
)
PARTY_NAMES = ("a", "b", "c")


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class BitString:
    """`length` bits packed MSB-first into `payload`; pad bits are zero"""
    length: int
    payload: bytes

    def __post_init__(self):
        if self.length < 0:
            raise RangeError(f"Bit length cannot be negative: {self.length}")
        if len(self.payload) != (self.length + 7) // 8:
            raise LengthMismatchError(f"{self.length} bits need {(self.length + 7) // 8} bytes, got {len(self.payload)}")
        pad = 8 * len(self.payload) - self.length
        if pad and self.payload[-1] & ((1 << pad) - 1):
            raise CodecError("Pad bits of a BitString must be zero")

    @classmethod
    def from_bits(cls, bits: Union[Sequence[int], np.ndarray]) -> "BitString":
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if np.any(bits > 1):
            raise RangeError("Bits must be 0 or 1")
        return cls(int(bits.size), np.packbits(bits).tobytes())

    @classmethod
    def from_outcomes(cls, outcomes: Union[Sequence[int], np.ndarray]) -> "BitString":
        """+1 -> 0, -1 -> 1"""
        outcomes = np.asarray(outcomes, dtype=int).reshape(-1)
        if not np.all(np.abs(outcomes) == 1):
            raise RangeError("Outcomes must be ±1")
        return cls.from_bits((1 - outcomes) // 2)

    @property
    def bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.payload, dtype=np.uint8), count=self.length)

    def ones(self) -> int:
        return int(self.bits.sum())

    def __len__(self):
        return self.length


@dataclass(frozen=True)
class CompressionReport:
    codec: str
    input_bits: int
    output_bits: int
    lossless_verified: bool


@dataclass(frozen=True)
class RoundSamples:
    """Per-context bit strings (a, b, c), each of length n"""
    n: int
    seed: int
    contexts: Dict[str, Tuple[BitString, BitString, BitString]] = field(compare=False)

    def __post_init__(self):
        for label, strings in self.contexts.items():
            if any(s.length != self.n for s in strings):
                raise LengthMismatchError(f"Context {label} strings do not all have length {self.n}")

    def xor(self, label: str) -> BitString:
        return xor_strings(*self.contexts[label])

    def party_strings(self) -> Dict[str, BitString]:
        """a1, a2, b1, b2, c1, c2: each party's bits per setting, rounds of both contexts
        that use the setting concatenated in context order (length 2n)"""
        strings = {}
        for party, name in enumerate(PARTY_NAMES):
            for setting in (0, 1):
                pieces = [self.contexts[label][party].bits
                          for label, choice in CONTEXTS if choice[party] == setting]
                strings[f"{name}{setting + 1}"] = BitString.from_bits(np.concatenate(pieces))
        return strings


# ============================================================================
# BIT I/O
# ============================================================================

class BitWriter:
    """Accumulates bits as '0'/'1' text, packs MSB-first"""

    def __init__(self):
        self._chunks: List[str] = []
        self.bit_length = 0

    def write(self, value: int, width: int):
        if width == 0:
            return
        if value < 0 or value >> width:
            raise CodecError(f"Value {value} does not fit in {width} bits")
        self.write_text(format(value, f"0{width}b"))

    def write_text(self, text: str):
        self._chunks.append(text)
        self.bit_length += len(text)

    def to_bytes(self) -> bytes:
        text = "".join(self._chunks)
        if not text:
            return b""
        bits = np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")
        return np.packbits(bits).tobytes()


class BitReader:
    def __init__(self, blob: bytes):
        bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))
        self._text = (bits + ord("0")).tobytes().decode("ascii")
        self.pos = 0

    def read(self, width: int) -> int:
        if width == 0:
            return 0
        end = self.pos + width
        if end > len(self._text):
            raise CodecError("Truncated stream")
        value = int(self._text[self.pos:end], 2)
        self.pos = end
        return value

    def read_bit(self) -> int:
        if self.pos >= len(self._text):
            raise CodecError("Truncated stream")
        bit = 1 if self._text[self.pos] == "1" else 0
        self.pos += 1
        return bit

    def read_gamma(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
        return (1 << zeros) | self.read(zeros)


def elias_gamma(value: int) -> str:
    if value < 1:
        raise CodecError(f"Elias gamma needs a positive integer, got {value}")
    binary = format(value, "b")
    return "0" * (len(binary) - 1) + binary


# ============================================================================
# SAMPLING
# ============================================================================

def _context_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def _sample_context(args) -> Tuple[np.ndarray, ...]:
    state, observables, n, seed, stream = args
    dist = joint_outcome_distribution(state, MeasurementSetting(observables))
    probs = np.where(dist.probs < SAMPLING_ZERO, 0.0, dist.probs)
    cdf = np.cumsum(probs / probs.sum())
    cdf[-1] = 1.0
    draws = _context_rng(seed, stream).random(n)
    # inverse CDF over outcomes in index order
    index = np.minimum(np.searchsorted(cdf, draws, side="right"), len(cdf) - 1)
    return tuple(((index >> (2 - party)) & 1).astype(np.uint8) for party in range(3))


def sample_rounds(state: DensityMatrix, settings: Sequence, n: int, seed: int, jobs: int = 1) -> RoundSamples:
    """Sample each of the four contexts n times from its exact outcome distribution"""
    if n < 1:
        raise RangeError(f"Number of rounds must be >= 1, got {n}")
    if seed < 0:
        raise RangeError(f"Seed must be non-negative, got {seed}")
    if state.n_qubits != 3:
        raise ArityError(f"Round sampling needs a 3-qubit state, got {state.n_qubits} qubits")
    if len(settings) != 6:
        raise ArityError(f"Expected 6 observables (a1, a2, b1, b2, c1, c2), got {len(settings)}")
    a, b, c = settings[0:2], settings[2:4], settings[4:6]
    tasks = [(state, (a[ia], b[ib], c[ic]), n, seed, stream)
             for stream, (_, (ia, ib, ic)) in enumerate(CONTEXTS)]
    if jobs > 1:
        with multiprocessing.Pool(processes=min(jobs, len(tasks))) as pool:
            sampled = pool.map(_sample_context, tasks)
    else:
        sampled = [_sample_context(task) for task in tasks]
    contexts = {label: tuple(BitString.from_bits(bits) for bits in party_bits)
                for (label, _), party_bits in zip(CONTEXTS, sampled)}
    log.debug(f"sampled {len(CONTEXTS)} contexts x {n} rounds (seed {seed})")
    return RoundSamples(n=n, seed=seed, contexts=contexts)


def xor_strings(x: BitString, y: BitString, z: BitString) -> BitString:
    if not x.length == y.length == z.length:
        raise LengthMismatchError(f"Cannot XOR strings of lengths {x.length}, {y.length}, {z.length}")
    arrays = [np.frombuffer(s.payload, dtype=np.uint8) for s in (x, y, z)]
    return BitString(x.length, np.bitwise_xor.reduce(arrays).tobytes() if arrays[0].size else b"")


def frequency_ok(x: BitString) -> bool:
    """|#ones/n - 0.5| <= 3/sqrt(4n)"""
    if x.length == 0:
        return True
    return abs(x.ones() / x.length - 0.5) <= 3 / math.sqrt(4 * x.length)


# ============================================================================
# RLE + ELIAS GAMMA
# ============================================================================

def _rle_encode(x: BitString) -> Tuple[bytes, int]:
    writer = BitWriter()
    writer.write(x.length, LENGTH_BITS)
    bits = x.bits
    writer.write(int(bits[0]) if x.length else 0, 8)
    if x.length:
        boundaries = np.flatnonzero(np.diff(bits)) + 1
        runs = np.diff(np.concatenate(([0], boundaries, [x.length])))
        writer.write_text("".join(elias_gamma(int(r)) for r in runs))
    return writer.to_bytes(), writer.bit_length


def rle_elias_decompress(blob: bytes) -> BitString:
    reader = BitReader(blob)
    length = reader.read(LENGTH_BITS)
    symbol = reader.read(8)
    if symbol > 1:
        raise CodecError(f"Bad leading-bit marker {symbol}")
    symbols, runs, total = [], [], 0
    while total < length:
        run = reader.read_gamma()
        symbols.append(symbol)
        runs.append(run)
        total += run
        symbol ^= 1
    if total != length:
        raise CodecError(f"Run lengths add up to {total}, header says {length}")
    bits = np.repeat(np.asarray(symbols, dtype=np.uint8), runs) if runs else np.zeros(0, dtype=np.uint8)
    return BitString.from_bits(bits)


def rle_elias_compress(x: BitString) -> Tuple[CompressionReport, bytes]:
    blob, nbits = _rle_encode(x)
    verified = rle_elias_decompress(blob) == x
    return CompressionReport(CODEC_RLE_ELIAS, x.length, nbits, verified), blob


# ============================================================================
# BLOCK HUFFMAN
# ============================================================================

def huffman_code_lengths(freq: np.ndarray) -> Dict[int, int]:
    """Code length per used symbol; ties broken by (frequency, smallest symbol in subtree)"""
    counts = {int(s): int(f) for s, f in enumerate(freq) if f > 0}
    while True:
        heap = [(f, s, [s]) for s, f in counts.items()]
        heapq.heapify(heap)
        lengths = {s: 0 for s in counts}
        while len(heap) > 1:
            f1, s1, group1 = heapq.heappop(heap)
            f2, s2, group2 = heapq.heappop(heap)
            for s in group1 + group2:
                lengths[s] += 1
            heapq.heappush(heap, (f1 + f2, min(s1, s2), group1 + group2))
        if max(lengths.values()) <= MAX_CODE_LENGTH:
            return lengths
        # flatten the distribution until every length fits the 5-bit codebook field
        counts = {s: (f + 1) // 2 for s, f in counts.items()}


def canonical_codes(lengths: Dict[int, int]) -> Dict[int, str]:
    codes = {}
    code, prev = 0, 0
    for symbol, length in sorted(lengths.items(), key=lambda item: (item[1], item[0])):
        code <<= length - prev
        codes[symbol] = format(code, f"0{length}b")
        code += 1
        prev = length
    return codes


def _blocks(x: BitString, block_bits: int) -> np.ndarray:
    bits = x.bits
    pad = (-x.length) % block_bits
    if pad:
        bits = np.concatenate((bits, np.zeros(pad, dtype=np.uint8)))
    weights = 1 << np.arange(block_bits - 1, -1, -1)
    return bits.reshape(-1, block_bits).astype(np.int64) @ weights


def _huffman_encode(x: BitString, block_bits: int) -> Tuple[bytes, int]:
    writer = BitWriter()
    writer.write(x.length, LENGTH_BITS)
    writer.write(block_bits, 8)
    writer.write(x.length % block_bits, 8)
    if x.length == 0:
        writer.write(HUFFMAN_EMPTY, 8)
        return writer.to_bytes(), writer.bit_length
    symbols = _blocks(x, block_bits)
    freq = np.bincount(symbols, minlength=1 << block_bits)
    used = np.flatnonzero(freq)
    if used.size == 1:
        writer.write(HUFFMAN_SINGLE, 8)
        writer.write(int(used[0]), block_bits)
        writer.write(int(symbols.size), LENGTH_BITS)
        return writer.to_bytes(), writer.bit_length
    writer.write(HUFFMAN_TREE, 8)
    codes = canonical_codes(huffman_code_lengths(freq))
    writer.write_text("".join(format(len(codes.get(s, "")), f"0{CODE_LENGTH_BITS}b")
                              for s in range(1 << block_bits)))
    writer.write_text("".join(codes[int(s)] for s in symbols))
    return writer.to_bytes(), writer.bit_length


def block_huffman_decompress(blob: bytes) -> BitString:
    reader = BitReader(blob)
    length = reader.read(LENGTH_BITS)
    block_bits = reader.read(8)
    tail = reader.read(8)
    mode = reader.read(8)
    if not 1 <= block_bits <= 16:
        raise CodecError(f"Bad block size {block_bits}")
    if tail != length % block_bits:
        raise CodecError(f"Tail length {tail} does not match length {length}")
    n_blocks = -(-length // block_bits)
    if mode == HUFFMAN_EMPTY:
        symbols = np.zeros(0, dtype=np.int64)
    elif mode == HUFFMAN_SINGLE:
        symbol = reader.read(block_bits)
        count = reader.read(LENGTH_BITS)
        if count != n_blocks:
            raise CodecError(f"Block count {count} does not match length {length}")
        symbols = np.full(count, symbol, dtype=np.int64)
    elif mode == HUFFMAN_TREE:
        lengths = {}
        for s in range(1 << block_bits):
            code_length = reader.read(CODE_LENGTH_BITS)
            if code_length:
                lengths[s] = code_length
        decode = {code: s for s, code in canonical_codes(lengths).items()}
        out = []
        prefix = ""
        while len(out) < n_blocks:
            prefix += "1" if reader.read_bit() else "0"
            if prefix in decode:
                out.append(decode[prefix])
                prefix = ""
            elif len(prefix) > MAX_CODE_LENGTH:
                raise CodecError("Invalid Huffman code in stream")
        symbols = np.asarray(out, dtype=np.int64)
    else:
        raise CodecError(f"Unknown Huffman mode {mode}")
    shifts = np.arange(block_bits - 1, -1, -1)
    bits = ((symbols[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)
    return BitString.from_bits(bits[:length])


def block_huffman_compress(x: BitString, block_bits: int = 8) -> Tuple[CompressionReport, bytes]:
    if not 1 <= block_bits <= 16:
        raise RangeError(f"block_bits must lie in [1, 16], got {block_bits}")
    blob, nbits = _huffman_encode(x, block_bits)
    verified = block_huffman_decompress(blob) == x
    return CompressionReport(CODEC_BLOCK_HUFFMAN, x.length, nbits, verified), blob


# ============================================================================
# CODEC DISPATCH
# ============================================================================

def compress(x: BitString, codec: str, block_bits: int = 8) -> Tuple[CompressionReport, bytes]:
    if codec == CODEC_RLE_ELIAS:
        return rle_elias_compress(x)
    if codec == CODEC_BLOCK_HUFFMAN:
        return block_huffman_compress(x, block_bits)
    raise CodecError(f"Unknown codec: {codec} (expected one of {sorted(CODEC_IDS)})")


def decompress(blob: bytes, codec: str) -> BitString:
    if codec == CODEC_RLE_ELIAS:
        return rle_elias_decompress(blob)
    if codec == CODEC_BLOCK_HUFFMAN:
        return block_huffman_decompress(blob)
    raise CodecError(f"Unknown codec: {codec}")


def compression_inequality_report(samples: RoundSamples, codec: str = CODEC_RLE_ELIAS,
                                  block_bits: int = 8) -> InequalityReport:
    """C(a1^b1^c1) <= C(a1^b2^c2) + C(a2^b1^c2) + C(a2^b2^c1), sizes in bits"""
    if codec not in CODEC_IDS:
        raise CodecError(f"Unknown codec: {codec} (expected one of {sorted(CODEC_IDS)})")
    reports = [compress(samples.xor(label), codec, block_bits)[0] for label, _ in CONTEXTS]
    bound = SIDE_CONDITION_FACTOR * math.log2(samples.n)
    side = [r.output_bits <= bound for r in reports[1:]]
    return make_report(
        reports[0].output_bits,
        [r.output_bits for r in reports[1:]],
        [label for label, _ in CONTEXTS],
        details={
            "codec": codec,
            "n": samples.n,
            "seed": samples.seed,
            "side_condition_bound": bound,
            "side_condition": side,
            "side_condition_met": all(side),
            "lossless_verified": all(r.lossless_verified for r in reports),
        },
    )


# ============================================================================
# FILES
# ============================================================================

def write_bitstring(path: Union[str, pathlib.Path], x: BitString):
    """8-byte little-endian bit length, then the MSB-first payload"""
    pathlib.Path(path).write_bytes(x.length.to_bytes(8, "little") + x.payload)


def read_bitstring(path: Union[str, pathlib.Path]) -> BitString:
    data = pathlib.Path(path).read_bytes()
    if len(data) < 8:
        raise CodecError(f"{path}: file too short for a bit-string header")
    return BitString(int.from_bytes(data[:8], "little"), data[8:])


def write_blob(path: Union[str, pathlib.Path], codec: str, blob: bytes):
    if codec not in CODEC_IDS:
        raise CodecError(f"Unknown codec: {codec}")
    pathlib.Path(path).write_bytes(bytes([BLOB_VERSION, CODEC_IDS[codec]]) + blob)


def read_blob(path: Union[str, pathlib.Path]) -> Tuple[str, bytes]:
    data = pathlib.Path(path).read_bytes()
    if len(data) < 2 or data[0] != BLOB_VERSION:
        raise CodecError(f"{path}: not a version-{BLOB_VERSION} blob")
    names = {v: k for k, v in CODEC_IDS.items()}
    if data[1] not in names:
        raise CodecError(f"{path}: unknown codec id {data[1]}")
    return names[data[1]], data[2:]

"""Staged compression transducer built on a selecting group automaton, and its decoder.

The fused :class:`PipelineMachine` reads binary input and writes one bit
stream of frames:

* ``0 | state | len(B2) | m payload bits``: block-coded selected symbols
  (buffer ``B1``) plus side information for decoding;
* ``1 | m raw bits``: rejected symbols (buffer ``B2``).

The ``t1_step`` / ``t2_step`` / ``t3_step`` functions implement the individual
stages on explicit state tuples; they serve as a reference for the fused
machine's debug tapes.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .automata import Dfa
from .coding import BlockCode, build_huffman, decode_blocks, encode_blocks
from .exceptions import ConfigurationError, CorruptionError, InputError, StructuralError
from .selection import select_array
from .stats import freq_table
from .validation import as_word, check_symbols, word_index


def _require_binary(dfa: Dfa) -> None:
    if dfa.alphabet_size != 2:
        raise InputError("the compression pipeline supports binary alphabets only")


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


@dataclass(frozen=True)
class SideInfo:
    state: int
    b2_len: int
    state_bits: int
    len_bits: int

    def encode(self) -> str:
        s = format(self.state, f"0{self.state_bits}b") if self.state_bits else ""
        ell = format(self.b2_len, f"0{self.len_bits}b") if self.len_bits else ""
        return s + ell

    @property
    def width(self) -> int:
        return self.state_bits + self.len_bits


# -- per-stage reference transitions -------------------------------------------


def t1_step(dfa: Dfa, p: int, a: int) -> tuple[str, str, int]:
    """Two-tape selector: ``a`` goes to tape 1 if the successor is final, else tape 2."""
    _require_binary(dfa)
    q = dfa.step(p, a)
    return (str(a), "", q) if q in dfa.finals else ("", str(a), q)


def run_t1(dfa: Dfa, u, start: int | None = None) -> tuple[str, str, int]:
    p = dfa.initial if start is None else start
    tape1, tape2 = [], []
    for a in as_word(u):
        o1, o2, p = t1_step(dfa, p, a)
        tape1.append(o1)
        tape2.append(o2)
    return "".join(tape1), "".join(tape2), p


def t2_step(dfa: Dfa, code: BlockCode, state: tuple[int, str], a: int) -> tuple[str, str, tuple[int, str]]:
    """Tape 1 carries the code of each completed k-block of selected symbols."""
    p, w = state
    q = dfa.step(p, a)
    if q not in dfa.finals:
        return "", str(a), (q, w)
    wa = w + str(a)
    if len(wa) < code.k:
        return "", "", (q, wa)
    return code.codewords[as_word(wa)], "", (q, "")


def t3_step(dfa: Dfa, code: BlockCode, m: int, state: tuple[int, str, str, str], a: int):
    """Merged single-tape output with ``0``/``1`` frame markers, no side information."""
    p, w1, w2, w3 = state
    q = dfa.step(p, a)
    if q in dfa.finals:
        w1a = w1 + str(a)
        if len(w1a) < code.k:
            return "", (q, w1a, w2, w3)
        merged = w2 + code.codewords[as_word(w1a)]
        if len(merged) < m:
            return "", (q, "", merged, w3)
        return "0" + merged[:m], (q, "", merged[m:], w3)
    w3a = w3 + str(a)
    if len(w3a) < m:
        return "", (q, w1, w2, w3a)
    return "1" + w3a, (q, w1, w2, "")


# -- fused machine ---------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    """Bookkeeping for one emitted frame (encoder side)."""

    kind: int  # 0 for a B1 frame, 1 for a B2 frame
    position: int  # input symbols consumed when emitted
    bit_start: int
    bit_end: int
    state: int
    b2_len: int
    blocks: int  # k-blocks coded so far
    code_bits: int  # total codeword bits of those blocks
    rejected: int  # rejected symbols so far


class PipelineMachine:
    """Fused selector + block coder + merger + side-information writer.

    Parameters
    ----------
    dfa : Dfa
        Binary automaton whose final states select symbols (a group automaton
        for the output to be decodable).
    code : BlockCode
        Block code for the selected stream.
    m : int
        Frame payload length; must be at least ``code.max_codeword_len``.
    debug : bool
        Keep the per-stage tapes (``tape1``, ``tape2``, ``code_tape``, ``merged_tape``).
    """

    def __init__(self, dfa: Dfa, code: BlockCode, m: int, debug: bool = False):
        _require_binary(dfa)
        if code.base != 2:
            raise ConfigurationError("block code must be over the binary alphabet")
        if m < 1 or m < code.max_codeword_len:
            raise ConfigurationError(
                f"merge length m={m} must be >= longest codeword ({code.max_codeword_len})"
            )
        self.dfa = dfa
        self.code = code
        self.m = m
        self.k = code.k
        self.debug = debug
        self.state_bits = ceil_log2(dfa.n_states)
        self.len_bits = ceil_log2(m)
        self._state_field = [format(q, f"0{self.state_bits}b") if self.state_bits else "" for q in range(dfa.n_states)]
        self._len_field = [format(ell, f"0{self.len_bits}b") if self.len_bits else "" for ell in range(m)]
        self._codewords = [code.codewords[b] for b in sorted(code.codewords)]
        self.state = dfa.initial
        self.block_index = 0
        self.block_len = 0
        self.b1 = ""
        self.b2 = ""
        self.consumed = 0
        self.emitted = 0
        self.selected = 0
        self.rejected = 0
        self.blocks = 0
        self.code_bits = 0
        self.frames: list[Frame] = []
        self._out: list[str] = []
        self.tape1: list[int] = []
        self.tape2: list[int] = []
        self.code_tape: list[str] = []
        self.merged_tape: list[str] = []

    @property
    def side_info_width(self) -> int:
        return self.state_bits + self.len_bits

    @property
    def bits(self) -> str:
        return "".join(self._out)

    def block_buffer(self) -> str:
        return format(self.block_index, f"0{self.block_len}b") if self.block_len else ""

    def feed(self, a: int) -> str:
        """Consume one symbol and return the bits emitted by that transition."""
        before = len(self._out)
        self.feed_many((a,))
        return "".join(self._out[before:])

    def feed_many(self, x) -> None:
        x = check_symbols(x, 2)
        tab = self.dfa.table
        fin = self.dfa.final_mask.tolist()
        cw = self._codewords
        k, m = self.k, self.m
        sfield, lfield = self._state_field, self._len_field
        out, frames = self._out, self.frames
        debug = self.debug
        q, bidx, blen = self.state, self.block_index, self.block_len
        b1, b2 = self.b1, self.b2
        pos, emitted = self.consumed, self.emitted
        selected, rejected, blocks, code_bits = self.selected, self.rejected, self.blocks, self.code_bits
        for a in x.tolist():
            q = tab[q][a]
            pos += 1
            if fin[q]:
                selected += 1
                if debug:
                    self.tape1.append(a)
                bidx = 2 * bidx + a
                blen += 1
                if blen == k:
                    c = cw[bidx]
                    b1 += c
                    blocks += 1
                    code_bits += len(c)
                    bidx = blen = 0
                    if debug:
                        self.code_tape.append(c)
                    if len(b1) >= m:
                        frame = "0" + sfield[q] + lfield[len(b2)] + b1[:m]
                        if debug:
                            self.merged_tape.append("0" + b1[:m])
                        b1 = b1[m:]
                        assert len(b1) < m
                        out.append(frame)
                        frames.append(Frame(0, pos, emitted, emitted + len(frame), q, len(b2), blocks, code_bits, rejected))
                        emitted += len(frame)
            else:
                rejected += 1
                if debug:
                    self.tape2.append(a)
                b2 += "1" if a else "0"
                if len(b2) == m:
                    frame = "1" + b2
                    if debug:
                        self.merged_tape.append(frame)
                    b2 = ""
                    out.append(frame)
                    frames.append(Frame(1, pos, emitted, emitted + len(frame), q, 0, blocks, code_bits, rejected))
                    emitted += len(frame)
        self.state, self.block_index, self.block_len = q, bidx, blen
        self.b1, self.b2 = b1, b2
        self.consumed, self.emitted = pos, emitted
        self.selected, self.rejected, self.blocks, self.code_bits = selected, rejected, blocks, code_bits

    @property
    def n_b1_frames(self) -> int:
        return sum(1 for f in self.frames if f.kind == 0)

    @property
    def n_b2_frames(self) -> int:
        return sum(1 for f in self.frames if f.kind == 1)

    def covered_prefix_length(self) -> int:
        """Input length recoverable from the bits emitted so far.

        A B1 frame can be decoded once the stream holds every codeword bit of
        the blocks coded when it was written and every rejected symbol counted
        by its side information.
        """
        b1_payload = self.m * self.n_b1_frames
        b2_payload = self.m * self.n_b2_frames
        covered = 0
        for f in self.frames:
            if f.kind == 0 and f.code_bits <= b1_payload and f.rejected <= b2_payload:
                covered = f.position
        return covered

    def report(self) -> dict:
        return {
            "consumed": self.consumed,
            "emitted_bits": self.emitted,
            "ratio": self.emitted / self.consumed if self.consumed else 0.0,
            "b1_frames": self.n_b1_frames,
            "b2_frames": self.n_b2_frames,
            "side_info_bits": self.side_info_width,
            "selected": self.selected,
            "rejected": self.rejected,
        }


def t4_step(machine: PipelineMachine, a: int) -> str:
    return machine.feed(a)


def encode_stream(dfa: Dfa, code: BlockCode, m: int, x, debug: bool = False) -> PipelineMachine:
    machine = PipelineMachine(dfa, code, m, debug=debug)
    machine.feed_many(x)
    return machine


def compression_ratio(dfa: Dfa, code: BlockCode, m: int, x, n: int | None = None) -> float:
    """Emitted bits per consumed input symbol, markers and side information included."""
    x = check_symbols(x, 2, n)
    if x.size == 0:
        raise InputError("compression ratio needs at least one input symbol")
    return encode_stream(dfa, code, m, x).emitted / x.size


def train_code(dfa: Dfa, x, k: int, train: int) -> BlockCode:
    """Huffman code fitted to the aligned k-blocks of the selected stream of ``x[:train]``."""
    y = select_array(dfa, check_symbols(x, dfa.alphabet_size, train))
    if y.size < k:
        raise InputError(f"training prefix selects {y.size} symbols, fewer than block length {k}")
    return build_huffman(freq_table(y, None, k, dfa.alphabet_size), k, dfa.alphabet_size)


# -- inversion and decoding ----------------------------------------------------------


def invert_run(dfa: Dfa, q: int, v, w, require_initial: bool = False) -> tuple[tuple[int, ...], int]:
    """Recover the unique input ``u`` and start state of a selector run ending in ``q``.

    ``v`` and ``w`` are the selected and rejected symbols of the run.  Returns
    ``(u, start)``; with ``require_initial`` the start must be the initial state.
    """
    if not dfa.is_group():
        raise StructuralError("run inversion requires a group automaton")
    v, w = as_word(v), as_word(w)
    i, j = len(v), len(w)
    out = []
    while i or j:
        if q in dfa.finals:
            if not i:
                raise CorruptionError(f"run ends in final state {dfa.names[q]} but no selected symbol remains")
            i -= 1
            a = v[i]
        else:
            if not j:
                raise CorruptionError(f"run ends in non-final state {dfa.names[q]} but no rejected symbol remains")
            j -= 1
            a = w[j]
        if not 0 <= a < dfa.alphabet_size:
            raise CorruptionError(f"symbol {a} outside the alphabet")
        q = dfa.inverse_step(q, a)
        out.append(a)
    if require_initial and q != dfa.initial:
        raise CorruptionError(f"reconstructed run starts in {dfa.names[q]}, not the initial state")
    return tuple(reversed(out)), q


@dataclass(frozen=True)
class _ParsedFrame:
    kind: int
    state: int
    b2_len: int
    b1_bits_after: int
    b2_bits_before: int
    bit_end: int


def _parse_frames(bits: str, n_states: int, m: int) -> tuple[list[_ParsedFrame], str, str]:
    sb, lb = ceil_log2(n_states), ceil_log2(m)
    frames = []
    b1, b2 = [], []
    n1 = n2 = 0
    pos = 0
    total = len(bits)
    while pos < total:
        marker = bits[pos]
        if marker == "0":
            end = pos + 1 + sb + lb + m
            if end > total:
                raise CorruptionError(f"truncated B1 frame at bit {pos}")
            state = int(bits[pos + 1 : pos + 1 + sb], 2) if sb else 0
            ell = int(bits[pos + 1 + sb : pos + 1 + sb + lb], 2) if lb else 0
            if state >= n_states:
                raise CorruptionError(f"frame at bit {pos} names state {state}, automaton has {n_states}")
            if ell >= m:
                raise CorruptionError(f"frame at bit {pos} claims B2 length {ell} >= m={m}")
            b1.append(bits[end - m : end])
            n1 += m
            frames.append(_ParsedFrame(0, state, ell, n1, n2, end))
        elif marker == "1":
            end = pos + 1 + m
            if end > total:
                raise CorruptionError(f"truncated B2 frame at bit {pos}")
            b2.append(bits[pos + 1 : end])
            n2 += m
            frames.append(_ParsedFrame(1, 0, 0, n1, n2, end))
        else:
            raise CorruptionError(f"non-bit character {marker!r} at offset {pos}")
        pos = end
    return frames, "".join(b1), "".join(b2)


@dataclass(frozen=True)
class DecodeResult:
    symbols: np.ndarray
    frame_index: int  # index of the B1 frame used, -1 if none
    bit_end: int  # stream offset up to which the reconstruction re-encodes exactly


def decode_stream_detailed(dfa: Dfa, code: BlockCode, m: int, bits: str, verify: bool = True) -> DecodeResult:
    _require_binary(dfa)
    if set(bits) - {"0", "1"}:
        raise CorruptionError("bit stream contains characters other than 0 and 1")
    frames, b1, b2 = _parse_frames(bits, dfa.n_states, m)
    selected, _rest = decode_blocks(code, b1)
    # bit offsets, within the B1 payload, at which each decoded codeword ends
    ends = []
    offset = 0
    k = code.k
    for i in range(0, len(selected), k):
        offset += len(code.codewords[selected[i : i + k]])
        ends.append(offset)
    n_blocks = len(ends)
    chosen = None
    for idx, f in enumerate(frames):
        if f.kind != 0:
            continue
        done = bisect_right(ends, f.b1_bits_after)
        partial = f.b1_bits_after > (ends[done - 1] if done else 0)
        needed = done + int(partial)
        w_len = f.b2_bits_before + f.b2_len
        if needed <= n_blocks and w_len <= len(b2):
            chosen = (idx, f, needed, w_len)
    if chosen is None:
        return DecodeResult(np.zeros(0, dtype=np.int64), -1, 0)
    idx, f, needed, w_len = chosen
    v = selected[: needed * k]
    w = tuple(ord(c) - 48 for c in b2[:w_len])
    u, _start = invert_run(dfa, f.state, v, w, require_initial=True)
    u_arr = np.array(u, dtype=np.int64)
    if verify:
        again = encode_stream(dfa, code, m, u_arr).bits
        if again != bits[: f.bit_end]:
            raise CorruptionError("re-encoding the reconstruction does not reproduce the bit stream")
    return DecodeResult(u_arr, idx, f.bit_end)


def decode_stream(dfa: Dfa, code: BlockCode, m: int, bits: str, verify: bool = True) -> np.ndarray:
    """Longest input prefix recoverable from a pipeline bit stream."""
    return decode_stream_detailed(dfa, code, m, bits, verify).symbols


def visit_frequencies(dfa: Dfa, x, n: int | None = None) -> np.ndarray:
    """Fraction of the ``n`` states entered along the run (states after each symbol)."""
    x = check_symbols(x, dfa.alphabet_size, n)
    if x.size == 0:
        raise InputError("visit frequencies need at least one symbol")
    return np.bincount(dfa.trace(x), minlength=dfa.n_states) / x.size


class PipelineCompressor(TransformerMixin, BaseEstimator):
    """Estimator facade: ``fit`` trains the block code on a prefix, ``transform`` compresses.

    Parameters
    ----------
    automaton : Dfa
        Binary group automaton used for selection.
    k : int
        Block length of the Huffman code.
    m : int
        Frame payload length.
    train : int or None
        Length of the training prefix (default: the whole fitted input).
    """

    def __init__(self, automaton: Dfa | None = None, k: int = 4, m: int = 64, train: int | None = None):
        self.automaton = automaton
        self.k = k
        self.m = m
        self.train = train

    def fit(self, X, y=None):
        if not isinstance(self.automaton, Dfa):
            raise InputError("PipelineCompressor needs a Dfa automaton")
        _require_binary(self.automaton)
        X = check_symbols(X, 2)
        self.code_ = train_code(self.automaton, X, self.k, self.train or X.size)
        if self.m < self.code_.max_codeword_len:
            raise ConfigurationError(f"m={self.m} shorter than longest codeword {self.code_.max_codeword_len}")
        return self

    def transform(self, X) -> str:
        check_is_fitted(self, "code_")
        return encode_stream(self.automaton, self.code_, self.m, X).bits

    def inverse_transform(self, bits: str) -> np.ndarray:
        check_is_fitted(self, "code_")
        return decode_stream(self.automaton, self.code_, self.m, bits)

    def compression_ratio(self, X) -> float:
        check_is_fitted(self, "code_")
        return compression_ratio(self.automaton, self.code_, self.m, X)

"""Normality-preserving selection of symbol sequences by finite automata."""

__version__ = "0.1.0"

from .automata import Dfa, SccReport, ends_with_one_automaton, example_group_automaton, load_automaton
from .augmented import (
    AugmentedAutomaton,
    BufferAutomatonAnalyzer,
    RecurrentPiece,
    build_buffer_automaton,
    check_measure_preservation,
    predicted_word_frequency,
    recurrent_piece,
    selected_frequency_via_buffer,
)
from .coding import BlockCode, HuffmanBlockCoder, build_huffman, decode_blocks, encode_blocks
from .exceptions import (
    ConfigurationError,
    CorruptionError,
    InconclusiveError,
    InputError,
    NormselError,
    StructuralError,
)
from .pipeline import PipelineCompressor, PipelineMachine, compression_ratio, decode_stream, invert_run
from .selection import PrefixSelector, build_la_automaton, select, select_array
from .sequences import GeneratorSpec, generate
from .stats import FreqTable, FrequencyProfile, freq_table, max_deviation, occ, ps_ratio

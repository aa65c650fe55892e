"""The four trace-to-vector encodings.

All schemes share one block-major layout: turn outermost, card innermost
by canonical index. Per scheme:

  turn        30 turns x (17 play counts, then 17 buy counts) = 1020.
              Turns past the end of the game stay all-zero.
  state       30 turns x 17 owned-card counts at end of turn  = 510.
              Short games hang: blocks past the last turn repeat the
              final composition.
  opening     first 10 turns of the state layout               = 170.
              Requires at least 10 turns; later turns are ignored.
  normalized  30 turns x 17 deck proportions (each block sums
              to 1), hang semantics as in state                = 510.

Counts are raw: no per-column standardization anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
import io

import numpy as np

from .cards import N_CARDS, PlayerTrace, canonical_index
from .replay import replay_trace

MAX_TURNS = 30
OPENING_TURNS = 10

SCHEMES = ("turn", "state", "opening", "normalized")
SCHEME_DIMS = {
    "turn": MAX_TURNS * 2 * N_CARDS,  # 1020
    "state": MAX_TURNS * N_CARDS,  # 510
    "opening": OPENING_TURNS * N_CARDS,  # 170
    "normalized": MAX_TURNS * N_CARDS,  # 510
}

BLOCK_SUM_TOL = 1e-9  # normalized blocks must sum to 1 within this


class TraceEncodeError(ValueError):
    def __init__(self, trace_id: str, detail: str):
        self.trace_id = trace_id
        self.detail = detail
        super().__init__(f"{trace_id}: {detail}")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    scheme: str
    trace_id: str

    def __post_init__(self) -> None:
        expected = SCHEME_DIMS[self.scheme]
        if self.values.shape != (expected,):
            raise ValueError(
                f"scheme {self.scheme!r} requires length {expected}, "
                f"got {self.values.shape}"
            )


@dataclass(frozen=True)
class EncodedCorpus:
    """Row-per-trace feature matrix plus parallel provenance."""

    matrix: np.ndarray  # (n_traces, dim) float64
    ids: tuple[str, ...]
    n_turns: np.ndarray  # (n_traces,) int
    labels: tuple[str | None, ...]
    scheme: str

    def __post_init__(self) -> None:
        n = self.matrix.shape[0]
        if not (len(self.ids) == self.n_turns.shape[0] == len(self.labels) == n):
            raise ValueError("corpus metadata length mismatch")

    @property
    def n_traces(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def _check_range(trace: PlayerTrace) -> None:
    if trace.n_turns > MAX_TURNS:
        raise TraceEncodeError(
            trace.trace_id,
            f"{trace.n_turns} turns exceeds the {MAX_TURNS}-turn layout",
        )


def encode_turn(trace: PlayerTrace) -> FeatureVector:
    """Per-turn play and buy counts, zero-padded after the last turn."""
    _check_range(trace)
    values = np.zeros(SCHEME_DIMS["turn"])
    for ev in trace.turns:
        base = (ev.turn - 1) * 2 * N_CARDS
        for card in ev.plays:
            values[base + canonical_index(card)] += 1
        for card in ev.buys:
            values[base + N_CARDS + canonical_index(card)] += 1
    return FeatureVector(values, "turn", trace.trace_id)


def _state_blocks(trace: PlayerTrace, n_blocks: int) -> np.ndarray:
    """(n_blocks, 17) end-of-turn counts with final-state hang."""
    timeline = replay_trace(trace)
    blocks = np.empty((n_blocks, N_CARDS))
    for t in range(1, n_blocks + 1):
        blocks[t - 1] = timeline.at_turn(t).counts
    return blocks


def encode_state(trace: PlayerTrace) -> FeatureVector:
    """End-of-turn owned-card counts, final state hanging through turn 30."""
    _check_range(trace)
    values = _state_blocks(trace, MAX_TURNS).reshape(-1)
    return FeatureVector(values, "state", trace.trace_id)


def encode_opening(trace: PlayerTrace) -> FeatureVector:
    """State encoding truncated to the first 10 turns."""
    if trace.n_turns < OPENING_TURNS:
        raise TraceEncodeError(
            trace.trace_id,
            f"opening encoding needs >= {OPENING_TURNS} turns, "
            f"trace has {trace.n_turns}",
        )
    values = _state_blocks(trace, OPENING_TURNS).reshape(-1)
    return FeatureVector(values, "opening", trace.trace_id)


def encode_normalized(trace: PlayerTrace) -> FeatureVector:
    """Deck proportions per turn: every 17-entry block lives on the L1
    unit ball. Hang semantics identical to the state encoding."""
    _check_range(trace)
    blocks = _state_blocks(trace, MAX_TURNS)
    totals = blocks.sum(axis=1, keepdims=True)
    if np.any(totals == 0):
        raise TraceEncodeError(trace.trace_id, "zero-total composition snapshot")
    blocks = blocks / totals
    sums = blocks.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > BLOCK_SUM_TOL):
        raise TraceEncodeError(trace.trace_id, "block normalization drifted")
    return FeatureVector(blocks.reshape(-1), "normalized", trace.trace_id)


_ENCODERS = {
    "turn": encode_turn,
    "state": encode_state,
    "opening": encode_opening,
    "normalized": encode_normalized,
}


def encode_trace(trace: PlayerTrace, scheme: str) -> FeatureVector:
    if scheme not in _ENCODERS:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return _ENCODERS[scheme](trace)


def encode_corpus(
    traces: list[PlayerTrace], scheme: str
) -> tuple[EncodedCorpus, list[tuple[str, str]]]:
    """Encode every trace, preserving order. Traces that violate the
    scheme's precondition are skipped and reported as (trace_id, reason)."""
    if scheme not in _ENCODERS:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    rows: list[np.ndarray] = []
    ids: list[str] = []
    n_turns: list[int] = []
    labels: list[str | None] = []
    errors: list[tuple[str, str]] = []
    for trace in traces:
        try:
            fv = _ENCODERS[scheme](trace)
        except TraceEncodeError as exc:
            errors.append((exc.trace_id, exc.detail))
            continue
        rows.append(fv.values)
        ids.append(trace.trace_id)
        n_turns.append(trace.n_turns)
        labels.append(trace.label)
    matrix = (
        np.vstack(rows) if rows else np.empty((0, SCHEME_DIMS[scheme]))
    )
    corpus = EncodedCorpus(
        matrix=matrix,
        ids=tuple(ids),
        n_turns=np.array(n_turns, dtype=np.int64),
        labels=tuple(labels),
        scheme=scheme,
    )
    return corpus, errors


# ---- corpus CSV (header: trace_id,n_turns,label,f0..f{D-1}) ----


def corpus_to_csv(corpus: EncodedCorpus) -> str:
    dim = corpus.dim
    out = io.StringIO()
    header = ["trace_id", "n_turns", "label"] + [f"f{i}" for i in range(dim)]
    out.write(",".join(header) + "\n")
    for i in range(corpus.n_traces):
        label = corpus.labels[i] or ""
        # %.17g keeps full float64 precision (>= 12 significant digits)
        feats = ",".join(format(v, ".17g") for v in corpus.matrix[i])
        out.write(f"{corpus.ids[i]},{corpus.n_turns[i]},{label},{feats}\n")
    return out.getvalue()


def corpus_from_csv(text: str) -> EncodedCorpus:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty corpus CSV")
    header = lines[0].split(",")
    if header[:3] != ["trace_id", "n_turns", "label"]:
        raise ValueError("bad corpus CSV header")
    dim = len(header) - 3
    ids: list[str] = []
    n_turns: list[int] = []
    labels: list[str | None] = []
    rows: list[np.ndarray] = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != dim + 3:
            raise ValueError(f"row has {len(parts)} fields, expected {dim + 3}")
        ids.append(parts[0])
        n_turns.append(int(parts[1]))
        labels.append(parts[2] or None)
        rows.append(np.array([float(v) for v in parts[3:]]))
    matrix = np.vstack(rows) if rows else np.empty((0, dim))
    return EncodedCorpus(
        matrix=matrix,
        ids=tuple(ids),
        n_turns=np.array(n_turns, dtype=np.int64),
        labels=tuple(labels),
        scheme=_sniff_scheme(dim, matrix),
    )


def _sniff_scheme(dim: int, matrix: np.ndarray) -> str:
    """Recover the scheme from a CSV, which stores only the width.

    510 columns is ambiguous between state and normalized; normalized
    rows have unit block sums, state rows sum to the deck size (>= 10).
    """
    if dim == SCHEME_DIMS["turn"]:
        return "turn"
    if dim == SCHEME_DIMS["opening"]:
        return "opening"
    if dim == SCHEME_DIMS["state"]:
        if matrix.shape[0] == 0:
            return "state"
        block_sums = matrix[0].reshape(MAX_TURNS, N_CARDS).sum(axis=1)
        normalized = np.all(np.abs(block_sums - 1.0) < 1e-6)
        return "normalized" if normalized else "state"
    return "unknown"

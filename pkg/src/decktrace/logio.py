"""Reading, writing, and filtering of the canonical game-log format.

One game per line, UTF-8 JSON:

    {"game_id": "g0",
     "players": ["p0", "p1"],
     "winner": "p0",                      # optional
     "labels": {"p0": "bigmoney"},        # optional, per-player strategy tags
     "capped": true,                      # optional, hit the simulator turn cap
     "turns": [{"player": "p0", "turn": 1,
                "plays": [...], "buys": [...],
                "gains": [...], "trashes": [...]}, ...]}

Card names must match the 17 canonical names exactly (case-sensitive).
Event arrays may be empty and are omitted when empty. Malformed records
are skipped and reported with their line number; a corrupt line never
aborts the rest of the corpus.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Union

from .cards import Card, PlayerTrace, TurnEvents, card_from_name

ParseError = tuple[int, str]  # (1-based line number, reason)

_EVENT_KEYS = ("plays", "buys", "gains", "trashes")


@dataclass(frozen=True)
class GameLog:
    """One multi-player game: per-player ordered turn events plus metadata."""

    game_id: str
    players: tuple[str, ...]
    turns: dict[str, tuple[TurnEvents, ...]]  # keyed by player id
    winner: str | None = None
    labels: dict[str, str] = field(default_factory=dict)
    capped: bool = False

    @property
    def n_players(self) -> int:
        return len(self.players)

    def validate(self) -> None:
        """Check structural invariants; raises ``ValueError`` on violation."""
        if not self.players:
            raise ValueError("game has no players")
        if len(set(self.players)) != len(self.players):
            raise ValueError("duplicate player ids")
        if set(self.turns) - set(self.players):
            raise ValueError("turn events reference unknown players")
        for pid in self.players:
            events = self.turns.get(pid, ())
            for i, ev in enumerate(events, start=1):
                if ev.turn != i:
                    raise ValueError(
                        f"player {pid}: turn indices not contiguous from 1"
                    )
        counts = [len(self.turns.get(p, ())) for p in self.players]
        if counts and max(counts) - min(counts) > 1:
            raise ValueError("players' turn counts differ by more than 1")
        if self.winner is not None and self.winner not in self.players:
            raise ValueError(f"winner {self.winner!r} is not a player")
        if set(self.labels) - set(self.players):
            raise ValueError("labels reference unknown players")


@dataclass(frozen=True)
class CorpusFilter:
    """Admission window for the analysis subset."""

    min_players: int = 2
    min_turns: int = 10
    max_turns: int = 30

    def __post_init__(self) -> None:
        if self.min_players < 1:
            raise ValueError("min_players must be >= 1")
        if self.min_turns > self.max_turns:
            raise ValueError("min_turns must be <= max_turns")


@dataclass(frozen=True)
class Histogram:
    """Trace count per game length (in turns)."""

    bins: dict[int, int]

    def total(self) -> int:
        return sum(self.bins.values())


def _as_lines(stream: Union[IO[bytes], IO[str], bytes, str, Iterable]) -> Iterator[str]:
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def _parse_cards(obj: dict, key: str) -> tuple[Card, ...]:
    names = obj.get(key, [])
    if not isinstance(names, list):
        raise ValueError(f"{key!r} must be an array")
    return tuple(card_from_name(n) for n in names)


def _parse_game(obj: dict) -> GameLog:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    game_id = obj.get("game_id")
    if not isinstance(game_id, str) or not game_id:
        raise ValueError("missing or empty game_id")
    players = obj.get("players")
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise ValueError("players must be an array of strings")

    per_player: dict[str, list[TurnEvents]] = {p: [] for p in players}
    for entry in obj.get("turns", []):
        if not isinstance(entry, dict):
            raise ValueError("turn entry is not an object")
        pid = entry.get("player")
        if pid not in per_player:
            raise ValueError(f"turn entry for unknown player {pid!r}")
        turn = entry.get("turn")
        if not isinstance(turn, int):
            raise ValueError("turn index must be an integer")
        if turn < 1:
            raise ValueError(f"negative or zero turn index {turn}")
        events = TurnEvents(
            turn=turn,
            plays=_parse_cards(entry, "plays"),
            buys=_parse_cards(entry, "buys"),
            gains=_parse_cards(entry, "gains"),
            trashes=_parse_cards(entry, "trashes"),
        )
        per_player[pid].append(events)

    labels = obj.get("labels", {})
    if not isinstance(labels, dict):
        raise ValueError("labels must be an object")
    game = GameLog(
        game_id=game_id,
        players=tuple(players),
        turns={p: tuple(evs) for p, evs in per_player.items()},
        winner=obj.get("winner"),
        labels=dict(labels),
        capped=bool(obj.get("capped", False)),
    )
    game.validate()
    return game


def parse_log_stream(stream) -> tuple[list[GameLog], list[ParseError]]:
    """Parse line-delimited game records.

    Returns the well-formed games in input order plus one
    ``(line_number, reason)`` entry per malformed record.
    """
    games: list[GameLog] = []
    errors: list[ParseError] = []
    for lineno, line in enumerate(_as_lines(stream), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append((lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            games.append(_parse_game(obj))
        except (ValueError, KeyError) as exc:
            errors.append((lineno, str(exc).strip("'\"")))
    return games, errors


def _events_to_obj(pid: str, ev: TurnEvents) -> dict:
    obj: dict = {"player": pid, "turn": ev.turn}
    for key, cards in zip(_EVENT_KEYS, (ev.plays, ev.buys, ev.gains, ev.trashes)):
        if cards:
            obj[key] = [c.value for c in cards]
    return obj


def game_to_record(game: GameLog) -> dict:
    """The JSON object form of one game (chronological turn order)."""
    rec: dict = {"game_id": game.game_id, "players": list(game.players)}
    if game.winner is not None:
        rec["winner"] = game.winner
    if game.labels:
        rec["labels"] = {p: game.labels[p] for p in game.players if p in game.labels}
    if game.capped:
        rec["capped"] = True
    entries = []
    max_turns = max((len(t) for t in game.turns.values()), default=0)
    for turn in range(1, max_turns + 1):
        for pid in game.players:
            events = game.turns.get(pid, ())
            if turn <= len(events):
                entries.append(_events_to_obj(pid, events[turn - 1]))
    rec["turns"] = entries
    return rec


def write_log_stream(games: Iterable[GameLog]) -> bytes:
    """Serialize games to the canonical line format. Deterministic;
    ``parse_log_stream`` round-trips the result losslessly."""
    out = io.BytesIO()
    for game in games:
        line = json.dumps(game_to_record(game), separators=(",", ":"))
        out.write(line.encode("utf-8"))
        out.write(b"\n")
    return out.getvalue()


def filter_traces(
    games: Iterable[GameLog], corpus_filter: CorpusFilter = CorpusFilter()
) -> list[PlayerTrace]:
    """Per-player traces of every game admitted by the filter.

    A game must seat at least ``min_players``; each player is admitted
    independently when that player's own turn count lies in
    [min_turns, max_turns] inclusive.
    """
    traces: list[PlayerTrace] = []
    for game in games:
        if game.n_players < corpus_filter.min_players:
            continue
        for pid in game.players:
            events = game.turns.get(pid, ())
            if not corpus_filter.min_turns <= len(events) <= corpus_filter.max_turns:
                continue
            won = None if game.winner is None else pid == game.winner
            traces.append(
                PlayerTrace(
                    game_id=game.game_id,
                    player_id=pid,
                    n_players=game.n_players,
                    turns=tuple(events),
                    won=won,
                    label=game.labels.get(pid),
                )
            )
    return traces


def turn_length_histogram(traces: Iterable[PlayerTrace]) -> Histogram:
    """Number of traces per exact turn count."""
    bins: dict[int, int] = {}
    for trace in traces:
        bins[trace.n_turns] = bins.get(trace.n_turns, 0) + 1
    return Histogram(bins)


# ---- trace files (one PlayerTrace per line, same conventions) ----


def trace_to_record(trace: PlayerTrace) -> dict:
    rec: dict = {
        "game_id": trace.game_id,
        "player_id": trace.player_id,
        "n_players": trace.n_players,
    }
    if trace.won is not None:
        rec["won"] = trace.won
    if trace.label is not None:
        rec["label"] = trace.label
    rec["turns"] = [
        {k: v for k, v in _events_to_obj("", ev).items() if k != "player"}
        for ev in trace.turns
    ]
    return rec


def write_trace_stream(traces: Iterable[PlayerTrace]) -> bytes:
    out = io.BytesIO()
    for trace in traces:
        line = json.dumps(trace_to_record(trace), separators=(",", ":"))
        out.write(line.encode("utf-8"))
        out.write(b"\n")
    return out.getvalue()


def parse_trace_stream(stream) -> tuple[list[PlayerTrace], list[ParseError]]:
    traces: list[PlayerTrace] = []
    errors: list[ParseError] = []
    for lineno, line in enumerate(_as_lines(stream), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            turns = tuple(
                TurnEvents(
                    turn=entry["turn"],
                    plays=_parse_cards(entry, "plays"),
                    buys=_parse_cards(entry, "buys"),
                    gains=_parse_cards(entry, "gains"),
                    trashes=_parse_cards(entry, "trashes"),
                )
                for entry in obj["turns"]
            )
            traces.append(
                PlayerTrace(
                    game_id=obj["game_id"],
                    player_id=obj["player_id"],
                    n_players=obj["n_players"],
                    turns=turns,
                    won=obj.get("won"),
                    label=obj.get("label"),
                )
            )
        except (ValueError, KeyError, TypeError) as exc:
            errors.append((lineno, str(exc).strip("'\"")))
    return traces, errors


# ---- histogram CSV ----


def histogram_to_csv(hist: Histogram) -> str:
    """CSV with header ``n_turns,count``, rows ascending by n_turns."""
    lines = ["n_turns,count"]
    for n_turns in sorted(hist.bins):
        lines.append(f"{n_turns},{hist.bins[n_turns]}")
    return "\n".join(lines) + "\n"


def histogram_from_csv(text: str) -> Histogram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "n_turns,count":
        raise ValueError("bad histogram CSV header")
    bins: dict[int, int] = {}
    for ln in lines[1:]:
        n, c = ln.split(",")
        bins[int(n)] = int(c)
    return Histogram(bins)

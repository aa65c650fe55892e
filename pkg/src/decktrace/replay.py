"""Replay trace events into end-of-turn deck compositions.

Plays never change ownership; buys and gains add cards, trashes remove
them. Within a turn additions are applied before removals, so a card
gained and trashed on the same turn is legal. A trash that exceeds the
owned count is a hard error: clamping would silently corrupt the
proportions every encoder downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cards import Composition, PlayerTrace, TurnEvents, starting_deck


class InconsistentTraceError(ValueError):
    """A trace's events cannot be replayed from the starting deck."""

    def __init__(self, turn: int, detail: str):
        self.turn = turn
        self.detail = detail
        super().__init__(f"turn {turn}: {detail}")


@dataclass(frozen=True)
class CompositionTimeline:
    """End-of-turn composition snapshots; ``snapshots[t-1]`` is the state
    after turn t. ``origin`` is the pre-game starting deck."""

    origin: Composition
    snapshots: tuple[Composition, ...]

    @property
    def n_turns(self) -> int:
        return len(self.snapshots)

    def at_turn(self, turn: int) -> Composition:
        """Composition at end of ``turn`` (1-based), hanging on the final
        state for turns past the end of the trace."""
        if turn < 1:
            raise ValueError("turn must be >= 1")
        return self.snapshots[min(turn, self.n_turns) - 1]

    def final(self) -> Composition:
        return self.snapshots[-1]


def apply_turn(state: Composition, events: TurnEvents) -> Composition:
    """state + buys + gains - trashes; plays leave composition unchanged."""
    try:
        return state.updated(
            add=tuple(events.buys) + tuple(events.gains), remove=events.trashes
        )
    except ValueError as exc:
        raise InconsistentTraceError(events.turn, str(exc)) from None


def replay_trace(trace: PlayerTrace) -> CompositionTimeline:
    """Fold the trace's turns over the starting deck."""
    origin = starting_deck()
    snapshots = []
    state = origin
    for events in trace.turns:
        state = apply_turn(state, events)
        snapshots.append(state)
    return CompositionTimeline(origin=origin, snapshots=tuple(snapshots))

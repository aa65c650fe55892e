"""Card universe, deck compositions, and per-game trace records.

The card set is closed: the 7 universal cards plus the 10 kingdom cards
of the most-played pool (Cellar, Market, Militia, Mine, Moat, Remodel,
Smithy, Village, Woodcutter, Workshop). Every other module keys its
feature layout off the canonical order declared here, so the order is
part of the package's stable contract:

    Copper, Silver, Gold, Estate, Duchy, Province, Curse,
    Cellar, Market, Militia, Mine, Moat, Remodel, Smithy,
    Village, Woodcutter, Workshop

(universal cards first, then kingdom cards alphabetically).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping


class Card(Enum):
    """One of the 17 cards; declaration order is the canonical order."""

    COPPER = "Copper"
    SILVER = "Silver"
    GOLD = "Gold"
    ESTATE = "Estate"
    DUCHY = "Duchy"
    PROVINCE = "Province"
    CURSE = "Curse"
    CELLAR = "Cellar"
    MARKET = "Market"
    MILITIA = "Militia"
    MINE = "Mine"
    MOAT = "Moat"
    REMODEL = "Remodel"
    SMITHY = "Smithy"
    VILLAGE = "Village"
    WOODCUTTER = "Woodcutter"
    WORKSHOP = "Workshop"

    def __repr__(self) -> str:  # "Card.MINE" noise hurts test diffs
        return f"<{self.value}>"


CANONICAL_ORDER: tuple[Card, ...] = tuple(Card)
N_CARDS = len(CANONICAL_ORDER)

_INDEX: dict[Card, int] = {c: i for i, c in enumerate(CANONICAL_ORDER)}
_BY_NAME: dict[str, Card] = {c.value: c for c in CANONICAL_ORDER}


def canonical_index(card: Card) -> int:
    """Position of ``card`` in the canonical order (0..16)."""
    return _INDEX[card]


def index_to_card(index: int) -> Card:
    """Inverse of :func:`canonical_index`."""
    return CANONICAL_ORDER[index]


def card_from_name(name: str) -> Card:
    """Look up a card by its exact (case-sensitive) display name.

    Raises ``KeyError`` for anything outside the 17-card universe.
    """
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"unknown card: {name!r}") from None


class CardClass(Enum):
    TREASURE = "treasure"
    VICTORY = "victory"
    ACTION = "action"
    CURSE = "curse"


@dataclass(frozen=True)
class CardInfo:
    """Static card metadata: standard base-game constants."""

    cost: int
    card_class: CardClass
    coin_value: int = 0  # coins produced when played; 0 for non-treasures
    vp: int = 0  # victory points at game end


CARD_INFO: dict[Card, CardInfo] = {
    Card.COPPER: CardInfo(0, CardClass.TREASURE, coin_value=1),
    Card.SILVER: CardInfo(3, CardClass.TREASURE, coin_value=2),
    Card.GOLD: CardInfo(6, CardClass.TREASURE, coin_value=3),
    Card.ESTATE: CardInfo(2, CardClass.VICTORY, vp=1),
    Card.DUCHY: CardInfo(5, CardClass.VICTORY, vp=3),
    Card.PROVINCE: CardInfo(8, CardClass.VICTORY, vp=6),
    Card.CURSE: CardInfo(0, CardClass.CURSE, vp=-1),
    Card.CELLAR: CardInfo(2, CardClass.ACTION),
    Card.MARKET: CardInfo(5, CardClass.ACTION),
    Card.MILITIA: CardInfo(4, CardClass.ACTION),
    Card.MINE: CardInfo(5, CardClass.ACTION),
    Card.MOAT: CardInfo(2, CardClass.ACTION),
    Card.REMODEL: CardInfo(4, CardClass.ACTION),
    Card.SMITHY: CardInfo(4, CardClass.ACTION),
    Card.VILLAGE: CardInfo(3, CardClass.ACTION),
    Card.WOODCUTTER: CardInfo(3, CardClass.ACTION),
    Card.WORKSHOP: CardInfo(3, CardClass.ACTION),
}


def card_cost(card: Card) -> int:
    """Standard base-game cost in coins."""
    return CARD_INFO[card].cost


@dataclass(frozen=True)
class Composition:
    """Multiset of every card a player owns (deck + hand + discard).

    Counts are stored in canonical order. Instances are immutable; the
    replay module derives new compositions turn by turn.
    """

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != N_CARDS:
            raise ValueError(f"expected {N_CARDS} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative card count")

    @classmethod
    def from_counts(cls, counts: Mapping[Card, int]) -> "Composition":
        vec = [0] * N_CARDS
        for card, n in counts.items():
            vec[canonical_index(card)] = n
        return cls(tuple(vec))

    @classmethod
    def empty(cls) -> "Composition":
        return cls((0,) * N_CARDS)

    def count(self, card: Card) -> int:
        return self.counts[canonical_index(card)]

    def total(self) -> int:
        return sum(self.counts)

    def proportions(self) -> tuple[float, ...]:
        """Counts normalized to sum to 1. Requires a non-empty deck."""
        total = self.total()
        if total == 0:
            raise ValueError("proportions of an empty composition are undefined")
        return tuple(c / total for c in self.counts)

    def proportion(self, card: Card) -> float:
        return self.count(card) / self.total()

    def updated(
        self,
        add: Iterable[Card] = (),
        remove: Iterable[Card] = (),
    ) -> "Composition":
        """New composition with ``add`` inserted and ``remove`` deleted.

        Raises ``ValueError`` if a removal would drive a count negative.
        """
        vec = list(self.counts)
        for card in add:
            vec[canonical_index(card)] += 1
        for card in remove:
            i = canonical_index(card)
            vec[i] -= 1
            if vec[i] < 0:
                raise ValueError(f"cannot remove {card.value}: none owned")
        return Composition(tuple(vec))


# Every player seeds from the same 10-card deck: 7 Copper + 3 Estate.
STARTING_COPPER = 7
STARTING_ESTATE = 3


def starting_deck() -> Composition:
    """The 10-card seed deck every player begins with."""
    return Composition.from_counts(
        {Card.COPPER: STARTING_COPPER, Card.ESTATE: STARTING_ESTATE}
    )


@dataclass(frozen=True)
class TurnEvents:
    """One player's recorded events for a single turn.

    ``buys`` and ``gains`` are disjoint streams: a bought card appears
    only in ``buys``; ``gains`` holds non-buy acquisitions (Workshop,
    Mine, Remodel).
    """

    turn: int
    plays: tuple[Card, ...] = ()
    buys: tuple[Card, ...] = ()
    gains: tuple[Card, ...] = ()
    trashes: tuple[Card, ...] = ()

    def __post_init__(self) -> None:
        if self.turn < 1:
            raise ValueError(f"turn index must be >= 1, got {self.turn}")


@dataclass(frozen=True)
class PlayerTrace:
    """One player's full per-turn event sequence within a single game."""

    game_id: str
    player_id: str
    n_players: int
    turns: tuple[TurnEvents, ...]
    won: bool | None = None
    label: str | None = None  # strategy tag, synthetic corpora only

    def __post_init__(self) -> None:
        if self.n_players < 1:
            raise ValueError("n_players must be >= 1")
        if not self.turns:
            raise ValueError("trace must have at least one turn")
        for i, ev in enumerate(self.turns, start=1):
            if ev.turn != i:
                raise ValueError(
                    f"turn indices must run 1..{len(self.turns)} "
                    f"consecutively; position {i} has turn {ev.turn}"
                )

    @property
    def n_turns(self) -> int:
        return len(self.turns)

    @property
    def trace_id(self) -> str:
        return f"{self.game_id}/{self.player_id}"

"""Deck-trace analytics: parse game logs, encode player traces, embed with
Barnes-Hut t-SNE, and render strategy-map figures."""

__version__ = "0.1.0"

from .cards import (
    CANONICAL_ORDER,
    CARD_INFO,
    Card,
    CardClass,
    CardInfo,
    Composition,
    PlayerTrace,
    TurnEvents,
    canonical_index,
    card_cost,
    card_from_name,
    index_to_card,
    starting_deck,
)

__all__ = [
    "CANONICAL_ORDER",
    "CARD_INFO",
    "Card",
    "CardClass",
    "CardInfo",
    "Composition",
    "PlayerTrace",
    "TurnEvents",
    "canonical_index",
    "card_cost",
    "card_from_name",
    "index_to_card",
    "starting_deck",
    "__version__",
]

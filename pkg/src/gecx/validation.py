"""Input validation helpers used at the public API boundaries."""

from __future__ import annotations

from typing import Iterable, Sequence


def check_sentence(tokens: Iterable[str]) -> tuple[str, ...]:
    """Validate one token sentence and return it as a tuple.

    Tokens must be non-empty strings without internal whitespace.  An
    empty sentence is allowed.
    """
    toks = tuple(tokens)
    for tok in toks:
        if not isinstance(tok, str):
            raise ValueError(f"token is not a string: {tok!r}")
        if not tok:
            raise ValueError("empty token in sentence")
        if any(ch.isspace() for ch in tok):
            raise ValueError(f"token contains whitespace: {tok!r}")
    return toks


def check_corpus(sentences: Iterable[Iterable[str]]) -> list[tuple[str, ...]]:
    """Validate a corpus of token sentences."""
    return [check_sentence(s) for s in sentences]


def check_same_length(*seqs: Sequence, names: Sequence[str]) -> None:
    """Raise if the given parallel sequences differ in length."""
    lengths = [len(s) for s in seqs]
    if len(set(lengths)) > 1:
        detail = ", ".join(f"{n}={l}" for n, l in zip(names, lengths))
        raise ValueError(f"parallel inputs differ in length: {detail}")

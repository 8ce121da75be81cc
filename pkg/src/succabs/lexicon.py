"""Lexical probabilities: P(tag | word) for known words, and a back-off
chain over the reversed-suffix trie for unknown words.

A known word keeps its raw relative frequencies and restricts the decoder
to its observed tags.  An unknown word walks the trie along its reversed
letters, and each matched node contributes one smoothing step on top of
the rare-word root distribution, so longer matched suffixes pull the
estimate further toward what words with that ending looked like in
training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counts import Lexicon, RareWordPolicy, SuffixTrie, reversed_suffix_path
from .errors import ValidationError
from .smoothing import (
    ROOT_MODE_ELE,
    ROOT_MODES,
    ConditionalDistribution,
    ele_estimate,
    smooth_linear_chain,
)


@dataclass(frozen=True)
class LexicalDistribution:
    """P(tag | word) with the set of tag indices seen in training.

    An empty support means the word is unknown and every tag stays in play.
    """

    probs: np.ndarray
    support: frozenset[int]

    def __post_init__(self):
        self.probs.flags.writeable = False


def known_word_distribution(lex: Lexicon, word: str) -> LexicalDistribution | None:
    """Relative tag frequencies of a training word; None if never seen."""
    vec = lex.entries.get(word)
    if vec is None:
        return None
    total = vec.sum()
    support = frozenset(int(i) for i in np.nonzero(vec)[0])
    return LexicalDistribution(vec / total, support)


@dataclass(frozen=True)
class UnknownWordModel:
    """Suffix trie plus the smoothed tag distribution of all rare tokens."""

    trie: SuffixTrie
    root: ConditionalDistribution
    policy: RareWordPolicy


def build_unknown_word_model(trie: SuffixTrie, policy: RareWordPolicy,
                             root_mode: str = ROOT_MODE_ELE) -> UnknownWordModel:
    if root_mode not in ROOT_MODES:
        raise ValidationError(f"unknown root mode {root_mode!r}")
    counts = trie.root.tag_counts
    if root_mode == ROOT_MODE_ELE:
        root = ele_estimate(counts)
    else:
        total = counts.sum()
        if total == 0:
            raise ValidationError(
                "no rare tokens in training: relative-frequency root undefined")
        root = ConditionalDistribution.from_probs(counts / total)
    return UnknownWordModel(trie, root, policy)


def unknown_word_distribution(m: UnknownWordModel, word: str) -> LexicalDistribution:
    """Estimate P(tag | word) from the word's longest matched suffix chain.

    Walks the trie along the reversed letters (begin-of-word marker last),
    stopping at the first unmatched letter or at the policy depth, and folds
    one smoothing step per matched node starting from the rare-word root.
    """
    if not word:
        raise ValidationError("cannot estimate a distribution for an empty word")
    chain = []
    node = m.trie.root
    for letter in reversed_suffix_path(word, m.policy.max_suffix_length):
        node = node.children.get(letter)
        if node is None:
            break
        total = node.node_total
        chain.append((node.tag_counts / total, total))
    if not chain:
        return LexicalDistribution(m.root.probs.copy(), frozenset())
    dist = smooth_linear_chain(chain, m.root)[-1]
    return LexicalDistribution(dist.probs.copy(), frozenset())


def lexical_factor(dist: LexicalDistribution, unigram: ConditionalDistribution,
                   tag: int) -> float:
    """P(tag | word) / P(tag), the word's contribution to a path score."""
    p_lex = float(dist.probs[tag])
    if p_lex == 0.0:
        return 0.0
    p_tag = float(unigram.probs[tag])
    if p_tag <= 0.0:
        raise ValidationError(
            f"tag index {tag} has zero unigram probability but nonzero "
            "lexical probability; use a strictly positive root mode")
    return p_lex / p_tag

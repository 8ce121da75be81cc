"""Tagged-corpus handling: parsing, serialization, splitting, synthesis.

The on-disk format is one token per line as ``word<TAB>tag``, with a blank
line separating sentences and ``#``-prefixed lines ignored.  Words and tags
are compared case-sensitively and never normalized.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import CorpusParseError, ValidationError

_FORBIDDEN_IN_SYMBOL = ("\t", "\n", "\r")


@dataclass(frozen=True)
class TagSet:
    """Ordered, finite tag inventory with stable 0-based indices."""

    tags: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = {}
        for i, t in enumerate(self.tags):
            if not t:
                raise ValidationError("tag symbols must be non-empty")
            if any(c in t for c in _FORBIDDEN_IN_SYMBOL):
                raise ValidationError(f"tag symbol {t!r} contains whitespace control characters")
            if t in seen:
                raise ValidationError(f"duplicate tag symbol {t!r}")
            seen[t] = i
        object.__setattr__(self, "index", seen)

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.index

    def index_of(self, symbol: str) -> int:
        try:
            return self.index[symbol]
        except KeyError:
            raise ValidationError(f"tag {symbol!r} not in tag set") from None

    def symbol(self, i: int) -> str:
        return self.tags[i]


@dataclass(frozen=True)
class TaggedToken:
    word: str
    tag: str

    def __post_init__(self):
        if not self.word:
            raise ValidationError("token word must be non-empty")
        if any(c in self.word for c in _FORBIDDEN_IN_SYMBOL):
            raise ValidationError(f"token word {self.word!r} contains whitespace control characters")


@dataclass(frozen=True)
class Corpus:
    """Immutable list of sentences over a fixed tag set."""

    sentences: tuple[tuple[TaggedToken, ...], ...]
    tag_set: TagSet

    def __post_init__(self):
        for sent in self.sentences:
            if not sent:
                raise ValidationError("corpus must not contain empty sentences")
            for tok in sent:
                if tok.tag not in self.tag_set:
                    raise ValidationError(f"tag {tok.tag!r} not in tag set")

    @property
    def num_sentences(self) -> int:
        return len(self.sentences)

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


def _iter_clean_lines(source: str | IO[str] | Iterable[str]) -> Iterable[str]:
    lines = source.splitlines() if isinstance(source, str) else source
    for line in lines:
        line = line.rstrip("\n")
        if line.endswith("\r"):
            line = line[:-1]
        yield line


def parse_corpus(source: str | IO[str] | Iterable[str],
                 declared_tags: Sequence[str] | None = None) -> Corpus:
    """Parse token-per-line text into a Corpus.

    When `declared_tags` is given it is used verbatim as the tag set and
    every observed tag must belong to it; otherwise the tag set is the
    lexicographically sorted set of observed tags.
    """
    declared = TagSet(tuple(declared_tags)) if declared_tags is not None else None
    sentences: list[tuple[TaggedToken, ...]] = []
    current: list[TaggedToken] = []
    observed: set[str] = set()

    for lineno, line in enumerate(_iter_clean_lines(source), start=1):
        if line.startswith("#"):
            continue
        if line == "":
            if current:
                sentences.append(tuple(current))
                current = []
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise CorpusParseError(
                f"expected exactly two tab-separated non-empty fields, got {line!r}", lineno)
        word, tag = fields
        if declared is not None and tag not in declared:
            raise CorpusParseError(f"tag {tag!r} not in declared tag set", lineno)
        observed.add(tag)
        current.append(TaggedToken(word, tag))
    if current:
        sentences.append(tuple(current))

    tag_set = declared if declared is not None else TagSet(tuple(sorted(observed)))
    return Corpus(tuple(sentences), tag_set)


def write_corpus(corpus: Corpus) -> str:
    """Serialize to the token-per-line format (LF line endings).

    Re-parsing the result with the corpus's own tag set declared yields an
    equal Corpus.
    """
    blocks = ["\n".join(f"{t.word}\t{t.tag}" for t in sent) for sent in corpus.sentences]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def split_corpus(corpus: Corpus, train_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic sentence-level split into (train, test)."""
    n = corpus.num_sentences
    if n < 2:
        raise ValidationError("need at least 2 sentences to split")
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError("train_fraction must lie strictly between 0 and 1")
    n_train = min(max(round(n * train_fraction), 1), n - 1)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    train_idx = sorted(order[:n_train])
    test_idx = sorted(order[n_train:])
    train = Corpus(tuple(corpus.sentences[i] for i in train_idx), corpus.tag_set)
    test = Corpus(tuple(corpus.sentences[i] for i in test_idx), corpus.tag_set)
    return train, test


@dataclass(frozen=True)
class SynthesisConfig:
    num_tags: int
    vocab_size: int
    num_train_tokens: int
    num_test_tokens: int
    seed: int
    zipf_exponent: float = 1.9

    def __post_init__(self):
        if self.num_tags < 2:
            raise ValidationError("num_tags must be at least 2")
        if self.vocab_size < self.num_tags:
            raise ValidationError("vocab_size must be at least num_tags")
        if self.num_train_tokens < 1 or self.num_test_tokens < 1:
            raise ValidationError("token counts must be positive")
        if self.zipf_exponent <= 0:
            raise ValidationError("zipf_exponent must be positive")


@dataclass(frozen=True)
class GeneratorSpec:
    """True distributions behind a synthesized corpus, for oracle checks."""

    tag_set: TagSet
    initial: np.ndarray          # shape (K,)
    transition: np.ndarray       # shape (K, K), rows sum to 1
    words: tuple[str, ...]       # vocabulary, index-aligned with emission columns
    preferred_tags: np.ndarray   # shape (V,), tag index each word leans toward
    secondary_tags: np.ndarray   # shape (V,), second tag of ambiguous words
    ambiguous: np.ndarray        # shape (V,) bool, words with a real second tag
    emission: np.ndarray         # shape (K, V), rows sum to 1
    config: SynthesisConfig

    def to_jsonable(self) -> dict:
        return {
            "tags": list(self.tag_set.tags),
            "initial": self.initial.tolist(),
            "transition": self.transition.tolist(),
            "words": list(self.words),
            "preferred_tags": self.preferred_tags.tolist(),
            "secondary_tags": self.secondary_tags.tolist(),
            "ambiguous": self.ambiguous.tolist(),
            "emission": self.emission.tolist(),
            "config": {
                "num_tags": self.config.num_tags,
                "vocab_size": self.config.vocab_size,
                "num_train_tokens": self.config.num_train_tokens,
                "num_test_tokens": self.config.num_test_tokens,
                "seed": self.config.seed,
                "zipf_exponent": self.config.zipf_exponent,
            },
        }


_STEM_LETTERS = "abcdefghijklmnopqrstuvwxyz"
# Most words are nearly unambiguous (tiny leak to foreign tags); a fixed
# fraction get a genuine second tag, so context models have work to do.
_EMISSION_LEAK = 0.002
_AMBIGUOUS_FRACTION = 0.2
_SECONDARY_WEIGHT = 0.5
_SENTENCE_LEN_RANGE = (5, 25)


def _sample_index(cumulative: np.ndarray, rng: np.random.Generator) -> int:
    return int(np.searchsorted(cumulative, rng.random(), side="right"))


def _make_vocabulary(cfg: SynthesisConfig, rng: np.random.Generator) -> tuple[list[str], np.ndarray]:
    # One 3-letter suffix per tag; distinct, hence never a suffix of another.
    suffixes: list[str] = []
    while len(suffixes) < cfg.num_tags:
        s = "".join(rng.choice(list(_STEM_LETTERS), size=3))
        if s not in suffixes:
            suffixes.append(s)
    words: list[str] = []
    used: set[str] = set()
    preferred = np.empty(cfg.vocab_size, dtype=np.int64)
    for i in range(cfg.vocab_size):
        tag = i % cfg.num_tags
        while True:
            stem_len = int(rng.integers(2, 6))
            stem = "".join(rng.choice(list(_STEM_LETTERS), size=stem_len))
            word = stem + suffixes[tag]
            if word not in used:
                break
        used.add(word)
        words.append(word)
        preferred[i] = tag
    return words, preferred


def synthesize_corpus(cfg: SynthesisConfig) -> tuple[Corpus, Corpus, GeneratorSpec]:
    """Sample train/test corpora from a random first-order hidden tag chain.

    Word forms carry a suffix characteristic of their preferred tag, so
    suffix statistics of rare words are informative about tags.  Word
    frequencies follow a Zipf law with exponent ``cfg.zipf_exponent``.
    Deterministic for a fixed config.
    """
    rng = np.random.default_rng(cfg.seed)
    k = cfg.num_tags
    width = len(str(k - 1))
    tag_set = TagSet(tuple(f"T{i:0{width}d}" for i in range(k)))

    initial = rng.dirichlet(np.ones(k))
    transition = np.stack([rng.dirichlet(np.ones(k)) for _ in range(k)])

    words, preferred = _make_vocabulary(cfg, rng)
    ambiguous = rng.random(cfg.vocab_size) < _AMBIGUOUS_FRACTION
    secondary = (preferred + 1 + rng.integers(0, k - 1, size=cfg.vocab_size)) % k

    # Zipf rank within the word's own tag, so every tag owns words across
    # the whole frequency range and posterior sharpness is rank-independent.
    zipf = (np.arange(cfg.vocab_size) // k + 1.0) ** (-cfg.zipf_exponent)
    weight = np.full((k, cfg.vocab_size), _EMISSION_LEAK)
    weight[preferred, np.arange(cfg.vocab_size)] = 1.0
    weight[secondary[ambiguous], np.flatnonzero(ambiguous)] = _SECONDARY_WEIGHT
    emission = zipf * weight
    emission /= emission.sum(axis=1, keepdims=True)

    initial_cum = np.cumsum(initial)
    transition_cum = np.cumsum(transition, axis=1)
    emission_cum = np.cumsum(emission, axis=1)

    def draw(total_tokens: int) -> tuple[tuple[TaggedToken, ...], ...]:
        sentences = []
        remaining = total_tokens
        lo, hi = _SENTENCE_LEN_RANGE
        while remaining > 0:
            length = min(int(rng.integers(lo, hi + 1)), remaining)
            toks = []
            tag = _sample_index(initial_cum, rng)
            for pos in range(length):
                if pos > 0:
                    tag = _sample_index(transition_cum[tag], rng)
                word = words[_sample_index(emission_cum[tag], rng)]
                toks.append(TaggedToken(word, tag_set.symbol(tag)))
            sentences.append(tuple(toks))
            remaining -= length
        return tuple(sentences)

    train = Corpus(draw(cfg.num_train_tokens), tag_set)
    test = Corpus(draw(cfg.num_test_tokens), tag_set)
    spec = GeneratorSpec(tag_set, initial, transition, tuple(words), preferred,
                         secondary, ambiguous, emission, cfg)
    return train, test, spec

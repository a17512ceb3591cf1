"""Corpus ingestion: vocabularies, sentences, and head-annotated binary trees.

Everything downstream works in id space. The vocabulary owns three
separate symbol tables (words, POS tags, non-terminal labels) with a few
reserved entries: sentence-begin, sentence-end and unknown-word ids on the
word side, begin/end tags on the tag side, and a wrap-up label ``TOP`` on
the label side.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

SB_WORD = 0  # sentence begin <s>
SE_WORD = 1  # sentence end </s>
UNK_WORD = 2
RESERVED_WORDS = ("<s>", "</s>", "<unk>")

SB_TAG = 0
SE_TAG = 1
RESERVED_TAGS = ("<s>", "</s>")

TOP_LABEL = 0
RESERVED_LABELS = ("TOP",)


class CorpusError(ValueError):
    """Raised on malformed corpus input."""


class TreebankError(ValueError):
    """Raised on malformed treebank records; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SymbolTable:
    """Dense string<->id bijection with per-symbol counts."""

    def __init__(self, reserved: Sequence[str] = ()):
        self._strings: list[str] = list(reserved)
        self._ids: dict[str, int] = {s: i for i, s in enumerate(reserved)}
        self.counts: list[float] = [0.0] * len(reserved)
        self.n_reserved = len(reserved)
        if len(self._ids) != len(self._strings):
            raise CorpusError("duplicate reserved symbol")

    def __len__(self) -> int:
        return len(self._strings)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def add(self, symbol: str, count: float = 0.0) -> int:
        if symbol in self._ids:
            i = self._ids[symbol]
            self.counts[i] += count
            return i
        i = len(self._strings)
        self._strings.append(symbol)
        self._ids[symbol] = i
        self.counts.append(count)
        return i

    def id_of(self, symbol: str) -> int:
        try:
            return self._ids[symbol]
        except KeyError:
            raise CorpusError(f"unknown symbol {symbol!r}") from None

    def string_of(self, i: int) -> str:
        return self._strings[i]

    def lines(self) -> Iterator[str]:
        for i, s in enumerate(self._strings):
            c = self.counts[i]
            count = str(int(c)) if float(c).is_integer() else repr(c)
            yield f"{i}\t{s}\t{count}"

    @classmethod
    def from_lines(cls, lines: Iterable[str], reserved: Sequence[str]) -> "SymbolTable":
        table = cls(reserved)
        for raw in lines:
            raw = raw.rstrip("\n")
            if not raw:
                continue
            parts = raw.split("\t")
            if len(parts) != 3:
                raise CorpusError(f"bad symbol table line: {raw!r}")
            i, symbol, count = int(parts[0]), parts[1], float(parts[2])
            if i < table.n_reserved:
                if symbol != table._strings[i]:
                    raise CorpusError(f"reserved id {i} bound to {symbol!r}")
                table.counts[i] = count
                continue
            j = table.add(symbol, count)
            if j != i:
                raise CorpusError(f"non-dense id {i} for {symbol!r}")
        return table


@dataclass(frozen=True)
class Sentence:
    """Body tokens of one sentence as word ids; begin/end markers implicit."""

    tokens: tuple[int, ...]

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError("empty sentence")
        for t in self.tokens:
            if t in (SB_WORD, SE_WORD):
                raise CorpusError("reserved word id inside sentence body")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


class Vocabulary:
    """Word, tag and label id spaces shared by every model component."""

    def __init__(self):
        self.words = SymbolTable(RESERVED_WORDS)
        self.tags = SymbolTable(RESERVED_TAGS)
        self.labels = SymbolTable(RESERVED_LABELS)

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def word_id(self, word: str, open_vocab: bool = True) -> int:
        """Map a surface word, falling back to the unknown id in open mode."""
        if word in self.words:
            return self.words.id_of(word)
        if open_vocab:
            return UNK_WORD
        raise CorpusError(f"out-of-vocabulary word {word!r} in closed mode")

    def encode_sentence(self, tokens: Sequence[str], open_vocab: bool = True) -> Sentence:
        return Sentence(tuple(self.word_id(w, open_vocab) for w in tokens))

    # Annotation ids put tags and labels in one space so exposed heads hash
    # unambiguously: tags come first, labels are offset by the tag count.
    def tag_ann(self, tag_id: int) -> int:
        return tag_id

    def label_ann(self, label_id: int) -> int:
        return self.n_tags + label_id

    def is_tag_ann(self, ann: int) -> bool:
        return ann < self.n_tags

    def save(self, prefix: str) -> None:
        for name, table in (("words", self.words), ("tags", self.tags), ("labels", self.labels)):
            with open(f"{prefix}.{name}.tsv", "w", encoding="utf-8") as fh:
                for line in table.lines():
                    fh.write(line + "\n")

    @classmethod
    def load(cls, prefix: str) -> "Vocabulary":
        vocab = cls()
        for name, reserved in (("words", RESERVED_WORDS), ("tags", RESERVED_TAGS), ("labels", RESERVED_LABELS)):
            with open(f"{prefix}.{name}.tsv", encoding="utf-8") as fh:
                table = SymbolTable.from_lines(fh, reserved)
            setattr(vocab, name, table)
        return vocab

    def checksum(self) -> str:
        h = hashlib.sha256()
        for table in (self.words, self.tags, self.labels):
            for line in table.lines():
                h.update(line.encode("utf-8"))
                h.update(b"\n")
        return h.hexdigest()


def build_vocabulary(
    corpus: Iterable[Sequence[str]],
    max_size: int = 65000,
    min_count: int = 1,
    tags: Iterable[str] = (),
    labels: Iterable[str] = (),
) -> Vocabulary:
    """Build a vocabulary from tokenized sentences.

    Keeps the ``max_size`` most frequent words with count >= ``min_count``
    (frequency descending, ties broken lexicographically); everything else
    maps to the unknown word. Tag and label inventories, when given, are
    added in sorted order after the reserved entries.
    """
    freq: Counter[str] = Counter()
    n_sentences = 0
    for tokens in corpus:
        n_sentences += 1
        freq.update(tokens)
    if n_sentences == 0 or not freq:
        raise CorpusError("empty corpus")
    vocab = Vocabulary()
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    for word, count in ranked[:max_size]:
        if count < min_count:
            break
        if word in vocab.words:
            raise CorpusError(f"corpus word collides with reserved symbol {word!r}")
        vocab.words.add(word, count)
    for tag in sorted(set(tags)):
        vocab.tags.add(tag)
    for label in sorted(set(labels)):
        vocab.labels.add(label)
    return vocab


# --- head-annotated binary trees -------------------------------------------


@dataclass(frozen=True)
class Leaf:
    word: int
    tag: int

    @property
    def head(self) -> int:
        return self.word

    def leaves(self) -> Iterator["Leaf"]:
        yield self


@dataclass(frozen=True)
class Node:
    label: int
    left: "Tree"
    right: "Tree"
    head_from_right: bool

    @property
    def head(self) -> int:
        return self.right.head if self.head_from_right else self.left.head

    def leaves(self) -> Iterator[Leaf]:
        yield from self.left.leaves()
        yield from self.right.leaves()


Tree = Union[Leaf, Node]


@dataclass(frozen=True)
class AnnotatedParse:
    """A binary tree over one sentence; every internal node carries a
    non-terminal label and the headword of exactly one child."""

    root: Tree

    def sentence(self) -> Sentence:
        return Sentence(tuple(leaf.word for leaf in self.root.leaves()))

    def leaves(self) -> list[Leaf]:
        return list(self.root.leaves())


@dataclass(frozen=True)
class RawLeaf:
    word: str
    tag: str


@dataclass(frozen=True)
class RawNode:
    label: str
    head: str
    children: tuple["RawTree", ...]


RawTree = Union[RawLeaf, RawNode]


def _tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_sexpr(tokens: list[str], pos: int, line: int):
    if tokens[pos] != "(":
        raise TreebankError(f"expected '(' near token {tokens[pos]!r}", line)
    pos += 1
    if pos >= len(tokens) or tokens[pos] in "()":
        raise TreebankError("missing node header", line)
    header = tokens[pos]
    pos += 1
    children: list[RawTree] = []
    atoms: list[str] = []
    while pos < len(tokens) and tokens[pos] != ")":
        if tokens[pos] == "(":
            child, pos = _parse_sexpr(tokens, pos, line)
            children.append(child)
        else:
            atoms.append(tokens[pos])
            pos += 1
    if pos >= len(tokens):
        raise TreebankError("unbalanced brackets", line)
    pos += 1  # consume ')'
    if children and atoms:
        raise TreebankError("mixed leaf/subtree children", line)
    if not children:
        if "~" in header:
            raise TreebankError(f"leaf tag contains '~': {header!r}", line)
        if len(atoms) != 1:
            raise TreebankError("leaf must be (TAG word)", line)
        if "~" in atoms[0]:
            raise TreebankError(f"word contains reserved '~': {atoms[0]!r}", line)
        return RawLeaf(word=atoms[0], tag=header), pos
    if "~" not in header:
        raise TreebankError(f"internal node lacks LABEL~headword: {header!r}", line)
    label, head = header.split("~", 1)
    if len(children) != 2:
        raise TreebankError(f"non-binary node {label!r} with {len(children)} children", line)
    return RawNode(label=label, head=head, children=tuple(children)), pos


def parse_tree_line(text: str, line: int = 0) -> RawTree:
    tokens = _tokenize_sexpr(text)
    if not tokens:
        raise TreebankError("empty record", line)
    tree, pos = _parse_sexpr(tokens, 0, line)
    if pos != len(tokens):
        raise TreebankError("trailing content after tree", line)
    return tree


def _raw_head(tree: RawTree) -> str:
    return tree.word if isinstance(tree, RawLeaf) else tree.head


def raw_tree_symbols(tree: RawTree, words: Counter, tags: set, labels: set) -> None:
    if isinstance(tree, RawLeaf):
        words[tree.word] += 1
        tags.add(tree.tag)
        return
    labels.add(tree.label)
    for child in tree.children:
        raw_tree_symbols(child, words, tags, labels)


def read_raw_treebank(path: str) -> list[RawTree]:
    """Read one bracketed tree per line, reporting malformed records by line."""
    trees = []
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            trees.append(parse_tree_line(text, lineno))
    return trees


def encode_tree(raw: RawTree, vocab: Vocabulary, open_vocab: bool = True, line: int = 0) -> Tree:
    if isinstance(raw, RawLeaf):
        return Leaf(word=vocab.word_id(raw.word, open_vocab), tag=vocab.tags.id_of(raw.tag))
    left = encode_tree(raw.children[0], vocab, open_vocab, line)
    right = encode_tree(raw.children[1], vocab, open_vocab, line)
    left_head = _raw_head(raw.children[0])
    right_head = _raw_head(raw.children[1])
    # When both children share the headword string the right child wins;
    # the format cannot distinguish the two and this keeps parsing total.
    if raw.head == right_head:
        head_from_right = True
    elif raw.head == left_head:
        head_from_right = False
    else:
        raise TreebankError(
            f"head {raw.head!r} matches no child (children head {left_head!r}, {right_head!r})",
            line,
        )
    return Node(label=vocab.labels.id_of(raw.label), left=left, right=right, head_from_right=head_from_right)


def read_treebank(path: str, vocab: Vocabulary, open_vocab: bool = True) -> list[AnnotatedParse]:
    """Read and validate a treebank file into id-space annotated parses."""
    parses = []
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            raw = parse_tree_line(text, lineno)
            parses.append(AnnotatedParse(encode_tree(raw, vocab, open_vocab, lineno)))
    return parses


def serialize_tree(parse: AnnotatedParse, vocab: Vocabulary) -> str:
    def render(tree: Tree) -> str:
        if isinstance(tree, Leaf):
            return f"({vocab.tags.string_of(tree.tag)} {vocab.words.string_of(tree.word)})"
        head = vocab.words.string_of(tree.head)
        return f"({vocab.labels.string_of(tree.label)}~{head} {render(tree.left)} {render(tree.right)})"

    return render(parse.root)


def right_branch_annotate(sentence: Sentence, default_tag: int, default_label: int) -> AnnotatedParse:
    """Fallback annotation: fully right-branching tree, heads percolating
    from the right child, every leaf carrying the default tag."""
    leaves = [Leaf(word=w, tag=default_tag) for w in sentence]
    tree: Tree = leaves[-1]
    for leaf in reversed(leaves[:-1]):
        tree = Node(label=default_label, left=leaf, right=tree, head_from_right=True)
    return AnnotatedParse(tree)


def read_sentences(path: str) -> Iterator[list[str]]:
    """Whitespace-tokenized sentences, one per line; blank lines skipped."""
    with open(path, encoding="utf-8") as fh:
        for text in fh:
            tokens = text.split()
            if tokens:
                yield tokens

"""CoNLL-X treebank reading, writing and validation.

The on-disk format is tab-separated, ten columns per token line
(ID, FORM, LEMMA, CPOSTAG, POSTAG, FEATS, HEAD, DEPREL, PHEAD, PDEPREL),
one blank line after each sentence.  FEATS, PHEAD and PDEPREL are ignored
on input and written back as "_".  Files with only the first eight columns
are accepted on input.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Iterator, List, Tuple

ROOT = 0  # index of the artificial root node


class ConllParseError(ValueError):
    """A token line that cannot be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class TreeValidationError(ValueError):
    """A sentence whose head structure is not a tree; carries the sentence index."""

    def __init__(self, message: str, sentence_index: int):
        super().__init__(f"sentence {sentence_index}: {message}")
        self.sentence_index = sentence_index


class AlignmentError(ValueError):
    """Two corpora that should be sentence-aligned are not."""

    def __init__(self, message: str, index: int):
        super().__init__(f"sentence {index}: {message}")
        self.index = index


@dataclass(frozen=True, slots=True)
class Token:
    id: int
    form: str
    lemma: str = "_"
    cpos: str = "_"
    pos: str = "_"
    head: int = 0
    deprel: str = "root"


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: Tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]

    @property
    def heads(self) -> Tuple[int, ...]:
        return tuple(t.head for t in self.tokens)

    @property
    def deprels(self) -> Tuple[str, ...]:
        return tuple(t.deprel for t in self.tokens)

    @property
    def forms(self) -> Tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    def with_arcs(self, heads: Iterable[int], deprels: Iterable[str]) -> "Sentence":
        """Copy of the sentence with heads and labels replaced."""
        return Sentence(
            tuple(
                replace(tok, head=h, deprel=d)
                for tok, h, d in zip(self.tokens, heads, deprels, strict=True)
            )
        )


@dataclass
class Treebank:
    sentences: List[Sentence] = field(default_factory=list)
    source_tag: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i: int):
        return self.sentences[i]


def validate_sentence(s: Sentence, sentence_index: int = 0) -> None:
    """Check token ids, head ranges, and that heads form a tree under the root.

    Raises TreeValidationError on duplicate or gapped ids, out-of-range heads,
    self-attachment or cycles.  An empty sentence is accepted (root only).
    """
    n = len(s.tokens)
    for pos, tok in enumerate(s.tokens, start=1):
        if tok.id != pos:
            raise TreeValidationError(
                f"token ids must be 1..{n} in order, found id {tok.id} at position {pos}",
                sentence_index,
            )
        if not tok.form:
            raise TreeValidationError(f"token {pos} has an empty form", sentence_index)
        if not 0 <= tok.head <= n:
            raise TreeValidationError(
                f"token {pos} has out-of-range head {tok.head}", sentence_index
            )
        if tok.head == tok.id:
            raise TreeValidationError(f"token {pos} is its own head", sentence_index)
    # Cycle check: walk up from every node; a walk that does not reach the
    # root within n steps has entered a cycle.
    heads = s.heads
    for start in range(1, n + 1):
        node = start
        for _ in range(n):
            node = heads[node - 1]
            if node == ROOT:
                break
        else:
            raise TreeValidationError(
                f"head relation contains a cycle through token {start}", sentence_index
            )


def is_projective(s: Sentence) -> bool:
    """True iff no two arcs cross, counting the arcs from the artificial root.

    Uses the domination criterion: an arc (h, d) is projective iff every
    token strictly between h and d is a descendant of h.  Root arcs satisfy
    this trivially; a crossing involving a root arc is always detected from
    the other arc of the pair.
    """
    heads = s.heads
    n = len(heads)

    def dominated_by(node: int, h: int) -> bool:
        while node != ROOT:
            node = heads[node - 1]
            if node == h:
                return True
        return False

    for dep in range(1, n + 1):
        h = heads[dep - 1]
        if h == ROOT:
            continue
        lo, hi = (h, dep) if h < dep else (dep, h)
        for k in range(lo + 1, hi):
            if not dominated_by(k, h):
                return False
    return True


def _parse_token_line(line: str, line_no: int) -> Token:
    cols = line.split("\t")
    if len(cols) < 8:
        raise ConllParseError(
            f"expected at least 8 tab-separated columns, got {len(cols)}", line_no
        )
    try:
        tok_id = int(cols[0])
    except ValueError:
        raise ConllParseError(f"non-numeric ID column {cols[0]!r}", line_no) from None
    try:
        head = int(cols[6])
    except ValueError:
        raise ConllParseError(f"non-numeric HEAD column {cols[6]!r}", line_no) from None
    if not cols[1]:
        raise ConllParseError("empty FORM column", line_no)
    return Token(
        id=tok_id,
        form=cols[1],
        lemma=cols[2],
        cpos=cols[3],
        pos=cols[4],
        head=head,
        deprel=cols[7],
    )


def iter_conll(stream: Iterable[str]) -> Iterator[Sentence]:
    """Yield validated sentences from a CoNLL-X character stream.

    Streaming: holds at most one sentence in memory.  Raises ConllParseError
    or TreeValidationError as defined by the format contract.
    """
    tokens: List[Token] = []
    sentence_index = 0
    line_no = 0
    for line in stream:
        line_no += 1
        line = line.rstrip("\n")
        if line == "":
            if tokens:
                s = Sentence(tuple(tokens))
                validate_sentence(s, sentence_index)
                yield s
                sentence_index += 1
                tokens = []
            continue
        tokens.append(_parse_token_line(line, line_no))
    if tokens:
        s = Sentence(tuple(tokens))
        validate_sentence(s, sentence_index)
        yield s


def read_conll(stream: Iterable[str], source_tag: str = "") -> Treebank:
    """Read a whole CoNLL-X stream into a Treebank."""
    return Treebank(sentences=list(iter_conll(stream)), source_tag=source_tag)


def _check_writable(value: str, what: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"{what} contains a tab or newline and cannot be serialized: {value!r}")
    return value


def write_sentence(s: Sentence, stream: IO[str]) -> None:
    for tok in s.tokens:
        cols = (
            str(tok.id),
            _check_writable(tok.form, "form"),
            _check_writable(tok.lemma, "lemma"),
            _check_writable(tok.cpos, "cpos"),
            _check_writable(tok.pos, "pos"),
            "_",
            str(tok.head),
            _check_writable(tok.deprel, "deprel"),
            "_",
            "_",
        )
        stream.write("\t".join(cols))
        stream.write("\n")
    stream.write("\n")


def write_conll(tb: Treebank, stream: IO[str]) -> None:
    """Write ten-column CoNLL-X; read_conll(write_conll(tb)) == tb."""
    for s in tb.sentences:
        write_sentence(s, stream)


def read_conll_file(path) -> Treebank:
    with open(path, encoding="utf-8") as f:
        return read_conll(f, source_tag=str(path))


def write_conll_file(tb: Treebank, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        write_conll(tb, f)


def check_aligned(a: Sentence, b: Sentence, index: int) -> None:
    """Raise AlignmentError unless the sentences have equal length and forms."""
    if len(a) != len(b):
        raise AlignmentError(f"length mismatch ({len(a)} vs {len(b)})", index)
    for ta, tb_ in zip(a.tokens, b.tokens):
        if ta.form != tb_.form:
            raise AlignmentError(
                f"form mismatch at token {ta.id} ({ta.form!r} vs {tb_.form!r})", index
            )

"""Corpus loading, sentence segmentation, and triple extraction.

Documents come in as JSONL. Sentences are split on ``. ! ?`` followed by
whitespace and an uppercase letter (or end of text), and tokenized into
word-character runs with case preserved. Triples are found either by a
heuristic subject-verb-object pattern or taken from pre-extracted records,
and both paths run through the same mention-normalization rules:

* pronoun-only arguments are replaced by the nearest preceding noun-like
  span in the same document (dropped if none exists);
* arguments are split on "and"/"or" into one triple per conjunct;
* leading determiners are stripped;
* arguments with no noun-like token or more than five tokens drop the
  whole triple.

The last rule runs after the others so every surviving argument is
guaranteed to have 1-5 tokens and at least one noun-like token.
Normalization is best-effort: failures are counted, never raised.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DuplicateIdError, FormatError

# Fixed lexicons for the no-parser heuristics. A token is "noun-like" when
# it is none of these (or when it is capitalized mid-sentence, which counts
# as a proper noun regardless of the lists).
DETERMINERS = frozenset({"the", "a", "an"})

PRONOUNS = frozenset({
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself",
    "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "we", "us", "our", "ours", "ourselves",
    "they", "them", "their", "theirs", "themselves",
    "this", "that", "these", "those", "who", "whom", "whose", "which",
    "what", "one", "ones", "someone", "something", "anyone", "anything",
    "everyone", "everything", "nobody", "nothing", "somebody", "anybody",
    "everybody",
})

AUXILIARIES = frozenset({
    "is", "are", "was", "were", "be", "been", "being", "am",
    "has", "have", "had", "having",
    "do", "does", "did", "done", "doing",
    "will", "would", "shall", "should", "can", "could", "may", "might",
    "must",
})

PREPOSITIONS = frozenset({
    "of", "in", "on", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above",
    "below", "to", "from", "up", "down", "out", "off", "over", "under",
    "again", "further", "near", "without", "within", "along", "across",
    "behind", "beyond", "toward", "towards", "upon", "among", "around",
    "via", "per", "since",
})

CONJUNCTIONS = frozenset({
    "and", "or", "but", "nor", "so", "yet", "because", "although",
    "though", "while", "whereas", "if", "unless", "until", "when",
    "where", "than", "as",
})

# Common lexical verbs (base + inflected forms). The SVO heuristic only
# starts a verb group at an auxiliary or a listed verb; unlisted "-ed/-ing"
# forms may continue a group but never start one, which keeps nouns such
# as "meeting" from being misread as verbs.
COMMON_VERBS = frozenset({
    "say", "says", "said", "make", "makes", "made", "go", "goes", "went",
    "gone", "take", "takes", "took", "taken", "come", "comes", "came",
    "see", "sees", "saw", "seen", "know", "knows", "knew", "known",
    "get", "gets", "got", "gotten", "give", "gives", "gave", "given",
    "find", "finds", "found", "think", "thinks", "thought", "tell",
    "tells", "told", "become", "becomes", "became", "show", "shows",
    "showed", "shown", "leave", "leaves", "left", "feel", "feels", "felt",
    "put", "puts", "bring", "brings", "brought", "begin", "begins",
    "began", "begun", "keep", "keeps", "kept", "hold", "holds", "held",
    "write", "writes", "wrote", "written", "stand", "stands", "stood",
    "hear", "hears", "heard", "let", "lets", "mean", "means", "meant",
    "set", "sets", "meet", "meets", "met", "run", "runs", "ran", "pay",
    "pays", "paid", "sit", "sits", "sat", "speak", "speaks", "spoke",
    "spoken", "lead", "leads", "led", "read", "reads", "grow", "grows",
    "grew", "grown", "lose", "loses", "lost", "fall", "falls", "fell",
    "fallen", "send", "sends", "sent", "build", "builds", "built",
    "understand", "understands", "understood", "draw", "draws", "drew",
    "drawn", "break", "breaks", "broke", "broken", "spend", "spends",
    "spent", "cut", "cuts", "rise", "rises", "rose", "risen", "drive",
    "drives", "drove", "driven", "buy", "buys", "bought", "wear",
    "wears", "wore", "worn", "choose", "chooses", "chose", "chosen",
    "include", "includes", "provide", "provides", "use", "uses", "help",
    "helps", "support", "supports", "underpin", "underpins", "contain",
    "contains", "require", "requires", "offer", "offers", "cover",
    "covers", "fund", "funds", "treat", "treats", "cause", "causes",
    "affect", "affects", "improve", "improves", "reduce", "reduces",
    "increase", "increases", "remain", "remains", "need", "needs",
    "want", "wants", "work", "works", "call", "calls", "try", "tries",
    "ask", "asks", "seem", "seems", "expand", "expands", "deliver",
    "delivers", "serve", "serves", "guide", "guides", "train", "trains",
    "track", "tracks", "monitor", "monitors", "prevent", "prevents",
    "protect", "protects", "promote", "promotes", "measure", "measures",
    "lower", "lowers", "ease", "eases", "boost", "boosts", "shape",
    "shapes", "screen", "screens", "target", "targets", "manage",
    "manages", "strengthen", "strengthens",
})

MISC_STOP = frozenset({
    "not", "no", "also", "very", "too", "more", "most", "less", "least",
    "only", "just", "now", "then", "there", "here", "all", "any", "some",
    "each", "every", "both", "few", "many", "much", "other", "another",
    "such", "own", "same", "how", "why", "however", "therefore", "often",
    "always", "never", "still", "well", "even",
})

FUNCTION_WORDS = (
    DETERMINERS | PRONOUNS | AUXILIARIES | PREPOSITIONS | CONJUNCTIONS
    | MISC_STOP
)

# Words that may extend a verb group after it has started.
VERB_PARTICLES = frozenset({"up", "down", "off", "out", "over", "away", "back", "not"})

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*")
_BOUNDARY_RE = re.compile(r"([.!?]+)(\s+)(?=[A-Z])")


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    tokens: tuple[str, ...]
    raw: str


@dataclass(frozen=True)
class TripleMention:
    """One (subject, relation, object) proposition anchored to a sentence."""

    subject: tuple[str, ...]
    relation: tuple[str, ...]
    object: tuple[str, ...]
    doc_id: str
    sent_index: int


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


@dataclass
class NormalizationStats:
    """Counters for the best-effort normalization pass."""

    input_triples: int = 0
    output_triples: int = 0
    pronoun_replacements: int = 0
    dropped_unresolved_pronoun: int = 0
    conjunct_splits: int = 0
    determiners_stripped: int = 0
    dropped_too_long: int = 0
    dropped_no_noun: int = 0


def load_corpus(path, fmt: str = "jsonl") -> Corpus:
    """Load a corpus file: one JSON object per line with id, title, text."""
    if fmt != "jsonl":
        raise FormatError(f"unsupported corpus format: {fmt!r}")
    corpus = Corpus()
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(record, dict):
                raise FormatError("expected a JSON object", line=lineno)
            for key in ("id", "title", "text"):
                if key not in record:
                    raise FormatError(f"missing field {key!r}", line=lineno)
            doc_id = str(record["id"])
            if not doc_id:
                raise FormatError("empty document id", line=lineno)
            if doc_id in seen:
                raise DuplicateIdError(f"duplicate document id {doc_id!r}")
            seen.add(doc_id)
            corpus.documents.append(
                Document(id=doc_id, title=str(record["title"]), text=str(record["text"]))
            )
    return corpus


def _split_sentences(text: str) -> list[str]:
    # Insert a hard break after terminator+whitespace+uppercase, then split.
    marked = _BOUNDARY_RE.sub(lambda m: m.group(1) + "\x00", text)
    return [part.strip() for part in marked.split("\x00") if part.strip()]


def tokenize(raw: str) -> tuple[str, ...]:
    """Word-character runs, keeping internal apostrophes/hyphens, case kept."""
    return tuple(_TOKEN_RE.findall(raw))


def segment_and_tokenize(doc: Document) -> list[Sentence]:
    """Split a document into sentences and tokenize each.

    Pieces that tokenize to nothing (punctuation-only) are skipped, and the
    remaining sentences are numbered densely from 0.
    """
    sentences = []
    for raw in _split_sentences(doc.text):
        tokens = tokenize(raw)
        if not tokens:
            continue
        sentences.append(
            Sentence(doc_id=doc.id, index=len(sentences), tokens=tokens, raw=raw)
        )
    return sentences


def is_noun_like(token: str, sentence_initial: bool = False) -> bool:
    """Heuristic noun test: capitalized mid-sentence, or not a function word."""
    if not token:
        return False
    if token[0].isupper() and not sentence_initial:
        return True
    low = token.lower()
    return low not in FUNCTION_WORDS and low not in COMMON_VERBS


def _is_verb_start(token: str) -> bool:
    low = token.lower()
    return low in AUXILIARIES or low in COMMON_VERBS


def _is_verb_continuation(token: str) -> bool:
    low = token.lower()
    if low in AUXILIARIES or low in COMMON_VERBS or low in VERB_PARTICLES:
        return True
    # Unlisted participles ride along when already inside a verb group.
    return token.islower() and len(low) > 4 and (
        low.endswith("ed") or low.endswith("ing")
    ) and low not in FUNCTION_WORDS


def _noun_spans(tokens: Sequence[str], offset: int = 0) -> list[tuple[int, int]]:
    """Maximal runs of noun-like tokens as (start, end) index pairs."""
    spans = []
    start = None
    for i, tok in enumerate(tokens):
        if is_noun_like(tok, sentence_initial=(offset + i == 0)):
            if start is None:
                start = i
        else:
            if start is not None:
                spans.append((start, i))
                start = None
    if start is not None:
        spans.append((start, len(tokens)))
    return spans


def extract_triples(
    sentence: Sentence,
    mode: str = "heuristic",
    external: Iterable[dict] | None = None,
) -> list[TripleMention]:
    """Find (subject, relation, object) propositions in one sentence.

    ``heuristic`` applies the SVO pattern: the longest noun-like span before
    the first verb group is the subject, the verb group is the relation, and
    the remainder (trimmed to its last noun-like token) is the object. At
    most one triple is produced per sentence; conjunct splitting later may
    multiply it. ``preextracted`` converts external records for this
    sentence without touching the sentence tokens.
    """
    if mode == "preextracted":
        out = []
        for rec in external or ():
            try:
                doc_id = str(rec["doc_id"])
                sent_index = int(rec["sent_index"])
                subj = tokenize(str(rec["subject"]))
                rel = tokenize(str(rec["relation"]))
                obj = tokenize(str(rec["object"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad pre-extracted record: {rec!r}") from exc
            if doc_id != sentence.doc_id or sent_index != sentence.index:
                continue
            out.append(
                TripleMention(subject=subj, relation=rel, object=obj,
                              doc_id=doc_id, sent_index=sent_index)
            )
        return out
    if mode != "heuristic":
        raise FormatError(f"unknown extraction mode: {mode!r}")

    tokens = sentence.tokens
    verb_start = None
    for i, tok in enumerate(tokens):
        if _is_verb_start(tok):
            verb_start = i
            break
    if verb_start is None:
        return []

    verb_end = verb_start + 1
    while verb_end < len(tokens) and _is_verb_continuation(tokens[verb_end]):
        verb_end += 1

    subject_spans = _noun_spans(tokens[:verb_start])
    if not subject_spans:
        return []
    # Longest span; on ties the one closest to the verb.
    subject_spans.sort(key=lambda se: (se[1] - se[0], se[0]))
    s_start, s_end = subject_spans[-1]
    subject = tokens[s_start:s_end]

    rest = tokens[verb_end:]
    obj_end = 0
    for i, tok in enumerate(rest):
        if is_noun_like(tok, sentence_initial=False):
            obj_end = i + 1
    if obj_end == 0:
        return []
    return [
        TripleMention(
            subject=subject,
            relation=tokens[verb_start:verb_end],
            object=rest[:obj_end],
            doc_id=sentence.doc_id,
            sent_index=sentence.index,
        )
    ]


def _is_pronoun_only(span: Sequence[str]) -> bool:
    return len(span) > 0 and all(t.lower() in PRONOUNS for t in span)


def _latest_noun_span(sentences: Sequence[Sentence], doc_id: str, before_index: int):
    """Rightmost noun-like span in the nearest earlier sentence of the doc."""
    candidates = [
        s for s in sentences if s.doc_id == doc_id and s.index < before_index
    ]
    for sent in sorted(candidates, key=lambda s: s.index, reverse=True):
        spans = _noun_spans(sent.tokens)
        if spans:
            start, end = spans[-1]
            return sent.tokens[start:end]
    return None


def _split_conjuncts(span: Sequence[str]) -> list[tuple[str, ...]]:
    parts: list[list[str]] = [[]]
    for tok in span:
        if tok.lower() in ("and", "or"):
            parts.append([])
        else:
            parts[-1].append(tok)
    return [tuple(p) for p in parts if p]


def _strip_determiners(span: Sequence[str], stats: NormalizationStats) -> tuple[str, ...]:
    i = 0
    while i < len(span) and span[i].lower() in DETERMINERS:
        i += 1
    if i:
        stats.determiners_stripped += i
    return tuple(span[i:])


def normalize_mentions(
    triples: Iterable[TripleMention],
    sentence_context: Sequence[Sentence],
) -> tuple[list[TripleMention], NormalizationStats]:
    """Apply the mention rules; returns surviving triples plus drop counters.

    Order: pronoun replacement, conjunct splitting, determiner stripping,
    then the 1-5 token / noun-token gate. Running the gate last is what
    makes the pass idempotent and the output invariant checkable.
    """
    stats = NormalizationStats()
    out: list[TripleMention] = []
    for triple in triples:
        stats.input_triples += 1

        args = [triple.subject, triple.object]
        resolved = []
        failed = False
        for span in args:
            if _is_pronoun_only(span):
                replacement = _latest_noun_span(
                    sentence_context, triple.doc_id, triple.sent_index
                )
                if replacement is None:
                    stats.dropped_unresolved_pronoun += 1
                    failed = True
                    break
                stats.pronoun_replacements += 1
                span = replacement
            resolved.append(span)
        if failed:
            continue

        subj_parts = _split_conjuncts(resolved[0])
        obj_parts = _split_conjuncts(resolved[1])
        if len(subj_parts) > 1:
            stats.conjunct_splits += len(subj_parts) - 1
        if len(obj_parts) > 1:
            stats.conjunct_splits += len(obj_parts) - 1

        for subj in subj_parts:
            for obj in obj_parts:
                subj_c = _strip_determiners(subj, stats)
                obj_c = _strip_determiners(obj, stats)
                ok = True
                for span in (subj_c, obj_c):
                    if not 1 <= len(span) <= 5:
                        stats.dropped_too_long += 1
                        ok = False
                        break
                    if not any(is_noun_like(t) for t in span):
                        stats.dropped_no_noun += 1
                        ok = False
                        break
                if not ok:
                    continue
                out.append(
                    TripleMention(
                        subject=subj_c,
                        relation=triple.relation,
                        object=obj_c,
                        doc_id=triple.doc_id,
                        sent_index=triple.sent_index,
                    )
                )
                stats.output_triples += 1
    return out, stats


def load_preextracted(path) -> list[dict]:
    """Read a pre-extracted triple JSONL file into record dicts."""
    records = []
    required = ("doc_id", "sent_index", "subject", "relation", "object")
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(rec, dict) or any(k not in rec for k in required):
                raise FormatError("missing triple fields", line=lineno)
            records.append(rec)
    return records

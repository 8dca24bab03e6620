"""Linearization of samples into training sequences, and parsing back.

A relevant subgraph is serialized as its path list, one ``" -> "``-joined
line per path, wrapped in the instruction template the generator was trained
with. Frequent relations get their child tokens flagged out of the training
loss; the flags (and character spans) ride alongside the text so any
tokenizer can apply them.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._fileio import write_jsonl_atomic
from .dataset import DocumentRecord, SubgraphSample
from .errors import DataError
from .graph import Edge, Path

logger = logging.getLogger(__name__)

PATH_SEP = " -> "
BOS = "<s>"
EOS = "</s>"


def mask_probability(n: int, mean: float) -> float:
    """Probability of masking a child node of a relation seen ``n`` times."""
    return max(1.0 - mean / n, 0.0)


@dataclass(frozen=True)
class RelationFrequencyTable:
    """Occurrence counts per relation across all training-sample paths."""

    counts: Mapping[Edge, int]

    def __post_init__(self) -> None:
        if not self.counts:
            raise DataError("relation frequency table is empty")

    @property
    def mean(self) -> float:
        """Mean occurrences per distinct relation."""
        return sum(self.counts.values()) / len(self.counts)


@dataclass(frozen=True)
class TrainingSequence:
    """Rendered prompt/target pair with per-node loss-mask flags.

    ``mask_flags`` is keyed by (path index, node index >= 1) and covers every
    non-root node of every target path; flagged nodes stay verbatim in the
    target text and are only excluded from the loss.
    """

    doc_id: str
    prompt: str
    target_paths: tuple[Path, ...]
    mask_flags: Mapping[tuple[int, int], bool]

    def target_text(self) -> str:
        return "\n".join(PATH_SEP.join(p) for p in self.target_paths) + EOS

    def full_text(self) -> str:
        return self.prompt + self.target_text()

    def mask_spans(self) -> list[tuple[int, int]]:
        """Character spans of masked nodes within ``target_text()``."""
        spans: list[tuple[int, int]] = []
        offset = 0
        for pi, path in enumerate(self.target_paths):
            col = 0
            for ni, label in enumerate(path):
                if ni:
                    col += len(PATH_SEP)
                if self.mask_flags.get((pi, ni), False):
                    spans.append((offset + col, offset + col + len(label)))
                col += len(label)
            offset += col + 1  # newline
        return spans

    def to_json_dict(self) -> dict:
        return {
            "id": self.doc_id,
            "prompt": self.prompt,
            "target": self.target_text(),
            "mask_spans": [list(s) for s in self.mask_spans()],
        }


@dataclass(frozen=True)
class ParsedGeneration:
    doc_id: str
    paths: tuple[Path, ...]
    rejected_lines: int


def render_instruction(doc: DocumentRecord) -> str:
    return f"{BOS}[INST] Title: {doc.title}\n{doc.text}[/INST]\n"


def linearize(sample: SubgraphSample) -> str:
    """Full training sequence for one sample: instruction block plus path lines."""
    if not sample.paths:
        raise DataError(f"sample {sample.document.id!r} has no paths to linearize")
    return render_instruction(sample.document) + "\n".join(
        PATH_SEP.join(p) for p in sample.paths
    ) + EOS


def build_frequency_table(samples: Sequence[SubgraphSample]) -> RelationFrequencyTable:
    """Count every appearance of a relation as a consecutive path pair.

    Multiplicity matters: a relation occurring in three paths of the same
    document counts three times.
    """
    if not samples:
        raise DataError("no samples given")
    counts: dict[Edge, int] = {}
    for s in samples:
        for p in s.paths:
            for e in zip(p, p[1:]):
                counts[e] = counts.get(e, 0) + 1
    return RelationFrequencyTable(counts=counts)


def _doc_rng(seed: int, doc_id: str) -> np.random.Generator:
    # one independent stream per (seed, document): parallel processing order
    # cannot change any draw
    digest = hashlib.blake2b(doc_id.encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng([seed, int.from_bytes(digest, "big")])


def annotate_masks(
    sample: SubgraphSample, table: RelationFrequencyTable, rng_seed: int
) -> TrainingSequence:
    """Draw a loss-mask flag for every non-root node occurrence.

    A node reached via a relation seen ``n`` times is masked with probability
    max(1 - M/n, 0) where M is the table mean. Relations absent from the
    table are treated as singletons, which never mask (M >= 1).
    """
    rng = _doc_rng(rng_seed, sample.document.id)
    mean = table.mean
    flags: dict[tuple[int, int], bool] = {}
    unknown: set[Edge] = set()
    for pi, path in enumerate(sample.paths):
        for ni in range(1, len(path)):
            e = (path[ni - 1], path[ni])
            n = table.counts.get(e)
            if n is None:
                unknown.add(e)
                n = 1
            p = mask_probability(n, mean)
            # skip the draw entirely at p == 0 so that adding rare relations
            # leaves every other flag in the stream untouched
            flags[(pi, ni)] = bool(rng.random() < p) if p > 0.0 else False
    if unknown:
        logger.warning(
            "document %s: %d relation(s) missing from frequency table; treated as n=1",
            sample.document.id,
            len(unknown),
        )
    return TrainingSequence(
        doc_id=sample.document.id,
        prompt=render_instruction(sample.document),
        target_paths=sample.paths,
        mask_flags=flags,
    )


def plain_sequence(sample: SubgraphSample) -> TrainingSequence:
    """Training sequence with no masking (all flags False)."""
    flags = {
        (pi, ni): False
        for pi, path in enumerate(sample.paths)
        for ni in range(1, len(path))
    }
    return TrainingSequence(
        doc_id=sample.document.id,
        prompt=render_instruction(sample.document),
        target_paths=sample.paths,
        mask_flags=flags,
    )


def parse_generation(doc_id: str, completion: str, root: str, n_max: int) -> ParsedGeneration:
    """Parse a model completion into root-anchored simple paths.

    A line is accepted iff it splits on ``" -> "`` into at least two labels,
    starts with the root, repeats no label, and has at most ``n_max`` edges.
    Everything else (including instruction-template debris) is rejected and
    counted; blank lines are ignored. The parser is total.
    """
    cleaned = completion.replace(BOS, "").replace(EOS, "")
    paths: list[Path] = []
    rejected = 0
    for raw in cleaned.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = tuple(p.strip() for p in line.split(PATH_SEP))
        if (
            len(parts) >= 2
            and parts[0] == root
            and all(parts)
            and len(set(parts)) == len(parts)
            and len(parts) - 1 <= n_max
        ):
            paths.append(parts)
        else:
            rejected += 1
    return ParsedGeneration(doc_id=doc_id, paths=tuple(paths), rejected_lines=rejected)


_PROMPT_INTRO = (
    "The following is an article's title and abstract. Your task is to assign "
    "this article to suitable category hierarchy. A category is typically "
    "represented by a word or a short phrase, representing broader "
    "topics/concepts that the article is about. A category hierarchy "
    'represented by a collection of paths from the generic root category '
    '"{root}" to a specific category suitable for the article. The topics '
    "titles should become more and more specific as you move from the root "
    "to the leaf."
)

_PROMPT_FORMAT = (
    "You must answer in the format of:\n"
    "{root} -> Broad topic 1 -> Subtopic 1 -> ... -> Most specific topic 1\n"
    "{root} -> Broad topic 2 -> Subtopic 2 -> ... -> Most specific topic 2\n"
    "..."
)


def _article_block(title: str, text: str) -> str:
    return f"### ARTICLE ###\nTitle: {title}\n{text}\n### END ARTICLE ###"


def render_prompt(doc: DocumentRecord, shots: Sequence[SubgraphSample], root: str) -> str:
    """Zero/one/three-shot prompt for the subgraph-generation task."""
    if len(shots) not in (0, 1, 3):
        raise DataError(f"shots must number 0, 1 or 3; got {len(shots)}")
    pieces = [_PROMPT_INTRO.format(root=root), ""]
    for i, shot in enumerate(shots, 1):
        pieces.append(f"### EXAMPLE {i} ###")
        pieces.append(_article_block(shot.document.title, shot.document.text))
        pieces.extend(PATH_SEP.join(p) for p in shot.paths)
        pieces.append(f"### END EXAMPLE {i} ###")
        pieces.append("")
    if not shots:
        pieces.append(_PROMPT_FORMAT.format(root=root))
        pieces.append("")
    pieces.append(_article_block(doc.title, doc.text))
    pieces.append("")
    tail = (
        "Use the same format as the examples above."
        if shots
        else "Use the format described above."
    )
    pieces.append(f"Provide a category hierarchy for the above article. {tail}")
    return "\n".join(pieces)


def export_training_jsonl(sequences: Iterable[TrainingSequence], path: str | FsPath) -> None:
    write_jsonl_atomic(path, (seq.to_json_dict() for seq in sequences))


def save_generations(gens: Iterable[tuple[str, str]], path: str | FsPath) -> None:
    write_jsonl_atomic(path, ({"doc_id": d, "completion": c} for d, c in gens))


def load_generations(path: str | FsPath) -> list[tuple[str, str]]:
    """Read {doc_id, completion} JSONL; malformed lines are skipped with a count."""
    out: list[tuple[str, str]] = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                out.append((str(doc["doc_id"]), str(doc["completion"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                skipped += 1
                logger.warning("%s:%d: skipping malformed generation (%s)", path, lineno, exc)
    if skipped:
        logger.warning("%s: skipped %d malformed line(s)", path, skipped)
    return out

"""Synonym scoring, topological filtering, and prompt-set assembly.

A class's candidate synonyms are embedded as unit vectors.  Each candidate
gets an ambiguity score from its similarity to the other candidates of the
same class, the class gets a compactness scalar from the persistence of its
candidate cloud, and a candidate survives when

    ambiguity(candidate) * compactness(class) < mean compactness over classes

with the originally given class name always kept.  Survivors are crossed with
the class's description strings to form the textual prompt set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DataError
from .geometry import l2_normalize
from .topology import cosine_distance_matrix, total_persistence, zero_dim_persistence

SIM_CLAMP_LO = 1e-6
SIM_CLAMP_HI = 1.0

PROMPT_TEMPLATE = "a photo of a {synonym}, {description}"
PROMPT_TEMPLATE_BARE = "a photo of a {synonym}"


@dataclass
class SynonymCandidate:
    text: str
    embedding: np.ndarray
    is_original: bool = False

    def __post_init__(self):
        if not self.text:
            raise DataError("synonym candidate with empty text")
        self.embedding = l2_normalize(self.embedding)


@dataclass
class ClassTextualSet:
    """Prompt embeddings for one class plus where each row came from."""

    class_id: str
    embeddings: np.ndarray  # (n_prompts, dim), unit rows
    provenance: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.embeddings = np.atleast_2d(np.asarray(self.embeddings, dtype=np.float64))
        if self.embeddings.shape[0] < 1:
            raise DataError(f"class {self.class_id!r}: empty textual set")
        if len(self.provenance) != self.embeddings.shape[0]:
            raise DataError(
                f"class {self.class_id!r}: provenance length "
                f"{len(self.provenance)} != {self.embeddings.shape[0]} rows"
            )

    @property
    def centroid(self) -> np.ndarray:
        return np.mean(self.embeddings, axis=0)


def dedupe_candidates(candidates: Sequence[SynonymCandidate]) -> list[SynonymCandidate]:
    """Drop case-folded duplicate texts, keeping first occurrence.

    If a dropped duplicate was the original name, the kept copy inherits the
    flag so the always-retain guarantee still points at a surviving row.
    """
    kept: list[SynonymCandidate] = []
    index: dict[str, int] = {}
    for cand in candidates:
        key = cand.text.casefold()
        if key in index:
            if cand.is_original and not kept[index[key]].is_original:
                prior = kept[index[key]]
                kept[index[key]] = SynonymCandidate(prior.text, prior.embedding, True)
            continue
        index[key] = len(kept)
        kept.append(cand)
    return kept


def _clamped_weights(embeddings: np.ndarray, metric: str) -> np.ndarray:
    sims = np.clip(embeddings @ embeddings.T, -1.0, 1.0)
    if metric == "similarity":
        vals = sims
    elif metric == "distance":
        vals = 1.0 - sims
    else:
        raise DataError(f"unknown ambiguity metric {metric!r}")
    return np.clip(vals, SIM_CLAMP_LO, SIM_CLAMP_HI)


def ambiguity_entropy(
    embeddings: np.ndarray, i: int, metric: str = "similarity"
) -> float:
    """Sum of -d*log(d) over this candidate's relations to its class peers.

    d is the pairwise cosine similarity clamped to [1e-6, 1] (natural log), so
    every term is >= 0: near-duplicates contribute almost nothing, unrelated
    directions contribute a lot.  `metric="distance"` swaps in 1 - similarity
    under the same clamp.
    """
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    n = embeddings.shape[0]
    if not 0 <= i < n:
        raise DataError(f"candidate index {i} out of range for {n} candidates")
    if n == 1:
        return 0.0
    d = _clamped_weights(embeddings, metric)[i]
    d = np.delete(d, i)
    return float(np.sum(-d * np.log(d)))


def ambiguity_entropies(embeddings: np.ndarray, metric: str = "similarity") -> np.ndarray:
    """All candidates' scores at once; matches ambiguity_entropy row by row."""
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    n = embeddings.shape[0]
    if n == 1:
        return np.zeros(1)
    d = _clamped_weights(embeddings, metric)
    terms = -d * np.log(d)
    np.fill_diagonal(terms, 0.0)
    return np.sum(terms, axis=1)


def class_compactness(embeddings: np.ndarray) -> float:
    """Mean 0-dim persistence bar length of the candidate cloud."""
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    diag = zero_dim_persistence(cosine_distance_matrix(embeddings))
    return total_persistence(diag, embeddings.shape[0])


def filter_synonyms(
    per_class: Sequence[tuple[str, Sequence[SynonymCandidate]]],
    metric: str = "similarity",
) -> dict[str, list[SynonymCandidate]]:
    """Decide retained candidates for every class jointly.

    The threshold is the mean compactness across the supplied classes, so the
    decision for one class depends on the whole batch; input order of classes
    and candidates is preserved in the output.
    """
    if len(per_class) == 0:
        raise DataError("filter_synonyms: empty class list")
    deduped: list[tuple[str, list[SynonymCandidate]]] = []
    for class_id, candidates in per_class:
        if len(candidates) == 0:
            raise DataError(f"class {class_id!r} has no synonym candidates")
        deduped.append((class_id, dedupe_candidates(candidates)))

    compactness = {}
    scores = {}
    for class_id, candidates in deduped:
        emb = np.stack([c.embedding for c in candidates])
        compactness[class_id] = class_compactness(emb)
        scores[class_id] = ambiguity_entropies(emb, metric)
    mean_compactness = float(np.mean(list(compactness.values())))

    retained: dict[str, list[SynonymCandidate]] = {}
    for class_id, candidates in deduped:
        p_k = compactness[class_id]
        keep = [
            cand
            for cand, h in zip(candidates, scores[class_id])
            if cand.is_original or h * p_k < mean_compactness
        ]
        retained[class_id] = keep
    return retained


def prompt_text(synonym: str, description: str = "") -> str:
    if description:
        return PROMPT_TEMPLATE.format(synonym=synonym, description=description)
    return PROMPT_TEMPLATE_BARE.format(synonym=synonym)


def build_textual_set(
    class_id: str,
    retained: Sequence[SynonymCandidate],
    descriptions: Sequence[str],
    prompt_embedder: Callable[[str, str], np.ndarray],
) -> ClassTextualSet:
    """Cross retained synonyms with descriptions and collect prompt embeddings.

    `prompt_embedder(synonym_text, description_text)` returns the unit
    embedding of the templated prompt; with no descriptions the bare template
    is used and the embedder is called with an empty description string.
    """
    if len(retained) == 0:
        raise DataError(f"class {class_id!r}: no retained synonyms")
    desc_list = list(descriptions) if len(descriptions) > 0 else [""]
    rows = []
    provenance = []
    for cand in retained:
        for desc in desc_list:
            try:
                row = prompt_embedder(cand.text, desc)
            except KeyError as exc:
                raise DataError(
                    f"unencoded prompt for class {class_id!r}: "
                    f"({cand.text!r}, {desc!r})"
                ) from exc
            rows.append(l2_normalize(row))
            provenance.append((cand.text, desc))
    return ClassTextualSet(class_id, np.stack(rows), provenance)

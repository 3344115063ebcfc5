"""Seed-reproducible stratified splitting and few-shot episode sampling.

All randomness comes from one fixed 64-bit recurrence so plans are
bit-identical across platforms and processes. Per-class shuffle streams
are keyed by a string tag, which makes the plans independent of manifest
row order and of the order classes are processed in.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

from .errors import HarnessWarning, ParseError, ValidationError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64_mix(z: int) -> int:
    """Finalization scramble: xor-shift-multiply avalanche of a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64_next(state: int) -> tuple[int, int]:
    """One step of the splitmix64 recurrence: (value, new state)."""
    state = (state + _GAMMA) & _MASK64
    return splitmix64_mix(state), state


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of the UTF-8 encoding of text."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass
class RngStream:
    """Deterministic stream of 64-bit values; fully defined by its state."""

    state: int

    def next(self) -> int:
        value, self.state = splitmix64_next(self.state)
        return value


def _stream(seed: int, tag: str) -> RngStream:
    return RngStream(splitmix64_mix(seed) ^ fnv1a64(tag))


def seeded_shuffle(ids: list[str], seed: int, stream_tag: str) -> list[str]:
    """Fisher-Yates permutation driven by the (seed, tag) stream.

    Draws use `next() mod (i + 1)`; the modulo bias is negligible for
    n much smaller than 2**64 and is the price of bit-exact portability.
    """
    out = list(ids)
    rng = _stream(seed, stream_tag)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next() % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


@dataclass
class DatasetManifest:
    """Sample ids with their class labels; ids are unique."""

    entries: list[tuple[str, str]]

    def __post_init__(self):
        seen = set()
        for sample_id, _ in self.entries:
            if sample_id in seen:
                raise ValidationError(f"duplicate sample_id in manifest: {sample_id!r}")
            seen.add(sample_id)

    def by_class(self) -> dict[str, list[str]]:
        """Class label -> sample ids sorted by id (order-normalized)."""
        groups: dict[str, list[str]] = {}
        for sample_id, label in self.entries:
            groups.setdefault(label, []).append(sample_id)
        return {label: sorted(groups[label]) for label in sorted(groups)}


def load_manifest(text: str, source: str = "manifest") -> DatasetManifest:
    """Parse a `sample_id,label` CSV with header into a manifest."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty manifest", source=source) from None
    if [h.strip() for h in header[:2]] != ["sample_id", "label"]:
        raise ParseError(
            f"manifest header must start with 'sample_id,label', got {header!r}",
            source=source,
            line=1,
        )
    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < 2:
            raise ParseError("expected 2 columns", source=source, line=lineno)
        sample_id, label = row[0].strip(), row[1].strip()
        if not sample_id or not label:
            raise ParseError("empty sample_id or label", source=source, line=lineno)
        entries.append((sample_id, label))
    return DatasetManifest(entries)


@dataclass
class SplitPlan:
    train_ids: list[str]
    test_ids: list[str]


@dataclass
class FoldPlan:
    k: int
    fold_of: dict[str, int] = field(default_factory=dict)

    def fold_members(self, fold: int) -> list[str]:
        return [s for s, f in self.fold_of.items() if f == fold]


def stratified_holdout(
    manifest: DatasetManifest, train_fraction: float, seed: int
) -> SplitPlan:
    """Per-class shuffle, then the first floor(fraction * n_c) ids train."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not manifest.entries:
        raise ValidationError("cannot split an empty manifest")
    train: list[str] = []
    test: list[str] = []
    for label, ids in manifest.by_class().items():
        shuffled = seeded_shuffle(ids, seed, label)
        cut = math.floor(train_fraction * len(shuffled))
        train.extend(shuffled[:cut])
        test.extend(shuffled[cut:])
    return SplitPlan(train_ids=train, test_ids=test)


def stratified_kfold(manifest: DatasetManifest, k: int, seed: int) -> FoldPlan:
    """Deal each class's shuffled ids round-robin over K folds."""
    if k < 2:
        raise ValidationError(f"K must be >= 2, got {k}")
    if not manifest.entries:
        raise ValidationError("cannot split an empty manifest")
    plan = FoldPlan(k=k)
    small = []
    for label, ids in manifest.by_class().items():
        if len(ids) < k:
            small.append(label)
        shuffled = seeded_shuffle(ids, seed, f"kfold/{label}")
        for t, sample_id in enumerate(shuffled):
            plan.fold_of[sample_id] = t % k
    if small:
        warnings.warn(
            f"classes with fewer than K={k} samples: {', '.join(small)}",
            HarnessWarning,
            stacklevel=2,
        )
    return plan


def sample_episode(
    manifest: DatasetManifest,
    ways: int,
    shots: int,
    queries: int,
    seed: int,
    episode_index: int,
) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    """One deterministic w-way episode: (support ids, query ids) per class."""
    if ways < 1 or shots < 1 or queries < 1:
        raise ValidationError("ways, shots and queries must all be >= 1")
    need = shots + queries
    eligible = [label for label, ids in manifest.by_class().items() if len(ids) >= need]
    if len(eligible) < ways:
        raise ValidationError(
            f"need {ways} classes with >= {need} samples, only {len(eligible)} eligible"
        )
    tag = f"episode/{episode_index}"
    chosen = sorted(seeded_shuffle(eligible, seed, tag)[:ways])
    by_class = manifest.by_class()
    support: dict[str, list[str]] = {}
    query: dict[str, list[str]] = {}
    for label in chosen:
        ids = seeded_shuffle(by_class[label], seed, f"{tag}/{label}")
        support[label] = ids[:shots]
        query[label] = ids[shots:need]
    return support, query

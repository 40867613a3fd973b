"""
Train / validation / test splitting.

The test set is one held-out fold. The validation set is drawn from the
remaining records by one of three rules: whole recording sources per class,
a fraction of each class's sources, or a fraction of the samples. Source-based
rules keep every source entirely on one side of the train/validation cut.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import TYPE_CHECKING

import numpy as np

from exceptions import SplitError
from models.dataset import Split, SplitRule

if TYPE_CHECKING:
    from collections.abc import Sequence

    from models.dataset import Manifest, ManifestRecord, SplitSpec

logger = logging.getLogger(__name__)


def _sources_by_class(records: Sequence[ManifestRecord]) -> dict[int, list[str]]:
    sources: dict[int, list[str]] = defaultdict(list)
    for record in records:
        if record.source_id not in sources[record.label]:
            sources[record.label].append(record.source_id)
    return {label: sorted(ids) for label, ids in sorted(sources.items())}


def _held_out_sources(
    records: Sequence[ManifestRecord], spec: SplitSpec, rng: np.random.Generator
) -> set[str]:
    chosen: set[str] = set()
    for label, sources in _sources_by_class(records).items():
        if spec.rule is SplitRule.SOURCES_PER_CLASS:
            count = int(spec.value)
            if len(sources) <= count:
                msg = (
                    f"class {label} has {len(sources)} sources; holding out {count} "
                    "would leave none for training"
                )
                raise SplitError(msg)
        else:
            count = max(1, round(spec.value * len(sources)))
            if count >= len(sources):
                msg = f"class {label} has too few sources ({len(sources)}) for {spec.value:.0%}"
                raise SplitError(msg)
        # A source shared with an earlier class already counts toward this one.
        candidates = [s for s in sources if s not in chosen]
        needed = count - (len(sources) - len(candidates))
        if needed > 0:
            picked = rng.choice(len(candidates), size=needed, replace=False)
            chosen.update(candidates[int(i)] for i in sorted(picked))
    return chosen


def split(manifest: Manifest, held_out_fold: int, spec: SplitSpec) -> Split:
    """
    Partition a manifest for one cross-validation fold.

    Raises:
        SplitError: If the fold is out of range or the rule cannot be met.
    """
    if not 1 <= held_out_fold <= manifest.n_folds:
        msg = f"fold {held_out_fold} outside 1..{manifest.n_folds}"
        raise SplitError(msg)
    test = manifest.fold(held_out_fold)
    remaining = [r for r in manifest.records if r.fold != held_out_fold]
    if not remaining:
        msg = f"no records outside fold {held_out_fold}"
        raise SplitError(msg)

    rng = np.random.default_rng(spec.seed)
    if spec.rule is SplitRule.SAMPLE_FRACTION:
        count = math.floor(spec.value * len(remaining) + 0.5)
        if not 0 < count < len(remaining):
            msg = f"{spec.value:.0%} of {len(remaining)} samples leaves an empty partition"
            raise SplitError(msg)
        picked = set(rng.choice(len(remaining), size=count, replace=False).tolist())
        validation = [r for i, r in enumerate(remaining) if i in picked]
        train = [r for i, r in enumerate(remaining) if i not in picked]
    else:
        held = _held_out_sources(remaining, spec, rng)
        validation = [r for r in remaining if r.source_id in held]
        train = [r for r in remaining if r.source_id not in held]
        starved = {r.label for r in remaining} - {r.label for r in train}
        if starved:
            msg = f"shared sources leave no training records for classes {sorted(starved)}"
            raise SplitError(msg)

    result = Split(train=tuple(train), validation=tuple(validation), test=test)
    logger.info(
        "Split fold %d (%s:%s): train=%d validation=%d test=%d",
        held_out_fold,
        spec.rule.value,
        spec.value,
        len(result.train),
        len(result.validation),
        len(result.test),
    )
    return result


def training_subset(
    train: Sequence[ManifestRecord], size: int, seed: int
) -> tuple[ManifestRecord, ...]:
    """Fixed subset of the training records, drawn once, for measuring train loss."""
    count = min(size, len(train))
    rng = np.random.default_rng(seed)
    picked = sorted(rng.choice(len(train), size=count, replace=False).tolist())
    return tuple(train[i] for i in picked)

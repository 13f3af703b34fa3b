"""Balanced dataset generation and sample statistics.

Raw draws are scanned in stream-index order on a fixed grid of rounds;
the labeling policy for a round depends only on quota counts at the
round boundary, so the emitted dataset is a pure function of the master
seed and the targets, at any worker count. Expensive labeling work
within a round can fan out to a process pool; results are reduced in
index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError, PreconditionError, SolverError
from ..qmat import fidelity, is_ppt, sqrtm_psd
from ..sampler import SeedSpec, random_density_hs
from ..witness import DEFAULT_EPSILON
from .labeling import (
    LABELS,
    ORIGIN_ARTIFICIAL,
    ORIGIN_RANDOM,
    LabeledState,
    label_random_state,
    make_artificial_pptes,
)

ROUND_SIZE = 256          # draw indices per scheduling round
ARTIFICIAL_SLOTS = 16     # max artificial attempts started per round

# per-state seed channels: index i uses stream i*8 + channel
_CH_DRAW = 0
_CH_LABEL = 1
_CH_RECERT = 2


@dataclass
class DatasetManifest:
    """Counts, rates and provenance of one generation run."""

    format_version: int
    epsilon: float
    master_seed: int
    target_per_class: int
    artificial_fraction: float
    counts: dict[str, int]
    pptes_random: int
    pptes_artificial: int
    raw_draws: int
    ppt_found: int
    ppt_fraction: float
    artificial_attempts: int
    rejections: dict[str, int] = field(default_factory=dict)
    partial: bool = False
    fidelity_sample: float = float("nan")
    fidelity_per_class: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class FidelityStats:
    """Mean pairwise root fidelities for the whole sample and per class."""

    sample: float
    per_class: dict[str, float]
    n_pairs: int


def _draw_spec(seed: SeedSpec, index: int) -> SeedSpec:
    return SeedSpec(seed.master_seed, index * 8 + _CH_DRAW)


def _task(args: tuple[int, int, str, float]) -> tuple[int, str, object]:
    """One unit of labeling work; pure function of its arguments."""
    master, index, kind, epsilon = args
    draw = SeedSpec(master, index * 8 + _CH_DRAW)
    rho = random_density_hs(9, draw)
    if kind == "label":
        try:
            st = label_random_state(
                rho, epsilon, seed=SeedSpec(master, index * 8 + _CH_LABEL),
                seed_trace=draw)
            return index, "row", st
        except (SolverError, NumericalError) as exc:
            return index, "reject", f"label: {exc}"
    reasons: list[str] = []
    st = make_artificial_pptes(
        rho, epsilon,
        seed=SeedSpec(master, index * 8 + _CH_LABEL),
        recert_seed=SeedSpec(master, index * 8 + _CH_RECERT),
        seed_trace=draw, reject_log=reasons)
    if st is None:
        return index, "reject", "artificial: " + (reasons[0] if reasons else "unknown")
    return index, "row", st


def generate_balanced(
    target_per_class: int,
    artificial_fraction: float = 0.5,
    seed: SeedSpec = SeedSpec(0, 0),
    epsilon: float = DEFAULT_EPSILON,
    draw_budget: int | None = None,
    artificial_budget: int | None = None,
    workers: int = 1,
    reject_log: list[str] | None = None,
    compute_fidelity: bool = True,
) -> tuple[list[LabeledState], DatasetManifest]:
    """Generate an equal number of SEP, PPTES and NPT states.

    Random draws fill the SEP and NPT classes; PPTES states found among
    the draws fill a (1 - artificial_fraction) share of their class,
    and once the NPT class is full the remaining share is built as
    artificial bound entangled states from fresh NPT draws. If a quota
    is still unmet when the draw or attempt budget runs out, the
    dataset is returned short with manifest.partial set.
    """
    if target_per_class < 1:
        raise PreconditionError("target_per_class must be >= 1")
    if not 0.0 <= artificial_fraction <= 1.0:
        raise PreconditionError("artificial_fraction must lie in [0, 1]")
    if workers < 1:
        raise PreconditionError("workers must be >= 1")
    if draw_budget is None:
        draw_budget = 200_000 * target_per_class
    if artificial_budget is None:
        artificial_budget = 16 * target_per_class

    target = target_per_class
    artificial_cap = math.ceil(artificial_fraction * target)
    random_pptes_cap = target - artificial_cap
    counts = {c: 0 for c in LABELS}
    pptes_random = 0
    pptes_artificial = 0
    rejections: dict[str, int] = {}
    states: list[LabeledState] = []
    raw_draws = 0
    ppt_found = 0
    art_attempts = 0

    def _full() -> bool:
        return all(counts[c] >= target for c in LABELS)

    def _log(index: int, reason: str) -> None:
        key = reason.split(":", 1)[0]
        rejections[key] = rejections.get(key, 0) + 1
        if reject_log is not None:
            reject_log.append(f"index={index} {reason}")

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        round_start = 0
        while not _full() and round_start < draw_budget:
            round_end = min(round_start + ROUND_SIZE, draw_budget)
            npt_open = counts["NPT"] < target
            sep_open = counts["SEP"] < target
            pptes_open = counts["PPTES"] < target
            rand_pptes_open = pptes_open and pptes_random < random_pptes_cap
            art_open = (not npt_open and pptes_open
                        and pptes_artificial < artificial_cap
                        and art_attempts < artificial_budget)
            art_slots = min(
                ARTIFICIAL_SLOTS,
                max(artificial_budget - art_attempts, 0),
                (artificial_cap - pptes_artificial) + 2,
            ) if art_open else 0
            # labeling slots per round: open quota plus headroom for the
            # occasional solver reject; excess draws of the same kind are
            # skipped, which never changes the output because the reducer
            # keeps the first successes in index order anyway
            npt_slots = (target - counts["NPT"]) + 2 if npt_open else 0

            tasks: list[tuple[int, int, str, float]] = []
            for i in range(round_start, round_end):
                rho = random_density_hs(9, _draw_spec(seed, i))
                raw_draws += 1
                if is_ppt(rho):
                    ppt_found += 1
                    if sep_open or rand_pptes_open:
                        tasks.append((seed.master_seed, i, "label", epsilon))
                elif npt_slots > 0:
                    tasks.append((seed.master_seed, i, "label", epsilon))
                    npt_slots -= 1
                elif not npt_open and art_slots > 0:
                    tasks.append((seed.master_seed, i, "artificial", epsilon))
                    art_slots -= 1

            if pool is not None and len(tasks) > 1:
                results = list(pool.map(_task, tasks))
            else:
                results = [_task(t) for t in tasks]

            for index, status, payload in results:
                if status == "reject":
                    _log(index, str(payload))
                    if payload.startswith("artificial"):
                        art_attempts += 1
                    continue
                st: LabeledState = payload
                if st.origin == ORIGIN_ARTIFICIAL:
                    art_attempts += 1
                if counts[st.label] >= target:
                    continue  # class already full: discard, first-come wins
                if st.label == "PPTES" and st.origin == ORIGIN_RANDOM \
                        and pptes_random >= random_pptes_cap:
                    continue
                if st.label == "PPTES" and st.origin == ORIGIN_ARTIFICIAL \
                        and pptes_artificial >= artificial_cap:
                    continue
                counts[st.label] += 1
                if st.label == "PPTES":
                    if st.origin == ORIGIN_ARTIFICIAL:
                        pptes_artificial += 1
                    else:
                        pptes_random += 1
                states.append(st)
            round_start = round_end
    finally:
        if pool is not None:
            pool.shutdown()

    manifest = DatasetManifest(
        format_version=1,
        epsilon=epsilon,
        master_seed=seed.master_seed,
        target_per_class=target,
        artificial_fraction=artificial_fraction,
        counts=dict(counts),
        pptes_random=pptes_random,
        pptes_artificial=pptes_artificial,
        raw_draws=raw_draws,
        ppt_found=ppt_found,
        ppt_fraction=ppt_found / raw_draws if raw_draws else float("nan"),
        artificial_attempts=art_attempts,
        rejections=dict(rejections),
        partial=not _full(),
    )
    if compute_fidelity and len(states) >= 2:
        stats = fidelity_stats(states)
        manifest.fidelity_sample = stats.sample
        manifest.fidelity_per_class = dict(stats.per_class)
    return states, manifest


def fidelity_stats(states: list[LabeledState]) -> FidelityStats:
    """Mean root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)) over pairs.

    The sample mean averages over every unordered distinct pair. The
    per-class mean averages over the pairs with at least one member in
    the class, so it measures how close the class sits to the sample as
    a whole rather than its internal spread.
    """
    if len(states) < 2:
        raise PreconditionError("need at least two states")
    roots = [sqrtm_psd(st.rho) for st in states]
    n = len(states)
    total = 0.0
    pairs = 0
    class_sums = {c: 0.0 for c in LABELS}
    class_pairs = {c: 0 for c in LABELS}
    for i in range(n):
        for j in range(i + 1, n):
            r = math.sqrt(fidelity(states[i].rho, states[j].rho,
                                   sqrt_rho=roots[i]))
            total += r
            pairs += 1
            for c in {states[i].label, states[j].label}:
                class_sums[c] += r
                class_pairs[c] += 1
    per_class = {c: class_sums[c] / class_pairs[c]
                 for c in LABELS if class_pairs[c] > 0}
    return FidelityStats(sample=total / pairs, per_class=per_class, n_pairs=pairs)

"""Blockage-recovery state machine and NLoS backup-pair bookkeeping.

Each endpoint runs a five-state machine: normal operation (NO), beam
adaptation (BA), mobile-side and base-station-side NLoS beam discovery
(MS_NBD / BS_NBD), and NLoS beam operation (NBO). Discovery runs
periodically and keeps exactly one backup beam pair per BS LoS transmit
beam; a sharp RSS drop activates the stored pair so control traffic and
time synchronization survive until the line of sight returns.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

from .codebook import Codebook, angular_distance_deg

logger = logging.getLogger(__name__)


class ProtocolError(Exception):
    """Raised for (state, event) pairs the machine does not define."""


class ProtocolState(enum.Enum):
    NO = "NO"
    BA = "BA"
    MS_NBD = "MS_NBD"
    BS_NBD = "BS_NBD"
    NBO = "NBO"


@dataclass(frozen=True)
class RssUpdate:
    """Serving-link measurement: drop relative to the reference baseline."""

    drop_db: float


class RescanTimer:
    pass


class SweepDone:
    pass


class BlockageDetected:
    pass


class LoSRecovered:
    pass


class AlignmentDone:
    pass


@dataclass(frozen=True)
class Thresholds:
    """Protocol trigger levels and timers.

    A serving-RSS drop of ``adapt_drop_db`` triggers beam adaptation and a
    drop of ``blockage_drop_db`` (which preempts) triggers NLoS beam
    operation, both measured against the previous measurement occasion.
    Discovery reruns every ``rescan_interval_s``. Candidate NLoS beams must
    lie within ``nlos_eligibility_db`` of the LoS RSS and point at least
    ``nlos_min_separation_deg`` away from the serving beam so that beams
    merely overlapping the LoS main lobe are not stored as backups.
    """

    adapt_drop_db: float = 3.0
    blockage_drop_db: float = 10.0
    nlos_eligibility_db: float = 10.0
    rescan_interval_s: float = 0.100
    nlos_min_separation_deg: float = 20.0

    def __post_init__(self):
        if not self.adapt_drop_db > 0.0:
            raise ValueError("adapt_drop_db must be > 0")
        if self.blockage_drop_db < self.adapt_drop_db:
            raise ValueError("blockage_drop_db must be >= adapt_drop_db")
        if self.rescan_interval_s <= 0.0:
            raise ValueError("rescan_interval_s must be > 0")
        if self.nlos_eligibility_db <= 0.0:
            raise ValueError("nlos_eligibility_db must be > 0")
        if self.nlos_min_separation_deg < 0.0:
            raise ValueError("nlos_min_separation_deg must be >= 0")


def transition(
    state: ProtocolState,
    event,
    thresholds: Thresholds,
    resume_state: ProtocolState = ProtocolState.NO,
) -> ProtocolState:
    """Advance the state machine by one event.

    ``resume_state`` is where a discovery cycle returns after BS_NBD
    completes: NO normally, NBO when the rescan was launched while
    operating on the backup pair. Undefined (state, event) pairs raise
    ``ProtocolError`` after logging; no event is silently ignored.
    """
    if isinstance(event, RssUpdate):
        if state in (ProtocolState.NO, ProtocolState.BA):
            if event.drop_db >= thresholds.blockage_drop_db:
                return ProtocolState.NBO
            if state is ProtocolState.NO and event.drop_db >= thresholds.adapt_drop_db:
                return ProtocolState.BA
            return state
    elif isinstance(event, BlockageDetected):
        if state in (ProtocolState.NO, ProtocolState.BA):
            return ProtocolState.NBO
    elif isinstance(event, RescanTimer):
        if state in (ProtocolState.NO, ProtocolState.NBO):
            return ProtocolState.MS_NBD
    elif isinstance(event, SweepDone):
        if state is ProtocolState.MS_NBD:
            return ProtocolState.BS_NBD
        if state is ProtocolState.BS_NBD:
            return resume_state
    elif isinstance(event, AlignmentDone):
        if state is ProtocolState.BA:
            return ProtocolState.NO
    elif isinstance(event, LoSRecovered):
        if state is ProtocolState.NBO:
            return ProtocolState.NO
    logger.error("illegal protocol event %s in state %s", type(event).__name__, state.name)
    raise ProtocolError(f"event {type(event).__name__} not legal in state {state.name}")


@dataclass(frozen=True)
class BackupPair:
    bs_beam: int
    ms_beam: int
    rss_dbm: float
    recorded_at_s: float


class BeamPairStore:
    """At most one backup NLoS beam pair per BS LoS transmit beam."""

    def __init__(self):
        self._entries: dict[int, BackupPair] = {}

    def record(self, los_bs_beam: int, pair: BackupPair) -> None:
        self._entries[los_bs_beam] = pair

    def lookup(self, los_bs_beam: int) -> BackupPair | None:
        return self._entries.get(los_bs_beam)

    def clear(self) -> None:
        self._entries.clear()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, los_bs_beam: int) -> bool:
        return los_bs_beam in self._entries


@dataclass(frozen=True)
class MeasurementReport:
    """Per-beam RSS from one discovery sweep against the serving BS beam."""

    beam_rss_dbm: tuple[tuple[int, float], ...]
    los_beam_index: int
    los_rss_dbm: float
    swept_at_s: float = 0.0


def _argmax_lowest_index(pairs) -> tuple[int, float] | None:
    best = None
    for idx, rss in pairs:
        if best is None or rss > best[1]:
            best = (idx, rss)
    return best


def ms_nbd(
    report: MeasurementReport,
    thresholds: Thresholds,
    codebook: Codebook | None = None,
) -> int | None:
    """Pick the mobile-side backup beam from a sweep report.

    Eligible beams sit within the eligibility window of the LoS RSS,
    exclude the serving receive beam itself, and (when the codebook is
    known) point far enough away from it that they represent a distinct
    spatial route rather than the LoS main lobe. Returns the eligible beam
    with the highest RSS, lowest index on ties, or None when the set is
    empty -- an empty result is a valid outcome surfaced in metrics.
    """
    floor = report.los_rss_dbm - thresholds.nlos_eligibility_db
    eligible = []
    for idx, rss in report.beam_rss_dbm:
        if idx == report.los_beam_index:
            continue
        if rss < floor:
            continue
        if codebook is not None and thresholds.nlos_min_separation_deg > 0.0:
            sep = angular_distance_deg(
                codebook.boresights_deg[idx],
                codebook.boresights_deg[report.los_beam_index],
            )
            if sep < thresholds.nlos_min_separation_deg - 1e-9:
                continue
        eligible.append((idx, rss))
    best = _argmax_lowest_index(eligible)
    return None if best is None else best[0]


def bs_nbd(
    sweep_rss_dbm,
    store: BeamPairStore,
    current_los_bs_beam: int,
    ms_nlos_beam: int,
    now_s: float,
) -> int:
    """Pick the BS-side beam after its sweep and record the pair.

    ``sweep_rss_dbm`` holds (bs_beam, rss) measured at the mobile on its
    discovered NLoS receive beam. The argmax (lowest index on ties) is
    stored with the mobile beam under the active LoS transmit beam,
    overwriting any previous entry.
    """
    best = _argmax_lowest_index(sweep_rss_dbm)
    if best is None:
        raise ValueError("BS sweep must contain at least one measurement")
    store.record(
        current_los_bs_beam,
        BackupPair(bs_beam=best[0], ms_beam=ms_nlos_beam, rss_dbm=best[1], recorded_at_s=now_s),
    )
    return best[0]


def enter_nbo(store: BeamPairStore, current_los_bs_beam: int) -> BackupPair | None:
    """Backup pair to activate at blockage onset, or None (recovery failure).

    With an entry present the mobile retunes immediately and instructs the
    BS over the NLoS uplink; without one it stays on the LoS pair and the
    event counts as a recovery failure.
    """
    return store.lookup(current_los_bs_beam)


def nbo_monitor(
    rss_on_nlos_dbm: float,
    probe_los_rss_dbm: float,
    pre_blockage_los_rss_dbm: float,
    thresholds: Thresholds,
) -> bool:
    """LoS-recovery decision for one scheduled probe while operating NLoS.

    True (recovered) when the probed LoS pair is back within the
    adaptation margin of its pre-blockage RSS.
    """
    return probe_los_rss_dbm >= pre_blockage_los_rss_dbm - thresholds.adapt_drop_db


@dataclass
class BaResult:
    beam: int
    rss_dbm: float
    measurements: int
    swept: bool
    restored: bool


def ba_align(
    current_beam: int,
    current_rss_dbm: float,
    pre_drop_rss_dbm: float,
    n_beams: int,
    thresholds: Thresholds,
):
    """Stand-in beam alignment, as a measurement generator.

    Yields beam indices to measure and receives their RSS via ``send``.
    First the two codebook neighbors of the current beam are tested and
    the best of the three adopted; if that still sits more than the
    adaptation margin below the pre-drop RSS, a full sweep runs and the
    overall best beam is adopted regardless. The ``BaResult`` comes back
    as the generator's return value.
    """
    candidates: dict[int, float] = {current_beam: current_rss_dbm}
    measurements = 0
    for nbr in (current_beam - 1, current_beam + 1):
        if 0 <= nbr < n_beams:
            candidates[nbr] = yield nbr
            measurements += 1
    best = _argmax_lowest_index(sorted(candidates.items()))
    assert best is not None
    if best[1] >= pre_drop_rss_dbm - thresholds.adapt_drop_db:
        return BaResult(best[0], best[1], measurements, swept=False, restored=True)
    for beam in range(n_beams):
        candidates[beam] = yield beam
        measurements += 1
    best = _argmax_lowest_index(sorted(candidates.items()))
    assert best is not None
    restored = best[1] >= pre_drop_rss_dbm - thresholds.adapt_drop_db
    return BaResult(best[0], best[1], measurements, swept=True, restored=restored)


def drive_ba(
    current_beam: int,
    current_rss_dbm: float,
    pre_drop_rss_dbm: float,
    n_beams: int,
    thresholds: Thresholds,
    measure,
) -> BaResult:
    """Run ``ba_align`` to completion against a measurement callable."""
    gen = ba_align(current_beam, current_rss_dbm, pre_drop_rss_dbm, n_beams, thresholds)
    try:
        beam = next(gen)
        while True:
            beam = gen.send(measure(beam))
    except StopIteration as done:
        return done.value

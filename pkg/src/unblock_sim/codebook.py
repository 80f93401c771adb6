"""Steerable beam codebooks and the parametric antenna gain model.

Both link endpoints use a one-dimensional azimuth codebook of equally
spaced narrow beams. The gain model is a quadratic-in-dB main lobe with a
flat sidelobe floor: it preserves the peak gain, the 3 dB beamwidth, and a
steep falloff, which is all the beam-level protocol logic consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property


def wrap_angle_deg(angle_deg: float) -> float:
    """Wrap an angle to [-180, 180)."""
    return (angle_deg + 180.0) % 360.0 - 180.0


def angular_distance_deg(a_deg: float, b_deg: float) -> float:
    """Smallest absolute angle between two azimuths, in [0, 180]."""
    return abs(wrap_angle_deg(a_deg - b_deg))


@dataclass(frozen=True)
class BeamPattern:
    """Parametric radiation pattern for a single steerable beam."""

    peak_gain_dbi: float = 15.0
    beamwidth_3db_deg: float = 20.0
    sidelobe_floor_dbi: float = -10.0

    def __post_init__(self):
        if not 0.0 < self.beamwidth_3db_deg <= 180.0:
            raise ValueError(
                f"beamwidth_3db_deg must be in (0, 180], got {self.beamwidth_3db_deg}"
            )
        if self.sidelobe_floor_dbi >= self.peak_gain_dbi:
            raise ValueError("sidelobe_floor_dbi must be below peak_gain_dbi")


def gain_db(pattern: BeamPattern, offset_deg: float) -> float:
    """Beam gain at an angular offset from boresight.

    gain = max(peak - 12 * (offset / beamwidth_3db)^2, sidelobe_floor):
    exactly the peak at boresight and exactly peak - 3 dB at half the
    3 dB beamwidth. The offset is normalized to [0, 180].
    """
    off = angular_distance_deg(offset_deg, 0.0)
    rolloff = 12.0 * (off / pattern.beamwidth_3db_deg) ** 2
    return max(pattern.peak_gain_dbi - rolloff, pattern.sidelobe_floor_dbi)


@dataclass(frozen=True)
class Codebook:
    """Ordered set of beam boresights spanning an azimuth sector.

    Boresights are strictly increasing and span exactly ``sector_deg``
    (first beam at ``center_deg - sector/2``, last at ``center + sector/2``).
    Angles are relative to the owning endpoint's facing direction.
    """

    n_beams: int = 25
    sector_deg: float = 120.0
    center_deg: float = 0.0
    pattern: BeamPattern = field(default_factory=BeamPattern)

    def __post_init__(self):
        if self.n_beams < 2:
            raise ValueError("codebook needs at least 2 beams")
        if self.sector_deg <= 0.0:
            raise ValueError("sector_deg must be positive")

    @cached_property
    def boresights_deg(self) -> tuple[float, ...]:
        step = self.sector_deg / (self.n_beams - 1)
        start = self.center_deg - self.sector_deg / 2.0
        return tuple(start + k * step for k in range(self.n_beams))

    @property
    def beam_spacing_deg(self) -> float:
        return self.sector_deg / (self.n_beams - 1)

    def beam_gain_db(self, beam_index: int, angle_deg: float, facing_deg: float = 0.0) -> float:
        """Gain of one beam toward an absolute azimuth, given the endpoint facing."""
        bore = self.boresights_deg[beam_index]
        offset = angular_distance_deg(angle_deg, facing_deg + bore)
        return gain_db(self.pattern, offset)


def best_beam(codebook: Codebook, target_angle_deg: float) -> int:
    """Index of the beam whose boresight is closest to the target azimuth.

    Ties break toward the lower index so sweeps are deterministic.
    """
    best_idx = 0
    best_dist = float("inf")
    for idx, bore in enumerate(codebook.boresights_deg):
        d = angular_distance_deg(target_angle_deg, bore)
        if d < best_dist - 1e-12:
            best_idx = idx
            best_dist = d
    return best_idx

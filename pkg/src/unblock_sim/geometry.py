"""2-D propagation geometry and the link budget.

The scene is a floor plan: a base station, a mobile, and reflecting wall
segments with per-material losses. Propagation paths are the direct LoS
path plus one first-order specular reflection per surface, found with the
mirror-image construction. RSS combines path powers incoherently; the
protocol operates on slot-level RSS, not on fast fading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .codebook import Codebook, wrap_angle_deg

# Propagation constant used throughout the link budget (m/s).
SPEED_OF_LIGHT_MPS = 3.0e8

# Materials marked opaque do not transmit at all (any penetrating signal
# lands below the noise floor).
OPAQUE = math.inf


@dataclass(frozen=True)
class Material:
    name: str
    reflection_loss_db: float
    penetration_loss_db: float = OPAQUE
    # Some materials (the human body) were characterized as a loss range
    # rather than a point value; samplers draw from it.
    reflection_loss_range_db: tuple[float, float] | None = None

    def __post_init__(self):
        if self.reflection_loss_db < 0.0:
            raise ValueError("reflection_loss_db must be >= 0")
        if self.penetration_loss_db < 0.0:
            raise ValueError("penetration_loss_db must be >= 0 or opaque")

    @property
    def opaque(self) -> bool:
        return math.isinf(self.penetration_loss_db)


# Measured penetration/reflection losses for common indoor obstacles.
MATERIALS: dict[str, Material] = {
    "drywall": Material("drywall", reflection_loss_db=10.0, penetration_loss_db=8.0),
    "double_drywall": Material("double_drywall", reflection_loss_db=10.0, penetration_loss_db=16.0),
    "wooden_door": Material("wooden_door", reflection_loss_db=11.0),
    "concrete": Material("concrete", reflection_loss_db=13.0),
    "human_body": Material(
        "human_body",
        reflection_loss_db=17.0,
        reflection_loss_range_db=(14.0, 20.0),
    ),
}

# Attenuation range a human blocker puts on a path it obstructs (dB).
HUMAN_BODY_LOSS_RANGE_DB = (14.0, 20.0)

Point = tuple[float, float]


@dataclass(frozen=True)
class Surface:
    """A reflecting wall segment in the floor plan."""

    p1: Point
    p2: Point
    material: Material

    def __post_init__(self):
        if self.p1 == self.p2:
            raise ValueError("surface endpoints must be distinct")


@dataclass(frozen=True)
class PathComponent:
    """One propagation path between BS and MS.

    ``aod_deg`` is the departure azimuth at the BS and ``aoa_deg`` the
    arrival azimuth at the MS, both absolute (world frame). ``extra_loss_db``
    is 0 for LoS and the surface material's reflection loss otherwise.
    """

    kind: str  # "los" | "reflection"
    aod_deg: float
    aoa_deg: float
    length_m: float
    extra_loss_db: float = 0.0
    surface_index: int | None = None
    via_point: Point | None = None  # reflection point, None for LoS

    def __post_init__(self):
        if self.length_m <= 0.0:
            raise ValueError("path length must be positive")

    @property
    def is_los(self) -> bool:
        return self.kind == "los"


@dataclass(frozen=True)
class LinkBudgetParams:
    tx_power_dbm: float = 10.0
    carrier_ghz: float = 60.0
    bandwidth_ghz: float = 2.0
    noise_figure_db: float = 8.0
    decode_threshold_db: float = 0.0
    shadowing_sigma_db: float = 0.0

    def __post_init__(self):
        if self.carrier_ghz <= 0.0:
            raise ValueError("carrier_ghz must be positive")
        if self.bandwidth_ghz <= 0.0:
            raise ValueError("bandwidth_ghz must be positive")
        if self.shadowing_sigma_db < 0.0:
            raise ValueError("shadowing_sigma_db must be >= 0")


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _azimuth_deg(frm: Point, to: Point) -> float:
    return math.degrees(math.atan2(to[1] - frm[1], to[0] - frm[0]))


def _mirror_point(p: Point, s1: Point, s2: Point) -> Point:
    """Reflect p across the infinite line through s1-s2."""
    d = _sub(s2, s1)
    t = _dot(_sub(p, s1), d) / _dot(d, d)
    foot = (s1[0] + t * d[0], s1[1] + t * d[1])
    return (2.0 * foot[0] - p[0], 2.0 * foot[1] - p[1])


def _specular_reflection(
    surface: Surface, bs_pos: Point, ms_pos: Point
) -> tuple[Point, float] | None:
    """Reflection point and path length via the mirror-image construction.

    Returns None when no first-order specular path exists: endpoints on
    opposite sides of the wall, an endpoint on the wall line, or the
    reflection point falling outside the segment.
    """
    d = _sub(surface.p2, surface.p1)
    side_bs = _cross(d, _sub(bs_pos, surface.p1))
    side_ms = _cross(d, _sub(ms_pos, surface.p1))
    if side_bs == 0.0 or side_ms == 0.0 or (side_bs > 0) != (side_ms > 0):
        return None
    image = _mirror_point(bs_pos, surface.p1, surface.p2)
    # Intersect the image->MS segment with the wall segment.
    r = _sub(ms_pos, image)
    denom = _cross(r, d)
    if denom == 0.0:
        return None
    q = _sub(surface.p1, image)
    s = _cross(q, d) / denom          # position along image->MS
    u = _cross(q, r) / denom          # position along the wall segment
    if not (0.0 < s < 1.0 and -1e-9 <= u <= 1.0 + 1e-9):
        return None
    point = (image[0] + s * r[0], image[1] + s * r[1])
    return point, _dist(image, ms_pos)


def compute_paths(surfaces: list[Surface], bs_pos: Point, ms_pos: Point) -> list[PathComponent]:
    """All propagation paths: LoS plus one specular bounce per valid surface.

    The LoS path always comes first. Reflected paths follow in surface
    order, each carrying its material's reflection loss.
    """
    if bs_pos == ms_pos:
        raise ValueError("BS and MS positions must differ")
    paths = [
        PathComponent(
            kind="los",
            aod_deg=_azimuth_deg(bs_pos, ms_pos),
            aoa_deg=_azimuth_deg(ms_pos, bs_pos),
            length_m=_dist(bs_pos, ms_pos),
        )
    ]
    for idx, surf in enumerate(surfaces):
        hit = _specular_reflection(surf, bs_pos, ms_pos)
        if hit is None:
            continue
        point, length = hit
        paths.append(
            PathComponent(
                kind="reflection",
                aod_deg=_azimuth_deg(bs_pos, point),
                aoa_deg=_azimuth_deg(ms_pos, point),
                length_m=length,
                extra_loss_db=surf.material.reflection_loss_db,
                surface_index=idx,
                via_point=point,
            )
        )
    return paths


def fspl_db(distance_m: float, carrier_ghz: float) -> float:
    """Free-space path loss, 20*log10(4*pi*d/lambda)."""
    if distance_m <= 0.0:
        raise ValueError("distance_m must be positive")
    wavelength = SPEED_OF_LIGHT_MPS / (carrier_ghz * 1e9)
    return 20.0 * math.log10(4.0 * math.pi * distance_m / wavelength)


def noise_floor_dbm(params: LinkBudgetParams) -> float:
    """Total receiver noise power: -174 dBm/Hz thermal density plus figure."""
    return -174.0 + 10.0 * math.log10(params.bandwidth_ghz * 1e9) + params.noise_figure_db


def path_power_dbm(
    path: PathComponent,
    tx_beam: int,
    rx_beam: int,
    params: LinkBudgetParams,
    tx_codebook: Codebook,
    rx_codebook: Codebook,
    tx_facing_deg: float = 0.0,
    rx_facing_deg: float = 0.0,
    blockage_db: float = 0.0,
    shadowing_db: float = 0.0,
) -> float:
    """Received power carried by a single path for one beam pair."""
    return (
        params.tx_power_dbm
        + tx_codebook.beam_gain_db(tx_beam, path.aod_deg, tx_facing_deg)
        + rx_codebook.beam_gain_db(rx_beam, path.aoa_deg, rx_facing_deg)
        - fspl_db(path.length_m, params.carrier_ghz)
        - path.extra_loss_db
        - blockage_db
        + shadowing_db
    )


def rss_dbm(
    tx_beam: int,
    rx_beam: int,
    paths: list[PathComponent],
    blockage_db_per_path,
    params: LinkBudgetParams,
    tx_codebook: Codebook,
    rx_codebook: Codebook,
    tx_facing_deg: float = 0.0,
    rx_facing_deg: float = 0.0,
    shadowing_db_per_path=None,
) -> float:
    """Total RSS for a beam pair: linear-domain power sum over all paths.

    Returns the physical value; callers clamp at the noise floor when
    reporting or feeding receiver measurements (see ``clamp_rss_dbm``).
    """
    total_mw = 0.0
    for i, path in enumerate(paths):
        p = path_power_dbm(
            path,
            tx_beam,
            rx_beam,
            params,
            tx_codebook,
            rx_codebook,
            tx_facing_deg,
            rx_facing_deg,
            blockage_db=blockage_db_per_path[i] if blockage_db_per_path is not None else 0.0,
            shadowing_db=shadowing_db_per_path[i] if shadowing_db_per_path is not None else 0.0,
        )
        total_mw += 10.0 ** (p / 10.0)
    if total_mw <= 0.0:
        return -math.inf
    return 10.0 * math.log10(total_mw)


def clamp_rss_dbm(rss: float, params: LinkBudgetParams) -> float:
    """Clamp raw RSS at the noise floor: nothing below it is observable."""
    return max(rss, noise_floor_dbm(params))


def snr_db(rss: float, params: LinkBudgetParams) -> float:
    return rss - noise_floor_dbm(params)

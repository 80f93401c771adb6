"""Scenario ingestion, validation, and presets.

Scenarios are human-editable YAML with explicit units in every key name
(``_db``, ``_s``, ``_m``, ...). Every omitted field takes its default, so
an empty document is a valid static link with no blockage; unknown keys
are rejected with the full field path to catch typos. ``parse`` and
``render`` round-trip exactly.
"""

from __future__ import annotations

import math
from importlib import resources

import yaml

from .codebook import BeamPattern, Codebook
from .frame_timing import SlotSchedule, SyncParams
from .geometry import MATERIALS, LinkBudgetParams, Material, Surface
from .mobility import BlockageEvent, DiscBlocker, MobilityModel, Pose
from .protocol import Thresholds

PRESET_NAMES = (
    "fig6",
    "table1-materials",
    "table2-walk",
    "table2-rotation",
    "campaign-default",
)


class ConfigError(ValueError):
    """Validation failure with the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _check_keys(data: dict, allowed, path: str):
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}{key}", f"unknown key (expected one of {sorted(allowed)})")


def _get_number(data, key, default, path, lo=None, hi=None, lo_open=False):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key}", f"expected a number, got {value!r}")
    value = float(value)
    if lo is not None and (value <= lo if lo_open else value < lo):
        bound = f"> {lo}" if lo_open else f">= {lo}"
        raise ConfigError(f"{path}{key}", f"must be {bound}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}{key}", f"must be <= {hi}, got {value}")
    return value


def _get_int(data, key, default, path, lo=None, hi=None):
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}{key}", f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}{key}", f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}{key}", f"must be <= {hi}, got {value}")
    return value


def _get_bool(data, key, default, path):
    value = data.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}{key}", f"expected true/false, got {value!r}")
    return value


def _get_str(data, key, default, path, choices=None):
    value = data.get(key, default)
    if not isinstance(value, str):
        raise ConfigError(f"{path}{key}", f"expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(f"{path}{key}", f"must be one of {sorted(choices)}, got {value!r}")
    return value


def _get_pair(data, key, default, path):
    value = data.get(key, default)
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{path}{key}", f"expected [number, number], got {value!r}")
    return [float(value[0]), float(value[1])]


def _group(data, key, path) -> dict:
    value = data.get(key, {})
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key}", f"expected a mapping, got {value!r}")
    return value


def _parse_pose(data: dict, path: str, defaults=(0.0, 0.0, 0.0)) -> dict:
    _check_keys(data, {"x_m", "y_m", "facing_deg"}, path)
    return {
        "x_m": _get_number(data, "x_m", defaults[0], path),
        "y_m": _get_number(data, "y_m", defaults[1], path),
        "facing_deg": _get_number(data, "facing_deg", defaults[2], path),
    }


def _parse_codebook(data: dict, path: str) -> dict:
    _check_keys(
        data,
        {"n_beams", "sector_deg", "center_deg", "peak_gain_dbi", "beamwidth_3db_deg",
         "sidelobe_floor_dbi"},
        path,
    )
    out = {
        "n_beams": _get_int(data, "n_beams", 25, path, lo=2),
        "sector_deg": _get_number(data, "sector_deg", 120.0, path, lo=0.0, lo_open=True, hi=360.0),
        "center_deg": _get_number(data, "center_deg", 0.0, path),
        "peak_gain_dbi": _get_number(data, "peak_gain_dbi", 15.0, path),
        "beamwidth_3db_deg": _get_number(
            data, "beamwidth_3db_deg", 20.0, path, lo=0.0, lo_open=True, hi=180.0
        ),
        "sidelobe_floor_dbi": _get_number(data, "sidelobe_floor_dbi", -10.0, path),
    }
    if out["sidelobe_floor_dbi"] >= out["peak_gain_dbi"]:
        raise ConfigError(f"{path}sidelobe_floor_dbi", "must be below peak_gain_dbi")
    return out


def _parse_event(data: dict, path: str) -> dict:
    _check_keys(data, {"start_s", "ramp_s", "hold_s", "depth_db", "target"}, path)
    return {
        "start_s": _get_number(data, "start_s", 0.0, path, lo=0.0),
        "ramp_s": _get_number(data, "ramp_s", 0.035, path, lo=0.0, lo_open=True),
        "hold_s": _get_number(data, "hold_s", 0.100, path, lo=0.0),
        "depth_db": _get_number(data, "depth_db", 14.0, path, lo=0.0, lo_open=True),
        "target": _get_str(data, "target", "los", path, choices={"los", "reflections", "all"}),
    }


def _parse_blocker(data: dict, path: str) -> dict:
    _check_keys(
        data,
        {"start_x_m", "start_y_m", "radius_m", "speed_mps", "heading_deg", "depth_db", "edge_m"},
        path,
    )
    return {
        "start_x_m": _get_number(data, "start_x_m", 0.0, path),
        "start_y_m": _get_number(data, "start_y_m", 0.0, path),
        "radius_m": _get_number(data, "radius_m", 0.3, path, lo=0.0, lo_open=True),
        "speed_mps": _get_number(data, "speed_mps", 1.0, path, lo=0.0),
        "heading_deg": _get_number(data, "heading_deg", 0.0, path),
        "depth_db": _get_number(data, "depth_db", 17.0, path, lo=0.0, lo_open=True),
        "edge_m": _get_number(data, "edge_m", 0.05, path, lo=0.0, lo_open=True),
    }


def _normalize(document) -> dict:
    if document is None:
        return {}
    if isinstance(document, dict):
        return document
    if isinstance(document, (str, bytes)):
        loaded = yaml.safe_load(document)
        if loaded is None:
            return {}
        if not isinstance(loaded, dict):
            raise ConfigError("<root>", "scenario document must be a mapping")
        return loaded
    raise ConfigError("<root>", f"unsupported document type {type(document).__name__}")


def parse_and_validate(document) -> "ScenarioConfig":
    """Parse a scenario (YAML text, dict, or None) into a validated config.

    Every omitted field is filled with its default; unknown keys and
    out-of-range values raise ``ConfigError`` naming the field.
    """
    raw = _normalize(document)
    _check_keys(
        raw,
        {"duration_s", "seed", "geometry", "codebook", "link_budget", "mobility",
         "blockage", "protocol", "schedule", "sync", "engine"},
        "",
    )
    out: dict = {
        "duration_s": _get_number(raw, "duration_s", 10.0, "", lo=0.0, lo_open=True),
        "seed": _get_int(raw, "seed", 0, "", lo=0),
    }

    geo = _group(raw, "geometry", "")
    _check_keys(
        geo,
        {"bs", "ms", "surfaces", "materials", "nlos_presence_probability"},
        "geometry.",
    )
    materials = dict(MATERIALS)
    custom = _group(geo, "materials", "geometry.")
    for name, spec in custom.items():
        mpath = f"geometry.materials.{name}."
        if not isinstance(spec, dict):
            raise ConfigError(f"geometry.materials.{name}", "expected a mapping")
        _check_keys(spec, {"reflection_loss_db", "penetration_loss_db"}, mpath)
        refl = _get_number(spec, "reflection_loss_db", 10.0, mpath, lo=0.0)
        pen = spec.get("penetration_loss_db", "opaque")
        if pen == "opaque":
            pen_db = math.inf
        elif isinstance(pen, (int, float)) and not isinstance(pen, bool):
            pen_db = float(pen)
            if pen_db < 0.0:
                raise ConfigError(f"{mpath}penetration_loss_db", "must be >= 0 or 'opaque'")
        else:
            raise ConfigError(f"{mpath}penetration_loss_db", f"expected number or 'opaque', got {pen!r}")
        materials[name] = Material(name, reflection_loss_db=refl, penetration_loss_db=pen_db)

    surfaces_raw = geo.get("surfaces", [])
    if surfaces_raw is None:
        surfaces_raw = []
    if not isinstance(surfaces_raw, list):
        raise ConfigError("geometry.surfaces", "expected a list")
    surfaces_out = []
    for i, sdata in enumerate(surfaces_raw):
        spath = f"geometry.surfaces[{i}]."
        if not isinstance(sdata, dict):
            raise ConfigError(f"geometry.surfaces[{i}]", "expected a mapping")
        _check_keys(sdata, {"x1_m", "y1_m", "x2_m", "y2_m", "material"}, spath)
        entry = {
            "x1_m": _get_number(sdata, "x1_m", 0.0, spath),
            "y1_m": _get_number(sdata, "y1_m", 0.0, spath),
            "x2_m": _get_number(sdata, "x2_m", 1.0, spath),
            "y2_m": _get_number(sdata, "y2_m", 0.0, spath),
            "material": _get_str(sdata, "material", "drywall", spath),
        }
        if entry["material"] not in materials:
            raise ConfigError(f"{spath}material", f"undefined material {entry['material']!r}")
        if (entry["x1_m"], entry["y1_m"]) == (entry["x2_m"], entry["y2_m"]):
            raise ConfigError(f"geometry.surfaces[{i}]", "surface endpoints must be distinct")
        surfaces_out.append(entry)

    out["geometry"] = {
        "bs": _parse_pose(_group(geo, "bs", "geometry."), "geometry.bs.", (0.0, 0.0, 0.0)),
        "ms": _parse_pose(_group(geo, "ms", "geometry."), "geometry.ms.", (5.0, 0.0, 180.0)),
        "surfaces": surfaces_out,
        "materials": {
            name: {
                "reflection_loss_db": m.reflection_loss_db,
                "penetration_loss_db": "opaque" if m.opaque else m.penetration_loss_db,
            }
            for name, m in materials.items()
            if name in custom
        },
        "nlos_presence_probability": _get_number(
            geo, "nlos_presence_probability", 1.0, "geometry.", lo=0.0, hi=1.0
        ),
    }

    cb = _group(raw, "codebook", "")
    _check_keys(cb, {"bs", "ms"}, "codebook.")
    out["codebook"] = {
        "bs": _parse_codebook(_group(cb, "bs", "codebook."), "codebook.bs."),
        "ms": _parse_codebook(_group(cb, "ms", "codebook."), "codebook.ms."),
    }

    lb = _group(raw, "link_budget", "")
    _check_keys(
        lb,
        {"tx_power_dbm", "carrier_ghz", "bandwidth_ghz", "noise_figure_db",
         "decode_threshold_db", "shadowing_sigma_db"},
        "link_budget.",
    )
    out["link_budget"] = {
        "tx_power_dbm": _get_number(lb, "tx_power_dbm", 10.0, "link_budget."),
        "carrier_ghz": _get_number(lb, "carrier_ghz", 60.0, "link_budget.", lo=0.0, lo_open=True),
        "bandwidth_ghz": _get_number(lb, "bandwidth_ghz", 2.0, "link_budget.", lo=0.0, lo_open=True),
        "noise_figure_db": _get_number(lb, "noise_figure_db", 8.0, "link_budget.", lo=0.0),
        "decode_threshold_db": _get_number(lb, "decode_threshold_db", 0.0, "link_budget."),
        "shadowing_sigma_db": _get_number(lb, "shadowing_sigma_db", 0.0, "link_budget.", lo=0.0),
    }

    mob = _group(raw, "mobility", "")
    _check_keys(
        mob,
        {"kind", "speed_mps", "heading_deg", "waypoints", "angular_speed_rad_s", "pivot"},
        "mobility.",
    )
    waypoints = mob.get("waypoints", [])
    if waypoints is None:
        waypoints = []
    if not isinstance(waypoints, list):
        raise ConfigError("mobility.waypoints", "expected a list of [x, y] pairs")
    waypoints_out = [
        _get_pair({"wp": wp}, "wp", None, f"mobility.waypoints[{i}].") for i, wp in enumerate(waypoints)
    ]
    pivot = mob.get("pivot")
    out["mobility"] = {
        "kind": _get_str(mob, "kind", "static", "mobility.",
                         choices={"static", "translational", "rotational"}),
        "speed_mps": _get_number(mob, "speed_mps", 0.0, "mobility.", lo=0.0),
        "heading_deg": _get_number(mob, "heading_deg", 0.0, "mobility."),
        "waypoints": waypoints_out,
        "angular_speed_rad_s": _get_number(mob, "angular_speed_rad_s", 0.0, "mobility."),
        "pivot": None if pivot is None else _get_pair(mob, "pivot", None, "mobility."),
    }

    blk = _group(raw, "blockage", "")
    _check_keys(
        blk,
        {"driver", "events", "rate_per_s", "depth_range_db", "hold_range_s", "ramp_s",
         "target", "blockers"},
        "blockage.",
    )
    events_raw = blk.get("events", [])
    if events_raw is None:
        events_raw = []
    if not isinstance(events_raw, list):
        raise ConfigError("blockage.events", "expected a list")
    blockers_raw = blk.get("blockers", [])
    if blockers_raw is None:
        blockers_raw = []
    if not isinstance(blockers_raw, list):
        raise ConfigError("blockage.blockers", "expected a list")
    depth_range = _get_pair(blk, "depth_range_db", [14.0, 20.0], "blockage.")
    hold_range = _get_pair(blk, "hold_range_s", [0.050, 0.200], "blockage.")
    if depth_range[0] <= 0.0 or depth_range[1] < depth_range[0]:
        raise ConfigError("blockage.depth_range_db", "expected 0 < low <= high")
    if hold_range[0] < 0.0 or hold_range[1] < hold_range[0]:
        raise ConfigError("blockage.hold_range_s", "expected 0 <= low <= high")
    out["blockage"] = {
        "driver": _get_str(blk, "driver", "scheduled", "blockage.",
                           choices={"none", "scheduled", "stochastic", "geometric"}),
        "events": [
            _parse_event(e, f"blockage.events[{i}].") if isinstance(e, dict)
            else _raise_event(i) for i, e in enumerate(events_raw)
        ],
        "rate_per_s": _get_number(blk, "rate_per_s", 0.0, "blockage.", lo=0.0),
        "depth_range_db": depth_range,
        "hold_range_s": hold_range,
        "ramp_s": _get_number(blk, "ramp_s", 0.035, "blockage.", lo=0.0, lo_open=True),
        "target": _get_str(blk, "target", "los", "blockage.",
                           choices={"los", "reflections", "all"}),
        "blockers": [
            _parse_blocker(b, f"blockage.blockers[{i}].") if isinstance(b, dict)
            else _raise_blocker(i) for i, b in enumerate(blockers_raw)
        ],
    }

    pro = _group(raw, "protocol", "")
    _check_keys(
        pro,
        {"enabled", "ba_enabled", "adapt_drop_db", "blockage_drop_db", "nlos_eligibility_db",
         "rescan_interval_s", "nlos_min_separation_deg", "bs_fallback_ul_misses"},
        "protocol.",
    )
    adapt = _get_number(pro, "adapt_drop_db", 3.0, "protocol.", lo=0.0, lo_open=True)
    blockage_drop = _get_number(pro, "blockage_drop_db", 10.0, "protocol.", lo=0.0, lo_open=True)
    if blockage_drop < adapt:
        raise ConfigError("protocol.blockage_drop_db", "must be >= adapt_drop_db")
    out["protocol"] = {
        "enabled": _get_bool(pro, "enabled", True, "protocol."),
        "ba_enabled": _get_bool(pro, "ba_enabled", True, "protocol."),
        "adapt_drop_db": adapt,
        "blockage_drop_db": blockage_drop,
        "nlos_eligibility_db": _get_number(
            pro, "nlos_eligibility_db", 10.0, "protocol.", lo=0.0, lo_open=True
        ),
        "rescan_interval_s": _get_number(
            pro, "rescan_interval_s", 0.100, "protocol.", lo=0.0, lo_open=True
        ),
        "nlos_min_separation_deg": _get_number(
            pro, "nlos_min_separation_deg", 20.0, "protocol.", lo=0.0
        ),
        "bs_fallback_ul_misses": _get_int(pro, "bs_fallback_ul_misses", 4, "protocol.", lo=1),
    }

    sch = _group(raw, "schedule", "")
    _check_keys(
        sch,
        {"slot_duration_s", "slots_per_frame", "ref_slots_per_half", "ref_slot_offset"},
        "schedule.",
    )
    out["schedule"] = {
        "slot_duration_s": _get_number(
            sch, "slot_duration_s", 100e-6, "schedule.", lo=0.0, lo_open=True
        ),
        "slots_per_frame": _get_int(sch, "slots_per_frame", 100, "schedule.", lo=2),
        "ref_slots_per_half": _get_int(sch, "ref_slots_per_half", 4, "schedule.", lo=1),
        "ref_slot_offset": _get_int(sch, "ref_slot_offset", 0, "schedule.", lo=0),
    }

    syn = _group(raw, "sync", "")
    _check_keys(syn, {"loss_threshold_misses", "reacquisition_delay_s"}, "sync.")
    out["sync"] = {
        "loss_threshold_misses": _get_int(syn, "loss_threshold_misses", 8, "sync.", lo=1),
        "reacquisition_delay_s": _get_number(
            syn, "reacquisition_delay_s", 1.0, "sync.", lo=0.0
        ),
    }

    eng = _group(raw, "engine", "")
    _check_keys(eng, {"path_position_epsilon_m", "record_trace"}, "engine.")
    out["engine"] = {
        "path_position_epsilon_m": _get_number(
            eng, "path_position_epsilon_m", 0.05, "engine.", lo=0.0
        ),
        "record_trace": _get_bool(eng, "record_trace", True, "engine."),
    }

    config = ScenarioConfig(out, materials)
    config.build_all()  # surface any cross-field violation now, not mid-run
    return config


def _raise_event(i):
    raise ConfigError(f"blockage.events[{i}]", "expected a mapping")


def _raise_blocker(i):
    raise ConfigError(f"blockage.blockers[{i}]", "expected a mapping")


class ScenarioConfig:
    """A fully-defaulted, validated scenario.

    Wraps the plain defaulted dict (``data``) that ``render`` serializes,
    plus constructors for the domain objects the engine consumes. Equality
    compares the defaulted dicts, so parse(render(cfg)) == cfg.
    """

    def __init__(self, data: dict, materials: dict[str, Material]):
        self.data = data
        self.materials = materials

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.data == other.data

    def __repr__(self):
        return f"ScenarioConfig(duration_s={self.duration_s}, seed={self.seed})"

    @property
    def duration_s(self) -> float:
        return self.data["duration_s"]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def bs_pose(self) -> Pose:
        g = self.data["geometry"]["bs"]
        return Pose(g["x_m"], g["y_m"], g["facing_deg"])

    @property
    def ms_pose(self) -> Pose:
        g = self.data["geometry"]["ms"]
        return Pose(g["x_m"], g["y_m"], g["facing_deg"])

    @property
    def nlos_presence_probability(self) -> float:
        return self.data["geometry"]["nlos_presence_probability"]

    def surfaces(self) -> list[Surface]:
        return [
            Surface(
                (s["x1_m"], s["y1_m"]),
                (s["x2_m"], s["y2_m"]),
                self.materials[s["material"]],
            )
            for s in self.data["geometry"]["surfaces"]
        ]

    def _codebook(self, side: str) -> Codebook:
        c = self.data["codebook"][side]
        return Codebook(
            n_beams=c["n_beams"],
            sector_deg=c["sector_deg"],
            center_deg=c["center_deg"],
            pattern=BeamPattern(
                peak_gain_dbi=c["peak_gain_dbi"],
                beamwidth_3db_deg=c["beamwidth_3db_deg"],
                sidelobe_floor_dbi=c["sidelobe_floor_dbi"],
            ),
        )

    def bs_codebook(self) -> Codebook:
        return self._codebook("bs")

    def ms_codebook(self) -> Codebook:
        return self._codebook("ms")

    def link_budget(self) -> LinkBudgetParams:
        lb = self.data["link_budget"]
        return LinkBudgetParams(**lb)

    def mobility(self) -> MobilityModel:
        m = self.data["mobility"]
        return MobilityModel(
            kind=m["kind"],
            speed_mps=m["speed_mps"],
            heading_deg=m["heading_deg"],
            waypoints=tuple((p[0], p[1]) for p in m["waypoints"]),
            angular_speed_rad_s=m["angular_speed_rad_s"],
            pivot=None if m["pivot"] is None else (m["pivot"][0], m["pivot"][1]),
        )

    def scheduled_events(self) -> list[BlockageEvent]:
        return [BlockageEvent(**e) for e in self.data["blockage"]["events"]]

    def blockers(self) -> list[DiscBlocker]:
        return [
            DiscBlocker(
                start_pos=(b["start_x_m"], b["start_y_m"]),
                radius_m=b["radius_m"],
                speed_mps=b["speed_mps"],
                heading_deg=b["heading_deg"],
                depth_db=b["depth_db"],
                edge_m=b["edge_m"],
            )
            for b in self.data["blockage"]["blockers"]
        ]

    def thresholds(self) -> Thresholds:
        p = self.data["protocol"]
        return Thresholds(
            adapt_drop_db=p["adapt_drop_db"],
            blockage_drop_db=p["blockage_drop_db"],
            nlos_eligibility_db=p["nlos_eligibility_db"],
            rescan_interval_s=p["rescan_interval_s"],
            nlos_min_separation_deg=p["nlos_min_separation_deg"],
        )

    def schedule(self) -> SlotSchedule:
        return SlotSchedule(**self.data["schedule"])

    def sync_params(self) -> SyncParams:
        return SyncParams(**self.data["sync"])

    def build_all(self):
        """Construct every domain object once, mapping errors to fields."""
        try:
            self.surfaces()
            self.bs_codebook()
            self.ms_codebook()
            self.link_budget()
            self.mobility()
            self.scheduled_events()
            self.blockers()
            self.thresholds()
            self.schedule()
            self.sync_params()
            self.bs_pose
            self.ms_pose
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("<scenario>", str(exc)) from exc

    def with_overrides(self, **dotted) -> "ScenarioConfig":
        """New config with dotted-path overrides, e.g. ``( **{'protocol.enabled': False})``."""
        import copy

        data = copy.deepcopy(self.data)
        for dotted_key, value in dotted.items():
            node = data
            parts = dotted_key.split(".")
            for part in parts[:-1]:
                node = node[part]
            node[parts[-1]] = value
        return parse_and_validate(data)


def render(config: ScenarioConfig) -> str:
    """Serialize a config back to YAML; ``parse_and_validate`` inverts it."""
    return yaml.safe_dump(config.data, sort_keys=True, default_flow_style=False)


def load_preset(name: str) -> ScenarioConfig:
    """Load a shipped scenario preset by name (extension optional)."""
    base = name.rsplit("/", 1)[-1]
    for suffix in (".yaml", ".yml", ".cfg"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
            break
    if base not in PRESET_NAMES:
        raise ConfigError("<preset>", f"unknown preset {name!r} (have {list(PRESET_NAMES)})")
    text = resources.files("unblock_sim.presets").joinpath(f"{base}.yaml").read_text()
    return parse_and_validate(text)


def load_scenario(source: str) -> ScenarioConfig:
    """Load a scenario from a file path, falling back to preset names."""
    import os

    if os.path.exists(source):
        with open(source) as f:
            return parse_and_validate(f.read())
    return load_preset(source)

"""Scenario configuration, validation, and seeded randomness.

Every physical and spatio-temporal parameter of the simulation lives in one
frozen ScenarioConfig, so a single object pins down an experiment end to end.
Configs serialize to a flat ``key = value`` text file that round-trips
bit-identically (floats are written with repr).
"""

import hashlib
import math
import re
from dataclasses import dataclass, replace, fields
from enum import Enum

import numpy as np

# Mission corridor axis: swarms progress toward +y, lateral extent is x.
MISSION_AXIS = "+y"


class CollisionRule(Enum):
    RULE1 = "Rule1"  # collisions permitted everywhere
    RULE2 = "Rule2"  # final-slot positions must be >= d_min apart
    RULE3 = "Rule3"  # >= d_min separation at every instant of inter-slot motion


@dataclass(frozen=True)
class JammerPattern:
    """Jammer antenna selector: isotropic, or a cosine-power lobe.

    CosinePower is aimed at the swarm centroid when evaluated; q is the
    cosine exponent, max_gain_db the boresight gain.
    """

    kind: str = "Isotropic"  # "Isotropic" | "CosinePower"
    q: float = 1.0
    max_gain_db: float = 0.0

    def as_text(self) -> str:
        if self.kind == "Isotropic":
            return "Isotropic"
        return "CosinePower(%r, %r)" % (self.q, self.max_gain_db)

    @staticmethod
    def from_text(text: str) -> "JammerPattern":
        text = text.strip()
        if text == "Isotropic":
            return JammerPattern()
        m = re.fullmatch(r"CosinePower\(\s*([^,]+)\s*,\s*([^)]+)\s*\)", text)
        if m is None:
            raise ValueError("unrecognized jammer_pattern: %r" % text)
        return JammerPattern("CosinePower", float(m.group(1)), float(m.group(2)))


@dataclass(frozen=True)
class ScenarioConfig:
    wavelength_m: float = 0.125            # lambda0
    bandwidth_hz: float = 20e6             # B
    uav_tx_power_dbm: float = 20.0         # P_Tx
    jammer_power_dbm: float = 100.0
    noise_power_dbm: float = -100.0        # P_noise
    min_separation_m: float = 20.0         # d_min
    num_uavs: int = 4                      # N
    ref_distance_m: float = 1.0            # d0
    ref_path_loss_db: float = 30.0         # L_d0
    path_loss_exponent: float = 2.7        # n
    shadowing_sigma_db: float = 0.0        # std dev of chi; 0 = deterministic
    cell_size_m: float = 60.0
    epoch_length_m: float = 120.0
    v_max_mps: float = 20.0
    timeslot_duration_s: float = 2.23      # T_ts
    slots_per_epoch: int = 6               # slot points t0..t5; T = 5 scored
    grid_resolution: int = 4
    alpha: float = 1.0
    beta: float = 1.0
    collision_rule: CollisionRule = CollisionRule.RULE1
    null_depth_floor_db: float = -60.0
    jammer_pattern: JammerPattern = JammerPattern()
    rng_seed: int = 0

    @property
    def scored_slots(self) -> int:
        """T: decision slots per epoch (slot 0 is the initial condition)."""
        return self.slots_per_epoch - 1

    @property
    def max_step_m(self) -> float:
        """Greatest displacement one timeslot permits (v_max * T_ts)."""
        return self.v_max_mps * self.timeslot_duration_s

    @property
    def epoch_advance_m(self) -> float:
        """Longitudinal distance the corridor moves per epoch."""
        return self.epoch_length_m - self.cell_size_m


def make_default_config() -> ScenarioConfig:
    """Default parameter set for the 4-UAV anti-jamming experiments."""
    return ScenarioConfig()


def validate_config(cfg: ScenarioConfig) -> list:
    """Return a list of violated-invariant messages; empty means ok.

    jammer_power_dbm = -inf is accepted as the disabled-jammer sentinel.
    """
    errors = []

    def need(ok: bool, field: str, why: str):
        if not ok:
            errors.append("%s: %s" % (field, why))

    need(math.isfinite(cfg.uav_tx_power_dbm), "uav_tx_power_dbm", "must be finite")
    need(
        math.isfinite(cfg.jammer_power_dbm) or cfg.jammer_power_dbm == -math.inf,
        "jammer_power_dbm",
        "must be finite or -inf (disabled)",
    )
    need(math.isfinite(cfg.noise_power_dbm), "noise_power_dbm", "must be finite")
    need(cfg.bandwidth_hz > 0, "bandwidth_hz", "must be > 0")
    need(cfg.num_uavs >= 2, "num_uavs", "must be >= 2")
    need(cfg.path_loss_exponent > 0, "path_loss_exponent", "must be > 0")
    need(cfg.ref_distance_m > 0, "ref_distance_m", "must be > 0")
    need(cfg.cell_size_m > 0, "cell_size_m", "must be > 0")
    need(
        cfg.epoch_length_m >= cfg.cell_size_m,
        "epoch_length_m",
        "must be >= cell_size_m",
    )
    need(cfg.slots_per_epoch >= 1, "slots_per_epoch", "must be >= 1")
    need(
        cfg.v_max_mps * cfg.timeslot_duration_s > 0,
        "v_max_mps",
        "v_max_mps * timeslot_duration_s must be > 0",
    )
    need(cfg.min_separation_m >= 0, "min_separation_m", "must be >= 0")
    need(cfg.shadowing_sigma_db >= 0, "shadowing_sigma_db", "must be >= 0")
    need(cfg.null_depth_floor_db < 0, "null_depth_floor_db", "must be < 0")
    need(cfg.grid_resolution >= 1, "grid_resolution", "must be >= 1")
    need(cfg.wavelength_m > 0, "wavelength_m", "must be > 0")
    if cfg.jammer_pattern.kind not in ("Isotropic", "CosinePower"):
        errors.append("jammer_pattern: unknown kind %r" % cfg.jammer_pattern.kind)
    elif cfg.jammer_pattern.kind == "CosinePower":
        need(cfg.jammer_pattern.q >= 1, "jammer_pattern", "q must be >= 1")
    return errors


def wrap_angle_deg(a: float) -> float:
    """Wrap a finite angle into [0, 360)."""
    if not math.isfinite(a):
        raise ValueError("angle must be finite, got %r" % a)
    r = a % 360.0
    # Python's % can return 360.0 for tiny negative inputs; keep the range
    # half-open.
    if r == 360.0:
        r = 0.0
    return r


# --- config file format: one "key = value" line per field -------------------

def config_to_text(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, CollisionRule):
            text = value.value
        elif isinstance(value, JammerPattern):
            text = value.as_text()
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append("%s = %s" % (f.name, text))
    return "\n".join(lines) + "\n"


_INT_FIELDS = {"num_uavs", "slots_per_epoch", "grid_resolution", "rng_seed"}


def config_from_text(text: str) -> ScenarioConfig:
    """Parse the key = value format; unknown keys are rejected."""
    known = {f.name for f in fields(ScenarioConfig)}
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError("line %d: expected 'key = value', got %r" % (lineno, raw))
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ValueError("line %d: unknown field %r" % (lineno, key))
        if key == "collision_rule":
            overrides[key] = CollisionRule(value)
        elif key == "jammer_pattern":
            overrides[key] = JammerPattern.from_text(value)
        elif key in _INT_FIELDS:
            overrides[key] = int(value)
        else:
            overrides[key] = float(value)
    return replace(ScenarioConfig(), **overrides)


def save_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_text(cfg))


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_text(fh.read())


def config_hash(cfg: ScenarioConfig) -> str:
    """Short stable hash of the serialized config (run naming, file headers)."""
    digest = hashlib.sha256(config_to_text(cfg).encode("utf-8")).hexdigest()
    return digest[:12]


# --- seeded randomness ------------------------------------------------------

def substream(seed: int, name: str) -> np.random.Generator:
    """Named RNG substream, independent per (seed, name) pair.

    All randomness in the package flows through here so any single component
    (ga, shadowing, baseline, dataset, env) is reproducible in isolation.
    """
    tag = int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))

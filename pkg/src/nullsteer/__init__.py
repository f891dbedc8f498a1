"""Anti-jamming UAV swarm planning with null-steering antennas.

Link physics (log-distance pathloss, null-steer gain, SINR, Shannon
capacity), corridor missions optimized by a genetic algorithm under three
collision rules, KNN and random baselines, a dataset harness, and an RL
environment with a line-delimited JSON wire protocol.
"""

from .baselines import (
    KnnModel,
    knn_fit,
    knn_predict,
    load_knn_model,
    make_features,
    null_at_jammer,
    random_plan,
    save_knn_model,
)
from .config import (
    CollisionRule,
    JammerPattern,
    ScenarioConfig,
    config_hash,
    load_config,
    make_default_config,
    save_config,
    substream,
    validate_config,
    wrap_angle_deg,
)
from .dataset import (
    MetricTable,
    SampleRecord,
    SampleSpec,
    evaluate_predictor,
    generate_dataset,
    read_dataset,
    write_dataset,
    write_metrics_csv,
    write_metrics_jsonl,
)
from .env import Env, EnvConfig, Observation, StepResult
from .ga import (
    GaContext,
    GaParams,
    GaResult,
    MODE_JOINT_STATIC,
    MODE_ORIENTATION_ONLY,
    MODE_POSITION_PROGRESSING,
    decode_progressing,
    decode_static,
    run_adaptive,
    run_ga,
    run_mission,
)
from .motion import (
    CollisionFinding,
    SlotCell,
    check_plan,
    check_plan_ok_batch,
    clamp_step,
    mission_band_for_target,
    rotate_about,
    segment_pair_min_distance,
    segment_pair_min_distance_batch,
    slot_cell,
    speed_feasible,
)
from .objective import (
    EDGE_MODE_DIRECTED,
    EDGE_MODE_MEAN,
    EDGE_MODE_MIN,
    LinkReport,
    bearing_deg,
    directed_capacity_bps,
    epoch_fitness_batch,
    epoch_objective,
    link_report,
    link_stats_batch,
    null_at_jammer_angles,
)
from .planfile import plan_jammer, read_plan, write_plan
from .radio import (
    GainPattern,
    antenna_gain_db,
    cosine_power_pattern,
    dbm_to_mw,
    isotropic_pattern,
    link_budget,
    mw_to_dbm,
    null_steer_pattern,
    path_loss_db,
    received_power_dbm,
    shannon_capacity_bps,
    signed_offset_deg,
    sinr_linear,
)
from .server import ProtocolSession, serve_stdio, serve_tcp
from .state import SwarmState, TrajectoryPlan, Vec2, as_position_array

__all__ = [
    "CollisionFinding",
    "CollisionRule",
    "EDGE_MODE_DIRECTED",
    "EDGE_MODE_MEAN",
    "EDGE_MODE_MIN",
    "Env",
    "EnvConfig",
    "GaContext",
    "GaParams",
    "GaResult",
    "GainPattern",
    "JammerPattern",
    "KnnModel",
    "LinkReport",
    "MODE_JOINT_STATIC",
    "MODE_ORIENTATION_ONLY",
    "MODE_POSITION_PROGRESSING",
    "MetricTable",
    "Observation",
    "ProtocolSession",
    "SampleRecord",
    "SampleSpec",
    "ScenarioConfig",
    "StepResult",
    "SwarmState",
    "TrajectoryPlan",
    "SlotCell",
    "Vec2",
    "antenna_gain_db",
    "as_position_array",
    "bearing_deg",
    "check_plan",
    "check_plan_ok_batch",
    "clamp_step",
    "config_hash",
    "cosine_power_pattern",
    "dbm_to_mw",
    "decode_progressing",
    "decode_static",
    "directed_capacity_bps",
    "epoch_fitness_batch",
    "epoch_objective",
    "evaluate_predictor",
    "generate_dataset",
    "isotropic_pattern",
    "knn_fit",
    "knn_predict",
    "link_budget",
    "link_report",
    "link_stats_batch",
    "load_config",
    "load_knn_model",
    "make_default_config",
    "make_features",
    "mission_band_for_target",
    "mw_to_dbm",
    "null_at_jammer",
    "null_at_jammer_angles",
    "null_steer_pattern",
    "path_loss_db",
    "plan_jammer",
    "random_plan",
    "read_dataset",
    "read_plan",
    "received_power_dbm",
    "rotate_about",
    "run_adaptive",
    "run_ga",
    "run_mission",
    "save_config",
    "save_knn_model",
    "segment_pair_min_distance",
    "segment_pair_min_distance_batch",
    "serve_stdio",
    "serve_tcp",
    "shannon_capacity_bps",
    "signed_offset_deg",
    "sinr_linear",
    "slot_cell",
    "speed_feasible",
    "substream",
    "validate_config",
    "wrap_angle_deg",
    "write_dataset",
    "write_metrics_csv",
    "write_metrics_jsonl",
    "write_plan",
]

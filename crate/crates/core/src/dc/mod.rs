//! Divide-and-Choose: problem instances and the single-letter rate-gain
//! region for Bob-to-Alice spying.

mod file;
mod region;
mod scenario;

pub use file::{parse_scenario, scenario_from_json, ScenarioFile};
pub use region::{
    evaluate_point, gain_region, selfish_curve, AuxiliaryStrategy, Channel, RateGainPoint,
    SearchConfig, SelfishRow,
};
pub use scenario::{
    build_scenario, dc_gains, piece_value, Cake, Division, Scenario, TieBreak, Valuation, AXIS_A,
    AXIS_B,
};

//! Named, seeded validation scenarios built from a catalogue of closed-form
//! charts, maps and submanifolds.

mod catalogue;
mod registry;
mod run;
mod definition;

pub use catalogue::{
    catalogue, Catalogue, Exclusion, FibreFamily, FibreFn, NamedMap, SampleDomain,
};
pub use registry::{builtin_registry, load_registry_file, Registry};
pub use run::{
    eval_point, run_flow_spec, run_scenario, sample_points, CheckReport, EffectiveConfig,
    FlowOutcome, ResidualReport, RunOptions, REJECTIONS_PER_POINT,
};
pub use definition::{
    CheckSpec, Expectation, FlowSpec, InitialData, LckQuantity, Operation, Sampler, ScenarioSpec,
    Tolerances, TripleComponent, TOLERANCES,
};

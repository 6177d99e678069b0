//! Executable colored components, their composition through socket places,
//! and the firing rule: binding enumeration, firing, seeded and interactive
//! simulation, and isolated functional tests.

mod component;
mod engine;
mod system;

pub use component::{ColoredComponent, ColoredTransition, Port, PortTag, StatePlace, SvPlace};
pub use engine::{
    enabled_bindings, fire_binding, functional_test, interaction_order, simulate, simulate_interactive,
    simulate_until, successors, Binding, EngineError, ExecutionTrace, FunctionalReport, SimulationMode, TraceEnd,
    TraceStep,
};
pub use system::{
    ColoredSystem, CompTransition, Connection, Layer, PlaceDecl, Relay, RelayKind, SysTransition, SystemMarking,
    Wire,
};

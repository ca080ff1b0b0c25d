//! Reduced-profile integration, the method of lines, and grid utilities.

pub mod grid;
pub mod ivp;
pub mod mol;
pub mod ode;
pub mod pipeline;

pub use grid::{compare_grids, FieldGrid, Metrics, ProfileGrid, Region, SolutionGrid};
pub use ivp::{integrate_ivp, integrate_ivp_fixed, ODEProblem};
pub use mol::{mol_solve, mol_solve_with, BoundarySpec, LeftBoundary, PdeGrid, RightBoundary};
pub use pipeline::{bvp_pipeline, reconstruct, PipelineConfig, PipelineReport, PipelineRun};

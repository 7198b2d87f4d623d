//! Real level sets `{F(., l) = 0}` in a ball: extraction, nesting depths,
//! Arnold orientation and regularity checks, for `n = 2, 3`.

mod extract;
mod grid;
mod mesh;
mod regularity;

pub use extract::extract_level_set;
pub use grid::{domain_indicator, indicator_volume, GridSpec};
pub use mesh::{
    arnold_cycle, compute_nesting, divergence_volume, orient_arnold, point_inside, to_obj, winding_number, Component,
    Facet, LevelSetMesh, Orientation,
};
pub use regularity::{check_regularity, RegularityReport, Verdict};

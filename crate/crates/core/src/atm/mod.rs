//! Alternating Turing machines: a text format, a reference simulator, and
//! compilers from machines to formulas that capture them.

mod builders;
mod capture;
mod compile;
mod layout;
mod machine;

pub use capture::{capture_experiment, CaptureConfig, CaptureError, CaptureRow};
pub use compile::{available_cells, compile_apspace, compile_kexpspace, diagram, Compiled};
pub use layout::{CellScheme, CompilationLayout, CompileError, Labels};
pub use machine::{
    simulate, Atm, AtmError, Dir, SmallAccept, SmallModels, SpaceBound, StateKind, Transition, BLANK, EVEN_ONES,
};

use crate::syntax::Formula;

/// The closing check of the order builder.
pub fn gen_chi_succ(layout: &CompilationLayout) -> Formula {
    builders::Fo::new(layout).chi_succ()
}

/// One guarded round of the order builder.
pub fn gen_alpha_build(layout: &CompilationLayout) -> Formula {
    builders::Fo::new(layout).alpha_succ()
}

/// The closing check of the encoding builder.
pub fn gen_chi_enc(atm: &Atm, layout: &CompilationLayout) -> Formula {
    builders::Fo::new(layout).chi_enc(atm)
}

/// `phi_{q,A}`: the head reads `A` in state `q`, and one (existential) or
/// every (universal) transition is carried out.
pub fn gen_transition_block(atm: &Atm, layout: &CompilationLayout, q: usize, symbol: usize) -> Formula {
    builders::Fo::new(layout).transition_block(atm, q, symbol)
}

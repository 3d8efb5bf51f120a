//! Model expressions: parsing, real evaluation and Taylor-jet evaluation.

mod expr;
mod jet;
mod model;
mod parser;
mod taylor;

pub use expr::{BinOp, DomainError, Expr, Func, Point, Pos, Var};
pub use jet::{Jet, PARAM_ORDER, STATE_ORDER};
pub use model::{
    builtin, builtin_models, sis_exp, sis_inverse, Bracket, Equilibrium, ModelError, ModelSpec,
    SIS_EXP_TOML, SIS_INVERSE_TOML,
};
pub use taylor::{taylor_coeffs, TaylorError, TaylorTable, CONSISTENCY_TOL};
pub use parser::{parse, parse_with_constants, ParseError, MAX_DEPTH};

pub mod jets {
    //! Index helpers for the flat jet coefficient layout.
    pub use super::jet::{index, multi_index, LEN};
}

//! Operator Hamiltonians and their enhanced classical symbols.

mod expr;
mod moments;
mod symbol;

pub use expr::{Factor, OperatorExpr, Term};
pub use symbol::{
    compute_c, hbar_limit_check, weak_symbol_affine, weak_symbol_affine_with, weak_symbol_canonical,
    weak_symbol_canonical_with, ConstantC, LimitReport, PhasePoly, Provenance, SymbolFn, SymbolMethod,
    C_AGREEMENT_TOL, CLOSED_FORM_MAX_DEGREE, IMAG_TOL, QUADRATURE_CONVERGENCE_TOL,
};

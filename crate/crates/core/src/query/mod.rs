//! Conjunctive queries over a preference database: parsing, itemwise
//! classification, grounding, reduction to pattern unions and evaluation.

mod ast;
mod database;
mod engine;
mod parser;
mod reduce;

pub use ast::{compare_values, CmpOp, Comparison, OAtom, PAtom, Query, Term};
pub use database::{election_database, PreferenceDatabase, Relation, Session};
pub use engine::{
    aggregate_independent, auto_solver, compensated_sum, count_session, evaluate, group_sessions,
    most_probable_session, session_requests, solve_requests, solve_union, with_pool, Batch,
    BatchResult, Evaluation, Request, SessionAnswer, SolverChoice, SolverConfig, TopK, TopKStrategy,
    AUTO_BIPARTITE_BUDGET, AUTO_GENERAL_MAX_UNION, AUTO_TWO_LABEL_BUDGET, TOPK_TIE,
};
pub use parser::parse_query;
pub use reduce::{
    analyze_query, check_query, classify_query, decompose_query, query_to_pattern, QueryClass,
    QueryShape, DEFAULT_GROUNDING_GUARD,
};

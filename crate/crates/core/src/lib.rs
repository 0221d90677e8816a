//! Tabular long-context toolkit.
//!
//! Two halves share this crate:
//!
//! - **Analysis** ([`table`], [`info`]): row-major linearization of tables and
//!   the mutual-information quantities of the column-mixture model, computed
//!   analytically from a [`info::ColumnModel`] or estimated from sampled
//!   sequences. The central object is the lag profile, whose values at every
//!   multiple of the column count equal the same-column MI.
//! - **Synthesis** ([`sql`], [`synth`], [`filter`]): an in-memory mini-SQL
//!   engine with an independent brute-force reference evaluator, a template
//!   generator for retrieval / multi-hop / grounding tasks over table
//!   corpora, and a dual-sided pass-rate filter.
//!
//! [`cli`] wires everything into the `tabula` binary. All randomness flows
//! from explicit seeds through [`seed::derive_seed`].

pub mod cli;
pub mod external;
pub mod filter;
pub mod info;
pub mod seed;
pub mod sql;
pub mod synth;
pub mod table;

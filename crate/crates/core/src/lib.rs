//! Synthetic structural corpora for language-model pre-pretraining.
//!
//! The crate bundles four groups of functionality:
//!
//! * generators and recognizers for 1-Dyck, k-Shuffle Dyck, MP-Struct (with its
//!   Merge/Move/Agree ablations), MP-Struct Core and the Generic k-SD contrast
//!   language ([`dyck`], [`mpstruct`], [`mpcore`]);
//! * perturbations of POS-tagged natural-language corpora: Jabberwocky
//!   replacement and the Shuffle/Reverse/Hop impossible languages ([`perturb`]);
//! * learning-efficiency metrics computed from external loss logs and a
//!   dependency-identification-ambiguity profile for typed-bracket corpora
//!   ([`metrics`]);
//! * the shared corpus model: token sequences, seeded random streams and the
//!   plain/jsonl corpus formats ([`corpus`], [`stream`]).
//!
//! Every generator is a pure function of its parameters and a [`RandomStream`]
//! derived from a [`SeedSpec`], so corpora are byte-reproducible.

pub mod cli;
pub mod corpus;
pub mod dyck;
pub mod error;
pub mod metrics;
pub mod mpcore;
pub mod mpstruct;
pub mod perturb;
pub mod report;
pub mod stream;

pub use corpus::{CorpusFormat, CorpusRecord, LanguageTag, TokenSequence};
pub use error::{Error, Result};
pub use report::{ValidationReport, Violation};
pub use stream::{derive_stream, RandomStream, SeedSpec};

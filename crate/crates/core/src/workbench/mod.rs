//! Data ingestion, synthetic benchmark generators and the command line.

pub mod cli;
mod generate;
mod io;

pub use generate::{
    generate_benchmark, generate_polls, label_items, write_benchmark, write_polls, BenchmarkInstance,
    BenchmarkSpec, Family, InstanceParams, PollsSpec, POLLS_AGES, POLLS_EDUS, POLLS_LABEL_ATTRIBUTES,
    POLLS_PARTIES, POLLS_REGIONS, POLLS_SEXES,
};
pub use io::{
    load_database, parse_chain, read_condition, read_model, read_patterns, read_relation, write_database,
    write_model, write_relation, Manifest, ModelFile, MANIFEST,
};

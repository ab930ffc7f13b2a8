//! Text formats: the query grammar, statistics statements and CSV
//! relations.

mod data;
mod lex;
mod program;

pub use data::{decoded_rows, load_relations, read_csv, table_to_csv, Interner, LoadedData};
pub use program::{parse_program, parse_stats, render_stats, Program};

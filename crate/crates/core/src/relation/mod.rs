//! Tables, dictionaries and the operations the engine performs on them.

mod dictionary;
mod ops;
mod table;

pub use dictionary::Dictionary;
pub use ops::{construct, extend, join, join_counted, log2_ceil, log2_floor, natural_join, partition, project, semijoin, union};
pub use table::{Stat, Table, Tuple, Value};

//! The operator `T` in the `f` basis: columns built two ways, the entrywise
//! lattice split and finite truncations.

mod column;
mod io;
mod split;
mod tneg;
mod truncation;

pub use column::{e_closed, t_column_closed, t_column_oracle, SparseColumn};
pub use io::{diff_coordinates, export_coordinates, import_coordinates, CoordEntry};
pub use split::{modulus_split, SplitColumn};
pub use tneg::{c_entry, endpoint_columns, eps2, tneg_from_endpoint_columns, tneg_rows_closed, Family, TnegEntry, TnegRow};
pub use truncation::{truncate, Part, StructureReport, TruncatedOperator};

//! Reference instances shared by tests, benchmarks and the CLI.

use crate::matrix::Matrix;

/// The 10×10 worked example (nodes are 0-based here; the 1-based labels are
/// one higher).
pub fn worked_example() -> Matrix {
    Matrix::parse_rows(WORKED_EXAMPLE_DENSE).expect("fixture parses")
}

pub const WORKED_EXAMPLE_DENSE: &str = "\
. 7 . . . . . . . .
9 . 8 3 7 . . . . .
8 . . . . . . . . .
. . . 6 2 5 . . . .
. . 5 . . . . . . .
. . . . . . 1 6 . .
. . . . 2 . . . . .
. . . . . . . . 2 .
. . . . . 1 4 . . 1
. . . . . . . . 1 .
";

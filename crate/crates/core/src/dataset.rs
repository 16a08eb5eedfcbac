//! Bundled benchmark data.

use crate::model::Table;

/// Column labels of the bundled Portland cement table.
pub const PORTLAND_COLUMNS: [&str; 5] = ["heat", "p3ca", "p3cs", "p4caf", "p2cs"];

// Woods, Steinour and Starke (1932): heat evolved (cal/g) and four ingredient
// percentages for 13 cement mixtures.
const PORTLAND_ROWS: [[f64; 5]; 13] = [
    [78.5, 7.0, 26.0, 6.0, 60.0],
    [74.3, 1.0, 29.0, 15.0, 52.0],
    [104.3, 11.0, 56.0, 8.0, 20.0],
    [87.6, 11.0, 31.0, 8.0, 47.0],
    [95.9, 7.0, 52.0, 6.0, 33.0],
    [109.2, 11.0, 55.0, 9.0, 22.0],
    [102.7, 3.0, 71.0, 17.0, 6.0],
    [72.5, 1.0, 31.0, 22.0, 44.0],
    [93.1, 2.0, 54.0, 18.0, 22.0],
    [115.9, 21.0, 47.0, 4.0, 26.0],
    [83.8, 1.0, 40.0, 23.0, 34.0],
    [113.3, 11.0, 66.0, 9.0, 12.0],
    [109.4, 10.0, 68.0, 8.0, 12.0],
];

/// The 13 × 5 Portland cement table (`heat`, `p3ca`, `p3cs`, `p4caf`, `p2cs`).
pub fn portland() -> Table {
    let columns = (0..PORTLAND_COLUMNS.len())
        .map(|k| PORTLAND_ROWS.iter().map(|row| row[k]).collect())
        .collect();
    Table::new(
        PORTLAND_COLUMNS.iter().map(|s| (*s).to_owned()).collect(),
        columns,
    )
    .expect("bundled table is rectangular")
}

/// Looks up a bundled dataset by name.
pub fn by_name(name: &str) -> Option<Table> {
    match name {
        "portland" => Some(portland()),
        _ => None,
    }
}

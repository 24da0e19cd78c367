//! Bundled example data.

use crate::data::{DataMatrix, GroupLabels};

const WIRELESS: &str = include_str!("../data/wireless.tsv");

/// Wireless indoor localization data: 2000 observations of seven WiFi
/// signal strengths and the room (1-4) where each was recorded.
pub fn wireless() -> (DataMatrix, GroupLabels) {
    let mut values = Vec::with_capacity(2000 * 7);
    let mut rooms = Vec::with_capacity(2000);
    for line in WIRELESS.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let fields: Vec<f64> = line.split_whitespace().map(|f| f.parse().expect("bundled data is numeric")).collect();
        values.extend_from_slice(&fields[..7]);
        rooms.push(fields[7] as i64);
    }
    let n = rooms.len();
    (
        DataMatrix::new(values, n, 7).expect("bundled data is well formed"),
        GroupLabels::new(rooms).expect("bundled labels are nonempty"),
    )
}

//! CSV output for scans and witness lists.

use crate::counterexamples::SeparationRow;
use crate::julia::AjScan;
use crate::regularity::{HoroScan, LimsupScan};
use crate::scan::ScanVerdict;
use std::fmt::Write as _;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn verdict_name(v: ScanVerdict) -> &'static str {
    match v {
        ScanVerdict::Bounded => "Bounded",
        ScanVerdict::Unbounded => "Unbounded",
        ScanVerdict::Inconclusive => "Inconclusive",
    }
}

/// Header plus rows, comma separated with LF line endings.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn aj_scan_csv(scan: &AjScan) -> String {
    let last = scan.rows.len().saturating_sub(1);
    csv(
        &["d", "lambda_d", "aj", "lower", "upper", "verdict"],
        scan.rows.iter().enumerate().map(|(i, r)| {
            let verdict = if i == last { verdict_name(scan.verdict) } else { "" };
            vec![
                num(r.d),
                num(r.lambda_d),
                num(r.aj),
                num(r.lower),
                num(r.upper),
                verdict.to_string(),
            ]
        }),
    )
}

pub fn limsup_csv(scan: &LimsupScan) -> String {
    csv(
        &["t", "height", "J", "running_max"],
        scan.rows
            .iter()
            .map(|r| vec![num(r.t), num(r.height), num(r.j), num(r.running_max)]),
    )
}

pub fn horocyclic_csv(scan: &HoroScan) -> String {
    csv(
        &["D", "sup_abs_dev"],
        scan.rows.iter().map(|r| vec![num(r.d), num(r.sup_abs_dev)]),
    )
}

pub fn witness_csv(rows: &[SeparationRow]) -> String {
    csv(
        &["n", "t_n", "w_n", "log2_bound", "direct_value"],
        rows.iter()
            .map(|r| vec![r.n.to_string(), num(r.t), num(r.w), num(r.log2_bound), opt(r.direct)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, -2.5] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn layout() {
        let s = csv(&["a", "b"], vec![vec![num(1.0), opt(None)]]);
        assert_eq!(s, "a,b\n1.0000000000000000e0,\n");
    }
}

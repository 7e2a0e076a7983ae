//! CSV rendering of aggregated results.

use std::fmt::Write as _;

use crate::flat::ResultRow;

pub const FLAT_HEADER: &str = "policy,budget,trials,mean_regret,stderr_regret,mean_samples_used";
pub const TREE_HEADER: &str =
    "domain,policy,budget,trials,mean_regret,stderr_regret,mean_samples_used";

/// Formats `x` with 6 significant digits in the style of C's `%g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn push_row(out: &mut String, row: &ResultRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        row.policy,
        row.budget,
        row.trials,
        format_sig6(row.mean_regret),
        format_sig6(row.stderr_regret),
        format_sig6(row.mean_samples_used),
    );
}

fn sorted(rows: &[ResultRow]) -> Vec<&ResultRow> {
    let mut rows: Vec<&ResultRow> = rows.iter().collect();
    rows.sort_by(|a, b| (&a.policy, a.budget).cmp(&(&b.policy, b.budget)));
    rows
}

/// Flat-selection CSV: header plus rows sorted by (policy, budget).
pub fn flat_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(FLAT_HEADER);
    out.push('\n');
    for row in sorted(rows) {
        push_row(&mut out, row);
    }
    out
}

/// Same as [`flat_csv`] with a leading `domain` column.
pub fn domain_csv(domain: &str, rows: &[ResultRow]) -> String {
    let mut out = String::from(TREE_HEADER);
    out.push('\n');
    for row in sorted(rows) {
        out.push_str(domain);
        out.push(',');
        push_row(&mut out, row);
    }
    out
}

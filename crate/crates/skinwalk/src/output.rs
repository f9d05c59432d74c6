//! Plot-ready serialization of trajectories and spectral tables.
//!
//! CSV output uses a comma delimiter, a header row, LF line endings, and
//! decimal numbers with 12 significant digits — comfortably below every
//! tolerance in the test suite and stable across platforms. JSON output goes
//! through serde_json, whose shortest-round-trip floats reparse bit-exactly.

use crate::error::Result;
use crate::evolution::Trajectory;
use crate::spectral::BandPoint;

/// Significant digits used for CSV numbers.
pub const CSV_SIG_DIGITS: usize = 12;

/// Format with a fixed number of significant digits, decimal where the
/// magnitude allows it and scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if mag >= -4 && mag < sig as i32 {
        let prec = (sig as i32 - 1 - mag).max(0) as usize;
        trim_decimal(format!("{x:.prec$}"))
    } else {
        let s = format!("{:.*e}", sig - 1, x);
        match s.split_once('e') {
            Some((mantissa, exp)) => format!("{}e{exp}", trim_decimal(mantissa.to_string())),
            None => s,
        }
    }
}

fn trim_decimal(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Shorthand for the crate-wide CSV precision.
pub fn csv_num(x: f64) -> String {
    fmt_sig(x, CSV_SIG_DIGITS)
}

/// Long-format distribution table: one row per (t, x).
pub fn trajectory_distribution_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,P\n");
    for t in 0..=traj.steps() {
        for (x, p) in traj.positions().zip(traj.distribution(t)) {
            out.push_str(&format!("{t},{x},{}\n", csv_num(*p)));
        }
    }
    out
}

/// Per-step summary series.
pub fn trajectory_summary_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,center_of_mass,survival,variance\n");
    for t in 0..=traj.steps() {
        out.push_str(&format!(
            "{t},{},{},{}\n",
            csv_num(traj.center_of_mass()[t]),
            csv_num(traj.survival()[t]),
            csv_num(traj.variance()[t]),
        ));
    }
    out
}

/// Full trajectory as JSON; reparses into an identical [`Trajectory`].
pub fn trajectory_json(traj: &Trajectory) -> Result<String> {
    Ok(serde_json::to_string(traj)?)
}

pub fn trajectory_from_json(text: &str) -> Result<Trajectory> {
    Ok(serde_json::from_str(text)?)
}

/// Quasienergy band table over a k grid.
pub fn band_table_csv(points: &[BandPoint]) -> String {
    let mut out = String::from("k,re_e_plus,im_e_plus,re_e_minus,im_e_minus\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_num(p.k),
            csv_num(p.e_plus.0),
            csv_num(p.e_plus.1),
            csv_num(p.e_minus.0),
            csv_num(p.e_minus.1),
        ));
    }
    out
}

pub fn band_table_json(points: &[BandPoint]) -> Result<String> {
    Ok(serde_json::to_string(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::evolve;
    use crate::walk::WalkParams;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0, 12), "0");
        assert_eq!(fmt_sig(-0.0, 12), "0");
        assert_eq!(fmt_sig(0.25, 12), "0.25");
        assert_eq!(fmt_sig(-0.854, 12), "-0.854");
        assert_eq!(fmt_sig(1.0, 12), "1");
        assert_eq!(fmt_sig(0.1, 12), "0.1");
        assert_eq!(fmt_sig(2.0 / 3.0, 6), "0.666667");
        assert_eq!(fmt_sig(123456789012.3, 12), "123456789012");
        assert_eq!(fmt_sig(1.5e-7, 12), "1.5e-7");
        assert_eq!(fmt_sig(-2.5e30, 4), "-2.5e30");
        // rounding may carry into the next magnitude; value stays faithful
        assert_eq!(fmt_sig(0.999999999999999, 12), "1");
    }

    #[test]
    fn csv_tables_have_headers_and_lf_endings() {
        let traj = evolve(&WalkParams::coherent(0.4, FRAC_PI_4, 3)).unwrap();
        let dist = trajectory_distribution_csv(&traj);
        assert!(dist.starts_with("t,x,P\n"));
        assert!(!dist.contains('\r'));
        assert_eq!(dist.lines().count(), 1 + 4 * (2 * 3 + 1));
        let summary = trajectory_summary_csv(&traj);
        assert!(summary.starts_with("t,center_of_mass,survival,variance\n"));
        assert_eq!(summary.lines().count(), 1 + 4);
    }

    #[test]
    fn trajectory_json_round_trips_exactly() {
        let traj = evolve(&WalkParams::dephasing(0.93, FRAC_PI_4, 0.75, 12)).unwrap();
        let text = trajectory_json(&traj).unwrap();
        let back = trajectory_from_json(&text).unwrap();
        assert_eq!(traj, back);
    }

    #[test]
    fn band_table_layout() {
        let grid = crate::spectral::k_grid(32);
        let bands = crate::spectral::quasienergy_bands(0.4, FRAC_PI_4, &grid).unwrap();
        let csv = band_table_csv(&bands);
        assert!(csv.starts_with("k,re_e_plus,im_e_plus,re_e_minus,im_e_minus\n"));
        assert_eq!(csv.lines().count(), 1 + 32);
        let json = band_table_json(&bands).unwrap();
        let back: Vec<crate::spectral::BandPoint> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 32);
    }
}

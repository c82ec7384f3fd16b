use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Linguistic-task accuracy minus control-task accuracy, in percentage
/// points. May be negative.
pub fn selectivity(acc_linguistic: f64, acc_control: f64) -> f64 {
    acc_linguistic - acc_control
}

/// Shannon entropy of a label histogram, in bits.
///
/// ```
/// use std::collections::BTreeMap;
/// let h = BTreeMap::from([("A", 3usize), ("B", 1)]);
/// assert!((probekit::analysis::entropy_bits(&h) - 0.8113).abs() < 1e-4);
/// ```
pub fn entropy_bits<K>(hist: &BTreeMap<K, usize>) -> f64 {
    let total: usize = hist.values().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    hist.values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Cross-entropy reduction of a representation over a baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoGain {
    pub gain_bits: f64,
    /// `100 * gain / baseline CE`; undefined when the baseline CE is not
    /// positive.
    pub percent: Option<f64>,
}

pub fn info_gain(ce_baseline_bits: f64, ce_target_bits: f64) -> InfoGain {
    let gain_bits = ce_baseline_bits - ce_target_bits;
    let percent = (ce_baseline_bits > 0.0).then(|| 100.0 * gain_bits / ce_baseline_bits);
    InfoGain { gain_bits, percent }
}

/// `"0.10 (6%)"`, or `"0.10 (n/a)"` without a percentage.
pub fn format_gain_cell(gain: &InfoGain) -> String {
    match gain.percent {
        Some(p) => format!("{:.2} ({:.0}%)", gain.gain_bits, p),
        None => format!("{:.2} (n/a)", gain.gain_bits),
    }
}

/// `"91.8 (42.0)"`: accuracy with selectivity in parentheses, both in
/// percent.
pub fn format_accuracy_cell(accuracy: f64, selectivity: Option<f64>) -> String {
    match selectivity {
        Some(s) => format!("{accuracy:.1} ({s:.1})"),
        None => format!("{accuracy:.1}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectivity_cells() {
        let s = selectivity(91.8, 49.8);
        assert!((s - 42.0).abs() < 1e-9);
        assert_eq!(format_accuracy_cell(91.8, Some(s)), "91.8 (42.0)");
        let s = selectivity(92.9, 60.4);
        assert!((s - 32.5).abs() < 1e-9);
        assert_eq!(format_accuracy_cell(92.9, Some(s)), "92.9 (32.5)");
        assert_eq!(selectivity(57.0, 57.0), 0.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_bits(&BTreeMap::from([("A", 50usize), ("B", 50)])), 1.0);
        assert_eq!(entropy_bits(&BTreeMap::from([("A", 10usize)])), 0.0);
        let h = BTreeMap::from([("A", 3usize), ("B", 1)]);
        let closed = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((entropy_bits(&h) - closed).abs() < 1e-12);
        assert!((entropy_bits(&h) - 0.8113).abs() < 5e-5);
        let h = BTreeMap::from([("Aligned", 2usize), ("Unaligned", 1)]);
        assert!((entropy_bits(&h) - 0.9183).abs() < 5e-5);
    }

    #[test]
    fn gain_values() {
        assert_eq!(info_gain(1.3, 1.3), InfoGain { gain_bits: 0.0, percent: Some(0.0) });
        assert_eq!(info_gain(2.0, 1.0), InfoGain { gain_bits: 1.0, percent: Some(50.0) });
        let g = info_gain(0.0, 0.2);
        assert!(g.percent.is_none());
        assert!((g.gain_bits + 0.2).abs() < 1e-12);
    }

    #[test]
    fn gain_cell_layout() {
        let g = InfoGain { gain_bits: 0.10, percent: Some(6.0) };
        assert_eq!(format_gain_cell(&g), "0.10 (6%)");
        let g = InfoGain { gain_bits: 0.74, percent: None };
        assert_eq!(format_gain_cell(&g), "0.74 (n/a)");
    }
}

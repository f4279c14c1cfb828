//! Instance-level scores and their aggregates.

use crate::graph::NodeSet;

/// `|est - truth| / |truth|`; `None` when the truth is zero.
pub fn relative_error(est: f64, truth: f64) -> Option<f64> {
    if truth == 0.0 { None } else { Some((est - truth).abs() / truth.abs()) }
}

/// Fraction of returned sets that are valid; `None` when nothing was
/// returned.
pub fn precision(returned: &[NodeSet], valid: &[NodeSet]) -> Option<f64> {
    if returned.is_empty() {
        return None;
    }
    let hits = returned.iter().filter(|z| valid.contains(z)).count();
    Some(hits as f64 / returned.len() as f64)
}

/// Agreement between true and decided edge presence over decided instances.
pub fn edge_fraction(decisions: &[(bool, bool)]) -> Option<f64> {
    if decisions.is_empty() {
        return None;
    }
    let agree = decisions.iter().filter(|(t, d)| t == d).count();
    Some(agree as f64 / decisions.len() as f64)
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() { None } else { Some(xs.iter().sum::<f64>() / xs.len() as f64) }
}

/// Sample standard deviation (`n - 1` denominator); needs two values.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_examples() {
        assert!((relative_error(0.9, 1.0).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(relative_error(0.5, 0.5), Some(0.0));
        assert_eq!(relative_error(-1.5, -1.0), Some(0.5));
        assert_eq!(relative_error(0.1, 0.0), None);
    }

    #[test]
    fn precision_examples() {
        let a = NodeSet::from([1]);
        let b = NodeSet::from([2]);
        assert_eq!(precision(std::slice::from_ref(&a), &[a.clone(), b.clone()]), Some(1.0));
        assert_eq!(precision(&[a.clone(), b], &[a]), Some(0.5));
        assert_eq!(precision(&[], &[]), None);
    }

    #[test]
    fn edge_fraction_examples() {
        assert_eq!(edge_fraction(&[(true, true), (false, false)]), Some(1.0));
        assert_eq!(edge_fraction(&[(true, false), (false, false)]), Some(0.5));
        assert_eq!(edge_fraction(&[]), None);
    }

    #[test]
    fn sd_uses_sample_convention() {
        assert_eq!(sample_sd(&[1.0]), None);
        assert!((sample_sd(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 1.2909944487358056).abs() < 1e-12);
        assert_eq!(mean(&[]), None);
    }
}

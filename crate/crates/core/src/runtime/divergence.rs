use std::collections::BTreeMap;

use crate::engine::Histogram;

/// `½·Σ|p_k − q_k|` over index-aligned probability vectors. A shorter
/// vector is padded with zeros.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let sum: f64 = (0..n).map(|k| (at(p, k) - at(q, k)).abs()).sum();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Total variation between two keyed distributions; absent keys count as 0.
pub fn total_variation_keyed(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &pk) in p {
        sum += (pk - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qk) in q {
        if !p.contains_key(k) {
            sum += qk.abs();
        }
    }
    (0.5 * sum).clamp(0.0, 1.0)
}

/// Relative frequencies of a histogram.
pub fn empirical(hist: &Histogram) -> BTreeMap<String, f64> {
    let total: u64 = hist.values().sum();
    if total == 0 {
        return BTreeMap::new();
    }
    hist.iter()
        .map(|(k, &v)| (k.clone(), v as f64 / total as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[1.0], &[0.5, 0.5]), 0.5);
    }

    #[test]
    fn keyed() {
        let p = BTreeMap::from([("00".to_owned(), 0.5), ("11".to_owned(), 0.5)]);
        let q = BTreeMap::from([("00".to_owned(), 1.0)]);
        assert_eq!(total_variation_keyed(&p, &q), 0.5);
        assert_eq!(total_variation_keyed(&q, &p), 0.5);
        assert_eq!(total_variation_keyed(&p, &p), 0.0);
    }

    #[test]
    fn frequencies() {
        let h = Histogram::from([("0".to_owned(), 3), ("1".to_owned(), 1)]);
        let f = empirical(&h);
        assert_eq!(f["0"], 0.75);
        assert_eq!(f["1"], 0.25);
        assert!(empirical(&Histogram::new()).is_empty());
    }
}

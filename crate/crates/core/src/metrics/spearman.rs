use super::MetricsError;

/// Ranks starting at 1 with tied values sharing their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(MetricsError::InvalidParameter(format!(
            "need at least 3 observations, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MetricsError::InvalidParameter("non-finite value".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (x.len() + 1) as f64 / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::UndefinedCorrelation(
            "all values tied in at least one input".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classic formula, valid without ties.
    fn rank_difference_formula(x: &[f64], y: &[f64]) -> f64 {
        let rx = average_ranks(x);
        let ry = average_ranks(y);
        let n = x.len() as f64;
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        1.0 - 6.0 * d2 / (n * (n * n - 1.0))
    }

    #[test]
    fn textbook_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman_rho(&x, &x).unwrap(), 1.0);
        assert_eq!(spearman_rho(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        let y = [1.0, 3.0, 2.0, 4.0];
        assert!((spearman_rho(&x, &y).unwrap() - 0.8).abs() < 1e-15);
        assert!((rank_difference_formula(&x, &y) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn matches_rank_difference_formula_without_ties() {
        let x = [0.3, -1.2, 5.0, 2.2, 0.0, 9.1, -3.3];
        let y = [1.0, 0.5, -2.0, 3.3, 7.7, 0.1, 4.4];
        let rho = spearman_rho(&x, &y).unwrap();
        assert!((rho - rank_difference_formula(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn ties_use_average_ranks() {
        assert_eq!(average_ranks(&[2.0, 1.0, 2.0, 3.0]), vec![2.5, 1.0, 2.5, 4.0]);
        let rho = spearman_rho(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        // Ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4): Pearson = 4.5 / sqrt(4.5 * 5).
        assert!((rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(spearman_rho(&[1.0, 2.0], &[1.0, 2.0]), Err(MetricsError::InvalidParameter(_))));
        assert!(matches!(spearman_rho(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(MetricsError::InvalidParameter(_))));
        assert!(matches!(
            spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(MetricsError::UndefinedCorrelation(_))
        ));
    }
}

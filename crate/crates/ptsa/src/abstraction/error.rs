use super::predicates::AbstractionKind;

/// Aggregation error over the pairs recorded during a search: the sum of
/// absolute value differences between the two paths of each aggregated pair.
pub fn aggregation_error<I>(pairs: I) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    pairs.into_iter().map(|(va, vb)| (va - vb).abs()).sum()
}

/// Upper bound on the aggregation error under balanced search:
/// `log_|A|(N_s + 1) * zeta`, with an extra `|A| - 1` factor when the
/// predicate is not transitive.
pub fn error_bound(action_count: usize, simulations: usize, zeta: f64, transitive: bool) -> f64 {
    assert!(action_count >= 2);
    assert!(simulations >= 1);
    assert!(zeta >= 0.0);
    let depth = ((simulations + 1) as f64).ln() / (action_count as f64).ln();
    if transitive {
        depth * zeta
    } else {
        (action_count as f64 - 1.0) * depth * zeta
    }
}

/// Per-aggregation value-loss bound `zeta` of a predicate:
/// `2 * eps * R_max / (1 - gamma)^2` for the epsilon forms (with the bucket
/// width standing in for epsilon in `phi_q_d`), 0 for exact predicates.
/// `phi_q_psi_alpha` has no closed-form loss and must be configured
/// explicitly; `None` is returned for it.
pub fn loss_bound(kind: &AbstractionKind, r_max: f64, gamma: f64) -> Option<f64> {
    let scale = 2.0 * r_max / ((1.0 - gamma) * (1.0 - gamma));
    match kind {
        AbstractionKind::PhiAStar | AbstractionKind::PhiQStar => Some(0.0),
        AbstractionKind::PhiAStarEps { epsilon } | AbstractionKind::PhiQStarEps { epsilon } => {
            Some(epsilon * scale)
        }
        AbstractionKind::PhiQD { d } => Some(d * scale),
        AbstractionKind::PhiQPsiAlpha { .. } => None,
    }
}

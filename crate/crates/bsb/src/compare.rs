//! Cross-strategy comparison: individual testing, the multistage pooled
//! strategy (both accounting modes), and the single-query simulators, all
//! run against the same secret.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::{CountingOracle, SecretString};
use crate::pooling::{
    adversarial_worst_case, prevalence_report, run_individual, run_li, worst_case_tests,
    worst_case_tests_optimal, Accounting, PoolingPlan,
};
use crate::statevector::{run_bv, OracleConstruction};
use crate::Result;

/// Query counts and analytics for every strategy on one secret.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub pool_sizes: Vec<usize>,
    /// Always N: one weighing per position.
    pub queries_individual: u64,
    /// Pooled strategy on this secret, strict accounting.
    pub queries_li_strict: u64,
    /// Pooled strategy on this secret, paper accounting.
    pub queries_li_paper: u64,
    /// Always 1: a single oracle application.
    pub queries_bv: u64,
    pub futile_s2: bool,
    pub futile_optimal: bool,
    /// Closed-form worst case S·d·(N/d)^(1/S) for this plan's stage count.
    pub predicted_worst_case: f64,
    /// Closed-form worst case e·d·ln(N/d) at the optimal stage count.
    pub predicted_worst_case_optimal: Option<f64>,
    /// Exhaustive (or even-spread) worst case over defect placements.
    pub simulated_worst_case_strict: u64,
    pub simulated_worst_case_paper: u64,
    /// All strategies recovered the defect set exactly.
    pub all_recovered: bool,
}

/// Runs every strategy on `secret` using `plan` for the pooled runs.
pub fn compare(secret: &SecretString, plan: &PoolingPlan) -> Result<ComparisonReport> {
    let n = secret.len();
    let d = secret.defect_count();
    let defects = secret.defect_indices();

    let mut oracle = CountingOracle::new(secret.clone());
    let individual = run_individual(&mut oracle, n)?;

    let mut oracle = CountingOracle::new(secret.clone());
    let strict = run_li(&mut oracle, plan, Accounting::Strict)?;

    let mut oracle = CountingOracle::new(secret.clone());
    let paper = run_li(&mut oracle, plan, Accounting::Paper)?;

    let bv = run_bv(secret, OracleConstruction::ZOnly)?;

    let prevalence = prevalence_report(n, d.max(1).min(n))?;
    let d_plan = plan.assumed_defects();
    let predicted_worst_case = worst_case_tests(n, d_plan, plan.stage_count())?;
    let predicted_worst_case_optimal = worst_case_tests_optimal(n, d_plan).ok();

    let all_recovered = individual.identified_defects == defects
        && strict.identified_defects == defects
        && paper.identified_defects == defects
        && bv.recovered == *secret;

    Ok(ComparisonReport {
        schema_version: 1,
        n,
        d,
        p: d as f64 / n as f64,
        pool_sizes: plan.pool_sizes().to_vec(),
        queries_individual: individual.total_queries,
        queries_li_strict: strict.total_queries,
        queries_li_paper: paper.total_queries,
        queries_bv: u64::from(bv.oracle_calls),
        futile_s2: prevalence.futile_s2,
        futile_optimal: prevalence.futile_optimal,
        predicted_worst_case,
        predicted_worst_case_optimal,
        simulated_worst_case_strict: adversarial_worst_case(plan, d, Accounting::Strict),
        simulated_worst_case_paper: adversarial_worst_case(plan, d, Accounting::Paper),
        all_recovered,
    })
}

/// Deterministic secret of length `n` with exactly `d` ones, drawn from a
/// seeded ChaCha stream.
pub fn seeded_random_secret(n: usize, d: usize, seed: u64) -> Result<SecretString> {
    if n == 0 || d > n {
        return Err(crate::Error::Domain(format!(
            "need 1 <= d <= n, got d={d}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, n, d);
    let defects: Vec<usize> = picks.iter().map(|i| i + 1).collect();
    SecretString::from_defects(n, &defects)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> SecretString {
        text.parse().unwrap()
    }

    #[test]
    fn headline_comparison_12_bits() {
        // One defect at position 12: individual 12, pooled 7, single-query 1.
        let secret = s("100000000000");
        let plan = PoolingPlan::optimal(12, 1).unwrap();
        let report = compare(&secret, &plan).unwrap();
        assert_eq!(report.queries_individual, 12);
        assert_eq!(report.queries_li_strict, 7);
        assert_eq!(report.queries_bv, 1);
        assert!(report.all_recovered);
        assert!(!report.futile_s2);
        assert!((report.predicted_worst_case - 2.0 * (12.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clean_population_stops_after_stage_one() {
        // No defects, pools of 3: only the 3 stage-1 weighings happen.
        let secret = s("000000000");
        let plan = PoolingPlan::from_pool_sizes(9, 1, vec![3, 1]).unwrap();
        let report = compare(&secret, &plan).unwrap();
        assert_eq!(report.queries_li_strict, 3);
        assert_eq!(report.queries_li_paper, 3);
        assert!(report.all_recovered);
    }

    #[test]
    fn high_prevalence_sets_futility() {
        let secret = s("110110");
        let plan = PoolingPlan::with_stage_count(6, 4, 2).unwrap();
        let report = compare(&secret, &plan).unwrap();
        assert!(report.futile_s2);
        assert!(report.simulated_worst_case_strict >= 6);
    }

    #[test]
    fn seeded_secret_is_deterministic() {
        let a = seeded_random_secret(12, 1, 1).unwrap();
        let b = seeded_random_secret(12, 1, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.defect_count(), 1);

        let full = seeded_random_secret(5, 5, 42).unwrap();
        assert_eq!(full.to_string(), "11111");

        let two = seeded_random_secret(8, 2, 7).unwrap();
        assert_eq!(two.defect_count(), 2);

        assert!(seeded_random_secret(4, 5, 0).is_err());
    }

    #[test]
    fn different_seeds_vary() {
        let distinct: std::collections::HashSet<String> =
            (0..32).map(|seed| seeded_random_secret(16, 4, seed).unwrap().to_string()).collect();
        assert!(distinct.len() > 1);
    }
}

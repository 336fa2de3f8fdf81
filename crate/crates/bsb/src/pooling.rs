//! Planning and adaptive execution of multistage pooled testing, plus the
//! closed-form analytics for pool sizes, stage counts, and prevalence
//! thresholds.
//!
//! A plan fixes the pool size per stage; execution only ever consumes
//! spring-balance readings, never the true defect count.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::bits::{CountingOracle, QueryString};
use crate::{Error, Result};

/// How second-stage queries inside surviving pools are counted.
///
/// `Strict` tests every surviving member individually. `Paper` applies the
/// two deductions a careful bookkeeper can make from pool readings: a pool
/// whose reading is fully accounted for needs no further tests, and when
/// every member tested so far was clean and the untested remainder exactly
/// matches the pool reading, the remainder must all be defective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accounting {
    Strict,
    Paper,
}

fn check_population(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    if d == 0 || d > n {
        return Err(Error::Domain(format!("defect count {d} outside 1..={n}")));
    }
    Ok(())
}

/// Optimal number of stages, `round(ln(N/d))` clamped to at least 1.
pub fn optimal_stage_count(n: usize, d: usize) -> Result<usize> {
    check_population(n, d)?;
    let s = (n as f64 / d as f64).ln().round();
    Ok((s as usize).max(1))
}

/// Optimal pool size for stage `i` of `s`, `round((N/d)^((S-i)/S))` clamped
/// to at least 1. The final stage always yields 1 (individual testing).
pub fn optimal_pool_size(n: usize, d: usize, s: usize, i: usize) -> Result<usize> {
    check_population(n, d)?;
    if s == 0 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if i == 0 || i > s {
        return Err(Error::Domain(format!("stage index {i} outside 1..={s}")));
    }
    let exponent = (s - i) as f64 / s as f64;
    let k = (n as f64 / d as f64).powf(exponent).round();
    Ok((k as usize).max(1))
}

/// Worst-case number of tests for an `s`-stage plan, `S·d·(N/d)^(1/S)`.
/// A single stage degenerates to individual testing and costs exactly `N`.
pub fn worst_case_tests(n: usize, d: usize, s: usize) -> Result<f64> {
    check_population(n, d)?;
    if s == 0 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if s == 1 {
        return Ok(n as f64);
    }
    let ratio = n as f64 / d as f64;
    Ok(s as f64 * d as f64 * ratio.powf(1.0 / s as f64))
}

/// Worst-case number of tests at the optimal stage count, `e·d·ln(N/d)`.
/// Undefined for `d = N`, where pooling degenerates to individual testing.
pub fn worst_case_tests_optimal(n: usize, d: usize) -> Result<f64> {
    check_population(n, d)?;
    if d == n {
        return Err(Error::Domain(
            "d = N leaves nothing to pool; use individual testing".into(),
        ));
    }
    Ok(E * d as f64 * (n as f64 / d as f64).ln())
}

/// Prevalence-rate analysis: when does pooling stop paying off?
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrevalenceReport {
    /// Prevalence rate d/N.
    pub p: f64,
    /// Value of -p·ln(p), compared against 1/e.
    pub neg_p_ln_p: f64,
    /// Two-stage pooling needs >= N tests in the worst case.
    pub futile_s2: bool,
    /// Optimal-stage pooling needs >= N tests in the worst case.
    pub futile_optimal: bool,
    /// Two-stage futility threshold on p.
    pub s2_threshold: f64,
    /// Optimal-stage futility threshold on -p·ln(p).
    pub optimal_threshold: f64,
}

pub fn prevalence_report(n: usize, d: usize) -> Result<PrevalenceReport> {
    check_population(n, d)?;
    let p = d as f64 / n as f64;
    let neg_p_ln_p = if d == n { 0.0 } else { -p * p.ln() };
    Ok(PrevalenceReport {
        p,
        neg_p_ln_p,
        futile_s2: p >= 0.25,
        // -p·ln(p) peaks at exactly 1/e; the d = N case is futile by
        // degeneracy rather than by the threshold.
        futile_optimal: d == n || neg_p_ln_p >= 1.0 / E,
        s2_threshold: 0.25,
        optimal_threshold: 1.0 / E,
    })
}

/// Stage parameters for a pooled run: the pool size of every stage, with the
/// final stage fixed at size 1 (individual testing).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolingPlan {
    n: usize,
    d_assumed: usize,
    pool_sizes: Vec<usize>,
}

impl PoolingPlan {
    /// Plan with explicit pool sizes. Sizes must be non-increasing and end
    /// with 1.
    pub fn from_pool_sizes(n: usize, d_assumed: usize, pool_sizes: Vec<usize>) -> Result<Self> {
        check_population(n, d_assumed)?;
        if pool_sizes.is_empty() {
            return Err(Error::InvalidPlan("at least one stage required".into()));
        }
        if *pool_sizes.last().unwrap() != 1 {
            return Err(Error::InvalidPlan("final stage pool size must be 1".into()));
        }
        if pool_sizes.iter().any(|&k| k == 0) {
            return Err(Error::InvalidPlan("pool sizes must be positive".into()));
        }
        if pool_sizes.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidPlan("pool sizes must be non-increasing".into()));
        }
        Ok(Self { n, d_assumed, pool_sizes })
    }

    /// Plan with `s` stages and the closed-form optimal pool size per stage.
    pub fn with_stage_count(n: usize, d_assumed: usize, s: usize) -> Result<Self> {
        let mut pool_sizes = Vec::with_capacity(s);
        for i in 1..=s {
            pool_sizes.push(optimal_pool_size(n, d_assumed, s, i)?);
        }
        Self::from_pool_sizes(n, d_assumed, pool_sizes)
    }

    /// Plan with the optimal stage count for the assumed defect count.
    pub fn optimal(n: usize, d_assumed: usize) -> Result<Self> {
        let s = optimal_stage_count(n, d_assumed)?;
        Self::with_stage_count(n, d_assumed, s)
    }

    pub fn population(&self) -> usize {
        self.n
    }

    pub fn assumed_defects(&self) -> usize {
        self.d_assumed
    }

    pub fn stage_count(&self) -> usize {
        self.pool_sizes.len()
    }

    pub fn pool_sizes(&self) -> &[usize] {
        &self.pool_sizes
    }

    /// Number of stage-1 groups, counting a short last group as full.
    pub fn stage1_group_count(&self) -> usize {
        self.n.div_ceil(self.pool_sizes[0])
    }
}

/// One issued query and its spring-balance reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub x: QueryString,
    pub f: u32,
}

/// Trace of an adaptive run: queries per stage plus the recovered defects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub identified_defects: Vec<usize>,
    pub total_queries: u64,
    pub stages: Vec<Vec<QueryRecord>>,
}

impl RunResult {
    pub fn per_stage_queries(&self) -> Vec<u64> {
        self.stages.iter().map(|s| s.len() as u64).collect()
    }

    /// Positive readings per stage (the m_i counts).
    pub fn per_stage_positive_groups(&self) -> Vec<usize> {
        self.stages
            .iter()
            .map(|s| s.iter().filter(|q| q.f > 0).count())
            .collect()
    }
}

/// Individual testing: one singleton query per position.
pub fn run_individual(oracle: &mut CountingOracle, n: usize) -> Result<RunResult> {
    if oracle.len() != n {
        return Err(Error::LengthMismatch { expected: oracle.len(), actual: n });
    }
    let mut queries = Vec::with_capacity(n);
    let mut defects = Vec::new();
    for i in 1..=n {
        let x = QueryString::singleton(n, i);
        let f = oracle.weigh(&x)?;
        if f > 0 {
            defects.push(i);
        }
        queries.push(QueryRecord { x, f });
    }
    Ok(RunResult {
        identified_defects: defects,
        total_queries: n as u64,
        stages: vec![queries],
    })
}

// A pool surviving into the next stage, with the reading that kept it alive.
struct Survivor {
    members: Vec<usize>,
    reading: u32,
}

/// Runs the adaptive multistage strategy against a counting oracle.
///
/// Each stage re-partitions the surviving indices contiguously in ascending
/// order into pools of the stage's size and weighs each pool once. Pools
/// with a zero reading are cleared; the rest survive. The final stage tests
/// surviving members individually, with deductions governed by `accounting`.
pub fn run_li(
    oracle: &mut CountingOracle,
    plan: &PoolingPlan,
    accounting: Accounting,
) -> Result<RunResult> {
    if oracle.len() != plan.n {
        return Err(Error::LengthMismatch { expected: oracle.len(), actual: plan.n });
    }
    let n = plan.n;
    let start = oracle.query_count();
    let mut stages: Vec<Vec<QueryRecord>> = Vec::with_capacity(plan.stage_count());
    let mut defects: Vec<usize> = Vec::new();

    // Stage 1 covers the whole population; no parent reading exists yet.
    let mut survivors: Vec<Survivor> =
        vec![Survivor { members: (1..=n).collect(), reading: 0 }];
    let mut have_parent_readings = false;

    for (stage_idx, &k) in plan.pool_sizes.iter().enumerate() {
        let is_final = stage_idx + 1 == plan.stage_count();
        let mut trace: Vec<QueryRecord> = Vec::new();

        if is_final && k == 1 && accounting == Accounting::Paper && have_parent_readings {
            // Individual testing per surviving pool, using its known reading.
            for pool in &survivors {
                let reading = pool.reading;
                let mut found = 0u32;
                for (pos, &i) in pool.members.iter().enumerate() {
                    let remaining = (pool.members.len() - pos) as u32;
                    if found == reading {
                        // Reading fully accounted for: the rest are clean.
                        break;
                    }
                    if found == 0 && remaining == reading {
                        // Only clean results so far and exactly enough
                        // members left to carry the reading: all defective.
                        defects.extend(&pool.members[pos..]);
                        break;
                    }
                    let x = QueryString::singleton(n, i);
                    let f = oracle.weigh(&x)?;
                    if f > 0 {
                        defects.push(i);
                        found += 1;
                    }
                    trace.push(QueryRecord { x, f });
                }
            }
            stages.push(trace);
            break;
        }

        // Contiguous re-partition of all surviving indices.
        let members: Vec<usize> =
            survivors.iter().flat_map(|p| p.members.iter().copied()).collect();
        let mut next: Vec<Survivor> = Vec::new();
        for chunk in members.chunks(k) {
            let x = QueryString::from_indices(n, chunk.iter().copied());
            let f = oracle.weigh(&x)?;
            if f > 0 {
                if is_final {
                    // k = 1 on the last stage, so a positive is a defect.
                    defects.extend(chunk);
                } else {
                    next.push(Survivor { members: chunk.to_vec(), reading: f });
                }
            }
            trace.push(QueryRecord { x, f });
        }
        stages.push(trace);
        survivors = next;
        have_parent_readings = true;
    }

    defects.sort_unstable();
    Ok(RunResult {
        identified_defects: defects,
        total_queries: oracle.query_count() - start,
        stages,
    })
}

fn binomial_at_most(n: usize, d: usize, cap: u128) -> Option<u128> {
    let d = d.min(n - d);
    let mut c: u128 = 1;
    for i in 0..d {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap {
            return None;
        }
    }
    Some(c)
}

fn for_each_combination(n: usize, d: usize, mut visit: impl FnMut(&[usize])) {
    // 1-based index combinations in lexicographic order.
    let mut idx: Vec<usize> = (1..=d).collect();
    if d == 0 || d > n {
        if d == 0 {
            visit(&idx);
        }
        return;
    }
    loop {
        visit(&idx);
        // Advance to the next combination.
        let mut i = d;
        while i > 0 && idx[i - 1] == n - (d - i) {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn run_for_placement(plan: &PoolingPlan, defects: &[usize], accounting: Accounting) -> u64 {
    let secret = crate::bits::SecretString::from_defects(plan.n, defects).unwrap();
    let mut oracle = CountingOracle::new(secret);
    let result = run_li(&mut oracle, plan, accounting).unwrap();
    debug_assert_eq!(result.identified_defects, defects);
    result.total_queries
}

/// Even-spread heuristic placement: one defect per stage-1 group,
/// round-robin, filling each group from its last slot backwards.
pub fn even_spread_placement(plan: &PoolingPlan, d: usize) -> Vec<usize> {
    let k1 = plan.pool_sizes()[0];
    let g1 = plan.stage1_group_count();
    let mut defects = Vec::with_capacity(d);
    for j in 0..d {
        let group = j % g1;
        let occupancy = j / g1;
        let group_start = group * k1 + 1;
        let group_end = plan.n.min(group_start + k1 - 1);
        let slot = group_end.saturating_sub(occupancy).max(group_start);
        defects.push(slot);
    }
    defects.sort_unstable();
    defects.dedup();
    defects
}

/// Maximum query count over defect placements: exhaustive when the
/// placement count is at most 10^5, otherwise the even-spread heuristic.
pub fn adversarial_worst_case(plan: &PoolingPlan, d: usize, accounting: Accounting) -> u64 {
    if d == 0 {
        return run_for_placement(plan, &[], accounting);
    }
    let d = d.min(plan.n);
    if binomial_at_most(plan.n, d, 100_000).is_some() {
        let mut worst = 0;
        for_each_combination(plan.n, d, |placement| {
            worst = worst.max(run_for_placement(plan, placement, accounting));
        });
        worst
    } else {
        run_for_placement(plan, &even_spread_placement(plan, d), accounting)
    }
}

/// Serializable view of a plan plus its execution trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoolRunReport {
    pub schema_version: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "S")]
    pub s: usize,
    pub pool_sizes: Vec<usize>,
    pub stages: Vec<StageReport>,
    pub defects: Vec<usize>,
    pub total_queries: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub queries: Vec<QueryReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryReport {
    pub x: String,
    pub f: u32,
}

impl PoolRunReport {
    pub fn new(plan: &PoolingPlan, result: &RunResult) -> Self {
        Self {
            schema_version: 1,
            n: plan.population(),
            s: plan.stage_count(),
            pool_sizes: plan.pool_sizes().to_vec(),
            stages: result
                .stages
                .iter()
                .map(|stage| StageReport {
                    queries: stage
                        .iter()
                        .map(|q| QueryReport { x: q.x.to_string(), f: q.f })
                        .collect(),
                })
                .collect(),
            defects: result.identified_defects.clone(),
            total_queries: result.total_queries,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SecretString;

    fn oracle_with_defects(n: usize, defects: &[usize]) -> CountingOracle {
        CountingOracle::new(SecretString::from_defects(n, defects).unwrap())
    }

    #[test]
    fn stage_count_examples() {
        assert_eq!(optimal_stage_count(12, 1).unwrap(), 2);
        assert_eq!(optimal_stage_count(100, 5).unwrap(), 3); // round(ln 20) = round(2.9957...)
        // N = e*d rounds ln(e) = 1 for a few d values.
        assert_eq!(optimal_stage_count(3, 1).unwrap(), 1); // ln 3 = 1.0986 -> 1
        assert!(optimal_stage_count(5, 6).is_err());
        assert!(optimal_stage_count(5, 0).is_err());
    }

    #[test]
    fn pool_size_examples() {
        assert_eq!(optimal_pool_size(12, 1, 2, 1).unwrap(), 3);
        assert_eq!(optimal_pool_size(100, 1, 2, 1).unwrap(), 10);
        for i in 1..=3 {
            assert_eq!(optimal_pool_size(7, 7, 3, i).unwrap(), 1);
        }
        assert_eq!(optimal_pool_size(12, 1, 2, 2).unwrap(), 1);
        assert!(optimal_pool_size(12, 1, 2, 3).is_err());
        assert!(optimal_pool_size(12, 1, 2, 0).is_err());
    }

    #[test]
    fn worst_case_formulas() {
        assert_eq!(worst_case_tests(12, 1, 1).unwrap(), 12.0);
        assert_eq!(worst_case_tests(9, 9, 1).unwrap(), 9.0);
        let t = worst_case_tests(12, 1, 2).unwrap();
        assert!((t - 6.928203230275509).abs() < 1e-12);
        let t_opt = worst_case_tests_optimal(12, 1).unwrap();
        assert!((t_opt - 6.754676591535766).abs() < 1e-12);
        assert_eq!(t_opt.round() as u32, 7);
        let t100 = worst_case_tests_optimal(100, 5).unwrap();
        assert!((t100 - 40.716223010650576).abs() / t100 < 1e-12);
        assert!(worst_case_tests_optimal(9, 9).is_err());
    }

    #[test]
    fn prevalence_thresholds() {
        let boundary = prevalence_report(4, 1).unwrap();
        assert!(boundary.futile_s2);
        assert!(!boundary.futile_optimal);
        let low = prevalence_report(12, 1).unwrap();
        assert!(!low.futile_s2 && !low.futile_optimal);
        assert!((low.neg_p_ln_p - 0.207075554149).abs() < 1e-12);
        let saturated = prevalence_report(7, 7).unwrap();
        assert!(saturated.futile_s2 && saturated.futile_optimal);
    }

    #[test]
    fn plan_validation() {
        assert!(PoolingPlan::from_pool_sizes(12, 1, vec![3, 1]).is_ok());
        assert!(PoolingPlan::from_pool_sizes(12, 1, vec![3, 4, 1]).is_err());
        assert!(PoolingPlan::from_pool_sizes(12, 1, vec![3, 2]).is_err());
        assert!(PoolingPlan::from_pool_sizes(12, 1, vec![]).is_err());
        assert!(PoolingPlan::from_pool_sizes(12, 0, vec![3, 1]).is_err());
        let plan = PoolingPlan::optimal(12, 1).unwrap();
        assert_eq!(plan.pool_sizes(), &[3, 1]);
        assert_eq!(plan.stage1_group_count(), 4);
    }

    #[test]
    fn individual_testing() {
        let mut oracle = oracle_with_defects(12, &[12]);
        let result = run_individual(&mut oracle, 12).unwrap();
        assert_eq!(result.total_queries, 12);
        assert_eq!(result.identified_defects, vec![12]);

        let mut oracle = oracle_with_defects(1, &[]);
        let result = run_individual(&mut oracle, 1).unwrap();
        assert_eq!(result.total_queries, 1);
        assert!(result.identified_defects.is_empty());

        let mut oracle = oracle_with_defects(5, &[1, 2, 3, 4, 5]);
        let result = run_individual(&mut oracle, 5).unwrap();
        assert_eq!(result.total_queries, 5);
        assert_eq!(result.identified_defects, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn twelve_bit_worked_run() {
        let plan = PoolingPlan::from_pool_sizes(12, 1, vec![3, 1]).unwrap();
        let mut oracle = oracle_with_defects(12, &[12]);
        let result = run_li(&mut oracle, &plan, Accounting::Strict).unwrap();
        assert_eq!(result.per_stage_queries(), vec![4, 3]);
        assert_eq!(result.total_queries, 7);
        assert_eq!(result.identified_defects, vec![12]);
        // Stage-1 queries walk the groups from the low indices up.
        let stage1: Vec<String> =
            result.stages[0].iter().map(|q| q.x.to_string()).collect();
        assert_eq!(
            stage1,
            vec!["000000000111", "000000111000", "000111000000", "111000000000"]
        );
        assert_eq!(result.stages[1].last().unwrap().x.to_string(), "100000000000");
    }

    #[test]
    fn eighteen_bit_accounting_modes() {
        let plan = PoolingPlan::from_pool_sizes(18, 2, vec![6, 1]).unwrap();

        // Defects in two different pools, each at the pool's last slot.
        let mut oracle = oracle_with_defects(18, &[6, 12]);
        let spread = run_li(&mut oracle, &plan, Accounting::Paper).unwrap();
        assert_eq!(spread.total_queries, 13);
        assert_eq!(spread.identified_defects, vec![6, 12]);

        let mut oracle = oracle_with_defects(18, &[6, 12]);
        let spread_strict = run_li(&mut oracle, &plan, Accounting::Strict).unwrap();
        assert_eq!(spread_strict.total_queries, 15);
        assert_eq!(spread_strict.identified_defects, vec![6, 12]);

        // Both defects in one pool: the pool reading is 2, so no member can
        // be deduced and the whole pool is retested.
        let mut oracle = oracle_with_defects(18, &[4, 6]);
        let same = run_li(&mut oracle, &plan, Accounting::Paper).unwrap();
        assert_eq!(same.total_queries, 9);
        assert_eq!(same.identified_defects, vec![4, 6]);
    }

    #[test]
    fn adversarial_worst_cases() {
        let plan18 = PoolingPlan::from_pool_sizes(18, 2, vec![6, 1]).unwrap();
        assert_eq!(adversarial_worst_case(&plan18, 2, Accounting::Paper), 13);
        assert_eq!(adversarial_worst_case(&plan18, 2, Accounting::Strict), 15);

        let plan12 = PoolingPlan::from_pool_sizes(12, 1, vec![3, 1]).unwrap();
        assert_eq!(adversarial_worst_case(&plan12, 1, Accounting::Strict), 7);

        // No defects: only the first stage runs.
        assert_eq!(
            adversarial_worst_case(&plan12, 0, Accounting::Strict),
            plan12.stage1_group_count() as u64
        );
    }

    #[test]
    fn even_spread_matches_exhaustive_worst_for_small_cases() {
        let plan = PoolingPlan::from_pool_sizes(18, 2, vec![6, 1]).unwrap();
        let placement = even_spread_placement(&plan, 2);
        assert_eq!(
            run_for_placement(&plan, &placement, Accounting::Paper),
            adversarial_worst_case(&plan, 2, Accounting::Paper)
        );
    }

    #[test]
    fn single_stage_plan_matches_individual() {
        let plan = PoolingPlan::from_pool_sizes(9, 1, vec![1]).unwrap();
        for accounting in [Accounting::Strict, Accounting::Paper] {
            let mut oracle = oracle_with_defects(9, &[3, 7]);
            let pooled = run_li(&mut oracle, &plan, accounting).unwrap();
            assert_eq!(pooled.total_queries, 9);
            assert_eq!(pooled.identified_defects, vec![3, 7]);
        }
    }

    #[test]
    fn correctness_exhaustive_small_populations() {
        for n in [6, 9, 12] {
            let plan = PoolingPlan::optimal(n, 1).unwrap();
            for d in 0..=n.min(3) {
                for_each_combination(n, d, |placement| {
                    for accounting in [Accounting::Strict, Accounting::Paper] {
                        let secret = SecretString::from_defects(n, placement).unwrap();
                        let mut oracle = CountingOracle::new(secret);
                        let result = run_li(&mut oracle, &plan, accounting).unwrap();
                        assert_eq!(result.identified_defects, placement);
                        assert_eq!(result.total_queries, oracle.query_count());
                    }
                });
            }
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let plan = PoolingPlan::from_pool_sizes(12, 1, vec![3, 1]).unwrap();
        let mut oracle = oracle_with_defects(12, &[12]);
        let result = run_li(&mut oracle, &plan, Accounting::Strict).unwrap();
        let report = PoolRunReport::new(&plan, &result);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"N\":12"));
        let back: PoolRunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.total_queries, 7);
        assert_eq!(back.defects, vec![12]);
    }
}

//! Acceptance criteria 1-10: one PASS/FAIL line per criterion with its runtime.

use std::process::ExitCode;
use std::time::Instant;

use quasirand::harness::*;
use quasirand::{AdditiveSet, FiniteAbelianGroup, Result};

struct Criterion {
    id: u32,
    name: &'static str,
    limit_s: f64,
    run: fn(&SuiteConfig) -> Result<Vec<CheckResult>>,
    /// Extra requirement on the result set, e.g. a minimum instance count.
    extra: fn(&[CheckResult]) -> Option<String>,
}

fn none(_: &[CheckResult]) -> Option<String> {
    None
}

fn cyclic(n: u64) -> FiniteAbelianGroup {
    FiniteAbelianGroup::cyclic(n).expect("valid modulus")
}

fn norm_identity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    check_uk_oct_identity(&function_corpus(50, cfg.seed)?, cfg)
}

fn fourier_identity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    check_fourier_identity(&fourier_corpus(cfg)?, cfg)
}

fn cut_below_oct(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    check_cut_below_oct(&tensor_corpus(100, cfg.seed), cfg)
}

fn main_theorem(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    check_main_theorem_exhaustive(&[cyclic(2), cyclic(3)], &[(2, 1), (3, 1)], cfg)
}

fn lemma_properties(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (k, d) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
        out.extend(check_lemma_structure(k, d, cfg)?);
    }
    for (k, d, n) in [(2, 1, 2), (2, 1, 3), (3, 1, 2)] {
        out.extend(check_lemma_numeric(k, d, &bounded_function_corpus(&cyclic(n), 10, cfg.seed)?, cfg)?);
    }
    out.extend(check_sf_recursion(8, cfg)?);
    Ok(out)
}

fn equivalence(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for p in [5, 7] {
        for set in equivalence_sets(p, cfg.seed)? {
            out.extend(check_equivalence_identities(&set, &[2, 3, 4], 1, cfg)?);
        }
    }
    for n in [5, 6] {
        for set in pattern_sets(&cyclic(n), cfg.seed)? {
            out.push(check_pattern_agreement(&set, 2, 1, cfg)?);
        }
    }
    Ok(out)
}

fn paley(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    run_paley_suite(&odd_primes_up_to(1000), &[13, 31, 61, 101, 199], &[101], 3, 2, cfg)
}

fn general(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    run_general_cayley_suite(&[1, 2, 3], &[9, 15], cfg)
}

fn m_norm(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut out = check_towsner_mnorm(&weighted_graph_corpus(50, cfg.seed), cfg)?;
    out.extend(check_edge_selection(&[(2, 1), (3, 1), (3, 2)], cfg)?);
    Ok(out)
}

fn engines(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    check_engine_consistency(&tensor_corpus(150, cfg.seed ^ 1), cfg)
}

fn at_least_200_instances(results: &[CheckResult]) -> Option<String> {
    let n = results.iter().filter(|r| r.check_id.ends_with("/bound")).count();
    (n < 200).then(|| format!("only {n} instances"))
}

fn all_subsets_covered(results: &[CheckResult]) -> Option<String> {
    let expected = 2 * (AdditiveSet::all_subsets(&cyclic(2)).unwrap().len() + AdditiveSet::all_subsets(&cyclic(3)).unwrap().len());
    (results.len() != expected).then(|| format!("{} cases, expected {expected}", results.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "norm identity ||Gamma_f||_Oct = ||f||_U^k", limit_s: 60.0, run: norm_identity, extra: none },
        Criterion { id: 2, name: "Fourier identity for U^2", limit_s: 10.0, run: fourier_identity, extra: none },
        Criterion { id: 3, name: "cut norm below octahedral norm", limit_s: 60.0, run: cut_below_oct, extra: none },
        Criterion { id: 4, name: "discrepancy bounded by U^{d+1} norm, all subsets of Z2, Z3", limit_s: 120.0, run: main_theorem, extra: all_subsets_covered },
        Criterion { id: 5, name: "SystemCut structure, norm chain and sf recursion", limit_s: 300.0, run: lemma_properties, extra: none },
        Criterion { id: 6, name: "equivalence identities and pattern agreement", limit_s: 120.0, run: equivalence, extra: none },
        Criterion { id: 7, name: "Paley reproduction", limit_s: 120.0, run: paley, extra: none },
        Criterion { id: 8, name: "general Cayley examples", limit_s: 120.0, run: general, extra: none },
        Criterion { id: 9, name: "M-norm subgraph bounds and edge selection", limit_s: 60.0, run: m_norm, extra: none },
        Criterion { id: 10, name: "engine consistency", limit_s: 120.0, run: engines, extra: at_least_200_instances },
    ];
    let cfg = SuiteConfig::default();
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)(&cfg);
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match &outcome {
            Err(e) => (false, format!("error: {e}")),
            Ok(results) => {
                let failed: Vec<&CheckResult> = results.iter().filter(|r| !r.passed).collect();
                let extra = (c.extra)(results);
                let mut detail = format!("{} checks, {} failed", results.len(), failed.len());
                if let Some(msg) = &extra {
                    detail.push_str(&format!(", {msg}"));
                }
                if secs > c.limit_s {
                    detail.push_str(", over time limit");
                }
                for r in failed.iter().take(5) {
                    detail.push_str(&format!("\n    {r}"));
                }
                (failed.is_empty() && !results.is_empty() && extra.is_none() && secs <= c.limit_s, detail)
            }
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {} ({:.2}s, limit {}s): {}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            secs,
            c.limit_s,
            detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

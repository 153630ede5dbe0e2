//! Acceptance criteria over seeds 1 to 5 at default settings.
//!
//! Each criterion reruns the relevant suite, applies its own bounds to the reported residuals
//! and prints one PASS or FAIL line.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ctilde::suites::{run_suite, SuiteConfig, SuiteName};
use ctilde::{Check, CheckReport};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn run(name: SuiteName, seed: u64) -> (CheckReport, Duration) {
    let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    let start = Instant::now();
    let report = run_suite(name, &cfg).unwrap_or_else(|e| panic!("{} seed {seed}: {e}", name.as_str()));
    (report, start.elapsed())
}

fn chain_length(c: &Check) -> usize {
    c.context.split_whitespace().find_map(|w| w.strip_prefix("n=")).and_then(|v| v.parse().ok()).expect("context names n")
}

#[derive(Default)]
struct Criterion {
    problems: Vec<String>,
    worst: Vec<(String, f64)>,
}

impl Criterion {
    fn fail(&mut self, msg: String) {
        self.problems.push(msg);
    }

    /// Every check under `prefix` must pass and stay below `bound`, and every `n` in `ns` must appear.
    fn bounded(&mut self, r: &CheckReport, prefix: &str, bound: f64, ns: &[usize]) {
        let hits: Vec<&Check> = r.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
        let seen: BTreeSet<usize> = hits.iter().map(|c| chain_length(c)).collect();
        for n in ns {
            if !seen.contains(n) {
                self.fail(format!("seed {}: no {prefix} checks at n={n}", r.seed));
            }
        }
        let mut worst = 0.0f64;
        for c in hits {
            worst = worst.max(c.residual);
            if !(c.pass && c.residual < bound) {
                self.fail(format!("seed {}: {} [{}] residual {:e} (bound {bound:e})", r.seed, c.name, c.context, c.residual));
            }
        }
        match self.worst.iter_mut().find(|(p, _)| p == prefix) {
            Some((_, w)) => *w = w.max(worst),
            None => self.worst.push((prefix.to_string(), worst)),
        }
    }

    /// Boolean and threshold checks under `prefix` must all pass.
    fn holds(&mut self, r: &CheckReport, prefix: &str, ns: &[usize]) {
        self.bounded(r, prefix, f64::INFINITY, ns);
    }

    /// Checks under `prefix` must have residual exactly zero.
    fn exact(&mut self, r: &CheckReport, prefix: &str, ns: &[usize]) {
        self.bounded(r, prefix, f64::MIN_POSITIVE, ns);
    }

    fn finish(self, id: usize, title: &str) -> bool {
        let ok = self.problems.is_empty();
        let margins: Vec<String> = self.worst.iter().filter(|(_, w)| w.is_finite()).map(|(p, w)| format!("{p}={w:.1e}")).collect();
        println!("criterion {id} {}: {title} [{}]", if ok { "PASS" } else { "FAIL" }, margins.join(", "));
        for p in self.problems.iter().take(20) {
            println!("    {p}");
        }
        ok
    }
}

fn algebra_and_principal_series() -> (bool, bool) {
    let ns = [2, 3, 4, 5];
    let (mut c1, mut c2) = (Criterion::default(), Criterion::default());
    for seed in SEEDS {
        let (r, took) = run(SuiteName::Algebra, seed);
        for prefix in ["algebra.rho.hecke.", "algebra.rho_hat.tl.", "algebra.omega.tl."] {
            c1.bounded(&r, prefix, 1e-9, &ns);
        }
        if took >= Duration::from_secs(30) {
            c1.fail(format!("seed {seed}: took {took:?}"));
        }
        c2.bounded(&r, "algebra.principal_series.murphy.eigen.", 1e-9, &ns);
        c2.holds(&r, "algebra.principal_series.gram_condition", &ns);
        let sets: BTreeSet<&str> = r.checks.iter().filter(|c| c.name.ends_with("gram_condition")).map(|c| c.context.as_str()).collect();
        if sets.len() != 5 * ns.len() {
            c2.fail(format!("seed {seed}: Gram condition at {} points, expected {}", sets.len(), 5 * ns.len()));
        }
    }
    (
        c1.finish(1, "Hecke and Temperley-Lieb relations for rho, rho-hat and omega, n in 2..=5"),
        c2.finish(2, "principal series eigenvector and Gram conditioning"),
    )
}

fn intertwiner() -> bool {
    let mut c = Criterion::default();
    for seed in SEEDS {
        let (r, _) = run(SuiteName::Matchmaker, seed);
        c.bounded(&r, "matchmaker.intertwiner.e", 1e-9, &[2, 3, 4]);
        c.bounded(&r, "matchmaker.omega.", 1e-9, &[2, 3, 4]);
        c.holds(&r, "matchmaker.intertwiner.det", &[2, 3, 4]);
        c.exact(&r, "matchmaker.lsum", &[1, 2, 3, 4, 5, 6]);
        c.exact(&r, "matchmaker.limit_is_nu_map", &[1, 2, 3, 4, 5, 6]);
    }
    c.finish(3, "matchmaker intertwiner, determinant, Lsum and degenerate limit")
}

fn baxter() -> bool {
    let ns = [2, 3, 4];
    let mut c = Criterion::default();
    for seed in SEEDS {
        let (r, _) = run(SuiteName::Baxter, seed);
        for prefix in ["baxter.ybe", "baxter.reflection.", "baxter.baxter.", "baxter.explicit."] {
            c.bounded(&r, prefix, 1e-9, &ns);
        }
        c.holds(&r, "baxter.cocycle.word_independence", &ns);
        c.holds(&r, "baxter.control.", &ns);
    }
    c.finish(4, "Yang-Baxter, reflection, unitarity, regularity, x -> 0 limits, cocycle words")
}

fn transfer() -> (bool, bool) {
    let (mut c5, mut c6) = (Criterion::default(), Criterion::default());
    for seed in SEEDS {
        let (r, _) = run(SuiteName::Transfer, seed);
        c5.bounded(&r, "transfer.transfer.commute", 1e-8, &[2, 3, 4]);
        c5.bounded(&r, "transfer.crossing.boundary", 1e-9, &[2, 3, 4]);
        c5.bounded(&r, "transfer.crossing.unitarity", 1e-9, &[2, 3, 4]);
        c5.bounded(&r, "transfer.interpolation.", 1e-8, &[2, 3, 4]);
        c6.bounded(&r, "transfer.hamiltonian.tl_vs_pauli", 1e-9, &[2, 3]);
        c6.bounded(&r, "transfer.hamiltonian.transfer_vs_pauli", 1e-7, &[2, 3]);
        for n in [2, 3] {
            let sets = r.checks.iter().filter(|c| c.name == "transfer.hamiltonian.tl_vs_pauli" && chain_length(c) == n).count();
            if sets != 5 {
                c6.fail(format!("seed {seed}: {sets} parameter sets at n={n}"));
            }
        }
    }
    (c5.finish(5, "transfer commutation, crossing symmetry and unitarity, interpolation"), c6.finish(6, "Hamiltonian forms agree"))
}

fn koornwinder() -> bool {
    let ns = [1, 2, 3];
    let mut c = Criterion::default();
    for seed in SEEDS {
        let (r, took) = run(SuiteName::Koornwinder, seed);
        c.exact(&r, "koornwinder.p0_is_one", &ns);
        c.exact(&r, "koornwinder.monic", &ns);
        c.bounded(&r, "koornwinder.eigen", 1e-8, &ns);
        c.bounded(&r, "koornwinder.commute", 1e-8, &ns);
        c.holds(&r, "koornwinder.hecke_eigen.fixed.", &ns);
        c.holds(&r, "koornwinder.hecke_eigen.moved.", &ns);
        // One polynomial per weight with |lambda| <= 3: 7, 25 and 63 of them.
        for (n, want) in [(1, 7), (2, 25), (3, 63)] {
            let got = r.checks.iter().filter(|c| c.name == "koornwinder.monic" && chain_length(c) == n).count();
            if got != want {
                c.fail(format!("seed {seed}: {got} weights at n={n}, expected {want}"));
            }
        }
        if took >= Duration::from_secs(60) {
            c.fail(format!("seed {seed}: took {took:?}"));
        }
    }
    c.finish(7, "Koornwinder polynomials for |lambda| <= 3, n in 1..=3")
}

fn qkz() -> bool {
    let ns = [2, 3];
    let mut c = Criterion::default();
    for seed in SEEDS {
        let (r, _) = run(SuiteName::Qkz, seed);
        c.bounded(&r, "qkz.qkz.transport.", 1e-8, &ns);
        c.bounded(&r, "qkz.qkz.invariance.", 1e-8, &ns);
        c.holds(&r, "qkz.nontrivial", &ns);
        c.holds(&r, "qkz.refusal", &ns);
        c.holds(&r, "qkz.control.perturbed", &ns);
        for n in ns {
            let ms: BTreeSet<&str> = r
                .checks
                .iter()
                .filter(|c| c.name == "qkz.refusal" && chain_length(c) == n)
                .filter_map(|c| c.context.split_whitespace().find(|w| w.starts_with("m=")))
                .collect();
            if ms != BTreeSet::from(["m=-1", "m=0", "m=1"]) {
                c.fail(format!("seed {seed}: m values {ms:?} at n={n}"));
            }
        }
    }
    c.finish(8, "reflection qKZ solutions, refusal and perturbed control")
}

fn determinism() -> bool {
    let mut c = Criterion::default();
    for name in SuiteName::MODULES {
        for seed in SEEDS {
            let a = run(name, seed).0.to_json_string();
            let b = run(name, seed).0.to_json_string();
            if a != b {
                c.fail(format!("{} seed {seed}: reports differ", name.as_str()));
            }
        }
    }
    c.finish(9, "byte-identical reports on rerun")
}

#[test]
fn acceptance_criteria() {
    let (c1, c2) = algebra_and_principal_series();
    let c3 = intertwiner();
    let c4 = baxter();
    let (c5, c6) = transfer();
    let c7 = koornwinder();
    let c8 = qkz();
    let c9 = determinism();
    let results = [c1, c2, c3, c4, c5, c6, c7, c8, c9];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

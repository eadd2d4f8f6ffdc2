use std::fmt::Write as _;

use cartan_core::bch::{involution_split, solve_bch_split, BchConfig, MAX_ORDER};
use cartan_core::benchmark::{run_benchmark, sample_seed};
use cartan_core::io::{load_matrix, load_tree, save_tree};
use cartan_core::linalg::{determinant, expm_skew, logm_special_unitary, nearest_special_unitary, unitarity_defect};
use cartan_core::metrics::random_algebra_element;
use cartan_core::{approx_error, build_kg_basis, decompose_full, haar_special_unitary, Error, FactorKind};

use crate::args::{BasisArgs, BenchArgs, CompareArgs, DecomposeArgs, Tuning, VerifyArgs};

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_SPECIAL: u8 = 3;
pub const EXIT_DECOMPOSE: u8 = 4;

/// Unitarity and determinant tolerance for K-type factors in `verify`.
const K_FACTOR_TOL: f64 = 1e-10;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::DimMismatch { .. }
            | Error::InvalidInput(_)
            | Error::BadLabel { .. }
            | Error::LevelExceedsRegister { .. } => EXIT_INPUT,
            Error::NotUnitary { .. } | Error::NotSpecial { .. } => EXIT_NOT_SPECIAL,
            _ => EXIT_DECOMPOSE,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn check_tuning(t: &Tuning) -> Result<(), Failure> {
    t.validate().map_err(|m| Failure::new(EXIT_INPUT, m))
}

fn check_n(n: usize, min: usize) -> Result<(), Failure> {
    if !(min..=8).contains(&n) {
        return Err(Failure::new(EXIT_INPUT, format!("--n must be in {min}..=8, got {n}")));
    }
    Ok(())
}

pub fn decompose(a: &DecomposeArgs) -> Outcome {
    check_tuning(&a.tuning)?;
    let (n, ingested) = load_matrix(&a.input)?;
    if n < 2 {
        return Err(Failure::new(EXIT_INPUT, format!("need at least two qubits, got n = {n}")));
    }
    let (g, removed_phase) = if a.repair {
        let (u, phase) = nearest_special_unitary(&ingested)?;
        (u, phase / ingested.nrows() as f64)
    } else {
        let defect = unitarity_defect(&ingested);
        let det_defect = (determinant(&ingested) - 1.0).norm();
        if defect > a.ingest_tol || det_defect > a.ingest_tol {
            return Err(Failure::new(
                EXIT_NOT_SPECIAL,
                format!(
                    "input is not special unitary (unitarity defect {defect:.3e}, |det - 1| {det_defect:.3e}); \
                     pass --repair to project it"
                ),
            ));
        }
        (ingested.clone(), 0.0)
    };

    let cfg = a.tuning.config();
    let mut tree = decompose_full(&g, n, &cfg)?;
    if tree.report.approx_error > cfg.tol.reconstruct {
        return Err(Failure::new(
            EXIT_DECOMPOSE,
            format!("reconstruction error {:.3e} exceeds {:.1e}", tree.report.approx_error, cfg.tol.reconstruct),
        ));
    }
    tree.phase += removed_phase;
    let vs_ingested = approx_error(&ingested, &tree)?;
    save_tree(&a.output, &tree)?;

    println!("factors       {}", tree.factors.len());
    println!("E_a           {:.3e}", tree.report.approx_error);
    if a.repair {
        println!("E_a (ingested) {vs_ingested:.3e}");
    }
    println!("wall time     {:.3} s", tree.report.wall_time);
    for (label, es) in &tree.report.subspace_errors {
        println!("E_s {label:<12} {es:.3e}");
    }
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    check_tuning(&a.tuning)?;
    let tree = load_tree(&a.tree)?;
    let (n, g) = load_matrix(&a.matrix)?;
    if n != tree.n_total {
        return Err(Failure::new(EXIT_INPUT, format!("tree is for {} qubits, matrix for {n}", tree.n_total)));
    }
    let ea = approx_error(&g, &tree)?;
    let mut ok = ea <= a.tuning.tol_reconstruct;
    println!("E_a {ea:.3e} (tol {:.1e}) {}", a.tuning.tol_reconstruct, if ea <= a.tuning.tol_reconstruct { "ok" } else { "FAIL" });
    for f in &tree.factors {
        let (what, value, tol) = match &f.kind {
            FactorKind::SubUnitary { payload, .. } | FactorKind::LastQubit { payload, .. } => {
                let d = unitarity_defect(payload).max((determinant(payload) - 1.0).norm());
                ("unitary/det", d, K_FACTOR_TOL)
            }
            FactorKind::CartanExp { .. } => ("E_s", f.subspace_error, a.tuning.tol_subspace),
            FactorKind::GlobalPhase { .. } => continue,
        };
        let pass = value <= tol;
        ok &= pass;
        println!("{:<14} {what:<12} {value:.3e} {}", f.label, if pass { "ok" } else { "FAIL" });
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

pub fn bench(a: &BenchArgs) -> Outcome {
    check_tuning(&a.tuning)?;
    check_n(a.n, 3)?;
    let cfg = a.tuning.config();
    let summary = run_benchmark(a.n, a.count, a.tuning.seed, &cfg, a.tuning.threads != 1);
    print!("{}", summary.table());
    for s in summary.samples.iter().filter(|s| s.error.is_some()) {
        eprintln!("sample {} (seed {}): {}", s.index, s.seed, s.error.as_deref().unwrap_or_default());
    }
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
        std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(if a.count > 0 && summary.failures == a.count { EXIT_DECOMPOSE } else { 0 })
}

pub fn basis(a: &BasisArgs) -> Outcome {
    check_n(a.n, 2)?;
    print!("{}", build_kg_basis(a.n)?.dump());
    Ok(0)
}

pub fn compare_bch(a: &CompareArgs) -> Outcome {
    check_tuning(&a.tuning)?;
    check_n(a.n, 3)?;
    if a.order == 0 || a.order > MAX_ORDER {
        return Err(Failure::new(EXIT_INPUT, format!("--order must be in 1..={MAX_ORDER}, got {}", a.order)));
    }
    if let Some(r) = a.radius {
        if !(r.is_finite() && r > 0.0) {
            return Err(Failure::new(EXIT_INPUT, format!("--radius must be positive, got {r}")));
        }
    }
    let basis = build_kg_basis(a.n)?;
    let bch_cfg = BchConfig { truncation_order: a.order, ..BchConfig::default() };

    let mut out = String::new();
    let _ = writeln!(out, "{:>5} {:>10} {:>12} {:>12} {:>12}", "index", "|log G|", "khk resid", "bch resid", "|dm|");
    let (mut khk_sum, mut bch_sum, mut bch_ok, mut bch_failed) = (0.0, 0.0, 0usize, 0usize);
    for i in 0..a.count {
        let seed = sample_seed(a.tuning.seed, i);
        let g = match a.radius {
            Some(r) => expm_skew(&random_algebra_element(a.n, r, seed)?)?,
            None => haar_special_unitary(a.n, seed),
        };
        let log_norm = logm_special_unitary(&g)?.norm();
        let khk = involution_split(&g, &basis, a.tuning.tol_subspace)?;
        khk_sum += khk.residual;
        let (bch_col, dm_col) = match solve_bch_split(&g, &basis, &bch_cfg) {
            Ok(s) => {
                bch_ok += 1;
                bch_sum += s.residual;
                (format!("{:.3e}", s.residual), format!("{:.3e}", (&s.m.matrix - &khk.m.matrix).norm()))
            }
            Err(e) => {
                bch_failed += 1;
                eprintln!("sample {i}: series split failed: {e}");
                ("failed".to_owned(), "-".to_owned())
            }
        };
        let _ = writeln!(out, "{i:>5} {log_norm:>10.4} {:>12.3e} {bch_col:>12} {dm_col:>12}", khk.residual);
    }
    print!("{out}");
    if a.count > 0 {
        println!("mean khk residual {:.3e}", khk_sum / a.count as f64);
        if bch_ok > 0 {
            println!("mean bch residual {:.3e} over {bch_ok} converged", bch_sum / bch_ok as f64);
        }
        println!("bch failures {bch_failed}/{}", a.count);
    }
    Ok(0)
}

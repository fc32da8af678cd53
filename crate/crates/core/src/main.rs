//! Command-line front end: convergence studies from JSON configs,
//! structural verification of the discrete complex (exactness + commuting
//! projections), interface conformity checks, and catalog inspection.
//!
//! Exit codes are the machine contract: 0 = all checks pass, 1 = a
//! verification failed (rates, residuals, jumps), 2 = usage or
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use derham::complex::{curl_2d, curl_3d, div_2d, div_3d, grad_3d, CoefficientField, SplineComplex};
use derham::convergence::{
    level_complexes, probe_commuting_residuals, run_study, study_csv, summarize, ConvergenceError,
    StudyConfig, COMMUTING_TOLERANCE, RATE_TOLERANCE,
};
use derham::geometry::{
    catalog_names, geometry_catalog, MultipatchGeometry, Orientation, Side,
};
use derham::knots::KnotVector;
use derham::multipatch::{
    build_global_space_per_patch, global_interpolant, interface_jump, validate_conformity,
    ConformityReport, GlobalField, MultipatchError,
};

const EXIT_PASS: u8 = 0;
const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Physical interface jumps above this fail the trace checks.
const JUMP_TOL: f64 = 1e-11;

/// Samples per interface direction for the jump checks.
const JUMP_SAMPLES: usize = 50;

#[derive(Parser)]
#[command(
    name = "derham",
    version,
    about = "Conforming multipatch B-spline complexes: studies and structural checks"
)]
struct Cli {
    /// Seed for randomized verification fields (also overrides a study
    /// config's seed when given).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print additional per-level and per-interface detail.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study from a JSON config; writes a CSV table and a
    /// JSON summary next to it.
    Study {
        /// Path to the study configuration (JSON).
        config: PathBuf,
        /// Output directory for the CSV and summary files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Verify discrete exactness (composite operators identically zero) and
    /// the commuting property of the projections.
    VerifyComplex {
        /// Parametric dimension (2 or 3); implied by --geometry when given.
        #[arg(long)]
        dim: Option<usize>,
        /// Tensor degree on every axis.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Number of dyadic refinement levels to check (from 2 elements).
        #[arg(long, default_value_t = 2)]
        levels: usize,
        /// Catalog geometry name (default: flat-square / unit-cube).
        #[arg(long)]
        geometry: Option<String>,
        /// Fault-injection hook: corrupt one coefficient of the first
        /// derivative before composing.
        #[arg(long, hide = true)]
        corrupt_derivative: bool,
    },
    /// Check interface conformity of a geometry and, on a conforming
    /// discretisation, the value and trace continuity of random fields.
    InterfaceCheck {
        /// Catalog name or path to a geometry JSON file.
        geometry: String,
        /// Tensor degree on every axis.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Elements per axis on every patch.
        #[arg(long, default_value_t = 2)]
        elements: usize,
        /// Per-patch element counts (comma separated) overriding --elements.
        #[arg(long, value_delimiter = ',')]
        patch_elements: Option<Vec<usize>>,
    },
    /// List the built-in geometry catalog.
    ListGeometries,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(0);
    let code = match cli.command {
        Command::Study { config, out } => cmd_study(&config, &out, cli.seed, cli.verbose),
        Command::VerifyComplex {
            dim,
            degree,
            levels,
            geometry,
            corrupt_derivative,
        } => cmd_verify_complex(dim, degree, levels, geometry, seed, corrupt_derivative),
        Command::InterfaceCheck {
            geometry,
            degree,
            elements,
            patch_elements,
        } => cmd_interface_check(&geometry, degree, elements, patch_elements, seed, cli.verbose),
        Command::ListGeometries => cmd_list_geometries(),
    };
    ExitCode::from(code)
}

fn side_name(side: Side) -> String {
    let axis = ["x", "y", "z"][side.axis()];
    let end = if side.is_max() { "max" } else { "min" };
    format!("{axis}-{end}")
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

fn conformity_lines(report: &ConformityReport) -> String {
    report
        .interfaces
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let i = &c.interface;
            let orientation = match i.orientation {
                Orientation::Same => "same",
                Orientation::Reversed => "reversed",
            };
            format!(
                "  interface {index}: patch {} {} <-> patch {} {} ({orientation}): \
                 parametrisation {}, degrees {}, knots {} -> {}",
                i.patch_a,
                side_name(i.side_a),
                i.patch_b,
                side_name(i.side_b),
                flag(c.parametrisation_match),
                flag(c.degree_match),
                flag(c.knot_match),
                if c.pass() { "pass" } else { "FAIL" },
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

fn cmd_study(config_path: &Path, out: &Path, seed: Option<u64>, verbose: bool) -> u8 {
    let text = match fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read `{}`: {e}", config_path.display());
            return EXIT_CONFIG;
        }
    };
    let mut config: StudyConfig = match serde_json::from_str(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("cannot parse `{}`: {e}", config_path.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    println!(
        "study: geometry {} role {} degrees {:?} solution {} projector {}",
        config.geometry, config.role, config.degrees, config.solution, config.projector
    );

    let records = match run_study(&config) {
        Ok(records) => records,
        Err(e) => {
            eprintln!("configuration error: {e}");
            if let ConvergenceError::Multipatch(MultipatchError::NonConforming { .. }) = e {
                if let (Ok(geom), Ok(complexes)) = (
                    geometry_catalog(&config.geometry),
                    level_complexes(&config, 0),
                ) {
                    if let Ok(report) = validate_conformity(&geom, &complexes) {
                        eprintln!("conformity report:\n{}", conformity_lines(&report));
                    }
                }
            }
            return EXIT_CONFIG;
        }
    };
    let summary = match summarize(&config, &records) {
        Ok(summary) => summary,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };

    let csv = study_csv(&config, &records);
    if verbose {
        print!("{csv}");
    } else {
        for record in &records {
            println!(
                "  level {}: h = {:.4e}, errors {:?}",
                record.level,
                record.h,
                record
                    .errors
                    .iter()
                    .map(|e| format!("{e:.4e}"))
                    .collect::<Vec<_>>()
            );
        }
    }
    for (k, norm) in config.norms.iter().enumerate() {
        match (summary.final_rates[k], summary.expected_orders[k]) {
            (rate, Some(order)) => println!(
                "  {norm}: final rate {rate}, expected {order:.2} +/- {RATE_TOLERANCE} -> {}",
                match summary.norm_pass[k] {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "exact (errors at rounding level)",
                }
            ),
            (rate, None) => println!("  {norm}: final rate {rate} (no expected order attached)"),
        }
    }
    println!(
        "  commuting residual max {:.3e} (tolerance {COMMUTING_TOLERANCE:.0e}) -> {}",
        summary.max_commuting_residual,
        if summary.commuting_pass { "pass" } else { "FAIL" }
    );
    if let (Some(optimal), Some(ratio)) =
        (summary.projection_optimal, summary.max_projection_ratio)
    {
        println!(
            "  projection comparison: optimal on every level = {optimal}, \
             max interpolant/projection ratio = {ratio:.3}"
        );
    }

    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("cannot create output directory `{}`: {e}", out.display());
        return EXIT_CONFIG;
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "study".to_string());
    let csv_path = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}-summary.json"));
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Err(e) = fs::write(&csv_path, csv) {
        eprintln!("cannot write `{}`: {e}", csv_path.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = fs::write(&json_path, json) {
        eprintln!("cannot write `{}`: {e}", json_path.display());
        return EXIT_CONFIG;
    }
    println!(
        "  wrote {} and {}",
        csv_path.display(),
        json_path.display()
    );
    if summary.pass {
        println!("STUDY: PASS");
        EXIT_PASS
    } else {
        println!("STUDY: FAIL");
        EXIT_VERIFY_FAIL
    }
}

// ---------------------------------------------------------------------------
// verify-complex
// ---------------------------------------------------------------------------

/// Random coefficients of the form k/2²⁰ — exactly representable, so the
/// composite derivative operators must return exact zeros on them.
fn random_dyadic_field(cx: &SplineComplex, role: usize, rng: &mut ChaCha8Rng) -> CoefficientField {
    let space = cx.role(role).expect("role validated").clone();
    let data = (0..space.num_components())
        .map(|c| {
            (0..space.component_dim(c).expect("component in range"))
                .map(|_| rng.random_range(-(1 << 20)..(1 << 20)) as f64 / (1 << 20) as f64)
                .collect()
        })
        .collect();
    CoefficientField::new(space, data).expect("shapes match")
}

/// Adds 0.5 to the first coefficient — the fault-injection hook.
fn corrupt(field: &CoefficientField) -> CoefficientField {
    let space = field.space().clone();
    let mut data: Vec<Vec<f64>> = (0..space.num_components())
        .map(|c| field.component(c).to_vec())
        .collect();
    data[0][0] += 0.5;
    CoefficientField::new(space, data).expect("shapes unchanged")
}

fn cmd_verify_complex(
    dim: Option<usize>,
    degree: usize,
    levels: usize,
    geometry: Option<String>,
    seed: u64,
    corrupt_derivative: bool,
) -> u8 {
    let name = match (&geometry, dim) {
        (Some(name), _) => name.clone(),
        (None, Some(3)) => "unit-cube".to_string(),
        (None, None | Some(2)) => "flat-square".to_string(),
        (None, Some(d)) => {
            eprintln!("--dim must be 2 or 3, got {d}");
            return EXIT_CONFIG;
        }
    };
    let geom = match geometry_catalog(&name) {
        Ok(geom) => geom,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let geom_dim = geom.parametric_dim();
    if let Some(d) = dim {
        if d != geom_dim {
            eprintln!("--dim {d} does not match geometry `{name}` ({geom_dim}D)");
            return EXIT_CONFIG;
        }
    }
    if levels == 0 {
        eprintln!("--levels must be at least 1");
        return EXIT_CONFIG;
    }
    let degrees = vec![degree; geom_dim];
    println!(
        "verify-complex: geometry {name}, degrees {degrees:?}, {levels} level(s), seed {seed}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_pass = true;

    for level in 0..levels {
        let elements = 2usize << level;
        let knots: Vec<KnotVector> = degrees
            .iter()
            .map(|&p| KnotVector::open_uniform(p, elements))
            .collect();
        let cx = match SplineComplex::new(&degrees, knots.clone()) {
            Ok(cx) => cx,
            Err(e) => {
                eprintln!("configuration error: {e}");
                return EXIT_CONFIG;
            }
        };
        println!("level {level} ({elements} elements/axis):");

        // Exactness: composites of consecutive derivatives on random
        // dyadic coefficients must vanish exactly.
        let mut checks: Vec<(&str, f64)> = Vec::new();
        if geom_dim == 2 {
            let mut residual = 0.0f64;
            for _ in 0..10 {
                let f = random_dyadic_field(&cx, 0, &mut rng);
                let mut d = curl_2d(&f).expect("role 0 has a curl");
                if corrupt_derivative {
                    d = corrupt(&d);
                }
                residual = residual.max(div_2d(&d).expect("role 1 has a div").max_abs());
            }
            checks.push(("div.curl", residual));
        } else {
            let mut residual = 0.0f64;
            for _ in 0..10 {
                let f = random_dyadic_field(&cx, 0, &mut rng);
                let mut d = grad_3d(&f).expect("role 0 has a grad");
                if corrupt_derivative {
                    d = corrupt(&d);
                }
                residual = residual.max(curl_3d(&d).expect("role 1 has a curl").max_abs());
            }
            checks.push(("curl.grad", residual));
            let mut residual = 0.0f64;
            for _ in 0..10 {
                let u = random_dyadic_field(&cx, 1, &mut rng);
                let mut d = curl_3d(&u).expect("role 1 has a curl");
                if corrupt_derivative {
                    d = corrupt(&d);
                }
                residual = residual.max(div_3d(&d).expect("role 2 has a div").max_abs());
            }
            checks.push(("div.curl", residual));
        }
        for (label, residual) in checks {
            let pass = residual == 0.0;
            all_pass &= pass;
            println!(
                "  exactness {label}: max |residual| = {residual:.3e} over 10 random fields -> {}",
                if pass { "pass" } else { "FAIL" }
            );
        }

        // Commuting property of the projections on this mesh.
        match probe_commuting_residuals(&geom, &degrees, &knots) {
            Ok(residuals) => {
                let names: &[&str] = if geom_dim == 2 {
                    &["curl", "div"]
                } else {
                    &["grad", "curl", "div"]
                };
                for (pair, &r) in residuals.iter().enumerate() {
                    let pass = r < COMMUTING_TOLERANCE;
                    all_pass &= pass;
                    println!(
                        "  commuting ({}): residual {r:.3e} (tolerance {COMMUTING_TOLERANCE:.0e}) -> {}",
                        names[pair],
                        if pass { "pass" } else { "FAIL" }
                    );
                }
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if all_pass {
        println!("VERIFY: PASS");
        EXIT_PASS
    } else {
        println!("VERIFY: FAIL");
        EXIT_VERIFY_FAIL
    }
}

// ---------------------------------------------------------------------------
// interface-check
// ---------------------------------------------------------------------------

fn load_geometry(arg: &str) -> Result<MultipatchGeometry, String> {
    let path = Path::new(arg);
    if path.exists() {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read `{arg}`: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("cannot parse `{arg}`: {e}"))
    } else {
        geometry_catalog(arg).map_err(|e| e.to_string())
    }
}

fn cmd_interface_check(
    geometry: &str,
    degree: usize,
    elements: usize,
    patch_elements: Option<Vec<usize>>,
    seed: u64,
    verbose: bool,
) -> u8 {
    let geom = match load_geometry(geometry) {
        Ok(geom) => geom,
        Err(message) => {
            eprintln!("{message}");
            return EXIT_CONFIG;
        }
    };
    let dim = geom.parametric_dim();
    let n = geom.num_patches();
    let counts = patch_elements.unwrap_or_else(|| vec![elements; n]);
    if counts.len() != n {
        eprintln!(
            "--patch-elements must list one count per patch ({n}), got {}",
            counts.len()
        );
        return EXIT_CONFIG;
    }
    let degrees = vec![degree; dim];
    let complexes: Vec<SplineComplex> = match counts
        .iter()
        .map(|&el| {
            let knots: Vec<KnotVector> = degrees
                .iter()
                .map(|&p| KnotVector::open_uniform(p, el))
                .collect();
            SplineComplex::new(&degrees, knots)
        })
        .collect::<Result<_, _>>()
    {
        Ok(complexes) => complexes,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };

    println!(
        "interface-check: {geometry} ({dim}D, {n} patch(es), {} interface(s)), degrees {degrees:?}, seed {seed}",
        geom.interfaces().len()
    );
    if geom.interfaces().is_empty() {
        println!("no interfaces to check");
        println!("INTERFACES: PASS");
        return EXIT_PASS;
    }

    let report = match validate_conformity(&geom, &complexes) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    println!("{}", conformity_lines(&report));
    if !report.all_pass() {
        println!(
            "conformity: {} of {} interfaces FAIL",
            report.failed_count(),
            report.interfaces.len()
        );
        println!("INTERFACES: FAIL");
        return EXIT_VERIFY_FAIL;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_pass = true;

    // Value continuity: the global interpolant of a random smooth physical
    // scalar must have no jumps.
    let amplitude: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.5..1.5));
    let phase: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
    let f = move |p: [f64; 3]| -> f64 {
        (0..3)
            .map(|i| amplitude[i] * (std::f64::consts::PI * p[i] + phase[i]).sin())
            .sum()
    };
    let mut check_role = |role: usize, label: &str| -> bool {
        let space = match build_global_space_per_patch(&geom, role, complexes.clone()) {
            Ok(space) => space,
            Err(e) => {
                eprintln!("configuration error: {e}");
                return false;
            }
        };
        let field = if role == 0 {
            match global_interpolant(&space, |patch, _, x| f(geom.patches()[patch].eval(x))) {
                Ok(field) => field,
                Err(e) => {
                    eprintln!("interpolation failed: {e}");
                    return false;
                }
            }
        } else {
            // Random conforming discrete field: global coefficients are
            // continuous across interfaces by construction; the physical
            // trace check below is the independent confirmation.
            let coefficients = (0..space.global_dim())
                .map(|_| rng.random_range(-(1 << 20)..(1 << 20)) as f64 / (1 << 20) as f64)
                .collect();
            GlobalField::new(space, coefficients).expect("coefficient count matches")
        };
        let mut worst = 0.0f64;
        for index in 0..geom.interfaces().len() {
            match interface_jump(&field, index, JUMP_SAMPLES) {
                Ok(Some(jump)) => {
                    worst = worst.max(jump);
                    if verbose {
                        println!("    interface {index}: {label} jump {jump:.3e}");
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    eprintln!("jump evaluation failed: {e}");
                    return false;
                }
            }
        }
        let pass = worst < JUMP_TOL;
        println!(
            "  {label}: max jump {worst:.3e} over {} interfaces x {JUMP_SAMPLES} samples \
             (tolerance {JUMP_TOL:.0e}) -> {}",
            geom.interfaces().len(),
            if pass { "pass" } else { "FAIL" }
        );
        pass
    };

    all_pass &= check_role(0, "value trace (role 0)");
    if dim == 2 {
        all_pass &= check_role(1, "normal trace (role 1)");
    } else {
        all_pass &= check_role(1, "tangential trace (role 1)");
        all_pass &= check_role(2, "normal trace (role 2)");
    }

    if all_pass {
        println!("INTERFACES: PASS");
        EXIT_PASS
    } else {
        println!("INTERFACES: FAIL");
        EXIT_VERIFY_FAIL
    }
}

// ---------------------------------------------------------------------------
// list-geometries
// ---------------------------------------------------------------------------

fn cmd_list_geometries() -> u8 {
    for name in catalog_names() {
        match geometry_catalog(name) {
            Ok(geom) => println!(
                "{name}: {}D, {} patch(es), {} interface(s)",
                geom.parametric_dim(),
                geom.num_patches(),
                geom.interfaces().len()
            ),
            Err(e) => {
                eprintln!("catalog entry `{name}` failed to build: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    EXIT_PASS
}

//! Batch command-line surface for the `timarg` toolkit.
//!
//! Every subcommand reads JSON files, performs one exact computation, prints
//! a short human-readable verdict on stdout, and optionally writes a JSON or
//! CSV artifact with `-o`.  Exit codes are uniform across subcommands:
//!
//! * `0` — success (feasible / true / witness found / artifact written)
//! * `1` — negative verdict (infeasible / false / violation / nothing found)
//! * `2` — input or usage error
//! * `3` — resource budget exceeded
//!
//! All rational numbers in files are `"p/q"` strings; the only floating
//! point output is the `kari-curve` CSV.  Identical inputs and seeds produce
//! byte-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use timarg::exactlp::{verify_certificate, Certificate, CertificateKind};
use timarg::exactsets::{
    check_d2_nn, check_d2_nnn, check_d3_nn, check_reflection_ti, generate_library, LibraryCase,
    ReflectionSpec, VertexLibrary,
};
use timarg::hierarchy::{
    energy_bounds_with_budget, square_feasible_with_budget, square_program_with_budget,
    strip_feasible_with_budget, strip_program_with_budget, Hamiltonian,
};
use timarg::lattice::{pair_table, symmetrize_pattern, Distribution, MarginalSpec, Pattern, Region};
use timarg::polytope::{marginal_symmetry_group, project_lti_seeded, quotient_classes};
use timarg::rat::{format_rat, rat, rat_to_f64, Rat};
use timarg::tiling::{
    curve_point, is_valid_tiling, kari_alphabet, kari_left_vector_set, kari_tile_identity,
    orbit_witnesses, periodic_tiling_search_with_budget, rotation_example_point,
    rule_to_hamiltonian, KariSystem, TilingRule, WrapMode,
};
use timarg::{Error, Result};

/// Exact lattice marginals, energies, polytopes, and tilings.
#[derive(Parser)]
#[command(name = "timarg", version, about, max_term_width = 100)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Seed for randomized probe objectives (where applicable).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resource budget (LP variables / enumeration steps).
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Re-check results through independent verification paths.
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide level-n relaxation feasibility of a marginal specification.
    ///
    /// Reads a marginal-spec JSON; prints `feasible` or `infeasible`; with
    /// `-o`, writes the supporting certificate (a feasible strip point or
    /// refuting multipliers) as JSON.
    MarginalCheck {
        /// Marginal specification JSON file.
        spec: PathBuf,
        /// Relaxation level (strip width).
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Use the square relaxation instead of the strip.
        #[arg(long)]
        square: bool,
        /// Write the certificate JSON here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Bracket the minimum energy per site of a lattice Hamiltonian.
    ///
    /// Prints the certified lower bound (level-n relaxation) and the best
    /// periodic upper bound with its witness size; with `-o`, writes bounds
    /// and witness pattern as JSON.
    Energy {
        /// Hamiltonian JSON file.
        hamiltonian: PathBuf,
        /// Relaxation level for the lower bound.
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Maximum period for the upper-bound pattern search.
        #[arg(long, default_value_t = 2)]
        max_period: usize,
        /// Write bounds + witness JSON here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide an exactly solved family case in closed form.
    ///
    /// Cases `d2-nn`, `d2-nnn`, `d3-nn` read a marginal-spec JSON holding
    /// the required pair tables; case `reflection` reads a distribution
    /// JSON on the two-row window.  Prints `verdict true` or
    /// `verdict false`.
    Exact {
        /// One of: d2-nn, d2-nnn, d3-nn, reflection.
        #[arg(long)]
        case: String,
        /// Input JSON file (marginal spec, or window distribution).
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate marginal-polytope vertices and their symmetry classes.
    ///
    /// With `--case`, reports the embedded exact library (d2-nn, d2-nnn,
    /// d3-nn) and can regenerate it from scratch under `--verify`.  With
    /// `--d`/`--strip`/`--targets`, projects the translation-invariant
    /// strip onto the chosen pair marginals.  `-o` writes the library or
    /// polytope JSON.
    Vertices {
        /// Embedded library case: d2-nn, d2-nnn, or d3-nn.
        #[arg(long, conflicts_with_all = ["d", "strip", "targets"])]
        case: Option<String>,
        /// Local dimension for a raw strip projection.
        #[arg(long, requires = "strip")]
        d: Option<usize>,
        /// Strip width and height, e.g. `--strip 2 2`.
        #[arg(long, num_args = 2, value_names = ["N", "T"], requires = "d")]
        strip: Option<Vec<usize>>,
        /// Comma-separated target pair regions out of h,v,plus,minus.
        #[arg(long, value_delimiter = ',', default_values_t = [String::from("h"), String::from("v")])]
        targets: Vec<String>,
        /// Write library / polytope JSON here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a tile grid against an adjacency rule.
    ///
    /// Prints `valid` or the first violation; `--torus` also checks the
    /// wrapped pairs.
    TilingCheck {
        /// Tiling rule JSON file.
        rule: PathBuf,
        /// Grid (pattern) JSON file.
        grid: PathBuf,
        /// Check wrapped adjacencies as well (torus convention).
        #[arg(long)]
        torus: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Encode a tiling rule as pair-interaction energy tables.
    ///
    /// The indicator form has per-site maximum 2 exactly when the rule
    /// admits a tiling; `--form min` writes the negated tables used with
    /// the minimising solvers.
    TilingReduce {
        /// Tiling rule JSON file.
        rule: PathBuf,
        /// Which encoding to emit: `max` (indicators) or `min` (negated).
        #[arg(long, default_value = "max")]
        form: String,
        /// Write the Hamiltonian JSON here (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a periodic (torus-valid) tiling up to a period bound.
    ///
    /// Exit 0 with the witness when found; exit 1 when the search space is
    /// exhausted without one (which proves nothing about larger periods);
    /// exit 3 when the placement budget ran out first.
    TilingSearch {
        /// Tiling rule JSON file.
        rule: PathBuf,
        /// Largest period to try in each direction.
        #[arg(long, default_value_t = 3)]
        max_period: usize,
        /// Write the witness pattern JSON here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate the tile alphabet of a piecewise-affine system.
    ///
    /// Prints the tile count; with `-o`, writes the full alphabet as a JSON
    /// array of tiles with `"p/q"` rational edge labels.
    KariGen {
        /// System JSON file (matrix, offset, unit-square regions).
        system: Option<PathBuf>,
        /// Use the built-in rotation example system instead of a file.
        #[arg(long, conflicts_with = "system")]
        builtin: bool,
        /// Write the alphabet JSON here.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the analytic density curve against sampled orbit averages.
    ///
    /// Emits CSV `mu,omega,eta,omega_sampled,eta_sampled`: the curve at
    /// evenly spaced parameters, next to exact orbit averages over `--rows`
    /// rows from rational starting points at distance mu from the rotation
    /// centre.  The one floating-point artifact in the toolkit.
    KariCurve {
        /// Number of parameter steps across the curve's domain.
        #[arg(long, default_value_t = 8)]
        mu_samples: usize,
        /// Orbit rows averaged per sample.
        #[arg(long, default_value_t = 200)]
        rows: usize,
        /// Write the CSV here (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrize a periodic pattern into an exact marginal specification.
    ///
    /// Averages the pattern over all its cyclic shifts and reads off the
    /// joint distribution on each target region.
    Symmetrize {
        /// Pattern JSON file.
        pattern: PathBuf,
        /// Comma-separated target regions out of h,v,plus,minus.
        #[arg(long, value_delimiter = ',',
              default_values_t = ["h", "v", "plus", "minus"].map(String::from))]
        targets: Vec<String>,
        /// Write the marginal-spec JSON here (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

// ---------------------------------------------------------------------------
// Serialization helpers (CLI output schemas)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CertificateOut {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    primal_point: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dual_multipliers: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ray: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective_value: Option<String>,
}

impl From<&Certificate> for CertificateOut {
    fn from(cert: &Certificate) -> CertificateOut {
        let strings = |v: &Option<Vec<Rat>>| {
            v.as_ref()
                .map(|xs| xs.iter().map(format_rat).collect::<Vec<_>>())
        };
        CertificateOut {
            kind: match cert.kind {
                CertificateKind::Feasible => "feasible",
                CertificateKind::Infeasible => "infeasible",
                CertificateKind::Optimal => "optimal",
                CertificateKind::Unbounded => "unbounded",
            },
            primal_point: strings(&cert.primal_point),
            dual_multipliers: strings(&cert.dual_multipliers),
            ray: strings(&cert.ray),
            objective_value: cert.objective_value.as_ref().map(format_rat),
        }
    }
}

#[derive(Serialize)]
struct BoundsOut {
    lower: String,
    upper: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Pattern>,
    partial: bool,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::structural(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::structural(format!("{}: invalid {what}: {e}", path.display())))
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::structural(format!("cannot write {}: {e}", path.display())))
}

/// Write to the file when a path is given, otherwise print to stdout.
fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_target(name: &str) -> Result<Region> {
    match name {
        "h" => Ok(Region::pair_h()),
        "v" => Ok(Region::pair_v()),
        "plus" => Ok(Region::pair_plus()),
        "minus" => Ok(Region::pair_minus()),
        other => Err(Error::structural(format!(
            "unknown target region `{other}` (expected h, v, plus, or minus)"
        ))),
    }
}

fn parse_targets(names: &[String]) -> Result<Vec<Region>> {
    names.iter().map(|n| parse_target(n)).collect()
}

fn table_for(spec: &MarginalSpec, region: Region, name: &str) -> Result<Vec<Vec<Rat>>> {
    let dist = spec.entry(&region).ok_or_else(|| {
        Error::structural(format!("specification lacks an entry for the `{name}` pair"))
    })?;
    pair_table(dist)
}

// ---------------------------------------------------------------------------
// Subcommand bodies (each returns the process exit code)
// ---------------------------------------------------------------------------

fn run_marginal_check(
    spec_path: &Path,
    level: usize,
    square: bool,
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    let spec: MarginalSpec = read_json(spec_path, "marginal specification")?;
    let cert = if square {
        square_feasible_with_budget(&spec, level, common.budget)?
    } else {
        strip_feasible_with_budget(&spec, level, common.budget)?
    };
    if common.verify {
        let program = if square {
            square_program_with_budget(&spec, level, common.budget)?
        } else {
            strip_program_with_budget(&spec, level, common.budget)?
        };
        if !verify_certificate(&program.lp, &cert) {
            return Err(Error::structural(
                "certificate failed independent verification",
            ));
        }
    }
    if let Some(path) = output {
        write_text(path, &to_pretty_json(&CertificateOut::from(&cert)))?;
    }
    Ok(match cert.kind {
        CertificateKind::Infeasible => {
            println!("infeasible");
            1
        }
        _ => {
            println!("feasible");
            0
        }
    })
}

fn run_energy(
    ham_path: &Path,
    level: usize,
    max_period: usize,
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    let h: Hamiltonian = read_json(ham_path, "Hamiltonian")?;
    let bounds = energy_bounds_with_budget(&h, level, max_period, common.budget)?;
    if common.verify {
        if bounds.lower > bounds.upper {
            return Err(Error::structural("bounds crossed on re-check"));
        }
        if let Some(witness) = &bounds.witness_pattern {
            if h.pattern_energy(witness)? != bounds.upper {
                return Err(Error::structural(
                    "witness energy does not reproduce the upper bound",
                ));
            }
        }
    }
    println!("lower {}", format_rat(&bounds.lower));
    println!("upper {}", format_rat(&bounds.upper));
    if bounds.partial {
        println!("partial: search budget exhausted before covering all periods");
    }
    if let Some(path) = output {
        let out = BoundsOut {
            lower: format_rat(&bounds.lower),
            upper: format_rat(&bounds.upper),
            witness: bounds.witness_pattern.clone(),
            partial: bounds.partial,
        };
        write_text(path, &to_pretty_json(&out))?;
    }
    Ok(0)
}

fn run_exact(case: &str, input: &Path, common: &Common) -> Result<u8> {
    let verdict = match case.replace('-', "_").as_str() {
        "d2_nn" => {
            let spec: MarginalSpec = read_json(input, "marginal specification")?;
            let tables = vec![
                table_for(&spec, Region::pair_h(), "h")?,
                table_for(&spec, Region::pair_v(), "v")?,
            ];
            let verdict = check_d2_nn(&tables, 2)?;
            if common.verify {
                verify_against_strip(&spec, verdict, common.budget)?;
            }
            verdict
        }
        "d2_nnn" => {
            let spec: MarginalSpec = read_json(input, "marginal specification")?;
            let verdict = check_d2_nnn(
                &table_for(&spec, Region::pair_h(), "h")?,
                &table_for(&spec, Region::pair_v(), "v")?,
                &table_for(&spec, Region::pair_plus(), "plus")?,
                &table_for(&spec, Region::pair_minus(), "minus")?,
            )?;
            if common.verify {
                verify_against_strip(&spec, verdict, common.budget)?;
            }
            verdict
        }
        "d3_nn" => {
            let spec: MarginalSpec = read_json(input, "marginal specification")?;
            let verdict = check_d3_nn(
                &table_for(&spec, Region::pair_h(), "h")?,
                &table_for(&spec, Region::pair_v(), "v")?,
            )?;
            if common.verify {
                verify_against_strip(&spec, verdict, common.budget)?;
            }
            verdict
        }
        "reflection" => {
            let q: Distribution = read_json(input, "window distribution")?;
            let spec = ReflectionSpec::new(q)?;
            check_reflection_ti(&spec)?
        }
        other => {
            return Err(Error::structural(format!(
                "unknown case `{other}` (expected d2-nn, d2-nnn, d3-nn, or reflection)"
            )))
        }
    };
    println!("verdict {verdict}");
    Ok(if verdict { 0 } else { 1 })
}

/// Cross-check a closed-form verdict against the level-2 strip relaxation,
/// which is exact for the solved pair families.
fn verify_against_strip(spec: &MarginalSpec, verdict: bool, budget: u64) -> Result<()> {
    let cert = strip_feasible_with_budget(spec, 2, budget)?;
    let feasible = cert.kind != CertificateKind::Infeasible;
    if feasible != verdict {
        return Err(Error::structural(
            "closed-form verdict disagrees with the level-2 relaxation",
        ));
    }
    Ok(())
}

fn class_size_line(library: &VertexLibrary) -> String {
    let sizes: Vec<String> = library
        .class_labels
        .iter()
        .map(|label| {
            library
                .vertices
                .iter()
                .filter(|v| &v.label == label)
                .count()
                .to_string()
        })
        .collect();
    sizes.join(" ")
}

fn run_vertices(
    case: &Option<String>,
    d: &Option<usize>,
    strip: &Option<Vec<usize>>,
    targets: &[String],
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    if let Some(name) = case {
        let case = LibraryCase::from_name(name)?;
        let library = VertexLibrary::get(case);
        if common.verify {
            let regenerated = generate_library(case, common.seed, common.budget)?;
            if &regenerated != library {
                return Err(Error::structural(
                    "regenerated library disagrees with the embedded one",
                ));
            }
            println!("verified: regeneration matches embedded library");
        }
        println!(
            "{} vertices in {} classes",
            library.vertices.len(),
            library.class_labels.len()
        );
        println!("class sizes: {}", class_size_line(library));
        if let Some(path) = output {
            write_text(path, &library.to_json())?;
        }
        return Ok(0);
    }
    let (Some(d), Some(strip)) = (d, strip) else {
        return Err(Error::structural(
            "pass either --case NAME or --d D --strip N T",
        ));
    };
    let regions = parse_targets(targets)?;
    let projection =
        project_lti_seeded(*d, (strip[0], strip[1]), &regions, common.seed, common.budget)?;
    let polytope = projection.polytope;
    let vertex_count = polytope
        .v_rep
        .as_ref()
        .map(|v| v.len())
        .unwrap_or_default();
    let group = marginal_symmetry_group(*d, &regions)?;
    let classes = quotient_classes(&polytope, &group)?;
    println!("{} vertices in {} classes", vertex_count, classes.len());
    let sizes: Vec<String> = classes.iter().map(|c| c.members.len().to_string()).collect();
    println!("class sizes: {}", sizes.join(" "));
    if let Some(path) = output {
        write_text(path, &polytope.to_json())?;
    }
    Ok(0)
}

fn run_tiling_check(rule_path: &Path, grid_path: &Path, torus: bool) -> Result<u8> {
    let rule: TilingRule = read_json(rule_path, "tiling rule")?;
    let grid: Pattern = read_json(grid_path, "grid pattern")?;
    let wrap = if torus { WrapMode::Torus } else { WrapMode::Open };
    match is_valid_tiling(&rule, &grid, wrap)? {
        None => {
            println!("valid");
            Ok(0)
        }
        Some(v) => {
            let direction = if v.horizontal { "horizontal" } else { "vertical" };
            println!(
                "violation at ({}, {}): pair ({}, {}) {direction}",
                v.site.0, v.site.1, v.pair.0, v.pair.1
            );
            Ok(1)
        }
    }
}

fn run_tiling_reduce(rule_path: &Path, form: &str, output: &Option<PathBuf>) -> Result<u8> {
    let rule: TilingRule = read_json(rule_path, "tiling rule")?;
    let forms = rule_to_hamiltonian(&rule)?;
    let chosen = match form {
        "max" => forms.maximizing,
        "min" => forms.minimizing,
        other => {
            return Err(Error::structural(format!(
                "unknown form `{other}` (expected max or min)"
            )))
        }
    };
    emit(output, &to_pretty_json(&chosen))?;
    Ok(0)
}

fn run_tiling_search(
    rule_path: &Path,
    max_period: usize,
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    let rule: TilingRule = read_json(rule_path, "tiling rule")?;
    let search = periodic_tiling_search_with_budget(&rule, max_period, common.budget)?;
    match search.witness {
        Some(witness) => {
            if common.verify {
                if is_valid_tiling(&rule, &witness, WrapMode::Torus)?.is_some() {
                    return Err(Error::structural("witness failed re-validation"));
                }
            }
            println!("witness {}x{}", witness.width(), witness.height());
            if let Some(path) = output {
                write_text(path, &to_pretty_json(&witness))?;
            }
            Ok(0)
        }
        None if search.partial => {
            println!("no witness before the budget ran out (search incomplete)");
            Ok(3)
        }
        None => {
            println!("no periodic tiling up to period {max_period}");
            Ok(1)
        }
    }
}

fn run_kari_gen(
    system_path: &Option<PathBuf>,
    builtin: bool,
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    let system = match (system_path, builtin) {
        (Some(path), false) => read_json(path, "affine tile system")?,
        (None, true) => KariSystem::rotation_example(),
        _ => {
            return Err(Error::structural(
                "pass a system JSON file or --builtin (not both)",
            ))
        }
    };
    let tiles = kari_alphabet(&system);
    if common.verify {
        let carries: std::collections::BTreeSet<(Rat, Rat)> = kari_left_vector_set(&system)
            .into_iter()
            .map(|l| (l[0].clone(), l[1].clone()))
            .collect();
        let corners = system.corner_union();
        for tile in &tiles {
            let ok = kari_tile_identity(&system, tile)
                && system.region_corners(tile.region).contains(&tile.top)
                && corners.contains(&tile.bottom)
                && carries.contains(&(tile.left[0].clone(), tile.left[1].clone()))
                && carries.contains(&(tile.right[0].clone(), tile.right[1].clone()));
            if !ok {
                return Err(Error::structural(
                    "alphabet tile failed invariant re-checks",
                ));
            }
        }
    }
    println!("{}", tiles.len());
    if let Some(path) = output {
        write_text(path, &to_pretty_json(&tiles))?;
    }
    Ok(0)
}

fn run_kari_curve(mu_samples: usize, rows: usize, output: &Option<PathBuf>) -> Result<u8> {
    if mu_samples == 0 || rows == 0 {
        return Err(Error::structural(
            "--mu-samples and --rows must be positive",
        ));
    }
    let system = KariSystem::rotation_example();
    let mut csv = String::from("mu,omega,eta,omega_sampled,eta_sampled\n");
    for j in 0..=mu_samples {
        // mu runs over [1/5, 2/5] in exact rational steps.
        let mu = rat(1, 5) + rat(j as i64, 5 * mu_samples as i64);
        let mu_f = rat_to_f64(&mu);
        let (omega, eta) = curve_point(mu_f)?;
        let start = rotation_example_point(&mu);
        let (omega_s, eta_s) = orbit_witnesses(&system, &start, rows)?;
        csv.push_str(&format!(
            "{mu_f},{omega},{eta},{},{}\n",
            rat_to_f64(&omega_s),
            rat_to_f64(&eta_s)
        ));
    }
    emit(output, &csv)?;
    Ok(0)
}

fn run_symmetrize(
    pattern_path: &Path,
    targets: &[String],
    output: &Option<PathBuf>,
    common: &Common,
) -> Result<u8> {
    let pattern: Pattern = read_json(pattern_path, "pattern")?;
    let regions = parse_targets(targets)?;
    let spec = symmetrize_pattern(&pattern, &regions)?;
    if common.verify {
        // Symmetrized specs are true marginals, so every level must accept.
        let cert = strip_feasible_with_budget(&spec, 2, common.budget)?;
        if cert.kind == CertificateKind::Infeasible {
            return Err(Error::structural(
                "symmetrized spec rejected by the level-2 relaxation",
            ));
        }
    }
    emit(output, &to_pretty_json(&spec))?;
    Ok(0)
}

fn dispatch(cli: CliArgs) -> Result<u8> {
    match &cli.command {
        Command::MarginalCheck {
            spec,
            level,
            square,
            output,
            common,
        } => run_marginal_check(spec, *level, *square, output, common),
        Command::Energy {
            hamiltonian,
            level,
            max_period,
            output,
            common,
        } => run_energy(hamiltonian, *level, *max_period, output, common),
        Command::Exact {
            case,
            input,
            common,
        } => run_exact(case, input, common),
        Command::Vertices {
            case,
            d,
            strip,
            targets,
            output,
            common,
        } => run_vertices(case, d, strip, targets, output, common),
        Command::TilingCheck {
            rule,
            grid,
            torus,
            common: _,
        } => run_tiling_check(rule, grid, *torus),
        Command::TilingReduce {
            rule,
            form,
            output,
            common: _,
        } => run_tiling_reduce(rule, form, output),
        Command::TilingSearch {
            rule,
            max_period,
            output,
            common,
        } => run_tiling_search(rule, *max_period, output, common),
        Command::KariGen {
            system,
            builtin,
            output,
            common,
        } => run_kari_gen(system, *builtin, output, common),
        Command::KariCurve {
            mu_samples,
            rows,
            output,
            common: _,
        } => run_kari_curve(*mu_samples, *rows, output),
        Command::Symmetrize {
            pattern,
            targets,
            output,
            common,
        } => run_symmetrize(pattern, targets, output, common),
    }
}

fn main() -> ExitCode {
    let cli = CliArgs::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Resource(_) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

//! Python bindings for the exact translation-invariant marginal toolkit.
//!
//! The module mirrors the CLI surface with a thin, JSON-friendly calling
//! convention: rationals cross the boundary as `"p/q"` strings, structured
//! values (marginal specifications, Hamiltonians, certificates, vertex
//! libraries) as the same JSON documents the command-line tools read and
//! write, and patterns as nested lists of small integers.  All arithmetic
//! stays exact on the Rust side; nothing is rounded on the way through.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::json;

use timarg::exactlp::{
    solve, solve_feasibility, verify_certificate, Certificate, CertificateKind, LinearProgram,
    RowKind, VarBound,
};
use timarg::exactsets::{
    check_d2_nn, check_d2_nnn, check_d3_nn, check_reflection_ti, check_trivial_consistency,
    disagreement_nnn_spec, exact_energy_by_vertices, noncommuting_cycle_spec,
    solve_reflection_energy, LibraryCase, ReflectionSpec, VertexLibrary,
};
use timarg::hierarchy::{
    energy_bounds_with_budget, square_program_with_budget, strip_program_with_budget, Hamiltonian,
    DEFAULT_BUDGET,
};
use timarg::lattice::{symmetrize_pattern, Distribution, MarginalSpec, Pattern as CorePattern, Region};
use timarg::rat::{format_rat, parse_rat};
use timarg::tiling::{
    curve_point, is_valid_tiling, kari_alphabet, orbit_witnesses, periodic_tiling_search_with_budget,
    rotation_example_point, rule_to_hamiltonian, KariSystem, TilingRule, WrapMode,
};
use timarg::{Error, Rat};

// ---------------------------------------------------------------------------
// Conversions
// ---------------------------------------------------------------------------

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Structural(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Resource(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_rats(xs: &[String]) -> PyResult<Vec<Rat>> {
    xs.iter().map(|s| parse_rat(s).map_err(to_py_err)).collect()
}

fn parse_table(t: &[Vec<String>]) -> PyResult<Vec<Vec<Rat>>> {
    t.iter().map(|row| parse_rats(row)).collect()
}

fn format_rats(xs: &[Rat]) -> Vec<String> {
    xs.iter().map(format_rat).collect()
}

fn parse_target(name: &str) -> PyResult<Region> {
    match name {
        "h" => Ok(Region::pair_h()),
        "v" => Ok(Region::pair_v()),
        "plus" => Ok(Region::pair_plus()),
        "minus" => Ok(Region::pair_minus()),
        other => Err(PyValueError::new_err(format!(
            "unknown target region `{other}` (expected h, v, plus, or minus)"
        ))),
    }
}

fn parse_targets(names: &[String]) -> PyResult<Vec<Region>> {
    names.iter().map(|n| parse_target(n)).collect()
}

fn parse_case(name: &str) -> PyResult<LibraryCase> {
    LibraryCase::from_name(name).map_err(to_py_err)
}

fn parse_spec(text: &str) -> PyResult<MarginalSpec> {
    serde_json::from_str(text)
        .map_err(|e| PyValueError::new_err(format!("invalid marginal specification JSON: {e}")))
}

fn parse_hamiltonian(text: &str) -> PyResult<Hamiltonian> {
    serde_json::from_str(text)
        .map_err(|e| PyValueError::new_err(format!("invalid Hamiltonian JSON: {e}")))
}

fn parse_system(text: Option<&str>) -> PyResult<KariSystem> {
    match text {
        None => Ok(KariSystem::rotation_example()),
        Some(t) => serde_json::from_str(t)
            .map_err(|e| PyValueError::new_err(format!("invalid tile system JSON: {e}"))),
    }
}

fn build_rule(
    alphabet: usize,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
) -> PyResult<TilingRule> {
    TilingRule::new(alphabet, horizontal, vertical).map_err(to_py_err)
}

/// Serialize a certificate (with its replay verdict) to the JSON shape the
/// CLI emits: rationals as strings, absent fields as null.
fn certificate_json(lp: &LinearProgram, cert: &Certificate) -> String {
    let kind = match cert.kind {
        CertificateKind::Feasible => "feasible",
        CertificateKind::Infeasible => "infeasible",
        CertificateKind::Optimal => "optimal",
        CertificateKind::Unbounded => "unbounded",
    };
    json!({
        "kind": kind,
        "verified": verify_certificate(lp, cert),
        "primal_point": cert.primal_point.as_deref().map(format_rats),
        "dual_multipliers": cert.dual_multipliers.as_deref().map(format_rats),
        "ray": cert.ray.as_deref().map(format_rats),
        "objective_value": cert.objective_value.as_ref().map(format_rat),
    })
    .to_string()
}

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

/// A periodic grid of local values, stored row by row with `rows[0]` the
/// bottom row.  Evaluation wraps both coordinates, so a pattern stands for
/// its doubly periodic extension.
#[pyclass(module = "timarg_py", skip_from_py_object)]
#[derive(Clone)]
struct Pattern {
    inner: CorePattern,
}

#[pymethods]
impl Pattern {
    /// Build a pattern over local dimension `d` from its rows (bottom row
    /// first).  Rows must be non-empty, equal length, with entries below `d`.
    #[new]
    fn new(d: usize, rows: Vec<Vec<u8>>) -> PyResult<Self> {
        CorePattern::new(d, rows).map(|inner| Pattern { inner }).map_err(to_py_err)
    }

    /// Local dimension (number of values a site can take).
    fn d(&self) -> usize {
        self.inner.d()
    }

    /// Period in the x direction.
    fn width(&self) -> usize {
        self.inner.width()
    }

    /// Period in the y direction.
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// The rows, bottom row first, as lists of small integers.
    fn rows(&self) -> Vec<Vec<u32>> {
        self.inner
            .rows()
            .iter()
            .map(|r| r.iter().map(|&v| u32::from(v)).collect())
            .collect()
    }

    /// Value at integer coordinates `(x, y)`, wrapping both periods.
    fn value_at(&self, x: i64, y: i64) -> u8 {
        self.inner.value_at(x, y)
    }

    /// The pattern with the roles of x and y exchanged.
    fn transpose(&self) -> Pattern {
        Pattern { inner: self.inner.transpose() }
    }

    /// Empirical pair distributions of the pattern over the named target
    /// regions (`"h"`, `"v"`, `"plus"`, `"minus"`), as a marginal
    /// specification JSON document.
    fn symmetrize(&self, targets: Vec<String>) -> PyResult<String> {
        let regions = parse_targets(&targets)?;
        let spec = symmetrize_pattern(&self.inner, &regions).map_err(to_py_err)?;
        serde_json::to_string(&spec).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Average energy per site of the pattern under a Hamiltonian given as
    /// JSON, returned as a `"p/q"` string.
    fn energy(&self, hamiltonian_json: &str) -> PyResult<String> {
        let h = parse_hamiltonian(hamiltonian_json)?;
        h.pattern_energy(&self.inner).map(|v| format_rat(&v)).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Pattern(d={}, width={}, height={})",
            self.inner.d(),
            self.inner.width(),
            self.inner.height()
        )
    }
}

// ---------------------------------------------------------------------------
// Marginal realizability
// ---------------------------------------------------------------------------

/// Quick sanity check of a marginal specification: single-site marginals
/// must agree across all pair entries and every table must be a genuine
/// probability distribution.
#[pyfunction]
fn trivial_consistency(spec_json: &str) -> PyResult<bool> {
    let spec = parse_spec(spec_json)?;
    check_trivial_consistency(&spec).map_err(to_py_err)
}

/// Level-`n` strip relaxation of a marginal specification.  Returns the
/// certificate JSON: `kind` is `"feasible"` or `"infeasible"`, `verified`
/// reports the independent replay of the attached evidence.
#[pyfunction]
#[pyo3(signature = (spec_json, level, budget=None))]
fn strip_feasible(spec_json: &str, level: usize, budget: Option<u64>) -> PyResult<String> {
    let spec = parse_spec(spec_json)?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let program = strip_program_with_budget(&spec, level, budget).map_err(to_py_err)?;
    let cert = solve_feasibility(&program.lp).map_err(to_py_err)?;
    Ok(certificate_json(&program.lp, &cert))
}

/// Level-`n` square relaxation of a marginal specification (the `n x n`
/// window analogue of the strip).  Same output shape as `strip_feasible`.
#[pyfunction]
#[pyo3(signature = (spec_json, level, budget=None))]
fn square_feasible(spec_json: &str, level: usize, budget: Option<u64>) -> PyResult<String> {
    let spec = parse_spec(spec_json)?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let program = square_program_with_budget(&spec, level, budget).map_err(to_py_err)?;
    let cert = solve_feasibility(&program.lp).map_err(to_py_err)?;
    Ok(certificate_json(&program.lp, &cert))
}

/// Decide membership for the two-outcome nearest-neighbour family on the
/// `k`-dimensional lattice (`k` = 2 or 3) from its `k` pair tables.
#[pyfunction(name = "check_d2_nn")]
fn py_check_d2_nn(tables: Vec<Vec<Vec<String>>>, k: usize) -> PyResult<bool> {
    let tables: Vec<Vec<Vec<Rat>>> =
        tables.iter().map(|t| parse_table(t)).collect::<PyResult<_>>()?;
    check_d2_nn(&tables, k).map_err(to_py_err)
}

/// Decide membership for the two-outcome planar family with diagonal
/// neighbours from the four pair tables (h, v, plus, minus).
#[pyfunction(name = "check_d2_nnn")]
fn py_check_d2_nnn(
    p_h: Vec<Vec<String>>,
    p_v: Vec<Vec<String>>,
    p_plus: Vec<Vec<String>>,
    p_minus: Vec<Vec<String>>,
) -> PyResult<bool> {
    let h = parse_table(&p_h)?;
    let v = parse_table(&p_v)?;
    let plus = parse_table(&p_plus)?;
    let minus = parse_table(&p_minus)?;
    check_d2_nnn(&h, &v, &plus, &minus).map_err(to_py_err)
}

/// Decide membership for the three-outcome planar nearest-neighbour family
/// from its horizontal and vertical pair tables.
#[pyfunction(name = "check_d3_nn")]
fn py_check_d3_nn(p_h: Vec<Vec<String>>, p_v: Vec<Vec<String>>) -> PyResult<bool> {
    let h = parse_table(&p_h)?;
    let v = parse_table(&p_v)?;
    check_d3_nn(&h, &v).map_err(to_py_err)
}

/// The stored vertex library for an exactly solved case (`"d2-nn"`,
/// `"d2-nnn"`, or `"d3-nn"`), as its JSON document.
#[pyfunction]
fn vertex_library(case: &str) -> PyResult<String> {
    Ok(VertexLibrary::get(parse_case(case)?).to_json())
}

/// A built-in unrealizable marginal specification (JSON) that passes the
/// trivial single-site check: `"disagreement-nnn"` demands disagreement
/// along both axes and both diagonals, `"noncommuting-cycle"` pairs two
/// three-letter permutation steps that commute nowhere.
#[pyfunction]
fn counterexample_spec(name: &str) -> PyResult<String> {
    let spec = match name {
        "disagreement-nnn" => disagreement_nnn_spec(),
        "noncommuting-cycle" => noncommuting_cycle_spec(),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown counterexample `{other}` (expected disagreement-nnn or noncommuting-cycle)"
            )))
        }
    };
    serde_json::to_string(&spec).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Exact ground-state energy for one of the solved cases: minimise the
/// given pair energy tables over the library vertices.  Returns the value
/// as a `"p/q"` string together with the label of an attaining vertex.
#[pyfunction]
fn exact_energy(case: &str, tables: Vec<Vec<Vec<String>>>) -> PyResult<(String, String)> {
    let case = parse_case(case)?;
    let tables: Vec<Vec<Vec<Rat>>> =
        tables.iter().map(|t| parse_table(t)).collect::<PyResult<_>>()?;
    let (value, vertex) = exact_energy_by_vertices(case, &tables).map_err(to_py_err)?;
    Ok((format_rat(&value), vertex.label.clone()))
}

// ---------------------------------------------------------------------------
// Energy bounds
// ---------------------------------------------------------------------------

/// Two-sided bounds on the minimum energy per site of a pair Hamiltonian
/// (JSON input): the level-`level` strip relaxation from below and the best
/// periodic pattern with periods up to `max_period` from above.  Returns
/// JSON `{lower, upper, witness_rows, partial}`.
#[pyfunction]
#[pyo3(signature = (hamiltonian_json, level, max_period, budget=None))]
fn energy_bounds(
    hamiltonian_json: &str,
    level: usize,
    max_period: usize,
    budget: Option<u64>,
) -> PyResult<String> {
    let h = parse_hamiltonian(hamiltonian_json)?;
    let bounds = energy_bounds_with_budget(&h, level, max_period, budget.unwrap_or(DEFAULT_BUDGET))
        .map_err(to_py_err)?;
    Ok(json!({
        "lower": format_rat(&bounds.lower),
        "upper": format_rat(&bounds.upper),
        "witness_rows": bounds.witness_pattern.as_ref().map(|p| p.rows().to_vec()),
        "partial": bounds.partial,
    })
    .to_string())
}

/// Exact minimum energy per site over reflection-positive translation
///-invariant states on the `s x s` window, for a reflection-symmetric
/// energy vector `f` (length `d^(s*s)`, window configurations in
/// row-major base-`d` order with the first site most significant).
#[pyfunction]
fn reflection_energy(d: usize, s: usize, f: Vec<String>) -> PyResult<String> {
    let f = parse_rats(&f)?;
    solve_reflection_energy(d, s, &f).map(|v| format_rat(&v)).map_err(to_py_err)
}

/// Whether a window distribution (JSON) is invariant under both axis
/// reflections of its square window.
#[pyfunction(name = "check_reflection_ti")]
fn py_check_reflection_ti(distribution_json: &str) -> PyResult<bool> {
    let q: Distribution = serde_json::from_str(distribution_json)
        .map_err(|e| PyValueError::new_err(format!("invalid distribution JSON: {e}")))?;
    let spec = ReflectionSpec::new(q).map_err(to_py_err)?;
    check_reflection_ti(&spec).map_err(to_py_err)
}

// ---------------------------------------------------------------------------
// Exact linear programming
// ---------------------------------------------------------------------------

/// Solve a linear program exactly and return a replay-verified certificate.
///
/// The program maximises `objective . x` subject to dense rows
/// `(coefficients, kind, rhs)` with `kind` either `"eq"` or `"ge"`, with
/// every variable non-negative except the indices listed in `free_vars`.
/// With `feasibility_only=True` the objective is ignored and the verdict is
/// feasible/infeasible.
#[pyfunction]
#[pyo3(signature = (objective, rows, free_vars=vec![], feasibility_only=false))]
fn solve_lp(
    objective: Vec<String>,
    rows: Vec<(Vec<String>, String, String)>,
    free_vars: Vec<usize>,
    feasibility_only: bool,
) -> PyResult<String> {
    let objective = parse_rats(&objective)?;
    let n = objective.len();
    let mut lp = LinearProgram::new(n);
    lp.objective = objective;
    for i in free_vars {
        if i >= n {
            return Err(PyValueError::new_err(format!(
                "free variable index {i} out of range for {n} variables"
            )));
        }
        lp.variable_bounds[i] = VarBound::Free;
    }
    for (coeffs, kind, rhs) in &rows {
        if coeffs.len() != n {
            return Err(PyValueError::new_err(format!(
                "row has {} coefficients, expected {n}",
                coeffs.len()
            )));
        }
        let kind = match kind.as_str() {
            "eq" => RowKind::Equality,
            "ge" => RowKind::GreaterEqual,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown row kind `{other}` (expected eq or ge)"
                )))
            }
        };
        let zero = timarg::rat::rat_int(0);
        let entries: Vec<(usize, Rat)> = parse_rats(coeffs)?
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != zero)
            .collect();
        lp.add_row(kind, entries, parse_rat(rhs).map_err(to_py_err)?);
    }
    let cert = if feasibility_only {
        solve_feasibility(&lp).map_err(to_py_err)?
    } else {
        solve(&lp).map_err(to_py_err)?
    };
    Ok(certificate_json(&lp, &cert))
}

// ---------------------------------------------------------------------------
// Tilings
// ---------------------------------------------------------------------------

/// Check a grid of tile indices against an adjacency rule.  Returns `None`
/// when valid, otherwise `(site, pair, horizontal)` for the first violation
/// in scan order.  `torus=True` also checks wrapping pairs.
#[pyfunction]
#[pyo3(signature = (alphabet, horizontal, vertical, rows, torus=false))]
fn tiling_valid(
    alphabet: usize,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
    rows: Vec<Vec<u8>>,
    torus: bool,
) -> PyResult<Option<((usize, usize), (usize, usize), bool)>> {
    let rule = build_rule(alphabet, horizontal, vertical)?;
    let grid = CorePattern::new(alphabet, rows).map_err(to_py_err)?;
    let wrap = if torus { WrapMode::Torus } else { WrapMode::Open };
    let violation = is_valid_tiling(&rule, &grid, wrap).map_err(to_py_err)?;
    Ok(violation.map(|v| (v.site, v.pair, v.horizontal)))
}

/// Search for a doubly periodic valid tiling with periods up to
/// `max_period`.  Returns JSON `{witness_rows, partial}`; `partial=True`
/// means the budget ran out before the search space was exhausted.
#[pyfunction]
#[pyo3(signature = (alphabet, horizontal, vertical, max_period, budget=None))]
fn tiling_search(
    alphabet: usize,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
    max_period: usize,
    budget: Option<u64>,
) -> PyResult<String> {
    let rule = build_rule(alphabet, horizontal, vertical)?;
    let search = periodic_tiling_search_with_budget(&rule, max_period, budget.unwrap_or(DEFAULT_BUDGET))
        .map_err(to_py_err)?;
    Ok(json!({
        "witness_rows": search.witness.as_ref().map(|p| p.rows().to_vec()),
        "partial": search.partial,
    })
    .to_string())
}

/// The two pair Hamiltonians encoding an adjacency rule: the maximising
/// form counts allowed neighbour pairs (per-site value 2 exactly when the
/// rule tiles the plane), the minimising form is its negation, ready for
/// `energy_bounds`.  Returns `(maximizing_json, minimizing_json)`.
#[pyfunction]
fn rule_energy_forms(
    alphabet: usize,
    horizontal: Vec<(usize, usize)>,
    vertical: Vec<(usize, usize)>,
) -> PyResult<(String, String)> {
    let rule = build_rule(alphabet, horizontal, vertical)?;
    let forms = rule_to_hamiltonian(&rule).map_err(to_py_err)?;
    let to_json = |h: &Hamiltonian| {
        serde_json::to_string(h).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    };
    Ok((to_json(&forms.maximizing)?, to_json(&forms.minimizing)?))
}

// ---------------------------------------------------------------------------
// Piecewise affine tile systems
// ---------------------------------------------------------------------------

/// The Wang tile alphabet generated by a piecewise affine system (JSON; the
/// built-in rational rotation example when omitted), as a JSON array of
/// tiles with integer top/bottom digit vectors and rational carry edges.
#[pyfunction]
#[pyo3(signature = (system_json=None))]
fn kari_tiles(system_json: Option<&str>) -> PyResult<String> {
    let sys = parse_system(system_json)?;
    let tiles = kari_alphabet(&sys);
    serde_json::to_string(&tiles).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Number of distinct tiles generated by a piecewise affine system (the
/// built-in rational rotation example when omitted).
#[pyfunction]
#[pyo3(signature = (system_json=None))]
fn kari_alphabet_size(system_json: Option<&str>) -> PyResult<usize> {
    let sys = parse_system(system_json)?;
    Ok(kari_alphabet(&sys).len())
}

/// Closed-form frequency curve of the rotation example at parameter `mu`:
/// the pair (horizontal edge density, vertical letter frequency).
#[pyfunction]
fn kari_curve_point(mu: f64) -> PyResult<(f64, f64)> {
    curve_point(mu).map_err(to_py_err)
}

/// Empirical densities after `rows` steps of the rotation example orbit
/// started on the invariant line at parameter `mu` (a `"p/q"` string).
/// Exact rational output `(omega, eta)` matching `kari_curve_point` in the
/// limit.
#[pyfunction]
fn kari_orbit_density(mu: &str, rows: usize) -> PyResult<(String, String)> {
    let mu = parse_rat(mu).map_err(to_py_err)?;
    let sys = KariSystem::rotation_example();
    let start = rotation_example_point(&mu);
    let (omega, eta) = orbit_witnesses(&sys, &start, rows).map_err(to_py_err)?;
    Ok((format_rat(&omega), format_rat(&eta)))
}

// ---------------------------------------------------------------------------
// Module
// ---------------------------------------------------------------------------

#[pymodule]
fn timarg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Pattern>()?;
    m.add_function(wrap_pyfunction!(trivial_consistency, m)?)?;
    m.add_function(wrap_pyfunction!(strip_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(square_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_d2_nn, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_d2_nnn, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_d3_nn, m)?)?;
    m.add_function(wrap_pyfunction!(vertex_library, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_spec, m)?)?;
    m.add_function(wrap_pyfunction!(exact_energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_energy, m)?)?;
    m.add_function(wrap_pyfunction!(py_check_reflection_ti, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lp, m)?)?;
    m.add_function(wrap_pyfunction!(tiling_valid, m)?)?;
    m.add_function(wrap_pyfunction!(tiling_search, m)?)?;
    m.add_function(wrap_pyfunction!(rule_energy_forms, m)?)?;
    m.add_function(wrap_pyfunction!(kari_tiles, m)?)?;
    m.add_function(wrap_pyfunction!(kari_alphabet_size, m)?)?;
    m.add_function(wrap_pyfunction!(kari_curve_point, m)?)?;
    m.add_function(wrap_pyfunction!(kari_orbit_density, m)?)?;
    Ok(())
}

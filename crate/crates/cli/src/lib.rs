//! The `grassmann` command line: conversions, checks, sampling, fitting.
//!
//! Exit status is 0 on success, 1 on a domain error (reported on stderr as
//! `{"error": code, "detail": message}`), 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use grassmann_core::dpp::{dpp_pmf, dpp_sample, moebius_pmf, CountVector};
use grassmann_core::graphcut::{effective_resistances, OrientedGraph};
use grassmann_core::io::{
    error_to_json, fit_result_to_json, indexed_to_json, matrix_from_json, matrix_to_json,
    read_counts, samples_to_json, subset_map_from_json, subset_map_to_json, write_counts, JsonScalar,
};
use grassmann_core::likelihood::{mle_fit, FitConfig, Model};
use grassmann_core::moment::{
    hypersimplex_contains, in_matroid_polytope, moment_from_projection, moment_map,
};
use grassmann_core::plucker::{ensure_on_grassmannian, plucker_from_basis, plucker_residual};
use grassmann_core::projector::{
    basis_from_projection, idempotency_residual, pgr_degree, projection_from_basis,
    projection_from_plucker,
};
use grassmann_core::sgrass::{sgr2_residual, sgr4_quartic, sgr_degree, square_plucker};
use grassmann_core::subset::SubsetMap;
use grassmann_core::{Basis, Error, Matrix, PluckerVector, ProjectionMatrix, Rational, Scalar};
use grassmann_core::SquaredPlucker;

#[derive(Parser, Debug)]
#[command(name = "grassmann", version, about = "Subspaces as Plücker vectors and projection matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert between basis, Plücker, projection and squared representations.
    Convert {
        #[arg(long, value_enum)]
        from: Repr,
        #[arg(long, value_enum)]
        to: Repr,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[command(flatten)]
        regime: Regime,
    },
    /// Report the defining-equation residual of a representation.
    Check {
        #[arg(long, value_enum)]
        kind: Repr,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[command(flatten)]
        regime: Regime,
    },
    /// Probabilities of the projection DPP with the given kernel.
    Pmf {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Compute each probability by inclusion-exclusion over supersets.
        #[arg(long)]
        moebius: bool,
        #[command(flatten)]
        regime: Regime,
    },
    /// Draw seeded samples from a projection DPP.
    Sample {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value = "samples")]
        format: SampleFormat,
    },
    /// Maximum-likelihood fit of count data.
    Fit {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_name = "FILE")]
        counts: PathBuf,
        /// Size of the ground set.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        /// Gradient-norm threshold for stationarity.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Moment map image and polytope membership.
    Moment {
        #[arg(long, value_enum)]
        from: Repr,
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[command(flatten)]
        regime: Regime,
    },
    /// Effective resistances of the edges of a graph.
    Resistance {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[command(flatten)]
        regime: Regime,
    },
    /// Degrees of the squared and projection Grassmannians.
    Degrees {
        #[arg(long, value_enum)]
        variety: Variety,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Regime {
    /// Exact rational arithmetic.
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Double-precision arithmetic.
    #[arg(long)]
    float: bool,
}

impl Regime {
    fn exact_or(self, default: bool) -> bool {
        if self.exact {
            true
        } else if self.float {
            false
        } else {
            default
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Basis,
    Plucker,
    Projection,
    Squared,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SampleFormat {
    Samples,
    Counts,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModelArg {
    Squared,
    Positive,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Variety {
    Sgr,
    Pgr,
}

enum Failure {
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<String, Failure>;

/// Parses `args` (program name first), runs the subcommand, and returns the
/// exit status. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(f) => {
            let payload = match f {
                Failure::Domain(e) => error_to_json(&e),
                Failure::Io(detail) => json!({"error": "IoError", "detail": detail}),
            };
            let _ = writeln!(err, "{payload}");
            1
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Convert { from, to, input, regime } => {
            let v = read_json(&input)?;
            if regime.exact_or(true) {
                convert::<Rational>(from, to, &v)
            } else {
                convert::<f64>(from, to, &v)
            }
        }
        Command::Check { kind, input, regime } => {
            let v = read_json(&input)?;
            if regime.exact_or(true) {
                check::<Rational>(kind, &v)
            } else {
                check::<f64>(kind, &v)
            }
        }
        Command::Pmf { input, moebius, regime } => {
            let v = read_json(&input)?;
            if regime.exact_or(true) {
                pmf::<Rational>(&v, moebius)
            } else {
                pmf::<f64>(&v, moebius)
            }
        }
        Command::Sample { input, count, seed, format } => {
            let p = ProjectionMatrix::new(matrix_from_json::<f64>(&read_json(&input)?)?)?;
            let samples = dpp_sample(&p, seed, count);
            match format {
                SampleFormat::Samples => Ok(line(&samples_to_json(&samples))),
                SampleFormat::Counts => {
                    let u = CountVector::from_samples(p.rank(), p.n(), &samples)?;
                    let mut buf = Vec::new();
                    write_counts(&mut buf, &u)?;
                    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
                }
            }
        }
        Command::Fit { model, counts, n, restarts, seed, tol } => {
            let file = fs::File::open(&counts).map_err(|e| io_failure(&counts, e))?;
            let u = read_counts(file, n)?;
            let model = match model {
                ModelArg::Squared => Model::Squared,
                ModelArg::Positive => Model::Positive,
            };
            let cfg = FitConfig { restarts, seed, grad_tol: tol, ..FitConfig::default() };
            Ok(line(&fit_result_to_json(&mle_fit(&u, model, &cfg)?)))
        }
        Command::Moment { from, input, regime } => {
            let v = read_json(&input)?;
            if regime.exact_or(true) {
                moment::<Rational>(from, &v)
            } else {
                moment::<f64>(from, &v)
            }
        }
        Command::Resistance { graph, regime } => {
            let text = fs::read_to_string(&graph).map_err(|e| io_failure(&graph, e))?;
            let g: OrientedGraph = text.parse()?;
            let r = effective_resistances(&g)?;
            if regime.exact_or(true) {
                Ok(line(&indexed_to_json(&r)))
            } else {
                let r: Vec<f64> = r.iter().map(Scalar::to_f64).collect();
                Ok(line(&indexed_to_json(&r)))
            }
        }
        Command::Degrees { variety, d, n } => match variety {
            Variety::Sgr => Ok(format!("{}\n", sgr_degree(d, n)?)),
            Variety::Pgr => Ok(format!("{}\n", pgr_degree(d, n)?)),
        },
    }
}

fn line(v: &Value) -> String {
    format!("{v}\n")
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Domain(Error::Parse(format!("{}: {e}", path.display()))))
}

enum Subspace<T> {
    Basis(Basis<T>),
    Plucker(PluckerVector<T>),
    Projection(ProjectionMatrix<T>),
}

fn load<T: JsonScalar>(repr: Repr, v: &Value) -> grassmann_core::Result<Subspace<T>> {
    match repr {
        Repr::Basis => Ok(Subspace::Basis(Basis::new(matrix_from_json(v)?)?)),
        Repr::Plucker => {
            let x = PluckerVector::from_map(subset_map_from_json(v)?)?;
            ensure_on_grassmannian(&x)?;
            Ok(Subspace::Plucker(x))
        }
        Repr::Projection => Ok(Subspace::Projection(ProjectionMatrix::new(matrix_from_json(v)?)?)),
        Repr::Squared => Err(Error::NotInvertible("squared".into())),
    }
}

fn to_plucker<T: Scalar>(s: &Subspace<T>) -> grassmann_core::Result<PluckerVector<T>> {
    match s {
        Subspace::Basis(a) => Ok(plucker_from_basis(a)),
        Subspace::Plucker(x) => Ok(x.normalized()),
        Subspace::Projection(p) => Ok(plucker_from_basis(&basis_from_projection(p)?)),
    }
}

fn to_projection<T: Scalar>(s: &Subspace<T>) -> grassmann_core::Result<ProjectionMatrix<T>> {
    match s {
        Subspace::Basis(a) => projection_from_basis(a),
        Subspace::Plucker(x) => projection_from_plucker(x),
        Subspace::Projection(p) => Ok(p.clone()),
    }
}

fn to_squared<T: Scalar>(s: &Subspace<T>) -> grassmann_core::Result<SquaredPlucker<T>> {
    match s {
        Subspace::Projection(p) => SquaredPlucker::new(dpp_pmf(p)?),
        other => square_plucker(&to_plucker(other)?),
    }
}

fn convert<T: JsonScalar>(from: Repr, to: Repr, v: &Value) -> Outcome {
    if from == Repr::Squared {
        if to == Repr::Squared {
            let q = SquaredPlucker::<T>::new(subset_map_from_json(v)?)?;
            return Ok(line(&subset_map_to_json(q.coords())));
        }
        return Err(Error::NotInvertible("squared".into()).into());
    }
    let s = load::<T>(from, v)?;
    let out = match to {
        Repr::Basis => match &s {
            Subspace::Basis(a) => matrix_to_json(a.matrix()),
            other => matrix_to_json(basis_from_projection(&to_projection(other)?)?.matrix()),
        },
        Repr::Plucker => subset_map_to_json(to_plucker(&s)?.coords()),
        Repr::Projection => matrix_to_json(to_projection(&s)?.matrix()),
        Repr::Squared => subset_map_to_json(to_squared(&s)?.coords()),
    };
    Ok(line(&out))
}

fn check<T: JsonScalar>(kind: Repr, v: &Value) -> Outcome {
    let tol = T::default_tolerance();
    let out = match kind {
        Repr::Basis => {
            let m: Matrix<T> = matrix_from_json(v)?;
            let rank = m.rank();
            json!({"kind": "basis", "rank": rank, "full_rank": rank == m.rows() && rank > 0})
        }
        Repr::Plucker => {
            let x = PluckerVector::<T>::from_map(subset_map_from_json(v)?)?;
            let r = plucker_residual(&x);
            json!({"kind": "plucker", "residual": r.to_json(), "on_variety": tol.is_zero(&r, 1.0)})
        }
        Repr::Squared => {
            let q = SquaredPlucker::<T>::new(subset_map_from_json(v)?)?;
            let r = sgr2_residual(&q)?;
            let mut out = json!({"kind": "squared", "residual": r.to_json(), "on_variety": tol.is_zero(&r, 1.0)});
            if q.n() == 4 {
                out["quartic"] = sgr4_quartic(&q)?.to_json();
            }
            out
        }
        Repr::Projection => {
            let m: Matrix<T> = matrix_from_json(v)?;
            let residual = idempotency_residual(&m)?;
            match ProjectionMatrix::new(m) {
                Ok(p) => json!({"kind": "projection", "idempotency_residual": residual, "is_projection": true, "rank": p.rank()}),
                Err(Error::NotProjection(why)) => json!({
                    "kind": "projection",
                    "idempotency_residual": residual,
                    "is_projection": false,
                    "reason": why,
                }),
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(line(&out))
}

fn pmf<T: JsonScalar>(v: &Value, moebius: bool) -> Outcome {
    let p = ProjectionMatrix::<T>::new(matrix_from_json(v)?)?;
    let mu = if moebius {
        SubsetMap::try_from_fn(p.rank(), p.n(), |s| moebius_pmf(&p, s))?
    } else {
        dpp_pmf(&p)?
    };
    Ok(line(&subset_map_to_json(&mu)))
}

fn moment<T: JsonScalar>(from: Repr, v: &Value) -> Outcome {
    let tol = T::default_tolerance();
    let s = load::<T>(from, v)?;
    let (z, polytope) = match &s {
        Subspace::Projection(p) => (moment_from_projection(p), None),
        other => {
            let x = to_plucker(other)?;
            let z = moment_map(&x)?;
            let inside = in_matroid_polytope(&x, z.coords());
            (z, Some(inside))
        }
    };
    let coords: Vec<Value> = z.coords().iter().map(JsonScalar::to_json).collect();
    let mut out = json!({
        "d": z.d(),
        "n": z.n(),
        "z": coords,
        "in_hypersimplex": hypersimplex_contains(z.coords(), z.d(), &tol),
    });
    if let Some(inside) = polytope {
        out["in_matroid_polytope"] = json!(inside);
    }
    Ok(line(&out))
}


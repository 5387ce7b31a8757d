//! JSON and CSV encodings shared by the command-line tool.
//!
//! Subset-keyed maps are `{"d": 2, "n": 4, "coords": {"1,2": v, ...}}` with
//! 1-based labels in lexicographic order; absent keys read as zero. Matrices
//! are `{"rows": r, "cols": c, "entries": [[...], ...]}`. Exact values are
//! written as `"p/q"` strings (`"p"` for integers) and read from such strings,
//! from decimal strings, or from JSON numbers taken at their decimal value.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::dpp::CountVector;
use crate::error::{Error, Result};
use crate::likelihood::{FitResult, OptimumCluster, ReparamPoint};
use crate::numkit::{Matrix, Rational, Scalar};
use crate::subset::{binomial, SubsetIndex, SubsetMap};

/// Scalars with a JSON form.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("number {n}"))),
            Value::String(s) => Ok(parse_rational(s)?.to_f64()),
            other => Err(Error::Parse(format!("expected a number, got {other}"))),
        }
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let int: BigInt = format!("0{whole}{frac}").parse().map_err(|_| bad())?;
    let shift = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(int);
    if shift >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if negative { -q } else { q })
}

fn get_usize(obj: &Value, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Parse(format!("missing nonnegative integer field '{key}'")))
}

pub fn subset_map_to_json<T: JsonScalar>(m: &SubsetMap<T>) -> Value {
    let coords: Map<String, Value> = m.iter().map(|(s, v)| (s.to_string(), v.to_json())).collect();
    json!({"d": m.d(), "n": m.n(), "coords": coords})
}

pub fn subset_map_from_json<T: JsonScalar>(v: &Value) -> Result<SubsetMap<T>> {
    let d = get_usize(v, "d")?;
    let n = get_usize(v, "n")?;
    if d > n {
        return Err(Error::Dimension(format!("d={d} exceeds n={n}")));
    }
    let coords = v
        .get("coords")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("missing object field 'coords'".into()))?;
    let mut values = vec![T::zero(); binomial(n, d)];
    for (key, val) in coords {
        let s: SubsetIndex = key.parse::<SubsetIndex>()?.with_n(n)?;
        if s.len() != d {
            return Err(Error::Parse(format!("key {key:?} is not a {d}-subset")));
        }
        values[s.lex_rank()] = T::from_json(val)?;
    }
    SubsetMap::new(d, n, values)
}

pub fn matrix_to_json<T: JsonScalar>(m: &Matrix<T>) -> Value {
    let entries: Vec<Value> =
        m.to_rows().iter().map(|r| Value::Array(r.iter().map(JsonScalar::to_json).collect())).collect();
    json!({"rows": m.rows(), "cols": m.cols(), "entries": entries})
}

/// Reads `entries`; `rows`/`cols` are checked when present.
pub fn matrix_from_json<T: JsonScalar>(v: &Value) -> Result<Matrix<T>> {
    let rows = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing array field 'entries'".into()))?;
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix rows must be arrays".into()))?
                .iter()
                .map(T::from_json)
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = parsed.first().map_or(0, Vec::len);
    if v.get("rows").is_some() && get_usize(v, "rows")? != parsed.len()
        || v.get("cols").is_some() && get_usize(v, "cols")? != cols
    {
        return Err(Error::Dimension("declared shape disagrees with entries".into()));
    }
    if parsed.is_empty() && v.get("cols").is_some() {
        return Ok(Matrix::zeros(0, get_usize(v, "cols")?));
    }
    Matrix::from_rows(parsed)
}

/// `{"1": v_1, "2": v_2, ...}` keyed by 1-based position.
pub fn indexed_to_json<T: JsonScalar>(values: &[T]) -> Value {
    let m: Map<String, Value> =
        values.iter().enumerate().map(|(i, v)| ((i + 1).to_string(), v.to_json())).collect();
    Value::Object(m)
}

pub fn indexed_from_json<T: JsonScalar>(v: &Value) -> Result<Vec<T>> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("expected an object".into()))?;
    (1..=obj.len())
        .map(|i| {
            obj.get(&i.to_string())
                .ok_or_else(|| Error::Parse(format!("missing key \"{i}\"")))
                .and_then(T::from_json)
        })
        .collect()
}

/// Samples as a list of 1-based index lists.
pub fn samples_to_json(samples: &[SubsetIndex]) -> Value {
    Value::Array(samples.iter().map(|s| json!(s.one_based())).collect())
}

pub fn samples_from_json(v: &Value, n: usize) -> Result<Vec<SubsetIndex>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("samples must be an array".into()))?
        .iter()
        .map(|s| {
            let labels: Vec<usize> = serde_json::from_value(s.clone())
                .map_err(|e| Error::Parse(format!("sample {s}: {e}")))?;
            SubsetIndex::from_one_based(&labels, n)
        })
        .collect()
}

/// Reads `subset,count` rows; the subset field holds 1-based labels like `"1,2"`.
/// Subsets not listed count zero. `d` is taken from the first row.
pub fn read_counts<R: Read>(reader: R, n: usize) -> Result<CountVector> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(format!("counts header: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "subset" || &headers[1] != "count" {
        return Err(Error::Parse("counts header must be 'subset,count'".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("counts row: {e}")))?;
        let s = rec[0].parse::<SubsetIndex>()?.with_n(n)?;
        let c: u64 = rec[1]
            .parse()
            .map_err(|_| Error::Parse(format!("count {:?} is not a nonnegative integer", &rec[1])))?;
        rows.push((s, c));
    }
    let d = rows.first().map(|(s, _)| s.len()).ok_or_else(|| Error::Parse("no count rows".into()))?;
    let mut values = vec![0u64; binomial(n, d)];
    for (s, c) in rows {
        if s.len() != d {
            return Err(Error::Parse(format!("subset {s} has size {}, expected {d}", s.len())));
        }
        values[s.lex_rank()] += c;
    }
    CountVector::new(SubsetMap::new(d, n, values)?)
}

pub fn write_counts<W: Write>(writer: W, u: &CountVector) -> Result<()> {
    let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::NonNumeric).from_writer(writer);
    let io = |e: csv::Error| Error::Parse(format!("writing counts: {e}"));
    w.write_record(["subset", "count"]).map_err(io)?;
    for (s, c) in u.counts().iter() {
        w.write_field(s.to_string()).map_err(io)?;
        w.write_field(c.to_string()).map_err(io)?;
        w.write_record(None::<&[u8]>).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("writing counts: {e}")))
}

pub fn error_to_json(e: &Error) -> Value {
    json!({"error": e.code(), "detail": e.to_string()})
}

fn reparam_to_json(r: &ReparamPoint) -> Value {
    json!({
        "alpha": r.alpha(),
        "beta": r.beta(),
        "gamma": r.gamma(),
        "kappa": r.kappa().to_rows(),
    })
}

fn cluster_to_json(c: &OptimumCluster) -> Value {
    json!({
        "pmf": subset_map_to_json(&c.pmf),
        "loglik": c.loglik,
        "members": c.members,
        "boundary": c.boundary,
    })
}

pub fn fit_result_to_json(f: &FitResult) -> Value {
    let boundary = f.boundary.map_or(Value::Null, |b| {
        json!({
            "max_abs_coordinate": b.max_abs_coordinate,
            "min_probability": b.min_probability,
            "iterations": b.iterations,
        })
    });
    json!({
        "model": f.model.to_string(),
        "d": f.pmf_hat.d(),
        "n": f.pmf_hat.n(),
        "estimate": reparam_to_json(&f.estimate),
        "chart": f.chart.matrix().to_rows(),
        "pmf_hat": subset_map_to_json(&f.pmf_hat),
        "loglik": f.loglik,
        "grad_norm": f.grad_norm,
        "restarts_used": f.restarts_used,
        "converged": f.converged,
        "distinct_optima": f.distinct_optima.iter().map(cluster_to_json).collect::<Vec<_>>(),
        "boundary": boundary,
    })
}

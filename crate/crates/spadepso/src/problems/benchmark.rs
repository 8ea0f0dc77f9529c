//! Configurable benchmark suite: classic base functions composed with a
//! shift, an optional orthogonal rotation, a per-function input scale, and a
//! constant bias, so each instance's optimum sits at a known shifted point
//! with a known value.

use crate::swarm::{Bounds, Objective};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{E, PI};
use std::path::Path;

/// The base (untransformed) test functions. Each has a known optimum value of
/// 0 at a known point (the origin for most; see [`BaseFunction::optimum_z`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseFunction {
    Sphere,
    Elliptic,
    BentCigar,
    Discus,
    Rosenbrock,
    Ackley,
    Weierstrass,
    Griewank,
    Rastrigin,
    ModifiedSchwefel,
    Katsuura,
    HappyCat,
    HgBat,
    GriewankRosenbrock,
    SchafferF6,
}

impl BaseFunction {
    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Elliptic => "elliptic",
            BaseFunction::BentCigar => "bent_cigar",
            BaseFunction::Discus => "discus",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Weierstrass => "weierstrass",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::ModifiedSchwefel => "modified_schwefel",
            BaseFunction::Katsuura => "katsuura",
            BaseFunction::HappyCat => "happy_cat",
            BaseFunction::HgBat => "hgbat",
            BaseFunction::GriewankRosenbrock => "griewank_rosenbrock",
            BaseFunction::SchafferF6 => "schaffer_f6",
        }
    }

    /// Scale applied to `x - shift` before rotation, matching each base
    /// function's natural domain inside the common [-100, 100] search box.
    pub fn input_scale(self) -> f64 {
        match self {
            BaseFunction::Rosenbrock => 2.048 / 100.0,
            BaseFunction::Weierstrass => 0.5 / 100.0,
            BaseFunction::Griewank => 6.0,
            BaseFunction::Rastrigin => 5.12 / 100.0,
            BaseFunction::ModifiedSchwefel => 10.0,
            BaseFunction::Katsuura
            | BaseFunction::HappyCat
            | BaseFunction::HgBat
            | BaseFunction::GriewankRosenbrock => 5.0 / 100.0,
            _ => 1.0,
        }
    }

    /// Constant added after rotation so the function's natural optimum point
    /// lands exactly on the shift vector.
    pub fn inner_shift(self) -> f64 {
        match self {
            // Optimum of the base at z = 1.
            BaseFunction::Rosenbrock | BaseFunction::GriewankRosenbrock => 1.0,
            // Optimum of the base at z = -1.
            BaseFunction::HappyCat | BaseFunction::HgBat => -1.0,
            _ => 0.0,
        }
    }

    /// The point where the base function attains its optimum value 0 (after
    /// the inner shift has been applied, this is always reachable at x = o).
    pub fn optimum_z(self, dim: usize) -> Vec<f64> {
        let v = self.inner_shift();
        vec![v; dim]
    }

    /// Raw base function value at `z`.
    pub fn evaluate(self, z: &[f64]) -> f64 {
        let d = z.len();
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::Elliptic => {
                if d == 1 {
                    return z[0] * z[0];
                }
                z.iter()
                    .enumerate()
                    .map(|(i, v)| 1e6f64.powf(i as f64 / (d as f64 - 1.0)) * v * v)
                    .sum()
            }
            BaseFunction::BentCigar => {
                z[0] * z[0] + 1e6 * z.iter().skip(1).map(|v| v * v).sum::<f64>()
            }
            BaseFunction::Discus => {
                1e6 * z[0] * z[0] + z.iter().skip(1).map(|v| v * v).sum::<f64>()
            }
            BaseFunction::Rosenbrock => (0..d.saturating_sub(1))
                .map(|i| {
                    let a = z[i] * z[i] - z[i + 1];
                    let b = z[i] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
            BaseFunction::Ackley => {
                let sum_sq: f64 = z.iter().map(|v| v * v).sum();
                let sum_cos: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
                -20.0 * (-0.2 * (sum_sq / d as f64).sqrt()).exp()
                    - (sum_cos / d as f64).exp()
                    + 20.0
                    + E
            }
            BaseFunction::Weierstrass => {
                const A: f64 = 0.5;
                const B: f64 = 3.0;
                const KMAX: u32 = 20;
                let mut total = 0.0;
                for &v in z {
                    for k in 0..=KMAX {
                        total += A.powi(k as i32) * (2.0 * PI * B.powi(k as i32) * (v + 0.5)).cos();
                    }
                }
                let baseline: f64 = (0..=KMAX)
                    .map(|k| A.powi(k as i32) * (PI * B.powi(k as i32)).cos())
                    .sum();
                total - d as f64 * baseline
            }
            BaseFunction::Griewank => {
                let sum: f64 = z.iter().map(|v| v * v / 4000.0).sum();
                let prod: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                sum - prod + 1.0
            }
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BaseFunction::ModifiedSchwefel => {
                let dd = d as f64;
                let mut total = 0.0;
                for &v in z {
                    let w = v + 4.209687462275036e2;
                    let g = if w.abs() <= 500.0 {
                        w * w.abs().sqrt().sin()
                    } else if w > 500.0 {
                        let m = 500.0 - (w % 500.0);
                        m * m.abs().sqrt().sin() - (w - 500.0) * (w - 500.0) / (10000.0 * dd)
                    } else {
                        let m = (w.abs() % 500.0) - 500.0;
                        m * m.abs().sqrt().sin() - (w + 500.0) * (w + 500.0) / (10000.0 * dd)
                    };
                    total += g;
                }
                4.189828872724338e2 * dd - total
            }
            BaseFunction::Katsuura => {
                let dd = d as f64;
                let coef = 10.0 / (dd * dd);
                let expo = 10.0 / dd.powf(1.2);
                let mut prod = 1.0;
                for (i, &v) in z.iter().enumerate() {
                    let mut inner = 0.0;
                    for j in 1..=32u32 {
                        let pow = (2.0f64).powi(j as i32);
                        inner += (pow * v - (pow * v).round()).abs() / pow;
                    }
                    prod *= (1.0 + (i as f64 + 1.0) * inner).powf(expo);
                }
                coef * prod - coef
            }
            BaseFunction::HappyCat => {
                let dd = d as f64;
                let sum_sq: f64 = z.iter().map(|v| v * v).sum();
                let sum: f64 = z.iter().sum();
                (sum_sq - dd).abs().powf(0.25) + (0.5 * sum_sq + sum) / dd + 0.5
            }
            BaseFunction::HgBat => {
                let dd = d as f64;
                let sum_sq: f64 = z.iter().map(|v| v * v).sum();
                let sum: f64 = z.iter().sum();
                (sum_sq * sum_sq - sum * sum).abs().sqrt() + (0.5 * sum_sq + sum) / dd + 0.5
            }
            BaseFunction::GriewankRosenbrock => {
                let mut total = 0.0;
                for i in 0..d {
                    let x = z[i];
                    let y = z[(i + 1) % d];
                    let a = x * x - y;
                    let b = x - 1.0;
                    let t = 100.0 * a * a + b * b;
                    total += t * t / 4000.0 - t.cos() + 1.0;
                }
                total
            }
            BaseFunction::SchafferF6 => {
                let mut total = 0.0;
                for i in 0..d {
                    let x = z[i];
                    let y = z[(i + 1) % d];
                    let s = x * x + y * y;
                    let num = s.sqrt().sin().powi(2) - 0.5;
                    let den = (1.0 + 0.001 * s).powi(2);
                    total += 0.5 + num / den;
                }
                total
            }
        }
    }
}

/// A benchmark instance: `f(x) = base(M * (scale * (x - o)) + inner) + bias`
/// on the common search box [-100, 100]^D.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedFunction {
    name: String,
    base: BaseFunction,
    shift: Vec<f64>,
    rotation: Option<Vec<Vec<f64>>>,
    bias: f64,
    bounds: Bounds,
}

/// Maximum allowed deviation of `M * M^T` from the identity.
const ORTHOGONALITY_TOL: f64 = 1e-9;

impl TransformedFunction {
    /// Builds an instance from explicit transform data, validating shapes and
    /// rotation orthogonality.
    pub fn new(
        name: impl Into<String>,
        base: BaseFunction,
        shift: Vec<f64>,
        rotation: Option<Vec<Vec<f64>>>,
        bias: f64,
    ) -> Result<Self> {
        let dim = shift.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty shift vector".into()));
        }
        if let Some(m) = &rotation {
            if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                return Err(Error::InvalidInput(format!(
                    "rotation matrix must be {dim}x{dim}"
                )));
            }
            let err = orthogonality_error(m);
            if err > ORTHOGONALITY_TOL {
                return Err(Error::InvalidInput(format!(
                    "rotation matrix is not orthogonal (max |M*M^T - I| = {err:.3e})"
                )));
            }
        }
        Ok(TransformedFunction {
            name: name.into(),
            base,
            shift,
            rotation,
            bias,
            bounds: Bounds::uniform(dim, -100.0, 100.0)?,
        })
    }

    /// Unshifted, unrotated, zero-bias instance (plain base function on the
    /// standard box).
    pub fn plain(name: impl Into<String>, base: BaseFunction, dim: usize) -> Result<Self> {
        Self::new(name, base, vec![0.0; dim], None, 0.0)
    }

    /// Instance with a seeded random shift in [-80, 80]^D and (optionally) a
    /// seeded random orthogonal rotation. The same seed always produces the
    /// same instance.
    pub fn seeded(
        name: impl Into<String>,
        base: BaseFunction,
        dim: usize,
        rotated: bool,
        bias: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..dim).map(|_| -80.0 + 160.0 * rng.gen::<f64>()).collect();
        let rotation = if rotated {
            Some(seeded_rotation(dim, &mut rng))
        } else {
            None
        };
        Self::new(name, base, shift, rotation, bias)
    }

    /// Loads transform data from a text file (see [`save_transform`] for the
    /// format). Unrotated instances ignore the file's rotation block.
    pub fn from_file(
        name: impl Into<String>,
        base: BaseFunction,
        dim: usize,
        rotated: bool,
        bias: f64,
        path: &Path,
    ) -> Result<Self> {
        let (shift, rotation) = load_transform(path, dim)?;
        Self::new(name, base, shift, if rotated { Some(rotation) } else { None }, bias)
    }

    pub fn base(&self) -> BaseFunction {
        self.base
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn rotation(&self) -> Option<&Vec<Vec<f64>>> {
        self.rotation.as_ref()
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Applies scale, shift, rotation, and inner shift.
    fn transform(&self, x: &[f64]) -> Vec<f64> {
        let scale = self.base.input_scale();
        let inner = self.base.inner_shift();
        let y: Vec<f64> = x
            .iter()
            .zip(&self.shift)
            .map(|(v, o)| scale * (v - o))
            .collect();
        let mut z = match &self.rotation {
            Some(m) => m
                .iter()
                .map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum())
                .collect(),
            None => y,
        };
        if inner != 0.0 {
            for v in z.iter_mut() {
                *v += inner;
            }
        }
        z
    }

    /// Bounds-checked evaluation: out-of-box inputs are an error.
    pub fn eval_checked(&self, x: &[f64]) -> Result<f64> {
        if !self.bounds.contains(x) {
            return Err(Error::InvalidInput(format!(
                "input outside [-100, 100]^{} for `{}`",
                self.bounds.dim(),
                self.name
            )));
        }
        Ok(self.evaluate(x))
    }
}

impl Objective for TransformedFunction {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.bounds.dim()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        self.base.evaluate(&self.transform(x)) + self.bias
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(self.bias)
    }
}

/// Max absolute deviation of `M * M^T` from the identity matrix.
pub fn orthogonality_error(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| m[i][k] * m[j][k]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Random orthogonal matrix: seeded Gaussian entries orthonormalised by two
/// passes of modified Gram-Schmidt (the second pass scrubs the numerical
/// residue of the first).
pub fn seeded_rotation(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    for _pass in 0..2 {
        for i in 0..dim {
            let (done, rest) = m.split_at_mut(i);
            let row = &mut rest[0];
            for prev in done.iter() {
                let dot: f64 = row.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (r, p) in row.iter_mut().zip(prev) {
                    *r -= dot * p;
                }
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            debug_assert!(norm > 0.0, "degenerate Gaussian row");
            for r in row.iter_mut() {
                *r /= norm;
            }
        }
    }
    m
}

/// Writes a transform file: one line with the shift vector, then one line per
/// rotation-matrix row, whitespace-separated decimal values.
pub fn save_transform(path: &Path, shift: &[f64], rotation: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    let fmt_row = |row: &[f64]| {
        row.iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    text.push_str(&fmt_row(shift));
    text.push('\n');
    for row in rotation {
        text.push_str(&fmt_row(row));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a transform file written by [`save_transform`] (or any file in the
/// same format): shift line first, then `dim` rotation rows.
pub fn load_transform(path: &Path, dim: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parse_row = |line: &str, line_no: usize| -> Result<Vec<f64>> {
        let row: std::result::Result<Vec<f64>, _> =
            line.split_whitespace().map(str::parse::<f64>).collect();
        let row = row.map_err(|e| Error::Parse {
            what: path.display().to_string(),
            message: format!("line {line_no}: {e}"),
        })?;
        if row.len() != dim {
            return Err(Error::Parse {
                what: path.display().to_string(),
                message: format!("line {line_no}: expected {dim} values, found {}", row.len()),
            });
        }
        Ok(row)
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let shift = parse_row(
        lines.next().ok_or_else(|| Error::Parse {
            what: path.display().to_string(),
            message: "missing shift line".into(),
        })?,
        1,
    )?;
    let mut rotation = Vec::with_capacity(dim);
    for i in 0..dim {
        let line = lines.next().ok_or_else(|| Error::Parse {
            what: path.display().to_string(),
            message: format!("missing rotation row {} of {dim}", i + 1),
        })?;
        rotation.push(parse_row(line, i + 2)?);
    }
    Ok((shift, rotation))
}

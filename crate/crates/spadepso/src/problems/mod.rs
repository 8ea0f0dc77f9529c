//! Problem registry: the shifted/rotated benchmark suite, the radar
//! polyphase-code design problem, and HIV ODE model inference, all behind
//! string ids so the experiment harness can instantiate them uniformly.

pub mod benchmark;
pub mod ode;
pub mod ssrp;

pub use benchmark::{
    load_transform, orthogonality_error, save_transform, seeded_rotation, BaseFunction,
    TransformedFunction,
};
pub use ode::{OdeGenome, OdeInference, Trajectory};
pub use ssrp::SsrpInstance;

use crate::swarm::Objective;
use crate::{Error, Result};
use std::path::Path;

/// One entry of the numbered benchmark suite.
#[derive(Debug, Clone, Copy)]
pub struct SuiteEntry {
    pub id: &'static str,
    pub base: BaseFunction,
    pub rotated: bool,
    pub bias: f64,
}

/// The sixteen numbered benchmark instances: unimodal (f1-f3), a narrow
/// valley (f4), classic multimodal landscapes (f5-f11, with f8 and f10 kept
/// axis-aligned), and hybrid-flavoured compositions (f12-f16). The bias
/// encodes the function number so reported raw fitnesses are unambiguous.
pub const SUITE: [SuiteEntry; 16] = [
    SuiteEntry { id: "f1", base: BaseFunction::Elliptic, rotated: true, bias: 100.0 },
    SuiteEntry { id: "f2", base: BaseFunction::BentCigar, rotated: true, bias: 200.0 },
    SuiteEntry { id: "f3", base: BaseFunction::Discus, rotated: true, bias: 300.0 },
    SuiteEntry { id: "f4", base: BaseFunction::Rosenbrock, rotated: true, bias: 400.0 },
    SuiteEntry { id: "f5", base: BaseFunction::Ackley, rotated: true, bias: 500.0 },
    SuiteEntry { id: "f6", base: BaseFunction::Weierstrass, rotated: true, bias: 600.0 },
    SuiteEntry { id: "f7", base: BaseFunction::Griewank, rotated: true, bias: 700.0 },
    SuiteEntry { id: "f8", base: BaseFunction::Rastrigin, rotated: false, bias: 800.0 },
    SuiteEntry { id: "f9", base: BaseFunction::Rastrigin, rotated: true, bias: 900.0 },
    SuiteEntry { id: "f10", base: BaseFunction::ModifiedSchwefel, rotated: false, bias: 1000.0 },
    SuiteEntry { id: "f11", base: BaseFunction::ModifiedSchwefel, rotated: true, bias: 1100.0 },
    SuiteEntry { id: "f12", base: BaseFunction::Katsuura, rotated: true, bias: 1200.0 },
    SuiteEntry { id: "f13", base: BaseFunction::HappyCat, rotated: true, bias: 1300.0 },
    SuiteEntry { id: "f14", base: BaseFunction::HgBat, rotated: true, bias: 1400.0 },
    SuiteEntry { id: "f15", base: BaseFunction::GriewankRosenbrock, rotated: true, bias: 1500.0 },
    SuiteEntry { id: "f16", base: BaseFunction::SchafferF6, rotated: true, bias: 1600.0 },
];

/// Every id accepted by [`make_objective`], in display order.
pub fn valid_ids() -> Vec<&'static str> {
    let mut ids = vec!["sphere"];
    ids.extend(SUITE.iter().map(|e| e.id));
    ids.extend(["ssrp", "ode", "ode-params"]);
    ids
}

/// 64-bit FNV-1a hash, used to derive per-instance seeds from stable names.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Seed for a problem instance's transform data: the experiment base seed
/// XOR-folded with a hash of `"<id>_D<dim>"`, so different functions and
/// dimensions get unrelated shifts/rotations while remaining reproducible.
pub fn instance_seed(base_seed: u64, id: &str, dim: usize) -> u64 {
    base_seed ^ fnv1a(format!("{id}_D{dim}").as_bytes())
}

/// Natural dimension for problems that have one; benchmark ids require an
/// explicit dimension.
pub fn default_dimension(id: &str) -> Option<usize> {
    match id {
        "ssrp" => Some(20),
        "ode" => Some(15),
        "ode-params" => Some(12),
        _ => None,
    }
}

/// Default evaluation budget: 10000 per dimension, except the fixed-structure
/// ODE fit which uses its conventional 150000-evaluation protocol.
pub fn default_budget(id: &str, dim: usize) -> usize {
    match id {
        "ode-params" => 150_000,
        _ => dim * 10_000,
    }
}

/// Name of the transform data file for a benchmark instance.
pub fn transform_file_name(id: &str, dim: usize) -> String {
    format!("{id}_D{dim}.txt")
}

fn unknown(id: &str) -> Error {
    Error::UnknownProblem {
        id: id.to_string(),
        valid: valid_ids().join(", "),
    }
}

/// Instantiates a problem by id.
///
/// `dim` is the resolved dimension (callers may first consult
/// [`default_dimension`]). For suite functions the shift and rotation are
/// derived from [`instance_seed`] unless `data_dir` is given, in which case
/// the transform is loaded from `<data_dir>/<id>_D<dim>.txt` and a missing
/// file is an error.
pub fn make_objective(
    id: &str,
    dim: usize,
    base_seed: u64,
    data_dir: Option<&Path>,
) -> Result<Box<dyn Objective>> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    match id {
        "sphere" => Ok(Box::new(TransformedFunction::plain(
            "sphere",
            BaseFunction::Sphere,
            dim,
        )?)),
        "ssrp" => Ok(Box::new(SsrpInstance::new(dim)?)),
        "ode" => {
            if dim != 15 {
                return Err(Error::InvalidInput(format!(
                    "problem `ode` is 15-dimensional, requested {dim}"
                )));
            }
            Ok(Box::new(OdeInference::full()))
        }
        "ode-params" => {
            if dim != 12 {
                return Err(Error::InvalidInput(format!(
                    "problem `ode-params` is 12-dimensional, requested {dim}"
                )));
            }
            Ok(Box::new(OdeInference::fixed_structure(ode::TRUE_SERIALS)?))
        }
        _ => {
            let entry = SUITE.iter().find(|e| e.id == id).ok_or_else(|| unknown(id))?;
            if dim < 2 {
                return Err(Error::InvalidInput(format!(
                    "benchmark `{id}` needs at least 2 dimensions, requested {dim}"
                )));
            }
            let f = match data_dir {
                Some(dir) => TransformedFunction::from_file(
                    entry.id,
                    entry.base,
                    dim,
                    entry.rotated,
                    entry.bias,
                    &dir.join(transform_file_name(id, dim)),
                )?,
                None => TransformedFunction::seeded(
                    entry.id,
                    entry.base,
                    dim,
                    entry.rotated,
                    entry.bias,
                    instance_seed(base_seed, id, dim),
                )?,
            };
            Ok(Box::new(f))
        }
    }
}

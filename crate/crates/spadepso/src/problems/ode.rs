//! Dynamic-system structure and parameter inference. A three-variable ODE
//! model family is encoded so that each equation's structure (term signs and
//! which state variables appear) is a single integer serial in [1, 192],
//! while its four rate constants are real parameters. Candidate models are
//! scored by integrating them with a fixed-step fourth-order Runge-Kutta
//! scheme and summing squared deviations from a reference trajectory
//! generated by a known viral-dynamics model.

use crate::swarm::{Bounds, Objective};
use crate::{Error, Result};

/// The three state variables, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateVar {
    T,
    I,
    V,
}

impl StateVar {
    pub fn all() -> [StateVar; 3] {
        [StateVar::T, StateVar::I, StateVar::V]
    }

    pub fn index(self) -> usize {
        match self {
            StateVar::T => 0,
            StateVar::I => 1,
            StateVar::V => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            StateVar::T => 'T',
            StateVar::I => 'I',
            StateVar::V => 'V',
        }
    }

    /// The two variables other than equation `equation`'s own, in canonical
    /// order. These are the candidates for the linear cross term.
    pub fn non_self(equation: usize) -> Result<[StateVar; 2]> {
        match equation {
            0 => Ok([StateVar::I, StateVar::V]),
            1 => Ok([StateVar::T, StateVar::V]),
            2 => Ok([StateVar::T, StateVar::I]),
            _ => Err(Error::InvalidInput(format!(
                "equation index {equation} out of range 0..3"
            ))),
        }
    }
}

/// Unordered variable pairs for the quadratic term, in canonical order
/// (the enumeration cycles through these fastest when serials increase).
pub const PAIRS: [(StateVar, StateVar); 6] = [
    (StateVar::T, StateVar::T),
    (StateVar::T, StateVar::I),
    (StateVar::T, StateVar::V),
    (StateVar::I, StateVar::I),
    (StateVar::I, StateVar::V),
    (StateVar::V, StateVar::V),
];

/// Structure of one equation
/// `dx/dt = s1*k1*x_self + s2*k2*x_a + s3*k3*x_b*x_c + s4*k4`:
/// the four term signs, the cross-term variable, and the quadratic pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationStructure {
    /// Signs of the four terms; each entry is +1 or -1.
    pub signs: [i8; 4],
    /// Variable in the linear cross term (never the equation's own variable).
    pub x_a: StateVar,
    /// Unordered pair in the quadratic term, stored in canonical order.
    pub pair: (StateVar, StateVar),
}

/// Number of distinct structures per equation.
pub const SERIAL_COUNT: u32 = 192;

/// Decodes a structure serial in [1, 192] for the given equation (0..3).
///
/// `serial - 1` factors as `12*b + 6*a + p` where `p` indexes the quadratic
/// pair (fastest), `a` indexes the cross-term variable, and `b` is the sign
/// pattern as a 4-bit counter with `+` = 0 and the fourth sign as the
/// least-significant bit.
pub fn decode_structure(serial: u32, equation: usize) -> Result<EquationStructure> {
    if !(1..=SERIAL_COUNT).contains(&serial) {
        return Err(Error::InvalidInput(format!(
            "structure serial {serial} out of range 1..={SERIAL_COUNT}"
        )));
    }
    let options = StateVar::non_self(equation)?;
    let s = serial - 1;
    let p = (s % 6) as usize;
    let a = ((s / 6) % 2) as usize;
    let b = s / 12;
    let sign_of = |bit: u32| if b & (1 << bit) != 0 { -1i8 } else { 1i8 };
    Ok(EquationStructure {
        signs: [sign_of(3), sign_of(2), sign_of(1), sign_of(0)],
        x_a: options[a],
        pair: PAIRS[p],
    })
}

/// Inverse of [`decode_structure`]; the pair may be given in either order.
pub fn encode_structure(structure: &EquationStructure, equation: usize) -> Result<u32> {
    let options = StateVar::non_self(equation)?;
    let a = options
        .iter()
        .position(|v| *v == structure.x_a)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "cross-term variable {} is not valid for equation {}",
                structure.x_a.label(),
                equation + 1
            ))
        })? as u32;
    let (lo, hi) = {
        let (x, y) = structure.pair;
        if x.index() <= y.index() {
            (x, y)
        } else {
            (y, x)
        }
    };
    let p = PAIRS
        .iter()
        .position(|pp| *pp == (lo, hi))
        .expect("all ordered pairs are listed") as u32;
    let mut b = 0u32;
    for (bit, sign) in structure.signs.iter().enumerate() {
        match sign {
            1 => {}
            -1 => b |= 1 << (3 - bit),
            other => {
                return Err(Error::InvalidInput(format!(
                    "sign entries must be +1 or -1, found {other}"
                )))
            }
        }
    }
    Ok(12 * b + 6 * a + p + 1)
}

/// Maps a real search coordinate to a serial by rounding to the nearest
/// integer and clamping into [1, 192].
pub fn round_serial(x: f64) -> u32 {
    let r = x.round();
    if r.is_nan() || r < 1.0 {
        1
    } else if r > SERIAL_COUNT as f64 {
        SERIAL_COUNT
    } else {
        r as u32
    }
}

/// Serials of the data-generating model's three equations.
pub const TRUE_SERIALS: [u32; 3] = [123, 99, 129];

/// Rate constants of the data-generating model, one row of [k1, k2, k3, k4]
/// per equation.
pub fn true_parameters() -> [[f64; 4]; 3] {
    [
        [0.15, 0.0, 2e-5, 80.0],
        [0.55, 0.0, 2e-5, 0.0],
        [0.55, 495.0, 2e-5, 0.0],
    ]
}

/// A fully specified candidate model: three structures plus their rate
/// constants.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeGenome {
    pub params: [[f64; 4]; 3],
    pub serials: [u32; 3],
    structures: [EquationStructure; 3],
}

impl OdeGenome {
    pub fn new(params: [[f64; 4]; 3], serials: [u32; 3]) -> Result<Self> {
        let structures = [
            decode_structure(serials[0], 0)?,
            decode_structure(serials[1], 1)?,
            decode_structure(serials[2], 2)?,
        ];
        Ok(OdeGenome {
            params,
            serials,
            structures,
        })
    }

    /// The data-generating viral-dynamics model.
    pub fn true_model() -> Self {
        Self::new(true_parameters(), TRUE_SERIALS).expect("true serials are valid")
    }

    /// Decodes a 15-dimensional search point: twelve rate constants in
    /// equation-major order followed by three structure coordinates.
    pub fn from_search_point(x: &[f64]) -> Result<Self> {
        if x.len() != 15 {
            return Err(Error::InvalidInput(format!(
                "combined search point must have 15 dimensions, found {}",
                x.len()
            )));
        }
        let serials = [round_serial(x[12]), round_serial(x[13]), round_serial(x[14])];
        Self::from_parameters(&x[..12], serials)
    }

    /// Decodes a 12-dimensional parameter vector against fixed structures.
    pub fn from_parameters(x: &[f64], serials: [u32; 3]) -> Result<Self> {
        if x.len() != 12 {
            return Err(Error::InvalidInput(format!(
                "parameter vector must have 12 dimensions, found {}",
                x.len()
            )));
        }
        let mut params = [[0.0; 4]; 3];
        for eq in 0..3 {
            params[eq].copy_from_slice(&x[4 * eq..4 * eq + 4]);
        }
        Self::new(params, serials)
    }

    pub fn structures(&self) -> &[EquationStructure; 3] {
        &self.structures
    }

    /// Right-hand side of the candidate system at state `y`.
    pub fn rhs(&self, y: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for eq in 0..3 {
            let s = &self.structures[eq];
            let k = &self.params[eq];
            let sign = |i: usize| s.signs[i] as f64;
            out[eq] = sign(0) * k[0] * y[eq]
                + sign(1) * k[1] * y[s.x_a.index()]
                + sign(2) * k[2] * y[s.pair.0.index()] * y[s.pair.1.index()]
                + sign(3) * k[3];
        }
        out
    }
}

/// Right-hand side of the reference viral-dynamics model (uninfected cells
/// `T`, infected cells `I`, free virus `V`).
pub fn hiv_rhs(y: [f64; 3]) -> [f64; 3] {
    let [t, i, v] = y;
    [
        80.0 - 0.15 * t - 2e-5 * t * v,
        2e-5 * t * v - 0.55 * i,
        495.0 * i - 0.55 * v - 2e-5 * t * v,
    ]
}

/// Initial state of the reference trajectory.
pub const HIV_INIT: [f64; 3] = [100.0, 150.0, 50000.0];
/// Reference integration protocol: start time, step, and number of points
/// (including the initial state).
pub const TARGET_T0: f64 = 0.0;
pub const TARGET_DT: f64 = 0.1;
pub const TARGET_POINTS: usize = 100;

/// A fixed-step trajectory. `states` holds only finite points; if the
/// integration produced a non-finite state it stops early and `divergent`
/// is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<[f64; 3]>,
    pub divergent: bool,
}

impl Trajectory {
    /// Number of successfully completed integration steps.
    pub fn completed_steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }
}

/// Classic fourth-order Runge-Kutta with a fixed step. Integration stops
/// early (flagging divergence) as soon as a step produces a non-finite
/// component.
pub fn integrate_rk4<F: Fn([f64; 3]) -> [f64; 3]>(
    rhs: F,
    init: [f64; 3],
    t0: f64,
    dt: f64,
    points: usize,
) -> Trajectory {
    let mut states = Vec::with_capacity(points);
    states.push(init);
    let mut y = init;
    let mut divergent = false;
    for _ in 1..points {
        let k1 = rhs(y);
        let k2 = rhs(add_scaled(y, k1, dt / 2.0));
        let k3 = rhs(add_scaled(y, k2, dt / 2.0));
        let k4 = rhs(add_scaled(y, k3, dt));
        let mut next = y;
        for d in 0..3 {
            next[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        if next.iter().any(|v| !v.is_finite()) {
            divergent = true;
            break;
        }
        states.push(next);
        y = next;
    }
    Trajectory {
        t0,
        dt,
        states,
        divergent,
    }
}

fn add_scaled(y: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// The reference trajectory every candidate is scored against.
pub fn target_trajectory() -> Trajectory {
    integrate_rk4(hiv_rhs, HIV_INIT, TARGET_T0, TARGET_DT, TARGET_POINTS)
}

/// Objective value above which a candidate is known to have failed
/// integration rather than merely fitted poorly.
pub const DIVERGENCE_PENALTY_BASE: f64 = 1e12;

/// Sum of squared deviations between the candidate's trajectory and the
/// target, integrated from the same initial state with the same protocol.
/// Divergent or numerically overflowing candidates receive a penalty of
/// `1e12` minus the number of completed steps, so candidates that survive
/// longer score marginally better.
pub fn ode_objective(genome: &OdeGenome, target: &Trajectory) -> f64 {
    let cand = integrate_rk4(
        |y| genome.rhs(y),
        target.states[0],
        target.t0,
        target.dt,
        target.states.len(),
    );
    if cand.divergent {
        return DIVERGENCE_PENALTY_BASE - cand.completed_steps() as f64;
    }
    let mut sse = 0.0;
    for (a, b) in cand.states.iter().zip(&target.states) {
        for d in 0..3 {
            let diff = a[d] - b[d];
            sse += diff * diff;
        }
    }
    if sse.is_finite() {
        sse
    } else {
        DIVERGENCE_PENALTY_BASE - cand.completed_steps() as f64
    }
}

/// Renders a trajectory as CSV with header `t,T,I,V`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,T,I,V\n");
    for (k, s) in traj.states.iter().enumerate() {
        let t = traj.t0 + k as f64 * traj.dt;
        out.push_str(&format!("{t},{},{},{}\n", s[0], s[1], s[2]));
    }
    out
}

/// The inference objective. In `full` form the 15 search dimensions are the
/// twelve rate constants in [0, 1000] plus three structure coordinates in
/// [1, 192]; in `fixed_structure` form only the twelve rate constants are
/// searched and the structures are frozen.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeInference {
    name: &'static str,
    bounds: Bounds,
    frozen_serials: Option<[u32; 3]>,
    target: Trajectory,
}

impl OdeInference {
    pub fn full() -> Self {
        let mut lower = vec![0.0; 12];
        let mut upper = vec![1000.0; 12];
        lower.extend_from_slice(&[1.0; 3]);
        upper.extend_from_slice(&[SERIAL_COUNT as f64; 3]);
        OdeInference {
            name: "ode",
            bounds: Bounds::new(lower, upper).expect("static bounds"),
            frozen_serials: None,
            target: target_trajectory(),
        }
    }

    pub fn fixed_structure(serials: [u32; 3]) -> Result<Self> {
        for (eq, &s) in serials.iter().enumerate() {
            decode_structure(s, eq)?;
        }
        Ok(OdeInference {
            name: "ode-params",
            bounds: Bounds::uniform(12, 0.0, 1000.0).expect("static bounds"),
            frozen_serials: Some(serials),
            target: target_trajectory(),
        })
    }

    pub fn target(&self) -> &Trajectory {
        &self.target
    }

    pub fn genome_of(&self, x: &[f64]) -> Result<OdeGenome> {
        match self.frozen_serials {
            Some(serials) => OdeGenome::from_parameters(x, serials),
            None => OdeGenome::from_search_point(x),
        }
    }
}

impl Objective for OdeInference {
    fn name(&self) -> &str {
        self.name
    }

    fn dimension(&self) -> usize {
        self.bounds.dim()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let genome = self
            .genome_of(x)
            .expect("search points within bounds always decode");
        ode_objective(&genome, &self.target)
    }

    fn known_optimum(&self) -> Option<f64> {
        None
    }
}

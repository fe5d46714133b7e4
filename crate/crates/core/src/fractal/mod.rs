//! Sierpinski-gasket entanglement structures and the fractal network F(t).
//!
//! Coordinates live on an integer lattice: a gasket of `N` iterations has
//! outer corners `(0,0)`, `(2^N,0)` and `(0,2^N)`, so every shared corner
//! deduplicates exactly.

mod analytics;
mod qnet;

pub use analytics::{analytics, clustering_formula, write_analytics_csv, AnalyticsRecord, BruteForce, DegreeClass};
pub use qnet::{build_quantum_network, Channel, FractalNetwork};

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::qudit::{canonical_ghz, fidelity, tensor, QuditState};
use crate::walk::{sample_protocol, ProtocolSpec};
use crate::{Error, Result};

pub const MAX_ITERATION: usize = 10;

pub type Point = (u32, u32);

/// Lower-left-anchored triangle `(x, y, side)` with corners
/// `(x,y)`, `(x+side,y)`, `(x,y+side)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Tri {
    pub x: u32,
    pub y: u32,
    pub side: u32,
}

impl Tri {
    pub fn corners(self) -> [Point; 3] {
        [(self.x, self.y), (self.x + self.side, self.y), (self.x, self.y + self.side)]
    }

    /// The three half-size triangles at corners A, B and C.
    pub fn split(self) -> [Tri; 3] {
        let h = self.side / 2;
        [
            Tri { x: self.x, y: self.y, side: h },
            Tri { x: self.x + h, y: self.y, side: h },
            Tri { x: self.x, y: self.y + h, side: h },
        ]
    }
}

/// All sub-triangles of side `side` inside `root`.
pub(crate) fn triangles_at(root: Tri, side: u32) -> Vec<Tri> {
    let mut level = vec![root];
    while level[0].side > side {
        level = level.iter().flat_map(|t| t.split()).collect();
    }
    level
}

fn check_iteration(n: usize) -> Result<()> {
    if n > MAX_ITERATION {
        return Err(Error::InvalidParameters(format!(
            "iteration {n} outside 0..={MAX_ITERATION}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SierpinskiGasket {
    pub iteration: usize,
    /// Side length in units of the elementary side `L`.
    pub side_units: u32,
    pub vertices: Vec<Point>,
    /// Elementary triangles as vertex indices `[A, B, C]`; each is one
    /// 3-party GHZ resource.
    pub triangles: Vec<[usize; 3]>,
}

pub fn build_gasket(n: usize) -> Result<SierpinskiGasket> {
    check_iteration(n)?;
    let side = 1u32 << n;
    let mut index: BTreeMap<Point, usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for t in triangles_at(Tri { x: 0, y: 0, side }, 1) {
        let ids = t.corners().map(|p| {
            *index.entry(p).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            })
        });
        triangles.push(ids);
    }
    Ok(SierpinskiGasket { iteration: n, side_units: side, vertices, triangles })
}

/// One composition step: three corner GHZ states become one over the
/// outer corners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleMerge {
    pub target: Tri,
    /// Sub-triangles holding `(a, q1, q6)`, `(q2, b, q3)`, `(q5, q4, c)` in
    /// their natural corner order.
    pub parts: [Tri; 3],
}

/// Bottom-up merge order; `(3^N - 1) / 2` steps.
pub fn merge_schedule(n: usize) -> Result<Vec<TriangleMerge>> {
    check_iteration(n)?;
    if n == 0 {
        return Err(Error::InvalidParameters("a single triangle has nothing to merge".into()));
    }
    let root = Tri { x: 0, y: 0, side: 1 << n };
    let mut out = Vec::new();
    let mut side = 2;
    while side <= root.side {
        for t in triangles_at(root, side) {
            out.push(TriangleMerge { target: t, parts: t.split() });
        }
        side *= 2;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MergeExecution {
    pub merges: usize,
    pub outcomes: Vec<Vec<usize>>,
    pub min_step_fidelity: f64,
    /// Final state over the outer corners A, B, C.
    #[serde(skip)]
    pub state: QuditState,
    pub fidelity: f64,
}

/// Execute the merge schedule on the simulator with sampled outcomes.
pub fn simulate_merges(n: usize, d: usize, seed: u64) -> Result<MergeExecution> {
    let schedule = merge_schedule(n)?;
    let spec = if d == 2 { ProtocolSpec::triangle_2d() } else { ProtocolSpec::triangle_d(d) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: BTreeMap<Tri, QuditState> = BTreeMap::new();
    for t in triangles_at(Tri { x: 0, y: 0, side: 1 << n }, 1) {
        states.insert(t, canonical_ghz(d, 3)?);
    }
    let mut outcomes = Vec::new();
    let mut min_step = 1.0f64;
    for m in &schedule {
        let [ta, tb, tc] = m.parts.map(|p| states.remove(&p).expect("parts are built first"));
        // Corner order of the C part is (M_AC, M_BC, C) = (q5, q4, c).
        let tc = tc.permute_sites(&[1, 0, 2])?;
        let input = tensor(&tensor(&ta, &tb)?, &tc)?;
        let run = sample_protocol(&spec, &input, &mut rng)?;
        min_step = min_step.min(run.fidelity);
        outcomes.push(run.outcome);
        states.insert(m.target, run.state);
    }
    let state = states.into_values().next().expect("one triangle left");
    let fid = fidelity(&state, &canonical_ghz(d, 3)?)?;
    Ok(MergeExecution { merges: schedule.len(), outcomes, min_step_fidelity: min_step, state, fidelity: fid })
}

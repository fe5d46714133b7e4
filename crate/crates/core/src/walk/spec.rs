use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::qudit::{checked_size, BasisTag};
use crate::{Error, Result};

/// Every swapping / merging protocol the crate knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    BellSwap2D,
    GhzSwap2D,
    MergeMethod1,
    MergeMethod2,
    MergeCombined,
    BellSwapD,
    GhzParallelD,
    GhzSwapD,
    GhzMultiCoinD,
    GhzFromBellsD,
    TriangleMerge2D,
    TriangleMergeD,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 12] = [
        Self::BellSwap2D,
        Self::GhzSwap2D,
        Self::MergeMethod1,
        Self::MergeMethod2,
        Self::MergeCombined,
        Self::BellSwapD,
        Self::GhzParallelD,
        Self::GhzSwapD,
        Self::GhzMultiCoinD,
        Self::GhzFromBellsD,
        Self::TriangleMerge2D,
        Self::TriangleMergeD,
    ];

    /// Short command-line name.
    pub fn cli_name(self) -> &'static str {
        match self {
            Self::BellSwap2D => "bell2d",
            Self::GhzSwap2D => "ghz2d",
            Self::MergeMethod1 => "method1",
            Self::MergeMethod2 => "method2",
            Self::MergeCombined => "combined",
            Self::BellSwapD => "bell-d",
            Self::GhzParallelD => "ghz-parallel-d",
            Self::GhzSwapD => "ghz-d",
            Self::GhzMultiCoinD => "ghz-multicoin-d",
            Self::GhzFromBellsD => "ghz-from-bells-d",
            Self::TriangleMerge2D => "triangle2d",
            Self::TriangleMergeD => "triangle-d",
        }
    }

    /// Kinds that only exist for qubits.
    pub fn qubit_only(self) -> bool {
        matches!(
            self,
            Self::BellSwap2D
                | Self::GhzSwap2D
                | Self::MergeMethod1
                | Self::MergeMethod2
                | Self::MergeCombined
                | Self::TriangleMerge2D
        )
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.cli_name() == s || format!("{k:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameters(format!("unknown protocol '{s}'")))
    }
}

/// Protocol parameters. Fields a kind does not use stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    /// Number of Bell pairs feeding `GhzFromBellsD`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bells: Option<usize>,
    /// Input Bell labels `(m, n, p, q)` for `BellSwapD`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<[usize; 4]>,
    /// Keep the coin sites unmeasured.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub retain: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub local_dim: usize,
    pub params: ProtocolParams,
}

impl ProtocolSpec {
    fn new(kind: ProtocolKind, local_dim: usize, params: ProtocolParams) -> Self {
        Self { kind, local_dim, params }
    }

    pub fn bell_swap_2d() -> Self {
        Self::new(ProtocolKind::BellSwap2D, 2, ProtocolParams::default())
    }

    pub fn ghz_swap_2d() -> Self {
        Self::new(ProtocolKind::GhzSwap2D, 2, ProtocolParams::default())
    }

    pub fn method1(m: usize, n: usize, k: usize) -> Self {
        let p = ProtocolParams { m: Some(m), n: Some(n), k: Some(k), ..Default::default() };
        Self::new(ProtocolKind::MergeMethod1, 2, p)
    }

    pub fn method2(m: usize, n: usize, k: usize) -> Self {
        let p = ProtocolParams { m: Some(m), n: Some(n), k: Some(k), ..Default::default() };
        Self::new(ProtocolKind::MergeMethod2, 2, p)
    }

    pub fn combined(m: usize, n: usize, k: usize, l: usize) -> Self {
        let p = ProtocolParams {
            m: Some(m),
            n: Some(n),
            k: Some(k),
            l: Some(l),
            ..Default::default()
        };
        Self::new(ProtocolKind::MergeCombined, 2, p)
    }

    /// Swap `psi_{m,n} (x) psi_{p,q}` with labels `[m, n, p, q]`.
    pub fn bell_swap_d(d: usize, labels: [usize; 4]) -> Self {
        let p = ProtocolParams { labels: Some(labels), ..Default::default() };
        Self::new(ProtocolKind::BellSwapD, d, p)
    }

    pub fn ghz_parallel_d(d: usize, m: usize, n: usize, k: usize) -> Self {
        let p = ProtocolParams { m: Some(m), n: Some(n), k: Some(k), ..Default::default() };
        Self::new(ProtocolKind::GhzParallelD, d, p)
    }

    pub fn ghz_swap_d(d: usize) -> Self {
        Self::new(ProtocolKind::GhzSwapD, d, ProtocolParams::default())
    }

    pub fn ghz_multi_coin_d(d: usize, m: usize, n: usize) -> Self {
        let p = ProtocolParams { m: Some(m), n: Some(n), ..Default::default() };
        Self::new(ProtocolKind::GhzMultiCoinD, d, p)
    }

    pub fn ghz_from_bells_d(d: usize, bells: usize) -> Self {
        let p = ProtocolParams { bells: Some(bells), ..Default::default() };
        Self::new(ProtocolKind::GhzFromBellsD, d, p)
    }

    pub fn triangle_2d() -> Self {
        Self::new(ProtocolKind::TriangleMerge2D, 2, ProtocolParams::default())
    }

    pub fn triangle_d(d: usize) -> Self {
        Self::new(ProtocolKind::TriangleMergeD, d, ProtocolParams::default())
    }

    /// Keep coin sites unmeasured (Method 1, Method 2, GhzParallelD only).
    pub fn with_retain(mut self, retain: bool) -> Self {
        self.params.retain = retain;
        self
    }

    pub(crate) fn mnk(&self) -> (usize, usize, usize) {
        let p = &self.params;
        (p.m.unwrap_or(0), p.n.unwrap_or(0), p.k.unwrap_or(0))
    }

    /// Check parameter ranges for the kind.
    pub fn validate(&self) -> Result<()> {
        use ProtocolKind::*;
        let d = self.local_dim;
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if self.kind.qubit_only() && d != 2 {
            return Err(bad(format!("{} is defined for d = 2 only", self.kind)));
        }
        let p = &self.params;
        let need = |name: &str, v: Option<usize>| {
            v.ok_or_else(|| bad(format!("{} requires parameter {name}", self.kind)))
        };
        if p.retain && !matches!(self.kind, MergeMethod1 | MergeMethod2 | GhzParallelD) {
            return Err(bad(format!("{} has no retain variant", self.kind)));
        }
        match self.kind {
            MergeMethod1 => {
                let (m, n, k) = (need("m", p.m)?, need("n", p.n)?, need("k", p.k)?);
                if n < 2 || k < 1 || k + 1 > m {
                    return Err(bad(format!("Method 1 needs n >= 2 and 1 <= k <= m-1 (m={m}, n={n}, k={k})")));
                }
            }
            MergeMethod2 | GhzParallelD => {
                let (m, n, k) = (need("m", p.m)?, need("n", p.n)?, need("k", p.k)?);
                if k < 1 || k + 1 > m.min(n) {
                    return Err(bad(format!("parallel walks need 1 <= k <= min(m,n)-1 (m={m}, n={n}, k={k})")));
                }
            }
            MergeCombined => {
                let (m, n) = (need("m", p.m)?, need("n", p.n)?);
                let (k, l) = (need("k", p.k)?, need("l", p.l)?);
                if !(k > l && l >= 2 && k <= m && l <= n && k + l + 2 <= m + n) {
                    return Err(bad(format!(
                        "combined method needs k > l >= 2, k <= m, l <= n, k+l <= m+n-2 (m={m}, n={n}, k={k}, l={l})"
                    )));
                }
            }
            BellSwapD => {
                let labels = p.labels.ok_or_else(|| bad("BellSwapD requires labels".into()))?;
                if let Some(&v) = labels.iter().find(|&&v| v >= d) {
                    return Err(Error::ValueOutOfRange { value: v, dim: d });
                }
            }
            GhzMultiCoinD => {
                let (m, n) = (need("m", p.m)?, need("n", p.n)?);
                if m < 2 || n < 2 {
                    return Err(bad(format!("multi-coin merge needs m, n >= 2 (m={m}, n={n})")));
                }
            }
            GhzFromBellsD => {
                if need("bells", p.bells)? < 1 {
                    return Err(bad("at least one Bell pair is required".into()));
                }
            }
            BellSwap2D | GhzSwap2D | GhzSwapD | TriangleMerge2D | TriangleMergeD => {}
        }
        checked_size(d, self.plan()?.site_count())?;
        Ok(())
    }

    /// Number of parties in the output state.
    pub fn output_parties(&self) -> Result<usize> {
        Ok(self.plan()?.outputs().len())
    }

    pub(crate) fn plan(&self) -> Result<Plan> {
        build_plan(self)
    }
}

fn bad(msg: String) -> Error {
    Error::InvalidParameters(msg)
}

/// Elementary resource in the initial product state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Input {
    Ghz(usize),
    Bell(usize, usize),
}

impl Input {
    fn width(self) -> usize {
        match self {
            Input::Ghz(k) => k,
            Input::Bell(..) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Coin {
    Identity,
    X,
    Hadamard,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Walk { coin: usize, pos: usize, op: Coin },
    InverseFourier(usize),
}

/// Circuit layout of one protocol instance.
#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub inputs: Vec<Input>,
    pub labels: Vec<String>,
    pub steps: Vec<Step>,
    pub measured: Vec<(usize, BasisTag)>,
}

impl Plan {
    pub fn site_count(&self) -> usize {
        self.inputs.iter().map(|i| i.width()).sum()
    }

    /// Unmeasured sites in ascending order (the post-state order).
    pub fn outputs(&self) -> Vec<usize> {
        (0..self.site_count()).filter(|s| !self.measured.iter().any(|m| m.0 == *s)).collect()
    }
}

fn party_labels(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}{i}"))
}

fn build_plan(spec: &ProtocolSpec) -> Result<Plan> {
    use BasisTag::{Computational as C, Fourier as F};
    use ProtocolKind::*;
    let p = &spec.params;
    let numbered = |n: usize| (1..=n).map(|i| i.to_string()).collect::<Vec<_>>();
    let plan = match spec.kind {
        BellSwap2D => Plan {
            inputs: vec![Input::Bell(0, 0); 2],
            labels: numbered(4),
            steps: vec![Step::Walk { coin: 1, pos: 2, op: Coin::X }],
            measured: vec![(1, F), (2, C)],
        },
        GhzSwap2D => Plan {
            inputs: vec![Input::Ghz(3); 2],
            labels: numbered(6),
            steps: vec![
                Step::Walk { coin: 1, pos: 3, op: Coin::X },
                Step::Walk { coin: 2, pos: 3, op: Coin::Hadamard },
            ],
            measured: vec![(1, F), (2, C), (3, C)],
        },
        MergeMethod1 => {
            let (m, n, k) = spec.mnk();
            let b1 = m;
            let mut steps = vec![Step::Walk { coin: 0, pos: b1, op: Coin::X }];
            steps.extend((1..k).map(|j| Step::Walk { coin: j, pos: b1, op: Coin::Hadamard }));
            let mut measured = Vec::new();
            if !p.retain {
                measured.push((0, F));
            }
            measured.extend((1..k).map(|j| (j, C)));
            measured.push((b1, C));
            Plan {
                inputs: vec![Input::Ghz(m), Input::Ghz(n)],
                labels: party_labels("a", m).chain(party_labels("b", n)).collect(),
                steps,
                measured,
            }
        }
        MergeMethod2 | GhzParallelD => {
            let (m, n, k) = spec.mnk();
            let op = if spec.kind == MergeMethod2 { Coin::X } else { Coin::Identity };
            let steps = (0..k).map(|j| Step::Walk { coin: j, pos: m + j, op }).collect();
            let mut measured = Vec::new();
            if !p.retain {
                measured.extend((0..k).map(|j| (j, F)));
            }
            measured.extend((0..k).map(|j| (m + j, C)));
            Plan {
                inputs: vec![Input::Ghz(m), Input::Ghz(n)],
                labels: party_labels("a", m).chain(party_labels("b", n)).collect(),
                steps,
                measured,
            }
        }
        MergeCombined => {
            let (m, n, k) = spec.mnk();
            let l = p.l.unwrap_or(0);
            let mut steps: Vec<Step> =
                (0..l).map(|j| Step::Walk { coin: j, pos: m + j, op: Coin::X }).collect();
            steps.extend((l..k).map(|j| Step::Walk { coin: j, pos: m + l - 1, op: Coin::Hadamard }));
            let mut measured: Vec<(usize, BasisTag)> = (0..l).map(|j| (j, F)).collect();
            measured.extend((l..k).map(|j| (j, C)));
            measured.extend((0..l).map(|j| (m + j, C)));
            Plan {
                inputs: vec![Input::Ghz(m), Input::Ghz(n)],
                labels: party_labels("a", m).chain(party_labels("b", n)).collect(),
                steps,
                measured,
            }
        }
        BellSwapD => {
            let [m, n, pp, q] = p.labels.unwrap_or([0; 4]);
            Plan {
                inputs: vec![Input::Bell(m, n), Input::Bell(pp, q)],
                labels: numbered(4),
                steps: vec![Step::Walk { coin: 1, pos: 2, op: Coin::Identity }],
                measured: vec![(1, F), (2, C)],
            }
        }
        GhzSwapD | GhzMultiCoinD => {
            let (m, n) = if spec.kind == GhzSwapD { (3, 3) } else { (p.m.unwrap_or(0), p.n.unwrap_or(0)) };
            let mut steps: Vec<Step> =
                (1..m).map(|j| Step::Walk { coin: j, pos: m, op: Coin::Fourier }).collect();
            steps.push(Step::InverseFourier(0));
            let mut measured: Vec<(usize, BasisTag)> = (1..m).map(|j| (j, F)).collect();
            measured.push((m, C));
            let labels = if spec.kind == GhzSwapD {
                numbered(6)
            } else {
                party_labels("a", m).chain(party_labels("b", n)).collect()
            };
            Plan { inputs: vec![Input::Ghz(m), Input::Ghz(n)], labels, steps, measured }
        }
        GhzFromBellsD => {
            let bells = p.bells.unwrap_or(0);
            let pos = 2 * bells;
            let mut steps: Vec<Step> = (0..bells)
                .map(|j| Step::Walk { coin: 2 * j + 1, pos, op: Coin::Fourier })
                .collect();
            steps.push(Step::InverseFourier(pos + 1));
            let mut measured: Vec<(usize, BasisTag)> = (0..bells).map(|j| (2 * j + 1, F)).collect();
            measured.push((pos, C));
            Plan {
                inputs: vec![Input::Bell(0, 0); bells + 1],
                labels: numbered(2 * bells + 2),
                steps,
                measured,
            }
        }
        TriangleMerge2D | TriangleMergeD => {
            // Site order: a, q1, q6, q2, b, q3, q4, q5, c.
            let labels = ["a", "q1", "q6", "q2", "b", "q3", "q4", "q5", "c"];
            let (steps, measured) = if spec.kind == TriangleMerge2D {
                (
                    vec![
                        Step::Walk { coin: 1, pos: 3, op: Coin::X },
                        Step::Walk { coin: 5, pos: 6, op: Coin::X },
                        Step::Walk { coin: 7, pos: 2, op: Coin::X },
                    ],
                    vec![(1, F), (5, F), (7, F), (3, C), (6, C), (2, C)],
                )
            } else {
                (
                    vec![
                        Step::Walk { coin: 1, pos: 3, op: Coin::Identity },
                        Step::Walk { coin: 6, pos: 5, op: Coin::Identity },
                        Step::Walk { coin: 7, pos: 2, op: Coin::Identity },
                    ],
                    vec![(1, F), (3, C), (6, F), (7, F), (2, C), (5, C)],
                )
            };
            Plan {
                inputs: vec![Input::Ghz(3); 3],
                labels: labels.iter().map(|s| s.to_string()).collect(),
                steps,
                measured,
            }
        }
    };
    Ok(plan)
}

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::build_quantum_network;
use crate::{Error, Result};

pub const MAX_ANALYTICS_T: usize = 30;
/// Largest `t` for which the graph is built and measured directly.
pub const BRUTE_FORCE_T: usize = 6;

/// Vertices of one generation `t_i >= 1`.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeClass {
    pub generation: usize,
    pub degree: u64,
    pub intermediate: f64,
    pub count: u64,
    /// Non-corner vertices with degree at least `degree`, over all `N(t)`.
    pub cumulative: f64,
    pub cumulative_exponential: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteForce {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub clustering: f64,
    /// Every generation-`t_i` vertex has degree `4(t - t_i + 1)`.
    pub degree_law_holds: bool,
    pub corner_degree: usize,
    /// `(k, fraction of all vertices with degree >= k)`, corners included.
    pub cumulative: Vec<(usize, f64)>,
    pub average_path_length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticsRecord {
    pub t: usize,
    pub nodes: u64,
    pub edges: u64,
    pub average_degree: f64,
    pub clustering: f64,
    pub degree_classes: Vec<DegreeClass>,
    pub brute_force: Option<BruteForce>,
}

fn pow3(e: usize) -> u64 {
    3u64.pow(e as u32)
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Closed-form average clustering of F(t), summed exactly.
pub fn clustering_exact(t: usize) -> BigRational {
    let total = pow3(t + 1) + 3;
    let mut c = BigRational::zero();
    for ti in 1..=t {
        let k = 4 * (t - ti + 1) as u64;
        // e = 4 + (3/2)(k - 4), so 4e / (k(k-1)) = (6k - 8) / (k(k-1)).
        c += ratio(pow3(ti), total) * ratio(6 * k - 8, k * (k - 1));
    }
    let t = t as u64;
    c += ratio(6, total) * ratio(3 * t + 1, (t + 1) * (2 * t + 1));
    c
}

pub fn clustering_formula(t: usize) -> f64 {
    clustering_exact(t).to_f64().unwrap_or(f64::NAN)
}

pub fn analytics(t: usize) -> Result<AnalyticsRecord> {
    if !(1..=MAX_ANALYTICS_T).contains(&t) {
        return Err(Error::InvalidParameters(format!("t = {t} outside 1..={MAX_ANALYTICS_T}")));
    }
    let nodes = (pow3(t + 1) + 3) / 2;
    let edges = (pow3(t + 2) - 3) / 2;
    let denom = pow3(t + 1) + 3;
    let degree_classes = (1..=t)
        .map(|ti| {
            let k = 4 * (t - ti + 1) as u64;
            DegreeClass {
                generation: ti,
                degree: k,
                intermediate: 4.0 + 1.5 * (k as f64 - 4.0),
                count: pow3(ti),
                cumulative: (pow3(ti + 1) - 3) as f64 / denom as f64,
                cumulative_exponential: 3.0 * (-(3f64.ln()) * k as f64 / 4.0).exp(),
            }
        })
        .collect();
    let brute_force = if t <= BRUTE_FORCE_T { Some(brute_force(t)?) } else { None };
    Ok(AnalyticsRecord {
        t,
        nodes,
        edges,
        average_degree: 2.0 * edges as f64 / nodes as f64,
        clustering: clustering_formula(t),
        degree_classes,
        brute_force,
    })
}

fn brute_force(t: usize) -> Result<BruteForce> {
    let net = build_quantum_network(t)?;
    let degrees = net.degrees();
    let n = degrees.len();
    let clustering = net.clustering().iter().sum::<f64>() / n as f64;
    let degree_law_holds = degrees
        .iter()
        .zip(&net.generation)
        .filter(|(_, &g)| g > 0)
        .all(|(&k, &g)| k == 4 * (t - g + 1));
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in &degrees {
        *hist.entry(k).or_default() += 1;
    }
    let mut above = 0;
    let mut cumulative: Vec<(usize, f64)> = hist
        .iter()
        .rev()
        .map(|(&k, &c)| {
            above += c;
            (k, above as f64 / n as f64)
        })
        .collect();
    cumulative.reverse();
    Ok(BruteForce {
        nodes: n,
        edges: net.edge_count(),
        average_degree: 2.0 * net.edge_count() as f64 / n as f64,
        clustering,
        degree_law_holds,
        corner_degree: degrees[0],
        cumulative,
        average_path_length: net.average_path_length(),
    })
}

/// CSV rows `t,N,E,k_avg,C_formula,C_bruteforce`.
pub fn write_analytics_csv<W: Write>(records: &[AnalyticsRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "N", "E", "k_avg", "C_formula", "C_bruteforce"])?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            r.nodes.to_string(),
            r.edges.to_string(),
            format!("{:.6}", r.average_degree),
            format!("{:.7}", r.clustering),
            r.brute_force.as_ref().map(|b| format!("{:.7}", b.clustering)).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

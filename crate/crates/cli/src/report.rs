//! Versioned JSON documents written by the CLI.
//!
//! Group, pair and coordinate indices are 1-based in every document.

use hdmanova::fanova::BasisFamily;
use hdmanova::harness::{ExperimentResult, TableRow};
use hdmanova::inference::TauDiagnostics;
use hdmanova::{ScrEntry, Side, TauPolicy, TestResult};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct GroupInfo {
    pub index: usize,
    pub label: String,
    pub n: usize,
}

impl GroupInfo {
    pub fn list(labels: &[String], sizes: &[usize]) -> Vec<GroupInfo> {
        labels
            .iter()
            .zip(sizes)
            .enumerate()
            .map(|(i, (label, &n))| GroupInfo { index: i + 1, label: label.clone(), n })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionOut {
    pub k: usize,
    pub l: usize,
    pub j: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub excludes_zero: bool,
}

impl From<&ScrEntry> for RegionOut {
    fn from(e: &ScrEntry) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        RegionOut {
            k: e.k + 1,
            l: e.l + 1,
            j: e.j + 1,
            lower: finite(e.lower),
            upper: finite(e.upper),
            excludes_zero: e.excludes_zero,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisOut {
    pub family: &'static str,
    pub p: usize,
    pub grid_points: usize,
}

impl BasisOut {
    pub fn new(family: BasisFamily, p: usize, grid_points: usize) -> Self {
        let family = match family {
            BasisFamily::FourierRaw => "raw",
            BasisFamily::FourierOrthonormal => "orthonormal",
        };
        BasisOut { family, p, grid_points }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub groups: Vec<GroupInfo>,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisOut>,
    pub rho: f64,
    pub side: Side,
    pub tau_policy: TauPolicy,
    pub replicates: usize,
    pub seed: u64,
    pub tau_used: f64,
    pub p_value: f64,
    pub reject: bool,
    pub pairs: Vec<[usize; 2]>,
    pub scr: Vec<RegionOut>,
    pub significant: Vec<[usize; 3]>,
    pub tau_diagnostics: Option<TauDiagnostics>,
}

pub struct TestContext<'a> {
    pub command: &'static str,
    pub labels: &'a [String],
    pub sizes: &'a [usize],
    pub dim: usize,
    pub basis: Option<BasisOut>,
    pub tau_policy: TauPolicy,
    pub replicates: usize,
    pub seed: u64,
}

impl TestReport {
    pub fn new(ctx: TestContext<'_>, res: &TestResult) -> Self {
        TestReport {
            schema_version: SCHEMA_VERSION,
            command: ctx.command,
            groups: GroupInfo::list(ctx.labels, ctx.sizes),
            dim: ctx.dim,
            basis: ctx.basis,
            rho: res.rho,
            side: res.side,
            tau_policy: ctx.tau_policy,
            replicates: ctx.replicates,
            seed: ctx.seed,
            tau_used: res.tau_used,
            p_value: res.p_value,
            reject: res.reject,
            pairs: res.pairs.pairs().iter().map(|&(k, l)| [k + 1, l + 1]).collect(),
            scr: res.scr.iter().map(RegionOut::from).collect(),
            significant: res.significant.iter().map(|&(k, l, j)| [k + 1, l + 1, j + 1]).collect(),
            tau_diagnostics: res.tau_diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub scenario: String,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub rho: f64,
    pub tau_policy: TauPolicy,
    pub replicates: usize,
    pub results: Vec<ExperimentResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub table: String,
    pub reps: usize,
    pub seed: u64,
    pub rho: f64,
    pub tau_policy: TauPolicy,
    pub replicates: usize,
    pub rows: Vec<TableRow>,
}

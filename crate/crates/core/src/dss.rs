//! Distributed storage simulator.
//!
//! A file is MDS-encoded into `theta` symbols and symbol `j` is copied to
//! every node `i` with `layout(i, j) = 1`. Reads, repairs and batch requests
//! are resolved by bipartite matching with ascending-index tie-breaks, so
//! every plan is reproducible.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::Witness;
use crate::combin::{binomial, combinations};
use crate::gf::{Field, FieldElement, GfError};
use crate::incidence::BinaryIncidenceMatrix;
use crate::matching::hopcroft_karp;
use crate::mds::{default_field_order, MdsCode, MdsError, MdsParams};

/// Failures kept verbatim in sweep reports; the rest are only counted.
pub const MAX_REPORTED_FAILURES: usize = 64;

/// `m` uniform symbols of GF(q) from a ChaCha8 stream seeded by `seed`.
pub fn random_file(q: u64, m: usize, seed: u64) -> Result<Vec<FieldElement>, GfError> {
    let field = Field::new(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| field.element(rng.gen_range(0..field.order())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DssError {
    #[error(transparent)]
    Mds(#[from] MdsError),
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("node {0} has failed")]
    NodeFailed(usize),
    #[error("node {0} listed twice")]
    DuplicateNode(usize),
    #[error("symbol {symbol} out of range (theta = {theta})")]
    SymbolOutOfRange { symbol: usize, theta: usize },
    #[error("symbol {0} requested twice")]
    DuplicateSymbol(usize),
    #[error("nodes hold {have} distinct symbols, file needs {need}")]
    InsufficientSymbols { need: usize, have: usize },
    #[error("node {node} has no set of distinct helpers")]
    NoDistinctHelpers { node: usize, certificate: Witness },
    #[error("request cannot be served one symbol per node")]
    Unservable { certificate: Witness },
    #[error("symbol {0} is stored on no node")]
    EmptyColumn(usize),
}

/// One symbol shipped by one helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub symbol: usize,
    pub helper: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPlan {
    pub failed_node: usize,
    pub transfers: Vec<Transfer>,
}

impl RepairPlan {
    pub fn helpers(&self) -> Vec<usize> {
        self.transfers.iter().map(|t| t.helper).collect()
    }

    pub fn helpers_distinct(&self) -> bool {
        let set: BTreeSet<_> = self.transfers.iter().map(|t| t.helper).collect();
        set.len() == self.transfers.len()
    }
}

/// Serving node of every requested symbol, sorted by symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchAssignment {
    pub assignment: Vec<(usize, usize)>,
}

impl BatchAssignment {
    pub fn node_for(&self, symbol: usize) -> Option<usize> {
        self.assignment
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .ok()
            .map(|i| self.assignment[i].1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSnapshot {
    pub mds: MdsParams,
    pub layout: String,
    pub codeword: Vec<u32>,
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StorageSystem {
    code: MdsCode,
    layout: BinaryIncidenceMatrix,
    codeword: Vec<FieldElement>,
    /// `None` while the node is failed.
    nodes: Vec<Option<Vec<(usize, FieldElement)>>>,
}

impl StorageSystem {
    /// Encodes `file` with a `(theta, |file|)` code over GF(q) (default: the
    /// smallest binary field of order at least `theta`) and places it.
    pub fn store(
        file: &[FieldElement],
        layout: BinaryIncidenceMatrix,
        q: Option<u64>,
    ) -> Result<Self, DssError> {
        if let Some(j) = layout.empty_column() {
            return Err(DssError::EmptyColumn(j));
        }
        let theta = layout.theta();
        let q = q.unwrap_or_else(|| default_field_order(theta));
        let code = MdsCode::new(theta, file.len(), q)?;
        let codeword = code.encode(file)?;
        let nodes = (0..layout.n())
            .map(|i| {
                Some(
                    layout
                        .row_support(i)
                        .iter()
                        .map(|j| (j, codeword[j]))
                        .collect(),
                )
            })
            .collect();
        Ok(StorageSystem {
            code,
            layout,
            codeword,
            nodes,
        })
    }

    pub fn code(&self) -> &MdsCode {
        &self.code
    }

    pub fn layout(&self) -> &BinaryIncidenceMatrix {
        &self.layout
    }

    pub fn codeword(&self) -> &[FieldElement] {
        &self.codeword
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    /// Stored `(position, symbol)` pairs, `None` if the node is down.
    pub fn node_contents(&self, node: usize) -> Option<&[(usize, FieldElement)]> {
        self.nodes.get(node)?.as_deref()
    }

    pub fn failed(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.nodes[i].is_none()).collect()
    }

    pub fn is_failed(&self, node: usize) -> bool {
        self.nodes.get(node).is_some_and(Option::is_none)
    }

    /// Total symbols held by live nodes.
    pub fn stored_symbols(&self) -> usize {
        self.nodes.iter().flatten().map(Vec::len).sum()
    }

    /// Every live node holds exactly its layout row of the codeword.
    pub fn is_consistent(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, node)| match node {
            None => true,
            Some(content) => {
                content.len() == self.layout.row_weight(i)
                    && content
                        .iter()
                        .all(|&(j, s)| self.layout.get(i, j) && self.codeword[j] == s)
            }
        })
    }

    fn check_node(&self, node: usize) -> Result<(), DssError> {
        if node >= self.n() {
            return Err(DssError::NodeOutOfRange { node, n: self.n() });
        }
        Ok(())
    }

    /// Marks a node as failed and drops its contents.
    pub fn fail_node(&mut self, node: usize) -> Result<(), DssError> {
        self.check_node(node)?;
        self.nodes[node] = None;
        Ok(())
    }

    /// Decodes the file from the union of the given nodes' contents.
    pub fn reconstruct(&self, nodes: &[usize]) -> Result<Vec<FieldElement>, DssError> {
        let mut seen = BTreeSet::new();
        let mut known = Vec::new();
        let mut have = vec![false; self.layout.theta()];
        for &i in nodes {
            self.check_node(i)?;
            if !seen.insert(i) {
                return Err(DssError::DuplicateNode(i));
            }
            let content = self.nodes[i].as_ref().ok_or(DssError::NodeFailed(i))?;
            for &(j, s) in content {
                if !have[j] {
                    have[j] = true;
                    known.push((j, s));
                }
            }
        }
        let need = self.code.dimension();
        if known.len() < need {
            return Err(DssError::InsufficientSymbols {
                need,
                have: known.len(),
            });
        }
        Ok(self.code.decode_erasures(&known)?)
    }

    /// Live, available nodes storing `symbol`, ascending.
    fn holders(&self, symbol: usize, unavailable: &[bool]) -> Vec<usize> {
        self.layout
            .col_support(symbol)
            .iter()
            .filter(|&i| !unavailable[i] && self.nodes[i].is_some())
            .collect()
    }

    /// Chooses one distinct helper per symbol of `node` without changing state.
    pub fn plan_repair(&self, node: usize) -> Result<RepairPlan, DssError> {
        self.check_node(node)?;
        let symbols = self.layout.row_support(node).to_vec();
        let mut unavailable = vec![false; self.n()];
        unavailable[node] = true;
        let adj: Vec<Vec<usize>> = symbols
            .iter()
            .map(|&j| self.holders(j, &unavailable))
            .collect();
        let matching = hopcroft_karp(&adj, self.n());
        if let Some((lefts, _)) = matching.hall_violator(&adj) {
            let columns = lefts.iter().map(|&u| symbols[u]).collect();
            let down = 1 + self.failed().iter().filter(|&&f| f != node).count();
            return Err(DssError::NoDistinctHelpers {
                node,
                certificate: Witness::from_columns(&self.layout, columns, down),
            });
        }
        let transfers = symbols
            .iter()
            .zip(&matching.left)
            .map(|(&symbol, helper)| Transfer {
                symbol,
                helper: helper.expect("matching saturates the node's symbols"),
            })
            .collect();
        Ok(RepairPlan {
            failed_node: node,
            transfers,
        })
    }

    /// Fails `node` (if it is not already down), then rebuilds it by copying
    /// one symbol from each of its distinct helpers.
    pub fn repair(&mut self, node: usize) -> Result<RepairPlan, DssError> {
        self.check_node(node)?;
        self.nodes[node] = None;
        let plan = self.plan_repair(node)?;
        let mut restored = Vec::with_capacity(plan.transfers.len());
        for t in &plan.transfers {
            let helper = self.nodes[t.helper].as_ref().expect("helpers are alive");
            let &(_, s) = helper
                .iter()
                .find(|&&(j, _)| j == t.symbol)
                .expect("helper stores the symbol it sends");
            restored.push((t.symbol, s));
        }
        self.nodes[node] = Some(restored);
        Ok(plan)
    }

    /// Serves `request` reading at most one symbol per available node, with
    /// the nodes in `failed` (and any already failed) unavailable.
    pub fn serve_batch(
        &self,
        request: &[usize],
        failed: &[usize],
    ) -> Result<BatchAssignment, DssError> {
        let theta = self.layout.theta();
        let mut symbols = request.to_vec();
        symbols.sort_unstable();
        for w in symbols.windows(2) {
            if w[0] == w[1] {
                return Err(DssError::DuplicateSymbol(w[0]));
            }
        }
        if let Some(&j) = symbols.iter().find(|&&j| j >= theta) {
            return Err(DssError::SymbolOutOfRange { symbol: j, theta });
        }
        let mut unavailable = vec![false; self.n()];
        for &f in failed {
            self.check_node(f)?;
            unavailable[f] = true;
        }
        let adj: Vec<Vec<usize>> = symbols
            .iter()
            .map(|&j| self.holders(j, &unavailable))
            .collect();
        let matching = hopcroft_karp(&adj, self.n());
        if let Some((lefts, _)) = matching.hall_violator(&adj) {
            let down = (0..self.n())
                .filter(|&i| unavailable[i] || self.nodes[i].is_none())
                .count();
            let columns = lefts.iter().map(|&u| symbols[u]).collect();
            return Err(DssError::Unservable {
                certificate: Witness::from_columns(&self.layout, columns, down),
            });
        }
        Ok(BatchAssignment {
            assignment: symbols
                .iter()
                .zip(&matching.left)
                .map(|(&j, node)| (j, node.expect("saturated")))
                .collect(),
        })
    }

    pub fn snapshot(&self, layout_ref: &str) -> SystemSnapshot {
        SystemSnapshot {
            mds: self.code.params(),
            layout: layout_ref.to_string(),
            codeword: self.codeword.iter().map(|s| s.index()).collect(),
            failed: self.failed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub failed_nodes: Vec<usize>,
    pub request: Vec<usize>,
    pub certificate: Option<Witness>,
}

/// Erasure-repair condition: every `delta` failed nodes hold at most `t`
/// distinct symbols, which are then read back as one batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErasureRepairCheck {
    pub patterns_checked: u64,
    pub patterns_within_t: u64,
    pub patterns_recoverable: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub t: usize,
    pub delta: usize,
    pub cases_total: u64,
    pub cases_run: u64,
    pub exhaustive: bool,
    pub seed: u64,
    pub failures_total: u64,
    pub failures: Vec<SweepFailure>,
    pub erasure_repair: ErasureRepairCheck,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures_total == 0
    }
}

fn sorted_sample(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn evaluate(sys: &StorageSystem, failed: &[usize], request: &[usize]) -> Option<SweepFailure> {
    match sys.serve_batch(request, failed) {
        Ok(_) => None,
        Err(e) => Some(SweepFailure {
            failed_nodes: failed.to_vec(),
            request: request.to_vec(),
            certificate: match e {
                DssError::Unservable { certificate } => Some(certificate),
                _ => None,
            },
        }),
    }
}

#[derive(Default)]
struct Tally {
    run: u64,
    failures: u64,
    kept: Vec<SweepFailure>,
}

impl Tally {
    fn add(&mut self, outcome: Option<SweepFailure>) {
        self.run += 1;
        if let Some(f) = outcome {
            self.failures += 1;
            if self.kept.len() < MAX_REPORTED_FAILURES {
                self.kept.push(f);
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.run += other.run;
        self.failures += other.failures;
        let room = MAX_REPORTED_FAILURES - self.kept.len();
        self.kept.extend(other.kept.into_iter().take(room));
        self
    }
}

impl StorageSystem {
    /// Checks that every `t`-symbol request is servable under every pattern of
    /// `delta` failed nodes. Runs exhaustively when the case count fits in
    /// `budget` (or `budget` is `None`), otherwise samples `budget` cases
    /// with a ChaCha8 generator seeded by `seed`.
    pub fn failure_sweep(
        &self,
        t: usize,
        delta: usize,
        budget: Option<u64>,
        seed: u64,
    ) -> SweepReport {
        let n = self.n();
        let theta = self.layout.theta();
        let patterns = binomial(n, delta);
        let requests = binomial(theta, t);
        let cases_total = patterns.saturating_mul(requests);
        let exhaustive = budget.is_none_or(|b| cases_total <= b);

        let tally = if exhaustive {
            let pats: Vec<Vec<usize>> = combinations(n, delta).collect();
            pats.par_iter()
                .map(|failed| {
                    let mut tally = Tally::default();
                    for request in combinations(theta, t) {
                        tally.add(evaluate(self, failed, &request));
                    }
                    tally
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Tally::default(), Tally::merge)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cases: Vec<(Vec<usize>, Vec<usize>)> = (0..budget.unwrap_or(0))
                .map(|_| {
                    (
                        sorted_sample(&mut rng, n, delta),
                        sorted_sample(&mut rng, theta, t),
                    )
                })
                .collect();
            cases
                .par_iter()
                .map(|(failed, request)| {
                    let mut tally = Tally::default();
                    tally.add(evaluate(self, failed, request));
                    tally
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Tally::default(), Tally::merge)
        };

        SweepReport {
            t,
            delta,
            cases_total,
            cases_run: tally.run,
            exhaustive,
            seed,
            failures_total: tally.failures,
            failures: tally.kept,
            erasure_repair: self.erasure_repair_check(t, delta),
        }
    }

    fn erasure_repair_check(&self, t: usize, delta: usize) -> ErasureRepairCheck {
        let results: Vec<(bool, bool)> = combinations(self.n(), delta)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|failed| {
                let held = self
                    .layout
                    .cover_cols(failed)
                    .expect("nodes in range")
                    .to_vec();
                let within = held.len() <= t;
                let recoverable = within && self.serve_batch(&held, failed).is_ok();
                (within, recoverable)
            })
            .collect();
        let checked = results.len() as u64;
        let within = results.iter().filter(|r| r.0).count() as u64;
        let recoverable = results.iter().filter(|r| r.1).count() as u64;
        ErasureRepairCheck {
            patterns_checked: checked,
            patterns_within_t: within,
            patterns_recoverable: recoverable,
            holds: recoverable == checked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructFailure {
    pub nodes: Vec<usize>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub cases_total: u64,
    pub cases_run: u64,
    pub exhaustive: bool,
    pub failures_total: u64,
    pub failures: Vec<ReconstructFailure>,
}

impl ReconstructReport {
    pub fn passed(&self) -> bool {
        self.failures_total == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub node: usize,
    pub helpers: Vec<usize>,
    pub distinct_helpers: bool,
    pub restored_exactly: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RepairOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.distinct_helpers && self.restored_exactly
    }
}

impl StorageSystem {
    /// Reconstructs from every `k`-subset of nodes, or from `budget` sampled
    /// subsets when there are more.
    pub fn reconstruct_sweep(
        &self,
        file: &[FieldElement],
        k: usize,
        budget: Option<u64>,
        seed: u64,
    ) -> ReconstructReport {
        let n = self.n();
        let total = binomial(n, k);
        let exhaustive = budget.is_none_or(|b| total <= b);
        let subsets: Vec<Vec<usize>> = if exhaustive {
            combinations(n, k).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..budget.unwrap_or(0))
                .map(|_| sorted_sample(&mut rng, n, k))
                .collect()
        };
        let outcomes: Vec<Option<ReconstructFailure>> = subsets
            .par_iter()
            .map(|nodes| {
                let error = match self.reconstruct(nodes) {
                    Ok(f) if f == file => return None,
                    Ok(_) => "decoded file differs from the original".to_string(),
                    Err(e) => e.to_string(),
                };
                Some(ReconstructFailure {
                    nodes: nodes.clone(),
                    error,
                })
            })
            .collect();
        let failures: Vec<ReconstructFailure> = outcomes.into_iter().flatten().collect();
        ReconstructReport {
            k,
            m: self.code.dimension(),
            cases_total: total,
            cases_run: subsets.len() as u64,
            exhaustive,
            failures_total: failures.len() as u64,
            failures: failures.into_iter().take(MAX_REPORTED_FAILURES).collect(),
        }
    }

    /// Repairs every node in turn on a fresh copy of the system.
    pub fn repair_sweep(&self) -> Vec<RepairOutcome> {
        (0..self.n())
            .into_par_iter()
            .map(|node| {
                let mut copy = self.clone();
                let original = self.nodes[node].clone();
                match copy.repair(node) {
                    Ok(plan) => RepairOutcome {
                        node,
                        helpers: plan.helpers(),
                        distinct_helpers: plan.helpers_distinct()
                            && !plan.helpers().contains(&node),
                        restored_exactly: copy.nodes[node] == original && copy.is_consistent(),
                        error: None,
                    },
                    Err(e) => RepairOutcome {
                        node,
                        helpers: vec![],
                        distinct_helpers: false,
                        restored_exactly: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(len: usize) -> Vec<FieldElement> {
        // small layouts default to GF(2) or GF(4)
        let f = crate::gf::Field::new(2).unwrap();
        (0..len as u32)
            .map(|i| f.element((i + 1) % 2).unwrap())
            .collect()
    }

    #[test]
    fn identity_layout() {
        let layout = BinaryIncidenceMatrix::identity(4);
        let f = file(2);
        let sys = StorageSystem::store(&f, layout, None).unwrap();
        for i in 0..4 {
            let c = sys.node_contents(i).unwrap();
            assert_eq!(c.len(), 1);
            assert_eq!(c[0].0, i);
        }
        assert_eq!(sys.reconstruct(&[2, 3]).unwrap(), f);
        assert_eq!(
            sys.reconstruct(&[3]).unwrap_err(),
            DssError::InsufficientSymbols { need: 2, have: 1 }
        );
        assert_eq!(
            sys.reconstruct(&[3, 3]).unwrap_err(),
            DssError::DuplicateNode(3)
        );
    }

    #[test]
    fn wrong_length_file() {
        let layout = BinaryIncidenceMatrix::identity(3);
        let err = StorageSystem::store(&file(4), layout, None).unwrap_err();
        assert!(matches!(
            err,
            DssError::Mds(MdsError::BadDimension { m: 4, theta: 3 })
        ));
    }

    #[test]
    fn degenerate_repair() {
        // node 0 stores symbols 0 and 1, both replicated only on node 1
        let layout = BinaryIncidenceMatrix::read_text("3 3\n110\n111\n001\n").unwrap();
        let mut sys = StorageSystem::store(&file(2), layout, None).unwrap();
        match sys.repair(0).unwrap_err() {
            DssError::NoDistinctHelpers { node, certificate } => {
                assert_eq!(node, 0);
                assert_eq!(certificate.columns, vec![0, 1]);
                assert!(certificate.is_valid(sys.layout()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn batch_edge_cases() {
        let layout = BinaryIncidenceMatrix::read_text("2 3\n110\n011\n").unwrap();
        let sys = StorageSystem::store(&file(2), layout, None).unwrap();
        assert!(sys.serve_batch(&[], &[0, 1]).unwrap().assignment.is_empty());
        assert_eq!(
            sys.serve_batch(&[1, 1], &[]).unwrap_err(),
            DssError::DuplicateSymbol(1)
        );
        assert!(matches!(
            sys.serve_batch(&[5], &[]),
            Err(DssError::SymbolOutOfRange { .. })
        ));
        let a = sys.serve_batch(&[0, 2], &[]).unwrap();
        assert_eq!(a.node_for(0), Some(0));
        assert_eq!(a.node_for(2), Some(1));
        match sys.serve_batch(&[0, 1, 2], &[]).unwrap_err() {
            DssError::Unservable { certificate } => assert!(certificate.is_valid(sys.layout())),
            other => panic!("unexpected {other:?}"),
        }
        match sys.serve_batch(&[1], &[0, 1]).unwrap_err() {
            DssError::Unservable { certificate } => {
                assert_eq!(certificate.delta, 2);
                assert!(certificate.is_valid(sys.layout()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn failed_nodes_are_not_read() {
        let layout = BinaryIncidenceMatrix::read_text("2 2\n11\n11\n").unwrap();
        let mut sys = StorageSystem::store(&file(2), layout, None).unwrap();
        sys.fail_node(0).unwrap();
        assert_eq!(sys.reconstruct(&[0]).unwrap_err(), DssError::NodeFailed(0));
        assert_eq!(sys.failed(), vec![0]);
        assert!(sys.serve_batch(&[0, 1], &[]).is_err());
        assert!(matches!(
            sys.repair(0),
            Err(DssError::NoDistinctHelpers { node: 0, .. })
        ));
    }
}

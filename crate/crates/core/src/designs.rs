//! Resolvable transversal designs TD(ell, h) and affine planes A(q).
//!
//! Point ids are dense. TD point `(group i, element e)` has id `i * h + e`;
//! affine point `(x, y)` has id `x * q + y`. Blocks are listed class-major,
//! then by intercept, and every block's point list is sorted.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{is_prime_power, Field, FieldElement, GfError};
use crate::incidence::BinaryIncidenceMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("ell exceeds h (ell = {ell}, h = {h})")]
    EllTooLarge { ell: usize, h: usize },
    #[error("block size must be at least 2, got {0}")]
    EllTooSmall(usize),
    #[error("design JSON: {0}")]
    Json(String),
}

impl From<GfError> for DesignError {
    fn from(e: GfError) -> Self {
        match e {
            GfError::NotPrimePower(q) => DesignError::NotPrimePower(q),
            other => DesignError::Json(other.to_string()),
        }
    }
}

/// How the blocks of a transversal design were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TdConstruction {
    /// `B_{a,b} = {(i, a c_i + b)}` over GF(h), resolvable by slope `a`.
    FieldLines,
    /// `B_{a,b} = {(0, a), (1, b), (2, a + b mod h)}`, the Cayley table of Z_h.
    /// Used for `ell <= 3` when `h` is not a prime power; not resolvable.
    CyclicLatinSquare,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalDesign {
    pub ell: usize,
    pub h: usize,
    pub construction: TdConstruction,
    /// `(group, element index)` of each point.
    pub points: Vec<(usize, u32)>,
    pub groups: Vec<Vec<usize>>,
    pub blocks: Vec<Vec<usize>>,
    /// Block ids of each parallel class.
    pub resolution: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePlane {
    pub q: usize,
    /// `(x, y)` element indices of each point.
    pub points: Vec<(u32, u32)>,
    pub lines: Vec<Vec<usize>>,
    /// Line ids of each parallel class: slopes in canonical order, vertical last.
    pub parallel_classes: Vec<Vec<usize>>,
}

/// Builds a transversal design TD(ell, h).
pub fn build_td(ell: usize, h: usize) -> Result<TransversalDesign, DesignError> {
    if ell < 2 {
        return Err(DesignError::EllTooSmall(ell));
    }
    if !is_prime_power(h as u64) {
        if ell <= 3 && h >= 2 {
            return Ok(build_cyclic_td(ell, h));
        }
        return Err(DesignError::NotPrimePower(h as u64));
    }
    if ell > h {
        return Err(DesignError::EllTooLarge { ell, h });
    }
    let field = Field::new(h as u64)?;
    let elems: Vec<FieldElement> = field.elements().collect();
    let coords = &elems[..ell];
    let point_id = |group: usize, e: FieldElement| group * h + e.index() as usize;

    let mut blocks = Vec::with_capacity(h * h);
    let mut resolution = Vec::with_capacity(h);
    for &a in &elems {
        let mut class = Vec::with_capacity(h);
        for &b in &elems {
            let block: Vec<usize> = coords
                .iter()
                .enumerate()
                .map(|(i, &c)| point_id(i, field.add(field.mul(a, c), b)))
                .collect();
            class.push(blocks.len());
            blocks.push(block);
        }
        resolution.push(class);
    }
    Ok(TransversalDesign {
        ell,
        h,
        construction: TdConstruction::FieldLines,
        points: td_points(ell, h),
        groups: td_groups(ell, h),
        blocks,
        resolution: Some(resolution),
    })
}

fn build_cyclic_td(ell: usize, h: usize) -> TransversalDesign {
    let mut blocks = Vec::with_capacity(h * h);
    for a in 0..h {
        for b in 0..h {
            let coords = [a, b, (a + b) % h];
            blocks.push((0..ell).map(|i| i * h + coords[i]).collect());
        }
    }
    TransversalDesign {
        ell,
        h,
        construction: TdConstruction::CyclicLatinSquare,
        points: td_points(ell, h),
        groups: td_groups(ell, h),
        blocks,
        resolution: None,
    }
}

fn td_points(ell: usize, h: usize) -> Vec<(usize, u32)> {
    (0..ell)
        .flat_map(|g| (0..h as u32).map(move |e| (g, e)))
        .collect()
}

fn td_groups(ell: usize, h: usize) -> Vec<Vec<usize>> {
    (0..ell).map(|g| (g * h..(g + 1) * h).collect()).collect()
}

/// Builds the affine plane AG(2, q).
pub fn build_affine(q: usize) -> Result<AffinePlane, DesignError> {
    let field = Field::new(q as u64)?;
    let elems: Vec<FieldElement> = field.elements().collect();
    let point_id = |x: FieldElement, y: FieldElement| x.index() as usize * q + y.index() as usize;

    let mut lines = Vec::with_capacity(q * q + q);
    let mut classes = Vec::with_capacity(q + 1);
    for &a in &elems {
        let mut class = Vec::with_capacity(q);
        for &b in &elems {
            let mut line: Vec<usize> = elems
                .iter()
                .map(|&x| point_id(x, field.add(field.mul(a, x), b)))
                .collect();
            line.sort_unstable();
            class.push(lines.len());
            lines.push(line);
        }
        classes.push(class);
    }
    let mut vertical = Vec::with_capacity(q);
    for &c in &elems {
        vertical.push(lines.len());
        lines.push(elems.iter().map(|&y| point_id(c, y)).collect());
    }
    classes.push(vertical);

    let points = (0..q as u32)
        .flat_map(|x| (0..q as u32).map(move |y| (x, y)))
        .collect();
    Ok(AffinePlane {
        q,
        points,
        lines,
        parallel_classes: classes,
    })
}

impl TransversalDesign {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Rows are points, columns are blocks.
    pub fn incidence(&self) -> BinaryIncidenceMatrix {
        BinaryIncidenceMatrix::from_col_supports(
            self.points.len(),
            self.blocks.len(),
            self.blocks.iter().map(|b| b.iter().copied()),
        )
        .expect("design blocks reference valid points")
    }

    pub fn validate(&self) -> ValidationReport {
        validate_td(self)
    }
}

impl AffinePlane {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn incidence(&self) -> BinaryIncidenceMatrix {
        BinaryIncidenceMatrix::from_col_supports(
            self.points.len(),
            self.lines.len(),
            self.lines.iter().map(|b| b.iter().copied()),
        )
        .expect("design lines reference valid points")
    }

    pub fn validate(&self) -> ValidationReport {
        validate_affine(self)
    }

    /// Parallel class containing `line`.
    pub fn line_class(&self, line: usize) -> Option<usize> {
        self.parallel_classes.iter().position(|c| c.contains(&line))
    }
}

pub fn td_incidence(td: &TransversalDesign) -> BinaryIncidenceMatrix {
    td.incidence()
}

pub fn affine_incidence(ap: &AffinePlane) -> BinaryIncidenceMatrix {
    ap.incidence()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub points: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: usize,
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family: String,
    pub axioms: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.axioms.iter().filter(|a| !a.passed)
    }

    pub fn axiom(&self, number: usize) -> Option<&AxiomCheck> {
        self.axioms.iter().find(|a| a.axiom == number)
    }
}

fn check(axiom: usize, name: &str, failure: Option<Counterexample>) -> AxiomCheck {
    AxiomCheck {
        axiom,
        name: name.to_string(),
        passed: failure.is_none(),
        counterexample: failure,
    }
}

fn cx(block: Option<usize>, points: Vec<usize>, detail: String) -> Option<Counterexample> {
    Some(Counterexample {
        block,
        points,
        detail,
    })
}

/// First block containing an id outside `0..n`.
fn out_of_range_block(blocks: &[Vec<usize>], n: usize) -> Option<Counterexample> {
    blocks.iter().enumerate().find_map(|(b, pts)| {
        pts.iter()
            .find(|&&p| p >= n)
            .and_then(|&p| cx(Some(b), vec![p], format!("point {p} does not exist")))
    })
}

/// Pair-coverage counts over `n` points; out-of-range ids are ignored.
fn pair_counts(blocks: &[Vec<usize>], n: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n * n];
    for b in blocks {
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                if x < n && y < n && x != y {
                    counts[x.min(y) * n + x.max(y)] += 1;
                }
            }
        }
    }
    counts
}

fn check_resolution(
    classes: &[Vec<usize>],
    blocks: &[Vec<usize>],
    n: usize,
    expected_classes: usize,
    class_size: usize,
) -> Option<Counterexample> {
    if classes.len() != expected_classes {
        return cx(
            None,
            vec![],
            format!(
                "expected {expected_classes} classes, found {}",
                classes.len()
            ),
        );
    }
    let mut seen_blocks = BTreeSet::new();
    for (c, class) in classes.iter().enumerate() {
        if class.len() != class_size {
            return cx(
                None,
                vec![],
                format!(
                    "class {c} has {} blocks, expected {class_size}",
                    class.len()
                ),
            );
        }
        let mut hits = vec![0u32; n];
        for &b in class {
            let Some(pts) = blocks.get(b) else {
                return cx(
                    Some(b),
                    vec![],
                    format!("class {c} references missing block"),
                );
            };
            if !seen_blocks.insert(b) {
                return cx(Some(b), vec![], "block appears in two classes".into());
            }
            for &p in pts {
                if p < n {
                    hits[p] += 1;
                }
            }
        }
        if let Some(p) = hits.iter().position(|&h| h != 1) {
            return cx(
                None,
                vec![p],
                format!("point {p} lies in {} blocks of class {c}", hits[p]),
            );
        }
    }
    if seen_blocks.len() != blocks.len() {
        return cx(None, vec![], "classes do not partition the blocks".into());
    }
    None
}

/// Exhaustive check of the TD axioms.
pub fn validate_td(td: &TransversalDesign) -> ValidationReport {
    let (ell, h) = (td.ell, td.h);
    let n = td.points.len();
    let mut axioms = Vec::new();

    axioms.push(check(
        1,
        "point count is ell * h",
        (n != ell * h).then(|| Counterexample {
            block: None,
            points: vec![],
            detail: format!("{n} points, expected {}", ell * h),
        }),
    ));

    // group of every point, from the group partition
    let mut group_of = vec![usize::MAX; n];
    let mut groups_failure = None;
    if td.groups.len() != ell {
        groups_failure = cx(
            None,
            vec![],
            format!("{} groups, expected {ell}", td.groups.len()),
        );
    }
    for (g, members) in td.groups.iter().enumerate() {
        if groups_failure.is_some() {
            break;
        }
        if members.len() != h {
            groups_failure = cx(
                None,
                members.clone(),
                format!("group {g} has {} points", members.len()),
            );
            break;
        }
        for &p in members {
            if p >= n || group_of[p] != usize::MAX {
                groups_failure = cx(None, vec![p], format!("point {p} invalid or in two groups"));
                break;
            }
            group_of[p] = g;
        }
    }
    if groups_failure.is_none() {
        if let Some(p) = group_of.iter().position(|&g| g == usize::MAX) {
            groups_failure = cx(None, vec![p], format!("point {p} is in no group"));
        }
    }
    axioms.push(check(
        2,
        "groups partition the points into ell sets of size h",
        groups_failure,
    ));

    let blocks_failure = if td.blocks.len() != h * h {
        cx(
            None,
            vec![],
            format!("{} blocks, expected {}", td.blocks.len(), h * h),
        )
    } else {
        out_of_range_block(&td.blocks, n).or_else(|| {
            td.blocks.iter().enumerate().find_map(|(b, pts)| {
                let distinct: BTreeSet<_> = pts.iter().collect();
                (pts.len() != ell || distinct.len() != ell).then(|| Counterexample {
                    block: Some(b),
                    points: pts.clone(),
                    detail: format!(
                        "block has {} distinct points, expected {ell}",
                        distinct.len()
                    ),
                })
            })
        })
    };
    axioms.push(check(
        3,
        "h^2 blocks, each an ell-subset of the points",
        blocks_failure,
    ));

    let meets_failure = td.blocks.iter().enumerate().find_map(|(b, pts)| {
        let mut per_group = vec![0usize; ell];
        for &p in pts {
            match group_of.get(p) {
                Some(&g) if g < ell => per_group[g] += 1,
                _ => {
                    return cx(Some(b), vec![p], format!("point {p} has no group"));
                }
            }
        }
        per_group.iter().position(|&c| c != 1).and_then(|g| {
            cx(
                Some(b),
                pts.clone(),
                format!("block {b} meets group {g} in {} points", per_group[g]),
            )
        })
    });
    axioms.push(check(
        4,
        "each block meets each group in exactly one point",
        meets_failure,
    ));

    let counts = pair_counts(&td.blocks, n);
    let mut pair_failure = None;
    'outer: for x in 0..n {
        for y in x + 1..n {
            let c = counts[x * n + y];
            let cross = group_of[x] != group_of[y];
            let want = u32::from(cross);
            if c != want {
                pair_failure = cx(
                    None,
                    vec![x, y],
                    format!("pair ({x}, {y}) lies in {c} blocks, expected {want}"),
                );
                break 'outer;
            }
        }
    }
    axioms.push(check(
        5,
        "each pair of points from different groups lies in exactly one block",
        pair_failure,
    ));

    let mut replication = vec![0usize; n];
    for pts in &td.blocks {
        for &p in pts {
            if p < n {
                replication[p] += 1;
            }
        }
    }
    axioms.push(check(
        6,
        "each point lies in exactly h blocks",
        replication.iter().position(|&r| r != h).and_then(|p| {
            cx(
                None,
                vec![p],
                format!("point {p} lies in {} blocks", replication[p]),
            )
        }),
    ));

    if let Some(classes) = &td.resolution {
        axioms.push(check(
            7,
            "resolution: h classes of h blocks, each point once per class",
            check_resolution(classes, &td.blocks, n, h, h),
        ));
    }

    ValidationReport {
        family: "td".into(),
        axioms,
    }
}

/// Exhaustive check of the affine plane axioms.
pub fn validate_affine(ap: &AffinePlane) -> ValidationReport {
    let q = ap.q;
    let n = ap.points.len();
    let mut axioms = Vec::new();
    axioms.push(check(
        1,
        "point count is q^2",
        (n != q * q).then(|| Counterexample {
            block: None,
            points: vec![],
            detail: format!("{n} points, expected {}", q * q),
        }),
    ));

    let lines_failure = if ap.lines.len() != q * (q + 1) {
        cx(
            None,
            vec![],
            format!("{} lines, expected {}", ap.lines.len(), q * (q + 1)),
        )
    } else {
        out_of_range_block(&ap.lines, n).or_else(|| {
            ap.lines.iter().enumerate().find_map(|(b, pts)| {
                let distinct: BTreeSet<_> = pts.iter().collect();
                (pts.len() != q || distinct.len() != q).then(|| Counterexample {
                    block: Some(b),
                    points: pts.clone(),
                    detail: format!("line has {} distinct points, expected {q}", distinct.len()),
                })
            })
        })
    };
    axioms.push(check(
        2,
        "q(q+1) lines, each a q-subset of the points",
        lines_failure,
    ));

    let counts = pair_counts(&ap.lines, n);
    let mut pair_failure = None;
    'outer: for x in 0..n {
        for y in x + 1..n {
            let c = counts[x * n + y];
            if c != 1 {
                pair_failure = cx(
                    None,
                    vec![x, y],
                    format!("pair ({x}, {y}) lies on {c} lines, expected 1"),
                );
                break 'outer;
            }
        }
    }
    axioms.push(check(
        3,
        "each pair of points lies on exactly one line",
        pair_failure,
    ));

    axioms.push(check(
        4,
        "q+1 parallel classes of q lines, each point once per class",
        check_resolution(&ap.parallel_classes, &ap.lines, n, q + 1, q),
    ));

    ValidationReport {
        family: "affine".into(),
        axioms,
    }
}

/// Either design family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Design {
    Td(TransversalDesign),
    Affine(AffinePlane),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DesignFile {
    family: String,
    params: DesignParams,
    points: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<Vec<usize>>>,
    classes: Option<Vec<Vec<usize>>>,
    blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DesignParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    construction: Option<TdConstruction>,
}

impl Design {
    pub fn incidence(&self) -> BinaryIncidenceMatrix {
        match self {
            Design::Td(td) => td.incidence(),
            Design::Affine(ap) => ap.incidence(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Design::Td(td) => td.validate(),
            Design::Affine(ap) => ap.validate(),
        }
    }

    /// `{family, params, points, groups/classes, blocks}`.
    pub fn to_json(&self) -> String {
        let file = match self {
            Design::Td(td) => DesignFile {
                family: "td".into(),
                params: DesignParams {
                    ell: Some(td.ell),
                    h: Some(td.h),
                    q: None,
                    construction: Some(td.construction),
                },
                points: td.points.iter().map(|&(g, e)| [g as u32, e]).collect(),
                groups: Some(td.groups.clone()),
                classes: td.resolution.clone(),
                blocks: td.blocks.clone(),
            },
            Design::Affine(ap) => DesignFile {
                family: "affine".into(),
                params: DesignParams {
                    ell: None,
                    h: None,
                    q: Some(ap.q),
                    construction: None,
                },
                points: ap.points.iter().map(|&(x, y)| [x, y]).collect(),
                groups: None,
                classes: Some(ap.parallel_classes.clone()),
                blocks: ap.lines.clone(),
            },
        };
        serde_json::to_string_pretty(&file).expect("design JSON is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, DesignError> {
        let file: DesignFile =
            serde_json::from_str(text).map_err(|e| DesignError::Json(e.to_string()))?;
        let missing = |what: &str| DesignError::Json(format!("missing {what}"));
        match file.family.as_str() {
            "td" => Ok(Design::Td(TransversalDesign {
                ell: file.params.ell.ok_or_else(|| missing("params.ell"))?,
                h: file.params.h.ok_or_else(|| missing("params.h"))?,
                construction: file
                    .params
                    .construction
                    .unwrap_or(TdConstruction::FieldLines),
                points: file.points.iter().map(|&[g, e]| (g as usize, e)).collect(),
                groups: file.groups.ok_or_else(|| missing("groups"))?,
                blocks: file.blocks,
                resolution: file.classes,
            })),
            "affine" => Ok(Design::Affine(AffinePlane {
                q: file.params.q.ok_or_else(|| missing("params.q"))?,
                points: file.points.iter().map(|&[x, y]| (x, y)).collect(),
                lines: file.blocks,
                parallel_classes: file.classes.ok_or_else(|| missing("classes"))?,
            })),
            other => Err(DesignError::Json(format!("unknown family '{other}'"))),
        }
    }
}

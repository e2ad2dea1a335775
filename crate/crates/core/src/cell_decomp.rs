//! Cylindrical cell decomposition of bounded open boxes for families of
//! semilinear sets, with exact adjacency, connected components, and
//! piecewise-linear path construction.
//!
//! The decomposition is the linear analogue of cylindrical algebraic
//! decomposition: the bound terms a*y + r(x) of every atom are closed under
//! pairwise resultants a*r' - a'*r, which makes the root functions -r/a
//! non-crossing over every base cell, so ordering them at the base sample
//! point orders them over the whole cell.

use crate::def_sets::{compile, SNFSet, SemilinearSet, SetError};
use crate::lin_core::{rat, Formula, LinTerm, Rat, VarOrder};
use crate::qe_engine::{satisfiable, Sort};
use num_traits::Zero;
#[cfg(test)]
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type BoxN = Vec<(Rat, Rat)>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CellError {
    #[error("point lies outside the box")]
    NotInBox,
    #[error("point is not a member of the set")]
    NotMember,
    #[error("points lie in different connected components")]
    DifferentComponents,
    #[error("box is degenerate (low >= high)")]
    BadBox,
    #[error(transparent)]
    Set(#[from] SetError),
}

/// One coordinate of a cell description: either pinned to an affine function
/// of the earlier coordinates, or strictly between two such functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellLevel {
    Section(LinTerm),
    Band(LinTerm, LinTerm),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub levels: Vec<CellLevel>,
    pub sample: Vec<Rat>,
    /// Index of the base cell one level down; None at arity 1.
    pub base: Option<usize>,
}

impl Cell {
    pub fn arity(&self) -> usize {
        self.levels.len()
    }

    pub fn type_bits(&self) -> Vec<u8> {
        self.levels
            .iter()
            .map(|l| match l {
                CellLevel::Section(_) => 0,
                CellLevel::Band(_, _) => 1,
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.type_bits().iter().map(|&b| b as usize).sum()
    }

    /// Defining formula over x1..xn; `closed` relaxes the band bounds, which
    /// yields exactly the topological closure (the constraints are affine and
    /// the cell is nonempty and convex).
    pub fn formula(&self, closed: bool) -> Formula {
        self.formula_mixed(&vec![closed; self.arity()])
    }

    /// Defining formula with a per-level choice of strict or relaxed band
    /// bounds. Relaxing only the last level yields the closure of the cell
    /// along the last coordinate (fiberwise over the base).
    pub fn formula_mixed(&self, closed: &[bool]) -> Formula {
        let n = self.arity();
        assert_eq!(closed.len(), n);
        let o = VarOrder::numbered(n);
        let mut conj = Vec::new();
        for (j, lvl) in self.levels.iter().enumerate() {
            let xj = LinTerm::var(&format!("x{}", j + 1));
            match lvl {
                CellLevel::Section(g) => conj.push(Formula::eq(xj.sub(g), &o)),
                CellLevel::Band(l, u) => {
                    if closed[j] {
                        conj.push(Formula::le(l.clone(), xj.clone(), &o));
                        conj.push(Formula::le(xj, u.clone(), &o));
                    } else {
                        conj.push(Formula::lt(l.sub(&xj), &o));
                        conj.push(Formula::lt(xj.sub(u), &o));
                    }
                }
            }
        }
        Formula::and(conj)
    }

    pub fn contains(&self, p: &[Rat]) -> bool {
        let mut env = BTreeMap::new();
        for (i, v) in p.iter().enumerate() {
            env.insert(format!("x{}", i + 1), v.clone());
        }
        self.formula(false).eval(&env).expect("quantifier-free")
    }
}

#[derive(Clone, Debug)]
pub struct CellDecomposition {
    pub arity: usize,
    pub bbox: BoxN,
    /// stacks[d] holds the cells of arity d+1; the last stack is the full
    /// decomposition, earlier ones are its successive projections.
    pub stacks: Vec<Vec<Cell>>,
    /// labels[s][c]: cell c lies inside family member s.
    pub labels: Vec<Vec<bool>>,
    /// Symmetric adjacency on full-cell indices (closure intersection).
    pub adjacency: Vec<(usize, usize)>,
}

impl CellDecomposition {
    pub fn cells(&self) -> &[Cell] {
        self.stacks.last().expect("nonempty stacks")
    }

    pub fn cell_containing(&self, p: &[Rat]) -> Option<usize> {
        self.cells().iter().position(|c| c.contains(p))
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency.contains(&(i.min(j), i.max(j)))
    }
}

pub fn point_in_box(p: &[Rat], bbox: &BoxN) -> bool {
    p.len() == bbox.len()
        && p.iter()
            .zip(bbox)
            .all(|(v, (lo, hi))| lo < v && v < hi)
}

/// Canonical form of a bound term: positive leading coefficient, scaled so
/// the leading coefficient is 1.
fn canonicalize_term(t: &LinTerm, level: usize) -> Option<LinTerm> {
    if level == 0 {
        return None;
    }
    let a = t.coeff(&format!("x{level}"));
    assert!(!a.is_zero());
    Some(t.scale(&a.recip()))
}

fn term_level(t: &LinTerm, n: usize) -> usize {
    for j in (1..=n).rev() {
        if !t.coeff(&format!("x{j}")).is_zero() {
            return j;
        }
    }
    0
}

/// Root function of a level-j term a*xj + r: the affine map -r/a over the
/// earlier coordinates.
fn root_function(t: &LinTerm, j: usize) -> LinTerm {
    let a = t.coeff(&format!("x{j}"));
    let mut r = t.clone();
    r.set_coeff(&format!("x{j}"), Rat::zero());
    r.scale(&(-a.recip()))
}

fn eval_term(t: &LinTerm, p: &[Rat]) -> Rat {
    let mut env = BTreeMap::new();
    for (i, v) in p.iter().enumerate() {
        env.insert(format!("x{}", i + 1), v.clone());
    }
    t.eval(&env).expect("all variables bound")
}

/// Decompose the open box into cells such that every family member is a
/// union of cells. Family bodies are ambient (coordinates x1..xn).
pub fn decompose_box(bbox: &BoxN, family: &[SemilinearSet]) -> Result<CellDecomposition, CellError> {
    decompose(bbox, family, true)
}

/// Like `decompose_box` but without the adjacency relation, which is
/// quadratic in the number of cells. Sufficient for membership-style queries
/// (closure, dimension) that never walk between cells.
pub fn decompose_box_cells_only(
    bbox: &BoxN,
    family: &[SemilinearSet],
) -> Result<CellDecomposition, CellError> {
    decompose(bbox, family, false)
}

fn decompose(
    bbox: &BoxN,
    family: &[SemilinearSet],
    with_adjacency: bool,
) -> Result<CellDecomposition, CellError> {
    let n = bbox.len();
    for (lo, hi) in bbox {
        if lo >= hi {
            return Err(CellError::BadBox);
        }
    }
    for s in family {
        assert_eq!(s.arity, n, "family arity must match the box");
        assert!(!s.clamped, "family sets must be in ambient coordinates");
    }
    // Collect bound terms per level.
    let mut terms: Vec<BTreeSet<LinTerm>> = vec![BTreeSet::new(); n + 1];
    let add = |terms: &mut Vec<BTreeSet<LinTerm>>, t: &LinTerm| {
        let lvl = term_level(t, n);
        if let Some(c) = canonicalize_term(t, lvl) {
            terms[lvl].insert(c);
        }
    };
    for s in family {
        for a in s.body.atoms() {
            add(&mut terms, &a.term);
        }
    }
    for j in 1..=n {
        let xj = LinTerm::var(&format!("x{j}"));
        add(&mut terms, &xj.clone().add_constant(&-bbox[j - 1].0.clone()));
        add(&mut terms, &xj.add_constant(&-bbox[j - 1].1.clone()));
    }
    // Projection: close lower levels under resultants of higher ones.
    for j in (2..=n).rev() {
        let level: Vec<LinTerm> = terms[j].iter().cloned().collect();
        for (i1, t1) in level.iter().enumerate() {
            for t2 in level.iter().skip(i1 + 1) {
                // Both are canonical with xj-coefficient 1, so the resultant
                // is simply the difference of the remainders.
                let mut r1 = t1.clone();
                r1.set_coeff(&format!("x{j}"), Rat::zero());
                let mut r2 = t2.clone();
                r2.set_coeff(&format!("x{j}"), Rat::zero());
                let res = r1.sub(&r2);
                add(&mut terms, &res);
            }
        }
    }
    // Base level.
    let (lo1, hi1) = &bbox[0];
    let mut roots: Vec<Rat> = terms[1]
        .iter()
        .map(|t| -t.constant_part().clone())
        .filter(|r| lo1 < r && r < hi1)
        .collect();
    roots.sort();
    roots.dedup();
    let mut stacks: Vec<Vec<Cell>> = Vec::new();
    stacks.push(build_stack(
        None,
        &[],
        &[],
        lo1,
        hi1,
        &roots
            .iter()
            .map(|r| LinTerm::constant(r.clone()))
            .collect::<Vec<_>>(),
        &roots,
    ));
    // Lifting.
    for j in 2..=n {
        let (loj, hij) = &bbox[j - 1];
        let mut next = Vec::new();
        for (bi, base) in stacks[j - 2].iter().enumerate() {
            let mut rf: Vec<(Rat, LinTerm)> = Vec::new();
            for t in &terms[j] {
                let g = root_function(t, j);
                let v = eval_term(&g, &base.sample);
                if loj < &v && &v < hij {
                    rf.push((v, g));
                }
            }
            rf.sort();
            // Equal values at the sample mean equal functions on the cell
            // (the resultant vanishes at the sample, hence on the cell).
            rf.dedup_by(|a, b| a.0 == b.0);
            let funcs: Vec<LinTerm> = rf.iter().map(|(_, g)| g.clone()).collect();
            let vals: Vec<Rat> = rf.iter().map(|(v, _)| v.clone()).collect();
            next.extend(build_stack(
                Some(bi),
                &base.levels,
                &base.sample,
                loj,
                hij,
                &funcs,
                &vals,
            ));
        }
        stacks.push(next);
    }
    // Labels.
    let full = stacks.last().expect("nonempty");
    let mut labels = Vec::new();
    for s in family {
        labels.push(full.iter().map(|c| s.member(&c.sample)).collect());
    }
    // Adjacency.
    let o = VarOrder::numbered(n);
    let mut adjacency = Vec::new();
    for i in 0..if with_adjacency { full.len() } else { 0 } {
        for j in i + 1..full.len() {
            let a = Formula::and(vec![full[i].formula(true), full[j].formula(false)]);
            let b = Formula::and(vec![full[i].formula(false), full[j].formula(true)]);
            let touch = satisfiable(&a, &o, Sort::Real)
                .expect("linear")
                .is_some()
                || satisfiable(&b, &o, Sort::Real).expect("linear").is_some();
            if touch {
                adjacency.push((i, j));
            }
        }
    }
    Ok(CellDecomposition {
        arity: n,
        bbox: bbox.clone(),
        stacks,
        labels,
        adjacency,
    })
}

/// Build the stack of cells over one base cell: alternating bands and
/// sections between the ordered root functions, bracketed by the box bounds.
fn build_stack(
    base_index: Option<usize>,
    base_levels: &[CellLevel],
    base_sample: &[Rat],
    lo: &Rat,
    hi: &Rat,
    funcs: &[LinTerm],
    vals: &[Rat],
) -> Vec<Cell> {
    let mut out = Vec::new();
    let lo_t = LinTerm::constant(lo.clone());
    let hi_t = LinTerm::constant(hi.clone());
    let mut push = |lvl: CellLevel, v: Rat| {
        let mut levels = base_levels.to_vec();
        levels.push(lvl);
        let mut sample = base_sample.to_vec();
        sample.push(v);
        out.push(Cell {
            levels,
            sample,
            base: base_index,
        });
    };
    if funcs.is_empty() {
        push(
            CellLevel::Band(lo_t.clone(), hi_t.clone()),
            (lo + hi) / rat(2),
        );
    } else {
        push(
            CellLevel::Band(lo_t.clone(), funcs[0].clone()),
            (lo + &vals[0]) / rat(2),
        );
        for i in 0..funcs.len() {
            push(CellLevel::Section(funcs[i].clone()), vals[i].clone());
            if i + 1 < funcs.len() {
                push(
                    CellLevel::Band(funcs[i].clone(), funcs[i + 1].clone()),
                    (&vals[i] + &vals[i + 1]) / rat(2),
                );
            }
        }
        push(
            CellLevel::Band(funcs[funcs.len() - 1].clone(), hi_t.clone()),
            (&vals[funcs.len() - 1] + hi) / rat(2),
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Components and paths
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
            r
        } else {
            i
        }
    }
    fn union(&mut self, i: usize, j: usize) {
        let (a, b) = (self.find(i), self.find(j));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

/// Decomposition of the box adapted to x (through its seam-free bounded
/// restriction) together with in-cell flags.
pub fn decompose_for_set(x: &SNFSet, bbox: &BoxN) -> Result<(CellDecomposition, Vec<bool>), CellError> {
    let red = crate::topology::bounded_reduct(x, bbox)?;
    let d = decompose_box(bbox, &[red])?;
    let flags = d.labels[0].clone();
    Ok((d, flags))
}

/// Groups of in-cell indices connected under adjacency, ordered by smallest
/// contained cell index.
fn component_groups(d: &CellDecomposition, inset: &[bool]) -> Vec<Vec<usize>> {
    let m = d.cells().len();
    let mut uf = UnionFind::new(m);
    for &(i, j) in &d.adjacency {
        if inset[i] && inset[j] {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..m {
        if inset[i] {
            groups.entry(uf.find(i)).or_default().push(i);
        }
    }
    groups.into_values().collect()
}

/// Connected components of x within the bounded open box, each returned as a
/// definable set (a union of cells).
pub fn connected_components(x: &SNFSet, bbox: &BoxN) -> Result<Vec<SNFSet>, CellError> {
    let (d, inset) = decompose_for_set(x, bbox)?;
    let o = VarOrder::numbered(d.arity);
    let mut out = Vec::new();
    for g in component_groups(&d, &inset) {
        let f = Formula::or(g.iter().map(|&i| d.cells()[i].formula(false)).collect());
        out.push(compile(&f, &o)?);
    }
    Ok(out)
}

/// Piecewise-linear path: straight segments between consecutive waypoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLPath {
    pub waypoints: Vec<Vec<Rat>>,
}

impl PLPath {
    /// Points along the path at `per_segment` interior samples per segment.
    pub fn sample_points(&self, per_segment: usize) -> Vec<Vec<Rat>> {
        let mut pts = Vec::new();
        for w in &self.waypoints {
            pts.push(w.clone());
        }
        for seg in self.waypoints.windows(2) {
            for s in 1..=per_segment {
                let t = Rat::new(s.into(), (per_segment + 1).into());
                let p: Vec<Rat> = seg[0]
                    .iter()
                    .zip(&seg[1])
                    .map(|(a, b)| a + (b - a) * t.clone())
                    .collect();
                pts.push(p);
            }
        }
        pts
    }
}

/// Path from p to q inside x within the box, built by walking the adjacency
/// graph of in-cells and crossing between adjacent cells through a shared
/// closure point. Convexity of cells keeps every segment inside x.
pub fn path_connect(x: &SNFSet, bbox: &BoxN, p: &[Rat], q: &[Rat]) -> Result<PLPath, CellError> {
    if !point_in_box(p, bbox) || !point_in_box(q, bbox) {
        return Err(CellError::NotInBox);
    }
    if !x.member(p) || !x.member(q) {
        return Err(CellError::NotMember);
    }
    if p == q {
        return Ok(PLPath {
            waypoints: vec![p.to_vec()],
        });
    }
    let (d, inset) = decompose_for_set(x, bbox)?;
    let cp = d.cell_containing(p).ok_or(CellError::NotInBox)?;
    let cq = d.cell_containing(q).ok_or(CellError::NotInBox)?;
    assert!(inset[cp] && inset[cq], "membership already checked");
    // BFS over in-cells.
    let m = d.cells().len();
    let mut prev: Vec<Option<usize>> = vec![None; m];
    let mut seen = vec![false; m];
    let mut queue = VecDeque::new();
    seen[cp] = true;
    queue.push_back(cp);
    while let Some(c) = queue.pop_front() {
        if c == cq {
            break;
        }
        for &(i, j) in &d.adjacency {
            for (a, b) in [(i, j), (j, i)] {
                if a == c && inset[b] && !seen[b] {
                    seen[b] = true;
                    prev[b] = Some(c);
                    queue.push_back(b);
                }
            }
        }
    }
    if !seen[cq] {
        return Err(CellError::DifferentComponents);
    }
    if cp == cq {
        // Both points lie in one convex cell, so the straight segment works.
        return Ok(PLPath {
            waypoints: vec![p.to_vec(), q.to_vec()],
        });
    }
    let mut chain = vec![cq];
    while let Some(b) = prev[*chain.last().expect("nonempty")] {
        chain.push(b);
    }
    chain.reverse();
    let o = VarOrder::numbered(d.arity);
    let mut waypoints = vec![p.to_vec()];
    for w in chain.windows(2) {
        let (ci, cj) = (w[0], w[1]);
        // Crossing point in cl(C) and C', else in C and cl(C').
        let a = Formula::and(vec![
            d.cells()[ci].formula(true),
            d.cells()[cj].formula(false),
        ]);
        let b = Formula::and(vec![
            d.cells()[ci].formula(false),
            d.cells()[cj].formula(true),
        ]);
        let wit = satisfiable(&a, &o, Sort::Real)
            .expect("linear")
            .or_else(|| satisfiable(&b, &o, Sort::Real).expect("linear"))
            .expect("adjacent cells share a closure point");
        let cross: Vec<Rat> = (1..=d.arity)
            .map(|i| {
                wit.get(&format!("x{i}"))
                    .cloned()
                    .unwrap_or_else(|| rat(0))
            })
            .collect();
        waypoints.push(cross);
        waypoints.push(d.cells()[cj].sample.clone());
    }
    // Replace the final sample with q itself.
    *waypoints.last_mut().expect("nonempty") = q.to_vec();
    waypoints.dedup();
    Ok(PLPath { waypoints })
}

/// Dimension of a semilinear set given by an ambient quantifier-free body:
/// the maximum dimension of an in-cell of a decomposition of a surrounding
/// box; None when empty inside the box.
pub fn semilinear_dim_in_box(s: &SemilinearSet, bbox: &BoxN) -> Result<Option<usize>, CellError> {
    let d = decompose_box_cells_only(bbox, &[s.clone()])?;
    let best = d
        .cells()
        .iter()
        .zip(&d.labels[0])
        .filter(|(_, &inside)| inside)
        .map(|(c, _)| c.dim())
        .max();
    Ok(best)
}

// Decompose entry point used by tests needing raw access with samples fixed.
pub fn decompose_box_full(
    bbox: &BoxN,
    family: &[SemilinearSet],
) -> Result<CellDecomposition, CellError> {
    decompose_box(bbox, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin_core::{parse_formula, Int};
    use crate::qe_engine::{entails, simplify};

    fn bx(parts: &[(i64, i64)]) -> BoxN {
        parts
            .iter()
            .map(|&(a, b)| (rat(a), rat(b)))
            .collect()
    }

    fn bxq(parts: &[((i64, i64), (i64, i64))]) -> BoxN {
        parts
            .iter()
            .map(|&((an, ad), (bn, bd))| {
                (
                    Rat::new(Int::from(an), Int::from(ad)),
                    Rat::new(Int::from(bn), Int::from(bd)),
                )
            })
            .collect()
    }

    fn amb(text: &str, n: usize) -> SemilinearSet {
        let o = VarOrder::numbered(n);
        SemilinearSet::ambient(n, parse_formula(text, &o).unwrap())
    }

    fn cset(text: &str, names: &[&str]) -> SNFSet {
        let o = VarOrder::new(names.to_vec());
        compile(&parse_formula(text, &o).unwrap(), &o).unwrap()
    }

    #[test]
    fn line_point_decomposition() {
        let d = decompose_box(&bx(&[(-1, 1)]), &[amb("x1 = 0", 1)]).unwrap();
        assert_eq!(d.cells().len(), 3);
        assert_eq!(d.cells()[1].levels, vec![CellLevel::Section(LinTerm::zero())]);
        assert_eq!(d.labels[0], vec![false, true, false]);
        // (-1,0) adjacent to {0}; (-1,0) not adjacent to (0,1).
        assert!(d.adjacent(0, 1));
        assert!(d.adjacent(1, 2));
        assert!(!d.adjacent(0, 2));
    }

    #[test]
    fn diagonal_decomposition() {
        let d = decompose_box(&bx(&[(-1, 1), (-1, 1)]), &[amb("x2 = x1", 2)]).unwrap();
        assert_eq!(d.stacks[0].len(), 1);
        assert_eq!(d.cells().len(), 3);
        let section = d
            .cells()
            .iter()
            .position(|c| matches!(c.levels[1], CellLevel::Section(_)))
            .unwrap();
        assert!(d.labels[0][section]);
        assert_eq!(d.labels[0].iter().filter(|&&b| b).count(), 1);
        assert!(d.adjacent(0, 1));
        assert!(d.adjacent(1, 2));
    }

    #[test]
    fn two_interval_decomposition() {
        let fam = amb("(0 < x1 and x1 < 1/2) or (1 < x1 and x1 < 3/2)", 1);
        let d = decompose_box(&bx(&[(0, 2)]), &[fam]).unwrap();
        assert_eq!(d.cells().len(), 7);
        assert_eq!(
            d.labels[0],
            vec![true, false, false, false, true, false, false]
        );
    }

    #[test]
    fn cells_partition_box_exactly() {
        let fams = vec![
            vec![amb("x1 < x2 and x2 < 2*x1", 2)],
            vec![amb("x1 + x2 = 1", 2), amb("x1 < 0", 2)],
        ];
        for family in fams {
            let bbox = bx(&[(-1, 1), (-1, 1)]);
            let d = decompose_box(&bbox, &family).unwrap();
            let o = VarOrder::numbered(2);
            // Pairwise disjoint.
            for i in 0..d.cells().len() {
                for j in i + 1..d.cells().len() {
                    let both = Formula::and(vec![
                        d.cells()[i].formula(false),
                        d.cells()[j].formula(false),
                    ]);
                    assert!(
                        satisfiable(&both, &o, Sort::Real).unwrap().is_none(),
                        "cells {i} and {j} overlap"
                    );
                }
            }
            // Union covers the box.
            let box_f = Formula::and(vec![
                parse_formula("-1 < x1 and x1 < 1", &o).unwrap(),
                parse_formula("-1 < x2 and x2 < 1", &o).unwrap(),
            ]);
            let union = Formula::or(d.cells().iter().map(|c| c.formula(false)).collect());
            assert!(entails(&box_f, &union, &o, Sort::Real).unwrap());
            assert!(entails(&union, &box_f, &o, Sort::Real).unwrap());
            // Family members are unions of cells: the cell label decides
            // membership throughout the cell (checked on extra samples).
            for (s, lab) in family.iter().zip(&d.labels) {
                for (c, &inside) in d.cells().iter().zip(lab) {
                    let cf = c.formula(false);
                    let sf = simplify(&s.body, &o, Sort::Real);
                    let consistent = if inside {
                        entails(&cf, &sf, &o, Sort::Real).unwrap()
                    } else {
                        satisfiable(
                            &Formula::and(vec![cf, sf]),
                            &o,
                            Sort::Real,
                        )
                        .unwrap()
                        .is_none()
                    };
                    assert!(consistent, "cell not sign-invariant");
                }
            }
        }
    }

    #[test]
    fn cylindricity() {
        let d = decompose_box(
            &bx(&[(-1, 1), (-1, 1)]),
            &[amb("x1 < x2 and x2 < 2*x1", 2)],
        )
        .unwrap();
        // Dropping the last coordinate of full cells lands exactly on the
        // level-1 stack.
        for c in d.cells() {
            let bi = c.base.unwrap();
            assert_eq!(c.levels[..1], d.stacks[0][bi].levels[..]);
        }
    }

    #[test]
    fn convexity_of_cells() {
        let d = decompose_box(
            &bx(&[(-1, 1), (-1, 1)]),
            &[amb("x1 < x2 and x2 < 2*x1", 2)],
        )
        .unwrap();
        for c in d.cells() {
            assert!(c.contains(&c.sample), "sample in its own cell");
        }
    }

    #[test]
    fn components_line_examples() {
        let x = cset("(0 < x and x < 1/4) or (1/2 < x and x < 1)", &["x"]);
        let comps = connected_components(&x, &bx(&[(-1, 2)])).unwrap();
        assert_eq!(comps.len(), 2);

        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let comps = connected_components(&stair, &bx(&[(-2, 2)])).unwrap();
        assert_eq!(comps.len(), 4);
        // The components partition the window part of the set.
        let mut probe = vec![
            Rat::new(Int::from(-7), Int::from(4)),
            Rat::new(Int::from(-3), Int::from(4)),
            Rat::new(Int::from(1), Int::from(4)),
            Rat::new(Int::from(5), Int::from(4)),
        ];
        probe.sort();
        for p in probe {
            let hits = comps.iter().filter(|c| c.member(&[p.clone()])).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn components_diagonal() {
        let x = cset("y = x", &["x", "y"]);
        let comps = connected_components(&x, &bx(&[(-1, 1), (-1, 1)])).unwrap();
        assert_eq!(comps.len(), 1);
    }

    #[test]
    fn path_in_convex_square() {
        let x = cset("0 < x and x < 1 and 0 < y and y < 1", &["x", "y"]);
        let p = vec![
            Rat::new(Int::from(1), Int::from(4)),
            Rat::new(Int::from(1), Int::from(4)),
        ];
        let q = vec![
            Rat::new(Int::from(3), Int::from(4)),
            Rat::new(Int::from(3), Int::from(4)),
        ];
        let path = path_connect(&x, &bx(&[(-1, 2), (-1, 2)]), &p, &q).unwrap();
        for pt in path.sample_points(6) {
            assert!(x.member(&pt), "path leaves the set at {pt:?}");
        }
        assert_eq!(path.waypoints.first().unwrap(), &p);
        assert_eq!(path.waypoints.last().unwrap(), &q);
    }

    #[test]
    fn path_through_l_shape() {
        let x = cset(
            "(0 < x and x < 1 and 0 < y and y < 1/4) or (0 < x and x < 1/4 and 0 < y and y < 1)",
            &["x", "y"],
        );
        let p = vec![
            Rat::new(Int::from(3), Int::from(4)),
            Rat::new(Int::from(1), Int::from(8)),
        ];
        let q = vec![
            Rat::new(Int::from(1), Int::from(8)),
            Rat::new(Int::from(3), Int::from(4)),
        ];
        let path = path_connect(&x, &bx(&[(-1, 2), (-1, 2)]), &p, &q).unwrap();
        for pt in path.sample_points(8) {
            assert!(x.member(&pt), "path leaves the set at {pt:?}");
        }
    }

    #[test]
    fn path_errors() {
        let x = cset("(0 < x and x < 1) or (2 < x and x < 3)", &["x"]);
        let bbox = bxq(&[((-1, 1), (7, 2))]);
        let p = vec![Rat::new(Int::from(1), Int::from(2))];
        let q = vec![Rat::new(Int::from(5), Int::from(2))];
        assert_eq!(
            path_connect(&x, &bbox, &p, &q),
            Err(CellError::DifferentComponents)
        );
        let outside = vec![rat(5)];
        assert_eq!(
            path_connect(&x, &bbox, &p, &outside),
            Err(CellError::NotInBox)
        );
        let nonmember = vec![Rat::new(Int::from(3), Int::from(2))];
        assert_eq!(
            path_connect(&x, &bbox, &p, &nonmember),
            Err(CellError::NotMember)
        );
        let same = path_connect(&x, &bbox, &p, &p).unwrap();
        assert_eq!(same.waypoints, vec![p]);
    }

    #[test]
    fn flood_fill_oracle_matches() {
        // Count components by flood fill on a 1/8 grid and compare.
        let sets = [
            (
                cset(
                    "(0 < x and x < 1 and 0 < y and y < 1) or (3/2 < x and x < 2 and 0 < y and y < 1)",
                    &["x", "y"],
                ),
                bx(&[(-1, 3), (-1, 3)]),
            ),
            (
                cset("y = x and -1/2 < x and x < 1/2", &["x", "y"]),
                bx(&[(-1, 1), (-1, 1)]),
            ),
        ];
        for (x, bbox) in sets {
            let comps = connected_components(&x, &bbox).unwrap();
            let oracle = flood_fill_count(&x, &bbox);
            assert_eq!(comps.len(), oracle);
        }
    }

    /// Grid flood fill with spacing 1/8 over the open box; adequate for the
    /// fat (full-dimensional) test sets; thin sets get their own spacing
    /// aligned to the set.
    fn flood_fill_count(x: &SNFSet, bbox: &BoxN) -> usize {
        let step = Rat::new(Int::from(1), Int::from(8));
        let axes: Vec<Vec<Rat>> = bbox
            .iter()
            .map(|(lo, hi)| {
                let mut v = Vec::new();
                let mut t = lo.clone() + step.clone();
                while &t < hi {
                    v.push(t.clone());
                    t += step.clone();
                }
                v
            })
            .collect();
        let mut points: Vec<Vec<Rat>> = vec![vec![]];
        for ax in &axes {
            let mut next = Vec::new();
            for p in &points {
                for a in ax {
                    let mut q = p.clone();
                    q.push(a.clone());
                    next.push(q);
                }
            }
            points = next;
        }
        let members: Vec<Vec<Rat>> = points.into_iter().filter(|p| x.member(p)).collect();
        let mut uf = UnionFind::new(members.len());
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let close = members[i]
                    .iter()
                    .zip(&members[j])
                    .all(|(a, b)| (a - b).abs() <= step);
                if close {
                    uf.union(i, j);
                }
            }
        }
        let mut roots = BTreeSet::new();
        for i in 0..members.len() {
            roots.insert(uf.find(i));
        }
        roots.len()
    }

    #[test]
    fn semilinear_dimension_examples() {
        let bbox = bx(&[(-1, 2), (-1, 2)]);
        assert_eq!(
            semilinear_dim_in_box(&amb("x1 = 0 and x2 = 0", 2), &bbox).unwrap(),
            Some(0)
        );
        assert_eq!(
            semilinear_dim_in_box(&amb("x1 = x2 and 0 < x1 and x1 < 1", 2), &bbox).unwrap(),
            Some(1)
        );
        assert_eq!(
            semilinear_dim_in_box(&amb("0 < x1 and x1 < 1 and 0 < x2 and x2 < 1", 2), &bbox)
                .unwrap(),
            Some(2)
        );
        assert_eq!(
            semilinear_dim_in_box(&amb("false", 2), &bbox).unwrap(),
            None
        );
    }
}

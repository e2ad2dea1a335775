//! Structure theory on the unbounded model: partitions into multi-cells,
//! representative point sets for connected components, uniform bounds on the
//! number of components of bounded fiber slices, and uniform parametric cell
//! decompositions of bounded windows.
//!
//! All constructions work fiberwise along the last coordinate through the
//! vertical closure/interior operators and recurse on arity; bad base loci
//! (where branch structure changes) are split off and handled at lower
//! dimension.

use crate::cell_decomp::{self, BoxN, CellError};
use crate::def_sets::{
    self, compile, complement, cylinder, difference, fiber_prefix, insert_coordinate,
    intersect, product, project, remove_coordinate, union, DefinableMap, SNFSet, SetError,
};
use crate::lin_core::{rat, Formula, LinTerm, Rat, VarOrder};
use crate::topology::{self, vertical_closure, vertical_interior};

#[derive(Debug, thiserror::Error)]
pub enum AlmostError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Cell(#[from] CellError),
}

/// Outcome of a window-based verification pass.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub pass: bool,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Default for VerificationReport {
    fn default() -> VerificationReport {
        VerificationReport {
            pass: true,
            checks: 0,
            failures: Vec::new(),
        }
    }
}

impl VerificationReport {
    fn new() -> VerificationReport {
        VerificationReport::default()
    }

    /// Record a failed check.
    pub fn fail(&mut self, msg: String) {
        self.pass = false;
        self.failures.push(msg);
    }
}

// ---------------------------------------------------------------------------
// Small builders
// ---------------------------------------------------------------------------

/// The open interval (lo, hi) as a one-variable set.
pub fn interval_set(lo: &Rat, hi: &Rat) -> SNFSet {
    let o = VarOrder::numbered(1);
    let x = LinTerm::var("x1");
    compile(
        &Formula::and(vec![
            Formula::lt(LinTerm::constant(lo.clone()).sub(&x), &o),
            Formula::lt(x.sub(&LinTerm::constant(hi.clone())), &o),
        ]),
        &o,
    )
    .expect("quantifier-free interval")
}

fn point_set(v: &Rat) -> SNFSet {
    let o = VarOrder::numbered(1);
    compile(
        &Formula::eq(
            LinTerm::var("x1").sub(&LinTerm::constant(v.clone())),
            &o,
        ),
        &o,
    )
    .expect("quantifier-free point")
}

/// The window M^m x (-r, r)^n.
fn window_box(m: usize, n: usize, r: &Rat) -> SNFSet {
    let mut w = SNFSet::full(m);
    for _ in 0..n {
        w = product(&w, &interval_set(&-r.clone(), r));
    }
    w
}

/// Strict-order constraint x_i < x_j as a compiled set of the given arity
/// (1-based coordinate indices).
fn lt_set(arity: usize, i: usize, j: usize) -> SNFSet {
    let o = VarOrder::numbered(arity);
    compile(
        &Formula::lt(
            LinTerm::var(&format!("x{i}")).sub(&LinTerm::var(&format!("x{j}"))),
            &o,
        ),
        &o,
    )
    .expect("quantifier-free order")
}

/// {(x., y): some y' > y has (x., y') in s}.
fn shadow_above(s: &SNFSet) -> Result<SNFSet, SetError> {
    let n = s.arity;
    let t = cylinder(s, 1); // (x., y', y) with s on (x., y')
    let t = intersect(&t, &lt_set(n + 1, n + 1, n))?;
    remove_coordinate(&t, n - 1)
}

/// {(x., y): some y' < y has (x., y') in s}.
fn shadow_below(s: &SNFSet) -> Result<SNFSet, SetError> {
    let n = s.arity;
    let t = cylinder(s, 1);
    let t = intersect(&t, &lt_set(n + 1, n, n + 1))?;
    remove_coordinate(&t, n - 1)
}

/// {(x., y + d): (x., y) in s}: translate along the last coordinate.
fn shift_last(s: &SNFSet, d: &Rat) -> Result<SNFSet, SetError> {
    let n = s.arity;
    let t = cylinder(s, 1); // (x., y, z)
    let o = VarOrder::numbered(n + 1);
    let cns = compile(
        &Formula::eq(
            LinTerm::var(&format!("x{}", n + 1))
                .sub(&LinTerm::var(&format!("x{n}")))
                .add_constant(&-d.clone()),
            &o,
        ),
        &o,
    )?;
    remove_coordinate(&intersect(&t, &cns)?, n - 1)
}

// ---------------------------------------------------------------------------
// Multi-cell partition
// ---------------------------------------------------------------------------

/// An exact partition of a definable set into claimed multi-cells, tagged by
/// the construction branch that produced each piece.
#[derive(Clone, Debug)]
pub struct MulticellPartition {
    pub input: SNFSet,
    pub pieces: Vec<(SNFSet, String)>,
}

pub fn multicell_partition(x: &SNFSet) -> Result<MulticellPartition, SetError> {
    Ok(MulticellPartition {
        input: x.clone(),
        pieces: partition_rec(x)?,
    })
}

fn partition_rec(x: &SNFSet) -> Result<Vec<(SNFSet, String)>, SetError> {
    let n = x.arity;
    if x.is_empty() {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(vec![(x.clone(), "point".to_string())]);
    }
    if n == 1 {
        let x1 = topology::interior(x);
        let d = difference(x, &x1)?;
        let mut out = Vec::new();
        if !x1.is_empty() {
            out.push((x1, "open".to_string()));
        }
        if !d.is_empty() {
            out.push((d, "discrete".to_string()));
        }
        return Ok(out);
    }
    // Split by the shape of the maximal fiber interval (along the last
    // coordinate) containing each point.
    let comp = complement(x);
    let x_oi = vertical_interior(x); // fiber-open points
    let b_forall = complement(&project(&comp, 1)?);
    let x_forall = product(&b_forall, &SNFSet::full(1));
    let up_all = complement(&shadow_above(&comp)?); // everything above stays in x
    let down_all = complement(&shadow_below(&comp)?);
    let x_up_raw = intersect(&x_oi, &up_all)?;
    let x_down_raw = intersect(&x_oi, &down_all)?;
    let x_up = difference(&x_up_raw, &x_forall)?;
    let x_down = difference(&x_down_raw, &x_forall)?;
    let x_boi = difference(
        &difference(&difference(&x_oi, &x_forall)?, &x_up_raw)?,
        &x_down_raw,
    )?;
    let x_pt = difference(x, &x_oi)?;
    let mut out = Vec::new();
    refine_full_line(&x_forall, &mut out)?;
    refine_part(&x_pt, "point", true, &mut out)?;
    refine_part(&x_up, "upper-unbounded", false, &mut out)?;
    refine_part(&x_down, "lower-unbounded", false, &mut out)?;
    refine_part(&x_boi, "bounded-interval", false, &mut out)?;
    Ok(out)
}

fn refine_full_line(
    p: &SNFSet,
    out: &mut Vec<(SNFSet, String)>,
) -> Result<(), SetError> {
    if p.is_empty() {
        return Ok(());
    }
    let base = project(p, 1)?;
    for (b, tag) in partition_rec(&base)? {
        out.push((
            product(&b, &SNFSet::full(1)),
            format!("full-line/{tag}"),
        ));
    }
    Ok(())
}

/// Refine one fiber-shape part into multi-cells: carve the bad base locus
/// (branch-structure changes of the fiber boundary set, singular and
/// frontier points of the base) out of the projection, multi-cell the good
/// and the bad base separately, and restrict the part over each base piece.
fn refine_part(
    p: &SNFSet,
    kind: &str,
    fiber_discrete: bool,
    out: &mut Vec<(SNFSet, String)>,
) -> Result<(), SetError> {
    if p.is_empty() {
        return Ok(());
    }
    let base = project(p, 1)?;
    let u = if fiber_discrete {
        p.clone()
    } else {
        difference(&vertical_closure(p), p)?
    };
    let z1 = topology::closure(&project(&topology::frontier(&u), 1)?);
    let (_, sing) = topology::regular_locus(&base)?;
    let z2 = topology::frontier(&base);
    let bad = union(&union(&z1, &sing)?, &z2)?;
    let good = difference(&base, &bad)?;
    let badb = intersect(&base, &bad)?;
    for (b, tag) in partition_rec(&good)? {
        out.push((
            intersect(p, &product(&b, &SNFSet::full(1)))?,
            format!("{kind}/{tag}"),
        ));
    }
    for (b, tag) in partition_rec(&badb)? {
        out.push((
            intersect(p, &product(&b, &SNFSet::full(1)))?,
            format!("{kind}/low-dim-{tag}"),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Window verification of multi-cellness
// ---------------------------------------------------------------------------

/// Check the exact partition property, then each piece on the open window
/// (-w, w)^n: components whose closure stays inside the window must project
/// onto a component of the piece's projection and have one of the multi-cell
/// fiber shapes (point/graph, band, half-band, full line).
pub fn verify_multicell_window(
    mp: &MulticellPartition,
    w: &Rat,
) -> Result<VerificationReport, AlmostError> {
    let mut rep = VerificationReport::new();
    let n = mp.input.arity;
    let mut cover = SNFSet::empty(n);
    for (i, (p, tag)) in mp.pieces.iter().enumerate() {
        for (q, tag2) in mp.pieces.iter().skip(i + 1) {
            if !intersect(p, q)?.is_empty() {
                rep.fail(format!("pieces '{tag}' and '{tag2}' overlap"));
            }
        }
        cover = union(&cover, p)?;
    }
    rep.checks += 1;
    if !def_sets::equal(&cover, &mp.input)? {
        rep.fail("pieces do not cover the input exactly".to_string());
    }
    rep.checks += 1;
    for (p, tag) in &mp.pieces {
        verify_piece(p, tag, w, &mut rep)?;
    }
    Ok(rep)
}

fn verify_piece(
    p: &SNFSet,
    tag: &str,
    w: &Rat,
    rep: &mut VerificationReport,
) -> Result<(), AlmostError> {
    let n = p.arity;
    if n == 0 {
        rep.checks += 1;
        return Ok(());
    }
    if n == 1 {
        rep.checks += 1;
        let discrete = topology::interior(p).is_empty();
        let open = def_sets::equal(&topology::interior(p), p)?;
        if !discrete && !open {
            rep.fail(format!(
                "piece '{tag}' is neither discrete nor a union of open intervals"
            ));
        }
        return Ok(());
    }
    let bbox: BoxN = (0..n).map(|_| (-w.clone(), w.clone())).collect();
    let comps = cell_decomp::connected_components(p, &bbox)?;
    let basep = project(p, 1)?;
    let bbox_b: BoxN = (0..n - 1).map(|_| (-w.clone(), w.clone())).collect();
    let base_comps = cell_decomp::connected_components(&basep, &bbox_b)?;
    let o = VarOrder::numbered(n);
    let boundary = compile(
        &Formula::or(
            (1..=n)
                .flat_map(|i| {
                    let xi = LinTerm::var(&format!("x{i}"));
                    [
                        Formula::eq(xi.clone().add_constant(&-w.clone()), &o),
                        Formula::eq(xi.add_constant(w), &o),
                    ]
                })
                .collect(),
        ),
        &o,
    )?;
    for comp in &comps {
        if !intersect(&topology::closure(comp), &boundary)?.is_empty() {
            // Truncated by the window; its shape cannot be judged here.
            continue;
        }
        rep.checks += 1;
        let pj = project(comp, 1)?;
        let mut matched = false;
        for bc in &base_comps {
            if def_sets::equal(&pj, bc)? {
                matched = true;
                break;
            }
        }
        if !matched {
            rep.fail(format!(
                "piece '{tag}': a component does not project onto a component \
                 of the projection"
            ));
            continue;
        }
        // Shape: every fiber a single point, or fiber-open with a single
        // component per fiber.
        if DefinableMap::new(comp.clone(), n - 1, 1).is_function()? {
            continue;
        }
        let fiber_open = def_sets::equal(&vertical_interior(comp), comp)?;
        let split_fiber = !chain_step(comp, comp)?.is_empty();
        if !(fiber_open && !split_fiber) {
            rep.fail(format!(
                "piece '{tag}': a component has a fiber that is neither a \
                 single point nor a single open interval"
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Representative sets
// ---------------------------------------------------------------------------

/// A discrete selection of points meeting each connected component of the
/// host (fiberwise over the first m coordinates) exactly once.
#[derive(Clone, Debug)]
pub struct RepresentativeSet {
    pub host: SNFSet,
    pub points: SNFSet,
}

pub fn representative_set(x: &SNFSet, m: usize) -> Result<RepresentativeSet, SetError> {
    assert!(m <= x.arity, "prefix arity exceeds the set arity");
    Ok(RepresentativeSet {
        host: x.clone(),
        points: rep_rec(x, m)?,
    })
}

fn rep_rec(x: &SNFSet, m: usize) -> Result<SNFSet, SetError> {
    let n = x.arity;
    if n == m {
        return Ok(x.clone());
    }
    let base = project(x, 1)?;
    let rb = rep_rec(&base, m)?;
    let restricted = intersect(x, &product(&rb, &SNFSet::full(1)))?;
    rep_last(&restricted)
}

/// One representative per component of each fiber along the last coordinate:
/// fiber-isolated points stay; bounded maximal intervals contribute their
/// midpoints; half-infinite maximal intervals contribute the finite endpoint
/// offset by 1 into the interval; full-line fibers contribute 0.
fn rep_last(x: &SNFSet) -> Result<SNFSet, SetError> {
    let n = x.arity;
    let vint = vertical_interior(x);
    let d = difference(x, &vint)?;
    let e = difference(&vertical_closure(&vint), &vint)?;
    let cv = complement(&vint);
    let full_base = complement(&project(&cv, 1)?);
    let zero = product(&full_base, &point_set(&rat(0)));
    // Endpoint pairs (x., y1, y2) of bounded maximal intervals: both ends in
    // the fiber boundary, with the open segment inside the fiber interior.
    let a = cylinder(&e, 1); // e on (x., y1)
    let b = insert_coordinate(&e, n - 1); // e on (x., y2)
    let gap = {
        let c1 = insert_coordinate(&cv, n - 1); // (x., y1, t)
        let c2 = insert_coordinate(&c1, n); // (x., y1, y2, t)
        let c2 = intersect(&c2, &lt_set(n + 2, n, n + 2))?;
        let c2 = intersect(&c2, &lt_set(n + 2, n + 2, n + 1))?;
        project(&c2, 1)?
    };
    let pairs = difference(
        &intersect(&intersect(&a, &b)?, &lt_set(n + 1, n, n + 1))?,
        &gap,
    )?;
    let mids = {
        let c = cylinder(&pairs, 1); // (x., y1, y2, mid)
        let o = VarOrder::numbered(n + 2);
        let cns = compile(
            &Formula::eq(
                LinTerm::var(&format!("x{}", n + 2))
                    .scale(&rat(2))
                    .sub(&LinTerm::var(&format!("x{n}")))
                    .sub(&LinTerm::var(&format!("x{}", n + 1))),
                &o,
            ),
            &o,
        )?;
        let t = intersect(&c, &cns)?;
        let t = remove_coordinate(&t, n - 1)?;
        remove_coordinate(&t, n - 1)?
    };
    let upper = difference(&e, &shadow_above(&cv)?)?; // lower ends of (y, inf)
    let lower = difference(&e, &shadow_below(&cv)?)?; // upper ends of (-inf, y)
    let up_rep = shift_last(&upper, &rat(1))?;
    let lo_rep = shift_last(&lower, &rat(-1))?;
    let mut out = d;
    for s in [zero, mids, up_rep, lo_rep] {
        out = union(&out, &s)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Uniform component bound
// ---------------------------------------------------------------------------

/// One chain-extension step: points (a., t) of g that extend a chain ending
/// in c by one more element with a gap (a point of the complement of g)
/// strictly in between.
/// The parts of a chain-extension step that depend only on the fixed set g:
/// g placed on the next-element coordinate, conjoined with the gap condition
/// (a point of the complement of g strictly between the chain end and the
/// next element) and the ordering of the two.
struct ChainStepper {
    /// Pairs (a., s, t) with s < t, t a point of g, and a gap in between.
    extend: SNFSet,
}

impl ChainStepper {
    fn new(g: &SNFSet) -> Result<ChainStepper, SetError> {
        let n = g.arity;
        let gt = insert_coordinate(g, n - 1); // g on (a., t)
        let gap = {
            let cg = complement(g); // (a., u)
            let c1 = insert_coordinate(&cg, n - 1); // (a., s, u)
            let c2 = insert_coordinate(&c1, n); // (a., s, t, u)
            let c2 = intersect(&c2, &lt_set(n + 2, n, n + 2))?;
            let c2 = intersect(&c2, &lt_set(n + 2, n + 2, n + 1))?;
            project(&c2, 1)?
        };
        let extend = intersect(&intersect(&gt, &lt_set(n + 1, n, n + 1))?, &gap)?;
        Ok(ChainStepper { extend })
    }

    /// Points (a., t) of g extending a chain ending in c by one element.
    fn step(&self, c: &SNFSet) -> Result<SNFSet, SetError> {
        let n = c.arity;
        let cs = cylinder(c, 1); // (a., s, t), chain end at s
        let step = intersect(&cs, &self.extend)?;
        remove_coordinate(&step, n - 1)
    }
}

fn chain_step(c: &SNFSet, g: &SNFSet) -> Result<SNFSet, SetError> {
    ChainStepper::new(g)?.step(c)
}

/// The exact supremum K over parameters a of the number of connected
/// components of the fiber slice x_a intersected with (-r, r), with a
/// parameter witness attaining it. Components are counted by the longest
/// increasing chain of fiber points pairwise separated by gaps.
pub fn uniform_bound(
    x: &SNFSet,
    r: &Rat,
) -> Result<(usize, Option<Vec<Rat>>), SetError> {
    let n1 = x.arity;
    assert!(n1 >= 1, "the fiber coordinate is the last one");
    let np = n1 - 1;
    let win = product(&SNFSet::full(np), &interval_set(&-r.clone(), r));
    let g = intersect(x, &win)?;
    let stepper = ChainStepper::new(&g)?;
    let mut k = 0usize;
    let mut cur = g.clone();
    let mut wit = None;
    while !cur.is_empty() {
        k += 1;
        assert!(k <= 10_000, "component chain failed to terminate");
        wit = cur.witness();
        cur = stepper.step(&cur)?;
    }
    Ok((k, wit.map(|p| p[..np].to_vec())))
}

// ---------------------------------------------------------------------------
// Uniform decomposition
// ---------------------------------------------------------------------------

/// One piece of a uniform decomposition: a subset of M^m x (-R, R)^n whose
/// nonempty fibers over the parameter space are cells of the recorded type
/// (per window coordinate: 0 = point, 1 = open interval), sign-pure for
/// every family member.
#[derive(Clone, Debug)]
pub struct UniformPiece {
    pub set: SNFSet,
    pub fiber_cell_type: Vec<u8>,
    pub sign: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct UniformDecomposition {
    pub m: usize,
    pub n: usize,
    pub r: Rat,
    pub pieces: Vec<UniformPiece>,
}

pub fn uniform_decomposition(
    family: &[SNFSet],
    m: usize,
    n: usize,
    r: &Rat,
) -> Result<UniformDecomposition, SetError> {
    assert!(n >= 1, "at least one window coordinate");
    assert!(r > &rat(0), "window radius must be positive");
    for a in family {
        assert_eq!(a.arity, m + n, "family members must have arity m + n");
    }
    if family.is_empty() {
        return Ok(UniformDecomposition {
            m,
            n,
            r: r.clone(),
            pieces: vec![UniformPiece {
                set: window_box(m, n, r),
                fiber_cell_type: vec![1; n],
                sign: Vec::new(),
            }],
        });
    }
    Ok(UniformDecomposition {
        m,
        n,
        r: r.clone(),
        pieces: decomp_rec(family, m, n, r)?,
    })
}

fn decomp_rec(
    family: &[SNFSet],
    m: usize,
    n: usize,
    r: &Rat,
) -> Result<Vec<UniformPiece>, SetError> {
    if n == 1 {
        return Ok(decomp_last(family, m, r)?
            .into_iter()
            .map(|(p, _)| p)
            .collect());
    }
    // Decompose the last window coordinate parametrically, then recurse on
    // the parameter regions as a family over the remaining coordinates.
    let level = decomp_last(family, m + n - 1, r)?;
    let regions: Vec<SNFSet> = level.iter().map(|(_, t)| t.clone()).collect();
    let sub = decomp_rec(&regions, m, n - 1, r)?;
    let mut out = Vec::new();
    for q in &sub {
        for (idx, (p, _)) in level.iter().enumerate() {
            if !q.sign[idx] {
                continue;
            }
            let set = intersect(&p.set, &product(&q.set, &SNFSet::full(1)))?;
            if set.is_empty() {
                continue;
            }
            let mut ty = q.fiber_cell_type.clone();
            ty.extend(&p.fiber_cell_type);
            out.push(UniformPiece {
                set,
                fiber_cell_type: ty,
                sign: p.sign.clone(),
            });
        }
    }
    Ok(out)
}

/// The set with exactly j cut points strictly below, given the descending
/// chain below[i] = "at least i+1 cuts strictly below".
fn exactly_below(
    j: usize,
    below: &[SNFSet],
    arity: usize,
) -> Result<SNFSet, SetError> {
    let ge_j = if j == 0 {
        SNFSet::full(arity)
    } else if j - 1 < below.len() {
        below[j - 1].clone()
    } else {
        SNFSet::empty(arity)
    };
    let ge_j1 = if j < below.len() {
        below[j].clone()
    } else {
        SNFSet::empty(arity)
    };
    difference(&ge_j, &ge_j1)
}

/// Base case: decompose the last coordinate of arity mp+1 sets over the
/// window (-r, r), parametrically in the first mp coordinates. Returns each
/// piece together with its parameter region.
fn decomp_last(
    family: &[SNFSet],
    mp: usize,
    r: &Rat,
) -> Result<Vec<(UniformPiece, SNFSet)>, SetError> {
    let n1 = mp + 1;
    let win = product(&SNFSet::full(mp), &interval_set(&-r.clone(), r));
    // Cut points: fiber boundaries of every family member inside the window.
    let mut cuts = SNFSet::empty(n1);
    for a in family {
        let aw = intersect(a, &win)?;
        let vb = difference(&vertical_closure(&aw), &vertical_interior(&aw))?;
        cuts = union(&cuts, &intersect(&vb, &win)?)?;
    }
    let mut below: Vec<SNFSet> = Vec::new();
    let mut cur = shadow_below(&cuts)?;
    while !cur.is_empty() {
        below.push(cur.clone());
        assert!(below.len() <= 10_000, "cut chain failed to terminate");
        cur = shadow_below(&intersect(&cuts, below.last().expect("nonempty"))?)?;
    }
    let kmax = below.len();
    // d[i-1] = parameter points with at least i cuts.
    let mut d: Vec<SNFSet> = vec![project(&cuts, 1)?];
    for i in 2..=kmax {
        d.push(project(&intersect(&cuts, &below[i - 2])?, 1)?);
    }
    let full_b = SNFSet::full(mp);
    let mut out = Vec::new();
    for i in 0..=kmax {
        let s_i = if i == 0 {
            match d.first() {
                Some(d1) => difference(&full_b, d1)?,
                None => full_b.clone(),
            }
        } else {
            let upper = d.get(i).cloned().unwrap_or_else(|| SNFSet::empty(mp));
            difference(&d[i - 1], &upper)?
        };
        if s_i.is_empty() {
            continue;
        }
        for t in refine_stratum(&s_i, i, &cuts, &below, mp)? {
            let cylt = product(&t, &SNFSet::full(1));
            for j in 0..=i {
                let ex = exactly_below(j, &below, n1)?;
                let band = difference(
                    &intersect(&intersect(&win, &cylt)?, &ex)?,
                    &cuts,
                )?;
                push_sign_split(&band, 1, &t, family, &mut out)?;
                if j < i {
                    let sec = intersect(&intersect(&cuts, &cylt)?, &ex)?;
                    push_sign_split(&sec, 0, &t, family, &mut out)?;
                }
            }
        }
    }
    Ok(out)
}

/// Refine a stratum so each cut-point function is continuous on each part.
fn refine_stratum(
    s_i: &SNFSet,
    i: usize,
    cuts: &SNFSet,
    below: &[SNFSet],
    mp: usize,
) -> Result<Vec<SNFSet>, SetError> {
    if mp == 0 || i == 0 {
        return Ok(vec![s_i.clone()]);
    }
    let n1 = mp + 1;
    let subset: Vec<usize> = (1..=mp).collect();
    let mut todo = vec![s_i.clone()];
    let mut done = Vec::new();
    let mut rounds = 0usize;
    while let Some(t) = todo.pop() {
        rounds += 1;
        if rounds > 4 * (mp + 2) {
            // No further refinement progress; keep the part and let the
            // verification pass judge it.
            done.push(t);
            continue;
        }
        let cylt = product(&t, &SNFSet::full(1));
        let mut disc = SNFSet::empty(mp);
        for j in 0..i {
            let ex = exactly_below(j, below, n1)?;
            let g = intersect(&intersect(cuts, &cylt)?, &ex)?;
            if g.is_empty() {
                continue;
            }
            let ir = topology::irregular_for(&g, &subset)?;
            disc = union(&disc, &project(&ir, 1)?)?;
        }
        disc = intersect(&disc, &t)?;
        if disc.is_empty() || def_sets::equal(&disc, &t)? {
            done.push(t);
        } else {
            done.push(difference(&t, &disc)?);
            todo.push(disc);
        }
    }
    Ok(done)
}

/// Split the parameter region of one fiber cell so the cell is sign-pure for
/// every family member, and emit the resulting pieces.
fn push_sign_split(
    cell_set: &SNFSet,
    type_bit: u8,
    t: &SNFSet,
    family: &[SNFSet],
    out: &mut Vec<(UniformPiece, SNFSet)>,
) -> Result<(), SetError> {
    if cell_set.is_empty() {
        return Ok(());
    }
    let mut regions: Vec<(SNFSet, Vec<bool>)> = vec![(t.clone(), Vec::new())];
    for a in family {
        let mut next = Vec::new();
        for (tt, sgn) in regions {
            let restricted = intersect(cell_set, &product(&tt, &SNFSet::full(1)))?;
            let mixed_out = project(&difference(&restricted, a)?, 1)?;
            let in_region = difference(&tt, &mixed_out)?;
            let mixed_in = project(&intersect(&restricted, a)?, 1)?;
            let out_region = difference(&tt, &mixed_in)?;
            if !in_region.is_empty() {
                let mut s = sgn.clone();
                s.push(true);
                next.push((in_region, s));
            }
            if !out_region.is_empty() {
                let mut s = sgn.clone();
                s.push(false);
                next.push((out_region, s));
            }
        }
        regions = next;
    }
    for (tt, sgn) in regions {
        let set = intersect(cell_set, &product(&tt, &SNFSet::full(1)))?;
        if set.is_empty() {
            continue;
        }
        out.push((
            UniformPiece {
                set,
                fiber_cell_type: vec![type_bit],
                sign: sgn,
            },
            tt,
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Verification of uniform decompositions
// ---------------------------------------------------------------------------

pub fn verify_uniform_decomposition(
    u: &UniformDecomposition,
    family: &[SNFSet],
    samples: &[Vec<Rat>],
) -> Result<VerificationReport, SetError> {
    let mut rep = VerificationReport::new();
    let win = window_box(u.m, u.n, &u.r);
    let mut cover = SNFSet::empty(u.m + u.n);
    for (i, p) in u.pieces.iter().enumerate() {
        for (j, q) in u.pieces.iter().enumerate().skip(i + 1) {
            if !intersect(&p.set, &q.set)?.is_empty() {
                rep.fail(format!("pieces {i} and {j} overlap"));
            }
        }
        cover = union(&cover, &p.set)?;
    }
    rep.checks += 1;
    if !def_sets::equal(&cover, &win)? {
        rep.fail("pieces do not cover the window exactly".to_string());
    }
    for (i, p) in u.pieces.iter().enumerate() {
        for (li, a) in family.iter().enumerate() {
            rep.checks += 1;
            if p.sign.get(li).copied().unwrap_or(false) {
                if !def_sets::subset(&p.set, a)? {
                    rep.fail(format!(
                        "piece {i} marked inside family member {li} but is \
                         not contained in it"
                    ));
                }
            } else if !intersect(&p.set, a)?.is_empty() {
                rep.fail(format!(
                    "piece {i} marked outside family member {li} but meets it"
                ));
            }
        }
    }
    for b in samples {
        assert_eq!(b.len(), u.m, "samples are parameter points");
        for (i, p) in u.pieces.iter().enumerate() {
            let f = fiber_prefix(&p.set, b)?;
            if f.is_empty() {
                continue;
            }
            rep.checks += 1;
            if !check_fiber_type(&f, &p.fiber_cell_type, &u.r)? {
                rep.fail(format!(
                    "piece {i} fiber at {b:?} does not have its recorded \
                     cell type {:?}",
                    p.fiber_cell_type
                ));
            }
        }
    }
    Ok(rep)
}

/// Recursive sampled check that a window fiber is a cell of the recorded
/// type vector.
fn check_fiber_type(f: &SNFSet, ty: &[u8], r: &Rat) -> Result<bool, SetError> {
    let d = f.arity;
    assert_eq!(ty.len(), d);
    if d == 1 {
        let form = def_sets::finite_union_in_interval(f, &-r.clone(), r)?;
        return Ok(match ty[0] {
            0 => form.intervals.is_empty() && form.points.len() == 1,
            _ => form.points.is_empty() && form.intervals.len() == 1,
        });
    }
    let base = project(f, 1)?;
    if !check_fiber_type(&base, &ty[..d - 1], r)? {
        return Ok(false);
    }
    match base.witness() {
        Some(b) => check_fiber_type(&fiber_prefix(f, &b)?, &ty[d - 1..], r),
        None => Ok(false),
    }
}

// ---------------------------------------------------------------------------
// Window component bound
// ---------------------------------------------------------------------------

/// The translated-membership relation {(b., s.): b + s in x} of arity 2n.
fn translate_relation(x: &SNFSet) -> Result<SNFSet, SetError> {
    let n = x.arity;
    let t0 = product(&SNFSet::full(2 * n), x); // (b., s., t.)
    let o = VarOrder::numbered(3 * n);
    let cns = compile(
        &Formula::and(
            (1..=n)
                .map(|i| {
                    Formula::eq(
                        LinTerm::var(&format!("x{}", 2 * n + i))
                            .sub(&LinTerm::var(&format!("x{i}")))
                            .sub(&LinTerm::var(&format!("x{}", n + i))),
                        &o,
                    )
                })
                .collect(),
        ),
        &o,
    )?;
    project(&intersect(&t0, &cns)?, n)
}

/// A bound K on the number of connected components of x intersected with any
/// translate b + (-r, r)^n. Exact for n = 1 (via the chain method on the
/// translate relation); for n > 1 the count of in-marked pieces of a uniform
/// decomposition of the translate relation is a valid upper bound.
pub fn window_component_bound(x: &SNFSet, r: &Rat) -> Result<usize, SetError> {
    let n = x.arity;
    assert!(n >= 1);
    let t = translate_relation(x)?;
    if n == 1 {
        return Ok(uniform_bound(&t, r)?.0);
    }
    let u = uniform_decomposition(&[t.clone()], n, n, r)?;
    Ok(u.pieces.iter().filter(|p| p.sign[0]).count())
}

// ---------------------------------------------------------------------------
// Structure axiom suite
// ---------------------------------------------------------------------------

/// Deterministic pseudo-random stream (splitmix64) so the suite needs no
/// external randomness source.
pub(crate) struct Stream(pub u64);

impl Stream {
    pub(crate) fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in 0..m.
    pub(crate) fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m
    }

    /// A small rational with numerator in [-8, 8] and denominator in 1..=4.
    pub(crate) fn small_rat(&mut self) -> Rat {
        let n = self.below(17) as i64 - 8;
        let d = self.below(4) as i64 + 1;
        Rat::new(n.into(), d.into())
    }
}

/// A random quantifier-free formula over the given variables: a shallow
/// boolean combination of order, equality, and integrality atoms with small
/// integer coefficients and small rational constants. Coefficients stay
/// integral because the split representation of an atom grows with the sum
/// of its denominator-cleared coefficients.
pub(crate) fn random_formula(s: &mut Stream, order: &VarOrder, atoms: usize) -> Formula {
    let mut parts = Vec::new();
    for _ in 0..atoms.max(1) {
        let mut t = LinTerm::constant(s.small_rat());
        for v in order.names() {
            if s.below(3) > 0 {
                let c = s.below(9) as i64 - 4;
                t = t.add(&LinTerm::var(v).scale(&rat(c)));
            }
        }
        let a = match s.below(4) {
            0 => Formula::eq(t, order),
            1 => Formula::is_int(t, order),
            _ => Formula::lt(t, order),
        };
        let a = if s.below(4) == 0 { Formula::not(a) } else { a };
        parts.push(a);
    }
    if s.below(2) == 0 {
        Formula::and(parts)
    } else {
        Formula::or(parts)
    }
}

/// A small corpus of compiled sets of the given arity: a few fixed shapes
/// plus random formulas.
pub(crate) fn random_corpus(s: &mut Stream, arity: usize, count: usize) -> Vec<SNFSet> {
    let o = VarOrder::numbered(arity);
    let mut out = vec![SNFSet::empty(arity), SNFSet::full(arity)];
    if arity == 1 {
        out.push(compile(&Formula::is_int(LinTerm::var("x1"), &o), &o).expect("integers"));
        out.push(interval_set(&rat(0), &Rat::new(1.into(), 2.into())));
    }
    while out.len() < count {
        let atoms = 1 + s.below(3) as usize;
        let f = random_formula(s, &o, atoms);
        let x = compile(&f, &o).expect("quantifier-free compile");
        // Very ragged random sets make the exact boolean-law checks slow
        // without testing anything new; keep the corpus small-bodied.
        // Complements grow like 2^pieces, so the cap is deliberately tight.
        if x.pieces.len() <= 3 {
            out.push(x);
        }
    }
    out
}

/// Exercise the closure properties the set representation is contractually
/// required to have: representability of points, intervals, order and
/// diagonal relations; boolean algebra laws; products; permutations;
/// projection; and explicit finite-union form of bounded one-variable
/// restrictions. Returns one failure entry per violated instance.
pub fn structure_axiom_suite(seed: u64, samples: usize) -> Result<VerificationReport, SetError> {
    let mut s = Stream(seed);
    let mut rep = VerificationReport::new();
    let o1 = VarOrder::numbered(1);
    let o2 = VarOrder::numbered(2);

    // (1) Singletons and bounded open intervals are representable.
    for _ in 0..samples {
        rep.checks += 1;
        let p = s.small_rat();
        let single = compile(
            &Formula::eq(LinTerm::var("x1").sub(&LinTerm::constant(p.clone())), &o1),
            &o1,
        )?;
        let off = &p + Rat::new(1.into(), 3.into());
        if !single.member(&[p.clone()]) || single.member(&[off]) {
            rep.fail(format!("singleton at {p} misrepresented"));
        }
        let a = s.small_rat();
        let b = s.small_rat();
        let (a, b) = if a < b { (a, b) } else { (&b - rat(1), a) };
        let iv = interval_set(&a, &b);
        let mid = (&a + &b) / rat(2);
        if !iv.member(&[mid]) || iv.member(&[b.clone()]) {
            rep.fail(format!("interval ({a}, {b}) misrepresented"));
        }
    }

    // (2) The order and diagonal relations are representable.
    let lt = compile(
        &Formula::lt(LinTerm::var("x1").sub(&LinTerm::var("x2")), &o2),
        &o2,
    )?;
    let diag = compile(
        &Formula::eq(LinTerm::var("x1").sub(&LinTerm::var("x2")), &o2),
        &o2,
    )?;
    for _ in 0..samples {
        rep.checks += 1;
        let (x, y) = (s.small_rat(), s.small_rat());
        if lt.member(&[x.clone(), y.clone()]) != (x < y)
            || diag.member(&[x.clone(), y.clone()]) != (x == y)
        {
            rep.fail(format!("order/diagonal wrong at ({x}, {y})"));
        }
    }

    // (3) Boolean algebra: de Morgan and difference laws as exact equalities.
    for arity in 1..=2 {
        let corpus = random_corpus(&mut s, arity, 6);
        for a in &corpus {
            for b in &corpus {
                rep.checks += 1;
                let lhs = complement(&union(a, b)?);
                let rhs = intersect(&complement(a), &complement(b))?;
                if !def_sets::equal(&lhs, &rhs)? {
                    rep.fail(format!("de Morgan failure at arity {arity}"));
                }
                rep.checks += 1;
                let d = difference(a, b)?;
                let d2 = intersect(a, &complement(b))?;
                if !def_sets::equal(&d, &d2)? {
                    rep.fail(format!("difference law failure at arity {arity}"));
                }
            }
        }
    }

    // (4) Products: membership in A x B is componentwise.
    let c1 = random_corpus(&mut s, 1, 5);
    for a in &c1 {
        for b in &c1 {
            let p = product(a, b);
            for _ in 0..samples / 5 + 1 {
                rep.checks += 1;
                let (x, y) = (s.small_rat(), s.small_rat());
                let want = a.member(&[x.clone()]) && b.member(&[y.clone()]);
                if p.member(&[x.clone(), y.clone()]) != want {
                    rep.fail(format!("product membership wrong at ({x}, {y})"));
                }
            }
        }
    }

    // (5) Permutations: coordinate swap acts on membership.
    let c2 = random_corpus(&mut s, 2, 6);
    for a in &c2 {
        let sw = def_sets::permute(a, &[1, 0]);
        for _ in 0..samples / 3 + 1 {
            rep.checks += 1;
            let (x, y) = (s.small_rat(), s.small_rat());
            if sw.member(&[y.clone(), x.clone()]) != a.member(&[x.clone(), y.clone()]) {
                rep.fail(format!("permutation wrong at ({x}, {y})"));
            }
        }
    }

    // (6) Projection is the exact image: projected membership equals fiber
    // nonemptiness, and members project into the image.
    for a in &c2 {
        let pj = project(a, 1)?;
        for _ in 0..samples / 3 + 1 {
            rep.checks += 1;
            let x = s.small_rat();
            let fiber = fiber_prefix(a, &[x.clone()])?;
            if pj.member(&[x.clone()]) != !fiber.is_empty() {
                rep.fail(format!("projection wrong at {x}"));
            }
            let y = s.small_rat();
            if a.member(&[x.clone(), y.clone()]) && !pj.member(&[x]) {
                rep.fail("member escapes projection".to_string());
            }
        }
    }

    // (7) Bounded one-variable restrictions are explicit finite unions of
    // points and open intervals, matching pointwise sampling.
    for a in &c1 {
        rep.checks += 1;
        let lo = s.small_rat();
        let hi = &lo + rat(1) + Rat::new((s.below(8) + 1).into(), 4.into());
        let form = match def_sets::finite_union_in_interval(a, &lo, &hi) {
            Ok(f) => f,
            Err(e) => {
                rep.fail(format!("no finite union on ({lo}, {hi}): {e}"));
                continue;
            }
        };
        for q in 0..=16u64 {
            let v = &lo + (&hi - &lo) * Rat::new(q.into(), 16.into());
            let inside = &lo < &v && &v < &hi && a.member(&[v.clone()]);
            if form.member(&v) != inside {
                rep.fail(format!("finite union disagrees at {v}"));
            }
        }
        for p in &form.points {
            if !a.member(&[p.clone()]) {
                rep.fail(format!("listed point {p} not in the set"));
            }
        }
        for (l, h) in &form.intervals {
            let (l, h) = (l.clone().unwrap_or(lo.clone()), h.clone().unwrap_or(hi.clone()));
            let mid = (&l + &h) / rat(2);
            if !a.member(&[mid.clone()]) {
                rep.fail(format!("listed interval midpoint {mid} not in the set"));
            }
        }
    }

    Ok(rep)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin_core::{parse_formula, Int};

    fn cset(text: &str, names: &[&str]) -> SNFSet {
        let o = VarOrder::new(names.to_vec());
        compile(&parse_formula(text, &o).unwrap(), &o).unwrap()
    }

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn axiom_suite_passes() {
        let rep = structure_axiom_suite(1, 10).unwrap();
        assert!(rep.pass, "failures: {:?}", rep.failures);
        assert!(rep.checks > 100);
    }

    #[test]
    fn multicell_one_dim_examples() {
        let z = cset("Int(x)", &["x"]);
        let mp = multicell_partition(&z).unwrap();
        assert_eq!(mp.pieces.len(), 1);
        assert_eq!(mp.pieces[0].1, "discrete");

        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let mp = multicell_partition(&stair).unwrap();
        assert_eq!(mp.pieces.len(), 1);
        assert_eq!(mp.pieces[0].1, "open");
        let rep = verify_multicell_window(&mp, &rat(3)).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn multicell_band_over_integers() {
        let x = cset("Int(x) and x < y and y < x + 1", &["x", "y"]);
        let mp = multicell_partition(&x).unwrap();
        let mut cover = SNFSet::empty(2);
        for (p, _) in &mp.pieces {
            cover = union(&cover, p).unwrap();
        }
        assert!(def_sets::equal(&cover, &x).unwrap());
        // The projection of the union of pieces is the integers.
        let pj = project(&cover, 1).unwrap();
        assert!(def_sets::equal(&pj, &cset("Int(x)", &["x"])).unwrap());
        let rep = verify_multicell_window(&mp, &rat(3)).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn multicell_verify_negative_control() {
        // A connected set with a split fiber (two intervals over x > 0) is
        // not a multi-cell.
        let broken = cset(
            "-1 < x and x < 1 and -1 < y and y < 1 and (y < 0 or 0 < y or x < 0)",
            &["x", "y"],
        );
        let mp = MulticellPartition {
            input: broken.clone(),
            pieces: vec![(broken, "claimed".to_string())],
        };
        let rep = verify_multicell_window(&mp, &rat(3)).unwrap();
        assert!(!rep.pass);
        assert!(!rep.failures.is_empty());
    }

    #[test]
    fn multicell_empty_is_vacuous() {
        let mp = multicell_partition(&SNFSet::empty(2)).unwrap();
        assert!(mp.pieces.is_empty());
        let rep = verify_multicell_window(&mp, &rat(3)).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn representative_examples() {
        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let r = representative_set(&stair, 0).unwrap();
        let expected = cset("Int(x - 1/4)", &["x"]);
        assert!(def_sets::equal(&r.points, &expected).unwrap());

        let all = SNFSet::full(1);
        let r = representative_set(&all, 0).unwrap();
        assert!(def_sets::equal(&r.points, &cset("x = 0", &["x"])).unwrap());

        let z = cset("Int(x)", &["x"]);
        let r = representative_set(&z, 0).unwrap();
        assert!(def_sets::equal(&r.points, &z).unwrap());
    }

    #[test]
    fn representative_is_inside_host() {
        for x in [
            cset("0 < x and x < 1", &["x"]),
            cset("x < 0", &["x"]),
            cset("Int(x) and x < y and y < x + 1", &["x", "y"]),
        ] {
            let r = representative_set(&x, 0).unwrap();
            assert!(def_sets::subset(&r.points, &x).unwrap());
            assert!(!r.points.is_empty());
        }
    }

    #[test]
    fn uniform_bound_examples() {
        // Fibers are the integer translates of the parameter.
        let x = cset("Int(t - a)", &["a", "t"]);
        let (k, wit) = uniform_bound(&x, &rat(3)).unwrap();
        assert_eq!(k, 6);
        let w = wit.expect("nonempty set has a witness");
        // The witness fiber attains 6 points in (-3, 3).
        let fiber = fiber_prefix(&x, &w).unwrap();
        let form =
            def_sets::finite_union_in_interval(&fiber, &rat(-3), &rat(3)).unwrap();
        assert_eq!(form.points.len(), 6);

        let plane = SNFSet::full(2);
        assert_eq!(uniform_bound(&plane, &rat(5)).unwrap().0, 1);

        let (k, wit) = uniform_bound(&SNFSet::empty(2), &rat(1)).unwrap();
        assert_eq!(k, 0);
        assert!(wit.is_none());
    }

    #[test]
    fn uniform_bound_monotone_in_radius() {
        let x = cset("Int(t - a)", &["a", "t"]);
        let k1 = uniform_bound(&x, &rat(1)).unwrap().0;
        let k2 = uniform_bound(&x, &rat(2)).unwrap().0;
        let k3 = uniform_bound(&x, &rat(3)).unwrap().0;
        assert!(k1 <= k2 && k2 <= k3);
    }

    #[test]
    fn uniform_decomposition_parameterless() {
        let a = interval_set(&q(-1, 2), &q(1, 2));
        let u = uniform_decomposition(&[a.clone()], 0, 1, &rat(1)).unwrap();
        // (-1,-1/2), {-1/2}, (-1/2,1/2), {1/2}, (1/2,1).
        assert_eq!(u.pieces.len(), 5);
        let inside: Vec<&UniformPiece> =
            u.pieces.iter().filter(|p| p.sign[0]).collect();
        assert_eq!(inside.len(), 1);
        assert!(def_sets::equal(&inside[0].set, &a).unwrap());
        assert_eq!(inside[0].fiber_cell_type, vec![1]);
        let rep = verify_uniform_decomposition(&u, &[a], &[vec![]]).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn uniform_decomposition_halfplane() {
        let a = cset("x < b", &["b", "x"]);
        let u = uniform_decomposition(&[a.clone()], 1, 1, &rat(1)).unwrap();
        let samples: Vec<Vec<Rat>> = [q(-2, 1), q(-1, 1), q(0, 1), q(1, 3), q(1, 1), q(2, 1)]
            .into_iter()
            .map(|b| vec![b])
            .collect();
        let rep = verify_uniform_decomposition(&u, &[a.clone()], &samples).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        // Sampled fibers agree with the family member everywhere in the window.
        for b in &samples {
            for t in [q(-7, 8), q(-1, 3), q(0, 1), q(1, 3), q(7, 8)] {
                let point = [b[0].clone(), t.clone()];
                let covered = u
                    .pieces
                    .iter()
                    .filter(|p| p.set.member(&point))
                    .collect::<Vec<_>>();
                assert_eq!(covered.len(), 1, "point {point:?}");
                assert_eq!(covered[0].sign[0], a.member(&point));
            }
        }
    }

    #[test]
    fn uniform_decomposition_periodic_family() {
        let a = cset("Int(x - b)", &["b", "x"]);
        let u = uniform_decomposition(&[a.clone()], 1, 1, &rat(1)).unwrap();
        let (k, _) = uniform_bound(&a, &rat(1)).unwrap();
        // Piece count stays within the structural bound: for each stratum of
        // i section cells there are at most 2i+1 cells, each possibly split
        // in two by the sign map.
        assert!(u.pieces.len() <= (2 * k + 1) * 2 * (k + 1));
        let samples: Vec<Vec<Rat>> =
            [q(0, 1), q(1, 2), q(1, 3)].into_iter().map(|b| vec![b]).collect();
        let rep = verify_uniform_decomposition(&u, &[a], &samples).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn uniform_verification_negative_control() {
        let a = interval_set(&q(-1, 2), &q(1, 2));
        let mut u = uniform_decomposition(&[a.clone()], 0, 1, &rat(1)).unwrap();
        let idx = u.pieces.iter().position(|p| p.sign[0]).unwrap();
        u.pieces[idx].sign[0] = false;
        let rep = verify_uniform_decomposition(&u, &[a], &[]).unwrap();
        assert!(!rep.pass);
        assert!(rep.failures.iter().any(|f| f.contains("marked outside")));
    }

    #[test]
    fn uniform_decomposition_empty_family() {
        let u = uniform_decomposition(&[], 1, 1, &rat(1)).unwrap();
        assert_eq!(u.pieces.len(), 1);
        assert_eq!(u.pieces[0].fiber_cell_type, vec![1]);
        let rep =
            verify_uniform_decomposition(&u, &[], &[vec![rat(0)]]).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn window_bound_examples() {
        let z = cset("Int(x)", &["x"]);
        assert_eq!(window_component_bound(&z, &rat(3)).unwrap(), 6);

        let all = SNFSet::full(1);
        assert_eq!(window_component_bound(&all, &rat(2)).unwrap(), 1);

        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        assert_eq!(window_component_bound(&stair, &rat(1)).unwrap(), 3);
    }

    #[test]
    fn window_bound_brute_force_oracle() {
        // Components of x within b + (-1, 1) sampled over offsets never
        // exceed the reported bound, and some offset attains it.
        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let k = window_component_bound(&stair, &rat(1)).unwrap();
        let mut best = 0usize;
        for num in 0..16 {
            let b = q(num, 16);
            let lo = &b - rat(1);
            let hi = &b + rat(1);
            let form =
                def_sets::finite_union_in_interval(&stair, &lo, &hi).unwrap();
            let count = form.points.len() + form.intervals.len();
            assert!(count <= k, "offset {b} has {count} components");
            best = best.max(count);
        }
        assert_eq!(best, k);
    }
}

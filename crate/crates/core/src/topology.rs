//! Topological operators on definable sets: interior, closure, frontier,
//! dimension, restriction to bounded boxes, regular locus, and curve
//! selection.
//!
//! Closure is computed piecewise. For a piece L + F the translates k + F with
//! k ranging over the integer factor form a locally finite family, so the
//! closure of the union is the union of the translated closures. The closure
//! of the fractional factor inside the closed unit cube is obtained by linear
//! quantifier elimination of its epsilon-characterization, and the result is
//! re-split into half-open-cube pieces by a corner case split.

use crate::cell_decomp::{self, BoxN, CellError};
use crate::def_sets::{
    self, compile, difference, f_order, k_order, union, Piece, PresburgerSet, SNFSet,
    SemilinearSet, SetError,
};
use crate::lin_core::{rat, rat_ceil, rat_floor, Formula, Int, LinTerm, Rat, VarOrder};
use crate::qe_engine::{
    self, fm_feasible, nnf, qe_linear, simplify, to_dnf, Cons, Sort,
};
use itertools::Itertools;
use num_traits::One;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TopoError {
    #[error("point is not in the frontier of the set")]
    NotInFrontier,
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Cell(#[from] CellError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DimValue {
    NegInfinity,
    Finite(usize),
}

impl DimValue {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            DimValue::NegInfinity => None,
            DimValue::Finite(d) => Some(*d as i64),
        }
    }
}

// ---------------------------------------------------------------------------
// Closure / interior / frontier
// ---------------------------------------------------------------------------

/// Syntactic closure of a quantifier-free real body: in positive-literal
/// disjunctive normal form every feasible conjunct defines a nonempty convex
/// polyhedron, whose closure is exactly its weak (non-strict) relaxation.
/// With `vertical` set, only atoms mentioning the last variable are relaxed
/// and the conjunct's projection is added, which closes each fiber along the
/// last coordinate instead of the whole set. Returns None when the DNF cap
/// is exceeded.
fn relaxed_body(body: &Formula, n: usize, vertical: bool) -> Option<Formula> {
    use crate::lin_core::AtomKind;
    let fo = f_order(n);
    let dnf = to_dnf(&nnf(body))?;
    let last = format!("f{n}");
    let mut parts = Vec::new();
    for conj in dnf {
        // Split disequalities (negated Eq) into the two strict sides so every
        // conjunct is convex.
        let mut stack = vec![conj];
        let mut convex: Vec<Vec<qe_engine::Literal>> = Vec::new();
        while let Some(c) = stack.pop() {
            match c
                .iter()
                .position(|l| !l.positive && matches!(l.atom.kind, AtomKind::Eq))
            {
                None => convex.push(c),
                Some(i) => {
                    let t = c[i].atom.term.clone();
                    for side in [t.clone(), t.neg()] {
                        let mut d = c.clone();
                        d[i] = qe_engine::Literal {
                            positive: true,
                            atom: crate::lin_core::Atom {
                                kind: AtomKind::Lt,
                                term: side,
                            },
                        };
                        stack.push(d);
                    }
                }
            }
        }
        for c in convex {
            let mut cons = Vec::new();
            let mut ok = true;
            for l in &c {
                match (&l.atom.kind, l.positive) {
                    (AtomKind::Lt, true) => cons.push(Cons::Lt(l.atom.term.clone())),
                    (AtomKind::Lt, false) => cons.push(Cons::Le(l.atom.term.neg())),
                    (AtomKind::Eq, true) => cons.push(Cons::Eq(l.atom.term.clone())),
                    _ => {
                        ok = false; // fractional bodies are Int-free
                        break;
                    }
                }
            }
            if !ok {
                return None;
            }
            if !fm_feasible(&cons) {
                continue;
            }
            let mut lits = Vec::new();
            for l in &c {
                let strict = l.positive && matches!(l.atom.kind, AtomKind::Lt);
                if strict && (!vertical || l.atom.term.mentions(&last)) {
                    // Weak relaxation t <= 0 as the single literal not(-t < 0).
                    lits.push(Formula::not(Formula::lt(l.atom.term.neg(), &fo)));
                } else {
                    lits.push(l.formula());
                }
            }
            if vertical {
                let orig = Formula::and(c.iter().map(|l| l.formula()).collect());
                let proj = qe_linear(&Formula::exists(&last, orig), &fo).ok()?;
                lits.push(proj);
            }
            parts.push(Formula::and(lits));
        }
    }
    Some(simplify(&Formula::or(parts), &fo, Sort::Real))
}

/// Closure of a clamped fractional factor inside the closed unit cube,
/// computed by convex relaxation of the DNF conjuncts. Falls back to cell
/// decomposition when the body is too large to normalize.
fn fractional_closure_body(f: &SemilinearSet) -> Formula {
    match relaxed_body(&f.full_body(), f.arity, false) {
        Some(g) => g,
        None => fractional_closure_body_cells(f),
    }
}

/// Cell-decomposition fallback for the fractional closure: each cell is a
/// relatively open convex polyhedron, so the closure of the in-cell union is
/// the union of the weak cell formulas.
fn fractional_closure_body_cells(f: &SemilinearSet) -> Formula {
    let n = f.arity;
    let fo = f_order(n);
    let amb = fractional_ambient(f);
    let bbox: BoxN = (0..n).map(|_| (rat(-1), rat(2))).collect();
    let d = cell_decomp::decompose_box_cells_only(&bbox, &[amb]).expect("valid box");
    let parts: Vec<Formula> = d
        .cells()
        .iter()
        .zip(&d.labels[0])
        .filter(|(_, &inside)| inside)
        .map(|(c, _)| c.formula(true))
        .collect();
    let mut g = Formula::or(parts);
    for i in 1..=n {
        g = g.substitute(&format!("x{i}"), &LinTerm::var(&format!("f{i}")), &fo);
    }
    simplify(&g, &fo, Sort::Real)
}

/// Topological closure.
pub fn closure(x: &SNFSet) -> SNFSet {
    let n = x.arity;
    if n == 0 {
        return x.clone();
    }
    let ko = k_order(n);
    let fo = f_order(n);
    let mut pieces = Vec::new();
    for p in &x.pieces {
        let clf = fractional_closure_body(&p.fracs);
        // clf describes a subset of the closed cube; split by the set S of
        // coordinates sitting at 1 and shift those down into the integer
        // factor.
        for s_mask in 0u32..(1 << n) {
            let mut l = p.ints.body.clone();
            let mut f = clf.clone();
            for i in 1..=n {
                if s_mask & (1 << (i - 1)) != 0 {
                    let ki = format!("k{i}");
                    l = l.substitute(&ki, &LinTerm::var(&ki).add_constant(&rat(-1)), &ko);
                    let fi = format!("f{i}");
                    f = f.substitute(&fi, &LinTerm::var(&fi).add_constant(&rat(1)), &fo);
                    f = Formula::and(vec![
                        f,
                        Formula::eq(LinTerm::var(&fi), &fo),
                    ]);
                }
            }
            pieces.push(Piece {
                ints: PresburgerSet::new(n, simplify(&l, &ko, Sort::Integer)),
                fracs: SemilinearSet::new(n, simplify(&f, &fo, Sort::Real)),
            });
        }
    }
    union(&SNFSet::empty(n), &SNFSet { arity: n, pieces }).expect("same arity")
}

/// Closure of a clamped fractional factor along the last coordinate only:
/// convex relaxation restricted to last-variable atoms, with the cell route
/// (relaxing only the final band bound) as fallback.
fn vertical_closure_body(f: &SemilinearSet) -> Formula {
    match relaxed_body(&f.full_body(), f.arity, true) {
        Some(g) => g,
        None => vertical_closure_body_cells(f),
    }
}

fn vertical_closure_body_cells(f: &SemilinearSet) -> Formula {
    let n = f.arity;
    let fo = f_order(n);
    let amb = fractional_ambient(f);
    let bbox: BoxN = (0..n).map(|_| (rat(-1), rat(2))).collect();
    let d = cell_decomp::decompose_box_cells_only(&bbox, &[amb]).expect("valid box");
    let mut closed = vec![false; n];
    closed[n - 1] = true;
    let parts: Vec<Formula> = d
        .cells()
        .iter()
        .zip(&d.labels[0])
        .filter(|(_, &inside)| inside)
        .map(|(c, _)| c.formula_mixed(&closed))
        .collect();
    let mut g = Formula::or(parts);
    for i in 1..=n {
        g = g.substitute(&format!("x{i}"), &LinTerm::var(&format!("f{i}")), &fo);
    }
    simplify(&g, &fo, Sort::Real)
}

/// Closure along the last coordinate only: every fiber over the other
/// coordinates is replaced by its one-variable closure.
pub fn vertical_closure(x: &SNFSet) -> SNFSet {
    let n = x.arity;
    assert!(n >= 1, "vertical closure needs a last coordinate");
    let ko = k_order(n);
    let fo = f_order(n);
    let kn = format!("k{n}");
    let fn_ = format!("f{n}");
    let mut pieces = Vec::new();
    for p in &x.pieces {
        let clf = vertical_closure_body(&p.fracs);
        for shift in [false, true] {
            let mut l = p.ints.body.clone();
            let mut f = clf.clone();
            if shift {
                l = l.substitute(&kn, &LinTerm::var(&kn).add_constant(&rat(-1)), &ko);
                f = f.substitute(&fn_, &LinTerm::var(&fn_).add_constant(&rat(1)), &fo);
                f = Formula::and(vec![f, Formula::eq(LinTerm::var(&fn_), &fo)]);
            }
            pieces.push(Piece {
                ints: PresburgerSet::new(n, simplify(&l, &ko, Sort::Integer)),
                fracs: SemilinearSet::new(n, simplify(&f, &fo, Sort::Real)),
            });
        }
    }
    union(&SNFSet::empty(n), &SNFSet { arity: n, pieces }).expect("same arity")
}

/// Interior of each fiber along the last coordinate, by duality with the
/// vertical closure.
pub fn vertical_interior(x: &SNFSet) -> SNFSet {
    def_sets::complement(&vertical_closure(&def_sets::complement(x)))
}

/// Topological interior, by duality with closure.
pub fn interior(x: &SNFSet) -> SNFSet {
    def_sets::complement(&closure(&def_sets::complement(x)))
}

/// Frontier: closure minus the set itself.
pub fn frontier(x: &SNFSet) -> SNFSet {
    difference(&closure(x), x).expect("same arity")
}

// ---------------------------------------------------------------------------
// Dimension
// ---------------------------------------------------------------------------

/// Ambient rename of a clamped fractional factor (f-names to x-names).
fn fractional_ambient(f: &SemilinearSet) -> SemilinearSet {
    let n = f.arity;
    let o = VarOrder::numbered(n);
    let mut body = f.full_body();
    for i in 1..=n {
        body = body.substitute(&format!("f{i}"), &LinTerm::var(&format!("x{i}")), &o);
    }
    SemilinearSet::ambient(n, body)
}

/// Dimension: the maximum over pieces (with nonempty integer factor) of the
/// dimension of the fractional factor, which is computed by decomposing a
/// box around the unit cube into cells.
pub fn dimension(x: &SNFSet) -> DimValue {
    if x.arity == 0 {
        return if x.is_empty() {
            DimValue::NegInfinity
        } else {
            DimValue::Finite(0)
        };
    }
    let bbox: BoxN = (0..x.arity).map(|_| (rat(-1), rat(2))).collect();
    let mut best = DimValue::NegInfinity;
    for p in &x.pieces {
        if p.ints.is_empty() {
            continue;
        }
        let amb = fractional_ambient(&p.fracs);
        if let Some(d) =
            cell_decomp::semilinear_dim_in_box(&amb, &bbox).expect("valid box")
        {
            best = best.max(DimValue::Finite(d));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Bounded restriction
// ---------------------------------------------------------------------------

/// Int-free description of x inside the bounded open box, obtained by
/// enumerating the integer translates of the unit cube meeting the box.
pub fn bounded_reduct(x: &SNFSet, bbox: &BoxN) -> Result<SemilinearSet, SetError> {
    let n = x.arity;
    assert_eq!(bbox.len(), n, "box arity must match the set");
    let o = VarOrder::numbered(n);
    // Integer ranges: the cube k + [0,1)^n meets (lo, hi) iff k > lo - 1 and
    // k < hi coordinatewise.
    let ranges: Vec<Vec<Int>> = bbox
        .iter()
        .map(|(lo, hi)| {
            let a = rat_floor(&(lo.clone())) ; // k >= floor(lo) suffices: k > lo-1
            let b = rat_ceil(hi) - Int::one(); // k < hi
            let mut v = Vec::new();
            let mut k = a;
            while k <= b {
                v.push(k.clone());
                k += Int::one();
            }
            v
        })
        .collect();
    let mut parts = Vec::new();
    for p in &x.pieces {
        for combo in ranges.iter().multi_cartesian_product() {
            let kvec: Vec<Int> = combo.iter().map(|k| (*k).clone()).collect();
            if !p.ints.member(&kvec) {
                continue;
            }
            let mut body = p.fracs.full_body();
            for i in 1..=n {
                let repl = LinTerm::var(&format!("x{i}"))
                    .add_constant(&-Rat::from_integer(kvec[i - 1].clone()));
                body = body.substitute(&format!("f{i}"), &repl, &o);
            }
            parts.push(body);
        }
    }
    let body = simplify(&Formula::or(parts), &o, Sort::Real);
    Ok(SemilinearSet::ambient(n, body))
}

// ---------------------------------------------------------------------------
// Regular locus
// ---------------------------------------------------------------------------

/// Split x into its regular part (points near which the set is the graph of
/// a continuous function over some dim(x)-subset of coordinates) and the
/// rest.
///
/// For a coordinate subset I the failure points are exactly the p with
/// (p, p) in the closure of the pair set {(q, z): q in X, z in cl(X),
/// pi_I(q) = pi_I(z), q != z}: such pairs witness either a uniqueness
/// violation or a jump of the implicit function arbitrarily close to p.
pub fn regular_locus(x: &SNFSet) -> Result<(SNFSet, SNFSet), SetError> {
    let n = x.arity;
    let d = match dimension(x) {
        DimValue::NegInfinity => {
            return Ok((SNFSet::empty(n), SNFSet::empty(n)));
        }
        DimValue::Finite(d) => d,
    };
    let mut sing = x.clone();
    for subset in (1..=n).combinations(d) {
        let bad = irregular_for(x, &subset)?;
        sing = def_sets::intersect(&sing, &bad)?;
        if sing.is_empty() {
            break;
        }
    }
    let reg = difference(x, &sing)?;
    Ok((reg, sing))
}

/// Points of the ambient space near which x fails to be locally the graph of
/// a continuous function over the 1-based coordinate subset I: the points p
/// with (p, p) in the closure of the off-diagonal pair set of x and cl(x)
/// agreeing on I.
pub fn irregular_for(x: &SNFSet, subset: &[usize]) -> Result<SNFSet, SetError> {
    let n = x.arity;
    let clx = closure(x);
    let o2 = VarOrder::numbered(2 * n);
    let pairs_base = def_sets::product(x, &clx);
    let mut conds = Vec::new();
    for &i in subset {
        conds.push(Formula::eq(
            LinTerm::var(&format!("x{i}")).sub(&LinTerm::var(&format!("x{}", n + i))),
            &o2,
        ));
    }
    conds.push(Formula::or(
        (1..=n)
            .map(|i| {
                Formula::not(Formula::eq(
                    LinTerm::var(&format!("x{i}"))
                        .sub(&LinTerm::var(&format!("x{}", n + i))),
                    &o2,
                ))
            })
            .collect(),
    ));
    let cond_set = compile(&Formula::and(conds), &o2)?;
    let pairs = def_sets::intersect(&pairs_base, &cond_set)?;
    let cl_pairs = closure(&pairs);
    // Restrict to the diagonal and project to the first copy.
    let diag = compile(
        &Formula::and(
            (1..=n)
                .map(|i| {
                    Formula::eq(
                        LinTerm::var(&format!("x{i}"))
                            .sub(&LinTerm::var(&format!("x{}", n + i))),
                        &o2,
                    )
                })
                .collect(),
        ),
        &o2,
    )?;
    def_sets::project(&def_sets::intersect(&cl_pairs, &diag)?, n)
}

// ---------------------------------------------------------------------------
// Curve selection
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveGerm {
    pub base: Vec<Rat>,
    pub direction: Vec<Rat>,
    pub epsilon: Rat,
}

impl CurveGerm {
    pub fn at(&self, t: &Rat) -> Vec<Rat> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, d)| b + d * t)
            .collect()
    }
}

/// The open segment {a + t*dir : 0 < t < eps} as a definable set.
pub fn segment_set(a: &[Rat], dir: &[Rat], eps: &Rat) -> Result<SNFSet, SetError> {
    let n = a.len();
    let o = VarOrder::numbered(n);
    let (ot, t) = o.push_fresh("t");
    let mut conj = vec![
        Formula::lt(LinTerm::var(&t).neg(), &ot),
        Formula::lt(LinTerm::var(&t).add_constant(&-eps.clone()), &ot),
    ];
    for i in 1..=n {
        let rhs = LinTerm::var(&t)
            .scale(&dir[i - 1])
            .add_constant(&a[i - 1]);
        conj.push(Formula::eq(LinTerm::var(&format!("x{i}")).sub(&rhs), &ot));
    }
    let f = Formula::exists(&t, Formula::and(conj));
    compile(&f, &o)
}

/// A germ of a straight curve inside x approaching the frontier point a:
/// decompose x near a, pick the first cell whose closure contains a, and aim
/// at its sample point.
pub fn curve_select(x: &SNFSet, a: &[Rat]) -> Result<CurveGerm, TopoError> {
    let n = x.arity;
    assert_eq!(a.len(), n);
    if !frontier(x).member(a) {
        return Err(TopoError::NotInFrontier);
    }
    let half = Rat::new(Int::one(), Int::from(2));
    let bbox: BoxN = a
        .iter()
        .map(|c| (c - half.clone(), c + half.clone()))
        .collect();
    let (d, inset) = cell_decomp::decompose_for_set(x, &bbox)?;
    let o = VarOrder::numbered(n);
    let mut chosen = None;
    for (ci, c) in d.cells().iter().enumerate() {
        if !inset[ci] {
            continue;
        }
        let mut env = BTreeMap::new();
        for (i, v) in a.iter().enumerate() {
            env.insert(format!("x{}", i + 1), v.clone());
        }
        if c.formula(true).eval(&env).expect("quantifier-free") {
            chosen = Some(ci);
            break;
        }
    }
    let ci = chosen.expect("a is in the frontier, so some in-cell closure contains it");
    let sample = &d.cells()[ci].sample;
    let direction: Vec<Rat> = sample.iter().zip(a).map(|(s, b)| s - b).collect();
    assert!(
        direction.iter().any(|v| !num_traits::Zero::is_zero(v)),
        "frontier point cannot be the cell sample"
    );
    let mut eps = Rat::one();
    loop {
        let seg = segment_set(a, &direction, &eps)?;
        if def_sets::subset(&seg, x)? {
            let _ = &o;
            return Ok(CurveGerm {
                base: a.to_vec(),
                direction,
                epsilon: eps,
            });
        }
        eps /= rat(2);
        assert!(
            eps.denom() < &Int::from(1u64 << 40),
            "curve selection failed to shrink into the set"
        );
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin_core::parse_formula;

    fn cset(text: &str, names: &[&str]) -> SNFSet {
        let o = VarOrder::new(names.to_vec());
        compile(&parse_formula(text, &o).unwrap(), &o).unwrap()
    }

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn closure_of_open_interval() {
        let x = cset("0 < x and x < 1", &["x"]);
        let cl = closure(&x);
        let closed = cset("not (x < 0) and not (1 < x)", &["x"]);
        assert!(def_sets::equal(&cl, &closed).unwrap());
    }

    #[test]
    fn interior_of_closed_interval() {
        let x = cset("not (x < 0) and not (1 < x)", &["x"]);
        let int = interior(&x);
        let open = cset("0 < x and x < 1", &["x"]);
        assert!(def_sets::equal(&int, &open).unwrap());
    }

    #[test]
    fn frontier_of_staircase() {
        let x = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let fr = frontier(&x);
        let expected = cset("Int(x) or Int(x - 1/2)", &["x"]);
        assert!(def_sets::equal(&fr, &expected).unwrap());
        // Sampling near seams.
        for (p, inside) in [
            (q(0, 1), true),
            (q(1, 2), true),
            (q(1, 4), false),
            (q(3, 4), false),
            (q(-1, 2), true),
        ] {
            assert_eq!(fr.member(&[p.clone()]), inside, "{p}");
        }
    }

    #[test]
    fn closure_of_z_is_z() {
        let z = cset("Int(x)", &["x"]);
        assert!(def_sets::equal(&closure(&z), &z).unwrap());
        assert!(interior(&z).is_empty());
    }

    #[test]
    fn duality_and_idempotence() {
        for x in [
            cset("0 < x and x < 1", &["x"]),
            cset("Int(x) or (0 < x and x < 1/2)", &["x"]),
            cset("x < y and Int(x)", &["x", "y"]),
        ] {
            let cl = closure(&x);
            let dual = def_sets::complement(&interior(&def_sets::complement(&x)));
            assert!(def_sets::equal(&cl, &dual).unwrap());
            assert!(def_sets::equal(&closure(&cl), &cl).unwrap());
            let int = interior(&x);
            assert!(def_sets::equal(&interior(&int), &int).unwrap());
            assert!(def_sets::subset(&int, &x).unwrap());
            assert!(def_sets::subset(&x, &cl).unwrap());
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(&SNFSet::empty(2)), DimValue::NegInfinity);
        assert_eq!(dimension(&cset("Int(x)", &["x"])), DimValue::Finite(0));
        assert_eq!(
            dimension(&cset("x + y = 0", &["x", "y"])),
            DimValue::Finite(1)
        );
        // Union of vertical unit sticks on integers and a horizontal side.
        let sticks = cset(
            "(Int(x) and 0 < y and y < 1) or (0 < x and x < 1 and y = 0)",
            &["x", "y"],
        );
        assert_eq!(dimension(&sticks), DimValue::Finite(1));
        assert_eq!(dimension(&SNFSet::full(2)), DimValue::Finite(2));
    }

    #[test]
    fn dimension_laws_spot() {
        let a = cset("Int(x)", &["x"]);
        let b = cset("0 < x and x < 1", &["x"]);
        let ab = def_sets::union(&a, &b).unwrap();
        assert_eq!(dimension(&ab), DimValue::Finite(1));
        let prod = def_sets::product(&a, &b);
        assert_eq!(dimension(&prod), DimValue::Finite(1));
    }

    #[test]
    fn bounded_reduct_examples() {
        let z = cset("Int(x)", &["x"]);
        let r = bounded_reduct(&z, &vec![(q(-5, 2), q(5, 2))]).unwrap();
        assert!(!r.body.atoms().iter().any(|a| matches!(
            a.kind,
            crate::lin_core::AtomKind::IsInt | crate::lin_core::AtomKind::Divides(_)
        )));
        for k in -2..=2 {
            assert!(r.member(&[rat(k)]));
        }
        assert!(!r.member(&[q(1, 2)]));

        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let r = bounded_reduct(&stair, &vec![(rat(0), rat(2))]).unwrap();
        for (p, inside) in [
            (q(1, 4), true),
            (q(3, 4), false),
            (q(5, 4), true),
            (q(7, 4), false),
        ] {
            assert_eq!(r.member(&[p.clone()]), inside, "{p}");
        }

        let i01 = cset("0 < x and x < 1", &["x"]);
        let r = bounded_reduct(&i01, &vec![(rat(-2), rat(2))]).unwrap();
        assert!(r.member(&[q(1, 2)]));
        assert!(!r.member(&[q(3, 2)]));
    }

    #[test]
    fn reduct_matches_set_in_box() {
        let sets = [
            cset("Int(2*x)", &["x"]),
            cset("Int(x - y) and x < y + 1/2", &["x", "y"]),
        ];
        for x in sets {
            let bbox: BoxN = (0..x.arity).map(|_| (q(-3, 2), q(3, 2))).collect();
            let r = bounded_reduct(&x, &bbox).unwrap();
            // Sample grid comparison inside the box.
            let axis: Vec<Rat> = (-5..=5).map(|i| q(i, 4)).collect();
            let mut pts = vec![vec![]];
            for _ in 0..x.arity {
                let mut next = Vec::new();
                for p in &pts {
                    for a in &axis {
                        let mut v: Vec<Rat> = p.clone();
                        v.push(a.clone());
                        next.push(v);
                    }
                }
                pts = next;
            }
            for p in pts {
                assert_eq!(r.member(&p), x.member(&p), "{p:?}");
            }
        }
    }

    #[test]
    fn regular_locus_examples() {
        // Diagonal line: everywhere regular.
        let diag = cset("y = x", &["x", "y"]);
        let (reg, sing) = regular_locus(&diag).unwrap();
        assert!(def_sets::equal(&reg, &diag).unwrap());
        assert!(sing.is_empty());

        // Two open segments meeting only at a missing corner: regular.
        let open_l = cset(
            "(0 < x and x < 1 and y = 0) or (x = 0 and 0 < y and y < 1)",
            &["x", "y"],
        );
        let (reg, sing) = regular_locus(&open_l).unwrap();
        assert!(def_sets::equal(&reg, &open_l).unwrap());
        assert!(sing.is_empty());

        // Full axis cross: the origin is singular.
        let cross = cset("y = 0 or x = 0", &["x", "y"]);
        let (_reg, sing) = regular_locus(&cross).unwrap();
        let origin = cset("x = 0 and y = 0", &["x", "y"]);
        assert!(def_sets::equal(&sing, &origin).unwrap());
    }

    #[test]
    fn curve_select_examples() {
        // Unit square from its corner.
        let sq = cset("0 < x and x < 1 and 0 < y and y < 1", &["x", "y"]);
        let g = curve_select(&sq, &[rat(0), rat(0)]).unwrap();
        let seg = segment_set(&g.base, &g.direction, &g.epsilon).unwrap();
        assert!(def_sets::subset(&seg, &sq).unwrap());

        // Interval from its right endpoint.
        let i01 = cset("0 < x and x < 1", &["x"]);
        let g = curve_select(&i01, &[rat(1)]).unwrap();
        assert!(g.direction[0] < rat(0));
        let seg = segment_set(&g.base, &g.direction, &g.epsilon).unwrap();
        assert!(def_sets::subset(&seg, &i01).unwrap());

        // Staircase from the integer 2.
        let stair = cset("exists y. Int(y) and y < x and x < y + 1/2", &["x"]);
        let g = curve_select(&stair, &[rat(2)]).unwrap();
        assert!(g.direction[0] > rat(0));
        let seg = segment_set(&g.base, &g.direction, &g.epsilon).unwrap();
        assert!(def_sets::subset(&seg, &stair).unwrap());

        // Error case: not a frontier point.
        let mid = curve_select(&i01, &[q(1, 2)]);
        assert_eq!(mid.unwrap_err(), TopoError::NotInFrontier);
    }

    #[test]
    fn frontier_dimension_drops() {
        for x in [
            cset("0 < x and x < 1", &["x"]),
            cset("0 < x and x < 1 and 0 < y and y < 1", &["x", "y"]),
            cset("exists u. Int(u) and u < x and x < u + 1/2", &["x"]),
        ] {
            let dx = dimension(&x);
            let df = dimension(&frontier(&x));
            assert!(df < dx, "{df:?} vs {dx:?}");
            assert_eq!(dimension(&closure(&x)), dx);
        }
    }
}

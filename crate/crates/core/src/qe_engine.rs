//! Quantifier elimination kernels.
//!
//! Two eliminators share the Formula AST: a dense-linear-order eliminator for
//! Int-free formulas over the reals (virtual substitution with test points)
//! and a Cooper-style eliminator for the pure integer fragment (with Div
//! atoms). Satisfiability and entailment, including witness extraction, are
//! built on top.

use crate::lin_core::{
    fresh_name, rat, rat_ceil, rat_floor, Atom, AtomKind, EvalError, Formula, Int, LinTerm, Rat,
    VarOrder,
};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QeError {
    #[error("Int atom not allowed in linear elimination")]
    IntAtom,
    #[error("Div atom not allowed in linear elimination")]
    DividesAtom,
    #[error("non-integral coefficient in integer elimination: {0}")]
    NonIntegral(String),
    #[error("mixed integer and real atoms; compile through split normal form first")]
    MixedSorts,
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
}

/// Which elimination theory a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Real,
    Integer,
}

// ---------------------------------------------------------------------------
// Literals and negation normal form
// ---------------------------------------------------------------------------

/// A literal: an atom or its negation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn formula(&self) -> Formula {
        let f = Formula::Atom(self.atom.clone());
        if self.positive {
            f
        } else {
            Formula::not(f)
        }
    }
}

/// Push negations to the atoms, keeping them as signed literals, and expand
/// implications. The result uses only And/Or over literals.
pub fn nnf(f: &Formula) -> Formula {
    fn go(f: &Formula, pos: bool) -> Formula {
        match f {
            Formula::True => Formula::from_bool(pos),
            Formula::False => Formula::from_bool(!pos),
            Formula::Atom(a) => {
                let at = Formula::Atom(a.clone());
                if pos {
                    at
                } else {
                    Formula::Not(Box::new(at))
                }
            }
            Formula::Not(g) => go(g, !pos),
            Formula::And(xs) => {
                let parts = xs.iter().map(|x| go(x, pos)).collect();
                if pos {
                    Formula::and(parts)
                } else {
                    Formula::or(parts)
                }
            }
            Formula::Or(xs) => {
                let parts = xs.iter().map(|x| go(x, pos)).collect();
                if pos {
                    Formula::or(parts)
                } else {
                    Formula::and(parts)
                }
            }
            Formula::Implies(a, b) => {
                if pos {
                    Formula::or(vec![go(a, false), go(b, true)])
                } else {
                    Formula::and(vec![go(a, true), go(b, false)])
                }
            }
            Formula::Exists(v, g) => {
                if pos {
                    Formula::exists(v, go(g, true))
                } else {
                    Formula::forall(v, go(g, false))
                }
            }
            Formula::Forall(v, g) => {
                if pos {
                    Formula::forall(v, go(g, true))
                } else {
                    Formula::exists(v, go(g, false))
                }
            }
        }
    }
    go(f, true)
}

/// Expand negated order atoms into positive ones. Over the reals:
/// not(t<0) = (-t<0 or t=0), not(t=0) = (t<0 or -t<0). Over the integers:
/// not(t<0) = (-t-1<0), not(t=0) = (t<0 or -t<0). Negated Div atoms are kept
/// as literals (Cooper handles them directly).
pub fn expand_negations(f: &Formula, order: &VarOrder, sort: Sort) -> Formula {
    match f {
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => match &a.kind {
                AtomKind::Lt => match sort {
                    Sort::Real => Formula::or(vec![
                        Formula::lt(a.term.neg(), order),
                        Formula::eq(a.term.clone(), order),
                    ]),
                    Sort::Integer => ge_zero_int(&a.term, order),
                },
                AtomKind::Eq => Formula::or(vec![
                    Formula::lt(a.term.clone(), order),
                    Formula::lt(a.term.neg(), order),
                ]),
                _ => f.clone(),
            },
            _ => f.clone(),
        },
        Formula::And(xs) => Formula::and(
            xs.iter()
                .map(|x| expand_negations(x, order, sort))
                .collect(),
        ),
        Formula::Or(xs) => Formula::or(
            xs.iter()
                .map(|x| expand_negations(x, order, sort))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// t >= 0 over integer-valued variables, as a strict inequality. The term
/// may have a non-integral constant: scale the variable part integral, split
/// t = s + c, and round: s + c >= 0 iff s >= ceil(-c) iff
/// ceil(-c) - 1 - s < 0.
fn ge_zero_int(t: &LinTerm, order: &VarOrder) -> Formula {
    let mut d = Int::one();
    for c in t.coeffs().values() {
        d = num_integer::lcm(d, c.denom().clone());
    }
    let scaled = t.scale(&Rat::from_integer(d));
    let c = scaled.constant_part().clone();
    let s = scaled.add_constant(&-c.clone());
    let bound = Rat::from_integer(rat_ceil(&-c)) + rat(-1);
    Formula::lt(s.neg().add(&LinTerm::constant(bound)), order)
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin feasibility for conjunctions of rational linear constraints
// ---------------------------------------------------------------------------

/// A single constraint: term < 0, term <= 0, or term = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cons {
    Lt(LinTerm),
    Le(LinTerm),
    Eq(LinTerm),
}

impl Cons {
    fn term(&self) -> &LinTerm {
        match self {
            Cons::Lt(t) | Cons::Le(t) | Cons::Eq(t) => t,
        }
    }
}

/// Exact feasibility over the rationals of a conjunction of constraints.
pub fn fm_feasible(cons: &[Cons]) -> bool {
    let mut cons: Vec<Cons> = cons.to_vec();
    loop {
        // Constant constraints are decided; pick the next variable otherwise.
        let mut var: Option<String> = None;
        for c in &cons {
            if let Some(v) = c.term().vars().next() {
                var = Some(v.clone());
                break;
            }
        }
        let v = match var {
            Some(v) => v,
            None => {
                return cons.iter().all(|c| match c {
                    Cons::Lt(t) => t.constant_part().is_negative(),
                    Cons::Le(t) => !t.constant_part().is_positive(),
                    Cons::Eq(t) => t.constant_part().is_zero(),
                })
            }
        };
        // Use an equality to substitute if one mentions v.
        if let Some(idx) = cons.iter().position(|c| {
            matches!(c, Cons::Eq(t) if t.mentions(&v))
        }) {
            let eq = match cons.swap_remove(idx) {
                Cons::Eq(t) => t,
                _ => unreachable!(),
            };
            let a = eq.coeff(&v);
            // v = -(eq - a v)/a
            let mut rest = eq.clone();
            rest.set_coeff(&v, Rat::zero());
            let repl = rest.scale(&(-Rat::one() / a));
            cons = cons
                .into_iter()
                .map(|c| match c {
                    Cons::Lt(t) => Cons::Lt(t.subst(&v, &repl)),
                    Cons::Le(t) => Cons::Le(t.subst(&v, &repl)),
                    Cons::Eq(t) => Cons::Eq(t.subst(&v, &repl)),
                })
                .collect();
            continue;
        }
        // Split into lower bounds (coeff < 0), upper bounds (coeff > 0) and
        // the rest.
        let mut lowers: Vec<(bool, LinTerm)> = Vec::new();
        let mut uppers: Vec<(bool, LinTerm)> = Vec::new();
        let mut rest: Vec<Cons> = Vec::new();
        for c in cons {
            let a = c.term().coeff(&v);
            if a.is_zero() {
                rest.push(c);
                continue;
            }
            let strict = matches!(c, Cons::Lt(_));
            let t = c.term().clone();
            if a.is_positive() {
                uppers.push((strict, t));
            } else {
                lowers.push((strict, t));
            }
        }
        for (ls, lt) in &lowers {
            for (us, ut) in &uppers {
                let la = lt.coeff(&v); // negative
                let ua = ut.coeff(&v); // positive
                // (-la) * upper + ua * lower eliminates v.
                let comb = ut.scale(&-la.clone()).add(&lt.scale(&ua));
                debug_assert!(comb.coeff(&v).is_zero());
                if *ls || *us {
                    rest.push(Cons::Lt(comb));
                } else {
                    rest.push(Cons::Le(comb));
                }
            }
        }
        cons = rest;
    }
}

/// Convert a literal to relaxation constraints for feasibility checking.
/// Negated Eq and all Div atoms contribute nothing (sound over-approximation:
/// feasibility is only used to prune definitely empty conjunctions).
fn literal_cons(l: &Literal, sort: Sort) -> Vec<Cons> {
    match (&l.atom.kind, l.positive) {
        (AtomKind::Lt, true) => vec![Cons::Lt(l.atom.term.clone())],
        (AtomKind::Lt, false) => vec![Cons::Le(l.atom.term.neg())],
        (AtomKind::Eq, true) => vec![Cons::Eq(l.atom.term.clone())],
        (AtomKind::Eq, false) => vec![],
        (AtomKind::IsInt, _) | (AtomKind::Divides(_), _) => {
            let _ = sort;
            vec![]
        }
    }
}

// ---------------------------------------------------------------------------
// DNF with pruning: the simplification pass
// ---------------------------------------------------------------------------

const DNF_CAP: usize = 4096;

/// DNF of a quantifier-free formula as literal conjunctions; None if the cap
/// is exceeded.
pub fn to_dnf(f: &Formula) -> Option<Vec<Vec<Literal>>> {
    fn go(f: &Formula, pos: bool) -> Option<Vec<Vec<Literal>>> {
        match f {
            Formula::True => Some(if pos { vec![vec![]] } else { vec![] }),
            Formula::False => Some(if pos { vec![] } else { vec![vec![]] }),
            Formula::Atom(a) => Some(vec![vec![Literal {
                positive: pos,
                atom: a.clone(),
            }]]),
            Formula::Not(g) => go(g, !pos),
            Formula::Implies(a, b) => {
                let rewritten = Formula::Or(vec![
                    Formula::not((**a).clone()),
                    (**b).clone(),
                ]);
                go(&rewritten, pos)
            }
            Formula::And(xs) if pos => conj(xs, true),
            Formula::Or(xs) if !pos => conj(xs, false),
            Formula::And(xs) => disj(xs, false),
            Formula::Or(xs) => disj(xs, true),
            Formula::Exists(..) | Formula::Forall(..) => None,
        }
    }
    fn disj(xs: &[Formula], pos: bool) -> Option<Vec<Vec<Literal>>> {
        let mut out = Vec::new();
        for x in xs {
            out.extend(go(x, pos)?);
            if out.len() > DNF_CAP {
                return None;
            }
        }
        Some(out)
    }
    fn conj(xs: &[Formula], pos: bool) -> Option<Vec<Vec<Literal>>> {
        let mut acc: Vec<Vec<Literal>> = vec![vec![]];
        for x in xs {
            let d = go(x, pos)?;
            let mut next = Vec::new();
            for a in &acc {
                for b in &d {
                    let mut c = a.clone();
                    for l in b {
                        if !c.contains(l) {
                            c.push(l.clone());
                        }
                    }
                    next.push(c);
                    if next.len() > DNF_CAP {
                        return None;
                    }
                }
            }
            acc = next;
        }
        Some(acc)
    }
    go(f, true)
}

/// DNF with inline feasibility pruning: infeasible conjuncts are dropped as
/// soon as they appear, so intermediate sizes track the set's real region
/// count instead of the syntactic product. None if the pruned size still
/// exceeds the cap.
/// Outcome of canonicalizing a single literal over the integers.
enum CanonLit {
    Lit(Literal),
    True,
    False,
}

/// Canonical form of a literal over integer-valued variables: coefficients
/// are scaled integral and divided by their gcd, rational bounds are
/// tightened to the nearest integer, and negated inequalities become
/// positive ones. Equivalent constraints written with different rational
/// slack (such as k > -23/16 and k > -11/8) share one canonical form, which
/// lets later syntactic dedup and coalescing see through them.
fn int_canonical_literal(l: &Literal) -> CanonLit {
    let t = &l.atom.term;
    match (&l.atom.kind, l.positive) {
        (AtomKind::Lt, pos) => {
            // pos: t < 0; neg: -t <= 0.
            let u = if pos { t.clone() } else { t.neg() };
            if u.is_constant() {
                let c = u.constant_part();
                let holds = if pos { c < &rat(0) } else { c <= &rat(0) };
                return if holds { CanonLit::True } else { CanonLit::False };
            }
            let mut d = Int::one();
            for c in u.coeffs().values() {
                d = num_integer::lcm(d, c.denom().clone());
            }
            let scaled = u.scale(&Rat::from_integer(d));
            let c = scaled.constant_part().clone();
            let s = scaled.add_constant(&-c.clone());
            let mut g = Int::zero();
            for q in s.coeffs().values() {
                g = num_integer::gcd(g, q.numer().clone());
            }
            let gq = Rat::from_integer(g);
            let s = s.scale(&(Rat::one() / &gq));
            let b = (-c) / &gq;
            // s < b tightens to s <= ceil(b) - 1; s <= b to s <= floor(b).
            let cap = if pos { rat_ceil(&b) - Int::one() } else { rat_floor(&b) };
            let term = s.add_constant(&(-Rat::from_integer(cap) - Rat::one()));
            CanonLit::Lit(Literal {
                positive: true,
                atom: Atom {
                    kind: AtomKind::Lt,
                    term,
                },
            })
        }
        (AtomKind::Eq, pos) => {
            if t.is_constant() {
                let holds = t.constant_part().is_zero() == pos;
                return if holds { CanonLit::True } else { CanonLit::False };
            }
            let mut d = Int::one();
            for c in t.coeffs().values() {
                d = num_integer::lcm(d, c.denom().clone());
            }
            let scaled = t.scale(&Rat::from_integer(d));
            let mut g = Int::zero();
            for q in scaled.coeffs().values() {
                g = num_integer::gcd(g, q.numer().clone());
            }
            let gq = Rat::from_integer(g.clone());
            let c = scaled.constant_part() / &gq;
            if !c.is_integer() {
                // An integer combination can never equal a fractional value.
                return if pos { CanonLit::False } else { CanonLit::True };
            }
            let mut s = scaled.scale(&(Rat::one() / &gq));
            // Sign convention: the first coefficient is positive.
            if let Some(q) = s.coeffs().values().next() {
                if q.is_negative() {
                    s = s.neg();
                }
            }
            CanonLit::Lit(Literal {
                positive: pos,
                atom: Atom {
                    kind: AtomKind::Eq,
                    term: s,
                },
            })
        }
        _ => CanonLit::Lit(l.clone()),
    }
}

fn to_dnf_pruned(f: &Formula, sort: Sort, assume: &[Cons]) -> Option<Vec<Vec<Literal>>> {
    fn keep(c: Vec<Literal>, sort: Sort, assume: &[Cons]) -> Option<Vec<Literal>> {
        let mut out = Vec::with_capacity(c.len());
        for l in c {
            if sort == Sort::Integer {
                match int_canonical_literal(&l) {
                    CanonLit::Lit(l) => out.push(l),
                    CanonLit::True => {}
                    CanonLit::False => return None,
                }
            } else {
                out.push(l);
            }
        }
        let mut c = out;
        c.sort();
        c.dedup();
        if conjunct_contradictory_rel(&c, sort, assume) {
            None
        } else {
            Some(c)
        }
    }
    fn go(f: &Formula, pos: bool, sort: Sort, assume: &[Cons]) -> Option<Vec<Vec<Literal>>> {
        match f {
            Formula::True => Some(if pos { vec![vec![]] } else { vec![] }),
            Formula::False => Some(if pos { vec![] } else { vec![vec![]] }),
            Formula::Atom(a) => Some(vec![vec![Literal {
                positive: pos,
                atom: a.clone(),
            }]]),
            Formula::Not(g) => go(g, !pos, sort, assume),
            Formula::Implies(a, b) => {
                let rewritten =
                    Formula::Or(vec![Formula::not((**a).clone()), (**b).clone()]);
                go(&rewritten, pos, sort, assume)
            }
            Formula::And(xs) if pos => conj(xs, true, sort, assume),
            Formula::Or(xs) if !pos => conj(xs, false, sort, assume),
            Formula::And(xs) => disj(xs, false, sort, assume),
            Formula::Or(xs) => disj(xs, true, sort, assume),
            Formula::Exists(..) | Formula::Forall(..) => None,
        }
    }
    fn disj(
        xs: &[Formula],
        pos: bool,
        sort: Sort,
        assume: &[Cons],
    ) -> Option<Vec<Vec<Literal>>> {
        let mut out = Vec::new();
        for x in xs {
            out.extend(go(x, pos, sort, assume)?);
            if out.len() > DNF_CAP {
                return None;
            }
        }
        Some(out)
    }
    fn conj(
        xs: &[Formula],
        pos: bool,
        sort: Sort,
        assume: &[Cons],
    ) -> Option<Vec<Vec<Literal>>> {
        let mut acc: Vec<Vec<Literal>> = vec![vec![]];
        for x in xs {
            let d = go(x, pos, sort, assume)?;
            let mut next = Vec::new();
            for a in &acc {
                for b in &d {
                    let mut c = a.clone();
                    for l in b {
                        if !c.contains(l) {
                            c.push(l.clone());
                        }
                    }
                    if let Some(c) = keep(c, sort, assume) {
                        next.push(c);
                        if next.len() > DNF_CAP {
                            return None;
                        }
                    }
                }
            }
            acc = next;
        }
        Some(acc)
    }
    go(f, true, sort, assume)
}

/// Constraints expressing the negation of a literal, when the negation is
/// convex. Used for redundancy tests.
fn neg_cons(l: &Literal) -> Option<Cons> {
    match (&l.atom.kind, l.positive) {
        (AtomKind::Lt, true) => Some(Cons::Le(l.atom.term.neg())),
        (AtomKind::Lt, false) => Some(Cons::Lt(l.atom.term.clone())),
        (AtomKind::Eq, false) => Some(Cons::Eq(l.atom.term.clone())),
        _ => None,
    }
}

/// True if the literal conjunction is syntactically or linearly contradictory
/// under the assumed constraints.
fn conjunct_contradictory_rel(lits: &[Literal], sort: Sort, assume: &[Cons]) -> bool {
    for (i, a) in lits.iter().enumerate() {
        for b in &lits[i + 1..] {
            if a.atom == b.atom && a.positive != b.positive {
                return true;
            }
        }
    }
    let mut cons = assume.to_vec();
    for l in lits {
        cons.extend(literal_cons(l, sort));
    }
    !fm_feasible(&cons)
}

/// Simplify a quantifier-free formula: structural cleanup plus DNF-based
/// pruning of contradictory conjuncts and subsumed disjuncts. Falls back to
/// the structural form when the DNF would be too large.
pub fn simplify(f: &Formula, order: &VarOrder, sort: Sort) -> Formula {
    simplify_rel(f, order, sort, &[])
}

/// Simplify relative to assumed background constraints (for example a
/// bounding cube the formula will only ever be evaluated in): conjuncts
/// infeasible under the assumptions are dropped, and literals entailed by
/// the assumptions together with the rest of their conjunct are removed.
/// The result is equivalent to the input only where the assumptions hold.
pub fn simplify_rel(
    f: &Formula,
    order: &VarOrder,
    sort: Sort,
    assume: &[Cons],
) -> Formula {
    let f = structural(f);
    if f.has_quantifier() {
        return f;
    }
    let dnf = match to_dnf_pruned(&f, sort, assume) {
        Some(d) => d,
        None => return f,
    };
    let mut kept: Vec<Vec<Literal>> = Vec::new();
    'outer: for mut c in dnf {
        if !assume.is_empty() {
            // Drop literals entailed by the assumptions plus the rest.
            let mut i = 0;
            while i < c.len() {
                let l = c.remove(i);
                let redundant = match neg_cons(&l) {
                    Some(nc) => {
                        let mut cons = assume.to_vec();
                        for r in &c {
                            cons.extend(literal_cons(r, sort));
                        }
                        cons.push(nc);
                        !fm_feasible(&cons)
                    }
                    None => false,
                };
                if !redundant {
                    c.insert(i, l);
                    i += 1;
                }
            }
        }
        // Subsumption in both directions.
        let mut i = 0;
        while i < kept.len() {
            let k = &kept[i];
            if k.iter().all(|l| c.contains(l)) {
                continue 'outer; // an existing disjunct is weaker
            }
            if c.iter().all(|l| k.contains(l)) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        kept.push(c);
    }
    if kept.is_empty() {
        return Formula::False;
    }
    if kept.iter().any(|c| c.is_empty()) {
        return Formula::True;
    }
    kept.sort();
    let g = Formula::or(
        kept.into_iter()
            .map(|c| Formula::and(c.into_iter().map(|l| l.formula()).collect()))
            .collect(),
    );
    // Canonical interval form for one-variable Int-free formulas.
    if sort == Sort::Real && !g.has_int_atoms() {
        let fv = g.free_vars();
        if fv.len() == 1 {
            let v = fv.iter().next().unwrap().clone();
            if let Some(h) = canonical_one_var(&g, &v, order) {
                return h;
            }
        }
    }
    g
}

fn structural(f: &Formula) -> Formula {
    match f {
        Formula::Not(g) => Formula::not(structural(g)),
        Formula::And(xs) => Formula::and(xs.iter().map(structural).collect()),
        Formula::Or(xs) => Formula::or(xs.iter().map(structural).collect()),
        Formula::Implies(a, b) => Formula::implies(structural(a), structural(b)),
        Formula::Exists(v, g) => Formula::exists(v, structural(g)),
        Formula::Forall(v, g) => Formula::forall(v, structural(g)),
        other => other.clone(),
    }
}

/// Rewrite a one-variable Int-free quantifier-free formula as a canonical
/// union of points and intervals (merged and sorted). Returns None if the
/// formula contains non-constant multi-variable structure.
pub fn canonical_one_var(f: &Formula, v: &str, order: &VarOrder) -> Option<Formula> {
    let mut roots: Vec<Rat> = Vec::new();
    for a in f.atoms() {
        match a.kind {
            AtomKind::Lt | AtomKind::Eq => {}
            _ => return None,
        }
        let c = a.term.coeff(v);
        if a.term.vars().any(|w| w != v) {
            return None;
        }
        if !c.is_zero() {
            let r = -a.term.constant_part() / c;
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    roots.sort();
    let eval_at = |x: &Rat| -> bool {
        let mut p = BTreeMap::new();
        p.insert(v.to_string(), x.clone());
        f.eval(&p).unwrap_or(false)
    };
    // Regions: (-inf, r0), {r0}, (r0, r1), ..., {rk}, (rk, inf).
    #[derive(Clone)]
    struct Region {
        lo: Option<Rat>,
        hi: Option<Rat>,
        point: bool,
        inside: bool,
    }
    let mut regions: Vec<Region> = Vec::new();
    if roots.is_empty() {
        let inside = eval_at(&rat(0));
        return Some(Formula::from_bool(inside));
    }
    for (i, r) in roots.iter().enumerate() {
        let lo_sample = if i == 0 {
            r - rat(1)
        } else {
            (&roots[i - 1] + r) / rat(2)
        };
        regions.push(Region {
            lo: if i == 0 {
                None
            } else {
                Some(roots[i - 1].clone())
            },
            hi: Some(r.clone()),
            point: false,
            inside: eval_at(&lo_sample),
        });
        regions.push(Region {
            lo: Some(r.clone()),
            hi: Some(r.clone()),
            point: true,
            inside: eval_at(r),
        });
    }
    let last = roots.last().unwrap().clone();
    regions.push(Region {
        lo: Some(last.clone()),
        hi: None,
        point: false,
        inside: eval_at(&(last + rat(1))),
    });
    // Merge adjacent inside regions into maximal intervals.
    let mut parts: Vec<Formula> = Vec::new();
    let var = LinTerm::var(v);
    let mut i = 0;
    while i < regions.len() {
        if !regions[i].inside {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < regions.len() && regions[j + 1].inside {
            j += 1;
        }
        let lo = regions[i].lo.clone();
        let hi = regions[j].hi.clone();
        let lo_closed = regions[i].point
            || (i > 0 && regions[i].lo.is_some() && regions[i].point);
        let hi_closed = regions[j].point;
        // Closedness of the merged run's endpoints: the run starts closed
        // exactly when its first region is a point region.
        let lo_closed = lo_closed || regions[i].point;
        if regions[i].point && i == j {
            parts.push(Formula::eq(
                var.sub(&LinTerm::constant(regions[i].lo.clone().unwrap())),
                order,
            ));
            i = j + 1;
            continue;
        }
        let mut conj = Vec::new();
        if let Some(l) = lo {
            let t = LinTerm::constant(l).sub(&var); // l - v < 0 or <= 0
            if lo_closed {
                conj.push(Formula::not(Formula::lt(t.neg(), order)));
            } else {
                conj.push(Formula::lt(t, order));
            }
        }
        if let Some(h) = hi {
            let t = var.sub(&LinTerm::constant(h)); // v - h < 0 or <= 0
            if hi_closed {
                conj.push(Formula::not(Formula::lt(t.neg(), order)));
            } else {
                conj.push(Formula::lt(t, order));
            }
        }
        parts.push(Formula::and(conj));
        i = j + 1;
    }
    Some(Formula::or(parts))
}

// ---------------------------------------------------------------------------
// Linear (real) elimination by virtual substitution
// ---------------------------------------------------------------------------

/// Eliminate all quantifiers from an Int-free formula over the reals.
pub fn qe_linear(f: &Formula, order: &VarOrder) -> Result<Formula, QeError> {
    for a in f.atoms() {
        match a.kind {
            AtomKind::IsInt => return Err(QeError::IntAtom),
            AtomKind::Divides(_) => return Err(QeError::DividesAtom),
            _ => {}
        }
    }
    let g = qe_rec(f, order, Sort::Real)?;
    Ok(simplify(&g, order, Sort::Real))
}

fn qe_rec(f: &Formula, order: &VarOrder, sort: Sort) -> Result<Formula, QeError> {
    Ok(match f {
        Formula::Exists(v, g) => {
            let inner = qe_rec(g, order, sort)?;
            let elim = match sort {
                Sort::Real => elim_exists_real(v, &inner, order),
                Sort::Integer => elim_exists_int(v, &inner, order)?,
            };
            simplify(&elim, order, sort)
        }
        Formula::Forall(v, g) => {
            let inner = qe_rec(g, order, sort)?;
            let neg = Formula::not(inner);
            let elim = match sort {
                Sort::Real => elim_exists_real(v, &neg, order),
                Sort::Integer => elim_exists_int(v, &neg, order)?,
            };
            simplify(&Formula::not(elim), order, sort)
        }
        Formula::Not(g) => Formula::not(qe_rec(g, order, sort)?),
        Formula::And(xs) => Formula::and(
            xs.iter()
                .map(|x| qe_rec(x, order, sort))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(xs) => Formula::or(
            xs.iter()
                .map(|x| qe_rec(x, order, sort))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Implies(a, b) => {
            Formula::implies(qe_rec(a, order, sort)?, qe_rec(b, order, sort)?)
        }
        other => other.clone(),
    })
}

/// Test point for virtual substitution.
enum TestPoint {
    MinusInf,
    Exact(LinTerm),
    PlusEps(LinTerm),
}

/// Eliminate `exists v` from a quantifier-free Int-free formula.
fn elim_exists_real(v: &str, g: &Formula, order: &VarOrder) -> Formula {
    let g = expand_negations(&nnf(g), order, Sort::Real);
    if !g.free_vars().contains(v) {
        return g;
    }
    let mut points: Vec<TestPoint> = vec![TestPoint::MinusInf];
    for a in g.atoms() {
        let c = a.term.coeff(v);
        if c.is_zero() {
            continue;
        }
        // a.term = c*v + rest; root v = -rest/c.
        let mut rest = a.term.clone();
        rest.set_coeff(v, Rat::zero());
        let root = rest.scale(&(-Rat::one() / c.clone()));
        match a.kind {
            AtomKind::Eq => points.push(TestPoint::Exact(root)),
            AtomKind::Lt => {
                if c.is_negative() {
                    // c*v + rest < 0 with c<0 is a strict lower bound on v.
                    points.push(TestPoint::PlusEps(root));
                }
            }
            _ => unreachable!("Int-free input"),
        }
    }
    let mut parts = Vec::new();
    for p in points {
        parts.push(vsubst(&g, v, &p, order));
    }
    Formula::or(parts)
}

/// Virtual substitution of a test point into a positive-atom formula.
fn vsubst(g: &Formula, v: &str, p: &TestPoint, order: &VarOrder) -> Formula {
    match g {
        Formula::Atom(a) => {
            let c = a.term.coeff(v);
            if c.is_zero() {
                return g.clone();
            }
            match p {
                TestPoint::MinusInf => match a.kind {
                    AtomKind::Lt => Formula::from_bool(c.is_positive()),
                    AtomKind::Eq => Formula::False,
                    _ => unreachable!(),
                },
                TestPoint::Exact(t) => {
                    Atom::formula(a.kind.clone(), a.term.subst(v, t), order)
                }
                TestPoint::PlusEps(t) => {
                    let u = a.term.subst(v, t);
                    match a.kind {
                        AtomKind::Lt => {
                            // c*(t+eps)+rest < 0 iff u < 0, or u = 0 and c < 0.
                            if c.is_negative() {
                                Formula::or(vec![
                                    Formula::lt(u.clone(), order),
                                    Formula::eq(u, order),
                                ])
                            } else {
                                Formula::lt(u, order)
                            }
                        }
                        AtomKind::Eq => Formula::False,
                        _ => unreachable!(),
                    }
                }
            }
        }
        Formula::Not(inner) => Formula::not(vsubst(inner, v, p, order)),
        Formula::And(xs) => {
            Formula::and(xs.iter().map(|x| vsubst(x, v, p, order)).collect())
        }
        Formula::Or(xs) => {
            Formula::or(xs.iter().map(|x| vsubst(x, v, p, order)).collect())
        }
        Formula::True | Formula::False => g.clone(),
        _ => unreachable!("expected quantifier-free positive form"),
    }
}

// ---------------------------------------------------------------------------
// Cooper elimination for the integer fragment
// ---------------------------------------------------------------------------

/// Eliminate all quantifiers from a pure integer formula (Lt/Eq with
/// integral-after-scaling coefficients plus Div atoms).
pub fn qe_presburger(f: &Formula, order: &VarOrder) -> Result<Formula, QeError> {
    for a in f.atoms() {
        match &a.kind {
            AtomKind::IsInt => return Err(QeError::IntAtom),
            AtomKind::Divides(_) => {
                if a.term.denom_lcm() != Int::one() {
                    return Err(QeError::NonIntegral(a.term.to_string()));
                }
            }
            _ => {}
        }
    }
    let g = qe_rec(f, order, Sort::Integer)?;
    Ok(simplify(&g, order, Sort::Integer))
}

/// Scale an order atom so all coefficients are integral (valid over any
/// subring: t<0 iff d*t<0 for d>0).
fn integral_term(t: &LinTerm) -> LinTerm {
    let d = t.denom_lcm();
    if d.is_one() {
        t.clone()
    } else {
        t.scale(&Rat::from_integer(d))
    }
}

fn elim_exists_int(v: &str, g: &Formula, order: &VarOrder) -> Result<Formula, QeError> {
    let g = expand_negations(&nnf(&structural(g)), order, Sort::Integer);
    if !g.free_vars().contains(v) {
        return Ok(g);
    }
    // Collect literals; the formula is And/Or over atoms and Not(Div).
    // First pass: lcm of |coefficients| of v across order and Div atoms.
    let mut m = Int::one();
    for a in g.atoms() {
        let t = match a.kind {
            AtomKind::Lt | AtomKind::Eq => integral_term(&a.term),
            AtomKind::Divides(_) => a.term.clone(),
            AtomKind::IsInt => return Err(QeError::IntAtom),
        };
        let c = t.coeff(v);
        if !c.is_zero() {
            if !c.is_integer() {
                return Err(QeError::NonIntegral(t.to_string()));
            }
            m = num_integer::lcm(m, c.to_integer().abs());
        }
    }
    // Rewrite so v appears with coefficient +-m, then substitute u = m*v.
    let u = fresh_name("u", |n| g.all_vars().contains(n) || order.index(n).is_some());
    let rewritten = scale_var(&g, v, &u, &m, order)?;
    let with_div = if m.is_one() {
        rewritten
    } else {
        Formula::and(vec![
            rewritten,
            Atom::formula(AtomKind::Divides(m.clone()), LinTerm::var(&u), order),
        ])
    };
    // Gather bounds on u (coefficient is now +-1).
    let mut lowers: Vec<LinTerm> = Vec::new(); // u > b
    let mut uppers: Vec<LinTerm> = Vec::new(); // u < a
    let mut eq_vals: Vec<LinTerm> = Vec::new(); // u = c
    let mut delta = Int::one();
    for a in with_div.atoms() {
        let t = match a.kind {
            AtomKind::Lt | AtomKind::Eq => integral_term(&a.term),
            _ => a.term.clone(),
        };
        let c = t.coeff(&u);
        if c.is_zero() {
            continue;
        }
        let mut rest = t.clone();
        rest.set_coeff(&u, Rat::zero());
        match &a.kind {
            AtomKind::Lt => {
                if c.is_positive() {
                    // c*u + rest < 0, c = 1: u < -rest
                    uppers.push(rest.neg());
                } else {
                    // -u + rest < 0: u > rest
                    lowers.push(rest);
                }
            }
            AtomKind::Eq => {
                let val = if c.is_positive() { rest.neg() } else { rest };
                eq_vals.push(val);
            }
            AtomKind::Divides(d) => {
                delta = num_integer::lcm(delta, d.clone());
            }
            AtomKind::IsInt => unreachable!(),
        }
    }
    let mut b_set: Vec<LinTerm> = lowers.clone();
    for c in &eq_vals {
        b_set.push(c.add_constant(&rat(-1)));
    }
    let mut a_set: Vec<LinTerm> = uppers.clone();
    for c in &eq_vals {
        a_set.push(c.add_constant(&rat(1)));
    }
    dedup_terms(&mut b_set);
    dedup_terms(&mut a_set);
    let use_b = b_set.len() <= a_set.len();
    let mut parts: Vec<Formula> = Vec::new();
    let mut j = Int::one();
    while j <= delta {
        let jt = LinTerm::constant(Rat::from_integer(j.clone()));
        // The infinity disjunct.
        let inf = subst_inf(&with_div, &u, &jt, use_b, order);
        parts.push(inf);
        let base = if use_b { &b_set } else { &a_set };
        for b in base {
            let point = if use_b {
                b.add(&jt)
            } else {
                b.sub(&jt)
            };
            parts.push(subst_int(&with_div, &u, &point, order));
        }
        j += Int::one();
    }
    Ok(Formula::or(parts))
}

fn dedup_terms(v: &mut Vec<LinTerm>) {
    v.sort();
    v.dedup();
}

/// Rewrite every atom so that variable `v` (with coefficients dividing m)
/// becomes `u` standing for m*v.
fn scale_var(
    g: &Formula,
    v: &str,
    u: &str,
    m: &Int,
    order: &VarOrder,
) -> Result<Formula, QeError> {
    Ok(match g {
        Formula::Atom(a) => {
            let t = match a.kind {
                AtomKind::Lt | AtomKind::Eq => integral_term(&a.term),
                _ => a.term.clone(),
            };
            let c = t.coeff(v);
            if c.is_zero() {
                Atom::formula(a.kind.clone(), t, order)
            } else {
                let ci = c.to_integer();
                let factor = Rat::from_integer(m / ci.abs());
                let scaled = t.scale(&factor);
                // scaled has coefficient +-m on v; replace m*v by u.
                let cv = scaled.coeff(v);
                let mut rest = scaled.clone();
                rest.set_coeff(v, Rat::zero());
                let sign = if cv.is_positive() {
                    Rat::one()
                } else {
                    -Rat::one()
                };
                let newt = rest.add(&LinTerm::var(u).scale(&sign));
                let kind = match &a.kind {
                    AtomKind::Divides(d) => {
                        AtomKind::Divides(d * (m / ci.abs()))
                    }
                    k => k.clone(),
                };
                Atom::formula(kind, newt, order)
            }
        }
        Formula::Not(x) => Formula::not(scale_var(x, v, u, m, order)?),
        Formula::And(xs) => Formula::and(
            xs.iter()
                .map(|x| scale_var(x, v, u, m, order))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(xs) => Formula::or(
            xs.iter()
                .map(|x| scale_var(x, v, u, m, order))
                .collect::<Result<_, _>>()?,
        ),
        Formula::True | Formula::False => g.clone(),
        _ => unreachable!("expected quantifier-free input"),
    })
}

/// Substitute u := point (exact integer term) into the positive form.
fn subst_int(g: &Formula, u: &str, point: &LinTerm, order: &VarOrder) -> Formula {
    match g {
        Formula::Atom(a) => Atom::formula(a.kind.clone(), a.term.subst(u, point), order),
        Formula::Not(x) => Formula::not(subst_int(x, u, point, order)),
        Formula::And(xs) => {
            Formula::and(xs.iter().map(|x| subst_int(x, u, point, order)).collect())
        }
        Formula::Or(xs) => {
            Formula::or(xs.iter().map(|x| subst_int(x, u, point, order)).collect())
        }
        Formula::True | Formula::False => g.clone(),
        _ => unreachable!(),
    }
}

/// Substitute u := -infinity + j (when use_b) or +infinity - j into the
/// positive form; only Div atoms keep the residue j.
fn subst_inf(g: &Formula, u: &str, j: &LinTerm, use_b: bool, order: &VarOrder) -> Formula {
    match g {
        Formula::Atom(a) => {
            let c = a.term.coeff(u);
            if c.is_zero() {
                return g.clone();
            }
            match &a.kind {
                AtomKind::Lt => {
                    // u -> -inf: c*u -> sign(c) * -inf.
                    let truth = if use_b {
                        c.is_positive()
                    } else {
                        c.is_negative()
                    };
                    Formula::from_bool(truth)
                }
                AtomKind::Eq => Formula::False,
                AtomKind::Divides(_) => {
                    let repl = if use_b { j.clone() } else { j.neg() };
                    Atom::formula(a.kind.clone(), a.term.subst(u, &repl), order)
                }
                AtomKind::IsInt => unreachable!(),
            }
        }
        Formula::Not(x) => Formula::not(subst_inf(x, u, j, use_b, order)),
        Formula::And(xs) => Formula::and(
            xs.iter()
                .map(|x| subst_inf(x, u, j, use_b, order))
                .collect(),
        ),
        Formula::Or(xs) => Formula::or(
            xs.iter()
                .map(|x| subst_inf(x, u, j, use_b, order))
                .collect(),
        ),
        Formula::True | Formula::False => g.clone(),
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Satisfiability and entailment
// ---------------------------------------------------------------------------

/// Classify a formula's elimination theory; errors on mixed content.
pub fn classify(f: &Formula) -> Result<Sort, QeError> {
    let mut has_div = false;
    let mut has_int = false;
    for a in f.atoms() {
        match a.kind {
            AtomKind::Divides(_) => has_div = true,
            AtomKind::IsInt => has_int = true,
            _ => {}
        }
    }
    if has_int {
        return Err(QeError::MixedSorts);
    }
    Ok(if has_div { Sort::Integer } else { Sort::Real })
}

/// Decide satisfiability in the given theory, returning a witness point for
/// the free variables when satisfiable.
pub fn satisfiable(
    f: &Formula,
    order: &VarOrder,
    sort: Sort,
) -> Result<Option<BTreeMap<String, Rat>>, QeError> {
    let f0 = match sort {
        Sort::Real => qe_linear(f, order)?,
        Sort::Integer => qe_presburger(f, order)?,
    };
    // Free variables ordered by the variable order, leftovers alphabetically.
    let fv = f0.free_vars();
    let mut vars: Vec<String> = order
        .names()
        .iter()
        .filter(|n| fv.contains(*n))
        .cloned()
        .collect();
    for v in &fv {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    // Chain of eliminations from the last variable inward.
    let mut chain: Vec<Formula> = vec![f0.clone()];
    for v in vars.iter().rev() {
        let cur = chain.last().unwrap();
        let next = match sort {
            Sort::Real => simplify(&elim_exists_real(v, cur, order), order, sort),
            Sort::Integer => simplify(&elim_exists_int(v, cur, order)?, order, sort),
        };
        chain.push(next);
    }
    let ground = chain.last().unwrap();
    if !ground.eval(&BTreeMap::new())? {
        return Ok(None);
    }
    // Walk forward assigning one variable at a time.
    let mut point: BTreeMap<String, Rat> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        // chain[vars.len()-1-i] has free vars vars[..=i].
        let g = &chain[vars.len() - 1 - i];
        let val = pick_value(g, v, &point, sort).unwrap_or_else(|| {
            panic!(
                "witness search must succeed on a satisfiable chain: \
                 v={v} g={g:?} point={point:?} vars={vars:?} f0={f0:?}"
            )
        });
        point.insert(v.clone(), val);
    }
    debug_assert_eq!(f0.eval(&point), Ok(true));
    Ok(Some(point))
}

/// Find a value for `v` making g true given the partial assignment.
fn pick_value(
    g: &Formula,
    v: &str,
    partial: &BTreeMap<String, Rat>,
    sort: Sort,
) -> Option<Rat> {
    let mut roots: Vec<Rat> = Vec::new();
    let mut delta = Int::one();
    for a in g.atoms() {
        let c = a.term.coeff(v);
        if let AtomKind::Divides(d) = &a.kind {
            delta = num_integer::lcm(delta, d.clone());
        }
        if c.is_zero() {
            continue;
        }
        let mut rest = a.term.clone();
        rest.set_coeff(v, Rat::zero());
        if let Some(rv) = rest.eval(partial) {
            roots.push(-rv / c);
        }
    }
    roots.sort();
    roots.dedup();
    let mut candidates: Vec<Rat> = Vec::new();
    match sort {
        Sort::Real => {
            candidates.push(rat(0));
            for (i, r) in roots.iter().enumerate() {
                candidates.push(r.clone());
                candidates.push(r - rat(1));
                candidates.push(r + rat(1));
                if i + 1 < roots.len() {
                    candidates.push((r + &roots[i + 1]) / rat(2));
                }
            }
        }
        Sort::Integer => {
            let dq = Rat::from_integer(delta.clone());
            let span = rat_ceil(&dq) + Int::one();
            let mut bases: Vec<Int> = vec![Int::zero()];
            for r in &roots {
                bases.push(rat_floor(r));
                bases.push(rat_ceil(r));
            }
            for b in bases {
                let mut k = -span.clone();
                while k <= span {
                    candidates.push(Rat::from_integer(&b + &k));
                    k += Int::one();
                }
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    for c in candidates {
        let mut p = partial.clone();
        p.insert(v.to_string(), c.clone());
        if g.eval(&p) == Ok(true) {
            return Some(c);
        }
    }
    None
}

/// f entails g iff f and not g is unsatisfiable.
pub fn entails(f: &Formula, g: &Formula, order: &VarOrder, sort: Sort) -> Result<bool, QeError> {
    let both = Formula::and(vec![f.clone(), Formula::not(g.clone())]);
    Ok(satisfiable(&both, order, sort)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin_core::{parse_formula, ratq};

    fn ord(names: &[&str]) -> VarOrder {
        VarOrder::new(names.to_vec())
    }

    /// Grid with the given spacing on [-3, 3] per variable.
    fn grid(vars: &[String], num: i64, den: i64) -> Vec<BTreeMap<String, Rat>> {
        let step = ratq(num, den);
        let lo = rat(-3);
        let hi = rat(3);
        let mut axes: Vec<Vec<Rat>> = Vec::new();
        for _ in vars {
            let mut axis = Vec::new();
            let mut x = lo.clone();
            while x <= hi {
                axis.push(x.clone());
                x += &step;
            }
            axes.push(axis);
        }
        let mut out = vec![BTreeMap::new()];
        for (vi, v) in vars.iter().enumerate() {
            let mut next = Vec::new();
            for p in &out {
                for x in &axes[vi] {
                    let mut q = p.clone();
                    q.insert(v.clone(), x.clone());
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    fn agree_on_grid(f: &Formula, g: &Formula, vars: &[String], num: i64, den: i64) {
        for p in grid(vars, num, den) {
            let a = f.eval(&p);
            let b = g.eval(&p);
            assert_eq!(a, b, "disagreement at {p:?}\n f = {f}\n g = {g}");
        }
    }

    #[test]
    fn qe_density() {
        let o = ord(&["x"]);
        let f = parse_formula("exists y. x < y and y < 1", &o).unwrap();
        let g = qe_linear(&f, &o).unwrap();
        assert!(!g.has_quantifier());
        let want = parse_formula("x < 1", &o).unwrap();
        agree_on_grid(&g, &want, &["x".to_string()], 1, 8);
    }

    #[test]
    fn qe_substitution_case() {
        let o = ord(&["x"]);
        let f = parse_formula("exists y. y = x and y < 0", &o).unwrap();
        let g = qe_linear(&f, &o).unwrap();
        let want = parse_formula("x < 0", &o).unwrap();
        agree_on_grid(&g, &want, &["x".to_string()], 1, 8);
    }

    #[test]
    fn qe_band_case_against_sampling() {
        // exists y. (x < 2y and 2y < x+1 and y < 0): checked against the
        // original formula by eliminating and sampling the original with an
        // inner 1-D search on a fine grid.
        let o = ord(&["x"]);
        let f = parse_formula("exists y. x < 2*y and 2*y < x + 1 and y < 0", &o).unwrap();
        let g = qe_linear(&f, &o).unwrap();
        assert!(!g.has_quantifier());
        let inner = parse_formula("x < 2*y and 2*y < x + 1 and y < 0", &ord(&["x", "y"])).unwrap();
        for p in grid(&["x".to_string()], 1, 8) {
            // Oracle: the inner region in y is cut out by the roots x/2,
            // (x+1)/2 and 0, so testing the roots, the midpoints between
            // consecutive roots, and points beyond the extremes is exhaustive.
            let x = p["x"].clone();
            let mut roots = vec![&x / rat(2), (&x + rat(1)) / rat(2), rat(0)];
            roots.sort();
            let mut cands = vec![roots[0].clone() - rat(1), roots[2].clone() + rat(1)];
            for i in 0..roots.len() {
                cands.push(roots[i].clone());
                if i + 1 < roots.len() {
                    cands.push((&roots[i] + &roots[i + 1]) / rat(2));
                }
            }
            let any = cands.iter().any(|y| {
                let mut q = p.clone();
                q.insert("y".to_string(), y.clone());
                inner.eval(&q) == Ok(true)
            });
            assert_eq!(g.eval(&p), Ok(any), "x = {:?}", p["x"]);
        }
    }

    #[test]
    fn qe_forall() {
        let o = ord(&["x"]);
        let f = parse_formula("forall y. y < x -> y < 1", &o).unwrap();
        let g = qe_linear(&f, &o).unwrap();
        // Holds iff x <= 1.
        let want = parse_formula("x <= 1", &o).unwrap();
        agree_on_grid(&g, &want, &["x".to_string()], 1, 8);
    }

    #[test]
    fn presburger_parity() {
        let o = ord(&["x"]);
        let f = parse_formula("exists k. x = 2*k", &o).unwrap();
        let g = qe_presburger(&f, &o).unwrap();
        assert!(!g.has_quantifier());
        for x in -20i64..=20 {
            let mut p = BTreeMap::new();
            p.insert("x".to_string(), rat(x));
            assert_eq!(g.eval(&p), Ok(x % 2 == 0), "x = {x}");
        }
    }

    #[test]
    fn presburger_between() {
        let o = ord(&["x"]);
        let f = parse_formula("exists k. x < k and k < x + 2", &o).unwrap();
        let g = qe_presburger(&f, &o).unwrap();
        for x in -20i64..=20 {
            let mut p = BTreeMap::new();
            p.insert("x".to_string(), rat(x));
            // k = x+1 always works over the integers.
            assert_eq!(g.eval(&p), Ok(true), "x = {x}");
        }
    }

    #[test]
    fn presburger_scaled_divisor() {
        let o = ord(&["x"]);
        let f = parse_formula("exists k. 3*k = x and 0 < k", &o).unwrap();
        let g = qe_presburger(&f, &o).unwrap();
        for x in -20i64..=20 {
            let mut p = BTreeMap::new();
            p.insert("x".to_string(), rat(x));
            let want = x % 3 == 0 && x / 3 > 0;
            assert_eq!(g.eval(&p), Ok(want), "x = {x}");
        }
    }

    #[test]
    fn satisfiable_examples() {
        let o = ord(&["x"]);
        let f = parse_formula("x < x", &o).unwrap();
        assert_eq!(satisfiable(&f, &o, Sort::Real).unwrap(), None);

        let f = parse_formula("0 < x and x < 1", &o).unwrap();
        let w = satisfiable(&f, &o, Sort::Real).unwrap().unwrap();
        assert_eq!(f.eval(&w), Ok(true));

        let f = parse_formula("Div(2, x) and Div(3, x) and 0 < x and x < 7", &o).unwrap();
        let w = satisfiable(&f, &o, Sort::Integer).unwrap().unwrap();
        assert_eq!(w["x"], rat(6));
    }

    #[test]
    fn entails_examples() {
        let o = ord(&["x"]);
        let a = parse_formula("x < 0", &o).unwrap();
        let b = parse_formula("x < 1", &o).unwrap();
        assert!(entails(&a, &b, &o, Sort::Real).unwrap());
        assert!(!entails(&b, &a, &o, Sort::Real).unwrap());

        let c = parse_formula("0 < x and x < 1", &o).unwrap();
        let d = parse_formula("exists y. 0 < y and y < x", &o).unwrap();
        assert!(entails(&c, &d, &o, Sort::Real).unwrap());
    }

    #[test]
    fn idempotence_on_quantifier_free() {
        let o = ord(&["x", "y"]);
        let f = parse_formula("x < y or (x = y and y < 1)", &o).unwrap();
        let g = qe_linear(&f, &o).unwrap();
        agree_on_grid(&f, &g, &["x".to_string(), "y".to_string()], 1, 4);
    }

    #[test]
    fn fm_feasibility() {
        // x < 0 and -x < -1 is infeasible (x < 0 and x > 1).
        let c = vec![
            Cons::Lt(LinTerm::var("x")),
            Cons::Lt(LinTerm::var("x").neg().add_constant(&rat(1))),
        ];
        assert!(!fm_feasible(&c));
        let c = vec![
            Cons::Lt(LinTerm::var("x")),
            Cons::Lt(LinTerm::var("x").neg().add_constant(&rat(-1))),
        ];
        assert!(fm_feasible(&c));
    }

    #[test]
    fn canonical_one_var_merges_intervals() {
        let o = ord(&["x"]);
        let f = parse_formula("(0 < x and x < 1) or (x = 1) or (1 < x and x < 2)", &o).unwrap();
        let g = simplify(&f, &o, Sort::Real);
        let want = parse_formula("0 < x and x < 2", &o).unwrap();
        assert_eq!(g, want);
    }
}

//! Rationals, affine terms, atoms, the first-order formula AST, and the text
//! front end (parser and printer).
//!
//! Atoms are `t < 0`, `t = 0`, `Int(t)` and, for the integer fragment,
//! `Div(d, t)`. All other relations are parser sugar. Terms are affine with
//! exact rational coefficients; there is no floating point anywhere.

use num::BigInt;
use num::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub type Rat = BigRational;
pub type Int = BigInt;

/// Rational from an i64.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

/// Rational n/d.
pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// Floor of a rational as a BigInt.
pub fn rat_floor(r: &Rat) -> Int {
    r.floor().to_integer()
}

/// Ceiling of a rational as a BigInt.
pub fn rat_ceil(r: &Rat) -> Int {
    r.ceil().to_integer()
}

/// Fractional part in [0,1).
pub fn rat_fract(r: &Rat) -> Rat {
    r - Rat::from_integer(rat_floor(r))
}

// ---------------------------------------------------------------------------
// Variable order
// ---------------------------------------------------------------------------

/// Ordered list of distinct variable names. The last variable plays the role
/// of the cylindrical stack variable throughout the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarOrder {
    names: Vec<String>,
}

impl VarOrder {
    pub fn new<S: Into<String>>(names: Vec<S>) -> VarOrder {
        let names: Vec<String> = names.into_iter().map(|s| s.into()).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            assert!(seen.insert(n.clone()), "duplicate variable {n}");
        }
        VarOrder { names }
    }

    /// Standard order x1..xn.
    pub fn numbered(n: usize) -> VarOrder {
        VarOrder::new((1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn last(&self) -> Option<&str> {
        self.names.last().map(|s| s.as_str())
    }

    /// Order with one extra variable appended; the name is made fresh against
    /// this order if it clashes.
    pub fn push_fresh(&self, hint: &str) -> (VarOrder, String) {
        let name = fresh_name(hint, |n| self.index(n).is_some());
        let mut names = self.names.clone();
        names.push(name.clone());
        (VarOrder { names }, name)
    }

    pub fn dropped_last(&self, count: usize) -> VarOrder {
        assert!(count <= self.names.len());
        VarOrder {
            names: self.names[..self.names.len() - count].to_vec(),
        }
    }
}

/// Produce a name based on `hint` for which `taken` is false.
pub fn fresh_name<F: Fn(&str) -> bool>(hint: &str, taken: F) -> String {
    if !taken(hint) {
        return hint.to_string();
    }
    let base: String = hint
        .chars()
        .take_while(|c| *c != '_' || true)
        .collect::<String>();
    let base = match base.rfind('_') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => {
            base[..i].to_string()
        }
        _ => base,
    };
    for k in 1.. {
        let cand = format!("{base}_{k}");
        if !taken(&cand) {
            return cand;
        }
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// Linear terms
// ---------------------------------------------------------------------------

/// Affine term: sum of rational coefficients times variables, plus a rational
/// constant. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinTerm {
    coeffs: BTreeMap<String, Rat>,
    constant: Rat,
}

impl LinTerm {
    pub fn zero() -> LinTerm {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: Rat::zero(),
        }
    }

    pub fn constant(c: Rat) -> LinTerm {
        LinTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(name: &str) -> LinTerm {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rat::one());
        LinTerm {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn coeff(&self, name: &str) -> Rat {
        self.coeffs.get(name).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Rat> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn set_coeff(&mut self, name: &str, c: Rat) {
        if c.is_zero() {
            self.coeffs.remove(name);
        } else {
            self.coeffs.insert(name.to_string(), c);
        }
    }

    pub fn add(&self, other: &LinTerm) -> LinTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let nc = out.coeff(v) + c;
            out.set_coeff(v, nc);
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinTerm) -> LinTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinTerm {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, k: &Rat) -> LinTerm {
        if k.is_zero() {
            return LinTerm::zero();
        }
        LinTerm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_constant(&self, k: &Rat) -> LinTerm {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.coeffs.contains_key(name)
    }

    /// First variable of `order` with a nonzero coefficient.
    pub fn leading_var(&self, order: &VarOrder) -> Option<String> {
        for n in order.names() {
            if self.coeffs.contains_key(n) {
                return Some(n.clone());
            }
        }
        // Variables outside the order (e.g. freshly introduced bound names)
        // still need a deterministic leader.
        self.coeffs.keys().next().cloned()
    }

    pub fn eval(&self, point: &BTreeMap<String, Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * point.get(v)?;
        }
        Some(acc)
    }

    /// Substitute `name := repl` and return the new term.
    pub fn subst(&self, name: &str, repl: &LinTerm) -> LinTerm {
        let c = self.coeff(name);
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.set_coeff(name, Rat::zero());
        out.add(&repl.scale(&c))
    }

    /// Common denominator of all coefficients and the constant.
    pub fn denom_lcm(&self) -> Int {
        let mut l = self.constant.denom().clone();
        for c in self.coeffs.values() {
            l = num_integer::lcm(l, c.denom().clone());
        }
        l
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let (sign_neg, mag) = (c.is_negative(), c.abs());
            if first {
                if sign_neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign_neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if !self.constant.is_zero() {
            if self.constant.is_negative() {
                write!(f, " - {}", self.constant.abs())?;
            } else {
                write!(f, " + {}", self.constant)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

/// Atom relation kinds. `Divides(d)` only appears in the integer fragment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// term < 0
    Lt,
    /// term = 0
    Eq,
    /// term is an integer
    IsInt,
    /// d divides term (d >= 2, integer coefficients)
    Divides(Int),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub kind: AtomKind,
    pub term: LinTerm,
}

impl Atom {
    /// Build a normalized atom as a Formula; constant atoms fold to
    /// True/False.
    pub fn formula(kind: AtomKind, term: LinTerm, order: &VarOrder) -> Formula {
        match kind {
            AtomKind::Lt => {
                if term.is_constant() {
                    return Formula::from_bool(term.constant_part().is_negative());
                }
                let lead = term.leading_var(order).unwrap().to_string();
                let lc = term.coeff(&lead);
                let t = term.scale(&(Rat::one() / lc.abs()));
                Formula::Atom(Atom {
                    kind: AtomKind::Lt,
                    term: t,
                })
            }
            AtomKind::Eq => {
                if term.is_constant() {
                    return Formula::from_bool(term.constant_part().is_zero());
                }
                let lead = term.leading_var(order).unwrap().to_string();
                let lc = term.coeff(&lead);
                let t = term.scale(&(Rat::one() / lc));
                Formula::Atom(Atom {
                    kind: AtomKind::Eq,
                    term: t,
                })
            }
            AtomKind::IsInt => {
                if term.is_constant() {
                    return Formula::from_bool(term.constant_part().is_integer());
                }
                let lead = term.leading_var(order).unwrap().to_string();
                let mut t = if term.coeff(&lead).is_negative() {
                    term.neg()
                } else {
                    term
                };
                let shift = rat_fract(t.constant_part());
                t = LinTerm {
                    coeffs: t.coeffs.clone(),
                    constant: shift,
                };
                Formula::Atom(Atom {
                    kind: AtomKind::IsInt,
                    term: t,
                })
            }
            AtomKind::Divides(d) => {
                let d = d.abs();
                if d.is_zero() {
                    // 0 | t means t = 0.
                    return Atom::formula(AtomKind::Eq, term, order);
                }
                if d.is_one() {
                    return Formula::True;
                }
                // Reduce by the gcd of d and all coefficients (valid over the
                // integer sort: d | g*t' iff (d/gcd(d,g)) | (g/gcd)*t'
                // whenever g divides every coefficient and the constant).
                let mut g = d.clone();
                for c in term.coeffs.values() {
                    g = num_integer::gcd(g, c.to_integer());
                }
                g = num_integer::gcd(g, term.constant_part().to_integer());
                let (d, term) = if g > Int::one() {
                    (
                        &d / &g,
                        term.scale(&(Rat::one() / Rat::from_integer(g.clone()))),
                    )
                } else {
                    (d, term)
                };
                if d.is_one() {
                    return Formula::True;
                }
                // Reduce coefficients and the constant modulo d.
                let dr = Rat::from_integer(d.clone());
                let reduce = |c: &Rat| -> Rat {
                    let m = c - (c / &dr).floor() * &dr;
                    m
                };
                let mut coeffs = BTreeMap::new();
                for (v, c) in &term.coeffs {
                    let m = reduce(c);
                    if !m.is_zero() {
                        coeffs.insert(v.clone(), m);
                    }
                }
                let constant = reduce(term.constant_part());
                if coeffs.is_empty() {
                    return Formula::from_bool(constant.is_zero());
                }
                let mut t = LinTerm { coeffs, constant };
                let lead = t.leading_var(order).unwrap().to_string();
                if t.coeff(&lead).is_negative() {
                    t = t.neg();
                    t = LinTerm {
                        constant: {
                            let m = t.constant_part() - (t.constant_part() / &dr).floor() * &dr;
                            m
                        },
                        coeffs: t
                            .coeffs
                            .iter()
                            .map(|(v, c)| (v.clone(), c - (c / &dr).floor() * &dr))
                            .filter(|(_, c)| !c.is_zero())
                            .collect(),
                    };
                }
                Formula::Atom(Atom {
                    kind: AtomKind::Divides(d),
                    term: t,
                })
            }
        }
    }

    pub fn eval(&self, point: &BTreeMap<String, Rat>) -> Result<bool, EvalError> {
        let v = self
            .term
            .eval(point)
            .ok_or_else(|| EvalError::UnboundVar(self.term.vars().next().cloned().unwrap_or_default()))?;
        Ok(match &self.kind {
            AtomKind::Lt => v.is_negative(),
            AtomKind::Eq => v.is_zero(),
            AtomKind::IsInt => v.is_integer(),
            AtomKind::Divides(d) => {
                v.is_integer() && (v.to_integer() % d).is_zero()
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cannot evaluate quantified formula (variable {0})")]
    Quantifier(String),
    #[error("unbound variable {0}")]
    UnboundVar(String),
}

impl Formula {
    pub fn from_bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// Flattening, constant-absorbing conjunction.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(xs) => {
                    for x in xs {
                        if !out.contains(&x) {
                            out.push(x);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Flattening, constant-absorbing disjunction.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(xs) => {
                    for x in xs {
                        if !out.contains(&x) {
                            out.push(x);
                        }
                    }
                }
                other => {
                    if !out.contains(&other) {
                        out.push(other);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (&a, &b) {
            (Formula::False, _) => Formula::True,
            (_, Formula::True) => Formula::True,
            (Formula::True, _) => b,
            _ => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            other => Formula::Exists(v.to_string(), Box::new(other)),
        }
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            other => Formula::Forall(v.to_string(), Box::new(other)),
        }
    }

    pub fn lt(term: LinTerm, order: &VarOrder) -> Formula {
        Atom::formula(AtomKind::Lt, term, order)
    }

    pub fn eq(term: LinTerm, order: &VarOrder) -> Formula {
        Atom::formula(AtomKind::Eq, term, order)
    }

    pub fn is_int(term: LinTerm, order: &VarOrder) -> Formula {
        Atom::formula(AtomKind::IsInt, term, order)
    }

    /// a <= b as not(b < a).
    pub fn le(a: LinTerm, b: LinTerm, order: &VarOrder) -> Formula {
        Formula::not(Formula::lt(b.sub(&a), order))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::True | Formula::False => {}
                Formula::Atom(a) => {
                    for v in a.term.vars() {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(xs) | Formula::Or(xs) => {
                    for x in xs {
                        go(x, bound, out);
                    }
                }
                Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = self.free_vars();
        fn go(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    out.insert(v.clone());
                    go(g, out);
                }
                Formula::Not(g) => go(g, out),
                Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| go(x, out)),
                Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => true,
            Formula::Not(g) => g.has_quantifier(),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(|x| x.has_quantifier()),
            Formula::Implies(a, b) => a.has_quantifier() || b.has_quantifier(),
            _ => false,
        }
    }

    pub fn has_int_atoms(&self) -> bool {
        match self {
            Formula::Atom(a) => matches!(a.kind, AtomKind::IsInt | AtomKind::Divides(_)),
            Formula::Not(g) => g.has_int_atoms(),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(|x| x.has_int_atoms()),
            Formula::Implies(a, b) => a.has_int_atoms() || b.has_int_atoms(),
            Formula::Exists(_, g) | Formula::Forall(_, g) => g.has_int_atoms(),
            _ => false,
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::Not(g) => go(g, out),
                Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| go(x, out)),
                Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Exists(_, g) | Formula::Forall(_, g) => go(g, out),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    /// Tarski semantics at a rational point; quantifiers are rejected.
    pub fn eval(&self, point: &BTreeMap<String, Rat>) -> Result<bool, EvalError> {
        match self {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom(a) => a.eval(point),
            Formula::Not(g) => Ok(!g.eval(point)?),
            Formula::And(xs) => {
                for x in xs {
                    if !x.eval(point)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(xs) => {
                for x in xs {
                    if x.eval(point)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!a.eval(point)? || b.eval(point)?),
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                Err(EvalError::Quantifier(v.clone()))
            }
        }
    }

    /// Capture-avoiding substitution of an affine term for a free variable.
    /// Atoms are re-normalized against `order`.
    pub fn substitute(&self, name: &str, repl: &LinTerm, order: &VarOrder) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => {
                Atom::formula(a.kind.clone(), a.term.subst(name, repl), order)
            }
            Formula::Not(g) => Formula::not(g.substitute(name, repl, order)),
            Formula::And(xs) => {
                Formula::and(xs.iter().map(|x| x.substitute(name, repl, order)).collect())
            }
            Formula::Or(xs) => {
                Formula::or(xs.iter().map(|x| x.substitute(name, repl, order)).collect())
            }
            Formula::Implies(a, b) => Formula::implies(
                a.substitute(name, repl, order),
                b.substitute(name, repl, order),
            ),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let is_exists = matches!(self, Formula::Exists(..));
                if v == name {
                    // Variable is not free below; nothing to do.
                    return self.clone();
                }
                let (v2, body) = if repl.mentions(v) {
                    // Rename the bound variable away from the replacement.
                    let used: BTreeSet<String> = {
                        let mut u = g.all_vars();
                        u.extend(repl.vars().cloned());
                        u.insert(name.to_string());
                        u
                    };
                    let v2 = fresh_name(v, |n| used.contains(n));
                    let renamed = g.substitute(v, &LinTerm::var(&v2), order);
                    (v2, renamed)
                } else {
                    (v.clone(), (**g).clone())
                };
                let inner = body.substitute(name, repl, order);
                if is_exists {
                    Formula::exists(&v2, inner)
                } else {
                    Formula::forall(&v2, inner)
                }
            }
        }
    }

    /// Rename bound variables so they are distinct from each other and from
    /// every name for which `avoid` returns true.
    pub fn alpha_rename<F: Fn(&str) -> bool>(&self, avoid: &F, order: &VarOrder) -> Formula {
        fn go(
            f: &Formula,
            used: &mut BTreeSet<String>,
            order: &VarOrder,
        ) -> Formula {
            match f {
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    let is_exists = matches!(f, Formula::Exists(..));
                    let v2 = fresh_name(v, |n| used.contains(n));
                    used.insert(v2.clone());
                    let body = if v2 != *v {
                        g.substitute(v, &LinTerm::var(&v2), order)
                    } else {
                        (**g).clone()
                    };
                    let inner = go(&body, used, order);
                    if is_exists {
                        Formula::exists(&v2, inner)
                    } else {
                        Formula::forall(&v2, inner)
                    }
                }
                Formula::Not(g) => Formula::not(go(g, used, order)),
                Formula::And(xs) => Formula::and(xs.iter().map(|x| go(x, used, order)).collect()),
                Formula::Or(xs) => Formula::or(xs.iter().map(|x| go(x, used, order)).collect()),
                Formula::Implies(a, b) => {
                    Formula::implies(go(a, used, order), go(b, used, order))
                }
                other => other.clone(),
            }
        }
        let mut used: BTreeSet<String> = self.free_vars();
        for n in order.names() {
            used.insert(n.clone());
        }
        let extra: Vec<String> = self
            .all_vars()
            .into_iter()
            .filter(|n| avoid(n))
            .collect();
        used.extend(extra);
        go(self, &mut used, order)
    }
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_formula(self))
    }
}

/// Canonical text form; `parse_formula(print_formula(f)) == f` for formulas
/// with normalized atoms.
pub fn print_formula(f: &Formula) -> String {
    // Precedence levels: 0 implies, 1 or, 2 and, 3 not, 4 atom/quantifier.
    fn go(f: &Formula, level: u8, out: &mut String) {
        let own = match f {
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Not(..) => 3,
            // A quantifier extends maximally right, so it must be wrapped
            // whenever anything follows it.
            Formula::Exists(..) | Formula::Forall(..) => 0,
            _ => 4,
        };
        let need_paren = own < level;
        if need_paren {
            out.push('(');
        }
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Atom(a) => match &a.kind {
                AtomKind::Lt => out.push_str(&format!("{} < 0", a.term)),
                AtomKind::Eq => out.push_str(&format!("{} = 0", a.term)),
                AtomKind::IsInt => out.push_str(&format!("Int({})", a.term)),
                AtomKind::Divides(d) => out.push_str(&format!("Div({}, {})", d, a.term)),
            },
            Formula::Not(g) => {
                out.push_str("not ");
                go(g, 4, out);
            }
            Formula::And(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" and ");
                    }
                    go(x, 3, out);
                }
            }
            Formula::Or(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" or ");
                    }
                    go(x, 2, out);
                }
            }
            Formula::Implies(a, b) => {
                go(a, 1, out);
                out.push_str(" -> ");
                go(b, 1, out);
            }
            Formula::Exists(v, g) => {
                out.push_str(&format!("exists {v}. "));
                go(g, 0, out);
            }
            Formula::Forall(v, g) => {
                out.push_str(&format!("forall {v}. "));
                go(g, 0, out);
            }
        }
        if need_paren {
            out.push(')');
        }
    }
    let mut s = String::new();
    go(f, 0, &mut s);
    s
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown variable {0}")]
    UnknownVar(String),
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Int),
    Sym(&'static str),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(&mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
            {
                s.push(chars[i]);
                advance(&mut i, &mut col);
            }
            toks.push((Tok::Ident(s), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(&mut i, &mut col);
            }
            toks.push((Tok::Num(s.parse::<Int>().unwrap()), l0, c0));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym2 = ["<=", ">=", "!=", "->", ":="];
        if let Some(s) = sym2.iter().find(|s| **s == two) {
            toks.push((Tok::Sym(s), l0, c0));
            i += 2;
            col += 2;
            continue;
        }
        let sym1 = [
            "<", ">", "=", "+", "-", "*", "/", "(", ")", ".", ",", ";",
        ];
        let one = c.to_string();
        if let Some(s) = sym1.iter().find(|s| **s == one) {
            toks.push((Tok::Sym(s), l0, c0));
            advance(&mut i, &mut col);
            continue;
        }
        return Err(ParseError::Syntax {
            line: l0,
            col: c0,
            msg: format!("unexpected character {c:?}"),
        });
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn loc(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.loc();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(t)) if *t == s => {
                self.next();
                Ok(())
            }
            other => {
                let msg = format!("expected {s:?}, found {other:?}");
                self.err(msg)
            }
        }
    }

    fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other:?}")),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "exists", "forall", "true", "false", "Int", "Div", "set",
];

struct Parser<'a> {
    lx: Lexer,
    order: &'a VarOrder,
    // Bound variables currently in scope (innermost last).
    scope: Vec<String>,
}

impl<'a> Parser<'a> {
    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let a = self.or()?;
        if matches!(self.lx.peek(), Some(Tok::Sym("->"))) {
            self.lx.next();
            let b = self.implies()?;
            return Ok(Formula::implies(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and()?];
        while matches!(self.lx.peek(), Some(Tok::Ident(s)) if s == "or") {
            self.lx.next();
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while matches!(self.lx.peek(), Some(Tok::Ident(s)) if s == "and") {
            self.lx.next();
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.lx.peek().cloned() {
            Some(Tok::Ident(s)) if s == "not" => {
                self.lx.next();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ident(s)) if s == "exists" || s == "forall" => {
                self.lx.next();
                let v = self.lx.expect_ident()?;
                if KEYWORDS.contains(&v.as_str()) {
                    return self.lx.err(format!("{v:?} cannot be a variable name"));
                }
                self.lx.expect_sym(".")?;
                self.scope.push(v.clone());
                let body = self.formula()?;
                self.scope.pop();
                Ok(if s == "exists" {
                    Formula::exists(&v, body)
                } else {
                    Formula::forall(&v, body)
                })
            }
            _ => self.atom_or_paren(),
        }
    }

    fn atom_or_paren(&mut self) -> Result<Formula, ParseError> {
        match self.lx.peek().cloned() {
            Some(Tok::Ident(s)) if s == "true" => {
                self.lx.next();
                Ok(Formula::True)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.lx.next();
                Ok(Formula::False)
            }
            Some(Tok::Ident(s)) if s == "Int" => {
                self.lx.next();
                self.lx.expect_sym("(")?;
                let t = self.term()?;
                self.lx.expect_sym(")")?;
                Ok(Atom::formula(AtomKind::IsInt, t, self.order))
            }
            Some(Tok::Ident(s)) if s == "Div" => {
                self.lx.next();
                self.lx.expect_sym("(")?;
                let d = match self.lx.next() {
                    Some(Tok::Num(n)) => n,
                    other => return self.lx.err(format!("expected modulus, found {other:?}")),
                };
                self.lx.expect_sym(",")?;
                let t = self.term()?;
                self.lx.expect_sym(")")?;
                Ok(Atom::formula(AtomKind::Divides(d), t, self.order))
            }
            Some(Tok::Sym("(")) => {
                // Either a parenthesized formula or a parenthesized term that
                // starts a relation; try formula first by backtracking.
                let save = self.lx.pos;
                self.lx.next();
                match self.formula() {
                    Ok(f) => {
                        if self.lx.expect_sym(")").is_ok() {
                            // A relation symbol after the closing paren means
                            // this was really a term.
                            if self.peek_rel().is_none() {
                                return Ok(f);
                            }
                        }
                        self.lx.pos = save;
                        self.relation()
                    }
                    Err(_) => {
                        self.lx.pos = save;
                        self.relation()
                    }
                }
            }
            _ => self.relation(),
        }
    }

    fn peek_rel(&self) -> Option<&'static str> {
        match self.lx.peek() {
            Some(Tok::Sym(s)) if ["<", "<=", "=", "!=", ">", ">="].contains(s) => Some(s),
            _ => None,
        }
    }

    fn relation(&mut self) -> Result<Formula, ParseError> {
        let a = self.term()?;
        let rel = match self.peek_rel() {
            Some(r) => r,
            None => return self.lx.err("expected relation symbol"),
        };
        self.lx.next();
        let b = self.term()?;
        let o = self.order;
        Ok(match rel {
            "<" => Formula::lt(a.sub(&b), o),
            ">" => Formula::lt(b.sub(&a), o),
            "=" => Formula::eq(a.sub(&b), o),
            "!=" => Formula::not(Formula::eq(a.sub(&b), o)),
            "<=" => Formula::not(Formula::lt(b.sub(&a), o)),
            ">=" => Formula::not(Formula::lt(a.sub(&b), o)),
            _ => unreachable!(),
        })
    }

    fn term(&mut self) -> Result<LinTerm, ParseError> {
        let mut acc = self.term_factor()?;
        loop {
            match self.lx.peek() {
                Some(Tok::Sym("+")) => {
                    self.lx.next();
                    acc = acc.add(&self.term_factor()?);
                }
                Some(Tok::Sym("-")) => {
                    self.lx.next();
                    acc = acc.sub(&self.term_factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term_factor(&mut self) -> Result<LinTerm, ParseError> {
        match self.lx.peek().cloned() {
            Some(Tok::Sym("-")) => {
                self.lx.next();
                Ok(self.term_factor()?.neg())
            }
            Some(Tok::Sym("(")) => {
                self.lx.next();
                let t = self.term()?;
                self.lx.expect_sym(")")?;
                Ok(t)
            }
            Some(Tok::Num(n)) => {
                self.lx.next();
                let mut q = Rat::from_integer(n);
                if matches!(self.lx.peek(), Some(Tok::Sym("/"))) {
                    self.lx.next();
                    match self.lx.next() {
                        Some(Tok::Num(d)) => {
                            if d.is_zero() {
                                return Err(ParseError::ZeroDenominator);
                            }
                            q /= Rat::from_integer(d);
                        }
                        other => {
                            return self.lx.err(format!(
                                "expected denominator, found {other:?}"
                            ))
                        }
                    }
                }
                if matches!(self.lx.peek(), Some(Tok::Sym("*"))) {
                    self.lx.next();
                    let t = self.term_factor()?;
                    return Ok(t.scale(&q));
                }
                Ok(LinTerm::constant(q))
            }
            Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => {
                self.lx.next();
                if self.scope.iter().any(|s| *s == v) || self.order.index(&v).is_some() {
                    Ok(LinTerm::var(&v))
                } else {
                    Err(ParseError::UnknownVar(v))
                }
            }
            other => self.lx.err(format!("expected term, found {other:?}")),
        }
    }
}

/// Parse a single formula whose free variables come from `order`. Bound
/// variables are alpha-renamed apart from the order and from each other.
pub fn parse_formula(text: &str, order: &VarOrder) -> Result<Formula, ParseError> {
    let lx = lex(text)?;
    let mut p = Parser {
        lx,
        order,
        scope: Vec::new(),
    };
    let f = p.formula()?;
    if p.lx.peek().is_some() {
        return p.lx.err("trailing input after formula");
    }
    Ok(f.alpha_rename(&|_| false, order))
}

/// A named definition from a `.def` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub order: VarOrder,
    pub formula: Formula,
}

/// Parse a `.def` file: a sequence of `set NAME(vars) := formula;` items.
pub fn parse_def_file(text: &str) -> Result<Vec<Definition>, ParseError> {
    let lx = lex(text)?;
    let mut defs: Vec<Definition> = Vec::new();
    let empty = VarOrder::new(Vec::<String>::new());
    let mut p = Parser {
        lx,
        order: &empty,
        scope: Vec::new(),
    };
    while p.lx.peek().is_some() {
        match p.lx.next() {
            Some(Tok::Ident(s)) if s == "set" => {}
            other => return p.lx.err(format!("expected \"set\", found {other:?}")),
        }
        let name = p.lx.expect_ident()?;
        p.lx.expect_sym("(")?;
        let mut vars: Vec<String> = Vec::new();
        loop {
            match p.lx.peek().cloned() {
                Some(Tok::Sym(")")) => {
                    p.lx.next();
                    break;
                }
                Some(Tok::Ident(v)) => {
                    p.lx.next();
                    vars.push(v);
                    if matches!(p.lx.peek(), Some(Tok::Sym(","))) {
                        p.lx.next();
                    }
                }
                other => return p.lx.err(format!("expected variable, found {other:?}")),
            }
        }
        let order = VarOrder::new(vars);
        p.lx.expect_sym(":=")?;
        // Re-parse the formula with the right order by running a sub-parser
        // over the remaining tokens.
        let mut sub = Parser {
            lx: Lexer {
                toks: p.lx.toks[p.lx.pos..].to_vec(),
                pos: 0,
            },
            order: &order,
            scope: Vec::new(),
        };
        let f = sub.formula()?;
        p.lx.pos += sub.lx.pos;
        p.lx.expect_sym(";")?;
        let f = f.alpha_rename(&|_| false, &order);
        defs.push(Definition {
            name,
            order,
            formula: f,
        });
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(names: &[&str]) -> VarOrder {
        VarOrder::new(names.to_vec())
    }

    fn pt(assign: &[(&str, Rat)]) -> BTreeMap<String, Rat> {
        assign
            .iter()
            .map(|(n, v)| (n.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn parse_basic_conjunction() {
        let o = ord(&["x"]);
        let f = parse_formula("0 < x and x < 1", &o).unwrap();
        // 0 < x is Lt(-x); x < 1 is Lt(x - 1).
        let want = Formula::and(vec![
            Formula::lt(LinTerm::var("x").neg(), &o),
            Formula::lt(LinTerm::var("x").add_constant(&rat(-1)), &o),
        ]);
        assert_eq!(f, want);
    }

    #[test]
    fn parse_quantifier() {
        let o = ord(&["x"]);
        let f = parse_formula("exists y. x < y and y < 1", &o).unwrap();
        match f {
            Formula::Exists(v, body) => {
                assert_eq!(v, "y");
                assert!(matches!(*body, Formula::And(_)));
            }
            other => panic!("expected Exists, got {other:?}"),
        }
    }

    #[test]
    fn parse_int_atom() {
        let o = ord(&["x"]);
        let f = parse_formula("Int(2*x + 1/2)", &o).unwrap();
        match &f {
            Formula::Atom(a) => {
                assert_eq!(a.kind, AtomKind::IsInt);
                assert_eq!(a.term.coeff("x"), rat(2));
                assert_eq!(*a.term.constant_part(), ratq(1, 2));
            }
            other => panic!("expected atom, got {other:?}"),
        }
    }

    #[test]
    fn eval_examples() {
        let o = ord(&["x"]);
        let f = parse_formula("x < 1", &o).unwrap();
        assert_eq!(f.eval(&pt(&[("x", ratq(1, 2))])), Ok(true));

        let g = parse_formula("Int(2*x + 1/2)", &o).unwrap();
        assert_eq!(g.eval(&pt(&[("x", ratq(3, 4))])), Ok(true));
        assert_eq!(g.eval(&pt(&[("x", ratq(1, 2))])), Ok(false));

        let h = parse_formula("0 < x and x < 1", &o).unwrap();
        assert_eq!(h.eval(&pt(&[("x", rat(2))])), Ok(false));
    }

    #[test]
    fn eval_rejects_quantifiers() {
        let o = ord(&["x"]);
        let f = parse_formula("exists y. x < y", &o).unwrap();
        assert!(matches!(
            f.eval(&pt(&[("x", rat(0))])),
            Err(EvalError::Quantifier(_))
        ));
    }

    #[test]
    fn substitute_examples() {
        let o = ord(&["x", "y"]);
        // substitute(x < 1, x, y + 2) -> y + 2 < 1, i.e. y - (-1) ... y + 1 < 0.
        let f = parse_formula("x < 1", &o).unwrap();
        let g = f.substitute("x", &LinTerm::var("y").add_constant(&rat(2)), &o);
        let want = parse_formula("y < -1", &o).unwrap();
        assert_eq!(g, want);

        let f = parse_formula("Int(x)", &o).unwrap();
        let g = f.substitute("x", &LinTerm::var("y").scale(&rat(2)), &o);
        let want = parse_formula("Int(2*y)", &o).unwrap();
        assert_eq!(g, want);
    }

    #[test]
    fn substitute_avoids_capture() {
        let o = ord(&["x", "y"]);
        let f = parse_formula("exists z. x < z", &o).unwrap();
        // Substituting y for x must not let y be captured if the bound
        // variable is renamed to y first.
        let f2 = match f {
            Formula::Exists(_, body) => Formula::Exists(
                "y".to_string(),
                Box::new(body.substitute("z", &LinTerm::var("y"), &o)),
            ),
            _ => unreachable!(),
        };
        let g = f2.substitute("x", &LinTerm::var("y"), &o);
        match g {
            Formula::Exists(v, body) => {
                assert_ne!(v, "y");
                let free = body.free_vars();
                assert!(free.contains("y"));
                assert!(free.contains(&v));
            }
            other => panic!("expected Exists, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_roundtrip_fixed() {
        let o = ord(&["x", "y"]);
        for text in [
            "0 < x and x < 1",
            "exists z. x < z and z < y",
            "forall z. z < x -> z < y + 1",
            "Int(2*x + 1/2) or not (x = y)",
            "x <= y and x != 1 and x >= -3/2",
            "true",
            "false",
            "Div(3, x - 2*y) and Int(x)",
        ] {
            let f = parse_formula(text, &o).unwrap();
            let printed = print_formula(&f);
            let g = parse_formula(&printed, &o).unwrap();
            assert_eq!(f, g, "round trip failed for {text:?} -> {printed:?}");
        }
    }

    #[test]
    fn normalization_idempotent_and_sound() {
        let o = ord(&["x", "y"]);
        // -2x + 4 < 0 normalizes with |leading| = 1.
        let t = LinTerm::var("x").scale(&rat(-2)).add_constant(&rat(4));
        let f = Formula::lt(t.clone(), &o);
        if let Formula::Atom(a) = &f {
            assert_eq!(a.term.coeff("x").abs(), rat(1));
            // Semantics preserved at sample points.
            for v in [-3i64, 0, 1, 2, 3, 5] {
                let p = pt(&[("x", rat(v)), ("y", rat(0))]);
                let orig = t.eval(&p).unwrap().is_negative();
                assert_eq!(f.eval(&p), Ok(orig));
            }
        } else {
            panic!("expected atom");
        }
        // Eq leading coefficient is exactly +1.
        let g = Formula::eq(LinTerm::var("x").scale(&rat(-3)).add_constant(&rat(6)), &o);
        if let Formula::Atom(a) = &g {
            assert_eq!(a.term.coeff("x"), rat(1));
        } else {
            panic!("expected atom");
        }
    }

    #[test]
    fn divides_normalization() {
        let o = ord(&["x"]);
        // Div(1, anything) is true.
        assert_eq!(
            Atom::formula(AtomKind::Divides(Int::from(1)), LinTerm::var("x"), &o),
            Formula::True
        );
        // Div(6, 2x + 4) reduces to Div(3, x + 2).
        let f = Atom::formula(
            AtomKind::Divides(Int::from(6)),
            LinTerm::var("x").scale(&rat(2)).add_constant(&rat(4)),
            &o,
        );
        if let Formula::Atom(a) = &f {
            assert_eq!(a.kind, AtomKind::Divides(Int::from(3)));
            assert_eq!(a.term.coeff("x"), rat(1));
            assert_eq!(*a.term.constant_part(), rat(2));
        } else {
            panic!("expected atom, got {f:?}");
        }
        // Semantics check by enumeration.
        for x in -12i64..=12 {
            let p = pt(&[("x", rat(x))]);
            assert_eq!(f.eval(&p), Ok((2 * x + 4) % 6 == 0), "x = {x}");
        }
    }

    #[test]
    fn def_file_parsing() {
        let text = "set A(x) := 0 < x and x < 1;\nset B(x, y) := x < y;\n";
        let defs = parse_def_file(text).unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].name, "A");
        assert_eq!(defs[0].order.names(), &["x".to_string()]);
        assert_eq!(defs[1].order.len(), 2);
    }

    #[test]
    fn unknown_variable_rejected() {
        let o = ord(&["x"]);
        assert!(matches!(
            parse_formula("x < z", &o),
            Err(ParseError::UnknownVar(_))
        ));
    }
}

//! The refinement lattice: atoms, normalized conjunctive predicates,
//! sections, and restriction/pullback along key projections.
//!
//! Predicates are canonical sets of atoms (at most one range atom per key
//! and kind) with TOP = empty set and an explicit BOT. All operations are
//! pure; values are freely shareable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::frontend::Key;

/// An interval endpoint: -inf, a finite integer, or +inf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    NegInf,
    Finite(i64),
    PosInf,
}

impl End {
    pub fn fin(n: i64) -> End {
        End::Finite(n)
    }

    pub fn as_finite(self) -> Option<i64> {
        match self {
            End::Finite(n) => Some(n),
            _ => None,
        }
    }

    pub fn add(self, other: End) -> End {
        match (self, other) {
            (End::NegInf, End::PosInf) | (End::PosInf, End::NegInf) => {
                // Caller decides direction; saturate pessimistically.
                End::PosInf
            }
            (End::NegInf, _) | (_, End::NegInf) => End::NegInf,
            (End::PosInf, _) | (_, End::PosInf) => End::PosInf,
            (End::Finite(a), End::Finite(b)) => match a.checked_add(b) {
                Some(c) => End::Finite(c),
                None if a > 0 => End::PosInf,
                None => End::NegInf,
            },
        }
    }

    pub fn mul(self, other: End) -> End {
        let sign = |e: End| match e {
            End::NegInf => -1,
            End::PosInf => 1,
            End::Finite(n) => n.signum(),
        };
        match (self, other) {
            (End::Finite(0), _) | (_, End::Finite(0)) => End::Finite(0),
            (End::Finite(a), End::Finite(b)) => match a.checked_mul(b) {
                Some(c) => End::Finite(c),
                None if (a > 0) == (b > 0) => End::PosInf,
                None => End::NegInf,
            },
            (a, b) => {
                if sign(a) * sign(b) >= 0 {
                    End::PosInf
                } else {
                    End::NegInf
                }
            }
        }
    }

    pub fn neg(self) -> End {
        match self {
            End::NegInf => End::PosInf,
            End::PosInf => End::NegInf,
            End::Finite(n) => End::Finite(n.saturating_neg()),
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            End::NegInf => write!(f, "-inf"),
            End::PosInf => write!(f, "+inf"),
            End::Finite(n) => write!(f, "{n}"),
        }
    }
}

/// Derived single-key expression templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DerivedFn {
    Sum,
    Len,
    Abs,
}

impl DerivedFn {
    pub fn name(self) -> &'static str {
        match self {
            DerivedFn::Sum => "sum",
            DerivedFn::Len => "len",
            DerivedFn::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    IntRange { key: Key, lo: End, hi: End },
    NonZero { key: Key },
    IsNone { key: Key },
    NotNone { key: Key },
    LenRange { key: Key, lo: i64, hi: End },
    ElemRange { key: Key, lo: End, hi: End },
    DerivedRange { func: DerivedFn, key: Key, lo: End, hi: End },
    DerivedNonZero { func: DerivedFn, key: Key },
}

impl Atom {
    pub fn key(&self) -> &Key {
        match self {
            Atom::IntRange { key, .. }
            | Atom::NonZero { key }
            | Atom::IsNone { key }
            | Atom::NotNone { key }
            | Atom::LenRange { key, .. }
            | Atom::ElemRange { key, .. }
            | Atom::DerivedRange { key, .. }
            | Atom::DerivedNonZero { key, .. } => key,
        }
    }

    pub fn with_key(&self, key: Key) -> Atom {
        let mut a = self.clone();
        match &mut a {
            Atom::IntRange { key: k, .. }
            | Atom::NonZero { key: k }
            | Atom::IsNone { key: k }
            | Atom::NotNone { key: k }
            | Atom::LenRange { key: k, .. }
            | Atom::ElemRange { key: k, .. }
            | Atom::DerivedRange { key: k, .. }
            | Atom::DerivedNonZero { key: k, .. } => *k = key,
        }
        a
    }

    /// True when the atom constrains nothing.
    fn is_trivial(&self) -> bool {
        match self {
            Atom::IntRange { lo, hi, .. } => *lo == End::NegInf && *hi == End::PosInf,
            Atom::LenRange { lo, hi, .. } => *lo <= 0 && *hi == End::PosInf,
            Atom::ElemRange { lo, hi, .. } => *lo == End::NegInf && *hi == End::PosInf,
            Atom::DerivedRange { func, lo, hi, .. } => match func {
                DerivedFn::Abs | DerivedFn::Len => {
                    *lo <= End::Finite(0) && *hi == End::PosInf
                }
                DerivedFn::Sum => *lo == End::NegInf && *hi == End::PosInf,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::IntRange { key, lo, hi } => write!(f, "{key} in [{lo}, {hi}]"),
            Atom::NonZero { key } => write!(f, "{key} != 0"),
            Atom::IsNone { key } => write!(f, "{key} is None"),
            Atom::NotNone { key } => write!(f, "{key} is not None"),
            Atom::LenRange { key, lo, hi } => write!(f, "len({key}) in [{lo}, {hi}]"),
            Atom::ElemRange { key, lo, hi } => write!(f, "all({key}) in [{lo}, {hi}]"),
            Atom::DerivedRange { func, key, lo, hi } => {
                write!(f, "{}({key}) in [{lo}, {hi}]", func.name())
            }
            Atom::DerivedNonZero { func, key } => write!(f, "{}({key}) != 0", func.name()),
        }
    }
}

/// A canonical conjunction of atoms. TOP is the empty conjunction, BOT the
/// absorbing contradiction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    Bot,
    Atoms(BTreeSet<Atom>),
}

impl Predicate {
    pub fn top() -> Predicate {
        Predicate::Atoms(BTreeSet::new())
    }

    pub fn bot() -> Predicate {
        Predicate::Bot
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Predicate::Atoms(s) if s.is_empty())
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Predicate::Bot)
    }

    pub fn atom(a: Atom) -> Predicate {
        Predicate::from_atoms(vec![a])
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Predicate {
        normalize(atoms.into_iter().collect())
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        const EMPTY: &BTreeSet<Atom> = &BTreeSet::new();
        match self {
            Predicate::Bot => EMPTY,
            Predicate::Atoms(s) => s,
        }
    }

    pub fn keys(&self) -> BTreeSet<Key> {
        self.atoms().iter().map(|a| a.key().clone()).collect()
    }

    /// Keep only atoms on the given keys.
    pub fn project_keys(&self, keys: &BTreeSet<Key>) -> Predicate {
        match self {
            Predicate::Bot => Predicate::Bot,
            Predicate::Atoms(s) => Predicate::from_atoms(
                s.iter().filter(|a| keys.contains(a.key())).cloned(),
            ),
        }
    }

    pub fn rename_key(&self, from: &Key, to: &Key) -> Predicate {
        match self {
            Predicate::Bot => Predicate::Bot,
            Predicate::Atoms(s) => Predicate::from_atoms(s.iter().map(|a| {
                if a.key() == from {
                    a.with_key(to.clone())
                } else {
                    a.clone()
                }
            })),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Bot => write!(f, "false"),
            Predicate::Atoms(s) if s.is_empty() => write!(f, "true"),
            Predicate::Atoms(s) => {
                let parts: Vec<String> = s.iter().map(|a| a.to_string()).collect();
                write!(f, "{}", parts.join(" and "))
            }
        }
    }
}

// --- normalization --------------------------------------------------------

fn normalize(atoms: Vec<Atom>) -> Predicate {
    // Canonicalize derived forms first.
    let mut work: Vec<Atom> = Vec::new();
    for a in atoms {
        match a {
            Atom::DerivedRange { func: DerivedFn::Len, key, lo, hi } => {
                let lo = lo.as_finite().unwrap_or(0).max(0);
                work.push(Atom::LenRange { key, lo, hi });
            }
            Atom::DerivedNonZero { func: DerivedFn::Len, key } => {
                work.push(Atom::LenRange { key, lo: 1, hi: End::PosInf });
            }
            Atom::DerivedNonZero { func: DerivedFn::Abs, key } => {
                work.push(Atom::NonZero { key });
            }
            other => work.push(other),
        }
    }

    #[derive(Default)]
    struct PerKey {
        int_range: Option<(End, End)>,
        nonzero: bool,
        is_none: bool,
        not_none: bool,
        len_range: Option<(i64, End)>,
        elem_range: Option<(End, End)>,
        sum_range: Option<(End, End)>,
        abs_range: Option<(End, End)>,
        sum_nonzero: bool,
    }

    let mut per: BTreeMap<Key, PerKey> = BTreeMap::new();
    for a in work {
        let e = per.entry(a.key().clone()).or_default();
        match a {
            Atom::IntRange { lo, hi, .. } => {
                e.int_range = Some(meet_range(e.int_range, (lo, hi)));
            }
            Atom::NonZero { .. } => e.nonzero = true,
            Atom::IsNone { .. } => e.is_none = true,
            Atom::NotNone { .. } => e.not_none = true,
            Atom::LenRange { lo, hi, .. } => {
                let cur = (End::Finite(lo.max(0)), hi);
                let met = meet_range(e.len_range.map(|(l, h)| (End::Finite(l), h)), cur);
                e.len_range = Some((met.0.as_finite().unwrap_or(0).max(0), met.1));
            }
            Atom::ElemRange { lo, hi, .. } => {
                e.elem_range = Some(meet_range(e.elem_range, (lo, hi)));
            }
            Atom::DerivedRange { func: DerivedFn::Sum, lo, hi, .. } => {
                e.sum_range = Some(meet_range(e.sum_range, (lo, hi)));
            }
            Atom::DerivedRange { func: DerivedFn::Abs, lo, hi, .. } => {
                let lo = if lo < End::Finite(0) { End::Finite(0) } else { lo };
                e.abs_range = Some(meet_range(e.abs_range, (lo, hi)));
            }
            Atom::DerivedRange { func: DerivedFn::Len, .. }
            | Atom::DerivedNonZero { func: DerivedFn::Len, .. }
            | Atom::DerivedNonZero { func: DerivedFn::Abs, .. } => unreachable!(),
            Atom::DerivedNonZero { func: DerivedFn::Sum, .. } => e.sum_nonzero = true,
        }
    }

    let mut out: BTreeSet<Atom> = BTreeSet::new();
    for (key, mut e) in per {
        // Contradictions around None-ness: any value-constraining atom
        // excludes None.
        let value_constrained = e.int_range.is_some()
            || e.nonzero
            || e.len_range.is_some()
            || e.elem_range.is_some()
            || e.sum_range.is_some()
            || e.abs_range.is_some()
            || e.sum_nonzero;
        if e.is_none && (e.not_none || value_constrained) {
            return Predicate::Bot;
        }

        // NonZero tightens an int range endpoint at zero.
        if let Some((lo, hi)) = e.int_range {
            let (mut lo, mut hi) = (lo, hi);
            if e.nonzero {
                if lo == End::Finite(0) {
                    lo = End::Finite(1);
                }
                if hi == End::Finite(0) {
                    hi = End::Finite(-1);
                }
            }
            if lo > hi {
                return Predicate::Bot;
            }
            e.int_range = Some((lo, hi));
            if range_excludes_zero(lo, hi) {
                e.nonzero = false; // entailed, drop for canonicity
            } else if lo == hi && lo == End::Finite(0) && e.nonzero {
                return Predicate::Bot;
            }
        }
        // Abs range refines int range feasibility.
        if let Some((alo, ahi)) = e.abs_range {
            if alo > ahi {
                return Predicate::Bot;
            }
            if ahi == End::Finite(0) && e.nonzero {
                return Predicate::Bot;
            }
        }
        if let Some((lo, hi)) = e.len_range {
            if End::Finite(lo) > hi {
                return Predicate::Bot;
            }
        }
        // An empty element range forces the empty list.
        if let Some((lo, hi)) = e.elem_range {
            if lo > hi {
                let met = meet_range(
                    e.len_range.map(|(l, h)| (End::Finite(l), h)),
                    (End::Finite(0), End::Finite(0)),
                );
                if met.0 > met.1 {
                    return Predicate::Bot;
                }
                e.len_range = Some((0, End::Finite(0)));
                e.elem_range = None;
            }
        }
        // The empty list satisfies every element range; drop it for
        // canonicity when the length is pinned to zero.
        if let Some((_, End::Finite(0))) = e.len_range {
            e.elem_range = None;
        }
        // Sum feasibility from elem x len bounds.
        if e.sum_range.is_some() || e.sum_nonzero {
            let feasible = sum_interval(
                e.elem_range.unwrap_or((End::NegInf, End::PosInf)),
                e.len_range.unwrap_or((0, End::PosInf)),
            );
            if let Some((slo, shi)) = e.sum_range {
                if slo > shi {
                    return Predicate::Bot;
                }
                let met = meet_range(Some(feasible), (slo, shi));
                if met.0 > met.1 {
                    return Predicate::Bot;
                }
            }
            if e.sum_nonzero {
                if feasible.0 == End::Finite(0) && feasible.1 == End::Finite(0) {
                    return Predicate::Bot;
                }
                if let Some((slo, shi)) = e.sum_range {
                    if range_excludes_zero(slo, shi) {
                        e.sum_nonzero = false;
                    } else if slo == shi && slo == End::Finite(0) {
                        return Predicate::Bot;
                    }
                }
            }
        }

        if let Some((lo, hi)) = e.int_range {
            let a = Atom::IntRange { key: key.clone(), lo, hi };
            if !a.is_trivial() {
                out.insert(a);
            }
        }
        if e.nonzero {
            out.insert(Atom::NonZero { key: key.clone() });
        }
        if e.is_none {
            out.insert(Atom::IsNone { key: key.clone() });
        }
        if e.not_none && !value_constrained {
            out.insert(Atom::NotNone { key: key.clone() });
        }
        if let Some((lo, hi)) = e.len_range {
            let a = Atom::LenRange { key: key.clone(), lo, hi };
            if !a.is_trivial() {
                out.insert(a);
            }
        }
        if let Some((lo, hi)) = e.elem_range {
            let a = Atom::ElemRange { key: key.clone(), lo, hi };
            if !a.is_trivial() {
                out.insert(a);
            }
        }
        if let Some((lo, hi)) = e.sum_range {
            let a = Atom::DerivedRange { func: DerivedFn::Sum, key: key.clone(), lo, hi };
            if !a.is_trivial() {
                out.insert(a);
            }
        }
        if let Some((lo, hi)) = e.abs_range {
            let a = Atom::DerivedRange { func: DerivedFn::Abs, key: key.clone(), lo, hi };
            if !a.is_trivial() {
                out.insert(a);
            }
        }
        if e.sum_nonzero {
            out.insert(Atom::DerivedNonZero { func: DerivedFn::Sum, key: key.clone() });
        }
    }
    Predicate::Atoms(out)
}

fn meet_range(cur: Option<(End, End)>, new: (End, End)) -> (End, End) {
    match cur {
        None => new,
        Some((lo, hi)) => (lo.max(new.0), hi.min(new.1)),
    }
}

fn range_excludes_zero(lo: End, hi: End) -> bool {
    lo > End::Finite(0) || hi < End::Finite(0)
}

/// Interval of `sum(xs)` given element and length bounds. When the length
/// lower bound is zero the empty list forces 0 into the range.
pub fn sum_interval(elem: (End, End), len: (i64, End)) -> (End, End) {
    let (elo, ehi) = elem;
    let (llo, lhi) = len;
    let llo_e = End::Finite(llo);
    let mut cands_lo: Vec<End> = Vec::new();
    let mut cands_hi: Vec<End> = Vec::new();
    for l in [llo_e, lhi] {
        cands_lo.push(elo.mul(l));
        cands_hi.push(ehi.mul(l));
        // Mixed products matter when the element range straddles zero.
        cands_lo.push(ehi.mul(l).min(elo.mul(l)));
        cands_hi.push(elo.mul(l).max(ehi.mul(l)));
    }
    let mut lo = cands_lo.into_iter().min().unwrap_or(End::NegInf);
    let mut hi = cands_hi.into_iter().max().unwrap_or(End::PosInf);
    if llo == 0 {
        lo = lo.min(End::Finite(0));
        hi = hi.max(End::Finite(0));
    }
    (lo, hi)
}

// --- lattice operations ----------------------------------------------------

/// Greatest lower bound in the information order: conjunction.
pub fn meet(a: &Predicate, b: &Predicate) -> Predicate {
    match (a, b) {
        (Predicate::Bot, _) | (_, Predicate::Bot) => Predicate::Bot,
        (Predicate::Atoms(x), Predicate::Atoms(y)) => {
            normalize(x.iter().chain(y.iter()).cloned().collect())
        }
    }
}

/// Least upper bound representable in the conjunctive atom language:
/// interval hull per key, atoms entailed by both sides kept.
pub fn join(a: &Predicate, b: &Predicate) -> Predicate {
    match (a, b) {
        (Predicate::Bot, other) | (other, Predicate::Bot) => other.clone(),
        (Predicate::Atoms(x), Predicate::Atoms(y)) => {
            let mut candidates: BTreeSet<Atom> = BTreeSet::new();
            for atom in x.iter().chain(y.iter()) {
                candidates.insert(atom.clone());
                candidates.insert(hull_counterpart(atom, x, y));
            }
            // NotNone is recoverable whenever both sides pin the key to a
            // value; record it explicitly so the hull does not lose it.
            let keys: BTreeSet<Key> =
                x.iter().chain(y.iter()).map(|a| a.key().clone()).collect();
            for k in keys {
                candidates.insert(Atom::NotNone { key: k.clone() });
                candidates.insert(Atom::NonZero { key: k.clone() });
                candidates.insert(Atom::DerivedNonZero { func: DerivedFn::Sum, key: k.clone() });
                candidates.insert(Atom::IsNone { key: k });
            }
            let kept: Vec<Atom> = candidates
                .into_iter()
                .filter(|c| atom_entailed(a, c) && atom_entailed(b, c))
                .collect();
            normalize(kept)
        }
    }
}

/// For a range atom, the hull of the corresponding ranges on both sides.
fn hull_counterpart(atom: &Atom, x: &BTreeSet<Atom>, y: &BTreeSet<Atom>) -> Atom {
    let find = |set: &BTreeSet<Atom>, probe: &Atom| -> Option<(End, End)> {
        set.iter().find_map(|a| match (a, probe) {
            (Atom::IntRange { key, lo, hi }, Atom::IntRange { key: k2, .. }) if key == k2 => {
                Some((*lo, *hi))
            }
            (Atom::LenRange { key, lo, hi }, Atom::LenRange { key: k2, .. }) if key == k2 => {
                Some((End::Finite(*lo), *hi))
            }
            (Atom::ElemRange { key, lo, hi }, Atom::ElemRange { key: k2, .. })
                if key == k2 =>
            {
                Some((*lo, *hi))
            }
            (
                Atom::DerivedRange { func, key, lo, hi },
                Atom::DerivedRange { func: f2, key: k2, .. },
            ) if key == k2 && func == f2 => Some((*lo, *hi)),
            _ => None,
        })
    };
    let (rx, ry) = (find(x, atom), find(y, atom));
    if let (Some((l1, h1)), Some((l2, h2))) = (rx, ry) {
        let (lo, hi) = (l1.min(l2), h1.max(h2));
        match atom {
            Atom::IntRange { key, .. } => Atom::IntRange { key: key.clone(), lo, hi },
            Atom::LenRange { key, .. } => Atom::LenRange {
                key: key.clone(),
                lo: lo.as_finite().unwrap_or(0).max(0),
                hi,
            },
            Atom::ElemRange { key, .. } => Atom::ElemRange { key: key.clone(), lo, hi },
            Atom::DerivedRange { func, key, .. } => {
                Atom::DerivedRange { func: *func, key: key.clone(), lo, hi }
            }
            _ => atom.clone(),
        }
    } else {
        atom.clone()
    }
}

/// `leq(a, b)` holds iff `b` entails `a` (b is at least as informative).
pub fn leq(a: &Predicate, b: &Predicate) -> bool {
    match (a, b) {
        (_, Predicate::Bot) => true,
        (Predicate::Bot, _) => false,
        (Predicate::Atoms(want), Predicate::Atoms(_)) => {
            want.iter().all(|atom| atom_entailed(b, atom))
        }
    }
}

/// Does the predicate entail a single atom?
pub fn atom_entailed(p: &Predicate, target: &Atom) -> bool {
    let atoms = match p {
        Predicate::Bot => return true,
        Predicate::Atoms(s) => s,
    };
    if target.is_trivial() {
        return true;
    }
    if atoms.contains(target) {
        return true;
    }
    let k = target.key();
    let on_key: Vec<&Atom> = atoms.iter().filter(|a| a.key() == k).collect();
    let int_range = on_key.iter().find_map(|a| match a {
        Atom::IntRange { lo, hi, .. } => Some((*lo, *hi)),
        _ => None,
    });
    let len_range = on_key.iter().find_map(|a| match a {
        Atom::LenRange { lo, hi, .. } => Some((End::Finite(*lo), *hi)),
        _ => None,
    });
    let elem_range = on_key.iter().find_map(|a| match a {
        Atom::ElemRange { lo, hi, .. } => Some((*lo, *hi)),
        _ => None,
    });
    let sum_range = on_key.iter().find_map(|a| match a {
        Atom::DerivedRange { func: DerivedFn::Sum, lo, hi, .. } => Some((*lo, *hi)),
        _ => None,
    });
    let abs_range = on_key.iter().find_map(|a| match a {
        Atom::DerivedRange { func: DerivedFn::Abs, lo, hi, .. } => Some((*lo, *hi)),
        _ => None,
    });
    let has_nonzero = on_key.iter().any(|a| matches!(a, Atom::NonZero { .. }));
    let has_sum_nonzero = on_key
        .iter()
        .any(|a| matches!(a, Atom::DerivedNonZero { func: DerivedFn::Sum, .. }));
    let has_is_none = on_key.iter().any(|a| matches!(a, Atom::IsNone { .. }));
    let value_constraining = on_key.iter().any(|a| !matches!(a, Atom::IsNone { .. }));

    let within = |r: Option<(End, End)>, lo: End, hi: End| -> bool {
        r.map(|(rlo, rhi)| rlo >= lo && rhi <= hi).unwrap_or(false)
    };

    match target {
        Atom::IntRange { lo, hi, .. } => {
            if within(int_range, *lo, *hi) {
                return true;
            }
            // Abs bound pins an int range symmetric around zero.
            if let Some((_, ahi)) = abs_range {
                if End::Finite(0).min(ahi.neg()) >= *lo && ahi <= *hi {
                    return true;
                }
            }
            false
        }
        Atom::NonZero { .. } => {
            has_nonzero
                || int_range.map(|(l, h)| range_excludes_zero(l, h)).unwrap_or(false)
                || abs_range.map(|(l, _)| l >= End::Finite(1)).unwrap_or(false)
        }
        Atom::IsNone { .. } => has_is_none,
        Atom::NotNone { .. } => value_constraining,
        Atom::LenRange { lo, hi, .. } => within(len_range, End::Finite(*lo), *hi),
        Atom::ElemRange { lo, hi, .. } => {
            within(elem_range, *lo, *hi)
                || len_range.map(|(_, h)| h == End::Finite(0)).unwrap_or(false)
        }
        Atom::DerivedRange { func: DerivedFn::Sum, lo, hi, .. } => {
            if within(sum_range, *lo, *hi) {
                return true;
            }
            if elem_range.is_some() || len_range.is_some() {
                let si = sum_interval(
                    elem_range.unwrap_or((End::NegInf, End::PosInf)),
                    len_range
                        .map(|(l, h)| (l.as_finite().unwrap_or(0), h))
                        .unwrap_or((0, End::PosInf)),
                );
                if si.0 >= *lo && si.1 <= *hi {
                    return true;
                }
            }
            false
        }
        Atom::DerivedRange { func: DerivedFn::Abs, lo, hi, .. } => {
            if within(abs_range, *lo, *hi) {
                return true;
            }
            if let Some((ilo, ihi)) = int_range {
                let a = abs_interval(ilo, ihi);
                if a.0 >= *lo && a.1 <= *hi {
                    return true;
                }
            }
            false
        }
        Atom::DerivedNonZero { func: DerivedFn::Sum, .. } => {
            if has_sum_nonzero {
                return true;
            }
            if sum_range.map(|(l, h)| range_excludes_zero(l, h)).unwrap_or(false) {
                return true;
            }
            if elem_range.is_some() || len_range.is_some() {
                let si = sum_interval(
                    elem_range.unwrap_or((End::NegInf, End::PosInf)),
                    len_range
                        .map(|(l, h)| (l.as_finite().unwrap_or(0), h))
                        .unwrap_or((0, End::PosInf)),
                );
                if range_excludes_zero(si.0, si.1) {
                    return true;
                }
            }
            false
        }
        Atom::DerivedRange { func: DerivedFn::Len, .. }
        | Atom::DerivedNonZero { func: DerivedFn::Len, .. }
        | Atom::DerivedNonZero { func: DerivedFn::Abs, .. } => {
            // Normalized away; entailment is checked on the canonical form.
            let canon = Predicate::atom(target.clone());
            match canon {
                Predicate::Atoms(s) => s.iter().all(|t| atom_entailed(p, t)),
                Predicate::Bot => false,
            }
        }
    }
}

pub fn abs_interval(lo: End, hi: End) -> (End, End) {
    let zero = End::Finite(0);
    if lo >= zero {
        (lo, hi)
    } else if hi <= zero {
        (hi.neg(), lo.neg())
    } else {
        (zero, hi.max(lo.neg()))
    }
}

// --- sections and projections ----------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Carrier {
    Int,
    Bool,
    NoneType,
    ListInt,
    Opaque,
}

impl Carrier {
    pub fn join(self, other: Carrier) -> Carrier {
        if self == other {
            self
        } else {
            Carrier::Opaque
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Carrier::Int => "int",
            Carrier::Bool => "bool",
            Carrier::NoneType => "none",
            Carrier::ListInt => "list",
            Carrier::Opaque => "opaque",
        }
    }
}

/// A local section: carrier type tag plus a refinement predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Section {
    pub carrier: Carrier,
    pub phi: Predicate,
}

impl Section {
    pub fn top() -> Section {
        Section { carrier: Carrier::Opaque, phi: Predicate::top() }
    }

    pub fn bot() -> Section {
        Section { carrier: Carrier::Opaque, phi: Predicate::Bot }
    }

    pub fn new(carrier: Carrier, phi: Predicate) -> Section {
        Section { carrier, phi }
    }

    pub fn is_top(&self) -> bool {
        self.phi.is_top()
    }

    pub fn is_bot(&self) -> bool {
        self.phi.is_bot()
    }

    pub fn meet(&self, other: &Section) -> Section {
        Section {
            carrier: if self.carrier == Carrier::Opaque { other.carrier } else { self.carrier },
            phi: meet(&self.phi, &other.phi),
        }
    }

    pub fn join(&self, other: &Section) -> Section {
        if self.is_bot() {
            return other.clone();
        }
        if other.is_bot() {
            return self.clone();
        }
        Section { carrier: self.carrier.join(other.carrier), phi: join(&self.phi, &other.phi) }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.carrier.name(), self.phi)
    }
}

/// One entry of a projection: destination key = deriv(source key).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjEntry {
    pub dst: Key,
    pub src: Key,
    pub deriv: Option<DerivedFn>,
}

/// A partial, injective map from destination-site keys to source-site keys,
/// each entry optionally passing through a derived expression template.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Projection {
    pub entries: Vec<ProjEntry>,
}

impl Projection {
    pub fn identity(keys: impl IntoIterator<Item = Key>) -> Projection {
        Projection {
            entries: keys
                .into_iter()
                .map(|k| ProjEntry { dst: k.clone(), src: k, deriv: None })
                .collect(),
        }
    }

    pub fn rename(pairs: impl IntoIterator<Item = (Key, Key)>) -> Projection {
        Projection {
            entries: pairs
                .into_iter()
                .map(|(dst, src)| ProjEntry { dst, src, deriv: None })
                .collect(),
        }
    }

    pub fn entry_for_src(&self, src: &Key) -> Option<&ProjEntry> {
        self.entries.iter().find(|e| &e.src == src)
    }

    pub fn entry_for_dst(&self, dst: &Key) -> Option<&ProjEntry> {
        self.entries.iter().find(|e| &e.dst == dst)
    }

    /// Composition along `src --this--> mid --outer--> dst`: entries chain
    /// outer.dst -> outer.src = this.dst -> this.src. Underivable chains
    /// (two derived hops) drop out of the partial map.
    pub fn compose(&self, outer: &Projection) -> Projection {
        let mut entries = Vec::new();
        for oe in &outer.entries {
            if let Some(ie) = self.entry_for_dst(&oe.src) {
                let deriv = match (ie.deriv, oe.deriv) {
                    (None, None) => None,
                    (Some(d), None) | (None, Some(d)) => Some(d),
                    (Some(_), Some(_)) => continue,
                };
                entries.push(ProjEntry { dst: oe.dst.clone(), src: ie.src.clone(), deriv });
            }
        }
        Projection { entries }
    }
}

/// Restriction: move a section over source keys forward to the destination
/// keyspace. Atoms on unmapped keys are dropped (sound information loss);
/// derived entries apply the abstract transfer of the template.
pub fn restrict(s: &Section, pi: &Projection) -> Section {
    if s.is_bot() {
        return Section { carrier: s.carrier, phi: Predicate::Bot };
    }
    let mut out: Vec<Atom> = Vec::new();
    for atom in s.phi.atoms() {
        let Some(entry) = pi.entry_for_src(atom.key()) else { continue };
        match entry.deriv {
            None => out.push(atom.with_key(entry.dst.clone())),
            Some(DerivedFn::Sum) => match atom {
                Atom::ElemRange { .. } | Atom::LenRange { .. } => {
                    // Handled jointly below.
                }
                Atom::DerivedRange { func: DerivedFn::Sum, lo, hi, .. } => {
                    out.push(Atom::IntRange { key: entry.dst.clone(), lo: *lo, hi: *hi });
                }
                Atom::DerivedNonZero { func: DerivedFn::Sum, .. } => {
                    out.push(Atom::NonZero { key: entry.dst.clone() });
                }
                _ => {}
            },
            Some(DerivedFn::Len) => match atom {
                Atom::LenRange { lo, hi, .. } => {
                    out.push(Atom::IntRange {
                        key: entry.dst.clone(),
                        lo: End::Finite(*lo),
                        hi: *hi,
                    });
                }
                _ => {}
            },
            Some(DerivedFn::Abs) => match atom {
                Atom::IntRange { lo, hi, .. } => {
                    let (alo, ahi) = abs_interval(*lo, *hi);
                    out.push(Atom::IntRange { key: entry.dst.clone(), lo: alo, hi: ahi });
                }
                Atom::NonZero { .. } => {
                    out.push(Atom::IntRange {
                        key: entry.dst.clone(),
                        lo: End::Finite(1),
                        hi: End::PosInf,
                    });
                }
                _ => {}
            },
        }
    }
    // Joint elem x len -> sum transfer for Sum entries.
    for entry in &pi.entries {
        if entry.deriv != Some(DerivedFn::Sum) {
            continue;
        }
        let elem = s.phi.atoms().iter().find_map(|a| match a {
            Atom::ElemRange { key, lo, hi } if key == &entry.src => Some((*lo, *hi)),
            _ => None,
        });
        let len = s.phi.atoms().iter().find_map(|a| match a {
            Atom::LenRange { key, lo, hi } if key == &entry.src => Some((*lo, *hi)),
            _ => None,
        });
        if elem.is_some() || len.is_some() {
            let (lo, hi) = sum_interval(
                elem.unwrap_or((End::NegInf, End::PosInf)),
                len.unwrap_or((0, End::PosInf)),
            );
            out.push(Atom::IntRange { key: entry.dst.clone(), lo, hi });
        }
    }
    Section { carrier: s.carrier, phi: Predicate::from_atoms(out) }
}

/// Pullback, the adjoint of restriction: the weakest source-side section
/// whose restriction entails `s`. Requirements on keys outside the
/// projection's domain collapse to BOT (no source section can reestablish
/// them), which keeps the Galois inequality `leq(s, restrict(pullback(s)))`.
pub fn pullback(s: &Section, pi: &Projection) -> Section {
    if s.is_bot() {
        return Section { carrier: s.carrier, phi: Predicate::Bot };
    }
    let mut out: Vec<Atom> = Vec::new();
    for atom in s.phi.atoms() {
        let Some(entry) = pi.entry_for_dst(atom.key()) else {
            return Section { carrier: s.carrier, phi: Predicate::Bot };
        };
        match entry.deriv {
            None => out.push(atom.with_key(entry.src.clone())),
            Some(DerivedFn::Sum) => match atom {
                Atom::IntRange { lo, hi, .. } => out.push(Atom::DerivedRange {
                    func: DerivedFn::Sum,
                    key: entry.src.clone(),
                    lo: *lo,
                    hi: *hi,
                }),
                Atom::NonZero { .. } => out.push(Atom::DerivedNonZero {
                    func: DerivedFn::Sum,
                    key: entry.src.clone(),
                }),
                Atom::NotNone { .. } => out.push(Atom::LenRange {
                    key: entry.src.clone(),
                    lo: 0,
                    hi: End::PosInf,
                }),
                _ => return Section { carrier: s.carrier, phi: Predicate::Bot },
            },
            Some(DerivedFn::Len) => match atom {
                Atom::IntRange { lo, hi, .. } => out.push(Atom::LenRange {
                    key: entry.src.clone(),
                    lo: lo.as_finite().unwrap_or(0).max(0),
                    hi: *hi,
                }),
                Atom::NonZero { .. } => {
                    out.push(Atom::LenRange { key: entry.src.clone(), lo: 1, hi: End::PosInf })
                }
                Atom::NotNone { .. } => {}
                _ => return Section { carrier: s.carrier, phi: Predicate::Bot },
            },
            Some(DerivedFn::Abs) => match atom {
                Atom::IntRange { lo, hi, .. } => {
                    // Choose the nonnegative branch when the range excludes
                    // small magnitudes; restriction still entails the target.
                    if *lo <= End::Finite(0) {
                        out.push(Atom::IntRange {
                            key: entry.src.clone(),
                            lo: hi.neg(),
                            hi: *hi,
                        });
                    } else {
                        out.push(Atom::IntRange { key: entry.src.clone(), lo: *lo, hi: *hi });
                    }
                }
                Atom::NonZero { .. } => out.push(Atom::NonZero { key: entry.src.clone() }),
                Atom::NotNone { .. } => {}
                _ => return Section { carrier: s.carrier, phi: Predicate::Bot },
            },
        }
    }
    Section { carrier: s.carrier, phi: Predicate::from_atoms(out) }
}

// --- atom universe and lattice height ---------------------------------------

/// The per-function constant pool: program constants plus {0, 1}, closed
/// under +-1.
pub fn constant_pool(constants: &BTreeSet<i64>) -> BTreeSet<i64> {
    let mut base: BTreeSet<i64> = constants.clone();
    base.insert(0);
    base.insert(1);
    let mut out = BTreeSet::new();
    for c in base {
        out.insert(c.saturating_sub(1));
        out.insert(c);
        out.insert(c.saturating_add(1));
    }
    out
}

/// Size of the atom universe over the given keys: the number of distinct
/// atoms expressible with endpoints drawn from the constant pool.
pub fn atom_universe_size(int_keys: usize, list_keys: usize, pool: &BTreeSet<i64>) -> u64 {
    let n = pool.len() as u64;
    // Finite endpoint pairs lo <= hi, plus one-sided and two-sided infinities.
    let range_count = n * (n + 1) / 2 + 2 * n + 1;
    let nonneg = pool.iter().filter(|c| **c >= 0).count() as u64;
    let len_count = nonneg * (nonneg + 1) / 2 + nonneg + 1;
    let per_int = range_count /* IntRange */
        + range_count /* abs */
        + 1 /* NonZero */
        + 2 /* IsNone / NotNone */;
    let per_list = len_count /* LenRange */
        + range_count /* ElemRange */
        + range_count /* sum range */
        + 1 /* sum nonzero */
        + 2 /* IsNone / NotNone */;
    (int_keys as u64) * per_int + (list_keys as u64) * per_list
}

/// Height bound of the refinement lattice: longest strictly increasing
/// chain is at most the universe size plus one.
pub fn lattice_height(int_keys: usize, list_keys: usize, pool: &BTreeSet<i64>) -> u64 {
    atom_universe_size(int_keys, list_keys, pool) + 1
}

/// Round range endpoints outward to the nearest representable constant so
/// forward joins converge within the finite-height lattice.
pub fn round_outward(p: &Predicate, pool: &BTreeSet<i64>) -> Predicate {
    let down = |e: End| -> End {
        match e {
            End::Finite(n) => pool
                .iter()
                .rev()
                .find(|c| **c <= n)
                .map(|c| End::Finite(*c))
                .unwrap_or(End::NegInf),
            other => other,
        }
    };
    let up = |e: End| -> End {
        match e {
            End::Finite(n) => pool
                .iter()
                .find(|c| **c >= n)
                .map(|c| End::Finite(*c))
                .unwrap_or(End::PosInf),
            other => other,
        }
    };
    match p {
        Predicate::Bot => Predicate::Bot,
        Predicate::Atoms(atoms) => Predicate::from_atoms(atoms.iter().map(|a| match a {
            Atom::IntRange { key, lo, hi } => {
                Atom::IntRange { key: key.clone(), lo: down(*lo), hi: up(*hi) }
            }
            Atom::LenRange { key, lo, hi } => Atom::LenRange {
                key: key.clone(),
                lo: down(End::Finite(*lo)).as_finite().unwrap_or(0).max(0),
                hi: up(*hi),
            },
            Atom::ElemRange { key, lo, hi } => {
                Atom::ElemRange { key: key.clone(), lo: down(*lo), hi: up(*hi) }
            }
            Atom::DerivedRange { func, key, lo, hi } => {
                Atom::DerivedRange { func: *func, key: key.clone(), lo: down(*lo), hi: up(*hi) }
            }
            other => other.clone(),
        })),
    }
}

// --- concrete values (for enumeration-based checks) -------------------------

/// A concrete value over which atoms are evaluated exactly. Lists hold
/// machine ints; that is all the atom language distinguishes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConcreteVal {
    Int(i64),
    Bool(bool),
    NoneV,
    List(Vec<i64>),
}

impl fmt::Display for ConcreteVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteVal::Int(n) => write!(f, "{n}"),
            ConcreteVal::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            ConcreteVal::NoneV => write!(f, "None"),
            ConcreteVal::List(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

fn in_range(n: i64, lo: End, hi: End) -> bool {
    End::Finite(n) >= lo && End::Finite(n) <= hi
}

pub fn atom_satisfied(atom: &Atom, v: &ConcreteVal) -> bool {
    match atom {
        Atom::IntRange { lo, hi, .. } => match v {
            ConcreteVal::Int(n) => in_range(*n, *lo, *hi),
            ConcreteVal::Bool(b) => in_range(i64::from(*b), *lo, *hi),
            _ => false,
        },
        Atom::NonZero { .. } => match v {
            ConcreteVal::Int(n) => *n != 0,
            ConcreteVal::Bool(b) => *b,
            _ => false,
        },
        Atom::IsNone { .. } => matches!(v, ConcreteVal::NoneV),
        Atom::NotNone { .. } => !matches!(v, ConcreteVal::NoneV),
        Atom::LenRange { lo, hi, .. } => match v {
            ConcreteVal::List(xs) => in_range(xs.len() as i64, End::Finite(*lo), *hi),
            _ => false,
        },
        Atom::ElemRange { lo, hi, .. } => match v {
            ConcreteVal::List(xs) => xs.iter().all(|x| in_range(*x, *lo, *hi)),
            _ => false,
        },
        Atom::DerivedRange { func, lo, hi, .. } => match (func, v) {
            (DerivedFn::Sum, ConcreteVal::List(xs)) => {
                in_range(xs.iter().sum::<i64>(), *lo, *hi)
            }
            (DerivedFn::Len, ConcreteVal::List(xs)) => in_range(xs.len() as i64, *lo, *hi),
            (DerivedFn::Abs, ConcreteVal::Int(n)) => in_range(n.abs(), *lo, *hi),
            _ => false,
        },
        Atom::DerivedNonZero { func, .. } => match (func, v) {
            (DerivedFn::Sum, ConcreteVal::List(xs)) => xs.iter().sum::<i64>() != 0,
            (DerivedFn::Len, ConcreteVal::List(xs)) => !xs.is_empty(),
            (DerivedFn::Abs, ConcreteVal::Int(n)) => *n != 0,
            _ => false,
        },
    }
}

/// Evaluate a predicate over a valuation of its keys. Keys without a
/// binding are unconstrained (treated as satisfied).
pub fn satisfies(p: &Predicate, valuation: &BTreeMap<Key, ConcreteVal>) -> bool {
    match p {
        Predicate::Bot => false,
        Predicate::Atoms(atoms) => atoms.iter().all(|a| match valuation.get(a.key()) {
            Some(v) => atom_satisfied(a, v),
            None => true,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(name: &str) -> Key {
        Key::new(name, 0)
    }

    fn int_range(name: &str, lo: i64, hi: i64) -> Predicate {
        Predicate::atom(Atom::IntRange { key: k(name), lo: End::fin(lo), hi: End::fin(hi) })
    }

    #[test]
    fn meet_intersects_ranges() {
        let got = meet(&int_range("x", 0, 10), &int_range("x", 5, 20));
        assert_eq!(got, int_range("x", 5, 10));
    }

    #[test]
    fn meet_top_is_identity() {
        let p = int_range("x", 2, 4);
        assert_eq!(meet(&Predicate::top(), &p), p);
    }

    #[test]
    fn meet_empty_intersection_is_bot() {
        assert!(meet(&int_range("x", 0, 3), &int_range("x", 5, 9)).is_bot());
    }

    #[test]
    fn join_hulls_ranges() {
        let got = join(&int_range("x", 0, 3), &int_range("x", 5, 9));
        assert_eq!(got, int_range("x", 0, 9));
    }

    #[test]
    fn join_bot_is_identity() {
        let p = int_range("x", 1, 2);
        assert_eq!(join(&p, &Predicate::bot()), p);
    }

    #[test]
    fn join_drops_one_sided_atoms() {
        // (NotNone(x) and x in [1,1]) join NotNone(x) = NotNone(x),
        // checked by gamma-inclusion over x in {None, -2..2}.
        let a = Predicate::from_atoms([
            Atom::NotNone { key: k("x") },
            Atom::IntRange { key: k("x"), lo: End::fin(1), hi: End::fin(1) },
        ]);
        let b = Predicate::atom(Atom::NotNone { key: k("x") });
        let joined = join(&a, &b);
        assert_eq!(joined, b);
        let mut vals = vec![ConcreteVal::NoneV];
        vals.extend((-2..=2).map(ConcreteVal::Int));
        for v in vals {
            let mut m = BTreeMap::new();
            m.insert(k("x"), v.clone());
            let in_a = satisfies(&a, &m);
            let in_b = satisfies(&b, &m);
            let in_j = satisfies(&joined, &m);
            assert!(!in_a || in_j, "gamma(a) not within gamma(join) at {v}");
            assert!(!in_b || in_j, "gamma(b) not within gamma(join) at {v}");
        }
    }

    #[test]
    fn leq_range_containment_and_reflexivity() {
        assert!(leq(&int_range("x", 0, 10), &int_range("x", 2, 5)));
        let p = int_range("x", 0, 10);
        assert!(leq(&p, &p));
        assert!(!leq(&int_range("x", 2, 5), &int_range("x", 0, 10)));
    }

    #[test]
    fn leq_nonzero_from_range() {
        // gamma(IntRange(x,1,5)) excludes 0, so it entails NonZero(x);
        // cross-checked by enumerating x in -3..=5.
        let nz = Predicate::atom(Atom::NonZero { key: k("x") });
        let r = int_range("x", 1, 5);
        assert!(leq(&nz, &r));
        for x in -3..=5 {
            let mut m = BTreeMap::new();
            m.insert(k("x"), ConcreteVal::Int(x));
            if satisfies(&r, &m) {
                assert!(satisfies(&nz, &m));
            }
        }
    }

    #[test]
    fn nonzero_meets_to_bot_on_zero_range() {
        let z = int_range("x", 0, 0);
        let nz = Predicate::atom(Atom::NonZero { key: k("x") });
        assert!(meet(&z, &nz).is_bot());
    }

    #[test]
    fn restriction_renames_through_projection() {
        // Section over `filtered`, projected to `values` at a call boundary.
        let s = Section::new(
            Carrier::ListInt,
            Predicate::from_atoms([
                Atom::ElemRange { key: k("filtered"), lo: End::fin(0), hi: End::PosInf },
                Atom::LenRange { key: k("filtered"), lo: 0, hi: End::PosInf },
            ]),
        );
        let pi = Projection::rename([(k("values"), k("filtered"))]);
        let r = restrict(&s, &pi);
        assert!(r.phi.atoms().iter().any(
            |a| matches!(a, Atom::ElemRange { key, lo, .. } if key == &k("values") && *lo == End::fin(0))
        ));
    }

    #[test]
    fn restriction_along_identity_is_identity() {
        let s = Section::new(Carrier::Int, int_range("x", 1, 3));
        let pi = Projection::identity([k("x")]);
        assert_eq!(restrict(&s, &pi), s);
    }

    #[test]
    fn restriction_drops_unmapped_keys() {
        let s = Section::new(
            Carrier::Opaque,
            Predicate::from_atoms([
                Atom::IntRange { key: k("a"), lo: End::fin(0), hi: End::fin(5) },
                Atom::IntRange { key: k("b"), lo: End::fin(1), hi: End::fin(2) },
            ]),
        );
        let pi = Projection::rename([(k("c"), k("a"))]);
        let r = restrict(&s, &pi);
        assert_eq!(r.phi, int_range("c", 0, 5));
    }

    #[test]
    fn pullback_of_nonzero_through_sum_edge() {
        // NonZero(total) pulled back along total = sum(values).
        let s = Section::new(Carrier::Int, Predicate::atom(Atom::NonZero { key: k("total") }));
        let pi = Projection {
            entries: vec![ProjEntry {
                dst: k("total"),
                src: k("values"),
                deriv: Some(DerivedFn::Sum),
            }],
        };
        let p = pullback(&s, &pi);
        assert!(p
            .phi
            .atoms()
            .contains(&Atom::DerivedNonZero { func: DerivedFn::Sum, key: k("values") }));
    }

    #[test]
    fn pullback_along_identity_is_identity() {
        let s = Section::new(Carrier::Int, int_range("x", -2, 7));
        let pi = Projection::identity([k("x")]);
        assert_eq!(pullback(&s, &pi), s);
    }

    #[test]
    fn sum_entailment_detects_possible_zero() {
        // Nonnegative elements with possibly-zero length do NOT entail
        // sum != 0 (the empty list makes the sum zero).
        let claims = Predicate::from_atoms([
            Atom::ElemRange { key: k("values"), lo: End::fin(0), hi: End::PosInf },
            Atom::LenRange { key: k("values"), lo: 0, hi: End::PosInf },
        ]);
        let req =
            Predicate::atom(Atom::DerivedNonZero { func: DerivedFn::Sum, key: k("values") });
        assert!(!leq(&req, &claims));
        // Positive elements with length >= 1 do entail it.
        let strong = Predicate::from_atoms([
            Atom::ElemRange { key: k("values"), lo: End::fin(1), hi: End::PosInf },
            Atom::LenRange { key: k("values"), lo: 1, hi: End::PosInf },
        ]);
        assert!(leq(&req, &strong));
    }

    #[test]
    fn lattice_height_counts() {
        let empty_pool: BTreeSet<i64> = BTreeSet::new();
        assert_eq!(atom_universe_size(0, 0, &empty_pool) + 1, 1 + 0);
        assert_eq!(lattice_height(0, 0, &empty_pool), 1);
        // A universe of 4 atoms has height 5; emulate by checking the +1 law.
        let pool = constant_pool(&BTreeSet::from([0]));
        let sz = atom_universe_size(1, 0, &pool);
        assert_eq!(lattice_height(1, 0, &pool), sz + 1);
    }

    #[test]
    fn constant_pool_closure() {
        let pool = constant_pool(&BTreeSet::from([5]));
        for c in [0, 1, 2, 4, 5, 6, -1] {
            assert!(pool.contains(&c), "pool missing {c}");
        }
    }
}

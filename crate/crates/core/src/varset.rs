//! Variable sets as machine-word bitmasks over an ordered universe.

use std::fmt;

/// Hard cap on the number of variables in one universe.
pub const MAX_VARS: usize = 30;

/// Index of a variable in its universe.
pub type Var = usize;

/// A subset of the variable universe, one bit per variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub const fn from_bits(bits: u32) -> VarSet {
        VarSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(v: Var) -> VarSet {
        debug_assert!(v < MAX_VARS);
        VarSet(1 << v)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> VarSet {
        debug_assert!(n <= MAX_VARS);
        if n == 0 {
            VarSet(0)
        } else {
            VarSet(u32::MAX >> (32 - n))
        }
    }

    pub fn from_vars<I: IntoIterator<Item = Var>>(vars: I) -> VarSet {
        vars.into_iter().fold(VarSet::EMPTY, |s, v| s.with(v))
    }

    pub fn with(self, v: Var) -> VarSet {
        VarSet(self.0 | (1 << v))
    }

    pub fn contains(self, v: Var) -> bool {
        v < 32 && self.0 & (1 << v) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersect(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn minus(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = Var> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    /// Position of `v` among the members of `self`, i.e. its column in a tuple
    /// laid out over this set.
    pub fn position(self, v: Var) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        Some((self.0 & ((1u32 << v) - 1)).count_ones() as usize)
    }

    /// Column indices (into a tuple over `self`) of the members of `sub`.
    pub fn positions_of(self, sub: VarSet) -> Vec<usize> {
        debug_assert!(sub.is_subset(self));
        sub.iter().map(|v| self.position(v).unwrap()).collect()
    }

    /// All subsets of `self`, including the empty set and `self`, in
    /// increasing numeric order.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let mask = self.0;
        let mut cur: Option<u32> = Some(0);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == mask { None } else { Some((s.wrapping_sub(mask)) & mask) };
            Some(VarSet(s))
        })
    }

    /// Render using a name table, e.g. `XYZ` or `{x,y}` when names are long.
    pub fn display<'a>(self, names: &'a [String]) -> VarSetDisplay<'a> {
        VarSetDisplay { set: self, names }
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

pub struct VarSetDisplay<'a> {
    set: VarSet,
    names: &'a [String],
}

impl fmt::Display for VarSetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = self.set.iter().all(|v| self.names.get(v).is_some_and(|n| n.chars().count() == 1));
        if short && !self.set.is_empty() {
            for v in self.set.iter() {
                write!(f, "{}", self.names[v])?;
            }
            return Ok(());
        }
        write!(f, "{{")?;
        for (i, v) in self.set.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match self.names.get(v) {
                Some(n) => write!(f, "{n}")?,
                None => write!(f, "v{v}")?,
            }
        }
        write!(f, "}}")
    }
}

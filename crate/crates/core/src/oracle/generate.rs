use crate::query::{Instance, Schema, StatisticsProfile};
use crate::relation::{Table, Tuple, Value};
use crate::varset::VarSet;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    /// Values are drawn from `0..domain`.
    pub domain: u32,
    /// Distinct rows wanted per relation. Generation gives up after
    /// `ATTEMPTS_PER_ROW * tuples` draws, so small domains, heavy skew or
    /// tight constraints can leave relations smaller.
    pub tuples: usize,
}

/// Seeded random instances. With `skew = p` each value is `0` with
/// probability `p` and uniform otherwise, so large `p` creates heavy
/// hitters.
#[derive(Clone, Debug)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub shape: Shape,
    pub skew: f64,
}

pub const ATTEMPTS_PER_ROW: usize = 50;

struct Tracker {
    keys: Vec<usize>,
    vals: Vec<usize>,
    bound: u64,
    seen: HashMap<Tuple, HashSet<Tuple>>,
}

impl Tracker {
    fn admits(&self, row: &[Value]) -> bool {
        let k: Tuple = self.keys.iter().map(|&p| row[p]).collect();
        let v: Tuple = self.vals.iter().map(|&p| row[p]).collect();
        match self.seen.get(&k) {
            Some(s) => s.contains(&v) || (s.len() as u64) < self.bound,
            None => self.bound >= 1,
        }
    }

    fn add(&mut self, row: &[Value]) {
        let k: Tuple = self.keys.iter().map(|&p| row[p]).collect();
        let v: Tuple = self.vals.iter().map(|&p| row[p]).collect();
        self.seen.entry(k).or_default().insert(v);
    }
}

impl InstanceGenerator {
    pub fn new(seed: u64, domain: u32, tuples: usize, skew: f64) -> InstanceGenerator {
        InstanceGenerator { seed, shape: Shape { domain, tuples }, skew }
    }

    fn value(&self, rng: &mut ChaCha8Rng) -> Value {
        if self.skew > 0.0 && rng.gen_bool(self.skew.min(1.0)) {
            0
        } else {
            rng.gen_range(0..self.shape.domain.max(1))
        }
    }

    /// Independent relations for every atom of `schema`.
    pub fn generate(&self, schema: &Schema) -> Instance {
        self.generate_within(schema, &StatisticsProfile::new(Vec::new()))
    }

    /// Like [`generate`](Self::generate), but a row is skipped when adding
    /// it would break a constraint of `profile` on its relation. Every
    /// constraint must be guarded by its atom.
    pub fn generate_within(&self, schema: &Schema, profile: &StatisticsProfile) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut tables = Vec::with_capacity(schema.len());
        for (i, atom) in schema.atoms().iter().enumerate() {
            let vars = atom.vars;
            let mut trackers: Vec<Tracker> = profile
                .constraints
                .iter()
                .filter(|c| c.guard == i)
                .map(|c| {
                    let keys = c.x.intersect(vars);
                    let vals: VarSet = c.y.minus(keys);
                    Tracker { keys: vars.positions_of(keys), vals: vars.positions_of(vals), bound: c.bound.to_u64().unwrap_or(u64::MAX), seen: HashMap::new() }
                })
                .collect();
            let mut rows: Vec<Tuple> = Vec::new();
            let mut have: HashSet<Tuple> = HashSet::new();
            for _ in 0..self.shape.tuples * ATTEMPTS_PER_ROW {
                if rows.len() == self.shape.tuples {
                    break;
                }
                let row: Tuple = (0..vars.len()).map(|_| self.value(&mut rng)).collect();
                if have.contains(&row) || !trackers.iter().all(|t| t.admits(&row)) {
                    continue;
                }
                trackers.iter_mut().for_each(|t| t.add(&row));
                have.insert(row.clone());
                rows.push(row);
            }
            tables.push(Table::new(vars, rows));
        }
        Instance::new(schema.clone(), tables).expect("tables follow the schema")
    }
}

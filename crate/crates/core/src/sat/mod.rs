//! MAX k-SAT instances: representation, seeded generation, evaluation and
//! exhaustive solving.
//!
//! Variables are 0-indexed internally. An assignment packed into an integer
//! stores variable `i` in bit `i` (variable 0 is the least significant bit),
//! which is the same convention the simulators use for qubits.

mod dimacs;

pub use dimacs::{emit_dimacs, parse_dimacs};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Default enumeration guard for [`brute_force_optimum`].
pub const BRUTE_FORCE_LIMIT: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub variable: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(variable: usize) -> Self {
        Self {
            variable,
            negated: false,
        }
    }

    pub fn negative(variable: usize) -> Self {
        Self {
            variable,
            negated: true,
        }
    }

    /// DIMACS-style signed, 1-indexed literal.
    pub fn to_dimacs(self) -> i64 {
        let v = self.variable as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 {
            return None;
        }
        Some(Self {
            variable: (lit.unsigned_abs() - 1) as usize,
            negated: lit < 0,
        })
    }

    pub fn is_true(self, value: bool) -> bool {
        value != self.negated
    }
}

/// A disjunction of literals over pairwise distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::InvalidParameters("empty clause".into()));
        }
        for (i, a) in literals.iter().enumerate() {
            if literals[..i].iter().any(|b| b.variable == a.variable) {
                return Err(Error::InvalidParameters(format!(
                    "variable {} appears twice in one clause",
                    a.variable
                )));
            }
        }
        Ok(Self { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    /// Bitmask of the variables this clause touches.
    pub fn mask(&self) -> u64 {
        self.literals
            .iter()
            .fold(0, |acc, l| acc | (1u64 << l.variable))
    }

    /// The single local assignment that falsifies every literal, packed on
    /// the clause's own variable positions (see [`Clause::mask`]).
    pub fn unsat_bits(&self) -> u64 {
        self.literals
            .iter()
            .filter(|l| l.negated)
            .fold(0, |acc, l| acc | (1u64 << l.variable))
    }

    pub fn is_satisfied_by_index(&self, x: u64) -> bool {
        x & self.mask() != self.unsat_bits()
    }

    pub fn is_satisfied(&self, x: &Assignment) -> bool {
        self.literals
            .iter()
            .any(|l| l.is_true(x.bits[l.variable]))
    }
}

/// The unique pattern over the clause's variables (in literal order) making
/// the clause false: 1 where the literal is negated, 0 where it is positive.
pub fn clause_unsat_pattern(clause: &Clause) -> Vec<(usize, bool)> {
    clause
        .literals()
        .iter()
        .map(|l| (l.variable, l.negated))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_index(x: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| (x >> i) & 1 == 1).collect(),
        }
    }

    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl From<&[u8]> for Assignment {
    /// `[x0, x1, ...]` with 0/1 entries, in variable order.
    fn from(v: &[u8]) -> Self {
        Self {
            bits: v.iter().map(|&b| b != 0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSatInstance {
    n: usize,
    k: usize,
    clauses: Vec<Clause>,
    seed: Option<u64>,
}

impl KSatInstance {
    pub fn new(n: usize, k: usize, clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::InvalidParameters(
                "instance needs at least one clause".into(),
            ));
        }
        if n > 63 {
            return Err(Error::TooLarge {
                what: "variable count",
                size: n,
                limit: 63,
            });
        }
        for c in &clauses {
            if c.width() != k {
                return Err(Error::UnsupportedWidth {
                    first: k,
                    other: c.width(),
                });
            }
            if let Some(l) = c.literals().iter().find(|l| l.variable >= n) {
                return Err(Error::InvalidParameters(format!(
                    "literal references variable {} but n = {n}",
                    l.variable
                )));
            }
        }
        Ok(Self {
            n,
            k,
            clauses,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Content hash over `n`, `k` and the clause list; independent of the seed.
    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{} {}\n", self.n, self.k));
        for c in &self.clauses {
            for l in c.literals() {
                hasher.update(format!("{} ", l.to_dimacs()));
            }
            hasher.update("0\n");
        }
        let digest = hasher.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of satisfied clauses, `C(x)`.
    pub fn evaluate(&self, x: &Assignment) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::InvalidAssignment {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.clauses.iter().filter(|c| c.is_satisfied(x)).count())
    }

    /// `C(x)` for an assignment packed into the low `n` bits of `x`.
    pub fn evaluate_index(&self, x: u64) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.is_satisfied_by_index(x))
            .count()
    }

    /// Mean of `C` over all assignments, `m (1 - 2^-k)`.
    pub fn uniform_mean(&self) -> f64 {
        self.m() as f64 * (1.0 - 0.5f64.powi(self.k as i32))
    }

    pub fn to_json(&self) -> InstanceJson {
        InstanceJson {
            n: self.n,
            k: self.k,
            seed: self.seed,
            clauses: self
                .clauses
                .iter()
                .map(|c| c.literals().iter().map(|l| l.to_dimacs()).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &InstanceJson) -> Result<Self> {
        let clauses = j
            .clauses
            .iter()
            .map(|lits| {
                let lits = lits
                    .iter()
                    .map(|&l| {
                        Literal::from_dimacs(l).ok_or_else(|| {
                            Error::InvalidParameters("literal 0 in clause list".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Clause::new(lits)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(j.n, j.k, clauses)?.with_seed(j.seed))
    }
}

/// Instance interchange format; literals are DIMACS-style signed, 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub clauses: Vec<Vec<i64>>,
}

/// Random k-SAT with `round(density * n)` clauses. Each clause picks `k`
/// distinct variables uniformly without replacement and independent fair
/// polarities. Duplicate clauses are allowed.
pub fn generate_random_ksat(n: usize, k: usize, density: f64, seed: u64) -> Result<KSatInstance> {
    if k == 0 {
        return Err(Error::InvalidParameters("k must be positive".into()));
    }
    if n < k {
        return Err(Error::InvalidParameters(format!("n < k ({n} < {k})")));
    }
    if !(density.is_finite() && density > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "density must be positive, got {density}"
        )));
    }
    let m = (density * n as f64).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameters(format!(
            "round({density} * {n}) = 0 clauses"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            let vars = index::sample(&mut rng, n, k);
            let lits = vars
                .iter()
                .map(|v| Literal {
                    variable: v,
                    negated: rng.random_bool(0.5),
                })
                .collect();
            Clause::new(lits)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KSatInstance::new(n, k, clauses)?.with_seed(Some(seed)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub c_opt: usize,
    pub optima: Vec<Assignment>,
}

pub fn brute_force_optimum(instance: &KSatInstance) -> Result<Optimum> {
    brute_force_optimum_with_limit(instance, BRUTE_FORCE_LIMIT)
}

/// Exhaustive maximum of `C` over all `2^n` assignments together with the
/// full argmax set, ordered by packed index.
pub fn brute_force_optimum_with_limit(instance: &KSatInstance, limit: usize) -> Result<Optimum> {
    let n = instance.n();
    if n > limit {
        return Err(Error::TooLarge {
            what: "brute-force variable count",
            size: n,
            limit,
        });
    }
    let masks: Vec<(u64, u64)> = instance
        .clauses()
        .iter()
        .map(|c| (c.mask(), c.unsat_bits()))
        .collect();
    let mut best = 0usize;
    let mut argmax = Vec::new();
    for x in 0..(1u64 << n) {
        let c = masks.iter().filter(|&&(m, u)| x & m != u).count();
        if c > best {
            best = c;
            argmax.clear();
        }
        if c == best {
            argmax.push(x);
        }
    }
    Ok(Optimum {
        c_opt: best,
        optima: argmax
            .into_iter()
            .map(|x| Assignment::from_index(x, n))
            .collect(),
    })
}

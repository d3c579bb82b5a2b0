//! Finite-support probability distributions on types and type-action pairs.
//!
//! Types are indexed `0..num_types`, actions `0..num_actions`. A
//! [`TypeActionDistribution`] is a dense row-major mass matrix; when it is
//! the empirical distribution of `n` players it additionally carries the
//! exact integer counts, so that lattice membership (every entry a multiple
//! of `1/n`) is exact rather than a floating-point approximation.
//!
//! All rate values are natural-log based (nats).

use crate::error::{Error, Result};

/// Sum tolerance for accepting a vector as a probability distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Mass threshold below which a pair is treated as outside the support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// A probability distribution over the finite type set.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    weights: Vec<f64>,
}

impl TypeDistribution {
    /// Validates non-negativity and total mass `1 ± 1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("type weights"));
        }
        if let Some(&w) = weights.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or NaN weight {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Normalizes arbitrary non-negative weights to a distribution.
    pub fn from_weights(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput("type weights"));
        }
        if let Some(&w) = raw.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or NaN weight {w}"
            )));
        }
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("all weights zero".into()));
        }
        Self::new(raw.iter().map(|w| w / sum).collect())
    }

    /// Point mass on a single type.
    pub fn point_mass(num_types: usize, type_idx: usize) -> Self {
        let mut weights = vec![0.0; num_types];
        weights[type_idx] = 1.0;
        Self { weights }
    }

    pub fn uniform(num_types: usize) -> Self {
        Self {
            weights: vec![1.0 / num_types as f64; num_types],
        }
    }

    /// Empirical distribution of a type vector.
    pub fn from_type_vector(num_types: usize, types: &[usize]) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::EmptyInput("type vector"));
        }
        let n = types.len() as f64;
        let mut weights = vec![0.0; num_types];
        for &w in types {
            weights[w] += 1.0 / n;
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, type_idx: usize) -> f64 {
        self.weights[type_idx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `λ ≪ λ0`: no mass where `other` has none.
    pub fn absolutely_continuous_wrt(&self, other: &TypeDistribution) -> bool {
        self.weights
            .iter()
            .zip(&other.weights)
            .all(|(&a, &b)| a <= SUPPORT_EPS || b > 0.0)
    }
}

/// Relative entropy `H(λ | λ0) = Σ λ(w) ln(λ(w)/λ0(w))` in nats.
///
/// Uses the conventions `0·ln 0 = 0` and `H = ∞` when `λ` is not absolutely
/// continuous with respect to `λ0`. Always `≥ 0`, zero iff the inputs agree.
pub fn relative_entropy(lam: &TypeDistribution, lam0: &TypeDistribution) -> f64 {
    assert_eq!(
        lam.len(),
        lam0.len(),
        "relative entropy needs a common type set"
    );
    let mut acc = 0.0;
    for (&p, &q) in lam.weights.iter().zip(&lam0.weights) {
        if p <= 0.0 {
            continue;
        }
        if q <= 0.0 {
            return f64::INFINITY;
        }
        acc += p * (p / q).ln();
    }
    acc.max(0.0)
}

/// Binary relative entropy `KL(p ‖ q)` of Bernoulli parameters, in nats.
pub fn binary_relative_entropy(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| {
        if a <= 0.0 {
            0.0
        } else if b <= 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}

/// Exact integer counts backing an empirical distribution of `n` players.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCounts {
    pub denominator: u64,
    pub counts: Vec<u64>,
}

/// A probability distribution on the type-action grid.
///
/// Mass is stored dense row-major `(type, action)`. If the distribution lies
/// on the empirical lattice `E_{1/n}` the exact counts are kept alongside;
/// the float view is always `count / n` for those.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeActionDistribution {
    num_types: usize,
    num_actions: usize,
    mass: Vec<f64>,
    lattice: Option<LatticeCounts>,
}

impl TypeActionDistribution {
    /// Builds from a dense row-major mass matrix, validating the invariants.
    pub fn from_mass(num_types: usize, num_actions: usize, mass: Vec<f64>) -> Result<Self> {
        if num_types == 0 || num_actions == 0 {
            return Err(Error::EmptyInput("type-action grid"));
        }
        if mass.len() != num_types * num_actions {
            return Err(Error::LengthMismatch(mass.len(), num_types * num_actions));
        }
        if let Some(&v) = mass.iter().find(|&&v| !(v >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "negative or NaN mass {v}"
            )));
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mass sums to {sum}, expected 1"
            )));
        }
        Ok(Self {
            num_types,
            num_actions,
            mass,
            lattice: None,
        })
    }

    /// Builds an empirical-lattice distribution from integer pair counts.
    pub fn from_counts(num_types: usize, num_actions: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != num_types * num_actions {
            return Err(Error::LengthMismatch(
                counts.len(),
                num_types * num_actions,
            ));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptyInput("empirical counts"));
        }
        let mass = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Self {
            num_types,
            num_actions,
            mass,
            lattice: Some(LatticeCounts {
                denominator: n,
                counts,
            }),
        })
    }

    /// Empirical distribution `(1/n) Σ δ_{(w_k, x_k)}`.
    pub fn empirical(
        num_types: usize,
        num_actions: usize,
        types: &[usize],
        actions: &[usize],
    ) -> Result<Self> {
        if types.len() != actions.len() {
            return Err(Error::LengthMismatch(types.len(), actions.len()));
        }
        if types.is_empty() {
            return Err(Error::EmptyInput("empirical sample"));
        }
        let mut counts = vec![0u64; num_types * num_actions];
        for (&w, &x) in types.iter().zip(actions) {
            if w >= num_types || x >= num_actions {
                return Err(Error::InvalidDistribution(format!(
                    "pair ({w},{x}) outside the {num_types}x{num_actions} grid"
                )));
            }
            counts[w * num_actions + x] += 1;
        }
        Self::from_counts(num_types, num_actions, counts)
    }

    pub fn point_mass(num_types: usize, num_actions: usize, w: usize, x: usize) -> Self {
        let mut counts = vec![0u64; num_types * num_actions];
        counts[w * num_actions + x] = 1;
        Self::from_counts(num_types, num_actions, counts).expect("valid point mass")
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, w: usize, x: usize) -> f64 {
        self.mass[w * self.num_actions + x]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Lattice denominator `n`, when this is an empirical distribution.
    pub fn denominator(&self) -> Option<u64> {
        self.lattice.as_ref().map(|l| l.denominator)
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.lattice.as_ref().map(|l| l.counts.as_slice())
    }

    /// First marginal `m^w` (row sums).
    pub fn marginal_type(&self) -> TypeDistribution {
        let weights = (0..self.num_types)
            .map(|w| {
                self.mass[w * self.num_actions..(w + 1) * self.num_actions]
                    .iter()
                    .sum()
            })
            .collect();
        TypeDistribution { weights }
    }

    /// Second marginal `m^x` (column sums).
    pub fn marginal_action(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_actions];
        for w in 0..self.num_types {
            for x in 0..self.num_actions {
                out[x] += self.get(w, x);
            }
        }
        out
    }

    /// Mass of a single action column, `m^x{x}`.
    pub fn action_mass(&self, x: usize) -> f64 {
        (0..self.num_types).map(|w| self.get(w, x)).sum()
    }

    /// Support pairs with mass above [`SUPPORT_EPS`].
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let na = self.num_actions;
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > SUPPORT_EPS)
            .map(move |(i, _)| (i / na, i % na))
    }

    /// The measure `m + u(δ_{(w,y)} − δ_{(w,x)})` describing one agent of
    /// size `u` switching from `x` to `y`. Exact on the lattice when
    /// `u = 1/n`; otherwise a float shift with the donor entry clamped at 0.
    pub fn shifted(&self, u: f64, w: usize, x: usize, y: usize) -> Self {
        let mut out = self.clone();
        out.shift_in_place(u, w, x, y);
        out
    }

    /// In-place version of [`Self::shifted`], for hot loops; callers revert
    /// with the opposite shift.
    pub(crate) fn shift_in_place(&mut self, u: f64, w: usize, x: usize, y: usize) {
        if x == y || u == 0.0 {
            return;
        }
        let from = w * self.num_actions + x;
        let to = w * self.num_actions + y;
        let exact = match &mut self.lattice {
            Some(l) => {
                let n = l.denominator;
                // One lattice player moving is exactly u = 1/n.
                if (u * n as f64 - 1.0).abs() < 1e-9 && l.counts[from] >= 1 {
                    l.counts[from] -= 1;
                    l.counts[to] += 1;
                    self.mass[from] = l.counts[from] as f64 / n as f64;
                    self.mass[to] = l.counts[to] as f64 / n as f64;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if !exact {
            self.lattice = None;
            self.mass[from] = (self.mass[from] - u).max(0.0);
            self.mass[to] += u;
        }
    }

    /// Convex combination `(1−t)·self + t·other`; drops lattice tracking.
    pub fn blend(&self, other: &Self, t: f64) -> Result<Self> {
        self.check_shape(other)?;
        let mass = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(&a, &b)| (1.0 - t) * a + t * b)
            .collect();
        Ok(Self {
            num_types: self.num_types,
            num_actions: self.num_actions,
            mass,
            lattice: None,
        })
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.num_types != other.num_types || self.num_actions != other.num_actions {
            return Err(Error::ShapeMismatch(
                self.num_types,
                self.num_actions,
                other.num_types,
                other.num_actions,
            ));
        }
        Ok(())
    }

    /// Total variation distance `(1/2) Σ |m1 − m2|`.
    pub fn tv_distance(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        let l1: f64 = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        Ok(0.5 * l1)
    }
}

/// Infimum of [`TypeActionDistribution::tv_distance`] over a finite
/// candidate set.
pub fn set_distance(m: &TypeActionDistribution, set: &[TypeActionDistribution]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyInput("candidate set"));
    }
    let mut best = f64::INFINITY;
    for s in set {
        best = best.min(m.tv_distance(s)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> TypeDistribution {
        TypeDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn marginals_of_point_mass() {
        let m = TypeActionDistribution::point_mass(2, 2, 0, 1);
        assert_eq!(m.marginal_type().weights(), &[1.0, 0.0]);
        assert_eq!(m.marginal_action(), vec![0.0, 1.0]);
        assert_eq!(m.denominator(), Some(1));
    }

    #[test]
    fn marginals_of_entry_game_half() {
        // Equilibrium matrix at q = 1/2: rows ((1/2, 0), (0, 1/2)).
        let m = TypeActionDistribution::from_mass(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(m.marginal_type().weights(), &[0.5, 0.5]);
        assert_eq!(m.marginal_action(), vec![0.5, 0.5]);
    }

    #[test]
    fn marginals_of_uniform() {
        let m = TypeActionDistribution::from_mass(2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(m.marginal_type().weights(), &[0.5, 0.5]);
    }

    #[test]
    fn action_marginal_entry_game_quarter() {
        // q = 1/4 equilibrium: rows ((2/3, 1/12), (0, 1/4)); m^x{1} = 1/3.
        let m =
            TypeActionDistribution::from_mass(2, 2, vec![2.0 / 3.0, 1.0 / 12.0, 0.0, 0.25])
                .unwrap();
        assert!((m.action_mass(1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_identity_is_zero() {
        let l = dist(&[2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(relative_entropy(&l, &l), 0.0);
    }

    #[test]
    fn relative_entropy_point_vs_uniform() {
        let p = dist(&[1.0, 0.0]);
        let u = dist(&[0.5, 0.5]);
        assert!((relative_entropy(&p, &u) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_closed_form() {
        // H((1/2,1/2) | (2/3,1/3)) = 0.5 ln(3/4) + 0.5 ln(3/2).
        let l = dist(&[0.5, 0.5]);
        let l0 = dist(&[2.0 / 3.0, 1.0 / 3.0]);
        let expected = 0.5 * (0.75f64).ln() + 0.5 * (1.5f64).ln();
        assert!((relative_entropy(&l, &l0) - expected).abs() < 1e-15);
        assert!((expected - 0.058891517921827096).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_infinite_without_absolute_continuity() {
        let l = dist(&[0.5, 0.5]);
        let l0 = dist(&[1.0, 0.0]);
        assert!(relative_entropy(&l, &l0).is_infinite());
    }

    #[test]
    fn empirical_counts_are_exact() {
        let m = TypeActionDistribution::empirical(3, 2, &[1, 1, 2, 2], &[0, 1, 0, 1]).unwrap();
        assert_eq!(m.denominator(), Some(4));
        for &(w, x) in &[(1, 0), (1, 1), (2, 0), (2, 1)] {
            assert_eq!(m.get(w, x), 0.25);
        }
        let m = TypeActionDistribution::empirical(2, 2, &[1, 1, 1], &[0, 0, 1]).unwrap();
        assert!((m.get(1, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_rejects_bad_input() {
        assert!(matches!(
            TypeActionDistribution::empirical(2, 2, &[0, 1], &[0]),
            Err(Error::LengthMismatch(2, 1))
        ));
        assert!(matches!(
            TypeActionDistribution::empirical(2, 2, &[], &[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn tv_basics() {
        let a = TypeActionDistribution::point_mass(2, 2, 0, 0);
        let b = TypeActionDistribution::point_mass(2, 2, 1, 1);
        assert_eq!(a.tv_distance(&a).unwrap(), 0.0);
        assert_eq!(a.tv_distance(&b).unwrap(), 1.0);
    }

    #[test]
    fn tv_between_entry_equilibria() {
        // m_{1/3} = ((2/3,0),(0,1/3)), m_{1/2} = ((1/2,0),(0,1/2)): TV = 1/6.
        let a = TypeActionDistribution::from_mass(2, 2, vec![2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0])
            .unwrap();
        let b = TypeActionDistribution::from_mass(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((a.tv_distance(&b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn set_distance_basics() {
        let a = TypeActionDistribution::point_mass(2, 2, 0, 0);
        let b = TypeActionDistribution::point_mass(2, 2, 1, 1);
        let uniform = TypeActionDistribution::from_mass(2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(set_distance(&a, &[a.clone(), b.clone()]).unwrap(), 0.0);
        // TV(uniform, δ_{(0,0)}) = 3/4.
        assert_eq!(set_distance(&uniform, &[a]).unwrap(), 0.75);
        assert!(set_distance(&uniform, &[]).is_err());
    }

    #[test]
    fn shift_on_lattice_is_exact() {
        let m = TypeActionDistribution::empirical(2, 2, &[0, 0, 1], &[0, 0, 1]).unwrap();
        let s = m.shifted(1.0 / 3.0, 0, 0, 1);
        assert_eq!(s.counts().unwrap(), &[1, 1, 0, 1]);
        assert_eq!(s.denominator(), Some(3));
    }

    #[test]
    fn blend_drops_lattice_and_stays_valid() {
        let a = TypeActionDistribution::point_mass(2, 2, 0, 0);
        let b = TypeActionDistribution::point_mass(2, 2, 1, 1);
        let c = a.blend(&b, 0.25).unwrap();
        assert!(c.denominator().is_none());
        assert!((c.get(0, 0) - 0.75).abs() < 1e-15);
        assert!((c.get(1, 1) - 0.25).abs() < 1e-15);
    }
}

//! The abstract anonymous game: objective `F`, constraint map `C`, the
//! deviation-gain function `G`, Cournot-Nash certification, and a brute-force
//! equilibrium enumerator for tiny games.
//!
//! A distribution `m` is a Cournot-Nash equilibrium when, for `m`-almost
//! every pair `(w, x)`, the action `x` is admissible for `w` and attains
//! `inf_{y ∈ C(w)} F(m, w, y)`. The same `G`-based condition with deviator
//! size `u = 1/n` characterizes `n`-player Nash profiles through their
//! empirical distributions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{TypeActionDistribution, TypeDistribution, SUPPORT_EPS};
use crate::stats;

/// Objective signature: `F(m, w, x)`, finite for all valid inputs, and pure
/// so that it can be evaluated concurrently.
pub type Objective = Arc<dyn Fn(&TypeActionDistribution, usize, usize) -> f64 + Send + Sync>;

/// A finite anonymous game.
#[derive(Clone)]
pub struct GameSpec {
    num_types: usize,
    num_actions: usize,
    constraints: Vec<Vec<usize>>,
    objective: Objective,
}

impl std::fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameSpec")
            .field("num_types", &self.num_types)
            .field("num_actions", &self.num_actions)
            .field("constraints", &self.constraints)
            .finish_non_exhaustive()
    }
}

impl GameSpec {
    /// Builds a game; every constraint list must be a nonempty set of valid
    /// action indices (sorted, deduplicated here).
    pub fn new(
        num_types: usize,
        num_actions: usize,
        constraints: Vec<Vec<usize>>,
        objective: Objective,
    ) -> Result<Self> {
        if constraints.len() != num_types {
            return Err(Error::LengthMismatch(constraints.len(), num_types));
        }
        let mut cleaned = Vec::with_capacity(num_types);
        for (w, list) in constraints.into_iter().enumerate() {
            if list.is_empty() {
                return Err(Error::InvalidDistribution(format!(
                    "constraint set for type {w} is empty"
                )));
            }
            if let Some(&x) = list.iter().find(|&&x| x >= num_actions) {
                return Err(Error::InadmissibleAction { type_idx: w, action: x });
            }
            let mut list = list;
            list.sort_unstable();
            list.dedup();
            cleaned.push(list);
        }
        Ok(Self {
            num_types,
            num_actions,
            constraints: cleaned,
            objective,
        })
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Admissible actions `C(w)`, sorted ascending.
    pub fn admissible(&self, type_idx: usize) -> &[usize] {
        &self.constraints[type_idx]
    }

    pub fn is_admissible(&self, type_idx: usize, action: usize) -> bool {
        self.constraints[type_idx].binary_search(&action).is_ok()
    }

    pub fn objective(&self, m: &TypeActionDistribution, w: usize, x: usize) -> f64 {
        (self.objective)(m, w, x)
    }
}

/// Deviation gain `G(m, u, w, x) = F(m,w,x) − inf_y F(m + u(δ_{(w,y)} −
/// δ_{(w,x)}), w, y)`.
///
/// Always `≥ 0` up to rounding, since `y = x` leaves `m` unchanged. For
/// `u > 0` the pair `(w, x)` must carry mass at least `u`, otherwise the
/// shifted measure would not be a measure; this is reported as an error
/// because `G` at positive size is only meaningful on the empirical lattice.
pub fn deviation_gain(
    game: &GameSpec,
    m: &TypeActionDistribution,
    u: f64,
    w: usize,
    x: usize,
) -> Result<f64> {
    if !game.is_admissible(w, x) {
        return Err(Error::InadmissibleAction { type_idx: w, action: x });
    }
    if u > 0.0 {
        let mass = m.get(w, x);
        if mass + 1e-12 < u {
            return Err(Error::InsufficientMass {
                type_idx: w,
                action: x,
                mass,
                size: u,
            });
        }
    }
    let stay = game.objective(m, w, x);
    let mut best = f64::INFINITY;
    if u == 0.0 {
        for &y in game.admissible(w) {
            best = best.min(game.objective(m, w, y));
        }
    } else {
        let mut scratch = m.clone();
        for &y in game.admissible(w) {
            if y == x {
                best = best.min(stay);
                continue;
            }
            scratch.shift_in_place(u, w, x, y);
            best = best.min(game.objective(&scratch, w, y));
            scratch = m.clone();
        }
    }
    Ok(stay - best)
}

/// Outcome of a Cournot-Nash certification.
#[derive(Debug, Clone, Copy)]
pub struct CournotNashCheck {
    pub is_equilibrium: bool,
    /// Largest deviation gain over the support (`+∞` when some support pair
    /// is inadmissible).
    pub max_gain: f64,
}

/// Certifies the Cournot-Nash property at tolerance `tol`: every support
/// pair (mass `> 1e-12`) must be admissible and have `G(m, 0, w, x) ≤ tol`.
pub fn is_cournot_nash(game: &GameSpec, m: &TypeActionDistribution, tol: f64) -> CournotNashCheck {
    let mut max_gain: f64 = 0.0;
    for (w, x) in m.support() {
        if !game.is_admissible(w, x) {
            return CournotNashCheck {
                is_equilibrium: false,
                max_gain: f64::INFINITY,
            };
        }
        let gain = deviation_gain(game, m, 0.0, w, x).expect("admissible support pair");
        max_gain = max_gain.max(gain);
    }
    CournotNashCheck {
        is_equilibrium: max_gain <= tol,
        max_gain,
    }
}

/// The admissible set `A(λ) = {m : m^w = λ, m(Gr(C)) = 1}`, represented as
/// one scaled sub-simplex per type.
#[derive(Debug, Clone)]
pub struct AdmissibleSet {
    lambda: TypeDistribution,
    constraints: Vec<Vec<usize>>,
    num_actions: usize,
}

/// Builds the admissible set for a type distribution and constraint map.
pub fn admissible_project(
    lambda: &TypeDistribution,
    constraints: &[Vec<usize>],
    num_actions: usize,
) -> AdmissibleSet {
    AdmissibleSet {
        lambda: lambda.clone(),
        constraints: constraints.to_vec(),
        num_actions,
    }
}

impl AdmissibleSet {
    pub fn for_game(game: &GameSpec, lambda: &TypeDistribution) -> Self {
        admissible_project(lambda, &game.constraints, game.num_actions)
    }

    pub fn lambda(&self) -> &TypeDistribution {
        &self.lambda
    }

    pub fn num_types(&self) -> usize {
        self.lambda.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn admissible(&self, type_idx: usize) -> &[usize] {
        &self.constraints[type_idx]
    }

    /// The extreme point of `A(λ)` that, for each type, puts all mass
    /// `λ(w)` on the admissible action with the smallest score. Ties break
    /// to the lowest action index. This is the linear-minimization oracle of
    /// the nonatomic solver.
    pub fn vertex_for_scores(&self, scores: &[f64]) -> TypeActionDistribution {
        assert_eq!(scores.len(), self.num_types() * self.num_actions);
        let mut mass = vec![0.0; self.num_types() * self.num_actions];
        for w in 0..self.num_types() {
            let mut best = self.constraints[w][0];
            let mut best_score = scores[w * self.num_actions + best];
            for &x in &self.constraints[w][1..] {
                let s = scores[w * self.num_actions + x];
                if s < best_score {
                    best_score = s;
                    best = x;
                }
            }
            mass[w * self.num_actions + best] = self.lambda.weight(w);
        }
        TypeActionDistribution::from_mass(self.num_types(), self.num_actions, mass)
            .expect("vertex carries the full type mass")
    }

    /// The member of `A(λ)` that spreads each type uniformly over its
    /// admissible actions.
    pub fn uniform_point(&self) -> TypeActionDistribution {
        let mut mass = vec![0.0; self.num_types() * self.num_actions];
        for w in 0..self.num_types() {
            let share = self.lambda.weight(w) / self.constraints[w].len() as f64;
            for &x in &self.constraints[w] {
                mass[w * self.num_actions + x] = share;
            }
        }
        TypeActionDistribution::from_mass(self.num_types(), self.num_actions, mass)
            .expect("uniform point is a distribution")
    }

    /// A random member of `A(λ)` (per-type uniform Dirichlet weights).
    pub fn random_point<R: rand::Rng>(&self, rng: &mut R) -> TypeActionDistribution {
        let mut mass = vec![0.0; self.num_types() * self.num_actions];
        for w in 0..self.num_types() {
            let k = self.constraints[w].len();
            let mut draws: Vec<f64> = (0..k)
                .map(|_| -rng.gen_range(f64::MIN_POSITIVE..1.0f64).ln())
                .collect();
            let total: f64 = draws.iter().sum();
            for d in &mut draws {
                *d /= total;
            }
            for (&x, &d) in self.constraints[w].iter().zip(&draws) {
                mass[w * self.num_actions + x] = self.lambda.weight(w) * d;
            }
        }
        TypeActionDistribution::from_mass(self.num_types(), self.num_actions, mass)
            .expect("random point is a distribution")
    }

    /// Checks membership: type marginal matches `λ` and no mass sits on
    /// inadmissible pairs.
    pub fn contains(&self, m: &TypeActionDistribution, tol: f64) -> bool {
        if m.num_types() != self.num_types() || m.num_actions() != self.num_actions {
            return false;
        }
        let marg = m.marginal_type();
        for w in 0..self.num_types() {
            if (marg.weight(w) - self.lambda.weight(w)).abs() > tol {
                return false;
            }
        }
        m.support().all(|(w, x)| self.constraints[w].contains(&x))
    }
}

/// Hard cap on `|W|·|X|` for the brute-force enumerator.
pub const ENUMERATION_DIM_GUARD: usize = 12;
/// Cap on the number of grid points the enumerator will scan.
pub const ENUMERATION_POINT_GUARD: u128 = 1 << 25;

/// Exhaustive Cournot-Nash search on a small game by grid scan over `A(λ)`
/// plus local refinement.
///
/// The scan walks `A(λ)` at per-type simplex resolution `1/grid_steps`,
/// keeps every cell whose worst support-pair deviation gain is small, and
/// polishes each candidate by windowed coordinate descent on the violation.
/// Polished points are certified (max gain `≤ 1e-8`) and deduplicated at
/// pairwise TV `1e-6`.
///
/// This is an independent oracle: it never consults the potential structure
/// or any analytic solution.
pub fn enumerate_cournot_nash_bruteforce(
    game: &GameSpec,
    lambda: &TypeDistribution,
    grid_steps: u64,
) -> Result<Vec<TypeActionDistribution>> {
    let dim = game.num_types * game.num_actions;
    if dim > ENUMERATION_DIM_GUARD {
        return Err(Error::GuardExceeded(format!(
            "|W|*|X| = {dim} exceeds {ENUMERATION_DIM_GUARD}"
        )));
    }
    let set = AdmissibleSet::for_game(game, lambda);
    let mut total_points: u128 = 1;
    for w in 0..game.num_types {
        total_points = total_points.saturating_mul(stats::composition_count(
            grid_steps,
            set.admissible(w).len(),
        ));
    }
    if total_points > ENUMERATION_POINT_GUARD {
        return Err(Error::GuardExceeded(format!(
            "{total_points} grid points exceed {ENUMERATION_POINT_GUARD}"
        )));
    }

    // Violation of the equilibrium condition at m: the worst deviation gain
    // over the support (∞ never occurs: mass is only placed on admissible pairs).
    let violation = |m: &TypeActionDistribution| is_cournot_nash(game, m, 0.0).max_gain;

    let per_type_grids: Vec<Vec<Vec<u64>>> = (0..game.num_types)
        .map(|w| stats::compositions(grid_steps, set.admissible(w).len()))
        .collect();

    // Scan pass: record candidate cells and the objective scale.
    let mut scale: f64 = 1.0;
    let mut scan: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut indices = vec![0usize; game.num_types];
    loop {
        let m = grid_point(game, &set, &per_type_grids, &indices, grid_steps);
        let v = violation(&m);
        for (w, x) in m.support() {
            scale = scale.max(game.objective(&m, w, x).abs());
        }
        scan.push((indices.clone(), v));
        if !advance(&mut indices, &per_type_grids) {
            break;
        }
    }
    let threshold = (6.0 * scale / grid_steps as f64).max(1e-7);

    let mut found: Vec<TypeActionDistribution> = Vec::new();
    for (indices, v) in scan {
        if v > threshold {
            continue;
        }
        let m = grid_point(game, &set, &per_type_grids, &indices, grid_steps);
        let polished = if v <= 1e-10 {
            m
        } else {
            polish(game, &set, m, 2.5 / grid_steps as f64)
        };
        let pv = violation(&polished);
        if pv > 1e-8 {
            continue;
        }
        let is_new = found
            .iter()
            .all(|f| f.tv_distance(&polished).unwrap_or(1.0) > 1e-6);
        if is_new {
            found.push(polished);
        }
    }
    Ok(found)
}

fn grid_point(
    game: &GameSpec,
    set: &AdmissibleSet,
    grids: &[Vec<Vec<u64>>],
    indices: &[usize],
    grid_steps: u64,
) -> TypeActionDistribution {
    let mut mass = vec![0.0; game.num_types * game.num_actions];
    for w in 0..game.num_types {
        let comp = &grids[w][indices[w]];
        for (&x, &k) in set.admissible(w).iter().zip(comp) {
            mass[w * game.num_actions + x] =
                set.lambda().weight(w) * k as f64 / grid_steps as f64;
        }
    }
    TypeActionDistribution::from_mass(game.num_types, game.num_actions, mass)
        .expect("grid point is a distribution")
}

fn advance(indices: &mut [usize], grids: &[Vec<Vec<u64>>]) -> bool {
    for i in (0..indices.len()).rev() {
        indices[i] += 1;
        if indices[i] < grids[i].len() {
            return true;
        }
        indices[i] = 0;
    }
    false
}

/// Windowed coordinate descent on the violation. Each free coordinate is a
/// transfer of mass between two admissible actions of one type; the line
/// search stays within `window` (in type-mass fraction) of the incoming
/// point, so a candidate cell is refined toward the equilibrium in its own
/// neighborhood rather than escaping to a distant one.
fn polish(
    game: &GameSpec,
    set: &AdmissibleSet,
    start: TypeActionDistribution,
    window: f64,
) -> TypeActionDistribution {
    let na = game.num_actions;
    let mut mass = start.mass().to_vec();
    let violation_of = |mass: &[f64]| -> f64 {
        let m = TypeActionDistribution::from_mass(game.num_types, na, mass.to_vec())
            .expect("polish keeps mass valid");
        is_cournot_nash(game, &m, 0.0).max_gain
    };
    let mut current = violation_of(&mass);
    for _ in 0..50 {
        if current <= 1e-10 {
            break;
        }
        let before = current;
        for w in 0..game.num_types {
            let lam_w = set.lambda().weight(w);
            if lam_w <= 0.0 {
                continue;
            }
            let acts = set.admissible(w);
            for i in 0..acts.len() {
                for j in (i + 1)..acts.len() {
                    let (a, b) = (w * na + acts[i], w * na + acts[j]);
                    // Transfer t from a to b; t ∈ [-mass[b], mass[a]] ∩ window.
                    let lo = (-mass[b]).max(-window * lam_w);
                    let hi = mass[a].min(window * lam_w);
                    if hi - lo <= 1e-15 {
                        continue;
                    }
                    let (t, v) = stats::golden_section_min(
                        |t| {
                            let mut trial = mass.clone();
                            trial[a] -= t;
                            trial[b] += t;
                            violation_of(&trial)
                        },
                        lo,
                        hi,
                        1e-13,
                        120,
                    );
                    if v < current {
                        mass[a] -= t;
                        mass[b] += t;
                        // Snap tiny residue so support tests stay clean.
                        if mass[a] < 1e-13 {
                            mass[b] += mass[a];
                            mass[a] = 0.0;
                        }
                        if mass[b] < 1e-13 {
                            mass[a] += mass[b];
                            mass[b] = 0.0;
                        }
                        current = violation_of(&mass);
                    }
                }
            }
        }
        if before - current < 1e-14 {
            break;
        }
    }
    TypeActionDistribution::from_mass(game.num_types, na, mass)
        .expect("polished point is a distribution")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_game(num_types: usize, num_actions: usize) -> GameSpec {
        GameSpec::new(
            num_types,
            num_actions,
            vec![(0..num_actions).collect(); num_types],
            Arc::new(|_, _, _| 0.0),
        )
        .unwrap()
    }

    /// Two parallel edges, c1 ≡ 1 and c2(t) = t; single type.
    fn pigou_game() -> GameSpec {
        GameSpec::new(
            1,
            2,
            vec![vec![0, 1]],
            Arc::new(|m: &TypeActionDistribution, _w, x| {
                if x == 0 {
                    1.0
                } else {
                    m.action_mass(1)
                }
            }),
        )
        .unwrap()
    }

    #[test]
    fn gain_zero_for_singleton_constraint() {
        let game = GameSpec::new(
            1,
            2,
            vec![vec![1]],
            Arc::new(|_, _, _| 5.0),
        )
        .unwrap();
        let m = TypeActionDistribution::point_mass(1, 2, 0, 1);
        assert_eq!(deviation_gain(&game, &m, 0.0, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn gain_zero_for_pigou_both_on_congested_edge() {
        let game = pigou_game();
        let m = TypeActionDistribution::empirical(1, 2, &[0, 0], &[1, 1]).unwrap();
        // Staying costs c2(1) = 1; deviating yields c1 at load 1/2 = 1.
        let g = deviation_gain(&game, &m, 0.5, 0, 1).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gain_errors() {
        let game = GameSpec::new(1, 2, vec![vec![0]], Arc::new(|_, _, _| 0.0)).unwrap();
        let m = TypeActionDistribution::point_mass(1, 2, 0, 0);
        assert!(matches!(
            deviation_gain(&game, &m, 0.0, 0, 1),
            Err(Error::InadmissibleAction { .. })
        ));
        let game2 = constant_game(1, 2);
        assert!(matches!(
            deviation_gain(&game2, &m, 0.5, 0, 1),
            Err(Error::InsufficientMass { .. })
        ));
    }

    #[test]
    fn inadmissible_support_is_never_equilibrium() {
        let game = GameSpec::new(1, 2, vec![vec![0]], Arc::new(|_, _, _| 0.0)).unwrap();
        let m = TypeActionDistribution::point_mass(1, 2, 0, 1);
        let check = is_cournot_nash(&game, &m, 1e-9);
        assert!(!check.is_equilibrium);
        assert!(check.max_gain.is_infinite());
    }

    #[test]
    fn vertex_for_scores_picks_minimum_with_tie_break() {
        let set = admissible_project(&TypeDistribution::new(vec![1.0]).unwrap(), &[vec![0, 1, 2]], 3);
        let v = set.vertex_for_scores(&[2.0, 1.0, 3.0]);
        assert_eq!(v.get(0, 1), 1.0);
        // Pigou scores at loads (0, 1): both edges cost 1; tie-break keeps edge 0.
        let set2 = admissible_project(&TypeDistribution::new(vec![1.0]).unwrap(), &[vec![0, 1]], 2);
        let v2 = set2.vertex_for_scores(&[1.0, 1.0]);
        assert_eq!(v2.get(0, 0), 1.0);
    }

    #[test]
    fn vertex_respects_singleton_constraints() {
        let lam = TypeDistribution::new(vec![0.5, 0.5]).unwrap();
        let set = admissible_project(&lam, &[vec![1], vec![0]], 2);
        let v = set.vertex_for_scores(&[0.0, 9.0, 9.0, 0.0]);
        assert_eq!(v.get(0, 1), 0.5);
        assert_eq!(v.get(1, 0), 0.5);
    }

    #[test]
    fn vertex_is_extreme_point() {
        let lam = TypeDistribution::new(vec![0.25, 0.75]).unwrap();
        let set = admissible_project(&lam, &[vec![0, 1], vec![0, 1]], 2);
        let v = set.vertex_for_scores(&[0.3, 0.1, 0.9, 0.2]);
        for w in 0..2 {
            let carrying = (0..2).filter(|&x| v.get(w, x) > 0.0).count();
            assert_eq!(carrying, 1);
        }
    }

    #[test]
    fn enumerate_constant_objective_returns_every_grid_point() {
        let game = constant_game(1, 2);
        let lam = TypeDistribution::new(vec![1.0]).unwrap();
        let eq = enumerate_cournot_nash_bruteforce(&game, &lam, 10).unwrap();
        assert_eq!(eq.len(), 11);
    }

    #[test]
    fn enumerate_pigou_finds_the_unique_equilibrium() {
        let game = pigou_game();
        let lam = TypeDistribution::new(vec![1.0]).unwrap();
        let eq = enumerate_cournot_nash_bruteforce(&game, &lam, 200).unwrap();
        assert_eq!(eq.len(), 1);
        assert!((eq[0].get(0, 1) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn enumerate_guard_trips() {
        let game = constant_game(4, 4);
        let lam = TypeDistribution::uniform(4);
        assert!(matches!(
            enumerate_cournot_nash_bruteforce(&game, &lam, 10),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn random_points_live_in_the_admissible_set() {
        let lam = TypeDistribution::new(vec![0.3, 0.7]).unwrap();
        let set = admissible_project(&lam, &[vec![0, 2], vec![1]], 3);
        let mut rng = crate::stats::trial_rng(7, 0);
        for _ in 0..20 {
            let m = set.random_point(&mut rng);
            assert!(set.contains(&m, 1e-12));
        }
    }
}

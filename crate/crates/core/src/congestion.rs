//! Congestion games: elements with load-dependent cost curves, subset-valued
//! actions, the additive route objective, and the Beckmann potential whose
//! minimizers over `A(λ)` are exactly the Cournot-Nash equilibria.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::measures::{TypeActionDistribution, TypeDistribution};

/// A non-decreasing, non-negative cost curve on `[0, 1]` with a closed-form
/// antiderivative.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostCurve {
    Constant { value: f64 },
    /// `slope·t + intercept`.
    Linear { slope: f64, intercept: f64 },
    /// `Σ coeffs[k]·t^k` with all coefficients non-negative.
    Polynomial { coeffs: Vec<f64> },
    /// Increasing piecewise-linear interpolation of `(t, value)` knots; the
    /// knots must start at `t = 0` and cover `[0, 1]`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl CostCurve {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNetwork(msg));
        match self {
            CostCurve::Constant { value } => {
                if !(*value >= 0.0) {
                    return bad(format!("constant cost {value} is negative"));
                }
            }
            CostCurve::Linear { slope, intercept } => {
                if !(*slope >= 0.0) || !(*intercept >= 0.0) {
                    return bad(format!(
                        "linear cost {slope}t+{intercept} leaves [0,∞) on [0,1]"
                    ));
                }
            }
            CostCurve::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return bad("polynomial cost with no coefficients".into());
                }
                if coeffs.iter().any(|c| !(*c >= 0.0)) {
                    return bad("polynomial cost with a negative coefficient".into());
                }
            }
            CostCurve::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return bad("piecewise-linear cost needs at least two knots".into());
                }
                if knots[0].0 != 0.0 {
                    return bad("piecewise-linear knots must start at t = 0".into());
                }
                if knots.last().unwrap().0 < 1.0 {
                    return bad("piecewise-linear knots must cover [0, 1]".into());
                }
                for pair in knots.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return bad("piecewise-linear knots must have increasing t".into());
                    }
                    if pair[1].1 < pair[0].1 {
                        return bad("piecewise-linear cost must be non-decreasing".into());
                    }
                }
                if knots[0].1 < 0.0 {
                    return bad("piecewise-linear cost is negative at 0".into());
                }
            }
        }
        Ok(())
    }

    /// `c(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            CostCurve::Constant { value } => *value,
            CostCurve::Linear { slope, intercept } => slope * t + intercept,
            CostCurve::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
            CostCurve::PiecewiseLinear { knots } => {
                let (seg, frac) = Self::locate(knots, t);
                knots[seg].1 + frac * (knots[seg + 1].1 - knots[seg].1)
            }
        }
    }

    /// `∫_0^t c(s) ds`, in closed form.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self {
            CostCurve::Constant { value } => value * t,
            CostCurve::Linear { slope, intercept } => 0.5 * slope * t * t + intercept * t,
            CostCurve::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    acc = acc * t + c / (k as f64 + 1.0);
                }
                acc * t
            }
            CostCurve::PiecewiseLinear { knots } => {
                let (seg, _) = Self::locate(knots, t);
                let mut acc = 0.0;
                for i in 0..seg {
                    let dt = knots[i + 1].0 - knots[i].0;
                    acc += 0.5 * (knots[i].1 + knots[i + 1].1) * dt;
                }
                let dt = t - knots[seg].0;
                acc + 0.5 * (knots[seg].1 + self.value(t)) * dt
            }
        }
    }

    /// Right derivative `c'(t)`, used by the marginal-cost gradient.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            CostCurve::Constant { .. } => 0.0,
            CostCurve::Linear { slope, .. } => *slope,
            CostCurve::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * t + c * k as f64;
                }
                acc
            }
            CostCurve::PiecewiseLinear { knots } => {
                let (seg, _) = Self::locate(knots, t);
                (knots[seg + 1].1 - knots[seg].1) / (knots[seg + 1].0 - knots[seg].0)
            }
        }
    }

    /// Strictly increasing with a derivative defined everywhere on `(0, 1]`;
    /// the uniqueness span check requires this.
    pub fn is_strictly_increasing_differentiable(&self) -> bool {
        match self {
            CostCurve::Constant { .. } => false,
            CostCurve::Linear { slope, .. } => *slope > 0.0,
            CostCurve::Polynomial { coeffs } => coeffs.iter().skip(1).any(|&c| c > 0.0),
            CostCurve::PiecewiseLinear { .. } => false,
        }
    }

    /// `c(t) > 0` for all `t > 0`; the element-positivity condition behind
    /// price-of-anarchy denominators.
    pub fn positive_on_positive_loads(&self) -> bool {
        match self {
            CostCurve::Constant { value } => *value > 0.0,
            CostCurve::Linear { slope, intercept } => *intercept > 0.0 || *slope > 0.0,
            CostCurve::Polynomial { coeffs } => coeffs.iter().any(|&c| c > 0.0),
            CostCurve::PiecewiseLinear { knots } => knots[0].1 > 0.0 || knots[1].1 > 0.0,
        }
    }

    fn locate(knots: &[(f64, f64)], t: f64) -> (usize, f64) {
        let t = t.clamp(knots[0].0, knots.last().unwrap().0);
        let mut seg = knots.len() - 2;
        for i in 0..knots.len() - 1 {
            if t <= knots[i + 1].0 {
                seg = i;
                break;
            }
        }
        let dt = knots[seg + 1].0 - knots[seg].0;
        (seg, (t - knots[seg].0) / dt)
    }
}

/// Graph metadata used for route generation and path validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphMeta {
    pub vertices: Vec<String>,
    /// `(element index, from vertex, to vertex)`, aligned with the network's
    /// element list.
    pub arcs: Vec<(usize, usize, usize)>,
    /// One `(source, destination)` vertex pair per type.
    pub od_pairs: Vec<(usize, usize)>,
    pub max_hops: usize,
}

/// A congestion-game instance: elements with cost curves, actions stored as
/// bitsets over the elements, and per-type admissible action lists.
#[derive(Debug, Clone)]
pub struct CongestionNetwork {
    pub name: String,
    pub description: String,
    element_ids: Vec<String>,
    costs: Vec<CostCurve>,
    /// Element membership bitset per action.
    actions: Vec<u64>,
    type_names: Vec<String>,
    constraints: Vec<Vec<usize>>,
    graph: Option<GraphMeta>,
}

impl CongestionNetwork {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        description: String,
        element_ids: Vec<String>,
        costs: Vec<CostCurve>,
        action_sets: Vec<Vec<usize>>,
        type_names: Vec<String>,
        constraints: Vec<Vec<usize>>,
        graph: Option<GraphMeta>,
    ) -> Result<Self> {
        let ne = element_ids.len();
        if ne == 0 {
            return Err(Error::InvalidNetwork("no elements".into()));
        }
        if ne > 64 {
            return Err(Error::GuardExceeded(format!(
                "{ne} elements exceed the 64-element bitset"
            )));
        }
        if costs.len() != ne {
            return Err(Error::LengthMismatch(costs.len(), ne));
        }
        for c in &costs {
            c.validate()?;
        }
        if action_sets.is_empty() {
            return Err(Error::InvalidNetwork("no actions".into()));
        }
        let mut actions = Vec::with_capacity(action_sets.len());
        for set in &action_sets {
            if set.is_empty() {
                return Err(Error::InvalidNetwork("empty action subset".into()));
            }
            let mut bits = 0u64;
            for &e in set {
                if e >= ne {
                    return Err(Error::InvalidNetwork(format!(
                        "action references element {e}, only {ne} exist"
                    )));
                }
                bits |= 1 << e;
            }
            actions.push(bits);
        }
        if constraints.len() != type_names.len() {
            return Err(Error::LengthMismatch(constraints.len(), type_names.len()));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidNetwork("no types".into()));
        }
        for list in &constraints {
            if list.is_empty() {
                return Err(Error::InvalidNetwork("empty constraint set".into()));
            }
            if let Some(&x) = list.iter().find(|&&x| x >= actions.len()) {
                return Err(Error::InvalidNetwork(format!(
                    "constraint references action {x}, only {} exist",
                    actions.len()
                )));
            }
        }
        let net = Self {
            name,
            description,
            element_ids,
            costs,
            actions,
            type_names,
            constraints,
            graph,
        };
        if net.graph.is_some() {
            net.validate_paths()?;
        }
        Ok(net)
    }

    /// Checks, against the graph metadata, that every admissible action of
    /// every type is a simple directed path from that type's source to its
    /// destination.
    fn validate_paths(&self) -> Result<()> {
        let graph = self.graph.as_ref().expect("caller checked");
        if graph.od_pairs.len() != self.num_types() {
            return Err(Error::LengthMismatch(
                graph.od_pairs.len(),
                self.num_types(),
            ));
        }
        for (w, list) in self.constraints.iter().enumerate() {
            let (src, dst) = graph.od_pairs[w];
            for &x in list {
                let edges: Vec<usize> = self.action_elements(x).collect();
                if !is_simple_path(graph, &edges, src, dst) {
                    return Err(Error::InvalidNetwork(format!(
                        "action {x} is not a simple {src}->{dst} path for type {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.element_ids.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_types(&self) -> usize {
        self.constraints.len()
    }

    pub fn element_ids(&self) -> &[String] {
        &self.element_ids
    }

    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    pub fn cost(&self, element: usize) -> &CostCurve {
        &self.costs[element]
    }

    pub fn element_index(&self, id: &str) -> Result<usize> {
        self.element_ids
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    pub fn action_contains(&self, action: usize, element: usize) -> bool {
        self.actions[action] & (1 << element) != 0
    }

    pub fn action_elements(&self, action: usize) -> impl Iterator<Item = usize> + '_ {
        let bits = self.actions[action];
        (0..self.num_elements()).filter(move |e| bits & (1 << e) != 0)
    }

    /// Load `ℓ_e(m)`: total mass on pairs whose action contains `e`.
    /// Computed from exact integer counts when `m` is empirical.
    pub fn load(&self, m: &TypeActionDistribution, element: usize) -> f64 {
        self.loads(m)[element]
    }

    /// All element loads at once.
    pub fn loads(&self, m: &TypeActionDistribution) -> Vec<f64> {
        let ne = self.num_elements();
        let mut out = vec![0.0; ne];
        match m.counts() {
            Some(counts) => {
                let n = m.denominator().expect("counts imply a denominator") as f64;
                let mut acc = vec![0u64; ne];
                for w in 0..m.num_types() {
                    for x in 0..m.num_actions() {
                        let c = counts[w * m.num_actions() + x];
                        if c == 0 {
                            continue;
                        }
                        let bits = self.actions[x];
                        for (e, slot) in acc.iter_mut().enumerate() {
                            if bits & (1 << e) != 0 {
                                *slot += c;
                            }
                        }
                    }
                }
                for (e, slot) in acc.iter().enumerate() {
                    out[e] = *slot as f64 / n;
                }
            }
            None => {
                for w in 0..m.num_types() {
                    for x in 0..m.num_actions() {
                        let v = m.get(w, x);
                        if v == 0.0 {
                            continue;
                        }
                        let bits = self.actions[x];
                        for (e, slot) in out.iter_mut().enumerate() {
                            if bits & (1 << e) != 0 {
                                *slot += v;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `F(m, w, x) = Σ_{e ∈ x} c_e(ℓ_e(m))`; the type enters only through
    /// the constraints, not the value.
    pub fn objective(&self, m: &TypeActionDistribution, _w: usize, x: usize) -> f64 {
        let loads = self.loads(m);
        self.action_cost(&loads, x)
    }

    /// Route cost at precomputed loads.
    pub fn action_cost(&self, loads: &[f64], action: usize) -> f64 {
        self.action_elements(action)
            .map(|e| self.costs[e].value(loads[e]))
            .sum()
    }

    /// Beckmann potential `U(m) = Σ_e ∫_0^{ℓ_e(m)} c_e`, convex in `m`.
    pub fn potential(&self, m: &TypeActionDistribution) -> f64 {
        self.potential_at_loads(&self.loads(m))
    }

    pub fn potential_at_loads(&self, loads: &[f64]) -> f64 {
        loads
            .iter()
            .enumerate()
            .map(|(e, &l)| self.costs[e].antiderivative(l))
            .sum()
    }

    /// Gradient of `U` as a (type, action) matrix; entry `(w, x)` equals the
    /// objective `F(m, w, x)` — the exact identity behind the potential
    /// characterization of equilibria.
    pub fn potential_gradient(&self, m: &TypeActionDistribution) -> Vec<f64> {
        let loads = self.loads(m);
        let per_action: Vec<f64> = (0..self.num_actions())
            .map(|x| self.action_cost(&loads, x))
            .collect();
        let mut out = vec![0.0; self.num_types() * self.num_actions()];
        for w in 0..self.num_types() {
            out[w * self.num_actions()..(w + 1) * self.num_actions()]
                .copy_from_slice(&per_action);
        }
        out
    }

    /// Average cost `V(m) = Σ_e ℓ_e(m)·c_e(ℓ_e(m))` at precomputed loads.
    pub fn social_cost_at_loads(&self, loads: &[f64]) -> f64 {
        loads
            .iter()
            .enumerate()
            .map(|(e, &l)| l * self.costs[e].value(l))
            .sum()
    }

    /// Marginal-cost gradient entry set for the social optimum problem:
    /// `(w,x) ↦ Σ_{e∈x} [c_e(ℓ_e) + ℓ_e·c_e'(ℓ_e)]`.
    pub fn marginal_cost_gradient(&self, m: &TypeActionDistribution) -> Vec<f64> {
        let loads = self.loads(m);
        let marginal: Vec<f64> = loads
            .iter()
            .enumerate()
            .map(|(e, &l)| self.costs[e].value(l) + l * self.costs[e].derivative(l))
            .collect();
        let per_action: Vec<f64> = (0..self.num_actions())
            .map(|x| self.action_elements(x).map(|e| marginal[e]).sum())
            .collect();
        let mut out = vec![0.0; self.num_types() * self.num_actions()];
        for w in 0..self.num_types() {
            out[w * self.num_actions()..(w + 1) * self.num_actions()]
                .copy_from_slice(&per_action);
        }
        out
    }

    /// Every admissible route contains an element with `c_e > 0` on positive
    /// loads; guarantees `V > 0` on distributions supported on `Gr(C)`.
    pub fn element_positivity_holds(&self) -> bool {
        self.constraints.iter().all(|list| {
            list.iter().all(|&x| {
                self.action_elements(x)
                    .any(|e| self.costs[e].positive_on_positive_loads())
            })
        })
    }

    /// The generic anonymous-game view of this network.
    pub fn to_game_spec(self: &Arc<Self>) -> GameSpec {
        let net = Arc::clone(self);
        GameSpec::new(
            self.num_types(),
            self.num_actions(),
            self.constraints.clone(),
            Arc::new(move |m, w, x| net.objective(m, w, x)),
        )
        .expect("network invariants imply game invariants")
    }

    /// Span criterion for uniqueness of the potential minimizer: the span of
    /// the `|E|` matrices `(λ_i·1_{e ∈ x_j})_{i,j}` must contain the span of
    /// all stochastic matrices (rows summing to one). Requires strictly
    /// increasing differentiable cost curves.
    pub fn uniqueness_span_check(&self, lambda: &TypeDistribution) -> Result<bool> {
        for (e, c) in self.costs.iter().enumerate() {
            if !c.is_strictly_increasing_differentiable() {
                return Err(Error::NonStrictCosts(format!(
                    "element {} has a non-strict or non-differentiable cost",
                    self.element_ids[e]
                )));
            }
        }
        let (nw, nx) = (self.num_types(), self.num_actions());
        let dim = nw * nx;
        // Orthonormalize the vectorized indicator matrices.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for e in 0..self.num_elements() {
            let mut v = vec![0.0; dim];
            for w in 0..nw {
                for x in 0..nx {
                    if self.action_contains(x, e) {
                        v[w * nx + x] = lambda.weight(w);
                    }
                }
            }
            orthonormal_insert(&mut basis, v);
        }
        // A spanning set of span(T), T the row-stochastic matrices: the
        // all-mass-on-action-0 matrix, plus E_{w,x} − E_{w,0} for x ≥ 1.
        let mut targets: Vec<Vec<f64>> = Vec::new();
        let mut first = vec![0.0; dim];
        for w in 0..nw {
            first[w * nx] = 1.0;
        }
        targets.push(first);
        for w in 0..nw {
            for x in 1..nx {
                let mut t = vec![0.0; dim];
                t[w * nx + x] = 1.0;
                t[w * nx] = -1.0;
                targets.push(t);
            }
        }
        for t in targets {
            if residual_norm(&basis, &t) > 1e-9 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn orthonormal_insert(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) {
    for b in basis.iter() {
        let dot: f64 = b.iter().zip(&v).map(|(a, c)| a * c).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= dot * bi;
        }
    }
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-12 {
        for vi in &mut v {
            *vi /= norm;
        }
        basis.push(v);
    }
}

fn residual_norm(basis: &[Vec<f64>], target: &[f64]) -> f64 {
    let mut r = target.to_vec();
    for b in basis {
        let dot: f64 = b.iter().zip(&r).map(|(a, c)| a * c).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= dot * bi;
        }
    }
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn is_simple_path(graph: &GraphMeta, edges: &[usize], src: usize, dst: usize) -> bool {
    // Walk from src following the unique outgoing edge of the set.
    let mut remaining: Vec<(usize, usize, usize)> = graph
        .arcs
        .iter()
        .filter(|(e, _, _)| edges.contains(e))
        .copied()
        .collect();
    if remaining.len() != edges.len() {
        return false;
    }
    let mut current = src;
    let mut visited = vec![src];
    while current != dst {
        let next = remaining.iter().position(|&(_, from, _)| from == current);
        let Some(idx) = next else { return false };
        let (_, _, to) = remaining.swap_remove(idx);
        if visited.contains(&to) {
            return false;
        }
        visited.push(to);
        current = to;
    }
    remaining.is_empty()
}

/// Enumerates all simple directed paths from `source` to `destination` with
/// at most `max_hops` edges, as element index sets in deterministic
/// lexicographic (DFS by ascending edge index) order.
pub fn generate_routes(
    graph: &GraphMeta,
    source: usize,
    destination: usize,
    max_hops: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut adjacency: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(e, from, to) in &graph.arcs {
        adjacency.entry(from).or_default().push((e, to));
    }
    for list in adjacency.values_mut() {
        list.sort_unstable();
    }
    let mut routes = Vec::new();
    let mut stack_edges: Vec<usize> = Vec::new();
    let mut visited: Vec<usize> = vec![source];
    dfs(
        &adjacency,
        source,
        destination,
        max_hops,
        &mut stack_edges,
        &mut visited,
        &mut routes,
    );
    if routes.is_empty() {
        return Err(Error::NoRoute {
            source: graph
                .vertices
                .get(source)
                .cloned()
                .unwrap_or_else(|| source.to_string()),
            destination: graph
                .vertices
                .get(destination)
                .cloned()
                .unwrap_or_else(|| destination.to_string()),
            max_hops,
        });
    }
    Ok(routes)
}

fn dfs(
    adjacency: &BTreeMap<usize, Vec<(usize, usize)>>,
    current: usize,
    destination: usize,
    hops_left: usize,
    stack_edges: &mut Vec<usize>,
    visited: &mut Vec<usize>,
    routes: &mut Vec<Vec<usize>>,
) {
    if current == destination && !stack_edges.is_empty() {
        let mut route = stack_edges.clone();
        route.sort_unstable();
        routes.push(route);
        return;
    }
    if hops_left == 0 {
        return;
    }
    let Some(neighbors) = adjacency.get(&current) else {
        return;
    };
    for &(e, to) in neighbors {
        if visited.contains(&to) {
            continue;
        }
        stack_edges.push(e);
        visited.push(to);
        dfs(
            adjacency,
            to,
            destination,
            hops_left - 1,
            stack_edges,
            visited,
            routes,
        );
        visited.pop();
        stack_edges.pop();
    }
}

// ---------------------------------------------------------------------------
// JSON instance format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ElementFile {
    id: String,
    cost: CostCurve,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    edges: Vec<EdgeFile>,
    od_pairs: Vec<OdFile>,
    #[serde(default = "default_max_hops")]
    max_hops: usize,
}

fn default_max_hops() -> usize {
    16
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeFile {
    id: String,
    from: String,
    to: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct OdFile {
    source: String,
    destination: String,
}

/// On-disk network description. Either `actions` + `constraints` +
/// `types` are given explicitly (element ids per action), or a `graph`
/// block declares vertices, edges, and one OD pair per type, and the routes
/// are generated.
#[derive(Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    elements: Vec<ElementFile>,
    #[serde(default)]
    types: Option<Vec<String>>,
    #[serde(default)]
    actions: Option<Vec<Vec<String>>>,
    #[serde(default)]
    constraints: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    graph: Option<GraphFile>,
}

impl CongestionNetwork {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn from_file(file: NetworkFile) -> Result<Self> {
        let element_ids: Vec<String> = file.elements.iter().map(|e| e.id.clone()).collect();
        let costs: Vec<CostCurve> = file.elements.iter().map(|e| e.cost.clone()).collect();
        let index_of = |id: &str| -> Result<usize> {
            element_ids
                .iter()
                .position(|e| e == id)
                .ok_or_else(|| Error::UnknownElement(id.to_string()))
        };
        match (&file.graph, &file.actions) {
            (Some(graph), None) => {
                let vertex_of = |name: &str| -> Result<usize> {
                    graph
                        .vertices
                        .iter()
                        .position(|v| v == name)
                        .ok_or_else(|| Error::InvalidNetwork(format!("unknown vertex {name}")))
                };
                let mut arcs = Vec::with_capacity(graph.edges.len());
                for edge in &graph.edges {
                    arcs.push((index_of(&edge.id)?, vertex_of(&edge.from)?, vertex_of(&edge.to)?));
                }
                let mut od_pairs = Vec::with_capacity(graph.od_pairs.len());
                for od in &graph.od_pairs {
                    od_pairs.push((vertex_of(&od.source)?, vertex_of(&od.destination)?));
                }
                let meta = GraphMeta {
                    vertices: graph.vertices.clone(),
                    arcs,
                    od_pairs: od_pairs.clone(),
                    max_hops: graph.max_hops,
                };
                // Generated routes, deduplicated across types.
                let mut actions: Vec<Vec<usize>> = Vec::new();
                let mut constraints: Vec<Vec<usize>> = Vec::new();
                for &(src, dst) in &od_pairs {
                    let routes = generate_routes(&meta, src, dst, meta.max_hops)?;
                    let mut list = Vec::with_capacity(routes.len());
                    for route in routes {
                        let idx = match actions.iter().position(|a| *a == route) {
                            Some(i) => i,
                            None => {
                                actions.push(route);
                                actions.len() - 1
                            }
                        };
                        list.push(idx);
                    }
                    constraints.push(list);
                }
                let type_names = file.types.unwrap_or_else(|| {
                    graph
                        .od_pairs
                        .iter()
                        .map(|od| format!("{}->{}", od.source, od.destination))
                        .collect()
                });
                CongestionNetwork::new(
                    file.name,
                    file.description,
                    element_ids,
                    costs,
                    actions,
                    type_names,
                    constraints,
                    Some(meta),
                )
            }
            (None, Some(action_ids)) => {
                let mut actions = Vec::with_capacity(action_ids.len());
                for set in action_ids {
                    let mut idxs = Vec::with_capacity(set.len());
                    for id in set {
                        idxs.push(index_of(id)?);
                    }
                    actions.push(idxs);
                }
                let constraints = file.constraints.ok_or_else(|| {
                    Error::InvalidNetwork("explicit actions need constraints".into())
                })?;
                let type_names = file
                    .types
                    .unwrap_or_else(|| (0..constraints.len()).map(|i| format!("type{i}")).collect());
                CongestionNetwork::new(
                    file.name,
                    file.description,
                    element_ids,
                    costs,
                    actions,
                    type_names,
                    constraints,
                    None,
                )
            }
            _ => Err(Error::InvalidNetwork(
                "give either a graph block or explicit actions, not both".into(),
            )),
        }
    }
}

/// Names of the instances compiled into the library.
pub const BUILTIN_INSTANCES: [&str; 4] = ["pigou", "braess", "grid3x3", "twotype"];

/// Loads a bundled instance by name.
pub fn builtin_instance(name: &str) -> Result<Arc<CongestionNetwork>> {
    let text = match name {
        "pigou" => include_str!("../instances/pigou.json"),
        "braess" => include_str!("../instances/braess.json"),
        "grid3x3" => include_str!("../instances/grid3x3.json"),
        "twotype" => include_str!("../instances/twotype.json"),
        _ => {
            return Err(Error::InvalidNetwork(format!(
                "unknown builtin instance '{name}'"
            )))
        }
    };
    Ok(Arc::new(CongestionNetwork::from_json(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_cournot_nash;

    pub(crate) fn pigou() -> Arc<CongestionNetwork> {
        builtin_instance("pigou").unwrap()
    }

    #[test]
    fn loads_on_pigou() {
        let net = pigou();
        let all_on_e2 = TypeActionDistribution::from_mass(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(net.load(&all_on_e2, 1), 1.0);
        assert_eq!(net.load(&all_on_e2, 0), 0.0);
        let half = TypeActionDistribution::from_mass(1, 2, vec![0.5, 0.5]).unwrap();
        assert_eq!(net.load(&half, 0), 0.5);
        assert_eq!(net.load(&half, 1), 0.5);
    }

    #[test]
    fn objective_on_pigou() {
        let net = pigou();
        let all_on_e2 = TypeActionDistribution::from_mass(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(net.objective(&all_on_e2, 0, 1), 1.0);
        assert_eq!(net.objective(&all_on_e2, 0, 0), 1.0);
    }

    #[test]
    fn potential_on_pigou() {
        let net = pigou();
        let all_on_e2 = TypeActionDistribution::from_mass(1, 2, vec![0.0, 1.0]).unwrap();
        assert!((net.potential(&all_on_e2) - 0.5).abs() < 1e-15);
        let half = TypeActionDistribution::from_mass(1, 2, vec![0.5, 0.5]).unwrap();
        assert!((net.potential(&half) - 0.625).abs() < 1e-15);
        let all_on_e1 = TypeActionDistribution::from_mass(1, 2, vec![1.0, 0.0]).unwrap();
        assert!((net.potential(&all_on_e1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_equals_objective_entrywise() {
        let net = pigou();
        let half = TypeActionDistribution::from_mass(1, 2, vec![0.25, 0.75]).unwrap();
        let grad = net.potential_gradient(&half);
        for x in 0..2 {
            assert!((grad[x] - net.objective(&half, 0, x)).abs() < 1e-12);
        }
        // At loads (0, 1) the gradient is (1, 1).
        let all_on_e2 = TypeActionDistribution::from_mass(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(net.potential_gradient(&all_on_e2), vec![1.0, 1.0]);
    }

    #[test]
    fn polynomial_curve_closed_forms() {
        let c = CostCurve::Polynomial {
            coeffs: vec![1.0, 0.0, 3.0],
        };
        assert!((c.value(0.5) - (1.0 + 0.75)).abs() < 1e-15);
        assert!((c.antiderivative(1.0) - 2.0).abs() < 1e-15);
        assert!((c.derivative(0.5) - 3.0).abs() < 1e-15);
        assert!(c.is_strictly_increasing_differentiable());
    }

    #[test]
    fn piecewise_linear_curve() {
        let c = CostCurve::PiecewiseLinear {
            knots: vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)],
        };
        c.validate().unwrap();
        assert!((c.value(0.25) - 0.5).abs() < 1e-15);
        assert!((c.antiderivative(1.0) - (0.25 + 0.5)).abs() < 1e-15);
        assert!((c.antiderivative(0.25) - 0.5 * 0.5 * 0.25).abs() < 1e-15);
        assert!(!c.is_strictly_increasing_differentiable());
    }

    #[test]
    fn route_generation_on_braess() {
        let net = builtin_instance("braess").unwrap();
        assert_eq!(net.num_actions(), 3);
        assert_eq!(net.num_types(), 1);
    }

    #[test]
    fn route_generation_fails_when_disconnected() {
        let graph = GraphMeta {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            arcs: vec![(0, 0, 1)],
            od_pairs: vec![(0, 2)],
            max_hops: 4,
        };
        assert!(matches!(
            generate_routes(&graph, 0, 2, 4),
            Err(Error::NoRoute { .. })
        ));
    }

    #[test]
    fn span_check_pigou_variant() {
        // Two singleton actions over distinct strictly increasing elements.
        let net = CongestionNetwork::new(
            "strict-parallel".into(),
            String::new(),
            vec!["a".into(), "b".into()],
            vec![
                CostCurve::Linear { slope: 1.0, intercept: 0.0 },
                CostCurve::Linear { slope: 2.0, intercept: 0.0 },
            ],
            vec![vec![0], vec![1]],
            vec!["t0".into()],
            vec![vec![0, 1]],
            None,
        )
        .unwrap();
        let lam = TypeDistribution::new(vec![1.0]).unwrap();
        assert!(net.uniqueness_span_check(&lam).unwrap());
    }

    #[test]
    fn span_check_fails_for_shared_single_element() {
        // One element, two actions both containing it: span is 1-dimensional.
        let net = CongestionNetwork::new(
            "degenerate".into(),
            String::new(),
            vec!["a".into()],
            vec![CostCurve::Linear { slope: 1.0, intercept: 0.0 }],
            vec![vec![0], vec![0]],
            vec!["t0".into()],
            vec![vec![0, 1]],
            None,
        )
        .unwrap();
        let lam = TypeDistribution::new(vec![1.0]).unwrap();
        assert!(!net.uniqueness_span_check(&lam).unwrap());
    }

    #[test]
    fn span_check_fails_with_zero_mass_type() {
        let net = CongestionNetwork::new(
            "zero-type".into(),
            String::new(),
            vec!["a".into(), "b".into()],
            vec![
                CostCurve::Linear { slope: 1.0, intercept: 0.0 },
                CostCurve::Linear { slope: 1.0, intercept: 0.0 },
            ],
            vec![vec![0], vec![1]],
            vec!["t0".into(), "t1".into()],
            vec![vec![0, 1], vec![0, 1]],
            None,
        )
        .unwrap();
        let lam = TypeDistribution::new(vec![1.0, 0.0]).unwrap();
        assert!(!net.uniqueness_span_check(&lam).unwrap());
    }

    #[test]
    fn span_check_rejects_constant_costs() {
        let net = pigou();
        let lam = TypeDistribution::new(vec![1.0]).unwrap();
        assert!(matches!(
            net.uniqueness_span_check(&lam),
            Err(Error::NonStrictCosts(_))
        ));
    }

    #[test]
    fn pigou_equilibrium_certifies_through_game_spec() {
        let net = pigou();
        let game = net.to_game_spec();
        let eq = TypeActionDistribution::from_mass(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(is_cournot_nash(&game, &eq, 1e-12).is_equilibrium);
        let bad = TypeActionDistribution::from_mass(1, 2, vec![1.0, 0.0]).unwrap();
        assert!(!is_cournot_nash(&game, &bad, 1e-6).is_equilibrium);
    }

    #[test]
    fn builtin_instances_parse() {
        for name in BUILTIN_INSTANCES {
            let net = builtin_instance(name).unwrap();
            assert!(net.num_actions() >= 2, "{name}");
            assert!(net.element_positivity_holds(), "{name}");
        }
    }
}

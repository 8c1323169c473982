//! Signal-flow graphs for z-transformed life-cycle systems: equivalence
//! rewrites, node elimination, simple-loop enumeration, and a loop-based
//! route to the net reproductive number that is independent of the
//! eigensolver.
//!
//! A graph holds the linear system `x = B x`: one node per variable, one
//! directed edge per nonzero coefficient. The characteristic residual of a
//! graph is `1 + sum_k (-1)^k q_k`, where `q_k` sums the transmission
//! products of unordered k-tuples of node-disjoint simple loops; it
//! vanishes exactly when 1 is an eigenvalue of `B`. Sign convention: the
//! residual is positive to the right of the largest real eigenvalue, which
//! makes it agree in sign with the monic characteristic polynomial there.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::bracket::{bisect, rightmost_sign_change};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::GlobalModel;
use crate::scalar::Scalar;

/// Hard cap on enumerated simple cycles.
pub const CYCLE_LIMIT: usize = 1_000_000;

const UNIT_LOOP_TOL: f64 = 1e-12;

/// Directed weighted graph with at most one edge per ordered node pair;
/// parallel edges merge by summing their transmissions. Self-loops are
/// permitted. Rewrites return new graphs; values are cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFlowGraph<T> {
    labels: Vec<String>,
    edges: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> SignalFlowGraph<T> {
    pub fn new(labels: Vec<String>) -> Self {
        SignalFlowGraph {
            labels,
            edges: BTreeMap::new(),
        }
    }

    /// Graph of the system `x = B x`: an edge from node `l` to node `k`
    /// with rate `B[k][l]` for every nonzero entry.
    pub fn from_matrix(b: &Matrix<T>) -> Self {
        assert!(b.is_square(), "signal-flow graph needs a square system");
        let labels = (0..b.rows()).map(|k| format!("x{}", k + 1)).collect();
        let mut g = SignalFlowGraph::new(labels);
        for k in 0..b.rows() {
            for l in 0..b.cols() {
                if b[(k, l)] != T::zero() {
                    g.add_edge(l, k, b[(k, l)]);
                }
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Add an edge; a parallel edge merges into the existing one by summing
    /// transmissions (the first equivalence rule). Edges that cancel to
    /// exactly zero are removed.
    pub fn add_edge(&mut self, from: usize, to: usize, rate: T) {
        assert!(from < self.node_count() && to < self.node_count());
        let slot = self.edges.entry((from, to)).or_insert_with(T::zero);
        *slot += rate;
        if *slot == T::zero() {
            self.edges.remove(&(from, to));
        }
    }

    /// Transmission from `from` to `to`; zero when no edge exists.
    pub fn rate(&self, from: usize, to: usize) -> T {
        self.edges.get(&(from, to)).copied().unwrap_or_else(T::zero)
    }

    pub fn self_loop(&self, v: usize) -> T {
        self.rate(v, v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.edges.iter().map(|(&(f, t), &r)| (f, t, r))
    }

    fn unit_loop_guard(&self, v: usize) -> Result<T> {
        let s = self.self_loop(v);
        if (T::one() - s).abs() <= T::of(UNIT_LOOP_TOL) {
            return Err(Error::SingularLoop {
                node: self.labels[v].clone(),
                rate: s.as_f64(),
            });
        }
        Ok(s)
    }

    /// Third equivalence rule: remove the self-loop of rate `s` on `v` and
    /// divide every incoming transmission by `1 - s`. Errors when `s` is
    /// within 1e-12 of 1 (an isolated subsystem already in balance).
    pub fn absorb_self_loop(&self, v: usize) -> Result<Self> {
        let s = self.unit_loop_guard(v)?;
        let gain = T::one() / (T::one() - s);
        let mut out = SignalFlowGraph::new(self.labels.clone());
        for (from, to, rate) in self.edges() {
            if from == v && to == v {
                continue;
            }
            let scaled = if to == v { rate * gain } else { rate };
            out.add_edge(from, to, scaled);
        }
        Ok(out)
    }

    /// Eliminate an intermediate node: every in/out edge pair `(u -> v, a)`,
    /// `(v -> w, b)` becomes an edge `u -> w` with rate `a b / (1 - s)`,
    /// where `s` is the self-loop on `v`. This is graph-level Gaussian
    /// elimination; the reduced system keeps the same non-unit eigenvalue
    /// condition.
    pub fn eliminate_node(&self, v: usize) -> Result<Self> {
        assert!(v < self.node_count());
        let s = self.unit_loop_guard(v)?;
        let gain = T::one() / (T::one() - s);
        let remap = |idx: usize| if idx > v { idx - 1 } else { idx };
        let labels = self
            .labels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != v)
            .map(|(_, l)| l.clone())
            .collect();
        let mut out = SignalFlowGraph::new(labels);
        for (from, to, rate) in self.edges() {
            if from != v && to != v {
                out.add_edge(remap(from), remap(to), rate);
            }
        }
        let incoming: Vec<(usize, T)> = self
            .edges()
            .filter(|&(f, t, _)| t == v && f != v)
            .map(|(f, _, r)| (f, r))
            .collect();
        let outgoing: Vec<(usize, T)> = self
            .edges()
            .filter(|&(f, t, _)| f == v && t != v)
            .map(|(_, t, r)| (t, r))
            .collect();
        for &(u, a) in &incoming {
            for &(w, b) in &outgoing {
                out.add_edge(remap(u), remap(w), a * b * gain);
            }
        }
        Ok(out)
    }

    /// Second equivalence rule: collapse a pass-through node (exactly one
    /// in-edge, one out-edge, no self-loop) into the serial product of its
    /// transmissions.
    pub fn chain_serial(&self, v: usize) -> Result<Self> {
        let ins = self.edges().filter(|&(_, t, _)| t == v).count();
        let outs = self.edges().filter(|&(f, _, _)| f == v).count();
        if self.self_loop(v) != T::zero() || ins != 1 || outs != 1 {
            return Err(Error::IndexOutOfRange(format!(
                "node \"{}\" is not a pass-through node",
                self.labels[v]
            )));
        }
        self.eliminate_node(v)
    }

    /// Enumerate every simple directed cycle (no repeated intermediate
    /// node), Johnson style: each cycle is reported once, rooted at its
    /// smallest node. Errors when more than [`CYCLE_LIMIT`] cycles exist.
    pub fn simple_loops(&self) -> Result<LoopInventory<T>> {
        let n = self.node_count();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (from, to, _) in self.edges() {
            adjacency[from].push(to);
        }
        let cycles = simple_cycle_nodes(&adjacency, CYCLE_LIMIT)?;
        let loops = cycles
            .into_iter()
            .map(|nodes| {
                let mut transmission = T::one();
                for i in 0..nodes.len() {
                    let from = nodes[i];
                    let to = nodes[(i + 1) % nodes.len()];
                    transmission = transmission * self.rate(from, to);
                }
                Loop {
                    nodes,
                    transmission,
                }
            })
            .collect();
        Ok(LoopInventory {
            loops,
            node_count: n,
        })
    }

    /// Plain-text adjacency listing, one edge per line.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for (from, to, rate) in self.edges() {
            out.push_str(&format!(
                "{} -> {} : {}\n",
                self.labels[from],
                self.labels[to],
                sig6(rate.as_f64())
            ));
        }
        out
    }

    /// DOT rendering with transmissions rounded to 6 significant digits.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph signal_flow {\n  rankdir=LR;\n");
        for (v, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("  n{v} [label=\"{label}\"];\n"));
        }
        for (from, to, rate) in self.edges() {
            out.push_str(&format!(
                "  n{from} -> n{to} [label=\"{}\"];\n",
                sig6(rate.as_f64())
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Round to 6 significant digits for display.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor();
    let scale = 10f64.powf(5.0 - exp);
    format!("{}", (x * scale).round() / scale)
}

/// One simple directed cycle with its transmission product.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop<T> {
    pub nodes: Vec<usize>,
    pub transmission: T,
}

/// All simple loops of a graph plus the disjoint-tuple machinery behind the
/// characteristic residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopInventory<T> {
    loops: Vec<Loop<T>>,
    node_count: usize,
}

impl<T: Scalar> LoopInventory<T> {
    pub fn loops(&self) -> &[Loop<T>] {
        &self.loops
    }

    /// `q_k` terms: `q[k-1]` sums the transmission products over unordered
    /// k-tuples of node-disjoint loops. The vector stops at the largest k
    /// for which such a tuple exists.
    pub fn disjoint_products(&self) -> Vec<T> {
        let mut q: Vec<T> = Vec::new();
        let mut used = vec![false; self.node_count];
        self.accumulate(0, 1, T::one(), &mut used, &mut q);
        q
    }

    fn accumulate(
        &self,
        start: usize,
        depth: usize,
        product: T,
        used: &mut Vec<bool>,
        q: &mut Vec<T>,
    ) {
        for idx in start..self.loops.len() {
            let lp = &self.loops[idx];
            if lp.nodes.iter().any(|&v| used[v]) {
                continue;
            }
            let p = product * lp.transmission;
            if q.len() < depth {
                q.push(T::zero());
            }
            q[depth - 1] += p;
            for &v in &lp.nodes {
                used[v] = true;
            }
            self.accumulate(idx + 1, depth + 1, p, used, q);
            for &v in &lp.nodes {
                used[v] = false;
            }
        }
    }

    /// `1 + sum_k (-1)^k q_k`; zero exactly when the graph's system matrix
    /// has eigenvalue 1.
    pub fn characteristic_residual(&self) -> T {
        let mut residual = T::one();
        let mut sign = -T::one();
        for qk in self.disjoint_products() {
            residual += sign * qk;
            sign = -sign;
        }
        residual
    }
}

/// Iterative Johnson enumeration of elementary circuits; cycles are rooted
/// at their smallest node so each appears exactly once. Self-loops are
/// reported as one-node cycles.
fn simple_cycle_nodes(adjacency: &[Vec<usize>], limit: usize) -> Result<Vec<Vec<usize>>> {
    let n = adjacency.len();
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        let neighbors = |v: usize| -> Vec<usize> {
            adjacency[v]
                .iter()
                .copied()
                .filter(|&w| w >= start)
                .collect()
        };
        let mut blocked = vec![false; n];
        let mut block_lists: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        blocked[start] = true;
        let mut path = vec![start];
        let mut stack = vec![(start, neighbors(start))];
        let mut fruitful: BTreeSet<usize> = BTreeSet::new();
        while let Some((node, pending)) = stack.last_mut() {
            let node = *node;
            if let Some(next) = pending.pop() {
                if next == start {
                    if cycles.len() >= limit {
                        return Err(Error::CycleLimit { limit });
                    }
                    cycles.push(path.clone());
                    fruitful.extend(path.iter().copied());
                } else if !blocked[next] {
                    path.push(next);
                    blocked[next] = true;
                    fruitful.remove(&next);
                    stack.push((next, neighbors(next)));
                }
                continue;
            }
            if fruitful.contains(&node) {
                // unblock transitively through the block lists
                let mut queue = vec![node];
                while let Some(v) = queue.pop() {
                    blocked[v] = false;
                    queue.extend(std::mem::take(&mut block_lists[v]));
                }
            } else {
                for w in neighbors(node) {
                    block_lists[w].insert(node);
                }
            }
            stack.pop();
            path.pop();
        }
    }
    Ok(cycles)
}

/// Signal-flow graph of `rho^{-1} D F + D S` with nodes labeled by their
/// stage-patch pair.
pub fn z_transformed_graph<T: Scalar>(model: &GlobalModel<T>, rho: T) -> SignalFlowGraph<T> {
    assert!(rho > T::zero(), "candidate value must be positive");
    let b = z_matrix(model, rho);
    let m = model.stages();
    let labels = (0..model.dim())
        .map(|p| format!("stage {} / patch {}", p % m + 1, p / m + 1))
        .collect();
    let mut g = SignalFlowGraph::new(labels);
    for k in 0..b.rows() {
        for l in 0..b.cols() {
            if b[(k, l)] != T::zero() {
                g.add_edge(l, k, b[(k, l)]);
            }
        }
    }
    g
}

fn z_matrix<T: Scalar>(model: &GlobalModel<T>, rho: T) -> Matrix<T> {
    let df = model.dispersal().matmul(model.fecundity());
    let ds = model.dispersal().matmul(model.survival());
    df.scale(T::one() / rho).add(&ds)
}

/// Characteristic residual of the z-transformed graph at candidate `rho`:
/// zero exactly when `rho^{-1} D F + D S` has eigenvalue 1, which at the
/// largest such positive root identifies the net reproductive number.
pub fn loop_transmission_residual<T: Scalar>(model: &GlobalModel<T>, rho: T) -> Result<T> {
    assert!(rho > T::zero(), "candidate value must be positive");
    let graph = SignalFlowGraph::from_matrix(&z_matrix(model, rho));
    Ok(graph.simple_loops()?.characteristic_residual())
}

/// Net reproductive number by graph reduction: scan the bracket for the
/// rightmost sign change of the loop-transmission residual, then bisect to
/// 1e-10. Errors when no sign change lies in the bracket (for instance a
/// zero-fecundity model, whose residual has no positive root).
pub fn r0_by_graph_reduction<T: Scalar>(model: &GlobalModel<T>, bracket: (T, T)) -> Result<T> {
    assert!(
        T::zero() < bracket.0 && bracket.0 < bracket.1,
        "bracket must be positive and ordered"
    );
    let f = |rho: T| loop_transmission_residual(model, rho);
    let (interval, values) =
        match rightmost_sign_change(f, bracket, 256, "loop-transmission residual")? {
            Ok(found) => found,
            Err(e) => return Err(e),
        };
    if interval.0 == interval.1 {
        return Ok(interval.0); // exact grid hit
    }
    bisect(f, interval, values, T::of(1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demography::{build_usher, local_r0, StageVitals};
    use crate::dispersion::DispersionSpec;

    #[test]
    fn matrix_graphs_have_one_edge_per_nonzero() {
        let zero = SignalFlowGraph::from_matrix(&Matrix::<f64>::zeros(3, 3));
        assert_eq!(zero.edge_count(), 0);
        let id = SignalFlowGraph::from_matrix(&Matrix::<f64>::identity(3));
        assert_eq!(id.edge_count(), 3);
        assert_eq!(id.self_loop(1), 1.0);
    }

    #[test]
    fn parallel_edges_merge_by_addition() {
        let mut g = SignalFlowGraph::new(vec!["a".into(), "b".into()]);
        g.add_edge(0, 1, 0.3);
        g.add_edge(0, 1, 0.7);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.rate(0, 1), 1.0);
    }

    #[test]
    fn absorbing_a_half_loop_doubles_incoming() {
        let mut g = SignalFlowGraph::new(vec!["a".into(), "b".into()]);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 1, 0.5);
        let g2 = g.absorb_self_loop(1).unwrap();
        assert_eq!(g2.rate(0, 1), 2.0);
        assert_eq!(g2.self_loop(1), 0.0);
        let mut singular = g.clone();
        singular.add_edge(1, 1, 0.5); // self-loop now exactly 1
        assert!(matches!(
            singular.absorb_self_loop(1),
            Err(Error::SingularLoop { .. })
        ));
    }

    #[test]
    fn serial_chain_multiplies() {
        let mut g = SignalFlowGraph::new(vec!["u".into(), "v".into(), "w".into()]);
        g.add_edge(0, 1, 2.0);
        g.add_edge(1, 2, 3.0);
        let g2 = g.chain_serial(1).unwrap();
        assert_eq!(g2.node_count(), 2);
        assert_eq!(g2.rate(0, 1), 6.0);
        assert!(g.chain_serial(0).is_err());
    }

    #[test]
    fn three_stage_reduction_collapses_to_a_unit_loop() {
        // z-transformed three-stage life cycle at its own R0: absorbing the
        // three self-loops and eliminating the two intermediate nodes must
        // leave a single loop of transmission 1
        let v = StageVitals::new(
            vec![0.0, 0.0, 1.7],
            vec![0.2, 0.3, 0.4],
            vec![0.5, 0.45],
        )
        .unwrap();
        let r0 = local_r0(&v);
        let d = build_usher(v);
        let b = d.fecundity().scale(1.0 / r0).add(d.survival());
        let mut g = SignalFlowGraph::from_matrix(&b);
        for node in 0..3 {
            g = g.absorb_self_loop(node).unwrap();
        }
        let g = g.eliminate_node(1).unwrap();
        let g = g.eliminate_node(1).unwrap();
        assert_eq!(g.node_count(), 1);
        assert!((g.self_loop(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loops_of_a_two_cycle_with_self_loops() {
        let b = Matrix::from_rows(&[vec![0.5, 2.0], vec![0.25, 0.0]]);
        let g = SignalFlowGraph::from_matrix(&b);
        let inventory = g.simple_loops().unwrap();
        // loops: self-loop at node 1 (0.5) and the 2-cycle (2.0 * 0.25)
        assert_eq!(inventory.loops().len(), 2);
        let q = inventory.disjoint_products();
        assert_eq!(q.len(), 1); // the two loops share node 1
        assert!((q[0] - 1.0).abs() < 1e-15);
        // residual = 1 - (0.5 + 0.5) = 0: eigenvalue 1 (columns sums check:
        // eigenvalues of B are 1.0 and -0.5)
        assert!(inventory.characteristic_residual().abs() < 1e-15);
    }

    #[test]
    fn disjoint_loop_pairs_are_counted() {
        // two disjoint self-loops: q1 = a + b, q2 = ab
        let b = Matrix::diagonal(&[0.3, 0.6]);
        let inventory = SignalFlowGraph::from_matrix(&b).simple_loops().unwrap();
        let q = inventory.disjoint_products();
        assert_eq!(q.len(), 2);
        assert!((q[0] - 0.9).abs() < 1e-15);
        assert!((q[1] - 0.18).abs() < 1e-15);
        // residual = (1 - 0.3)(1 - 0.6)
        assert!((inventory.characteristic_residual() - 0.28).abs() < 1e-15);
    }

    #[test]
    fn graph_route_recovers_the_single_patch_r0() {
        let v = StageVitals::new(
            vec![0.0, 0.0, 2.1],
            vec![0.15, 0.25, 0.3],
            vec![0.55, 0.4],
        )
        .unwrap();
        let expected = local_r0(&v);
        let model = GlobalModel::assemble(
            vec![build_usher(v)],
            DispersionSpec::identity(3, 1),
        )
        .unwrap();
        let residual_at_root = loop_transmission_residual(&model, expected).unwrap();
        assert!(residual_at_root.abs() < 1e-9, "residual {residual_at_root}");
        let upper = model.r0_upper_bound() + 1.0;
        let root = r0_by_graph_reduction(&model, (1e-6, upper)).unwrap();
        assert!((root - expected).abs() < 1e-9);
    }

    #[test]
    fn zero_fecundity_has_no_positive_root() {
        let v = StageVitals::new(vec![0.0, 0.0], vec![0.3, 0.2], vec![0.4]).unwrap();
        let model = GlobalModel::assemble(
            vec![build_usher(v)],
            DispersionSpec::identity(2, 1),
        )
        .unwrap();
        assert!(matches!(
            r0_by_graph_reduction(&model, (1e-6, 10.0)),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn dot_and_adjacency_exports_are_stable() {
        let mut g = SignalFlowGraph::new(vec![
            "stage 1 / patch 1".into(),
            "stage 2 / patch 1".into(),
        ]);
        g.add_edge(0, 1, 1.0 / 3.0);
        let dot = g.to_dot();
        assert!(dot.contains("n0 [label=\"stage 1 / patch 1\"]"));
        assert!(dot.contains("n0 -> n1 [label=\"0.333333\"]"));
        let adj = g.to_adjacency_text();
        assert_eq!(adj, "stage 1 / patch 1 -> stage 2 / patch 1 : 0.333333\n");
    }

    #[test]
    fn sig6_rounds_to_six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(123456.789), "123457");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
    }
}

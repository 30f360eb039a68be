//! Communication topologies, spanning trees, the flooding protocol, tree
//! converge-cast, and exact accounting of what crosses each edge.
//!
//! The simulator is synchronous and latency-free. Two currencies are kept
//! apart: point-units (one d-dimensional point, its weight rides along for
//! free) and scalar-units (one standalone real, e.g. a local cost).

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::sampling::draw_index;
use crate::{Error, Result};

const RANDOM_GRAPH_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Random,
    Grid,
    Preferential,
    /// Built by hand or read from an edge list.
    Custom,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Random => "random",
            TopologyKind::Grid => "grid",
            TopologyKind::Preferential => "preferential",
            TopologyKind::Custom => "custom",
        }
    }
}

/// Undirected connected graph over sites `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    kind: TopologyKind,
    /// Sorted, each pair stored once with the smaller id first.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Validates and normalizes an edge list: no self-loops, no duplicates,
    /// ids below `n`, connected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], kind: TopologyKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("topology needs at least one site"));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(alloc::format!("edge ({u}, {v}) out of range for {n} sites")));
            }
            if u == v {
                return Err(Error::invalid(alloc::format!("self-loop at site {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate edge"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        let g = Topology { n, kind, edges: norm, adjacency };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Topology::from_edges(n, &edges, TopologyKind::Custom)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Topology::from_edges(n, &edges, TopologyKind::Custom)
    }

    /// Site 0 is the hub.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Topology::from_edges(n, &edges, TopologyKind::Custom)
    }

    /// 4-neighbor lattice; site `r * cols + c` sits at row `r`, column `c`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let id = r * cols + c;
                if c + 1 < cols {
                    edges.push((id, id + 1));
                }
                if r + 1 < rows {
                    edges.push((id, id + cols));
                }
            }
        }
        Topology::from_edges(rows * cols, &edges, TopologyKind::Grid)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors in ascending id order.
    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.adjacency[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.adjacency[site].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Hop distances from `source`.
    pub fn hop_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn eccentricity(&self, site: usize) -> usize {
        self.hop_distances(site).into_iter().flatten().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances(0).iter().all(Option::is_some)
    }
}

/// Generator parameters for the three experiment topologies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopologyParams {
    /// Erdos-Renyi G(n, p), redrawn until connected.
    Random { p: f64 },
    Grid { rows: usize, cols: usize },
    /// Barabasi-Albert growth: a clique on `attach + 1` sites, then each new
    /// site links to `attach` distinct existing sites chosen with
    /// probability proportional to degree. Yields
    /// `attach * (attach + 1) / 2 + (n - attach - 1) * attach` edges.
    Preferential { attach: usize },
}

impl TopologyParams {
    pub fn kind(&self) -> TopologyKind {
        match self {
            TopologyParams::Random { .. } => TopologyKind::Random,
            TopologyParams::Grid { .. } => TopologyKind::Grid,
            TopologyParams::Preferential { .. } => TopologyKind::Preferential,
        }
    }
}

pub fn gen_topology<R: Rng + ?Sized>(n: usize, params: &TopologyParams, rng: &mut R) -> Result<Topology> {
    if n < 2 {
        return Err(Error::invalid("a topology needs at least two sites"));
    }
    match *params {
        TopologyParams::Random { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::invalid("edge probability must lie in (0, 1]"));
            }
            for _ in 0..RANDOM_GRAPH_ATTEMPTS {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng.random::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                match Topology::from_edges(n, &edges, TopologyKind::Random) {
                    Ok(g) => return Ok(g),
                    Err(Error::Disconnected) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::RetryExhausted { what: "connected random graph", attempts: RANDOM_GRAPH_ATTEMPTS })
        }
        TopologyParams::Grid { rows, cols } => {
            if rows == 0 || cols == 0 || rows * cols != n {
                return Err(Error::GridNotFactorable { n, rows, cols });
            }
            Topology::grid(rows, cols)
        }
        TopologyParams::Preferential { attach } => {
            if attach == 0 || attach >= n {
                return Err(Error::invalid("attachment count must lie in [1, n)"));
            }
            let mut edges = Vec::new();
            let mut degree = vec![0.0; n];
            for u in 0..=attach {
                for v in u + 1..=attach {
                    edges.push((u, v));
                    degree[u] += 1.0;
                    degree[v] += 1.0;
                }
            }
            for new in attach + 1..n {
                let mut odds = degree[..new].to_vec();
                for _ in 0..attach {
                    let target = draw_index(&odds, rng).ok_or(Error::invalid("no attachment target"))?;
                    odds[target] = 0.0;
                    edges.push((target, new));
                    degree[target] += 1.0;
                    degree[new] += 1.0;
                }
            }
            Topology::from_edges(n, &edges, TopologyKind::Preferential)
        }
    }
}

/// Rooted spanning tree over all sites of a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    height: usize,
}

impl RootedTree {
    /// Builds a tree from a parent array (`None` exactly at the root).
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::invalid("a rooted tree needs exactly one root"));
        };
        let mut children = vec![Vec::new(); n];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n || p == i {
                    return Err(Error::invalid("invalid parent"));
                }
                children[p].push(i);
            }
        }
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                queue.push_back(c);
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(Error::invalid("parent array contains a cycle"));
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        Ok(RootedTree { root, parent, depth, children, height })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, site: usize) -> Option<usize> {
        self.parent[site]
    }

    pub fn depth(&self, site: usize) -> usize {
        self.depth[site]
    }

    pub fn children(&self, site: usize) -> &[usize] {
        &self.children[site]
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Every site after all of its descendants.
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                out.push(u);
            } else {
                stack.push((u, true));
                for &c in self.children[u].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }
}

/// Breadth-first tree from `root`; neighbors are explored in ascending id.
pub fn bfs_tree(g: &Topology, root: usize) -> Result<RootedTree> {
    if root >= g.n() {
        return Err(Error::invalid("root out of range"));
    }
    let mut parent = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    RootedTree::from_parents(parent)
}

/// BFS tree from a root chosen uniformly at random.
pub fn spanning_tree<R: Rng + ?Sized>(g: &Topology, rng: &mut R) -> Result<RootedTree> {
    let root = rng.random_range(0..g.n());
    bfs_tree(g, root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Points,
    Scalars,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeTraffic {
    pub point_units: u64,
    pub scalar_units: u64,
    pub messages: u64,
}

/// Exact transmission counts, in total and per undirected edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommLedger {
    pub point_units: u64,
    pub scalar_units: u64,
    pub per_edge: BTreeMap<(usize, usize), EdgeTraffic>,
}

impl CommLedger {
    /// Records one message of `amount` units across edge `{u, v}`.
    pub fn charge(&mut self, u: usize, v: usize, unit: Unit, amount: u64) {
        let entry = self.per_edge.entry((u.min(v), u.max(v))).or_default();
        entry.messages += 1;
        match unit {
            Unit::Points => {
                entry.point_units += amount;
                self.point_units += amount;
            }
            Unit::Scalars => {
                entry.scalar_units += amount;
                self.scalar_units += amount;
            }
        }
    }

    pub fn absorb(&mut self, other: &CommLedger) {
        self.point_units += other.point_units;
        self.scalar_units += other.scalar_units;
        for (&edge, t) in &other.per_edge {
            let e = self.per_edge.entry(edge).or_default();
            e.point_units += t.point_units;
            e.scalar_units += t.scalar_units;
            e.messages += t.messages;
        }
    }

    /// Point-units plus scalar-units converted at one scalar = 1/(d+1)
    /// point-units (a point with its weight is d+1 reals).
    pub fn combined_units(&self, dim: usize) -> f64 {
        self.point_units as f64 + self.scalar_units as f64 / (dim as f64 + 1.0)
    }
}

/// What every site holds after flooding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodRecord {
    /// `holdings[i][j]`: site `i` holds item `j`.
    pub holdings: Vec<Vec<bool>>,
    pub rounds: usize,
    /// Transmissions per item.
    pub transmissions: Vec<u64>,
}

impl FloodRecord {
    pub fn complete(&self) -> bool {
        self.holdings.iter().all(|h| h.iter().all(|&x| x))
    }
}

/// Flooding: every site starts with its own item `j` of `sizes[j]` units and
/// forwards each item to all of its neighbors exactly once, on the round it
/// first holds it (the sender it came from included). Each item therefore
/// costs `2m` transmissions.
pub fn flood(g: &Topology, sizes: &[u64], unit: Unit, ledger: &mut CommLedger) -> Result<FloodRecord> {
    flood_with_order(g, sizes, unit, ledger, |_| {})
}

/// [`flood`] with the delivery order inside every round shuffled by `rng`.
/// The outcome and the charges are the same as for [`flood`].
pub fn flood_shuffled<R: Rng + ?Sized>(
    g: &Topology,
    sizes: &[u64],
    unit: Unit,
    ledger: &mut CommLedger,
    rng: &mut R,
) -> Result<FloodRecord> {
    flood_with_order(g, sizes, unit, ledger, |msgs| msgs.shuffle(rng))
}

fn flood_with_order(
    g: &Topology,
    sizes: &[u64],
    unit: Unit,
    ledger: &mut CommLedger,
    mut reorder: impl FnMut(&mut Vec<(usize, usize, usize)>),
) -> Result<FloodRecord> {
    let n = g.n();
    if sizes.len() != n {
        return Err(Error::invalid("flood needs exactly one item per site"));
    }
    let mut holdings = vec![vec![false; n]; n];
    let mut fresh: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for (i, h) in holdings.iter_mut().enumerate() {
        h[i] = true;
    }
    let mut transmissions = vec![0u64; n];
    let mut rounds = 0;
    loop {
        // (from, to, item)
        let mut messages = Vec::new();
        for (site, items) in fresh.iter_mut().enumerate() {
            for item in items.drain(..) {
                for &nb in g.neighbors(site) {
                    messages.push((site, nb, item));
                }
            }
        }
        if messages.is_empty() {
            break;
        }
        rounds += 1;
        reorder(&mut messages);
        for (from, to, item) in messages {
            ledger.charge(from, to, unit, sizes[item]);
            transmissions[item] += 1;
            if !holdings[to][item] {
                holdings[to][item] = true;
                fresh[to].push(item);
            }
        }
    }
    Ok(FloodRecord { holdings, rounds, transmissions })
}

/// Every site learns every site's scalar, by flooding one scalar-unit per
/// site (`2mn` scalar-units in total). Returns each site's view, indexed by
/// origin.
pub fn broadcast_scalars(g: &Topology, values: &[f64], ledger: &mut CommLedger) -> Result<Vec<Vec<f64>>> {
    let record = flood(g, &vec![1; values.len()], Unit::Scalars, ledger)?;
    debug_assert!(record.complete());
    Ok(record
        .holdings
        .iter()
        .map(|h| h.iter().zip(values).filter(|(held, _)| **held).map(|(_, &v)| v).collect())
        .collect())
}

/// Sends every site's payload hop by hop to the root. A payload at depth `l`
/// costs `l * size`. Returns the total charged.
pub fn tree_upcast(tree: &RootedTree, sizes: &[u64], unit: Unit, ledger: &mut CommLedger) -> Result<u64> {
    if sizes.len() != tree.n() {
        return Err(Error::invalid("upcast needs exactly one payload per site"));
    }
    let mut total = 0;
    for (site, &size) in sizes.iter().enumerate() {
        let mut at = site;
        while let Some(p) = tree.parent(at) {
            ledger.charge(at, p, unit, size);
            total += size;
            at = p;
        }
    }
    Ok(total)
}

/// Sends a payload of `sizes[i]` units from the root down to every site `i`
/// along tree paths. Returns the total charged.
pub fn tree_downcast(tree: &RootedTree, sizes: &[u64], unit: Unit, ledger: &mut CommLedger) -> Result<u64> {
    // Same edges and amounts as the upcast, opposite direction.
    tree_upcast(tree, sizes, unit, ledger)
}

/// How the sites learn each other's local costs before sampling.
pub trait CostExchange {
    /// Returns the cost vector every site ends up acting on, charging the
    /// ledger for the traffic.
    fn exchange(&mut self, local_costs: &[f64], ledger: &mut CommLedger) -> Result<Vec<f64>>;
}

/// No network: the caller already holds every cost (centralized runs).
#[derive(Debug, Clone, Copy, Default)]
pub struct NoExchange;

impl CostExchange for NoExchange {
    fn exchange(&mut self, local_costs: &[f64], _ledger: &mut CommLedger) -> Result<Vec<f64>> {
        Ok(local_costs.to_vec())
    }
}

/// Flooding over a general graph: `2mn` scalar-units.
#[derive(Debug, Clone, Copy)]
pub struct FloodExchange<'a>(pub &'a Topology);

impl CostExchange for FloodExchange<'_> {
    fn exchange(&mut self, local_costs: &[f64], ledger: &mut CommLedger) -> Result<Vec<f64>> {
        let views = broadcast_scalars(self.0, local_costs, ledger)?;
        // Every site holds the same vector after flooding.
        Ok(views.into_iter().next().unwrap_or_default())
    }
}

/// Converge-cast over a rooted tree: every cost travels to the root
/// (`sum depth(i)` scalar-units); the root computes the plan and sends each
/// site its sample count and the total cost (`2 * sum depth(i)`).
#[derive(Debug, Clone, Copy)]
pub struct TreeExchange<'a>(pub &'a RootedTree);

impl CostExchange for TreeExchange<'_> {
    fn exchange(&mut self, local_costs: &[f64], ledger: &mut CommLedger) -> Result<Vec<f64>> {
        let n = local_costs.len();
        tree_upcast(self.0, &vec![1; n], Unit::Scalars, ledger)?;
        tree_downcast(self.0, &vec![2; n], Unit::Scalars, ledger)?;
        Ok(local_costs.to_vec())
    }
}

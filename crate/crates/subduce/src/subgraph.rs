//! The subduction grid, its i-coupling layers, and the subduction graph.
//!
//! A node is a triple of tableau ranks (m; m1, m2). For each generator index
//! i (except n1) the grid splits into coupling configurations: singlets,
//! vertical bridges (m moves), horizontal bridges (the pair moves) and
//! crossings (both move). The subduction graph is the overlap of all layers.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tableaux::{
    apply_generator_tableau, axial_distance, enumerate_standard_tableaux, Partition,
    StandardTableau,
};

/// A grid point: 0-based rank indices into the three tableau enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
}

impl Node {
    pub fn m_rank(&self) -> usize {
        self.m + 1
    }

    pub fn m1_rank(&self) -> usize {
        self.m1 + 1
    }

    pub fn m2_rank(&self) -> usize {
        self.m2 + 1
    }
}

/// Ambient dimensions (N, N1, N2) of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDims {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
}

impl GridDims {
    pub fn node_count(&self) -> usize {
        self.n * self.n1 * self.n2
    }

    /// 0-based flat index; m slow, then m1, then m2 fast.
    pub fn flat(&self, node: Node) -> usize {
        (node.m * self.n1 + node.m1) * self.n2 + node.m2
    }

    /// 1-based flat index, for display and external formats.
    pub fn flat_index(&self, node: Node) -> usize {
        self.flat(node) + 1
    }

    pub fn node_at(&self, flat: usize) -> Node {
        let m2 = flat % self.n2;
        let rest = flat / self.n2;
        Node {
            m: rest / self.n1,
            m1: rest % self.n1,
            m2,
        }
    }
}

/// Per-generator action tables on one tableau family.
#[derive(Debug, Clone)]
struct ActionTable {
    /// Image rank index under g_i (identity on fixed points).
    perm: Vec<usize>,
    /// Signed axial distance d_i per tableau.
    dist: Vec<i64>,
}

fn action_table(tableaux: &[StandardTableau], i: usize) -> Result<ActionTable> {
    let mut perm = Vec::with_capacity(tableaux.len());
    let mut dist = Vec::with_capacity(tableaux.len());
    for t in tableaux {
        dist.push(axial_distance(t, i)?);
        let s = apply_generator_tableau(t, i)?;
        let j = tableaux
            .iter()
            .position(|u| u.entries() == s.entries())
            .expect("generator image stays within the enumeration");
        perm.push(j);
    }
    Ok(ActionTable { perm, dist })
}

/// The subduction grid for (lambda; lambda1, lambda2), with precomputed
/// generator action tables for every layer index.
#[derive(Debug, Clone)]
pub struct Grid {
    lambda: Partition,
    lambda1: Partition,
    lambda2: Partition,
    tableaux: Vec<StandardTableau>,
    tableaux1: Vec<StandardTableau>,
    tableaux2: Vec<StandardTableau>,
    dims: GridDims,
    n: usize,
    n1: usize,
    /// Indexed by i; None at i = n1 and outside 1..n.
    tables_m: Vec<Option<ActionTable>>,
    tables_f: Vec<Option<ActionTable>>,
}

impl Grid {
    pub fn lambda(&self) -> &Partition {
        &self.lambda
    }

    pub fn lambda1(&self) -> &Partition {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &Partition {
        &self.lambda2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n - self.n1
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn tableaux(&self) -> &[StandardTableau] {
        &self.tableaux
    }

    pub fn tableaux1(&self) -> &[StandardTableau] {
        &self.tableaux1
    }

    pub fn tableaux2(&self) -> &[StandardTableau] {
        &self.tableaux2
    }

    /// Valid layer indices: 1..n-1 without n1.
    pub fn layer_indices(&self) -> Vec<usize> {
        (1..self.n).filter(|&i| i != self.n1).collect()
    }

    /// All nodes in flat order.
    pub fn nodes(&self) -> Vec<Node> {
        (0..self.dims.node_count())
            .map(|k| self.dims.node_at(k))
            .collect()
    }

    fn check_layer(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.n {
            return Err(Error::IndexOutOfRange {
                i,
                min: 1,
                max: self.n - 1,
            });
        }
        if i == self.n1 {
            return Err(Error::UndefinedAction { i });
        }
        Ok(())
    }

    /// Axial distance of the lambda tableau at `node` for layer i.
    pub fn dist_m(&self, i: usize, node: Node) -> i64 {
        self.tables_m[i].as_ref().expect("valid layer").dist[node.m]
    }

    /// Axial distance of the moving pair factor (m1 for i < n1, m2 for i > n1).
    pub fn dist_m12(&self, i: usize, node: Node) -> i64 {
        let t = self.tables_f[i].as_ref().expect("valid layer");
        if i < self.n1 {
            t.dist[node.m1]
        } else {
            t.dist[node.m2]
        }
    }

    /// Component-wise generator action on a node.
    pub fn apply_generator_node(&self, node: Node, i: usize) -> Result<Node> {
        self.check_layer(i)?;
        Ok(self.apply_generator_m12(self.apply_generator_m(node, i), i))
    }

    /// Generator action on the lambda component only.
    pub fn apply_generator_m(&self, node: Node, i: usize) -> Node {
        let tm = self.tables_m[i].as_ref().expect("valid layer");
        Node {
            m: tm.perm[node.m],
            ..node
        }
    }

    /// Generator action on the pair component only.
    pub fn apply_generator_m12(&self, node: Node, i: usize) -> Node {
        let tf = self.tables_f[i].as_ref().expect("valid layer");
        if i < self.n1 {
            Node {
                m1: tf.perm[node.m1],
                ..node
            }
        } else {
            Node {
                m2: tf.perm[node.m2],
                ..node
            }
        }
    }
}

/// Builds the grid, enumerating all three tableau families.
pub fn build_grid(lambda: &Partition, lambda1: &Partition, lambda2: &Partition) -> Result<Grid> {
    let n = lambda.n();
    let n1 = lambda1.n();
    let n2 = lambda2.n();
    if n1 + n2 != n {
        return Err(Error::IncompatiblePartitions { n, n1, n2 });
    }
    let tableaux = enumerate_standard_tableaux(lambda, 1);
    let tableaux1 = enumerate_standard_tableaux(lambda1, 1);
    let tableaux2 = enumerate_standard_tableaux(lambda2, n1 + 1);
    let dims = GridDims {
        n: tableaux.len(),
        n1: tableaux1.len(),
        n2: tableaux2.len(),
    };
    let mut tables_m = vec![None; n];
    let mut tables_f = vec![None; n];
    for i in 1..n {
        if i == n1 {
            continue;
        }
        tables_m[i] = Some(action_table(&tableaux, i)?);
        tables_f[i] = Some(if i < n1 {
            action_table(&tableaux1, i)?
        } else {
            action_table(&tableaux2, i)?
        });
    }
    Ok(Grid {
        lambda: lambda.clone(),
        lambda1: lambda1.clone(),
        lambda2: lambda2.clone(),
        tableaux,
        tableaux1,
        tableaux2,
        dims,
        n,
        n1,
        tables_m,
        tables_f,
    })
}

/// The four i-coupling configuration kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfigKind {
    Singlet,
    VerticalBridge,
    HorizontalBridge,
    Crossing,
}

/// One coupling configuration of a layer.
///
/// Members are listed pole first. For bridges the partner follows; for
/// crossings the order is (pole, <g m; m12>, <m; g m12>, <g m; g m12>),
/// matching the row order of the local block.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub layer: usize,
    pub kind: ConfigKind,
    pub members: Vec<Node>,
    /// d_i of the pole's lambda tableau.
    pub d_m: i64,
    /// d_i of the pole's moving pair factor.
    pub d_m12: i64,
}

impl Configuration {
    pub fn pole(&self) -> Node {
        self.members[0]
    }

    /// Singlet diagonal coefficient 1/d(m12) - 1/d(m), exact for |d| = 1.
    pub fn singlet_alpha(&self) -> i64 {
        debug_assert_eq!(self.kind, ConfigKind::Singlet);
        self.d_m12 - self.d_m
    }
}

/// A layer: the partition of the grid into i-coupling configurations,
/// in ascending pole order.
#[derive(Debug, Clone)]
pub struct Layer {
    pub i: usize,
    pub configurations: Vec<Configuration>,
}

impl Layer {
    /// Counts per configuration kind.
    pub fn census(&self) -> HashMap<ConfigKind, usize> {
        let mut out = HashMap::new();
        for c in &self.configurations {
            *out.entry(c.kind).or_insert(0) += 1;
        }
        out
    }
}

/// Classifies the i-coupling configurations of the grid.
pub fn build_layer(grid: &Grid, i: usize) -> Result<Layer> {
    grid.check_layer(i)?;
    let total = grid.dims.node_count();
    let mut seen = vec![false; total];
    let mut configurations = Vec::new();
    for flat in 0..total {
        if seen[flat] {
            continue;
        }
        let node = grid.dims.node_at(flat);
        let partner = grid.apply_generator_node(node, i)?;
        let m_moves = partner.m != node.m;
        let f_moves = partner.m1 != node.m1 || partner.m2 != node.m2;
        let d_m = grid.dist_m(i, node);
        let d_m12 = grid.dist_m12(i, node);
        let (kind, members) = match (m_moves, f_moves) {
            (false, false) => (ConfigKind::Singlet, vec![node]),
            (true, false) => (ConfigKind::VerticalBridge, vec![node, partner]),
            (false, true) => (ConfigKind::HorizontalBridge, vec![node, partner]),
            (true, true) => {
                let vertical = Node {
                    m: partner.m,
                    ..node
                };
                let horizontal = Node {
                    m: node.m,
                    ..partner
                };
                (
                    ConfigKind::Crossing,
                    vec![node, vertical, horizontal, partner],
                )
            }
        };
        for &member in &members {
            let f = grid.dims.flat(member);
            debug_assert!(!seen[f], "configurations must partition the grid");
            seen[f] = true;
        }
        configurations.push(Configuration {
            layer: i,
            kind,
            members,
            d_m,
            d_m12,
        });
    }
    Ok(Layer { i, configurations })
}

/// All layers of the grid in ascending i order.
pub fn build_layers(grid: &Grid) -> Result<Vec<Layer>> {
    grid.layer_indices()
        .into_iter()
        .map(|i| build_layer(grid, i))
        .collect()
}

/// An edge of the subduction graph: two distinct i-coupled nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: Node,
    pub b: Node,
    pub layer: usize,
}

/// The overlap of all layers: every distinct-node coupled pair, labelled
/// by its (unique) layer index.
#[derive(Debug, Clone)]
pub struct SubductionGraph {
    pub dims: GridDims,
    pub edges: Vec<Edge>,
}

impl SubductionGraph {
    /// Edge counts per layer label, ascending.
    pub fn edges_per_layer(&self) -> Vec<(usize, usize)> {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for e in &self.edges {
            *counts.entry(e.layer).or_insert(0) += 1;
        }
        let mut out: Vec<(usize, usize)> = counts.into_iter().collect();
        out.sort_unstable();
        out
    }
}

/// Overlays the layers into the subduction graph.
///
/// Panics if two distinct nodes were coupled in two different layers; the
/// coupling label is unique by construction of the generator action.
pub fn build_subduction_graph(grid: &Grid, layers: &[Layer]) -> SubductionGraph {
    let mut labels: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    for layer in layers {
        for cfg in &layer.configurations {
            let pairs: Vec<(Node, Node)> = match cfg.kind {
                ConfigKind::Singlet => vec![],
                ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => {
                    vec![(cfg.members[0], cfg.members[1])]
                }
                ConfigKind::Crossing => vec![
                    (cfg.members[0], cfg.members[3]),
                    (cfg.members[1], cfg.members[2]),
                ],
            };
            for (x, y) in pairs {
                let (fa, fb) = (grid.dims.flat(x), grid.dims.flat(y));
                let key = (fa.min(fb), fa.max(fb));
                if let Some(&other) = labels.get(&key) {
                    assert_eq!(
                        other, layer.i,
                        "distinct nodes coupled in two different layers"
                    );
                    continue;
                }
                labels.insert(key, layer.i);
                let (a, b) = if fa <= fb { (x, y) } else { (y, x) };
                edges.push(Edge {
                    a,
                    b,
                    layer: layer.i,
                });
            }
        }
    }
    edges.sort_by_key(|e| (e.layer, grid.dims.flat(e.a), grid.dims.flat(e.b)));
    SubductionGraph {
        dims: grid.dims,
        edges,
    }
}

/// Which row of a configuration's local system an equation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationTag {
    /// The subduction equation written at the pole.
    Pole,
    /// The second crossing equation, written at <g m; m12>.
    CrossingSecond,
    /// The singlet equation at an alpha != 0 node.
    Singlet,
}

/// A reference to one equation of the minimal system: the layer position in
/// the layer list, the configuration position within the layer, and the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationRef {
    pub layer_pos: usize,
    pub config_pos: usize,
    pub tag: EquationTag,
}

/// Extracts a minimal equation-covering set from the graph.
///
/// Breadth-first from the least flat-index node of each component (components
/// in ascending order); every edge is emitted exactly once, in the order it is
/// first reached. Crossings yield their pole equation on the pole edge and the
/// second equation on the other edge; bridges yield their pole equation.
/// Non-trivial singlet equations follow, in (layer, pole) order.
///
/// With `prune_bridge_loops`, bridge equations that close a cycle in the
/// bridge-only subgraph are dropped; such equations are linearly dependent on
/// the rest.
pub fn minimal_equation_edges(
    graph: &SubductionGraph,
    layers: &[Layer],
    prune_bridge_loops: bool,
) -> Vec<EquationRef> {
    let dims = graph.dims;
    let total = dims.node_count();

    // Map each edge to its configuration and equation row.
    let mut edge_info: HashMap<(usize, usize), (EquationRef, bool)> = HashMap::new();
    for (lp, layer) in layers.iter().enumerate() {
        for (cp, cfg) in layer.configurations.iter().enumerate() {
            match cfg.kind {
                ConfigKind::Singlet => {}
                ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => {
                    let key = edge_key(dims, cfg.members[0], cfg.members[1]);
                    edge_info.insert(
                        key,
                        (
                            EquationRef {
                                layer_pos: lp,
                                config_pos: cp,
                                tag: EquationTag::Pole,
                            },
                            true,
                        ),
                    );
                }
                ConfigKind::Crossing => {
                    let key = edge_key(dims, cfg.members[0], cfg.members[3]);
                    edge_info.insert(
                        key,
                        (
                            EquationRef {
                                layer_pos: lp,
                                config_pos: cp,
                                tag: EquationTag::Pole,
                            },
                            false,
                        ),
                    );
                    let key = edge_key(dims, cfg.members[1], cfg.members[2]);
                    edge_info.insert(
                        key,
                        (
                            EquationRef {
                                layer_pos: lp,
                                config_pos: cp,
                                tag: EquationTag::CrossingSecond,
                            },
                            false,
                        ),
                    );
                }
            }
        }
    }

    // Adjacency, neighbors sorted by (layer, flat) for a stable traversal.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total];
    for e in &graph.edges {
        let (fa, fb) = (dims.flat(e.a), dims.flat(e.b));
        adj[fa].push((e.layer, fb));
        adj[fb].push((e.layer, fa));
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
    }

    let mut bridge_dsu = Dsu::new(total);
    let mut emitted: Vec<EquationRef> = Vec::new();
    let mut edge_seen: HashMap<(usize, usize), bool> = HashMap::new();
    let mut visited = vec![false; total];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..total {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(_, v) in &adj[u] {
                let key = (u.min(v), u.max(v));
                if edge_seen.insert(key, true).is_some() {
                    continue;
                }
                let (eq, is_bridge) = edge_info[&key];
                let keep = if is_bridge && prune_bridge_loops {
                    bridge_dsu.union(u, v)
                } else {
                    if is_bridge {
                        bridge_dsu.union(u, v);
                    }
                    true
                };
                if keep {
                    emitted.push(eq);
                }
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }

    // Singlet equations with alpha != 0, after the edge-borne equations.
    for (lp, layer) in layers.iter().enumerate() {
        for (cp, cfg) in layer.configurations.iter().enumerate() {
            if cfg.kind == ConfigKind::Singlet && cfg.singlet_alpha() != 0 {
                emitted.push(EquationRef {
                    layer_pos: lp,
                    config_pos: cp,
                    tag: EquationTag::Singlet,
                });
            }
        }
    }
    emitted
}

fn edge_key(dims: GridDims, a: Node, b: Node) -> (usize, usize) {
    let (fa, fb) = (dims.flat(a), dims.flat(b));
    (fa.min(fb), fa.max(fb))
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(len: usize) -> Self {
        Dsu {
            parent: (0..len).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns false if x and y were already connected.
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.parent[ry] = rx;
        true
    }
}

/// Emits the graph as DOT. Node ids are "m:m1:m2" (1-based ranks); positions
/// place m vertically and the pair index horizontally, as in grid drawings.
/// Byte-deterministic for a fixed graph.
pub fn export_dot(graph: &SubductionGraph) -> String {
    let dims = graph.dims;
    let mut out = String::new();
    out.push_str("graph subduction {\n");
    out.push_str("  node [shape=point];\n");
    for flat in 0..dims.node_count() {
        let n = dims.node_at(flat);
        let x = n.m1 * dims.n2 + n.m2;
        let _ = writeln!(
            out,
            "  \"{}:{}:{}\" [pos=\"{},{}!\"];",
            n.m_rank(),
            n.m1_rank(),
            n.m2_rank(),
            x,
            -(n.m as i64)
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  \"{}:{}:{}\" -- \"{}:{}:{}\" [label=\"({})\"];",
            e.a.m_rank(),
            e.a.m1_rank(),
            e.a.m2_rank(),
            e.b.m_rank(),
            e.b.m1_rank(),
            e.b.m2_rank(),
            e.layer
        );
    }
    out.push_str("}\n");
    out
}

/// A parsed DOT document (the subset emitted by [`export_dot`]).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotGraph {
    /// 1-based rank triples.
    pub nodes: Vec<(usize, usize, usize)>,
    /// (a, b, layer label) with 1-based rank triples.
    pub edges: Vec<((usize, usize, usize), (usize, usize, usize), usize)>,
}

/// Parses the DOT subset produced by [`export_dot`]. Never panics on
/// malformed input.
pub fn parse_dot(text: &str) -> Result<DotGraph> {
    fn parse_id(id: &str) -> Result<(usize, usize, usize)> {
        let mut it = id.split(':');
        let mut next = || -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse("node id needs three ranks".into()))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad rank in node id {id:?}: {e}")))
        };
        let t = (next()?, next()?, next()?);
        if it.next().is_some() {
            return Err(Error::Parse(format!("too many ranks in node id {id:?}")));
        }
        Ok(t)
    }

    fn quoted(s: &str) -> Result<(&str, &str)> {
        let rest = s
            .strip_prefix('"')
            .ok_or_else(|| Error::Parse("expected quoted node id".into()))?;
        let end = rest
            .find('"')
            .ok_or_else(|| Error::Parse("unterminated node id".into()))?;
        Ok((&rest[..end], &rest[end + 1..]))
    }

    let mut graph = DotGraph::default();
    let mut saw_header = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line.starts_with("graph") && line.ends_with('{') {
                saw_header = true;
                continue;
            }
            return Err(Error::Parse("missing graph header".into()));
        }
        if line == "}" {
            return Ok(graph);
        }
        if line.starts_with("node ") {
            continue;
        }
        let (id, rest) = quoted(line)?;
        let rest = rest.trim_start();
        if let Some(rest) = rest.strip_prefix("--") {
            let (id2, rest) = quoted(rest.trim_start())?;
            let label_start = rest
                .find("label=\"(")
                .ok_or_else(|| Error::Parse("edge without layer label".into()))?;
            let tail = &rest[label_start + 8..];
            let close = tail
                .find(')')
                .ok_or_else(|| Error::Parse("unterminated layer label".into()))?;
            let layer = tail[..close]
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad layer label: {e}")))?;
            graph.edges.push((parse_id(id)?, parse_id(id2)?, layer));
        } else {
            graph.nodes.push(parse_id(id)?);
        }
    }
    Err(Error::Parse("missing closing brace".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn grid(l: &str, l1: &str, l2: &str) -> Grid {
        build_grid(&part(l), &part(l1), &part(l2)).unwrap()
    }

    fn census_counts(layer: &Layer) -> (usize, usize, usize, usize) {
        let c = layer.census();
        (
            *c.get(&ConfigKind::Singlet).unwrap_or(&0),
            *c.get(&ConfigKind::VerticalBridge).unwrap_or(&0),
            *c.get(&ConfigKind::HorizontalBridge).unwrap_or(&0),
            *c.get(&ConfigKind::Crossing).unwrap_or(&0),
        )
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(grid("4,1", "1", "3,1").nodes().len(), 12);
        assert_eq!(grid("2", "1", "1").nodes().len(), 1);
        assert_eq!(grid("2,1", "1", "2").nodes().len(), 2);
        assert!(build_grid(&part("3"), &part("1"), &part("1")).is_err());
    }

    #[test]
    fn flat_index_invariant() {
        let g = grid("4,1", "1", "3,1");
        let d = g.dims();
        for (k, node) in g.nodes().iter().enumerate() {
            assert_eq!(d.flat(*node), k);
            assert_eq!(
                d.flat_index(*node),
                ((node.m_rank() - 1) * d.n1 + (node.m1_rank() - 1)) * d.n2 + node.m2_rank()
            );
            assert_eq!(d.node_at(k), *node);
        }
    }

    #[test]
    fn node_action_figure_edge() {
        // <1;1,1> --(4)-- <2;1,2> is the diagonal crossing edge of the 4-layer.
        let g = grid("4,1", "1", "3,1");
        let n = Node { m: 0, m1: 0, m2: 0 };
        let image = g.apply_generator_node(n, 4).unwrap();
        assert_eq!(image, Node { m: 1, m1: 0, m2: 1 });
        assert_eq!(g.apply_generator_node(image, 4).unwrap(), n);
        assert!(g.apply_generator_node(n, 1).is_err()); // i = n1
    }

    #[test]
    fn four_layer_census() {
        let g = grid("4,1", "1", "3,1");
        let layer = build_layer(&g, 4).unwrap();
        assert_eq!(census_counts(&layer), (2, 1, 2, 1));
        // Worked example: the crossing is {<1;1,1>, <2;1,2>, <1;1,2>, <2;1,1>}.
        let crossing = layer
            .configurations
            .iter()
            .find(|c| c.kind == ConfigKind::Crossing)
            .unwrap();
        let mut members = crossing.members.clone();
        members.sort();
        assert_eq!(
            members,
            vec![
                Node { m: 0, m1: 0, m2: 0 },
                Node { m: 0, m1: 0, m2: 1 },
                Node { m: 1, m1: 0, m2: 0 },
                Node { m: 1, m1: 0, m2: 1 },
            ]
        );
        assert_eq!(crossing.pole(), Node { m: 0, m1: 0, m2: 0 });
    }

    #[test]
    fn two_layer_census() {
        let g = grid("4,1", "1", "3,1");
        let layer = build_layer(&g, 2).unwrap();
        assert_eq!(census_counts(&layer), (6, 3, 0, 0));
    }

    #[test]
    fn single_node_layer() {
        let g = grid("2,1", "1", "2");
        let layer = build_layer(&g, 2).unwrap();
        assert_eq!(layer.configurations.len(), 1);
        assert_eq!(layer.configurations[0].kind, ConfigKind::VerticalBridge);
    }

    #[test]
    fn layers_partition_the_grid() {
        for (l, l1, l2) in [("4,1", "1", "3,1"), ("3,2", "2,1", "2"), ("3,1,1", "2", "2,1")] {
            let g = grid(l, l1, l2);
            for layer in build_layers(&g).unwrap() {
                let mut seen = vec![false; g.dims().node_count()];
                for cfg in &layer.configurations {
                    let expect = match cfg.kind {
                        ConfigKind::Singlet => 1,
                        ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => 2,
                        ConfigKind::Crossing => 4,
                    };
                    assert_eq!(cfg.members.len(), expect);
                    assert!(cfg.members.contains(&cfg.pole()));
                    for &m in &cfg.members {
                        let f = g.dims().flat(m);
                        assert!(!seen[f]);
                        seen[f] = true;
                    }
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn kinds_match_axial_distances() {
        let g = grid("3,2", "2,1", "2");
        for layer in build_layers(&g).unwrap() {
            for cfg in &layer.configurations {
                let expected = match (cfg.d_m.abs() == 1, cfg.d_m12.abs() == 1) {
                    (true, true) => ConfigKind::Singlet,
                    (false, true) => ConfigKind::VerticalBridge,
                    (true, false) => ConfigKind::HorizontalBridge,
                    (false, false) => ConfigKind::Crossing,
                };
                assert_eq!(cfg.kind, expected);
            }
        }
    }

    #[test]
    fn pole_is_least_member() {
        let g = grid("3,2", "2,1", "2");
        for layer in build_layers(&g).unwrap() {
            for cfg in &layer.configurations {
                let least = cfg.members.iter().min().unwrap();
                assert_eq!(cfg.pole(), *least);
            }
        }
    }

    #[test]
    fn figure_graph_edge_counts() {
        let g = grid("4,1", "1", "3,1");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        assert_eq!(graph.edges.len(), 13);
        assert_eq!(graph.edges_per_layer(), vec![(2, 3), (3, 5), (4, 5)]);
    }

    #[test]
    fn tiny_graphs() {
        let g = grid("2", "1", "1");
        let layers = build_layers(&g).unwrap();
        assert!(layers.is_empty());
        let graph = build_subduction_graph(&g, &layers);
        assert!(graph.edges.is_empty());

        let g = grid("2,1", "1", "2");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.edges[0].layer, 2);
    }

    #[test]
    fn minimal_equation_counts() {
        let g = grid("2,1", "1", "2");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        assert_eq!(minimal_equation_edges(&graph, &layers, false).len(), 1);

        let g = grid("4,1", "1", "3,1");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        let mut expected = 0;
        for layer in &layers {
            for cfg in &layer.configurations {
                expected += match cfg.kind {
                    ConfigKind::Crossing => 2,
                    ConfigKind::VerticalBridge | ConfigKind::HorizontalBridge => 1,
                    ConfigKind::Singlet => usize::from(cfg.singlet_alpha() != 0),
                };
            }
        }
        let eqs = minimal_equation_edges(&graph, &layers, false);
        assert_eq!(eqs.len(), expected);
    }

    #[test]
    fn singlet_alpha_zero_emits_nothing() {
        let g = grid("2", "1", "1");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        assert!(minimal_equation_edges(&graph, &layers, false).is_empty());
    }

    #[test]
    fn dot_round_trip() {
        let g = grid("4,1", "1", "3,1");
        let layers = build_layers(&g).unwrap();
        let graph = build_subduction_graph(&g, &layers);
        let dot = export_dot(&graph);
        let parsed = parse_dot(&dot).unwrap();
        assert_eq!(parsed.nodes.len(), 12);
        assert_eq!(parsed.edges.len(), 13);
        for (e, (a, b, layer)) in graph.edges.iter().zip(parsed.edges.iter()) {
            assert_eq!(*a, (e.a.m_rank(), e.a.m1_rank(), e.a.m2_rank()));
            assert_eq!(*b, (e.b.m_rank(), e.b.m1_rank(), e.b.m2_rank()));
            assert_eq!(*layer, e.layer);
        }
        // Emission is deterministic.
        assert_eq!(dot, export_dot(&graph));
    }

    #[test]
    fn dot_parse_rejects_garbage() {
        assert!(parse_dot("").is_err());
        assert!(parse_dot("graph g {\n\"1:1\" ;\n}\n").is_err());
        assert!(parse_dot("graph g {\n\"1:1:1\" -- \"1:1:2\";\n}\n").is_err());
        assert!(parse_dot("graph g {\n").is_err());
    }
}

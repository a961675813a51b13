//! Per-device local conflict graphs and greedy weighted independent sets.

use crate::conflicts::ConflictStructure;
use crate::topology::{ConnectivityGraph, LinkId, NodeId};

/// A small conflict graph over the links a device hears about.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConflictGraph {
    vertices: Vec<LinkId>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

impl LocalConflictGraph {
    pub fn new() -> Self {
        Self {
            vertices: Vec::new(),
            weights: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    /// Builds a graph from explicit vertices, weights and edges (given as
    /// link-id pairs).
    pub fn from_parts(vertices: &[LinkId], weights: &[f64], edges: &[(LinkId, LinkId)]) -> Self {
        assert_eq!(vertices.len(), weights.len());
        let mut g = Self::new();
        for (&v, &w) in vertices.iter().zip(weights) {
            g.add_vertex(v, w);
        }
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    fn index(&self, link: LinkId) -> Option<usize> {
        self.vertices.iter().position(|&v| v == link)
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.index(link).is_some()
    }

    /// Adds a vertex unless present.
    pub fn add_vertex(&mut self, link: LinkId, weight: f64) {
        if !self.contains(link) {
            self.vertices.push(link);
            self.weights.push(weight);
            self.adjacency.push(Vec::new());
        }
    }

    /// Adds an undirected edge between two present vertices.
    pub fn add_edge(&mut self, a: LinkId, b: LinkId) {
        let ia = self.index(a).expect("edge endpoint must be a vertex");
        let ib = self.index(b).expect("edge endpoint must be a vertex");
        assert_ne!(ia, ib, "self-loop");
        if !self.adjacency[ia].contains(&ib) {
            self.adjacency[ia].push(ib);
            self.adjacency[ib].push(ia);
        }
    }

    pub fn vertices(&self) -> &[LinkId] {
        &self.vertices
    }

    pub fn weight(&self, link: LinkId) -> Option<f64> {
        self.index(link).map(|i| self.weights[i])
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: LinkId, b: LinkId) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(ia), Some(ib)) => self.adjacency[ia].contains(&ib),
            _ => false,
        }
    }

    pub fn neighbors(&self, link: LinkId) -> impl Iterator<Item = LinkId> + '_ {
        let adj = self.index(link).map(|i| self.adjacency[i].as_slice()).unwrap_or(&[]);
        adj.iter().map(|&j| self.vertices[j])
    }
}

impl Default for LocalConflictGraph {
    fn default() -> Self {
        Self::new()
    }
}

/// The local conflict graph of `device` from its own candidate link (if any)
/// and the requests announced by nearby devices.
///
/// A request is kept if it is destined to `device`, conflicts with the own
/// candidate, or conflicts with one of `device`'s incoming links. Edges are
/// the global pairwise conflicts among kept links that involve the own
/// candidate or a link destined to `device`: the conflicts this device can
/// observe.
pub fn build_local_conflict_graph(
    device: NodeId,
    own: Option<(LinkId, f64)>,
    requests: &[(LinkId, f64)],
    graph: &ConnectivityGraph,
    conflicts: &ConflictStructure,
) -> LocalConflictGraph {
    let mut lcg = LocalConflictGraph::new();
    if let Some((e, w)) = own {
        lcg.add_vertex(e, w);
    }
    let own_link = own.map(|(e, _)| e);
    let incoming = graph.in_links(device);
    for &(e, w) in requests {
        if Some(e) == own_link {
            continue;
        }
        let keep = graph.link(e).dst == device
            || own_link.is_some_and(|o| conflicts.conflicts(o, e))
            || incoming.iter().any(|&f| conflicts.conflicts(f, e));
        if keep {
            lcg.add_vertex(e, w);
        }
    }
    let observed = |e: LinkId| Some(e) == own_link || graph.link(e).dst == device;
    let vertices = lcg.vertices.clone();
    for (i, &a) in vertices.iter().enumerate() {
        for &b in &vertices[i + 1..] {
            if (observed(a) || observed(b)) && conflicts.conflicts(a, b) {
                lcg.add_edge(a, b);
            }
        }
    }
    lcg
}

/// Greedy maximum weighted independent set: visit vertices by decreasing
/// weight (ties to the lower link id), taking every positive-weight vertex
/// not yet excluded and excluding its neighbors.
pub fn greedy_mwis(lcg: &LocalConflictGraph) -> Vec<LinkId> {
    let n = lcg.vertices.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        lcg.weights[b]
            .total_cmp(&lcg.weights[a])
            .then(lcg.vertices[a].cmp(&lcg.vertices[b]))
    });
    let mut excluded = vec![false; n];
    let mut chosen = Vec::new();
    for i in order {
        if !excluded[i] && lcg.weights[i] > 0.0 {
            chosen.push(lcg.vertices[i]);
            for &j in &lcg.adjacency[i] {
                excluded[j] = true;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflicts::build_ach;
    use crate::topology::{Point, TransceiverSpec};

    #[test]
    fn triangle_takes_heaviest() {
        let g = LocalConflictGraph::from_parts(&[0, 1, 2], &[5.0, 4.0, 3.0], &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(greedy_mwis(&g), vec![0]);
    }

    #[test]
    fn edgeless_takes_all_positive() {
        let g = LocalConflictGraph::from_parts(&[4, 2, 9], &[1.0, 3.0, 2.0], &[]);
        assert_eq!(greedy_mwis(&g), vec![2, 9, 4]);
    }

    #[test]
    fn zero_weight_excluded() {
        let g = LocalConflictGraph::from_parts(&[0, 1], &[0.0, 2.0], &[]);
        assert_eq!(greedy_mwis(&g), vec![1]);
    }

    #[test]
    fn path_is_not_optimal() {
        let g = LocalConflictGraph::from_parts(&[0, 1, 2], &[2.0, 3.0, 2.0], &[(0, 1), (1, 2)]);
        assert_eq!(greedy_mwis(&g), vec![1]);
    }

    /// Relay 0 -> 1 -> 2 plus a distant pair 3 -> 4 on the line.
    fn relay() -> (ConnectivityGraph, ConflictStructure) {
        let pos = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(11.0, 0.0),
        ];
        let g = ConnectivityGraph::from_links(pos, &[(0, 1), (1, 2), (3, 4)], 1.0);
        let spec = TransceiverSpec::siso(5, true);
        let c = build_ach(&g, &spec, 1.5, true);
        (g, c)
    }

    #[test]
    fn no_requests_gives_isolated_candidate() {
        let (g, c) = relay();
        let lcg = build_local_conflict_graph(1, Some((1, 2.0)), &[], &g, &c);
        assert_eq!(lcg.vertices(), &[1]);
        assert_eq!(lcg.edge_count(), 0);
    }

    #[test]
    fn request_towards_device_adds_half_duplex_edge() {
        let (g, c) = relay();
        let lcg = build_local_conflict_graph(1, Some((1, 2.0)), &[(0, 3.0)], &g, &c);
        assert_eq!(lcg.vertices(), &[1, 0]);
        assert!(lcg.has_edge(0, 1));
        assert_eq!(greedy_mwis(&lcg), vec![0]);
    }

    #[test]
    fn far_request_is_ignored() {
        let (g, c) = relay();
        let lcg = build_local_conflict_graph(1, Some((1, 2.0)), &[(2, 3.0)], &g, &c);
        assert_eq!(lcg.vertices(), &[1]);
    }
}

//! Resonance clusters: triads joined by shared wavevectors.
//!
//! Nodes are triads taken up to the `k1 <-> k2` swap. Each wavevector shared by
//! two triads yields one edge, labelled by the role of that vector in each
//! triad: `A` when it is the high-frequency `k3`, `P` otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::lattice::{Triad, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    /// Passive: `k1` or `k2`.
    P,
    /// Active, high-frequency: `k3`.
    A,
}

impl Role {
    pub fn of(v: WaveVector, t: &Triad) -> Option<Role> {
        if t.k3 == v {
            Some(Role::A)
        } else if t.k1 == v || t.k2 == v {
            Some(Role::P)
        } else {
            None
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::P => "P",
            Role::A => "A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connection {
    PP,
    AP,
    AA,
}

impl Connection {
    pub fn from_roles(a: Role, b: Role) -> Self {
        match (a, b) {
            (Role::P, Role::P) => Connection::PP,
            (Role::A, Role::A) => Connection::AA,
            _ => Connection::AP,
        }
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One shared vector between nodes `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub shared: WaveVector,
    pub role_a: Role,
    pub role_b: Role,
}

impl Edge {
    pub fn connection(&self) -> Connection {
        Connection::from_roles(self.role_a, self.role_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriadGraph {
    pub nodes: Vec<Triad>,
    /// Sorted by `(a, b, shared)`.
    pub edges: Vec<Edge>,
    /// Node indices per component; components ordered by their smallest node.
    pub components: Vec<Vec<usize>>,
}

/// Collapses `(k1,k2;k3)` and `(k2,k1;k3)` to one representative, sorted canonically.
pub fn dedup_unordered(triads: &[Triad]) -> Vec<Triad> {
    let set: BTreeSet<Triad> = triads.iter().map(Triad::unordered).collect();
    set.into_iter().collect()
}

/// Builds the sharing graph. Input is deduplicated up to the `k1 <-> k2` swap
/// first, so ordered enumerations can be passed directly.
pub fn build_graph(triads: &[Triad]) -> TriadGraph {
    let nodes = dedup_unordered(triads);

    let mut incidence: BTreeMap<WaveVector, Vec<(usize, Role)>> = BTreeMap::new();
    for (i, t) in nodes.iter().enumerate() {
        for k in t.members() {
            if let Some(role) = Role::of(k, t) {
                incidence.entry(k).or_default().push((i, role));
            }
        }
    }

    let mut edges = Vec::new();
    let mut uf = UnionFind::<usize>::new(nodes.len());
    for (&shared, list) in &incidence {
        for (x, &(a, role_a)) in list.iter().enumerate() {
            for &(b, role_b) in &list[x + 1..] {
                edges.push(Edge { a, b, shared, role_a, role_b });
                uf.union(a, b);
            }
        }
    }
    edges.sort_unstable();

    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..nodes.len() {
        by_root.entry(uf.find(i)).or_default().push(i);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    components.sort_unstable_by_key(|c| c[0]);

    TriadGraph { nodes, edges, components }
}

impl TriadGraph {
    /// Component index of every node.
    pub fn component_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.nodes.len()];
        for (c, members) in self.components.iter().enumerate() {
            for &i in members {
                out[i] = c;
            }
        }
        out
    }

    /// Wavevectors carried by each component.
    pub fn component_vectors(&self) -> Vec<BTreeSet<WaveVector>> {
        self.components.iter().map(|members| members.iter().flat_map(|&i| self.nodes[i].members()).collect()).collect()
    }
}

/// Triads sharing one passive (non-`k3`) vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NStar {
    pub center: WaveVector,
    pub members: Vec<Triad>,
}

impl NStar {
    pub fn n(&self) -> usize {
        self.members.len()
    }
}

/// Every vector that is passive in at least two triads, with those triads.
/// Sorted by `N` descending, then by center.
pub fn find_nstars(triads: &[Triad]) -> Vec<NStar> {
    let nodes = dedup_unordered(triads);
    let mut by_center: BTreeMap<WaveVector, Vec<Triad>> = BTreeMap::new();
    for t in &nodes {
        by_center.entry(t.k1).or_default().push(*t);
        by_center.entry(t.k2).or_default().push(*t);
    }
    let mut stars: Vec<NStar> = by_center
        .into_iter()
        .filter(|(_, m)| m.len() >= 2)
        .map(|(center, members)| NStar { center, members })
        .collect();
    stars.sort_by(|a, b| b.n().cmp(&a.n()).then(a.center.cmp(&b.center)));
    stars
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionHistogram {
    pub pp: usize,
    pub ap: usize,
    pub aa: usize,
}

impl ConnectionHistogram {
    fn add(&mut self, c: Connection) {
        match c {
            Connection::PP => self.pp += 1,
            Connection::AP => self.ap += 1,
            Connection::AA => self.aa += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pp + self.ap + self.aa
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub index: usize,
    pub triads: usize,
    pub vectors: usize,
    pub edges: ConnectionHistogram,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub components: Vec<ComponentSummary>,
    pub total_triads: usize,
    pub total_vectors: usize,
    pub total_edges: ConnectionHistogram,
}

pub fn component_stats(graph: &TriadGraph) -> ClusterSummary {
    let comp_of = graph.component_of();
    let mut hist = vec![ConnectionHistogram::default(); graph.components.len()];
    let mut total_edges = ConnectionHistogram::default();
    for e in &graph.edges {
        hist[comp_of[e.a]].add(e.connection());
        total_edges.add(e.connection());
    }
    let vectors = graph.component_vectors();
    let components = graph
        .components
        .iter()
        .zip(vectors.iter())
        .zip(hist)
        .enumerate()
        .map(|(index, ((members, vecs), edges))| ComponentSummary {
            index,
            triads: members.len(),
            vectors: vecs.len(),
            edges,
        })
        .collect();
    let all_vectors: BTreeSet<WaveVector> = graph.nodes.iter().flat_map(|t| t.members()).collect();
    ClusterSummary { components, total_triads: graph.nodes.len(), total_vectors: all_vectors.len(), total_edges }
}

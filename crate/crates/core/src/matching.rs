//! Maximum-cardinality envy-free matching in an agent–bundle acceptability graph.
//!
//! A matching is envy-free when no unmatched agent is adjacent to a matched bundle.
//! Starting from a maximum matching, every bundle adjacent to an unmatched agent is
//! discarded and its partner freed; repeating to a fixed point leaves the largest
//! envy-free matching.

use std::collections::BTreeSet;

/// Bipartite graph between `agents` agent vertices and `parts` bundle vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptabilityGraph {
    agents: usize,
    parts: usize,
    adj: Vec<BTreeSet<usize>>,
}

impl AcceptabilityGraph {
    pub fn new(agents: usize, parts: usize) -> Self {
        AcceptabilityGraph {
            agents,
            parts,
            adj: vec![BTreeSet::new(); agents],
        }
    }

    pub fn from_edges(agents: usize, parts: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(agents, parts);
        for (a, p) in edges {
            g.add_edge(a, p);
        }
        g
    }

    /// # Panics
    /// If either endpoint does not exist.
    pub fn add_edge(&mut self, agent: usize, part: usize) {
        assert!(agent < self.agents && part < self.parts, "edge ({agent}, {part}) out of range");
        self.adj[agent].insert(part);
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn has_edge(&self, agent: usize, part: usize) -> bool {
        self.adj[agent].contains(&part)
    }

    pub fn neighbours(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[agent].iter().copied()
    }

    /// Whether `pairs` is a matching of this graph with no envious unmatched agent.
    pub fn is_envy_free_matching(&self, pairs: &[(usize, usize)]) -> bool {
        let mut agent_used = vec![false; self.agents];
        let mut part_used = vec![false; self.parts];
        for &(a, p) in pairs {
            if a >= self.agents || p >= self.parts || !self.has_edge(a, p) {
                return false;
            }
            if std::mem::replace(&mut agent_used[a], true) || std::mem::replace(&mut part_used[p], true) {
                return false;
            }
        }
        (0..self.agents)
            .filter(|&a| !agent_used[a])
            .all(|a| self.neighbours(a).all(|p| !part_used[p]))
    }
}

/// Maximum matching by augmenting paths; agents and their neighbours in ascending order.
fn maximum_matching(g: &AcceptabilityGraph) -> Vec<Option<usize>> {
    fn augment(
        g: &AcceptabilityGraph,
        a: usize,
        visited: &mut [bool],
        part_match: &mut [Option<usize>],
        agent_match: &mut [Option<usize>],
    ) -> bool {
        for p in g.neighbours(a) {
            if std::mem::replace(&mut visited[p], true) {
                continue;
            }
            let free = match part_match[p] {
                None => true,
                Some(b) => augment(g, b, visited, part_match, agent_match),
            };
            if free {
                part_match[p] = Some(a);
                agent_match[a] = Some(p);
                return true;
            }
        }
        false
    }

    let mut agent_match = vec![None; g.agents];
    let mut part_match = vec![None; g.parts];
    for a in 0..g.agents {
        let mut visited = vec![false; g.parts];
        augment(g, a, &mut visited, &mut part_match, &mut agent_match);
    }
    agent_match
}

/// A maximum-cardinality envy-free matching as `(agent, part)` pairs sorted by agent.
pub fn envy_free_matching(g: &AcceptabilityGraph) -> Vec<(usize, usize)> {
    let mut agent_match = maximum_matching(g);
    let mut part_owner = vec![None; g.parts];
    for (a, p) in agent_match.iter().enumerate() {
        if let Some(p) = *p {
            part_owner[p] = Some(a);
        }
    }
    let mut discarded = vec![false; g.parts];
    loop {
        let mut changed = false;
        for a in 0..g.agents {
            if agent_match[a].is_some() {
                continue;
            }
            for p in g.neighbours(a) {
                if std::mem::replace(&mut discarded[p], true) {
                    continue;
                }
                if let Some(b) = part_owner[p].take() {
                    agent_match[b] = None;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    agent_match
        .iter()
        .enumerate()
        .filter_map(|(a, p)| p.map(|p| (a, p)))
        .collect()
}

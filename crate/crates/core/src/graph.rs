//! Small undirected-graph helpers shared by the clique metrics, variable
//! elimination and the singly-connected checks.

use std::collections::BTreeSet;

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    /// Merges the sets of `a` and `b`; false when they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Undirected graph over `0..n` with sorted neighbor sets.
#[derive(Debug, Clone)]
pub(crate) struct UGraph {
    pub adj: Vec<BTreeSet<usize>>,
}

impl UGraph {
    pub fn new(n: usize) -> Self {
        UGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    /// Connects every pair in `clique`.
    pub fn add_clique(&mut self, clique: &[usize]) {
        for (i, &a) in clique.iter().enumerate() {
            for &b in &clique[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    fn fill_in(&self, v: usize, alive: &[bool]) -> usize {
        let nbrs: Vec<usize> = self.adj[v].iter().copied().filter(|&u| alive[u]).collect();
        let mut missing = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !self.adj[a].contains(&b) {
                    missing += 1;
                }
            }
        }
        missing
    }

    /// Greedy min-fill elimination of the vertices in `candidates`. Ties go to the
    /// vertex whose `names` entry sorts first. Returns the order and, for each
    /// step, the eliminated vertex together with its live neighbours.
    pub fn min_fill_order(&self, candidates: &[usize], names: &[&str]) -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut g = self.clone();
        let mut alive = vec![true; self.adj.len()];
        let mut remaining: BTreeSet<usize> = candidates.iter().copied().collect();
        let mut order = Vec::new();
        let mut cliques = Vec::new();
        while !remaining.is_empty() {
            let v = *remaining
                .iter()
                .min_by(|&&a, &&b| {
                    g.fill_in(a, &alive)
                        .cmp(&g.fill_in(b, &alive))
                        .then_with(|| names[a].cmp(names[b]))
                })
                .expect("non-empty");
            let nbrs: Vec<usize> = g.adj[v].iter().copied().filter(|&u| alive[u]).collect();
            g.add_clique(&nbrs);
            let mut clique = vec![v];
            clique.extend(&nbrs);
            cliques.push(clique);
            alive[v] = false;
            remaining.remove(&v);
            order.push(v);
        }
        (order, cliques)
    }
}

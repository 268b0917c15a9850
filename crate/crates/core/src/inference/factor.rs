use crate::model::{Cpt, CptTree, Network};

/// Index-based view of a network: cardinalities, parent indices and one flat
/// table per node (`row * card + value`, rows row-major over the parents).
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub names: Vec<String>,
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub tables: Vec<Vec<f64>>,
}

impl Compiled {
    /// Assumes a valid network.
    pub fn new(net: &Network) -> Self {
        let names: Vec<String> = net.variables().iter().map(|v| v.name.clone()).collect();
        let cards: Vec<usize> = net.variables().iter().map(|v| v.card()).collect();
        let mut parents = Vec::with_capacity(names.len());
        let mut tables = Vec::with_capacity(names.len());
        for name in &names {
            let node = net.node(name).expect("valid network has a node per variable");
            let pidx: Vec<usize> = node
                .parents
                .iter()
                .map(|p| net.var_index(p).expect("declared parent"))
                .collect();
            let table = match &node.cpt {
                Cpt::Table(t) => t.rows.iter().flat_map(|r| r.probs().iter().copied()).collect(),
                Cpt::Tree(t) => tree_table(net, t, &node.parents, &pidx, &cards),
            };
            parents.push(pidx);
            tables.push(table);
        }
        Compiled {
            names,
            cards,
            parents,
            tables,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// P(var = value | parents) under a full assignment of value indices.
    pub fn cond_prob(&self, var: usize, assignment: &[usize]) -> f64 {
        let mut row = 0;
        for &p in &self.parents[var] {
            row = row * self.cards[p] + assignment[p];
        }
        self.tables[var][row * self.cards[var] + assignment[var]]
    }

    pub fn joint(&self, assignment: &[usize]) -> f64 {
        (0..self.len()).map(|v| self.cond_prob(v, assignment)).product()
    }

    pub fn cpt_factor(&self, var: usize) -> Factor {
        let mut vars = self.parents[var].clone();
        vars.push(var);
        let cards = vars.iter().map(|&v| self.cards[v]).collect();
        Factor::new(vars, cards, self.tables[var].clone())
    }
}

fn tree_table(net: &Network, t: &CptTree, parent_names: &[String], pidx: &[usize], cards: &[usize]) -> Vec<f64> {
    let rows: usize = pidx.iter().map(|&p| cards[p]).product();
    let mut out = Vec::new();
    let mut values = vec![0usize; pidx.len()];
    for row in 0..rows {
        let mut r = row;
        for k in (0..pidx.len()).rev() {
            values[k] = r % cards[pidx[k]];
            r /= cards[pidx[k]];
        }
        let mut node = t;
        while let CptTree::Node { test, branches } = node {
            let k = parent_names
                .iter()
                .position(|p| p == test)
                .expect("tree tests a parent");
            let value = &net.variable(test).expect("declared").values[values[k]];
            node = &branches
                .iter()
                .find(|(v, _)| v == value)
                .expect("tree fully branched")
                .1;
        }
        if let CptTree::Leaf(d) = node {
            out.extend_from_slice(d.probs());
        }
    }
    out
}

/// A table over `vars`, row-major with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor { vars, cards, values }
    }

    pub fn constant(value: f64) -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![value])
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vars.contains(&v)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.vars.len()];
        for k in (0..self.vars.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.cards[k + 1];
        }
        s
    }

    /// Decodes a flat index into per-variable value indices.
    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.vars.len()).rev() {
            out[k] = index % self.cards[k];
            index /= self.cards[k];
        }
    }

    /// Slices out observed variables (`evidence[v] = Some(value)`).
    pub fn reduce(&self, evidence: &[Option<usize>]) -> Factor {
        if self.vars.iter().all(|&v| evidence[v].is_none()) {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&k| evidence[self.vars[k]].is_none())
            .collect();
        let vars: Vec<usize> = keep.iter().map(|&k| self.vars[k]).collect();
        let cards: Vec<usize> = keep.iter().map(|&k| self.cards[k]).collect();
        let size: usize = cards.iter().product();
        let strides = self.strides();
        let base: usize = (0..self.vars.len())
            .filter_map(|k| evidence[self.vars[k]].map(|val| val * strides[k]))
            .sum();
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; keep.len()];
        for _ in 0..size {
            let off: usize = keep.iter().zip(&idx).map(|(&k, &i)| i * strides[k]).sum();
            values.push(self.values[base + off]);
            for d in (0..keep.len()).rev() {
                idx[d] += 1;
                if idx[d] < cards[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Factor::new(vars, cards, values)
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (k, &v) in other.vars.iter().enumerate() {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(other.cards[k]);
            }
        }
        let size: usize = cards.iter().product();
        let sa = self.strides();
        let sb = other.strides();
        let map_a: Vec<Option<usize>> = vars
            .iter()
            .map(|v| self.vars.iter().position(|x| x == v).map(|k| sa[k]))
            .collect();
        let map_b: Vec<Option<usize>> = vars
            .iter()
            .map(|v| other.vars.iter().position(|x| x == v).map(|k| sb[k]))
            .collect();
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; vars.len()];
        for _ in 0..size {
            let (mut ia, mut ib) = (0, 0);
            for d in 0..vars.len() {
                if let Some(s) = map_a[d] {
                    ia += idx[d] * s;
                }
                if let Some(s) = map_b[d] {
                    ib += idx[d] * s;
                }
            }
            values.push(self.values[ia] * other.values[ib]);
            for d in (0..vars.len()).rev() {
                idx[d] += 1;
                if idx[d] < cards[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Factor::new(vars, cards, values)
    }

    pub fn sum_out(&self, v: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&x| x == v) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut values = vec![0.0; cards.iter().product()];
        let mut idx = vec![0usize; self.vars.len()];
        for (flat, &val) in self.values.iter().enumerate() {
            self.decode(flat, &mut idx);
            let mut out = 0;
            for k in 0..self.vars.len() {
                if k != pos {
                    out = out * self.cards[k] + idx[k];
                }
            }
            values[out] += val;
        }
        Factor::new(vars, cards, values)
    }

    /// Values over a single remaining variable, in value order.
    pub fn marginal_of(&self, v: usize) -> Vec<f64> {
        let pos = self.vars.iter().position(|&x| x == v).expect("variable in scope");
        let mut out = vec![0.0; self.cards[pos]];
        let mut idx = vec![0usize; self.vars.len()];
        for (flat, &val) in self.values.iter().enumerate() {
            self.decode(flat, &mut idx);
            out[idx[pos]] += val;
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

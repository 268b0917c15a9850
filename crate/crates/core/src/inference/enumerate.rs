use std::collections::HashSet;

use super::factor::Compiled;
use super::{evidence_indices, InferenceError, InferenceResult, Query};
use crate::model::{tree_lookup, Context, Cpt, ModelError, Network};

/// Product of every node's conditional probability under a full assignment.
pub fn joint_probability(net: &Network, assignment: &Context) -> Result<f64, ModelError> {
    assignment.check(net)?;
    let mut p = 1.0;
    for var in net.variables() {
        let value = assignment
            .get(&var.name)
            .ok_or_else(|| ModelError::Unbound(var.name.clone()))?;
        let vi = var.value_index(value).expect("checked");
        let node = net
            .node(&var.name)
            .ok_or_else(|| ModelError::UnknownVariable(var.name.clone()))?;
        let dist = match &node.cpt {
            Cpt::Tree(t) => tree_lookup(t, assignment)?.clone(),
            Cpt::Table(tab) => {
                let mut row = 0;
                for parent in &node.parents {
                    let pv = net
                        .variable(parent)
                        .ok_or_else(|| ModelError::UnknownVariable(parent.clone()))?;
                    let val = assignment
                        .get(parent)
                        .ok_or_else(|| ModelError::Unbound(parent.clone()))?;
                    row = row * pv.card() + pv.value_index(val).expect("checked");
                }
                tab.rows[row].clone()
            }
        };
        p *= dist.probs()[vi];
    }
    Ok(p)
}

/// Calls `f` with every full assignment consistent with `evidence`, in
/// row-major order over the declared variables.
fn for_each_assignment(cards: &[usize], evidence: &[Option<usize>], mut f: impl FnMut(&[usize])) {
    let free: Vec<usize> = (0..cards.len()).filter(|&i| evidence[i].is_none()).collect();
    let mut a: Vec<usize> = evidence.iter().map(|e| e.unwrap_or(0)).collect();
    loop {
        f(&a);
        let mut k = free.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            let v = free[k];
            a[v] += 1;
            if a[v] < cards[v] {
                break;
            }
            a[v] = 0;
        }
    }
}

/// Joint table over `vars` (row-major, last fastest) with `evidence` applied.
pub(crate) fn enumerate_table(c: &Compiled, vars: &[usize], evidence: &[Option<usize>]) -> Vec<f64> {
    let size: usize = vars.iter().map(|&v| c.cards[v]).product();
    let mut table = vec![0.0; size];
    for_each_assignment(&c.cards, evidence, |a| {
        let mut idx = 0;
        for &v in vars {
            idx = idx * c.cards[v] + a[v];
        }
        table[idx] += c.joint(a);
    });
    table
}

/// Posterior by exhaustive summation over the full joint.
pub fn query_enumerate(net: &Network, q: &Query) -> Result<InferenceResult, InferenceError> {
    let (target, evidence) = q.resolve(net)?;
    let compiled = Compiled::new(net);
    let weights = enumerate_table(&compiled, &[target], &evidence);
    InferenceResult::from_weights(weights, 1)
}

fn resolve_set(net: &Network, vars: &[&str]) -> Result<Vec<usize>, ModelError> {
    vars.iter()
        .map(|v| net.var_index(v).ok_or_else(|| ModelError::UnknownVariable(v.to_string())))
        .collect()
}

/// Numeric check of I(X; Y | Z, c): for every x, y, z with P(y, z, c) > tol,
/// |P(x | y, z, c) - P(x | z, c)| <= tol.
pub fn contextually_independent(
    net: &Network,
    xs: &[&str],
    ys: &[&str],
    zs: &[&str],
    c: &Context,
    tol: f64,
) -> Result<bool, InferenceError> {
    let x = resolve_set(net, xs)?;
    let y = resolve_set(net, ys)?;
    let z = resolve_set(net, zs)?;
    let mut seen = HashSet::new();
    for v in x.iter().chain(&y).chain(&z) {
        if !seen.insert(*v) {
            return Err(ModelError::DuplicateBinding(net.variables()[*v].name.clone()).into());
        }
    }
    let evidence = evidence_indices(net, c)?;
    for v in &seen {
        if evidence[*v].is_some() {
            return Err(ModelError::DuplicateBinding(net.variables()[*v].name.clone()).into());
        }
    }

    let compiled = Compiled::new(net);
    // Table over (z, y, x) so that x varies fastest.
    let mut order = z.clone();
    order.extend(&y);
    order.extend(&x);
    let joint = enumerate_table(&compiled, &order, &evidence);
    let size = |vs: &[usize]| vs.iter().map(|&v| compiled.cards[v]).product::<usize>();
    let (nz, ny, nx) = (size(&z), size(&y), size(&x));

    for zi in 0..nz {
        // P(x, z, c) summed over y.
        let mut pxz = vec![0.0; nx];
        for yi in 0..ny {
            for xi in 0..nx {
                pxz[xi] += joint[(zi * ny + yi) * nx + xi];
            }
        }
        let pz: f64 = pxz.iter().sum();
        for yi in 0..ny {
            let row = &joint[(zi * ny + yi) * nx..(zi * ny + yi + 1) * nx];
            let pyz: f64 = row.iter().sum();
            if pyz <= tol {
                continue;
            }
            for xi in 0..nx {
                let lhs = row[xi] / pyz;
                let rhs = pxz[xi] / pz;
                if (lhs - rhs).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

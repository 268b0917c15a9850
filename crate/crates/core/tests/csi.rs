mod common;

use csibn_core::{
    context_network, contextually_independent, csi_separated, d_separated, occurs_consistent,
    random_tree_network, reduce_tree, tree_lookup, vacuous_parents, Context, CsiError, Distribution,
    GenConfig, Network,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(s: &str) -> Context {
    Context::parse(s).unwrap()
}

#[test]
fn occurs_consistent_examples() {
    let net = common::fixture("fig2.json");
    let t = net.tree_of("X").unwrap();
    assert!(occurs_consistent(&t, "D", &ctx("A=t")).unwrap());
    assert!(!occurs_consistent(&t, "C", &ctx("A=t")).unwrap());
    assert!(!occurs_consistent(&t, "B", &ctx("A=t")).unwrap());
    assert!(occurs_consistent(&t, "A", &Context::new()).unwrap());
    assert_eq!(
        occurs_consistent(&t, "A", &ctx("A=t")),
        Err(CsiError::BoundInContext("A".into()))
    );
}

#[test]
fn vacuous_examples() {
    let fig2 = common::fixture("fig2.json");
    assert_eq!(vacuous_parents(&fig2, "X", &ctx("A=f,B=t")).unwrap(), ["C", "D"]);
    assert_eq!(vacuous_parents(&fig2, "X", &ctx("A=t")).unwrap(), ["B", "C"]);
    assert!(vacuous_parents(&fig2, "X", &Context::new()).unwrap().is_empty());
    let fig1 = common::fixture("fig1.json");
    assert_eq!(vacuous_parents(&fig1, "X", &ctx("U=t")).unwrap(), ["V", "W"]);
    assert!(vacuous_parents(&fig1, "X", &ctx("U=f")).unwrap().is_empty());
}

#[test]
fn reduce_examples() {
    let net = common::fixture("fig2.json");
    let t = net.tree_of("X").unwrap();
    let r = reduce_tree(&t, &ctx("A=t"));
    assert_eq!(r.root_test(), Some("D"));
    let leaves: Vec<f64> = r.leaves().iter().map(|d| d.probs()[0]).collect();
    assert_eq!(leaves, [0.9, 0.2]);
    let r = reduce_tree(&t, &ctx("A=f,B=t"));
    assert!(r.is_leaf());
    assert_eq!(r.leaves()[0].probs()[0], 0.7);
    assert_eq!(reduce_tree(&t, &Context::new()), t);
}

#[test]
fn dsep_examples() {
    let fig1 = common::fixture("fig1.json");
    assert!(d_separated(&fig1, &["Z"], &["U", "V"], &["X", "W"]).unwrap());
    assert!(!d_separated(&fig1, &["Z"], &["U"], &["X"]).unwrap());
    assert!(matches!(
        d_separated(&fig1, &["Z"], &["Z"], &[]),
        Err(CsiError::NotDisjoint(_))
    ));
}

#[test]
fn context_network_examples() {
    let fig1 = common::fixture("fig1.json");
    let b = context_network(&fig1, &ctx("U=t")).unwrap();
    let deleted: Vec<(String, String)> = b.deleted_edges.iter().cloned().collect();
    assert_eq!(deleted, [("V".into(), "X".into()), ("W".into(), "X".into())]);
    assert_eq!(b.network.parents("X"), ["U"]);

    let fig2 = common::fixture("fig2.json");
    let b = context_network(&fig2, &ctx("A=f,B=t")).unwrap();
    let deleted: Vec<(String, String)> = b.deleted_edges.iter().cloned().collect();
    assert_eq!(deleted, [("C".into(), "X".into()), ("D".into(), "X".into())]);

    let fig3 = common::fixture("polytree.json");
    assert!(context_network(&fig3, &Context::new()).unwrap().deleted_edges.is_empty());
}

#[test]
fn csisep_examples() {
    let fig1 = common::fixture("fig1.json");
    assert!(csi_separated(&fig1, &["X"], &["V", "W"], &[], &ctx("U=t")).unwrap());
    assert!(!csi_separated(&fig1, &["X"], &["V", "W"], &[], &ctx("U=f")).unwrap());
    assert!(contextually_independent(&fig1, &["X"], &["V", "W"], &[], &ctx("U=t"), 1e-9).unwrap());
    assert!(!contextually_independent(&fig1, &["X"], &["V", "W"], &[], &ctx("U=f"), 1e-9).unwrap());
}

#[test]
fn empty_context_matches_dsep_on_full_trees() {
    let net = common::fixture("fig1.json");
    let names = common::names(&net);
    for x in &names {
        for y in &names {
            if x == y {
                continue;
            }
            let rest: Vec<&str> = names.iter().filter(|n| *n != x && *n != y).map(String::as_str).collect();
            for mask in 0..(1u32 << rest.len()) {
                let z: Vec<&str> = (0..rest.len()).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]).collect();
                assert_eq!(
                    csi_separated(&net, &[x], &[y], &z, &Context::new()).unwrap(),
                    d_separated(&net, &[x], &[y], &z).unwrap(),
                );
            }
        }
    }
}

#[test]
fn dsep_matches_moral_oracle() {
    for seed in 0..40 {
        let cfg = GenConfig {
            variables: 7,
            max_parents: 3,
            arc_probability: 0.4,
            ..GenConfig::default()
        };
        let net = random_tree_network(seed, &cfg);
        let names = common::names(&net);
        for x in &names {
            for y in &names {
                if x >= y {
                    continue;
                }
                let rest: Vec<&str> = names.iter().filter(|n| *n != x && *n != y).map(String::as_str).collect();
                for mask in 0..(1u32 << rest.len()) {
                    let z: Vec<&str> = (0..rest.len()).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]).collect();
                    assert_eq!(
                        d_separated(&net, &[x], &[y], &z).unwrap(),
                        common::dsep_moral(&net, &[x], &[y], &z),
                        "seed {seed}: {x} vs {y} given {z:?}"
                    );
                }
            }
        }
    }
}

/// Random disjoint (X, Y, Z, C) with nonempty X and Y.
fn random_query(net: &Network, rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<String>, Vec<String>, Context) {
    let mut names = common::names(net);
    let n = names.len();
    for i in (1..n).rev() {
        names.swap(i, rng.gen_range(0..=i));
    }
    let nx = 1;
    let ny = rng.gen_range(1..=(n - nx).min(2));
    let nz = rng.gen_range(0..=(n - nx - ny));
    let nc = rng.gen_range(0..=(n - nx - ny - nz));
    let xs = names[..nx].to_vec();
    let ys = names[nx..nx + ny].to_vec();
    let zs = names[nx + ny..nx + ny + nz].to_vec();
    let mut c = Context::new();
    for v in &names[nx + ny + nz..nx + ny + nz + nc] {
        let values = &net.variable(v).unwrap().values;
        c.bind(v, &values[rng.gen_range(0..values.len())]);
    }
    (xs, ys, zs, c)
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn csi_separation_is_sound() {
    let mut positives = 0;
    for seed in 0..150u64 {
        let net = random_tree_network(seed, &GenConfig::default());
        if net.len() < 2 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..20 {
            let (xs, ys, zs, c) = random_query(&net, &mut rng);
            if csi_separated(&net, &refs(&xs), &refs(&ys), &refs(&zs), &c).unwrap() {
                positives += 1;
                assert!(
                    contextually_independent(&net, &refs(&xs), &refs(&ys), &refs(&zs), &c, 1e-9).unwrap(),
                    "seed {seed}: {xs:?} vs {ys:?} given {zs:?} in {c}"
                );
            }
        }
    }
    assert!(positives > 100, "too few positive answers to be meaningful: {positives}");
}

/// Some parameterization of `x`'s tree makes its dependence on `y` visible
/// under `c`.
fn edge_can_matter(net: &Network, x: &str, y: &str, c: &Context, rng: &mut ChaCha8Rng) -> bool {
    let tree = net.tree_of(x).unwrap();
    let parents = net.parents(x).to_vec();
    let card = net.card(x);
    for _ in 0..20 {
        let mut draws = std::iter::repeat_with(|| {
            let p: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..0.95)).collect();
            let z: f64 = p.iter().sum();
            Distribution(p.into_iter().map(|v| v / z).collect())
        });
        let t = tree.with_leaves(&mut draws);
        for a in common::assignments(net, &parents) {
            if !c.is_consistent_with(&a) {
                continue;
            }
            let base = tree_lookup(&t, &a).unwrap();
            for yv in &net.variable(y).unwrap().values {
                if tree_lookup(&t, &a.with(y, yv)).unwrap() != base {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn non_vacuous_edges_can_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for seed in 0..60u64 {
        let cfg = GenConfig {
            max_parents: 4,
            ..GenConfig::default()
        };
        let net = random_tree_network(seed, &cfg);
        for node in net.nodes() {
            let tree = net.tree_of(&node.var).unwrap();
            if tree.depth() > 4 {
                continue;
            }
            let parents = node.parents.clone();
            for mask in 0..(1u32 << parents.len()) {
                let bound: Vec<String> = (0..parents.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| parents[i].clone())
                    .collect();
                let c = common::assignments(&net, &bound).swap_remove(0);
                let vacuous = vacuous_parents(&net, &node.var, &c).unwrap();
                for y in parents.iter().filter(|p| !c.binds(p) && !vacuous.contains(p)) {
                    checked += 1;
                    assert!(edge_can_matter(&net, &node.var, y, &c, &mut rng), "{} <- {y} in {c}", node.var);
                }
            }
        }
    }
    assert!(checked > 50);
}

fn every_context(net: &Network, vars: &[String]) -> Vec<Context> {
    // Each variable either unbound or bound to one of its values.
    let mut out = vec![Context::new()];
    for v in vars {
        let values = &net.variable(v).unwrap().values;
        out = out
            .into_iter()
            .flat_map(|c| {
                let mut next = vec![c.clone()];
                next.extend(values.iter().map(|x| c.with(v, x)));
                next
            })
            .collect();
    }
    out
}

#[test]
fn reduction_membership_matches_consistency() {
    for (name, net) in common::all_fixtures() {
        for node in net.nodes() {
            if node.parents.len() > 4 {
                continue;
            }
            let tree = net.tree_of(&node.var).unwrap();
            for c in every_context(&net, &node.parents) {
                let reduced = reduce_tree(&tree, &c).tested_vars();
                for y in &node.parents {
                    let expected = !c.binds(y) && tree.occurs_consistent(y, &c);
                    assert_eq!(reduced.contains(y), expected, "{name}: {} {y} {c}", node.var);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn reductions_compose(seed in any::<u64>(), picks in prop::collection::vec(0usize..3, 6)) {
        let net = random_tree_network(seed, &GenConfig { max_parents: 4, max_arity: 3, ..GenConfig::default() });
        for node in net.nodes() {
            let tree = net.tree_of(&node.var).unwrap();
            // picks[i]: 0 = unbound, 1 = in c1, 2 = in c2; value chosen by index parity.
            let mut c1 = Context::new();
            let mut c2 = Context::new();
            for (i, p) in node.parents.iter().enumerate() {
                let values = &net.variable(p).unwrap().values;
                let v = &values[(seed as usize + i) % values.len()];
                match picks[i % picks.len()] {
                    1 => c1.bind(p, v),
                    2 => c2.bind(p, v),
                    _ => {}
                }
            }
            let both = c1.union(&c2).unwrap();
            prop_assert_eq!(reduce_tree(&tree, &both), reduce_tree(&reduce_tree(&tree, &c1), &c2));
        }
    }

    #[test]
    fn reduced_lookup_agrees(seed in any::<u64>(), k in 0usize..64) {
        let net = random_tree_network(seed, &GenConfig { max_parents: 4, max_arity: 3, ..GenConfig::default() });
        for node in net.nodes() {
            let tree = net.tree_of(&node.var).unwrap();
            let all = common::assignments(&net, &node.parents);
            let a = &all[k % all.len()];
            let bound: Vec<&str> = node.parents.iter().enumerate().filter(|(i, _)| (k >> i) & 1 == 1).map(|(_, p)| p.as_str()).collect();
            let c = a.restrict(bound.iter().copied());
            let reduced = reduce_tree(&tree, &c);
            prop_assert_eq!(tree_lookup(&tree, a).unwrap(), tree_lookup(&reduced, a).unwrap());
        }
    }
}

mod common;

use csibn_core::{
    parse_document, parse_network, random_tree_network, serialize_network, table_to_tree, tree_lookup,
    tree_size, validate, Context, CptTable, Distribution, GenConfig, ModelError, ParseError, Variable,
};
use proptest::prelude::*;
use serde_json::{json, Value};

fn base_doc() -> Value {
    json!({
        "variables": [
            {"name": "A", "values": ["t", "f"]},
            {"name": "B", "values": ["t", "f"]},
            {"name": "X", "values": ["t", "f"]}
        ],
        "nodes": [
            {"var": "A", "parents": [], "cpt": {"kind": "table", "rows": [[0.3, 0.7]]}},
            {"var": "B", "parents": [], "cpt": {"kind": "table", "rows": [[0.6, 0.4]]}},
            {"var": "X", "parents": ["A", "B"], "cpt": {"kind": "tree", "root": {
                "test": "A",
                "branches": {
                    "t": {"leaf": [0.9, 0.1]},
                    "f": {"test": "B", "branches": {"t": {"leaf": [0.5, 0.5]}, "f": {"leaf": [0.2, 0.8]}}}
                }
            }}}
        ]
    })
}

fn codes(doc: &Value) -> Vec<&'static str> {
    let net = parse_document(&doc.to_string()).expect("mutants are syntactically valid");
    validate(&net).iter().map(|v| v.code()).collect()
}

fn rejected_with(doc: Value, code: &str) {
    let found = codes(&doc);
    assert!(found.contains(&code), "expected {code:?}, got {found:?}");
    match parse_network(&doc.to_string()) {
        Err(ParseError::Semantic(v)) => assert!(!v.is_empty()),
        other => panic!("expected semantic error, got {other:?}"),
    }
}

#[test]
fn base_document_is_valid() {
    assert!(codes(&base_doc()).is_empty());
}

#[test]
fn fixtures_are_valid() {
    for (name, net) in common::all_fixtures() {
        assert!(validate(&net).is_empty(), "{name}");
    }
}

#[test]
fn fig2_tree_has_six_leaves() {
    let net = common::fixture("fig2.json");
    assert_eq!(tree_size(&net.tree_of("X").unwrap()), 6);
    assert_eq!(net.parents("X"), ["A", "B", "C", "D"]);
}

#[test]
fn mutant_duplicate_variable() {
    let mut d = base_doc();
    d["variables"].as_array_mut().unwrap().push(json!({"name": "A", "values": ["t", "f"]}));
    rejected_with(d, "duplicate variable");
}

#[test]
fn mutant_degenerate_variable() {
    let mut d = base_doc();
    d["variables"][0]["values"] = json!(["t"]);
    d["nodes"][0]["cpt"]["rows"] = json!([[1.0]]);
    rejected_with(d, "degenerate variable");
}

#[test]
fn mutant_duplicate_value() {
    let mut d = base_doc();
    d["variables"][1]["values"] = json!(["t", "t"]);
    rejected_with(d, "duplicate value");
}

#[test]
fn mutant_missing_node() {
    let mut d = base_doc();
    d["nodes"].as_array_mut().unwrap().remove(1);
    rejected_with(d, "missing node");
}

#[test]
fn mutant_duplicate_node() {
    let mut d = base_doc();
    let extra = d["nodes"][0].clone();
    d["nodes"].as_array_mut().unwrap().push(extra);
    rejected_with(d, "duplicate node");
}

#[test]
fn mutant_unknown_parent() {
    let mut d = base_doc();
    d["nodes"][1]["parents"] = json!(["Q"]);
    rejected_with(d, "unknown variable");
}

#[test]
fn mutant_duplicate_parent() {
    let mut d = base_doc();
    d["nodes"][2]["parents"] = json!(["A", "A", "B"]);
    rejected_with(d, "duplicate parent");
}

#[test]
fn mutant_cycle() {
    let mut d = base_doc();
    d["nodes"][0]["parents"] = json!(["X"]);
    d["nodes"][0]["cpt"]["rows"] = json!([[0.3, 0.7], [0.3, 0.7]]);
    rejected_with(d, "cycle");
}

#[test]
fn mutant_wrong_row_count() {
    let mut d = base_doc();
    d["nodes"][0]["cpt"]["rows"] = json!([[0.3, 0.7], [0.5, 0.5]]);
    rejected_with(d, "wrong row count");
}

#[test]
fn mutant_wrong_length() {
    let mut d = base_doc();
    d["nodes"][0]["cpt"]["rows"] = json!([[0.3, 0.3, 0.4]]);
    rejected_with(d, "wrong distribution length");
}

#[test]
fn mutant_negative_probability() {
    let mut d = base_doc();
    d["nodes"][0]["cpt"]["rows"] = json!([[-0.1, 1.1]]);
    rejected_with(d, "negative probability");
}

#[test]
fn mutant_unnormalized_row() {
    let mut d = base_doc();
    d["nodes"][1]["cpt"]["rows"] = json!([[0.6, 0.3]]);
    rejected_with(d, "unnormalized row");
}

#[test]
fn mutant_unnormalized_leaf() {
    let mut d = base_doc();
    d["nodes"][2]["cpt"]["root"]["branches"]["t"]["leaf"] = json!([0.8, 0.1]);
    rejected_with(d, "unnormalized leaf");
}

#[test]
fn mutant_test_not_parent() {
    let mut d = base_doc();
    d["nodes"][2]["parents"] = json!(["A"]);
    rejected_with(d, "test not a parent");
}

#[test]
fn mutant_missing_branch() {
    let mut d = base_doc();
    d["nodes"][2]["cpt"]["root"]["branches"]
        .as_object_mut()
        .unwrap()
        .remove("f");
    rejected_with(d, "missing branch");
}

#[test]
fn mutant_extra_branch() {
    let mut d = base_doc();
    d["nodes"][2]["cpt"]["root"]["branches"]["maybe"] = json!({"leaf": [0.5, 0.5]});
    rejected_with(d, "extra branch");
}

#[test]
fn mutant_repeated_test() {
    let mut d = base_doc();
    d["nodes"][2]["cpt"]["root"]["branches"]["t"] =
        json!({"test": "A", "branches": {"t": {"leaf": [0.5, 0.5]}, "f": {"leaf": [0.5, 0.5]}}});
    rejected_with(d, "repeated test");
}

#[test]
fn tolerance_boundary() {
    let mut d = base_doc();
    d["nodes"][0]["cpt"]["rows"] = json!([[0.3, 0.7 + 5e-10]]);
    assert!(codes(&d).is_empty());
    d["nodes"][0]["cpt"]["rows"] = json!([[0.3, 0.7 + 5e-9]]);
    assert_eq!(codes(&d), vec!["unnormalized row"]);
}

#[test]
fn declared_orders_preserved() {
    let mut d = base_doc();
    d["variables"][2]["values"] = json!(["lo", "hi"]);
    d["nodes"][2]["parents"] = json!(["B", "A"]);
    d["nodes"].as_array_mut().unwrap().swap(0, 2);
    let net = parse_network(&d.to_string()).unwrap();
    assert_eq!(net.variable("X").unwrap().values, ["lo", "hi"]);
    assert_eq!(net.parents("X"), ["B", "A"]);
    assert_eq!(net.nodes()[0].var, "X");
}

#[test]
fn fixtures_round_trip() {
    for (name, net) in common::all_fixtures() {
        let text = serialize_network(&net);
        assert_eq!(parse_network(&text).unwrap(), net, "{name}");
        assert_eq!(serialize_network(&parse_network(&text).unwrap()), text);
    }
}

#[test]
fn lookup_examples() {
    let net = common::fixture("fig2.json");
    let t = net.tree_of("X").unwrap();
    for b in ["t", "f"] {
        for c in ["t", "f"] {
            let a = Context::from_pairs([("A", "t"), ("B", b), ("C", c), ("D", "t")]);
            assert_eq!(tree_lookup(&t, &a).unwrap().probs()[0], 0.9);
            let a = Context::from_pairs([("A", "f"), ("B", "t"), ("C", b), ("D", c)]);
            assert_eq!(tree_lookup(&t, &a).unwrap().probs()[0], 0.7);
        }
    }
    let leaf = csibn_core::CptTree::leaf(vec![0.25, 0.75]);
    assert_eq!(tree_lookup(&leaf, &Context::new()).unwrap().probs(), &[0.25, 0.75]);
}

#[test]
fn context_rejects_bad_bindings() {
    let net = common::fixture("fig2.json");
    assert!(matches!(Context::parse("A=t,A=f"), Err(ModelError::DuplicateBinding(_))));
    assert!(matches!(
        Context::parse("A=maybe").unwrap().check(&net),
        Err(ModelError::UnknownValue { .. })
    ));
    assert!(matches!(
        Context::parse("Q=t").unwrap().check(&net),
        Err(ModelError::UnknownVariable(_))
    ));
}

#[test]
fn table_with_repeated_rows_stays_full() {
    let a = Variable::binary("A");
    let b = Variable::binary("B");
    let tab = CptTable {
        rows: vec![
            Distribution(vec![0.5, 0.5]),
            Distribution(vec![0.5, 0.5]),
            Distribution(vec![0.1, 0.9]),
            Distribution(vec![0.2, 0.8]),
        ],
    };
    let t = table_to_tree(&tab, &[&a, &b]);
    assert_eq!(tree_size(&t), 4);
    assert_eq!(t.uniform_test_sequence(), Some(vec!["A", "B"]));
}

fn arity_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 0..=3)
}

proptest! {
    #[test]
    fn table_to_tree_matches_rows(arities in arity_strategy(), seed in any::<u64>()) {
        let vars: Vec<Variable> = arities
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let vals: Vec<String> = (0..k).map(|v| format!("v{v}")).collect();
                let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
                Variable::new(format!("P{i}"), &refs)
            })
            .collect();
        let n_rows: usize = arities.iter().product();
        let rows: Vec<Distribution> = (0..n_rows)
            .map(|r| {
                let p = ((seed.wrapping_add(r as u64) % 97) as f64 + 1.0) / 99.0;
                Distribution(vec![p, 1.0 - p])
            })
            .collect();
        let tab = CptTable { rows: rows.clone() };
        let refs: Vec<&Variable> = vars.iter().collect();
        let t = table_to_tree(&tab, &refs);
        prop_assert_eq!(tree_size(&t), n_rows);
        for (r, row) in rows.iter().enumerate() {
            let mut rem = r;
            let mut ctx = Context::new();
            for v in vars.iter().rev() {
                ctx.bind(&v.name, &v.values[rem % v.card()]);
                rem /= v.card();
            }
            prop_assert_eq!(tree_lookup(&t, &ctx).unwrap(), row);
        }
    }

    #[test]
    fn random_networks_round_trip(seed in any::<u64>(), n in 1usize..=6, arity in 2usize..=3) {
        let cfg = GenConfig { variables: n, max_arity: arity, ..GenConfig::default() };
        let net = random_tree_network(seed, &cfg);
        let text = serialize_network(&net);
        prop_assert_eq!(parse_network(&text).unwrap(), net);
    }
}

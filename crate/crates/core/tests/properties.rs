//! Property tests over randomly generated MiniJ methods and graphs.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::select;

use sepforge::canon::canonical_code;
use sepforge::change_graph::change_graph_from_sources;
use sepforge::detector::fgpdg_lgraph;
use sepforge::diff::map_asts;
use sepforge::fgpdg::{build_closed, Category, GraphOptions};
use sepforge::graph::{embeds, find_embeddings, LGraph};
use sepforge::lang::{build_type_env, parse_method, print_method, Ast, NodeKind, Signatures};
use sepforge::matching::{best_matching, dice};
use sepforge::pipeline::eval::Metrics;
use sepforge::transformer::fresh_name;

use common::{brute_embeddings, brute_matching};

// ---- generators ---------------------------------------------------------

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        select(vec!["a", "b", "c"]).prop_map(String::from),
        (0u32..100).prop_map(|n| n.to_string()),
        select(vec!["\"s\"", "true", "false", "null"]).prop_map(String::from),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), select(vec!["f", "g", "h"]), prop::collection::vec(inner.clone(), 0..3))
                .prop_map(|(r, m, args)| format!("({r}).{m}({})", args.join(", "))),
            (select(vec!["run", "log"]), prop::collection::vec(inner.clone(), 0..3))
                .prop_map(|(m, args)| format!("{m}({})", args.join(", "))),
            (inner.clone(), select(vec!["x", "size"])).prop_map(|(r, f)| format!("({r}).{f}")),
            (inner.clone(), select(vec!["==", "!=", "&&", "||", "+", "-", "<", ">"]), inner)
                .prop_map(|(l, o, r)| format!("({l} {o} {r})")),
        ]
    })
}

#[derive(Debug, Clone)]
enum Stmt {
    Decl(String, Option<String>),
    Expr(String),
    Assign(String),
    If(String, Vec<Stmt>, Vec<Stmt>),
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let simple = prop_oneof![
        (select(vec!["A", "B", "int"]), prop::option::of(expr()))
            .prop_map(|(t, e)| Stmt::Decl(t.to_string(), e)),
        expr().prop_map(Stmt::Expr),
        expr().prop_map(Stmt::Assign),
    ];
    simple.prop_recursive(2, 8, 3, |inner| {
        (
            expr(),
            prop::collection::vec(inner.clone(), 0..3),
            prop::collection::vec(inner, 0..2),
        )
            .prop_map(|(c, t, e)| Stmt::If(c, t, e))
    })
}

fn render(stmts: &[Stmt], next_var: &mut usize, out: &mut String) {
    for s in stmts {
        match s {
            Stmt::Decl(t, e) => {
                *next_var += 1;
                match e {
                    Some(e) => out.push_str(&format!("{t} v{next_var} = {e}; ")),
                    None => out.push_str(&format!("{t} v{next_var}; ")),
                }
            }
            Stmt::Expr(e) => out.push_str(&format!("{e}; ")),
            Stmt::Assign(e) => out.push_str(&format!("a = {e}; ")),
            Stmt::If(c, t, e) => {
                out.push_str(&format!("if ({c}) {{ "));
                render(t, next_var, out);
                out.push_str("} ");
                if !e.is_empty() {
                    out.push_str("else { ");
                    render(e, next_var, out);
                    out.push_str("} ");
                }
            }
        }
    }
}

fn method() -> impl Strategy<Value = String> {
    prop::collection::vec(stmt(), 0..5).prop_map(|stmts| {
        let mut body = String::new();
        render(&stmts, &mut 0, &mut body);
        format!("void m(A a, B b, C c) {{ {body}}}")
    })
}

fn shape(ast: &Ast) -> Vec<(NodeKind, String, usize)> {
    ast.preorder()
        .into_iter()
        .map(|n| (ast.kind(n), ast.label(n).to_string(), ast.children(n).len()))
        .collect()
}

fn small_lgraph(max_nodes: usize) -> impl Strategy<Value = LGraph> {
    (1..=max_nodes).prop_flat_map(|n| {
        (
            prop::collection::vec(select(vec!["x", "y"]), n),
            prop::collection::vec((0..n, 0..n, select(vec!["p", "q"])), 0..2 * n),
        )
            .prop_map(|(labels, edges)| {
                let mut g = LGraph::new();
                for l in labels {
                    g.add_node(l);
                }
                for (s, d, l) in edges {
                    g.add_edge(s, d, l);
                }
                g
            })
    })
}

fn permute(g: &LGraph, perm: &[usize]) -> LGraph {
    // node v moves to position perm[v]
    let mut labels = vec![String::new(); g.labels.len()];
    for (v, l) in g.labels.iter().enumerate() {
        labels[perm[v]] = l.clone();
    }
    LGraph {
        labels,
        edges: g.edges.iter().map(|(s, d, l)| (perm[*s], perm[*d], l.clone())).collect(),
    }
}

// ---- language -----------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(src in method()) {
        let ast = parse_method(&src).unwrap();
        let printed = print_method(&ast).unwrap();
        let again = parse_method(&printed).unwrap();
        prop_assert!(ast.structurally_equal(&again), "{src}\n=>\n{printed}");
        prop_assert_eq!(print_method(&again).unwrap(), printed);
    }

    #[test]
    fn reparse_keeps_shape_and_single_parents(src in method()) {
        let a = parse_method(&src).unwrap();
        let b = parse_method(&src).unwrap();
        prop_assert_eq!(shape(&a), shape(&b));
        a.validate().unwrap();
        for n in a.preorder() {
            for &k in a.children(n) {
                prop_assert_eq!(a.parent(k), Some(n));
            }
        }
        prop_assert_eq!(a.parent(a.root()), None);
    }
}

// ---- differencing -------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn mapping_is_one_to_one_and_kind_preserving(x in method(), y in method()) {
        let a = parse_method(&x).unwrap();
        let b = parse_method(&y).unwrap();
        let m = map_asts(&a, &b);
        let mut srcs = BTreeSet::new();
        let mut dsts = BTreeSet::new();
        for (s, d) in m.pairs() {
            prop_assert!(srcs.insert(s) && dsts.insert(d));
            prop_assert_eq!(a.kind(s), b.kind(d));
        }
        prop_assert_eq!(m.len(), map_asts(&b, &a).len());
    }

    #[test]
    fn identical_trees_map_completely(x in method()) {
        let a = parse_method(&x).unwrap();
        let b = parse_method(&x).unwrap();
        let m = map_asts(&a, &b);
        let (pa, pb) = (a.preorder(), b.preorder());
        prop_assert_eq!(m.len(), pa.len());
        for (s, d) in pa.into_iter().zip(pb) {
            prop_assert_eq!(m.get(s), Some(d));
        }
    }

    #[test]
    fn consistent_renaming_keeps_mapping_size(x in method(), y in method()) {
        let mut a = parse_method(&x).unwrap();
        let mut b = parse_method(&y).unwrap();
        let base = map_asts(&a, &b).len();
        for t in [&mut a, &mut b] {
            for n in t.preorder() {
                if matches!(t.kind(n), NodeKind::Identifier | NodeKind::Param) && t.label(n) == "b" {
                    t.set_label(n, "renamed");
                }
            }
        }
        prop_assert!(map_asts(&a, &b).len() >= base);
    }
}

// ---- graphs -------------------------------------------------------------

fn graph_of(src: &str) -> (Ast, sepforge::fgpdg::Fgpdg) {
    let ast = parse_method(src).unwrap();
    let env = build_type_env(&ast, &Signatures::new()).unwrap();
    let g = build_closed(&ast, &env, &GraphOptions::default()).unwrap();
    (ast, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn fgpdg_is_deterministic_and_anchored(src in method()) {
        let (ast, g) = graph_of(&src);
        let (ast2, g2) = graph_of(&src);
        prop_assert_eq!(g.to_canonical_json(&ast), g2.to_canonical_json(&ast2));
        for n in &g.nodes {
            if n.category != Category::Data {
                let k = ast.kind(n.primary_anchor());
                prop_assert!(matches!(
                    k,
                    NodeKind::MethodInvocation | NodeKind::Assign | NodeKind::BinaryOp
                        | NodeKind::IfStmt | NodeKind::FieldAccess
                ), "{:?} anchors {:?}", n.label, k);
            }
        }
    }

    #[test]
    fn closure_is_idempotent(src in method(), depth in 1usize..6) {
        let (_, mut g) = graph_of(&src);
        g.strip_transitive();
        g.close(depth);
        let once: BTreeSet<_> = g.edges.iter().copied().collect();
        g.strip_transitive();
        g.close(depth);
        let twice: BTreeSet<_> = g.edges.iter().copied().collect();
        prop_assert_eq!(&once, &twice);
        g.close(depth);
        prop_assert_eq!(once, g.edges.iter().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn prefix_graph_embeds_in_whole(stmts in prop::collection::vec(stmt(), 1..4), extra in prop::collection::vec(stmt(), 0..3)) {
        let mut head = String::new();
        let mut next = 0;
        render(&stmts, &mut next, &mut head);
        let mut tail = String::new();
        render(&extra, &mut next, &mut tail);
        let (_, part) = graph_of(&format!("void m(A a, B b, C c) {{ {head}}}"));
        let (_, whole) = graph_of(&format!("void m(A a, B b, C c) {{ {head}{tail}}}"));
        prop_assert!(embeds(&fgpdg_lgraph(&part), &fgpdg_lgraph(&whole)));
    }

    #[test]
    fn change_graph_map_edges(x in method(), y in method()) {
        let sigs = Signatures::new();
        let opts = GraphOptions::default();
        let id = sepforge::change_graph::ChangeId::new("m", 0);
        let cg = change_graph_from_sources(id.clone(), &x, &y, &sigs, &opts).unwrap();
        let mut olds = BTreeSet::new();
        let mut news = BTreeSet::new();
        for &(o, n) in &cg.map_edges {
            prop_assert!(o < cg.old.len() && n < cg.new.len());
            prop_assert!(olds.insert(o) && news.insert(n));
            prop_assert_eq!(cg.old.node(o).category, cg.new.node(n).category);
        }
        let mg = cg.to_mining_graph();
        for v in 0..mg.info.len() {
            let touched = mg.graph.edges.iter().any(|(s, d, l)| l == "map" && (*s == v || *d == v));
            prop_assert_eq!(mg.info[v].changed, !touched);
        }
        let same = change_graph_from_sources(id, &x, &x, &sigs, &opts).unwrap();
        prop_assert!(same.to_mining_graph().info.iter().all(|i| !i.changed));
    }
}

// ---- search, canonical codes, matching ---------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn embeddings_equal_brute_force(p in small_lgraph(3), t in small_lgraph(6)) {
        let got = find_embeddings(&p, &t);
        prop_assert_eq!(&got, &brute_embeddings(&p, &t));
        prop_assert_eq!(embeds(&p, &t), !got.is_empty());
        for m in &got {
            for (s, d, l) in &p.edges {
                prop_assert!(t.has_edge(m[*s], m[*d], l));
            }
        }
    }

    #[test]
    fn canonical_code_ignores_node_order(g in small_lgraph(6), seed in any::<u64>()) {
        prop_assume!(g.is_connected());
        let mut perm: Vec<usize> = (0..g.labels.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(canonical_code(&g).unwrap(), canonical_code(&permute(&g, &perm)).unwrap());
    }

    #[test]
    fn canonical_code_separates_non_isomorphic(a in small_lgraph(4), b in small_lgraph(4)) {
        prop_assume!(a.is_connected() && b.is_connected());
        let same = canonical_code(&a).unwrap() == canonical_code(&b).unwrap();
        prop_assert_eq!(same, common::brute_key(&a) == common::brute_key(&b));
    }

    #[test]
    fn matching_equals_brute_force(w in prop::collection::vec(prop::collection::vec(0u32..4, 1..6), 1..6)) {
        let scores: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|&x| x as f64 / 2.0).collect()).collect();
        prop_assert_eq!(best_matching(&scores), brute_matching(&w));
    }

    #[test]
    fn dice_is_symmetric_and_bounded(a in prop::collection::btree_set(0u8..10, 0..6), b in prop::collection::btree_set(0u8..10, 0..6)) {
        let d = dice(&a, &b);
        prop_assert_eq!(d, dice(&b, &a));
        prop_assert!((0.0..=1.0).contains(&d));
        if !a.is_empty() {
            prop_assert_eq!(dice(&a, &a), 1.0);
        }
    }
}

// ---- naming and metrics ---------------------------------------------------

proptest! {
    #[test]
    fn fresh_names_avoid_collisions(name in "[a-z]{1,3}", ks in prop::collection::btree_set(0usize..6, 0..6)) {
        let mut taken: BTreeSet<String> = ks.iter().map(|k| format!("{name}_{k}")).collect();
        taken.insert(name.clone());
        let fresh = fresh_name(&name, &taken);
        prop_assert!(!taken.contains(&fresh));
        let k: usize = fresh.rsplit('_').next().unwrap().parse().unwrap();
        prop_assert!(k >= 1);
        let lower_taken = (1..k).all(|j| taken.contains(&format!("{}_{}", name, j)));
        prop_assert!(lower_taken);
        prop_assert_eq!(fresh_name("free", &taken), "free");
    }

    #[test]
    fn metrics_relations(trials in 0usize..50, p in 0usize..50, c in 0usize..50) {
        let produced = p.min(trials);
        let correct = c.min(produced);
        let m = Metrics::from_counts(trials, produced, correct);
        prop_assert!(m.precision + 1e-12 >= m.recall);
        if m.precision + m.recall == 0.0 {
            prop_assert_eq!(m.f1, 0.0);
        } else {
            let f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
            prop_assert!((m.f1 - f1).abs() < 1e-12);
        }
        if trials > 0 {
            prop_assert!((m.recall - correct as f64 / trials as f64).abs() < 1e-12);
        }
    }
}

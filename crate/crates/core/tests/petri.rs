mod common;

use std::collections::{BTreeSet, HashSet, VecDeque};

use compverify::petri::*;
use num_bigint::BigInt;
use proptest::prelude::*;

use common::fixture;

fn load_pnml(name: &str) -> PlaceTransitionNet {
    from_pnml(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// Builds a net from (transition, inputs, outputs) with unit weights.
fn build(places: &[(&str, u64)], transitions: &[(&str, &[&str], &[&str])]) -> PlaceTransitionNet {
    let mut n = PlaceTransitionNet::new("test");
    for (p, m) in places {
        n.add_place(*p, *m).unwrap();
    }
    for (t, ins, outs) in transitions {
        n.add_transition(*t).unwrap();
        for p in *ins {
            n.add_arc(p, t, 1).unwrap();
        }
        for p in *outs {
            n.add_arc(t, p, 1).unwrap();
        }
    }
    n
}

/// Machines 1 and 2 with a shared robot; optionally a controller that
/// alternates the loads.
fn manufacturing(controlled: bool) -> PlaceTransitionNet {
    let mut places = vec![("P1", 1), ("P2", 0), ("P3", 0), ("P4", 1), ("P5", 0), ("P6", 0), ("P7", 1), ("P8", 0)];
    if controlled {
        places.extend([("P9", 1), ("P10", 0)]);
    }
    let (t1_in, t1_out, t4_in, t4_out): (&[&str], &[&str], &[&str], &[&str]) = if controlled {
        (&["P1", "P7", "P9"], &["P2", "P8", "P10"], &["P4", "P7", "P10"], &["P5", "P8", "P9"])
    } else {
        (&["P1", "P7"], &["P2", "P8"], &["P4", "P7"], &["P5", "P8"])
    };
    build(
        &places,
        &[
            ("T1", t1_in, t1_out),
            ("T2", &["P2", "P8"], &["P3", "P7"]),
            ("T3", &["P3"], &["P1"]),
            ("T4", t4_in, t4_out),
            ("T5", &["P5", "P8"], &["P6", "P7"]),
            ("T6", &["P6"], &["P4"]),
        ],
    )
}

fn m(v: &[u64]) -> Marking {
    Marking::from_counts(v)
}

fn ints(rows: &[&[i64]]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

/// Minimal-support non-negative solutions of `rows · v = 0` with entries up
/// to `bound`, found by exhaustive enumeration.
fn null_space_oracle(rows: &[Vec<i64>], dim: usize, bound: u64) -> BTreeSet<Vec<u64>> {
    let mut sols: Vec<Vec<u64>> = Vec::new();
    let mut v = vec![0u64; dim];
    loop {
        let mut i = 0;
        while i < dim && v[i] == bound {
            v[i] = 0;
            i += 1;
        }
        if i == dim {
            break;
        }
        v[i] += 1;
        if rows.iter().all(|r| r.iter().zip(&v).map(|(a, &b)| a * b as i64).sum::<i64>() == 0) {
            let g = v.iter().fold(0u64, |g, &x| gcd(g, x));
            sols.push(v.iter().map(|x| x / g).collect());
        }
    }
    let support = |v: &Vec<u64>| -> BTreeSet<usize> { (0..v.len()).filter(|&i| v[i] > 0).collect() };
    sols.iter()
        .filter(|s| sols.iter().all(|o| !support(o).is_subset(&support(s)) || support(o) == support(s)))
        .cloned()
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

#[test]
fn firing_rule_on_fork_join() {
    let n = load_pnml("fork-join.pnml");
    let m0 = n.m0();
    assert_eq!(m0, m(&[1, 0, 0, 0, 0]));
    assert!(n.enabled(&m0, "T1").unwrap());
    assert!(!n.enabled(&m0, "T2").unwrap());
    let m1 = n.fire(&m0, "T1").unwrap();
    assert_eq!(m1, m(&[0, 1, 0, 1, 0]));
    assert!(matches!(n.fire(&m0, "T4"), Err(PetriError::NotEnabled { .. })));
    assert!(matches!(n.enabled(&m0, "T9"), Err(PetriError::UnknownTransition(_))));
    let s1 = n.fire_sequence(&m0, &["T1", "T2", "T3", "T4"]).unwrap();
    let s2 = n.fire_sequence(&m0, &["T1", "T3", "T2", "T4"]).unwrap();
    assert_eq!((s1, s2), (m0.clone(), m0));
}

#[test]
fn source_transition_is_always_enabled() {
    let mut n = build(&[("P", 0)], &[("T", &[], &["P"])]);
    assert!(n.enabled(&n.m0(), "T").unwrap());
    n.set_initial("P", 7).unwrap();
    assert_eq!(n.fire(&n.m0(), "T").unwrap(), m(&[8]));
    let omega = Marking(vec![Tokens::Omega]);
    assert_eq!(n.fire(&omega, "T").unwrap(), omega);
}

#[test]
fn omega_absorbs_consumption() {
    let n = build(&[("A", 0), ("B", 0)], &[("T", &["A"], &["B"])]);
    let mk = Marking(vec![Tokens::Omega, Tokens::Finite(0)]);
    assert_eq!(n.fire(&mk, "T").unwrap(), Marking(vec![Tokens::Omega, Tokens::Finite(1)]));
}

#[test]
fn net_construction_errors() {
    let mut n = build(&[("P", 0), ("Q", 0)], &[("T", &[], &[]), ("U", &[], &[])]);
    assert!(matches!(n.add_arc("P", "Q", 1), Err(PetriError::SameKindArc { .. })));
    assert!(matches!(n.add_arc("T", "U", 1), Err(PetriError::SameKindArc { .. })));
    assert!(matches!(n.add_arc("P", "T", 0), Err(PetriError::ZeroWeight { .. })));
    assert!(matches!(n.add_place("T", 0), Err(PetriError::DuplicateNode(_))));
    n.add_arc("P", "T", 1).unwrap();
    n.add_arc("P", "T", 2).unwrap();
    assert_eq!(n.arcs().len(), 1);
    assert_eq!(n.arcs()[0].weight, 3);
}

#[test]
fn producer_consumer_incidence() {
    let n = load_pnml("producer-consumer.pnml");
    let inc: IncidenceMatrices<i64> = incidence(&n);
    // Rows are transitions, columns places.
    assert_eq!(inc.a_plus, transpose(&ints(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]])));
    assert_eq!(inc.a_minus, transpose(&ints(&[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]])));
    assert_eq!(inc.a[0], vec![1, -1, 0, 0, 0]);
    assert_eq!(
        inc.a,
        transpose(&ints(&[&[1, -1, 0, 0], &[-1, 1, 0, 0], &[0, 1, -1, 0], &[0, 0, -1, 1], &[0, 0, 1, -1]]))
    );
    let empty = build(&[("P", 0), ("Q", 0)], &[("T", &[], &[])]);
    let z: IncidenceMatrices<i64> = incidence(&empty);
    assert_eq!(z.a, vec![vec![0, 0]]);
}

#[test]
fn manufacturing_incidence() {
    let a1: IncidenceMatrices<i64> = incidence(&manufacturing(false));
    assert_eq!(
        a1.a,
        ints(&[
            &[-1, 1, 0, 0, 0, 0, -1, 1],
            &[0, -1, 1, 0, 0, 0, 1, -1],
            &[1, 0, -1, 0, 0, 0, 0, 0],
            &[0, 0, 0, -1, 1, 0, -1, 1],
            &[0, 0, 0, 0, -1, 1, 1, -1],
            &[0, 0, 0, 1, 0, -1, 0, 0],
        ])
    );
    let a2: IncidenceMatrices<i64> = incidence(&manufacturing(true));
    assert_eq!(a2.a[0], vec![-1, 1, 0, 0, 0, 0, -1, 1, -1, 1]);
    assert_eq!(a2.a[3], vec![0, 0, 0, -1, 1, 0, -1, 1, 1, -1]);
}

#[test]
fn state_equation_reproduces_firing() {
    let n = load_pnml("producer-consumer.pnml");
    let inc: IncidenceMatrices<i64> = incidence(&n);
    let m0 = marking_vector::<i64>(&n.m0()).unwrap();
    let r = state_equation(&inc, &m0, &[1, 2, 0, 0]).unwrap();
    assert_eq!(r.marking, vec![0, 1, 2, 1, 0]);
    assert!(r.warning.is_none());
    // The same vector through the token game.
    assert_eq!(n.fire_sequence(&n.m0(), &["T2", "T1", "T2"]).unwrap(), m(&[0, 1, 2, 1, 0]));
    assert_eq!(state_equation(&inc, &m0, &[0, 0, 0, 0]).unwrap().marking, m0);
    let bad = state_equation(&inc, &m0, &[0, 0, 1, 0]).unwrap();
    assert_eq!(bad.warning.unwrap().places, vec!["P3"]);
    assert!(matches!(state_equation(&inc, &m0, &[1, 2]), Err(PetriError::DimensionMismatch { .. })));

    let big: IncidenceMatrices<BigInt> = incidence(&n);
    let bm0: Vec<BigInt> = marking_vector(&n.m0()).unwrap();
    let x: Vec<BigInt> = [1, 2, 0, 0].iter().map(|&v| BigInt::from(v)).collect();
    let expected: Vec<BigInt> = [0, 1, 2, 1, 0].iter().map(|&v| BigInt::from(v)).collect();
    assert_eq!(state_equation(&big, &bm0, &x).unwrap().marking, expected);
}

#[test]
fn seasons_invariant_and_bound() {
    let n = load_pnml("seasons.pnml");
    assert_eq!(p_invariants(&n).minimal_u64(), vec![vec![1, 1, 1, 1]]);
    assert_eq!(t_invariants(&n).minimal_u64(), vec![vec![1, 1, 1, 1]]);
    assert_eq!(check_boundedness(&n), Boundedness::Bounded(vec![1, 1, 1, 1]));
}

#[test]
fn scenario_one_invariants_match_oracle() {
    let n = manufacturing(false);
    let a: IncidenceMatrices<i64> = incidence(&n);
    let p = p_invariants(&n);
    assert!(p.minimal_u64().contains(&vec![1, 1, 1, 0, 0, 0, 0, 0]));
    let t = t_invariants(&n);
    let t_set: BTreeSet<Vec<u64>> = t.minimal_u64().into_iter().collect();
    assert_eq!(t_set, BTreeSet::from([vec![1, 1, 1, 0, 0, 0], vec![0, 0, 0, 1, 1, 1]]));
    // The vector [0,0,1,1,1,1] is not a T-invariant of this matrix.
    assert_ne!(a.apply_to_transitions(&[0, 0, 1, 1, 1, 1]), vec![0; 8]);

    assert_eq!(t_set, null_space_oracle(&transpose(&a.a), 6, 3));
    let p_set: BTreeSet<Vec<u64>> = p.minimal_u64().into_iter().collect();
    assert_eq!(p_set, null_space_oracle(&a.a, 8, 2));
}

#[test]
fn scenario_two_invariants() {
    let n = manufacturing(true);
    let a: IncidenceMatrices<i64> = incidence(&n);
    let t = t_invariants(&n);
    assert_eq!(t.minimal_u64(), vec![vec![1, 1, 1, 1, 1, 1]]);
    assert!(p_invariants(&n).minimal_u64().contains(&vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0]));
    let t_set: BTreeSet<Vec<u64>> = t.minimal_u64().into_iter().collect();
    assert_eq!(t_set, null_space_oracle(&transpose(&a.a), 6, 3));
    // Replaying the reproduction vector returns to M0, both algebraically
    // and through the token game.
    let m0 = marking_vector::<i64>(&n.m0()).unwrap();
    assert_eq!(state_equation(&a, &m0, &[1; 6]).unwrap().marking, m0);
    assert_eq!(n.fire_sequence(&n.m0(), &["T1", "T2", "T3", "T4", "T5", "T6"]).unwrap(), n.m0());
}

#[test]
fn fairness_verdicts() {
    assert_eq!(
        check_b_fairness(&manufacturing(false)),
        FairnessVerdict::Unfair(UnfairReason::MultipleReproductionVectors { count: 2 })
    );
    match check_b_fairness(&manufacturing(true)) {
        FairnessVerdict::Fair { reproduction_vector, p_invariants } => {
            assert_eq!(reproduction_vector.to_u64().unwrap(), vec![1; 6]);
            assert!(p_invariants >= 1);
        }
        other => panic!("expected fair, got {other:?}"),
    }
    let self_loop = build(&[("P", 1)], &[("T", &["P"], &["P"])]);
    assert!(check_b_fairness(&self_loop).is_fair());
    // A source transition has a T-invariant-free net.
    let source = build(&[("P", 0)], &[("T", &[], &["P"])]);
    assert!(matches!(check_b_fairness(&source), FairnessVerdict::Unfair(UnfairReason::ZeroEntry { .. })));
    // Transition that never fires in the only reproduction vector.
    let partial = build(&[("P", 1), ("Q", 0)], &[("T", &["P"], &["P"]), ("U", &["P"], &["Q"])]);
    assert!(matches!(check_b_fairness(&partial), FairnessVerdict::Unfair(UnfairReason::ZeroEntry { .. })));
    // The criterion asks for some P-invariant, not one covering every
    // place: Q is unbounded here, yet P's invariant [1, 0] satisfies it.
    let pump = build(&[("P", 1), ("Q", 0)], &[("T", &["P"], &["P", "Q"]), ("U", &["Q"], &[])]);
    assert!(check_b_fairness(&pump).is_fair());
    assert_eq!(check_boundedness(&pump), Boundedness::Unbounded(vec!["Q".into()]));
}

#[test]
fn fairness_needs_a_place_invariant() {
    // T reproduces itself but generates tokens in Q which U destroys: one
    // positive reproduction vector [1, 1], yet Q is unbounded structurally.
    let n = build(&[("P", 1), ("Q", 0)], &[("T", &["P"], &["Q"]), ("U", &["Q"], &["P"])]);
    assert!(check_b_fairness(&n).is_fair());
    let sink = build(&[("P", 1), ("Q", 0)], &[("T", &["P"], &["P", "Q"]), ("U", &["P", "Q"], &["P"])]);
    // T-invariant [1,1]; Q fed and drained but P is read by both: P-invariant [1,0].
    assert!(check_b_fairness(&sink).is_fair());
    let generator = build(&[("P", 0)], &[("T", &[], &["P"]), ("U", &["P"], &[])]);
    assert_eq!(check_b_fairness(&generator), FairnessVerdict::Unfair(UnfairReason::NotStructurallyBounded));
}

#[test]
fn fork_join_reachability_graph() {
    let n = load_pnml("fork-join.pnml");
    let g = reachability_graph(&n, 1000);
    assert_eq!((g.node_count(), g.arc_count()), (5, 6));
    assert!(!g.budget_exceeded());
    let markings: BTreeSet<Marking> = g.nodes().map(|n| n.marking.clone()).collect();
    let expected: BTreeSet<Marking> =
        [[1, 0, 0, 0, 0], [0, 1, 0, 1, 0], [0, 0, 1, 1, 0], [0, 1, 0, 0, 1], [0, 0, 1, 0, 1]].iter().map(|v| m(v)).collect();
    assert_eq!(markings, expected);
    assert_eq!(check_deadlock_free(&n, 1000), DeadlockVerdict::DeadlockFree);
    let dead = build(&[("P", 0), ("Q", 0)], &[]);
    let g = reachability_graph(&dead, 10);
    assert_eq!((g.node_count(), g.arc_count()), (1, 0));
}

#[test]
fn starved_join_deadlocks() {
    let n = build(&[("A", 1), ("B", 0), ("C", 0)], &[("J", &["A", "B"], &["C"])]);
    match check_deadlock_free(&n, 100) {
        DeadlockVerdict::Deadlock { marking, path } => {
            assert_eq!(marking, m(&[1, 0, 0]));
            assert!(path.is_empty());
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(check_deadlock_free_with(&n, 100, |mk| mk.0[0] == Tokens::Finite(1)), DeadlockVerdict::DeadlockFree);
}

#[test]
fn unbounded_net_deadlock_is_inconclusive_or_found() {
    let gen = build(&[("P", 0)], &[("T", &[], &["P"])]);
    assert_eq!(check_deadlock_free(&gen, 50), DeadlockVerdict::Inconclusive);
    let g = reachability_graph(&gen, 50);
    assert!(g.budget_exceeded());
    assert_eq!(g.node_count(), 50);
}

#[test]
fn producer_consumer_coverability() {
    let n = load_pnml("producer-consumer.pnml");
    let g = coverability_graph(&n);
    let mut omega_places = BTreeSet::new();
    for node in g.nodes() {
        for (i, t) in node.marking.0.iter().enumerate() {
            if *t == Tokens::Omega {
                omega_places.insert(n.places()[i].clone());
            }
        }
    }
    assert_eq!(omega_places, BTreeSet::from(["P3".to_string()]));
    assert_eq!(check_boundedness(&n), Boundedness::Unbounded(vec!["P3".into()]));
}

#[test]
fn source_fed_place_coverability() {
    let n = build(&[("P", 0)], &[("T", &[], &["P"])]);
    let g = coverability_graph(&n);
    assert_eq!(g.node_count(), 2);
    let ms: Vec<Marking> = g.nodes().map(|n| n.marking.clone()).collect();
    assert_eq!(ms, vec![m(&[0]), Marking(vec![Tokens::Omega])]);
    assert_eq!(g.arc_count(), 2);
}

#[test]
fn bounded_net_coverability_equals_reachability() {
    for n in [load_pnml("seasons.pnml"), load_pnml("fork-join.pnml"), manufacturing(true)] {
        let c = coverability_graph(&n);
        let r = reachability_graph(&n, 10_000);
        let cm: Vec<_> = c.nodes().map(|x| x.marking.clone()).collect();
        let rm: Vec<_> = r.nodes().map(|x| x.marking.clone()).collect();
        assert_eq!(cm, rm);
        assert_eq!(c.arcs(), r.arcs());
    }
}

#[test]
fn controlled_manufacturing_is_reversible() {
    let n = manufacturing(true);
    let g = reachability_graph(&n, 10_000);
    assert_eq!(g.node_count(), brute_force_reachable(&n).len());
    for id in g.node_ids() {
        assert!(g.reachable(id).contains(&0), "node {id} cannot return to M0");
    }
    assert_eq!(check_deadlock_free(&n, 10_000), DeadlockVerdict::DeadlockFree);
}

#[test]
fn pnml_round_trip() {
    for name in ["producer-consumer.pnml", "seasons.pnml", "fork-join.pnml"] {
        let n = load_pnml(name);
        let back = from_pnml(&to_pnml(&n)).unwrap();
        assert_eq!(back.places(), n.places());
        assert_eq!(back.transitions(), n.transitions());
        assert_eq!(back.arcs(), n.arcs());
        assert_eq!(back.m0(), n.m0());
    }
    let mut w = build(&[("a&b", 2)], &[("t<1>", &["a&b"], &[])]);
    w.add_arc("t<1>", "a&b", 3).unwrap();
    let back = from_pnml(&to_pnml(&w)).unwrap();
    assert_eq!(back.places(), ["a&b"]);
    assert_eq!(back.arcs()[1].weight, 3);
    assert!(from_pnml("<pnml></pnml>").is_err());
    assert!(from_pnml("<pnml><net id='x'><place id='p'><initialMarking><text>lots</text></initialMarking></place></net></pnml>").is_err());
}

#[test]
fn incidence_csv() {
    let n = load_pnml("producer-consumer.pnml");
    let inc: IncidenceMatrices<i64> = incidence(&n);
    let mut buf = Vec::new();
    inc.write_csv(MatrixKind::Incidence, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(",P1,P2,P3,P4,P5"));
    assert_eq!(lines.next(), Some("T1,1,-1,0,0,0"));
}

/// Naive BFS over dense integer vectors, independent of the library's
/// firing code.
fn brute_force_reachable(n: &PlaceTransitionNet) -> HashSet<Vec<i64>> {
    let a: IncidenceMatrices<i64> = incidence(n);
    let start: Vec<i64> = n.m0().counts().unwrap().iter().map(|&x| x as i64).collect();
    let mut seen = HashSet::from([start.clone()]);
    let mut q = VecDeque::from([start]);
    while let Some(mk) = q.pop_front() {
        for t in 0..a.a.len() {
            if (0..mk.len()).all(|p| mk[p] >= a.a_minus[t][p]) {
                let next: Vec<i64> = (0..mk.len()).map(|p| mk[p] + a.a[t][p]).collect();
                if seen.insert(next.clone()) {
                    q.push_back(next);
                }
            }
        }
        assert!(seen.len() <= 10_000, "oracle budget");
    }
    seen
}

#[test]
fn reachability_matches_oracle_on_fixtures() {
    for n in [load_pnml("seasons.pnml"), load_pnml("fork-join.pnml"), manufacturing(false), manufacturing(true)] {
        let g = reachability_graph(&n, 10_000);
        let ours: HashSet<Vec<i64>> =
            g.nodes().map(|x| x.marking.counts().unwrap().iter().map(|&v| v as i64).collect()).collect();
        assert_eq!(ours, brute_force_reachable(&n));
    }
}

fn random_net() -> impl Strategy<Value = PlaceTransitionNet> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(np, nt)| {
        (
            proptest::collection::vec(0u64..3, np),
            proptest::collection::vec(proptest::collection::vec(0u64..3, np), nt),
            proptest::collection::vec(proptest::collection::vec(0u64..3, np), nt),
        )
            .prop_map(move |(m0, pre, post)| {
                let mut n = PlaceTransitionNet::new("random");
                for (i, &k) in m0.iter().enumerate() {
                    n.add_place(format!("P{i}"), k).unwrap();
                }
                for t in 0..nt {
                    n.add_transition(format!("T{t}")).unwrap();
                    for p in 0..np {
                        if pre[t][p] > 0 {
                            n.add_arc(&format!("P{p}"), &format!("T{t}"), pre[t][p]).unwrap();
                        }
                        if post[t][p] > 0 {
                            n.add_arc(&format!("T{t}"), &format!("P{p}"), post[t][p]).unwrap();
                        }
                    }
                }
                n
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn invariants_satisfy_their_equations(n in random_net()) {
        let a: IncidenceMatrices<BigInt> = incidence(&n);
        let p = p_invariants(&n);
        let t = t_invariants(&n);
        for y in p.raw.iter().chain(&p.minimal) {
            prop_assert!(a.apply_to_places(&y.vector).iter().all(|v| v == &BigInt::from(0)));
            prop_assert!(y.vector.iter().all(|v| v >= &BigInt::from(0)));
            prop_assert!(y.vector.iter().any(|v| v > &BigInt::from(0)));
        }
        for x in t.raw.iter().chain(&t.minimal) {
            prop_assert!(a.apply_to_transitions(&x.vector).iter().all(|v| v == &BigInt::from(0)));
        }
        for set in [&p.minimal, &t.minimal] {
            for (i, u) in set.iter().enumerate() {
                for (j, v) in set.iter().enumerate() {
                    if i != j {
                        prop_assert!(!u.vector.iter().zip(&v.vector).all(|(a, b)| a >= b), "{u} dominates {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn place_invariants_are_conserved(n in random_net(), choices in proptest::collection::vec(0usize..8, 0..30)) {
        let p = p_invariants(&n);
        let weigh = |mk: &Marking| -> Vec<BigInt> {
            let c = mk.counts().unwrap();
            p.minimal.iter().map(|y| y.vector.iter().zip(&c).map(|(a, &b)| a * BigInt::from(b)).sum()).collect()
        };
        let mut mk = n.m0();
        let start = weigh(&mk);
        for c in choices {
            let enabled: Vec<&String> = n.transitions().iter().filter(|t| n.enabled(&mk, t).unwrap()).collect();
            if enabled.is_empty() {
                break;
            }
            mk = n.fire(&mk, enabled[c % enabled.len()]).unwrap();
            prop_assert_eq!(weigh(&mk), start.clone());
        }
    }

    #[test]
    fn reachability_matches_oracle(n in random_net()) {
        let g = reachability_graph(&n, 2_000);
        if !g.budget_exceeded() {
            let ours: HashSet<Vec<i64>> =
                g.nodes().map(|x| x.marking.counts().unwrap().iter().map(|&v| v as i64).collect()).collect();
            prop_assert_eq!(ours, brute_force_reachable(&n));
        }
    }
}

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

use qmst::enumerate::{enumerate_spanning_trees, solve_conflicts, solve_exact, solve_qbst_threshold};
use qmst::families::{build_kn_ladder, make_kn_accordion, FreeEdgeChoice};
use qmst::graded::{
    check_certificate, is_row_graded, mst_row, natural_lower_bound, pi_critical_tree, random_doubly_graded,
    random_row_graded, recognize_graded, solve_doubly_graded, GradedKind,
};
use qmst::instance::{
    conflict_violations, conflicts_to_quadratic, objective_sum, ConflictSet, CostMatrix, Instance, ProblemKind,
};
use qmst::ladder_dp::{dp_solve, dp_solve_with, DpOptions, Score, StateId};
use qmst::matroid::{graphic_matroid, greedy_base, is_matroid, pi_critical_base, uniform_matroid};
use qmst::random::{
    adjacent_random_costs, random_adjacent_conflicts, random_conflicts, random_connected_graph, random_costs,
    rng_from_seed,
};
use qmst::reductions::{random_formula, reduce_to_fanstar};
use qmst::families::make_fan_star;
use qmst::graded::Permutation;
use qmst::tree_count::{count_graph, count_matrix_tree};
use qmst::{EdgeSet, Graph};

fn small_graph(seed: u64, max_m: usize) -> Graph {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(n - 1..=(n * (n - 1) / 2).min(max_m));
    random_connected_graph(n, m, &mut rng).unwrap()
}

fn bfs_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut comps = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        comps += 1;
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    q.push_back(y);
                }
            }
        }
    }
    comps
}

fn random_tree(g: &Graph, seed: u64) -> EdgeSet {
    let mut trees = Vec::new();
    enumerate_spanning_trees(g, 100_000, |t| trees.push(t.to_vec())).unwrap();
    EdgeSet::new(trees[(seed as usize) % trees.len()].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spanning_tree_predicate_matches_bfs(seed in any::<u64>(), mask in any::<u32>()) {
        let g = small_graph(seed, 12);
        let members: Vec<usize> = (0..g.num_edges()).filter(|e| mask >> e & 1 == 1).collect();
        let edges: Vec<(usize, usize)> = members.iter().map(|&e| g.edges()[e]).collect();
        let expected = members.len() + 1 == g.num_vertices() && bfs_components(g.num_vertices(), &edges) == 1;
        prop_assert_eq!(g.is_spanning_tree(&EdgeSet::new(members)), expected);
    }

    #[test]
    fn deletion_contraction_identity(seed in any::<u64>()) {
        let g = small_graph(seed, 15);
        let tau = count_graph(&g);
        for e in 0..g.num_edges() {
            let sum = count_matrix_tree(&g.delete_edge(e).unwrap()) + count_matrix_tree(&g.contract_edge(e).unwrap());
            prop_assert_eq!(&sum, &tau);
        }
    }

    #[test]
    fn generated_ladders_replay_and_validate(k in 4usize..=8, n in 1usize..=7, seed in any::<u64>()) {
        let l = build_kn_ladder(k, n, &FreeEdgeChoice::Seeded(seed)).unwrap();
        let again = build_kn_ladder(k, n, &FreeEdgeChoice::Explicit(l.free_edge_choices.clone())).unwrap();
        prop_assert_eq!(&again.graph, &l.graph);
        prop_assert_eq!(l.graph.num_edges(), n * (k - 1) + 1);
        prop_assert_eq!(l.graph.num_vertices(), n * (k - 2) + 2);
        // independent check: each labelled cycle is a k-cycle, neighbours share one edge
        prop_assert_eq!(l.cycle_edges.len(), n);
        for (i, cyc) in l.cycle_edges.iter().enumerate() {
            let set: HashSet<usize> = cyc.iter().copied().collect();
            prop_assert_eq!(set.len(), k);
            let edges: Vec<(usize, usize)> = cyc.iter().map(|&e| l.graph.edges()[e]).collect();
            let mut deg = std::collections::HashMap::new();
            for &(u, v) in &edges {
                *deg.entry(u).or_insert(0) += 1;
                *deg.entry(v).or_insert(0) += 1;
            }
            prop_assert!(deg.values().all(|&d| d == 2) && deg.len() == k);
            if i > 0 {
                let prev: HashSet<usize> = l.cycle_edges[i - 1].iter().copied().collect();
                prop_assert_eq!(set.intersection(&prev).count(), 1);
            }
            for j in 0..i.saturating_sub(1) {
                let other: HashSet<usize> = l.cycle_edges[j].iter().copied().collect();
                prop_assert_eq!(set.intersection(&other).count(), 0);
            }
        }
        prop_assert!(l.layout().is_ok());
    }

    #[test]
    fn generated_accordions_replay(k in 3usize..=7, n in 1usize..=7, seed in any::<u64>()) {
        let a = make_kn_accordion(k, n, &FreeEdgeChoice::Seeded(seed)).unwrap();
        let again = make_kn_accordion(k, n, &FreeEdgeChoice::Explicit(a.free_edge_choices.clone())).unwrap();
        prop_assert_eq!(&again.graph, &a.graph);
        prop_assert_eq!(a.graph.num_edges(), n * (k - 1) + 1);
        prop_assert_eq!(a.graph.num_vertices(), n * (k - 2) + 2);
    }

    #[test]
    fn objective_is_the_full_double_sum(seed in any::<u64>(), pick in any::<u64>()) {
        let g = small_graph(seed, 10);
        let q = random_costs(g.num_edges(), -7, 7, &mut rng_from_seed(seed ^ 1));
        let t = random_tree(&g, pick);
        let mut expect = 0;
        for &i in t.iter() {
            for &j in t.iter() {
                expect += q.get(i, j);
            }
        }
        let inst = Instance::quadratic(g, q, ProblemKind::Qmst).unwrap();
        prop_assert_eq!(objective_sum(&inst, &t).unwrap(), expect);
    }

    #[test]
    fn conflict_encoding_round_trip(seed in any::<u64>(), pick in any::<u64>()) {
        let g = small_graph(seed, 10);
        let s = random_conflicts(&g, 0.3, &mut rng_from_seed(seed ^ 2));
        let enc = conflicts_to_quadratic(&g, &s);
        let t = random_tree(&g, pick);
        let with_s = Instance::new(g.clone(), CostMatrix::zeros(g.num_edges()), s, ProblemKind::Fstc).unwrap();
        let encoded = Instance::quadratic(g, enc, ProblemKind::Qmst).unwrap();
        prop_assert_eq!(conflict_violations(&with_s, &t).unwrap() == 0, objective_sum(&encoded, &t).unwrap() == 0);
    }

    #[test]
    fn enumeration_visits_every_tree(seed in any::<u64>()) {
        let g = small_graph(seed, 12);
        let inst = Instance::quadratic(g.clone(), CostMatrix::zeros(g.num_edges()), ProblemKind::Qmst).unwrap();
        let r = solve_exact(&inst, ProblemKind::Qmst).unwrap();
        prop_assert_eq!(BigUint::from(r.trees_enumerated.unwrap()), count_graph(&g));
    }

    #[test]
    fn bottleneck_equals_smallest_feasible_threshold(seed in any::<u64>()) {
        let g = small_graph(seed, 10);
        let q = random_costs(g.num_edges(), -4, 6, &mut rng_from_seed(seed ^ 3));
        let inst = Instance::quadratic(g, q.clone(), ProblemKind::Qbst).unwrap();
        let exact = solve_exact(&inst, ProblemKind::Qbst).unwrap().value.unwrap();
        let grid = q.distinct_values();
        let best = grid
            .into_iter()
            .find(|&mu| solve_qbst_threshold(&inst, mu).unwrap().is_feasible())
            .unwrap();
        prop_assert_eq!(exact, best);
    }

    #[test]
    fn optimum_is_transpose_invariant(seed in any::<u64>()) {
        let g = small_graph(seed, 10);
        let q = random_costs(g.num_edges(), -5, 5, &mut rng_from_seed(seed ^ 4));
        let a = Instance::quadratic(g.clone(), q.clone(), ProblemKind::Qmst).unwrap();
        let b = Instance::quadratic(g, q.transpose(), ProblemKind::Qmst).unwrap();
        for kind in [ProblemKind::Qmst, ProblemKind::Qbst] {
            prop_assert_eq!(solve_exact(&a, kind).unwrap().value, solve_exact(&b, kind).unwrap().value);
        }
    }

    #[test]
    fn conflict_branching_matches_enumeration(seed in any::<u64>()) {
        let g = small_graph(seed, 10);
        let mut rng = rng_from_seed(seed ^ 5);
        let q = random_costs(g.num_edges(), -5, 9, &mut rng);
        let s = random_conflicts(&g, 0.3, &mut rng);
        let inst = Instance::new(g, q, s, ProblemKind::Mstc).unwrap();
        for kind in [ProblemKind::Mstc, ProblemKind::Bstc, ProblemKind::Fstc] {
            let a = solve_conflicts(&inst, kind).unwrap();
            let b = solve_exact(&inst, kind).unwrap();
            prop_assert_eq!((a.status, a.value), (b.status, b.value));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ladder_dp_matches_enumeration(k in 4usize..=6, n in 1usize..=4, seed in any::<u64>(), p in 0.0f64..0.5) {
        let l = build_kn_ladder(k, n, &FreeEdgeChoice::Seeded(seed)).unwrap();
        let mut rng = rng_from_seed(seed);
        let q = adjacent_random_costs(&l.graph, -9, 9, &mut rng);
        let s = random_adjacent_conflicts(&l.graph, p, &mut rng);
        let inst = Instance::new(l.graph.clone(), q, s, ProblemKind::Aqmst).unwrap();
        for kind in [ProblemKind::Aqmst, ProblemKind::Aqbst, ProblemKind::Mstac, ProblemKind::Bstac, ProblemKind::Fstac] {
            let dp = dp_solve_with(&inst, &l, kind, &DpOptions { verify_deltas: true, ..Default::default() }).unwrap();
            let ex = solve_exact(&inst, kind).unwrap();
            prop_assert_eq!((dp.result.status, dp.result.value), (ex.status, ex.value));
        }
    }

    #[test]
    fn raising_a_state_never_lowers_the_answer(
        k in 4usize..=6, n in 2usize..=4, seed in any::<u64>(),
        layer in 1usize..=4, state in 0usize..7, bump in 1i64..20,
    ) {
        let l = build_kn_ladder(k, n, &FreeEdgeChoice::Seeded(seed)).unwrap();
        let q = adjacent_random_costs(&l.graph, -9, 9, &mut rng_from_seed(seed));
        let inst = Instance::quadratic(l.graph.clone(), q, ProblemKind::Aqmst).unwrap();
        let base = dp_solve(&inst, &l, ProblemKind::Aqmst).unwrap().score;
        let target = (layer.min(n), StateId::ALL[state]);
        let hook = move |i: usize, s: StateId, sc: Score| {
            if (i, s) == target { Score { cost: sc.cost + bump, ..sc } } else { sc }
        };
        let opts = DpOptions { verify_deltas: false, layer_hook: Some(&hook) };
        let bumped = dp_solve_with(&inst, &l, ProblemKind::Aqmst, &opts).unwrap().score;
        prop_assert!(bumped >= base);
    }

    #[test]
    fn natural_bound_never_exceeds_optimum(seed in any::<u64>()) {
        let g = small_graph(seed, 10);
        let q = random_costs(g.num_edges(), -9, 9, &mut rng_from_seed(seed ^ 6));
        let inst = Instance::quadratic(g, q, ProblemKind::Qmst).unwrap();
        let lb = natural_lower_bound(&inst).unwrap().value;
        prop_assert!(lb <= solve_exact(&inst, ProblemKind::Qmst).unwrap().value.unwrap());
    }

    #[test]
    fn doubly_graded_chain(seed in any::<u64>(), offset in -8i64..4) {
        let g = small_graph(seed, 10);
        let (q, _) = random_doubly_graded(g.num_edges(), 3, offset, &mut rng_from_seed(seed ^ 7));
        let inst = Instance::quadratic(g, q, ProblemKind::Qmst).unwrap();
        let sol = solve_doubly_graded(&inst).unwrap();
        let opt = solve_exact(&inst, ProblemKind::Qmst).unwrap().value;
        prop_assert_eq!(sol.result.value, opt);
        prop_assert_eq!(Some(sol.lower_bound), opt);
    }

    #[test]
    fn row_graded_critical_tree_solves_every_row(seed in any::<u64>()) {
        let g = small_graph(seed, 10);
        let (q, pi) = random_row_graded(g.num_edges(), -5, 9, &mut rng_from_seed(seed ^ 8));
        prop_assert!(is_row_graded(&pi.apply(&q)));
        let inst = Instance::quadratic(g.clone(), q.clone(), ProblemKind::Qmst).unwrap();
        let t0 = pi_critical_tree(&g, &pi).unwrap();
        for i in 0..g.num_edges() {
            let z = mst_row(&inst, i).unwrap().0;
            let on_t0: i64 = t0.as_slice().iter().map(|&j| q.get(i, j)).sum();
            prop_assert_eq!(z, on_t0);
        }
    }

    #[test]
    fn recognised_certificates_are_sound(seed in any::<u64>(), m in 1usize..=7, which in 0u8..3) {
        let mut rng = rng_from_seed(seed);
        let q = match which {
            0 => random_costs(m, 0, 2, &mut rng),
            1 => random_row_graded(m, 0, 5, &mut rng).0,
            _ => random_doubly_graded(m, 2, 0, &mut rng).0,
        };
        let cert = recognize_graded(&q);
        prop_assert!(check_certificate(&q, &cert));
        if which == 2 {
            prop_assert_eq!(cert.kind, GradedKind::DoublyGraded);
        }
    }

    #[test]
    fn greedy_base_is_critical_on_matroids(seed in any::<u64>(), uniform in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let bs = if uniform {
            let n = rng.gen_range(1..=6);
            uniform_matroid(rng.gen_range(0..=n), n).unwrap()
        } else {
            graphic_matroid(&small_graph(seed, 8), 100_000).unwrap()
        };
        prop_assert!(is_matroid(&bs));
        let mut order: Vec<usize> = (0..bs.ground_size()).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let pi = Permutation::from_order(&order).unwrap();
        prop_assert_eq!(greedy_base(&bs, &pi), pi_critical_base(&bs, &pi).unwrap());
    }

    #[test]
    fn fanstar_reductions_are_well_formed(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let vars = rng.gen_range(1..=6);
        let clauses = rng.gen_range(1..=6);
        let f = random_formula(vars, clauses, &mut rng).unwrap();
        let out = reduce_to_fanstar(&f).unwrap();
        prop_assert_eq!(&out.instance.graph, &make_fan_star(3 * clauses).unwrap());
        prop_assert!(out.instance.conflicts.all_adjacent(&out.instance.graph));
        prop_assert_eq!(out.instance.conflicts.len(), f.complementary_positions().len());
    }
}

#[test]
fn empty_conflicts_make_every_tree_feasible() {
    let g = small_graph(11, 8);
    let inst = Instance::new(g.clone(), CostMatrix::zeros(g.num_edges()), ConflictSet::new(), ProblemKind::Fstc).unwrap();
    assert!(solve_exact(&inst, ProblemKind::Fstc).unwrap().is_feasible());
}

use butterfly::clustering::{
    build_block_partition, build_cluster_tree, check_assumption_eta2, cluster_sequence,
    standard_admissible, ClusterTree, Support,
};
use butterfly::galerkin::{sphere_mesh, Discretization, QuadratureConfig};
use butterfly::interp::AxisBox;

fn point_supports(points: &[[f64; 3]]) -> Vec<Support> {
    points
        .iter()
        .map(|p| Support {
            proxy: p.to_vec(),
            bbox: AxisBox::new_closed(p.to_vec(), p.to_vec()).unwrap(),
        })
        .collect()
}

fn sphere(level: usize) -> (Discretization, ClusterTree) {
    let disc =
        Discretization::new(sphere_mesh(level).unwrap(), QuadratureConfig::default()).unwrap();
    let tree = build_cluster_tree(&disc.supports(), 32).unwrap();
    (disc, tree)
}

#[test]
fn cube_corners_split_once() {
    let mut corners = Vec::new();
    for k in 0..8 {
        corners.push([(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64]);
    }
    let t = build_cluster_tree(&point_supports(&corners), 1).unwrap();
    assert_eq!(t.depth(), 1);
    let root = t.cluster(t.root());
    assert_eq!(root.sons.len(), 8);
    assert!(root.sons.iter().all(|&s| t.cluster(s).len() == 1));
    assert!(build_cluster_tree(&point_supports(&corners), 0).is_err());
}

#[test]
fn admissibility_examples() {
    let a = AxisBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let b = AxisBox::new(vec![3.0; 3], vec![4.0; 3]).unwrap();
    // brute force over corner pairs gives the box distance for these boxes
    let corner = |bx: &AxisBox, k: usize| -> Vec<f64> {
        (0..3)
            .map(|i| {
                if (k >> i) & 1 == 0 {
                    bx.lo()[i]
                } else {
                    bx.hi()[i]
                }
            })
            .collect()
    };
    let brute = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| butterfly::kernel::dist(&corner(&a, i), &corner(&b, j)))
        .fold(f64::INFINITY, f64::min);
    assert!((a.dist(&b) - brute).abs() < 1e-14);
    assert!((a.dist(&b) - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    assert!(standard_admissible(&a, &b, 1.0));
    let touching = AxisBox::new(vec![1.0, 0.0, 0.0], vec![2.0, 1.0, 1.0]).unwrap();
    assert!(!standard_admissible(&a, &touching, 100.0));
    assert!(!standard_admissible(&a, &a, 1e6));
}

#[test]
fn separated_singletons_give_one_admissible_leaf() {
    let rows = build_cluster_tree(&point_supports(&[[0.0, 0.0, 0.0]]), 1).unwrap();
    let cols = build_cluster_tree(&point_supports(&[[5.0, 0.0, 0.0]]), 1).unwrap();
    let p = build_block_partition(&rows, &cols, 1.0).unwrap();
    assert_eq!(p.admissible.len(), 1);
    assert!(p.inadmissible.is_empty());
    assert_eq!(p.plans[0].half_levels, 0);
    let seq = cluster_sequence(&rows, &cols, &p.plans[0], p.plans[0].middle_blocks[0]).unwrap();
    assert_eq!(seq.row_ancestors, vec![rows.root()]);
    assert_eq!(seq.col_ancestors, vec![cols.root()]);
    assert!(seq.row_descendants.is_empty());
    assert!(cluster_sequence(&rows, &cols, &p.plans[0], (5, 5)).is_err());
}

#[test]
fn self_partition_has_inadmissible_diagonal() {
    let pts: Vec<[f64; 3]> = (0..64)
        .map(|k| [k as f64 / 63.0, (k % 5) as f64 * 0.1, 0.0])
        .collect();
    let t = build_cluster_tree(&point_supports(&pts), 4).unwrap();
    let p = build_block_partition(&t, &t, 1.0).unwrap();
    for &l in t.leaves() {
        assert!(p.inadmissible.contains(&(l, l)));
    }
    assert_eq!(p.covered_entries(&t, &t), 64 * 64);
}

#[test]
fn level4_sphere_tree_invariants() {
    let (disc, t) = sphere(4);
    let depth = t.depth();
    assert_eq!(depth, 2);
    for c in t.clusters() {
        assert_eq!(c.is_leaf(), c.level == depth);
        assert!(c.bbox.contains(&c.center(), 0.0));
        for &i in &c.indices {
            for v in &disc.triangle(i).v {
                assert!(
                    c.bbox.contains(v, 1e-12),
                    "vertex of {i} outside cluster {}",
                    c.id
                );
            }
        }
        if !c.is_leaf() {
            let mut union: Vec<usize> = c
                .sons
                .iter()
                .flat_map(|&s| t.cluster(s).indices.clone())
                .collect();
            union.sort_unstable();
            assert_eq!(union, c.indices);
        }
    }
    // the stopping rule is global, so some leaves exceed the leaf size
    assert!(t.leaves().iter().any(|&l| t.cluster(l).len() <= 32));
}

#[test]
fn level4_partition_and_plans() {
    let (disc, t) = sphere(4);
    let p = build_block_partition(&t, &t, 1.0).unwrap();
    let n = disc.len();
    assert_eq!(p.covered_entries(&t, &t), n * n);
    let depth = t.depth();
    for plan in &p.plans {
        let ell = plan.level;
        assert_eq!(plan.half_levels + plan.middle_level, depth);
        let spread = plan.middle_level - plan.half_levels;
        assert!(spread == ell || spread == ell + 1);
        assert!(standard_admissible(
            &t.cluster(plan.row).bbox,
            &t.cluster(plan.col).bbox,
            1.0
        ));
        for &(s, c) in &plan.middle_blocks {
            let seq = cluster_sequence(&t, &t, plan, (s, c)).unwrap();
            assert_eq!(
                *seq.row_ancestors.last().unwrap(),
                t.ancestor_at(s, ell).unwrap()
            );
        }
    }
    let report = check_assumption_eta2(&t, &t, &p, 4.0, f64::INFINITY).unwrap();
    assert!(report.eta2_min.is_finite() && report.eta2_min > 0.0);
    assert!(report.q_bar < 1.0);
    let quiet = check_assumption_eta2(&t, &t, &p, 0.0, 1.0).unwrap();
    assert_eq!(quiet.eta2_min, 0.0);
    assert!(quiet.satisfied);
}

#[test]
fn plan_arithmetic_on_a_deep_line() {
    // A long line of points gives deep trees and plans with L > 0.
    let pts: Vec<[f64; 3]> = (0..1024)
        .map(|k| [(k as f64 + 0.5) / 1024.0, 0.0, 0.0])
        .collect();
    let t = build_cluster_tree(&point_supports(&pts), 4).unwrap();
    let p = build_block_partition(&t, &t, 1.0).unwrap();
    let depth = t.depth();
    assert!(p.plans.iter().any(|pl| pl.half_levels >= 2));
    for plan in &p.plans {
        let ell = plan.level;
        assert_eq!(plan.half_levels, (depth - ell) / 2);
        assert_eq!(plan.middle_level, depth - plan.half_levels);
        let spread = plan.middle_level - plan.half_levels;
        assert!(spread == ell || spread == ell + 1);
        let seq = cluster_sequence(&t, &t, plan, plan.middle_blocks[0]).unwrap();
        assert_eq!(seq.row_ancestors.len(), plan.half_levels + 1);
        for leaf_level in &seq.row_descendants {
            for &c in leaf_level {
                let up = t.ancestor_at(c, plan.middle_level).unwrap();
                assert_eq!(up, plan.middle_blocks[0].0);
            }
        }
    }
    for &leaf in t.leaves() {
        if let Some(k) = p.plan_containing(&t, &t, leaf, *t.leaves().last().unwrap()) {
            let plan = &p.plans[k];
            assert!(t.is_descendant(t.ancestor_at(leaf, plan.middle_level).unwrap(), plan.row));
        }
    }
}

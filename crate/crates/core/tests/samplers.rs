use std::collections::HashSet;

use fewshot_eval::samplers::estimate_task_count_from_total;
use fewshot_eval::{estimate_task_count, sample_until_depleted, sample_with_replacement, LabeledPool, TaskSpec};
use proptest::prelude::*;

fn pool_with_sizes(sizes: &[usize]) -> LabeledPool {
    let labels = (0..sizes.len()).map(|c| format!("c{c}")).collect();
    let data = sizes
        .iter()
        .enumerate()
        .map(|(c, &n)| (0..n).map(|i| (c * 10_000 + i) as f64).collect())
        .collect();
    LabeledPool::from_class_data(labels, 1, data).unwrap()
}

fn used_indices_are_unique(pool: &LabeledPool, tasks: &[fewshot_eval::Task]) -> bool {
    let mut seen: Vec<HashSet<usize>> = vec![HashSet::new(); pool.num_classes()];
    for t in tasks {
        for (k, &c) in t.class_subset.iter().enumerate() {
            for &i in t.support[k].iter().chain(&t.query[k]) {
                if !seen[c].insert(i) {
                    return false;
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn depletion_never_reuses_an_example(
        sizes in prop::collection::vec(0usize..80, 2..9),
        ways in 2usize..5,
        shots in 1usize..5,
        queries in 1usize..8,
        seed in any::<u64>(),
    ) {
        let pool = pool_with_sizes(&sizes);
        let tasks = sample_until_depleted(&pool, ways, shots, queries, seed).unwrap();
        prop_assert!(used_indices_are_unique(&pool, &tasks));
        let spec = TaskSpec::new(ways, shots, queries);
        for t in &tasks {
            prop_assert!(t.validate(&pool, Some(&spec)).is_ok());
        }
        // stops only once fewer than `ways` classes could supply another task
        let mut left = sizes.clone();
        for t in &tasks {
            for &c in &t.class_subset {
                left[c] -= shots + queries;
            }
        }
        prop_assert!(left.iter().filter(|&&n| n >= shots + queries).count() < ways);
        prop_assert!(tasks.len() <= estimate_task_count_from_total(pool.total_samples(), ways, shots, queries));
    }

    #[test]
    fn depletion_count_is_exact_when_every_class_is_used(
        ways in 2usize..7,
        per_class in 1usize..300,
        shots in 1usize..6,
        queries in 1usize..20,
        seed in any::<u64>(),
    ) {
        let pool = pool_with_sizes(&vec![per_class; ways]);
        let tasks = sample_until_depleted(&pool, ways, shots, queries, seed).unwrap();
        prop_assert_eq!(tasks.len(), estimate_task_count(ways, per_class, ways, shots, queries));
    }

    #[test]
    fn with_replacement_tasks_are_valid(
        classes in 2usize..8,
        per_class in 20usize..40,
        seed in any::<u64>(),
        count in 1usize..30,
    ) {
        let pool = pool_with_sizes(&vec![per_class; classes]);
        let spec = TaskSpec::new(2, 5, 15).with_task_count(count);
        let tasks = sample_with_replacement(&pool, &spec, seed).unwrap();
        prop_assert_eq!(tasks.len(), count);
        for t in &tasks {
            prop_assert!(t.validate(&pool, Some(&spec)).is_ok());
        }
        prop_assert_eq!(tasks, sample_with_replacement(&pool, &spec, seed).unwrap());
    }
}

#[test]
fn uniform_selection_can_strand_a_class() {
    // Ten classes of nine samples with S+Q = 5: each class supplies exactly one
    // chunk, so five tasks are drawn while the size-based estimate says nine.
    let pool = pool_with_sizes(&[9; 10]);
    let tasks = sample_until_depleted(&pool, 2, 2, 3, 4).unwrap();
    assert_eq!(tasks.len(), 5);
    assert_eq!(estimate_task_count(10, 9, 2, 2, 3), 9);
}

#[test]
fn depletion_fixture_matches_the_estimate() {
    // 840 samples over 7 classes, 5-way 5-shot 15-query
    let pool = pool_with_sizes(&[120; 7]);
    assert_eq!(estimate_task_count(7, 120, 5, 5, 15), 8);
    let tasks = sample_until_depleted(&pool, 5, 5, 15, 0).unwrap();
    assert!(used_indices_are_unique(&pool, &tasks));
    // three classes must be exhausted before fewer than five remain eligible
    assert!((6..=8).contains(&tasks.len()), "{}", tasks.len());
}

use geodesic::redblue::{group_size, redblue_solve_1d_with_group};
use geodesic::{redblue_bruteforce, redblue_solve, redblue_solve_1d, Point, RedBlueInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(rng: &mut ChaCha8Rng, d: usize, max_n: usize, span: i64, max_v: u64) -> RedBlueInstance {
    let point = |rng: &mut ChaCha8Rng| Point::new((0..d).map(|_| rng.gen_range(-span..=span)).collect(), rng.gen_range(0..=max_v));
    let reds = (0..rng.gen_range(0..=max_n)).map(|_| point(rng)).collect();
    let blues = (0..rng.gen_range(0..=max_n)).map(|_| point(rng)).collect();
    RedBlueInstance::new(d, reds, blues).unwrap()
}

/// Plain dominance count: red strictly below blue in every coordinate.
fn dominating_pairs(inst: &RedBlueInstance) -> u64 {
    inst.reds
        .iter()
        .map(|r| inst.blues.iter().filter(|b| r.coords.iter().zip(&b.coords).all(|(x, y)| x < y)).count() as u64)
        .sum()
}

#[test]
fn spec_examples() {
    let inst = RedBlueInstance::from_json(r#"{"d":1,"reds":[{"x":[0],"v":1}],"blues":[{"x":[1],"v":2}]}"#).unwrap();
    assert_eq!(redblue_solve(&inst).unwrap().coeffs(), &[0, 0, 0, 1]);
    let tie = RedBlueInstance::new(1, vec![Point::new(vec![3], 1)], vec![Point::new(vec![3], 1)]).unwrap();
    assert!(redblue_solve(&tie).unwrap().is_zero());
    let empty = RedBlueInstance::new(2, vec![], vec![Point::new(vec![0, 0], 4)]).unwrap();
    assert!(redblue_solve(&empty).unwrap().is_zero());
}

#[test]
fn matches_bruteforce_and_dominance_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for d in 1..=5 {
        for _ in 0..150 {
            let span = rng.gen_range(0..=8);
            let inst = instance(&mut rng, d, 120, span, 30);
            let fast = redblue_solve(&inst).unwrap();
            assert_eq!(fast, redblue_bruteforce(&inst));
            assert_eq!(fast.mass(), dominating_pairs(&inst) as u128);
        }
    }
}

#[test]
fn every_group_size_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let inst = instance(&mut rng, 1, 60, 10, 12);
        let expected = redblue_bruteforce(&inst);
        for t in [1, 2, 3, 7, 1000] {
            assert_eq!(redblue_solve_1d_with_group(&inst, t).unwrap(), expected);
        }
        assert_eq!(redblue_solve_1d(&inst).unwrap(), expected);
    }
}

#[test]
fn group_size_rule() {
    assert_eq!(group_size(1000, 50), 23);
    assert_eq!(group_size(1, 0), 1);
    assert_eq!(group_size(4, 1_000_000), 4);
}

#[test]
fn degenerate_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for d in 1..=4 {
        for _ in 0..50 {
            // All coordinates equal, or only two distinct values.
            let span = rng.gen_range(0..=1);
            let inst = instance(&mut rng, d, 80, span, 5);
            assert_eq!(redblue_solve(&inst).unwrap(), redblue_bruteforce(&inst));
        }
    }
}

#[test]
fn rejects_inconsistent_input() {
    assert!(RedBlueInstance::new(2, vec![Point::new(vec![0], 1)], vec![]).is_err());
    assert!(RedBlueInstance::new(0, vec![], vec![]).is_err());
    let two_d = RedBlueInstance::new(2, vec![], vec![]).unwrap();
    assert!(redblue_solve_1d(&two_d).is_err());
    assert!(RedBlueInstance::from_json("{").is_err());
}

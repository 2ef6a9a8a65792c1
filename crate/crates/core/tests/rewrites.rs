mod common;

use qgame_core::equivalence::{apply, equivalent, EquivalenceError};

const CASES: u64 = 1000;

#[test]
fn admissible_rewrites_are_sound() {
    let mut rng = common::rng(1);
    for case in 0..CASES {
        let g = common::game(&mut rng, 6, 64);
        let params = common::admissible(&mut rng, &g);
        let step = apply(&g, &params).unwrap_or_else(|e| panic!("case {case}: {} rejected: {e}", params.rule()));
        assert_eq!(step.before.canonicalize().unwrap(), step.after.canonicalize().unwrap(), "case {case}");
        step.replay().unwrap();
    }
}

#[test]
fn inadmissible_rewrites_are_rejected() {
    let mut rng = common::rng(2);
    let mut exercised = [0usize; 6];
    for case in 0..CASES {
        let g = common::game(&mut rng, 6, 64);
        let rule = (case % 6) as usize;
        let Some(params) = common::inadmissible(&mut rng, &g, rule) else { continue };
        exercised[rule] += 1;
        match apply(&g, &params) {
            Err(EquivalenceError::Precondition { .. })
            | Err(EquivalenceError::DimensionMismatch { .. })
            | Err(EquivalenceError::Exact(_)) => {}
            other => panic!("case {case}: {} accepted or misreported: {other:?}", params.rule()),
        }
    }
    assert!(exercised.iter().all(|n| *n >= 20), "{exercised:?}");
}

#[test]
fn rewrite_sequences_preserve_canonical_form() {
    let mut rng = common::rng(3);
    for case in 0..CASES {
        let g = common::game(&mut rng, 6, 64);
        let canonical = g.canonicalize().unwrap();
        let mut cur = g.clone();
        for _ in 0..rand::Rng::gen_range(&mut rng, 1..=20) {
            let params = common::admissible(&mut rng, &cur);
            cur = apply(&cur, &params).unwrap_or_else(|e| panic!("case {case}: {e}")).after;
        }
        assert_eq!(cur.canonicalize().unwrap(), canonical, "case {case}");
        assert!(equivalent(&g, &cur).unwrap());
    }
}

use nrfmapf_core::cnf::{
    encode_amo_pairwise, encode_amo_sequential, encode_at_most_one, encode_card_le_k, encode_exactly_one,
};
use nrfmapf_core::{CnfFormula, Lit, Var};
use nrfmapf_testkit::dpll;

/// Whether `formula` has a model agreeing with `bits` on the first `n` vars.
fn admits(formula: &CnfFormula, n: usize, bits: u32) -> bool {
    let mut a = vec![None; formula.num_vars()];
    for (i, slot) in a.iter_mut().take(n).enumerate() {
        *slot = Some(bits >> i & 1 == 1);
    }
    dpll(formula.clauses(), &mut a)
}

fn inputs(n: usize) -> (CnfFormula, Vec<Lit>) {
    let mut f = CnfFormula::new();
    let lits = (0..n).map(|_| f.new_var().pos()).collect();
    (f, lits)
}

#[test]
fn at_most_k_matches_counting() {
    for n in 0..=10 {
        for k in 0..=n + 1 {
            let (mut f, lits) = inputs(n);
            encode_card_le_k(&mut f, &lits, k);
            assert!(f.len() <= 3 * n * (k + 1), "n={n} k={k}: {} clauses", f.len());
            for bits in 0u32..1 << n {
                assert_eq!(admits(&f, n, bits), bits.count_ones() as usize <= k, "n={n} k={k} bits={bits:b}");
            }
        }
    }
}

#[test]
fn amo_encodings_agree() {
    for n in 0..=10 {
        let (mut pw, lits) = inputs(n);
        encode_amo_pairwise(&mut pw, &lits);
        let (mut seq, _) = inputs(n);
        encode_amo_sequential(&mut seq, &lits);
        let (mut auto, _) = inputs(n);
        encode_at_most_one(&mut auto, &lits);
        let (mut exactly, _) = inputs(n);
        encode_exactly_one(&mut exactly, &lits);
        assert_eq!(pw.len(), n * n.saturating_sub(1) / 2);
        for bits in 0u32..1 << n {
            let amo = bits.count_ones() <= 1;
            assert_eq!(admits(&pw, n, bits), amo);
            assert_eq!(admits(&seq, n, bits), amo, "sequential n={n} bits={bits:b}");
            assert_eq!(admits(&auto, n, bits), amo);
            assert_eq!(admits(&exactly, n, bits), bits.count_ones() == 1);
        }
    }
}

#[test]
fn negated_inputs_are_counted_as_literals() {
    let (mut f, lits) = inputs(4);
    let neg: Vec<Lit> = lits.iter().map(|&l| !l).collect();
    encode_card_le_k(&mut f, &neg, 1);
    for bits in 0u32..16 {
        assert_eq!(admits(&f, 4, bits), bits.count_ones() >= 3);
    }
    assert_eq!(Var(0).pos(), lits[0]);
}

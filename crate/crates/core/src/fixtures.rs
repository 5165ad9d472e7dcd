//! Sequence tables shipped with the crate.
//!
//! `table1.json` holds the 30 length-12 pairs `(c_i, d_i)` designed for
//! fractional-shift cross-correlation at most 0.715 (grid density 128).
//! The other two files hold the example spreading pair for the non-coherent
//! scheme and the seed quadruple for the coherent scheme on a 10 x 12 interlace.

use serde::Deserialize;

use crate::golay::QuaternaryPair;
use crate::seqcore::QuaternarySequence;
use crate::setsearch::SequenceSetPair;

pub const TABLE1_JSON: &str = include_str!("../fixtures/table1.json");
pub const NONCOHERENT_JSON: &str = include_str!("../fixtures/spreading_noncoherent.json");
pub const COHERENT_JSON: &str = include_str!("../fixtures/coherent_quadruple.json");

/// The 30-pair C/D set.
pub fn table1() -> SequenceSetPair {
    serde_json::from_str(TABLE1_JSON).expect("embedded table is valid")
}

/// Table pairs `(c_i, d_i)`, certified.
pub fn table1_pairs() -> Vec<QuaternaryPair> {
    let t = table1();
    t.c.into_iter()
        .zip(t.d)
        .map(|(c, d)| QuaternaryPair::new(c, d).expect("table pairs are complementary"))
        .collect()
}

#[derive(Deserialize)]
struct NonCoherentFixture {
    a: QuaternarySequence,
    b: QuaternarySequence,
    rb_example: RbExample,
}

#[derive(Deserialize)]
struct RbExample {
    c: QuaternarySequence,
    d: QuaternarySequence,
}

/// Length-5 spreading pair `a = (+,+,+,j,i)`, `b = (+,i,-,+,j)`.
pub fn noncoherent_spreading() -> QuaternaryPair {
    let f: NonCoherentFixture = serde_json::from_str(NONCOHERENT_JSON).expect("embedded fixture is valid");
    QuaternaryPair::new(f.a, f.b).expect("spreading pair is complementary")
}

/// Length-12 RB pair accompanying the spreading pair in the worked example.
pub fn noncoherent_rb_example() -> QuaternaryPair {
    let f: NonCoherentFixture = serde_json::from_str(NONCOHERENT_JSON).expect("embedded fixture is valid");
    QuaternaryPair::new(f.rb_example.c, f.rb_example.d).expect("RB pair is complementary")
}

#[derive(Deserialize)]
struct CoherentFixture {
    a: QuaternarySequence,
    b: QuaternarySequence,
    c: QuaternarySequence,
    d: QuaternarySequence,
}

/// `(spread, half_pair)`: a length-10 spreading pair and a length-6 RB half pair.
pub fn coherent_quadruple() -> (QuaternaryPair, QuaternaryPair) {
    let f: CoherentFixture = serde_json::from_str(COHERENT_JSON).expect("embedded fixture is valid");
    (
        QuaternaryPair::new(f.a, f.b).expect("spreading pair is complementary"),
        QuaternaryPair::new(f.c, f.d).expect("half pair is complementary"),
    )
}

//! Emits the unit draws the engine consumes for a given seed, one per line,
//! for the Python re-execution in `oracle/pso_oracle.py`.
//!
//! cargo test -p pso-trust --test reference_draws -- --ignored --nocapture

use pso_trust::pso::UnitSource;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
#[ignore]
fn dump_seed_42() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..4000 {
        println!("{:.17e}", rng.next_unit());
    }
}

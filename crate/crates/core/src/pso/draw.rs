use rand::{Rng, RngCore};

/// Source of the `r1`/`r2` coefficients of the velocity update.
///
/// Any seeded `RngCore` works. [`Constant`] pins every draw, which is how
/// the hand-checked update examples are reproduced.
pub trait UnitSource {
    /// Next value in `[0, 1]`.
    fn next_unit(&mut self) -> f64;
}

impl<R: RngCore> UnitSource for R {
    fn next_unit(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Returns the same value for every draw.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl UnitSource for Constant {
    fn next_unit(&mut self) -> f64 {
        self.0
    }
}

/// Replays a fixed list of draws, then panics. Used to check draw order.
#[derive(Clone, Debug)]
pub struct Scripted {
    values: Vec<f64>,
    next: usize,
}

impl Scripted {
    pub fn new(values: Vec<f64>) -> Self {
        Scripted { values, next: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.next
    }
}

impl UnitSource for Scripted {
    fn next_unit(&mut self) -> f64 {
        let v = *self
            .values
            .get(self.next)
            .unwrap_or_else(|| panic!("scripted draws exhausted after {}", self.next));
        self.next += 1;
        v
    }
}

//! Outcome models driven by per-node random inputs, the common interface of
//! the coupled Monte Carlo estimators.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::sar::{NoiseModel, SarSolver};

/// `Y = G(e_1, …, e_n)` with independent input blocks `e_i`.
pub trait OutcomeModel: Sync {
    /// Number of outcomes `Y_j`.
    fn outputs(&self) -> usize;

    /// Number of independent input blocks `e_i`.
    fn inputs(&self) -> usize;

    /// Scalars per input block.
    fn input_width(&self) -> usize {
        1
    }

    /// Draws block `i` into `out` (length [`input_width`](Self::input_width)).
    fn draw_input(&self, i: usize, rng: &mut StreamRng, out: &mut [f64]);

    /// Evaluates all outcomes; `inputs` holds the blocks back to back.
    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()>;
}

impl OutcomeModel for SarSolver {
    fn outputs(&self) -> usize {
        self.n()
    }

    fn inputs(&self) -> usize {
        self.n()
    }

    fn draw_input(&self, _i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        out[0] = self.spec().noise().sample(rng);
    }

    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.solve(inputs)?);
        Ok(())
    }
}

impl<M: OutcomeModel + ?Sized> OutcomeModel for &M {
    fn outputs(&self) -> usize {
        (**self).outputs()
    }

    fn inputs(&self) -> usize {
        (**self).inputs()
    }

    fn input_width(&self) -> usize {
        (**self).input_width()
    }

    fn draw_input(&self, i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        (**self).draw_input(i, rng, out)
    }

    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).evaluate(inputs, out)
    }
}

/// `Z_j = H(Y_j)`.
pub struct Mapped<M, H> {
    inner: M,
    map: H,
    pub name: String,
}

impl<M: OutcomeModel, H: Fn(f64) -> f64 + Sync> Mapped<M, H> {
    pub fn new(inner: M, name: impl Into<String>, map: H) -> Self {
        Self { inner, map, name: name.into() }
    }
}

impl<M: OutcomeModel, H: Fn(f64) -> f64 + Sync> OutcomeModel for Mapped<M, H> {
    fn outputs(&self) -> usize {
        self.inner.outputs()
    }

    fn inputs(&self) -> usize {
        self.inner.inputs()
    }

    fn input_width(&self) -> usize {
        self.inner.input_width()
    }

    fn draw_input(&self, i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        self.inner.draw_input(i, rng, out)
    }

    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.evaluate(inputs, out)?;
        for v in out {
            *v = (self.map)(*v);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Combine {
    Sum,
    Product,
}

/// Two models over the same node set with independent inputs. Input block
/// `i` of the pair is block `i` of `a` followed by block `i` of `b`.
pub struct Paired<A, B> {
    a: A,
    b: B,
    combine: Combine,
}

fn check_pair<A: OutcomeModel, B: OutcomeModel>(a: &A, b: &B) -> Result<()> {
    if a.inputs() != b.inputs() || a.outputs() != b.outputs() {
        return Err(Error::Shape(format!(
            "paired models disagree: {}x{} vs {}x{}",
            a.outputs(),
            a.inputs(),
            b.outputs(),
            b.inputs()
        )));
    }
    Ok(())
}

impl<A: OutcomeModel, B: OutcomeModel> Paired<A, B> {
    /// `Y_j + Z_j`.
    pub fn sum(a: A, b: B) -> Result<Self> {
        check_pair(&a, &b)?;
        Ok(Self { a, b, combine: Combine::Sum })
    }

    /// `Y_j Z_j`.
    pub fn product(a: A, b: B) -> Result<Self> {
        check_pair(&a, &b)?;
        Ok(Self { a, b, combine: Combine::Product })
    }
}

impl<A: OutcomeModel, B: OutcomeModel> OutcomeModel for Paired<A, B> {
    fn outputs(&self) -> usize {
        self.a.outputs()
    }

    fn inputs(&self) -> usize {
        self.a.inputs()
    }

    fn input_width(&self) -> usize {
        self.a.input_width() + self.b.input_width()
    }

    fn draw_input(&self, i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        let wa = self.a.input_width();
        self.a.draw_input(i, rng, &mut out[..wa]);
        self.b.draw_input(i, rng, &mut out[wa..]);
    }

    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        let (wa, wb) = (self.a.input_width(), self.b.input_width());
        let w = wa + wb;
        let mut ea = Vec::with_capacity(self.inputs() * wa);
        let mut eb = Vec::with_capacity(self.inputs() * wb);
        for block in inputs.chunks_exact(w) {
            ea.extend_from_slice(&block[..wa]);
            eb.extend_from_slice(&block[wa..]);
        }
        let mut za = vec![0.0; self.outputs()];
        self.a.evaluate(&ea, &mut za)?;
        self.b.evaluate(&eb, out)?;
        for (o, a) in out.iter_mut().zip(za) {
            *o = match self.combine {
                Combine::Sum => a + *o,
                Combine::Product => a * *o,
            };
        }
        Ok(())
    }
}

/// Every outcome equals the first input, `Y_j = e_1`: the extreme case in
/// which one shock drives the whole network.
pub struct CommonShock {
    pub n: usize,
    pub noise: NoiseModel,
}

impl OutcomeModel for CommonShock {
    fn outputs(&self) -> usize {
        self.n
    }

    fn inputs(&self) -> usize {
        self.n
    }

    fn draw_input(&self, _i: usize, rng: &mut StreamRng, out: &mut [f64]) {
        out[0] = self.noise.sample(rng);
    }

    fn evaluate(&self, inputs: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(inputs[0]);
        Ok(())
    }
}

/// Draws a full input vector, block by block, from one stream.
pub fn draw_inputs<M: OutcomeModel + ?Sized>(model: &M, rng: &mut StreamRng) -> Vec<f64> {
    let w = model.input_width();
    let mut e = vec![0.0; model.inputs() * w];
    for (i, block) in e.chunks_exact_mut(w).enumerate() {
        model.draw_input(i, rng, block);
    }
    e
}

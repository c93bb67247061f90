//! Dense two-phase tableau simplex with Bland's rule, generic over the
//! scalar so the same pivoting runs in `f64` and in exact rationals.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Hard stop against cycling bugs; Bland's rule terminates well before.
pub const MAX_PIVOTS: usize = 100_000;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Strictly positive beyond the scalar's tolerance.
    fn positive(&self) -> bool;
    fn negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;

    fn negligible(&self) -> bool {
        !self.positive() && !self.negative()
    }
}

/// Pivot tolerance for floating point tableaux.
pub const F64_EPS: f64 = 1e-12;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn positive(&self) -> bool {
        *self > F64_EPS
    }
    fn negative(&self) -> bool {
        *self < -F64_EPS
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_f64(&self) -> f64 {
        crate::symbolic::to_f64(self)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        crate::symbolic::ratio(num, den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct PivotCounts {
    pub phase_one: usize,
    pub phase_two: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolution<F> {
    pub x: Vec<F>,
    pub objective: F,
    /// Multipliers `y` of the equality rows, with `y^T A <= c` and `y^T b` equal
    /// to the optimum.
    pub dual: Vec<F>,
    pub pivots: PivotCounts,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<F> {
    Optimal(LpSolution<F>),
    Infeasible,
    Unbounded,
}

struct Tableau<F> {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row holds reduced costs
    /// and the last column the right-hand side.
    data: Vec<F>,
    basis: Vec<usize>,
}

impl<F: Scalar> Tableau<F> {
    fn at(&self, r: usize, c: usize) -> &F {
        &self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> &F {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let inv = F::one() / self.at(pr, pc).clone();
        for c in 0..width {
            let v = self.data[pr * width + c].clone() * inv.clone();
            self.data[pr * width + c] = v;
        }
        let pivot_row: Vec<F> = self.data[pr * width..(pr + 1) * width].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let factor = self.data[r * width + pc].clone();
            if factor == F::zero() {
                continue;
            }
            for c in 0..width {
                let v = self.data[r * width + c].clone() - factor.clone() * pivot_row[c].clone();
                self.data[r * width + c] = v;
            }
        }
        self.basis[pr] = pc;
    }

    /// Bland's rule: lowest eligible entering column, ties in the ratio test
    /// broken by the lowest basic variable.
    fn run(&mut self, allowed: usize, pivots: &mut usize) -> Result<bool> {
        loop {
            let entering = (0..allowed).find(|&c| self.at(self.rows, c).negative());
            let Some(pc) = entering else { return Ok(true) };
            let mut best: Option<(usize, F)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if !a.positive() {
                    continue;
                }
                let ratio = self.rhs(r).clone() / a.clone();
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio || (!(ratio > bratio) && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = best else { return Ok(false) };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::Precision { tol: 0.0, detail: format!("simplex exceeded {MAX_PIVOTS} pivots") });
            }
        }
    }
}

/// Minimize `c^T x` subject to `A x = b`, `x >= 0`, with `A` given row-major.
pub fn solve_standard_form<F: Scalar>(a: &[Vec<F>], b: &[F], c: &[F]) -> Result<LpOutcome<F>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("inconsistent LP dimensions".into()));
    }
    let cols = n + m;
    let width = cols + 1;
    let mut data = vec![F::zero(); (m + 1) * width];
    let mut signs = vec![F::one(); m];
    for r in 0..m {
        let flip = b[r] < F::zero();
        if flip {
            signs[r] = -F::one();
        }
        for j in 0..n {
            data[r * width + j] = if flip { -a[r][j].clone() } else { a[r][j].clone() };
        }
        data[r * width + n + r] = F::one();
        data[r * width + cols] = if flip { -b[r].clone() } else { b[r].clone() };
    }
    // Phase one cost: sum of artificials, priced out against the initial basis.
    for j in 0..width {
        if (n..cols).contains(&j) {
            continue;
        }
        let mut s = F::zero();
        for r in 0..m {
            s = s - data[r * width + j].clone();
        }
        data[m * width + j] = s;
    }
    let mut t = Tableau { rows: m, cols, data, basis: (n..cols).collect() };
    let mut counts = PivotCounts::default();

    t.run(n, &mut counts.phase_one)?;
    let residual = -t.rhs(m).clone();
    if residual.positive() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive zero-level artificials out of the basis where a real column can take over.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(pc) = (0..n).find(|&j| !t.at(r, j).negligible()) {
                t.pivot(r, pc);
                counts.phase_one += 1;
            }
        }
    }

    // Phase two reduced costs: c_j - c_B B^-1 A_j over every column, with
    // artificials costed at zero so their entries expose the duals.
    let cost = |j: usize| if j < n { c[j].clone() } else { F::zero() };
    for j in 0..width {
        let mut s = if j < cols { cost(j) } else { F::zero() };
        for r in 0..m {
            let cb = cost(t.basis[r]);
            s = s - cb * t.at(r, j).clone();
        }
        t.data[m * width + j] = s;
    }
    if !t.run(n, &mut counts.phase_two)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![F::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).clone();
        }
    }
    let objective = -t.rhs(m).clone();
    let dual = (0..m).map(|r| (-t.at(m, n + r).clone()) * signs[r].clone()).collect();
    Ok(LpOutcome::Optimal(LpSolution { x, objective, dual, pivots: counts }))
}

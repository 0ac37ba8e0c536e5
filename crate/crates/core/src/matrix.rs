//! Exact nonnegative integer matrices, division/amalgamation matrices,
//! balanced elementary equivalence and its bounded decision procedures.
//!
//! All arithmetic is arbitrary-precision integer arithmetic; there is no
//! floating point anywhere in this module.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rectangular matrix of nonnegative integers, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NonNegMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigUint>,
}

impl NonNegMatrix {
    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        Ok(NonNegMatrix {
            rows,
            cols,
            entries: vec![BigUint::zero(); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zero(n, n)?;
        for i in 0..n {
            m.set(i, i, BigUint::one());
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(NonNegMatrix {
            rows: rows.len(),
            cols,
            entries: rows
                .iter()
                .flat_map(|r| r.iter().map(|&x| BigUint::from(x)))
                .collect(),
        })
    }

    pub fn from_biguint_rows(rows: Vec<Vec<BigUint>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(NonNegMatrix {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigUint) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn max_entry(&self) -> BigUint {
        self.entries.iter().max().cloned().unwrap_or_default()
    }

    pub fn entry_sum(&self) -> BigUint {
        self.entries.iter().sum()
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        (0..self.cols).all(|j| self.get(i, j).is_zero())
    }

    pub fn transpose(&self) -> NonNegMatrix {
        let mut t = NonNegMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: vec![BigUint::zero(); self.rows * self.cols],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Exact matrix product; errors when the inner dimensions differ.
    pub fn mul(&self, other: &NonNegMatrix) -> Result<NonNegMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = NonNegMatrix {
            rows: self.rows,
            cols: other.cols,
            entries: vec![BigUint::zero(); self.rows * other.cols],
        };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    /// Exact integer power of a square matrix; `pow(0)` is the identity.
    pub fn pow(&self, e: usize) -> Result<NonNegMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of non-square matrix".into()));
        }
        let mut acc = NonNegMatrix::identity(self.rows)?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(
                "determinant of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(self.get(i, j).clone())).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev;
                }
                m[i][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        Ok(sign * m[n - 1][n - 1].clone())
    }
}

impl fmt::Debug for NonNegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for NonNegMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"rows":n,"cols":m,"entries":[[...],...]} with exact integers.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<serde_json::Number>>,
}

impl From<NonNegMatrix> for MatrixDoc {
    fn from(m: NonNegMatrix) -> MatrixDoc {
        let entries = (0..m.rows)
            .map(|i| {
                (0..m.cols)
                    .map(|j| {
                        serde_json::Number::from_str(&m.get(i, j).to_string())
                            .expect("decimal digits parse as a JSON number")
                    })
                    .collect()
            })
            .collect();
        MatrixDoc {
            rows: m.rows,
            cols: m.cols,
            entries,
        }
    }
}

impl TryFrom<MatrixDoc> for NonNegMatrix {
    type Error = Error;

    fn try_from(doc: MatrixDoc) -> Result<NonNegMatrix> {
        if doc.entries.len() != doc.rows || doc.entries.iter().any(|r| r.len() != doc.cols) {
            return Err(Error::InvalidArgument(
                "matrix entries do not match declared dimensions".into(),
            ));
        }
        let mut rows = Vec::with_capacity(doc.rows);
        for r in &doc.entries {
            let mut row = Vec::with_capacity(doc.cols);
            for n in r {
                let s = n.to_string();
                if s.contains(['.', 'e', 'E']) {
                    return Err(Error::BadMatrixEntry(s));
                }
                let v = BigUint::from_str(&s).map_err(|_| Error::BadMatrixEntry(s.clone()))?;
                row.push(v);
            }
            rows.push(row);
        }
        NonNegMatrix::from_biguint_rows(rows)
    }
}

impl Serialize for NonNegMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixDoc::from(self.clone()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NonNegMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = MatrixDoc::deserialize(deserializer)?;
        NonNegMatrix::try_from(doc).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Division and amalgamation matrices
// ---------------------------------------------------------------------------

/// True iff `m` is a division matrix: a {0,1}-matrix in which every column
/// has exactly one nonzero entry and every row has at least one.
pub fn is_division_matrix(m: &NonNegMatrix) -> bool {
    let one = BigUint::one();
    for e in &m.entries {
        if *e > one {
            return false;
        }
    }
    for j in 0..m.cols {
        let ones = (0..m.rows).filter(|&i| m.get(i, j).is_one()).count();
        if ones != 1 {
            return false;
        }
    }
    for i in 0..m.rows {
        if m.row_is_zero(i) {
            return false;
        }
    }
    true
}

/// True iff `m` is an amalgamation matrix (the transpose of a division matrix).
pub fn is_amalgamation_matrix(m: &NonNegMatrix) -> bool {
    is_division_matrix(&m.transpose())
}

/// A validated division matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DivisionMatrix(NonNegMatrix);

impl DivisionMatrix {
    pub fn new(m: NonNegMatrix) -> Result<Self> {
        if !is_division_matrix(&m) {
            return Err(Error::InvalidArgument("not a division matrix".into()));
        }
        Ok(DivisionMatrix(m))
    }

    pub fn matrix(&self) -> &NonNegMatrix {
        &self.0
    }

    /// The associated amalgamation matrix.
    pub fn amalgamation(&self) -> NonNegMatrix {
        self.0.transpose()
    }
}

// ---------------------------------------------------------------------------
// Elementary and balanced elementary equivalence
// ---------------------------------------------------------------------------

/// Verify the classical elementary equivalence `A = R S`, `S R = B`.
pub fn verify_elementary(
    a: &NonNegMatrix,
    r: &NonNegMatrix,
    s: &NonNegMatrix,
    b: &NonNegMatrix,
) -> Result<bool> {
    let rs = r.mul(s).map_err(|_| {
        Error::DimensionMismatch(format!(
            "R S with R {}x{}, S {}x{}",
            r.rows, r.cols, s.rows, s.cols
        ))
    })?;
    let sr = s.mul(r).map_err(|_| {
        Error::DimensionMismatch(format!(
            "S R with S {}x{}, R {}x{}",
            s.rows, s.cols, r.rows, r.cols
        ))
    })?;
    Ok(rs == *a && sr == *b)
}

/// A candidate balanced elementary equivalence `(R_A, S, R_B)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeeTriple {
    pub r_a: NonNegMatrix,
    pub s: NonNegMatrix,
    pub r_b: NonNegMatrix,
}

impl BeeTriple {
    pub fn new(r_a: NonNegMatrix, s: NonNegMatrix, r_b: NonNegMatrix) -> Result<Self> {
        let n = s.rows();
        let m = s.cols();
        if r_a.rows() != m || r_a.cols() != n || r_b.rows() != m || r_b.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "triple with S {}x{}, R_A {}x{}, R_B {}x{}",
                s.rows(),
                s.cols(),
                r_a.rows(),
                r_a.cols(),
                r_b.rows(),
                r_b.cols()
            )));
        }
        Ok(BeeTriple { r_a, s, r_b })
    }

    /// The same equivalence read from B to A.
    pub fn swapped(&self) -> BeeTriple {
        BeeTriple {
            r_a: self.r_b.clone(),
            s: self.s.clone(),
            r_b: self.r_a.clone(),
        }
    }

    /// The common product `R_A S = R_B S`, when the triple verifies.
    pub fn inner_product(&self) -> Result<NonNegMatrix> {
        self.r_a.mul(&self.s)
    }
}

/// Verify `A = S R_A`, `B = S R_B` and `R_A S = R_B S` exactly.
pub fn verify_balanced_elementary(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    t: &BeeTriple,
) -> Result<bool> {
    if a.rows() != t.s.rows() || b.rows() != t.s.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "balanced triple: A {}x{}, B {}x{}, S {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            t.s.rows(),
            t.s.cols()
        )));
    }
    let sra = t.s.mul(&t.r_a)?;
    if sra != *a {
        return Ok(false);
    }
    let srb = t.s.mul(&t.r_b)?;
    if srb != *b {
        return Ok(false);
    }
    let ras = t.r_a.mul(&t.s)?;
    let rbs = t.r_b.mul(&t.s)?;
    Ok(ras == rbs)
}

// ---------------------------------------------------------------------------
// Necessary-condition screens
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct PowerCheck {
    pub n: usize,
    /// `A^{n+1} == B^n A`
    pub a_holds: bool,
    /// `B^{n+1} == A^n B`
    pub b_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub det_a: String,
    pub det_b: String,
    pub det_equal: bool,
    pub power_checks: Vec<PowerCheck>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.det_equal && self.power_checks.iter().all(|p| p.a_holds && p.b_holds)
    }

    pub fn first_violation(&self) -> Option<String> {
        if !self.det_equal {
            return Some(format!("det(A) = {} != {} = det(B)", self.det_a, self.det_b));
        }
        for p in &self.power_checks {
            if !p.a_holds {
                return Some(format!("A^{} != B^{} A", p.n + 1, p.n));
            }
            if !p.b_holds {
                return Some(format!("B^{} != A^{} B", p.n + 1, p.n));
            }
        }
        None
    }
}

/// Exact screens that every balanced elementary equivalent pair must pass:
/// equal determinants, and `A^{n+1} = B^n A`, `B^{n+1} = A^n B` for
/// `n = 1..=n_max`. Any failure certifies that no triple exists.
pub fn necessary_invariants(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    n_max: usize,
) -> Result<InvariantReport> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "necessary invariants of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let det_a = a.determinant()?;
    let det_b = b.determinant()?;
    let mut checks = Vec::with_capacity(n_max);
    let mut a_pow = a.clone(); // A^n
    let mut b_pow = b.clone(); // B^n
    for n in 1..=n_max {
        let lhs_a = a_pow.mul(a)?; // A^{n+1}
        let rhs_a = b_pow.mul(a)?; // B^n A
        let lhs_b = b_pow.mul(b)?; // B^{n+1}
        let rhs_b = a_pow.mul(b)?; // A^n B
        checks.push(PowerCheck {
            n,
            a_holds: lhs_a == rhs_a,
            b_holds: lhs_b == rhs_b,
        });
        a_pow = lhs_a;
        b_pow = lhs_b;
    }
    Ok(InvariantReport {
        det_equal: det_a == det_b,
        det_a: det_a.to_string(),
        det_b: det_b.to_string(),
        power_checks: checks,
    })
}

// ---------------------------------------------------------------------------
// Bounded decision of balanced elementary equivalence
// ---------------------------------------------------------------------------

/// Bounds for the exhaustive triple search.
///
/// The inner dimension ranges over `1..=m_max` (smallest first) and every
/// entry of `S`, `R_A`, `R_B` is capped by `cap`. Both bounds affect
/// completeness: a triple outside them is not found. The defaults take
/// `m_max = n` and `cap = max(1, largest entry of A and B)`; any candidate
/// factor entry above the largest row/column sum of the products is
/// infeasible, which is what makes the capped search a decision procedure
/// for the bounded relation.
#[derive(Clone, Debug)]
pub struct SearchBounds {
    pub m_max: Option<usize>,
    pub cap: Option<u64>,
    pub budget: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            m_max: None,
            cap: None,
            budget: 20_000_000,
        }
    }
}

impl SearchBounds {
    fn resolve(&self, a: &NonNegMatrix, b: &NonNegMatrix) -> Result<(usize, u64)> {
        let n = a.rows();
        let m_max = self.m_max.unwrap_or(n);
        if m_max == 0 {
            return Err(Error::InvalidArgument("m_max must be positive".into()));
        }
        let cap = match self.cap {
            Some(c) => c,
            None => {
                let max = a.max_entry().max(b.max_entry());
                let max: u64 = max.try_into().map_err(|_| Error::SearchSpaceTooLarge {
                    estimate: "entry cap exceeds u64".into(),
                    budget: self.budget,
                })?;
                max.max(1)
            }
        };
        Ok((m_max, cap))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecideReport {
    pub m_max: usize,
    pub cap: u64,
    pub s_candidates: u64,
    pub steps: u64,
    /// A screen violation found before enumeration, when one exists.
    pub screen_violation: Option<String>,
}

#[derive(Clone, Debug)]
pub enum DecideOutcome {
    Found(BeeTriple),
    NotFound(DecideReport),
}

impl DecideOutcome {
    pub fn found(&self) -> Option<&BeeTriple> {
        match self {
            DecideOutcome::Found(t) => Some(t),
            DecideOutcome::NotFound(_) => None,
        }
    }
}

struct Budget {
    steps: u64,
    budget: u64,
}

impl Budget {
    fn new(budget: u64) -> Self {
        Budget { steps: 0, budget }
    }

    fn tick(&mut self, context: &str) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Error::BudgetExhausted {
                budget: self.budget,
                context: context.to_string(),
            })
        } else {
            Ok(())
        }
    }
}

/// Odometer over `len` entries in `0..=cap`, row-major lexicographic order
/// starting from the all-zero word.
struct Odometer {
    digits: Vec<u64>,
    cap: u64,
    fresh: bool,
}

impl Odometer {
    fn new(len: usize, cap: u64) -> Self {
        Odometer {
            digits: vec![0; len],
            cap,
            fresh: true,
        }
    }

    fn next(&mut self) -> Option<&[u64]> {
        if self.fresh {
            self.fresh = false;
            return Some(&self.digits);
        }
        // increment from the last position so earlier entries vary slowest
        for i in (0..self.digits.len()).rev() {
            if self.digits[i] < self.cap {
                self.digits[i] += 1;
                for d in &mut self.digits[i + 1..] {
                    *d = 0;
                }
                return Some(&self.digits);
            }
        }
        None
    }
}

fn matrix_from_digits(rows: usize, cols: usize, digits: &[u64]) -> NonNegMatrix {
    NonNegMatrix {
        rows,
        cols,
        entries: digits.iter().map(|&d| BigUint::from(d)).collect(),
    }
}

/// All `m`-vectors `r` with entries in `0..=cap` such that `S r = target`,
/// in lexicographic order.
fn column_candidates(
    s: &NonNegMatrix,
    target: &[BigUint],
    cap: u64,
    budget: &mut Budget,
) -> Result<Vec<Vec<u64>>> {
    let n = s.rows();
    let m = s.cols();
    let mut out = Vec::new();
    let mut partial: Vec<BigUint> = vec![BigUint::zero(); n];
    let mut choice: Vec<u64> = Vec::with_capacity(m);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        s: &NonNegMatrix,
        target: &[BigUint],
        cap: u64,
        k: usize,
        partial: &mut Vec<BigUint>,
        choice: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
        budget: &mut Budget,
    ) -> Result<()> {
        let n = s.rows();
        let m = s.cols();
        if k == m {
            if partial.iter().zip(target).all(|(p, t)| p == t) {
                out.push(choice.clone());
            }
            return Ok(());
        }
        // largest value of the k-th coordinate still consistent with target
        let mut max_v = cap;
        for i in 0..n {
            let c = s.get(i, k);
            if c.is_zero() {
                continue;
            }
            let slack = &target[i] - &partial[i];
            let bound = slack / c;
            let bound: u64 = bound.try_into().unwrap_or(u64::MAX);
            max_v = max_v.min(bound);
        }
        for v in 0..=max_v {
            budget.tick("column candidate enumeration")?;
            let bv = BigUint::from(v);
            let mut feasible = true;
            for i in 0..n {
                let c = s.get(i, k);
                if c.is_zero() {
                    continue;
                }
                if &partial[i] + c * &bv > target[i] {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                break;
            }
            for (i, p) in partial.iter_mut().enumerate() {
                let c = s.get(i, k);
                if !c.is_zero() {
                    *p += c * &bv;
                }
            }
            choice.push(v);
            rec(s, target, cap, k + 1, partial, choice, out, budget)?;
            choice.pop();
            for (i, p) in partial.iter_mut().enumerate() {
                let c = s.get(i, k);
                if !c.is_zero() {
                    *p -= c * &bv;
                }
            }
        }
        Ok(())
    }

    rec(s, target, cap, 0, &mut partial, &mut choice, &mut out, budget)?;
    Ok(out)
}

fn column_of(m: &NonNegMatrix, j: usize) -> Vec<BigUint> {
    (0..m.rows()).map(|i| m.get(i, j).clone()).collect()
}

fn assemble_from_columns(mrows: usize, cols: &[&Vec<u64>]) -> NonNegMatrix {
    let n = cols.len();
    let mut out = NonNegMatrix {
        rows: mrows,
        cols: n,
        entries: vec![BigUint::zero(); mrows * n],
    };
    for (j, col) in cols.iter().enumerate() {
        for (k, &v) in col.iter().enumerate() {
            out.set(k, j, BigUint::from(v));
        }
    }
    out
}

/// Enumerate, for a fixed `S` and fixed `R_A`-product `M = R_A S`, the
/// matrices `R_B` built from the per-column candidate lists that satisfy
/// `R_B S = M`. Invokes `emit` on each hit in canonical (column-major
/// lexicographic) order; `emit` returns `true` to stop the enumeration.
fn for_each_rb(
    s: &NonNegMatrix,
    cands: &[Vec<Vec<u64>>],
    m_target: &NonNegMatrix,
    budget: &mut Budget,
    emit: &mut dyn FnMut(NonNegMatrix) -> Result<bool>,
) -> Result<bool> {
    let m = s.cols();
    let n = cands.len();
    // partial = sum over chosen columns i of outer(R_B[:,i], S[i,:])
    let mut partial = match NonNegMatrix::zero(m, m) {
        Ok(z) => z,
        Err(_) => unreachable!("m >= 1"),
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(n);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        s: &NonNegMatrix,
        cands: &[Vec<Vec<u64>>],
        m_target: &NonNegMatrix,
        j: usize,
        partial: &mut NonNegMatrix,
        chosen: &mut Vec<usize>,
        budget: &mut Budget,
        emit: &mut dyn FnMut(NonNegMatrix) -> Result<bool>,
    ) -> Result<bool> {
        let n = cands.len();
        let m = s.cols();
        if j == n {
            if *partial == *m_target {
                let cols: Vec<&Vec<u64>> = chosen
                    .iter()
                    .enumerate()
                    .map(|(jj, &ci)| &cands[jj][ci])
                    .collect();
                let rb = assemble_from_columns(m, &cols);
                return emit(rb);
            }
            return Ok(false);
        }
        'cand: for (ci, col) in cands[j].iter().enumerate() {
            budget.tick("R_B enumeration")?;
            // add outer(col, S[j,:]) and prune against the target
            let mut delta: Vec<(usize, usize, BigUint)> = Vec::new();
            for (k, &v) in col.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let bv = BigUint::from(v);
                for kp in 0..m {
                    let sjk = s.get(j, kp);
                    if sjk.is_zero() {
                        continue;
                    }
                    let add = &bv * sjk;
                    let cur = partial.get(k, kp) + &add;
                    if cur > *m_target.get(k, kp) {
                        // roll back what we applied so far
                        for (rk, rkp, rv) in &delta {
                            let restored = partial.get(*rk, *rkp) - rv;
                            partial.set(*rk, *rkp, restored);
                        }
                        continue 'cand;
                    }
                    partial.set(k, kp, cur);
                    delta.push((k, kp, add));
                }
            }
            chosen.push(ci);
            let stop = rec(s, cands, m_target, j + 1, partial, chosen, budget, emit)?;
            chosen.pop();
            for (rk, rkp, rv) in &delta {
                let restored = partial.get(*rk, *rkp) - rv;
                partial.set(*rk, *rkp, restored);
            }
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    rec(s, cands, m_target, 0, &mut partial, &mut chosen, budget, emit)
}

/// Advance a mixed-radix index vector; returns false when it wraps.
fn advance_indices(idx: &mut [usize], lens: &[usize]) -> bool {
    for j in (0..idx.len()).rev() {
        idx[j] += 1;
        if idx[j] < lens[j] {
            return true;
        }
        idx[j] = 0;
    }
    false
}

/// How the `R_B` side of a candidate triple is constrained.
enum RbSide<'a> {
    /// `S R_B` must equal this matrix (the decision procedure).
    Pinned(&'a NonNegMatrix),
    /// `R_B` ranges over everything within the entry cap (neighbor
    /// expansion for the certificate search).
    Free,
}

/// Walk all candidate triples with `A = S R_A` and `R_A S = R_B S` within
/// `bounds`, in canonical order: inner dimension ascending, `S` row-major
/// lexicographic, `R_A` then `R_B` column-major lexicographic. `emit`
/// returns `true` to stop early.
///
/// Candidate `S` with a zero column are skipped: a triple with a zero
/// column in `S` reduces to one of smaller inner dimension without it, so
/// the walk still decides existence within the bounds.
fn for_each_triple(
    a: &NonNegMatrix,
    rb_side: RbSide<'_>,
    bounds: &SearchBounds,
    report: &mut DecideReport,
    budget: &mut Budget,
    emit: &mut dyn FnMut(BeeTriple) -> Result<bool>,
) -> Result<()> {
    let n = a.rows();
    let (m_max, cap) = match &rb_side {
        RbSide::Pinned(b) => bounds.resolve(a, b)?,
        RbSide::Free => bounds.resolve(a, a)?,
    };
    report.m_max = m_max;
    report.cap = cap;

    if cap == 0 {
        // only the zero triple is expressible
        let b_zero = match &rb_side {
            RbSide::Pinned(b) => b.is_zero(),
            RbSide::Free => true,
        };
        if a.is_zero() && b_zero {
            let s = NonNegMatrix::zero(n, 1)?;
            let r = NonNegMatrix::zero(1, n)?;
            let t = BeeTriple::new(r.clone(), s, r)?;
            emit(t)?;
        }
        return Ok(());
    }

    // upfront size estimate for the S walk at the largest inner dimension
    let est = BigUint::from(cap + 1).pow((n * m_max) as u32);
    if est > BigUint::from(bounds.budget) {
        return Err(Error::SearchSpaceTooLarge {
            estimate: est.to_string(),
            budget: bounds.budget,
        });
    }

    for m in 1..=m_max {
        // every m-vector with entries <= cap, for the free R_B side
        let free_cands: Vec<Vec<u64>> = match rb_side {
            RbSide::Free => {
                let mut all = Vec::new();
                let mut odo = Odometer::new(m, cap);
                while let Some(d) = odo.next() {
                    all.push(d.to_vec());
                }
                all
            }
            RbSide::Pinned(_) => Vec::new(),
        };

        let mut odo = Odometer::new(n * m, cap);
        'next_s: while let Some(digits) = odo.next() {
            budget.tick("S enumeration")?;
            report.s_candidates += 1;
            // skip S with a zero column
            for k in 0..m {
                if (0..n).all(|i| digits[i * m + k] == 0) {
                    continue 'next_s;
                }
            }
            let s = matrix_from_digits(n, m, digits);
            let mut a_cands = Vec::with_capacity(n);
            let mut ok = true;
            for j in 0..n {
                let c = column_candidates(&s, &column_of(a, j), cap, budget)?;
                if c.is_empty() {
                    ok = false;
                    break;
                }
                a_cands.push(c);
            }
            if !ok {
                continue;
            }
            let b_cands: Vec<Vec<Vec<u64>>> = match &rb_side {
                RbSide::Pinned(b) => {
                    let mut cs = Vec::with_capacity(n);
                    for j in 0..n {
                        let c = column_candidates(&s, &column_of(b, j), cap, budget)?;
                        if c.is_empty() {
                            ok = false;
                            break;
                        }
                        cs.push(c);
                    }
                    if !ok {
                        continue;
                    }
                    cs
                }
                RbSide::Free => vec![free_cands.clone(); n],
            };
            // enumerate R_A column-major lexicographic
            let lens: Vec<usize> = a_cands.iter().map(|c| c.len()).collect();
            let mut idx = vec![0usize; n];
            loop {
                budget.tick("R_A enumeration")?;
                let cols: Vec<&Vec<u64>> = (0..n).map(|j| &a_cands[j][idx[j]]).collect();
                let r_a = assemble_from_columns(m, &cols);
                let m_target = r_a.mul(&s)?;
                let mut stop = false;
                for_each_rb(&s, &b_cands, &m_target, budget, &mut |r_b| {
                    let t = BeeTriple::new(r_a.clone(), s.clone(), r_b)?;
                    let hit = emit(t)?;
                    if hit {
                        stop = true;
                    }
                    Ok(hit)
                })?;
                if stop {
                    return Ok(());
                }
                if !advance_indices(&mut idx, &lens) {
                    break;
                }
            }
        }
    }
    Ok(())
}

/// Exhaustively decide balanced elementary equivalence of `a` and `b`
/// within `bounds`, returning the first verifying triple in canonical
/// order, or a report of the searched bounds.
///
/// The determinant and power screens run first; a violation proves no
/// triple exists at any bound and is reported without enumeration.
pub fn decide_balanced_elementary(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    bounds: &SearchBounds,
) -> Result<DecideOutcome> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "decide over {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut report = DecideReport {
        m_max: 0,
        cap: 0,
        s_candidates: 0,
        steps: 0,
        screen_violation: None,
    };
    let screens = necessary_invariants(a, b, 2)?;
    if let Some(v) = screens.first_violation() {
        let (m_max, cap) = bounds.resolve(a, b)?;
        report.m_max = m_max;
        report.cap = cap;
        report.screen_violation = Some(v);
        return Ok(DecideOutcome::NotFound(report));
    }
    let mut budget = Budget::new(bounds.budget);
    let mut found: Option<BeeTriple> = None;
    for_each_triple(a, RbSide::Pinned(b), bounds, &mut report, &mut budget, &mut |t| {
        debug_assert!(verify_balanced_elementary(a, b, &t)?);
        found = Some(t);
        Ok(true)
    })?;
    report.steps = budget.steps;
    match found {
        Some(t) => Ok(DecideOutcome::Found(t)),
        None => Ok(DecideOutcome::NotFound(report)),
    }
}

// ---------------------------------------------------------------------------
// Certificates of balanced strong shift equivalence
// ---------------------------------------------------------------------------

/// A chain `A_0, ..., A_k` with a verifying triple between every
/// consecutive pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsseCertificate {
    pub matrices: Vec<NonNegMatrix>,
    pub links: Vec<BeeTriple>,
}

impl BsseCertificate {
    pub fn new(matrices: Vec<NonNegMatrix>, links: Vec<BeeTriple>) -> Result<Self> {
        if links.is_empty() || matrices.len() != links.len() + 1 {
            return Err(Error::InvalidArgument(
                "certificate needs k >= 1 links and k + 1 matrices".into(),
            ));
        }
        Ok(BsseCertificate { matrices, links })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Check every link of the certificate; dimension drift names the link.
pub fn verify_certificate(c: &BsseCertificate) -> Result<bool> {
    let n = c.matrices[0].rows();
    for (i, m) in c.matrices.iter().enumerate() {
        if !m.is_square() || m.rows() != n {
            return Err(Error::CertificateLink {
                index: i,
                reason: format!("matrix {} is {}x{}, expected {}x{}", i, m.rows(), m.cols(), n, n),
            });
        }
    }
    for (i, t) in c.links.iter().enumerate() {
        let ok = verify_balanced_elementary(&c.matrices[i], &c.matrices[i + 1], t).map_err(|e| {
            Error::CertificateLink {
                index: i,
                reason: e.to_string(),
            }
        })?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct BsseReport {
    pub explored: usize,
    pub expanded: usize,
    pub steps: u64,
    pub depth_max: usize,
}

#[derive(Clone, Debug)]
pub enum BsseOutcome {
    Found(BsseCertificate),
    NotFound(BsseReport),
}

impl BsseOutcome {
    pub fn found(&self) -> Option<&BsseCertificate> {
        match self {
            BsseOutcome::Found(c) => Some(c),
            BsseOutcome::NotFound(_) => None,
        }
    }
}

/// Breadth-first search for a certificate connecting `a` to `b` through
/// balanced elementary steps within `bounds`, up to `depth_max` links.
/// Returns the shortest certificate found, taking the first verifying
/// neighbor in canonical enumeration order at every tie.
pub fn bsse_search(
    a: &NonNegMatrix,
    b: &NonNegMatrix,
    depth_max: usize,
    bounds: &SearchBounds,
) -> Result<BsseOutcome> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "bsse search over {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if depth_max == 0 {
        return Err(Error::InvalidArgument("depth_max must be at least 1".into()));
    }

    // A equals B: the shortest certificate is a single self-link, which the
    // breadth-first dedup below would otherwise suppress.
    if a == b {
        return match decide_balanced_elementary(a, b, bounds)? {
            DecideOutcome::Found(t) => Ok(BsseOutcome::Found(BsseCertificate::new(
                vec![a.clone(), b.clone()],
                vec![t],
            )?)),
            DecideOutcome::NotFound(rep) => Ok(BsseOutcome::NotFound(BsseReport {
                explored: 1,
                expanded: 1,
                steps: rep.steps,
                depth_max,
            })),
        };
    }

    struct Node {
        matrix: NonNegMatrix,
        parent: Option<usize>,
        link: Option<BeeTriple>,
        depth: usize,
    }

    let mut budget = Budget::new(bounds.budget);
    let mut nodes: Vec<Node> = vec![Node {
        matrix: a.clone(),
        parent: None,
        link: None,
        depth: 0,
    }];
    let mut seen: HashMap<NonNegMatrix, usize> = HashMap::new();
    seen.insert(a.clone(), 0);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut expanded = 0usize;

    let reconstruct = |nodes: &Vec<Node>, mut id: usize| -> Result<BsseCertificate> {
        let mut matrices = Vec::new();
        let mut links = Vec::new();
        loop {
            matrices.push(nodes[id].matrix.clone());
            match (&nodes[id].link, nodes[id].parent) {
                (Some(t), Some(p)) => {
                    links.push(t.clone());
                    id = p;
                }
                _ => break,
            }
        }
        matrices.reverse();
        links.reverse();
        BsseCertificate::new(matrices, links)
    };

    while let Some(id) = queue.pop_front() {
        if nodes[id].depth >= depth_max {
            continue;
        }
        expanded += 1;
        let cur = nodes[id].matrix.clone();
        let mut report_stub = DecideReport {
            m_max: 0,
            cap: 0,
            s_candidates: 0,
            steps: 0,
            screen_violation: None,
        };
        let mut hit: Option<usize> = None;
        let mut local_new: Vec<(NonNegMatrix, BeeTriple)> = Vec::new();
        for_each_triple(
            &cur,
            RbSide::Free,
            bounds,
            &mut report_stub,
            &mut budget,
            &mut |t| {
                let neighbor = t.s.mul(&t.r_b)?;
                if !seen.contains_key(&neighbor) && !local_new.iter().any(|(n, _)| *n == neighbor) {
                    local_new.push((neighbor, t));
                }
                Ok(false)
            },
        )?;
        for (neighbor, t) in local_new {
            let nid = nodes.len();
            let is_target = neighbor == *b;
            seen.insert(neighbor.clone(), nid);
            nodes.push(Node {
                matrix: neighbor,
                parent: Some(id),
                link: Some(t),
                depth: nodes[id].depth + 1,
            });
            if is_target {
                hit = Some(nid);
                break;
            }
            queue.push_back(nid);
        }
        if let Some(nid) = hit {
            let cert = reconstruct(&nodes, nid)?;
            debug_assert!(verify_certificate(&cert)?);
            return Ok(BsseOutcome::Found(cert));
        }
    }

    Ok(BsseOutcome::NotFound(BsseReport {
        explored: nodes.len(),
        expanded,
        steps: budget.steps,
        depth_max,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<u64>]) -> NonNegMatrix {
        NonNegMatrix::from_rows(rows).unwrap()
    }

    // the one-vertex-splitting pair: in-splits of (u -> v, loop at v)
    fn eventual_pair() -> (NonNegMatrix, NonNegMatrix) {
        (
            m(&[vec![1, 0, 0], vec![1, 0, 0], vec![1, 0, 0]]),
            m(&[vec![0, 1, 0], vec![0, 1, 0], vec![1, 0, 0]]),
        )
    }

    // the non-transitivity pair
    fn non_transitive_pair() -> (NonNegMatrix, NonNegMatrix) {
        (
            m(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 0]]),
            m(&[vec![0, 2, 0], vec![0, 2, 0], vec![0, 2, 0]]),
        )
    }

    #[test]
    fn division_matrix_examples() {
        assert!(is_division_matrix(&m(&[vec![1, 1, 0], vec![0, 0, 1]])));
        assert!(is_division_matrix(&NonNegMatrix::identity(3).unwrap()));
        // column 2 empty
        assert!(!is_division_matrix(&m(&[vec![1, 0], vec![1, 0]])));
        // entry above one
        assert!(!is_division_matrix(&m(&[vec![2, 0], vec![0, 1]])));
        // zero row
        assert!(!is_division_matrix(&m(&[vec![1, 1], vec![0, 0]])));
        assert!(is_amalgamation_matrix(&m(&[vec![1, 1, 0], vec![0, 0, 1]]).transpose()));
    }

    #[test]
    fn verify_elementary_golden_mean_out_split() {
        let a = m(&[vec![1, 1], vec![1, 0]]);
        let d = m(&[vec![1, 1, 0], vec![0, 0, 1]]);
        let em = m(&[vec![1, 0], vec![0, 1], vec![1, 0]]);
        let b = m(&[vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]);
        assert!(verify_elementary(&a, &d, &em, &b).unwrap());
        let id = NonNegMatrix::identity(2).unwrap();
        assert!(verify_elementary(&id, &id, &id, &id).unwrap());
        let mut bad = b.clone();
        bad.set(0, 0, BigUint::from(2u32));
        assert!(!verify_elementary(&a, &d, &em, &bad).unwrap());
    }

    #[test]
    fn verify_balanced_eventual_pair() {
        let (a_e, a_f) = eventual_pair();
        let s = m(&[vec![1, 0], vec![1, 0], vec![0, 1]]);
        let r_e = m(&[vec![1, 0, 0], vec![1, 0, 0]]);
        let r_f = m(&[vec![0, 1, 0], vec![1, 0, 0]]);
        let t = BeeTriple::new(r_e, s, r_f).unwrap();
        assert!(verify_balanced_elementary(&a_e, &a_f, &t).unwrap());
        assert_eq!(t.inner_product().unwrap(), m(&[vec![1, 0], vec![1, 0]]));
        // symmetry
        assert!(verify_balanced_elementary(&a_f, &a_e, &t.swapped()).unwrap());
        // reflexivity with S = I, R = A
        let refl = BeeTriple::new(a_e.clone(), NonNegMatrix::identity(3).unwrap(), a_e.clone()).unwrap();
        assert!(verify_balanced_elementary(&a_e, &a_e, &refl).unwrap());
    }

    #[test]
    fn necessary_invariants_reports() {
        let (a_e, a_f) = eventual_pair();
        let rep = necessary_invariants(&a_e, &a_f, 3).unwrap();
        assert!(rep.all_hold());
        assert_eq!(rep.det_a, "0");
        assert_eq!(rep.det_b, "0");

        let (a, g) = non_transitive_pair();
        let rep = necessary_invariants(&a, &g, 2).unwrap();
        assert!(!rep.all_hold());
        assert!(!rep.power_checks[0].a_holds, "A^2 != B A at n = 1");

        let rep = necessary_invariants(&a, &a, 2).unwrap();
        assert!(rep.all_hold());
    }

    #[test]
    fn decide_finds_eventual_pair_triple() {
        let (a_e, a_f) = eventual_pair();
        let bounds = SearchBounds {
            m_max: Some(2),
            cap: Some(1),
            ..Default::default()
        };
        let out = decide_balanced_elementary(&a_e, &a_f, &bounds).unwrap();
        let t = out.found().expect("triple within (m=2, cap=1)");
        assert!(verify_balanced_elementary(&a_e, &a_f, t).unwrap());
    }

    #[test]
    fn decide_reflexive() {
        let a = m(&[vec![1, 1], vec![1, 0]]);
        let out = decide_balanced_elementary(&a, &a, &SearchBounds::default()).unwrap();
        let t = out.found().expect("reflexive triple");
        assert!(verify_balanced_elementary(&a, &a, t).unwrap());
    }

    #[test]
    fn decide_rejects_non_transitive_pair() {
        let (a, g) = non_transitive_pair();
        let out = decide_balanced_elementary(&a, &g, &SearchBounds::default()).unwrap();
        match out {
            DecideOutcome::NotFound(rep) => {
                assert!(rep.screen_violation.is_some(), "A^2 != B A should screen out");
            }
            DecideOutcome::Found(_) => panic!("no triple should exist"),
        }
    }

    #[test]
    fn bsse_depth_two_through_middle() {
        let (a_e, a_g) = non_transitive_pair();
        let bounds = SearchBounds::default();
        let out = bsse_search(&a_e, &a_g, 2, &bounds).unwrap();
        let cert = match out {
            BsseOutcome::Found(c) => c,
            BsseOutcome::NotFound(r) => panic!("expected certificate, explored {}", r.explored),
        };
        assert_eq!(cert.len(), 2);
        assert!(verify_certificate(&cert).unwrap());
        assert_eq!(cert.matrices[0], a_e);
        assert_eq!(cert.matrices[2], a_g);
    }

    #[test]
    fn bsse_reflexive_depth_one() {
        let a = m(&[vec![1, 1], vec![1, 0]]);
        let out = bsse_search(&a, &a, 1, &SearchBounds::default()).unwrap();
        let cert = out.found().expect("depth-1 certificate").clone();
        assert_eq!(cert.len(), 1);
        assert!(verify_certificate(&cert).unwrap());
    }

    #[test]
    fn search_bounds_are_enforced() {
        // the upfront estimate rejects searches larger than the budget
        let a = m(&[vec![9, 9], vec![9, 9]]);
        let bounds = SearchBounds {
            budget: 1_000,
            ..Default::default()
        };
        match decide_balanced_elementary(&a, &a, &bounds) {
            Err(Error::SearchSpaceTooLarge { .. }) => {}
            other => panic!("expected a size estimate error, got {:?}", other.is_ok()),
        }
        // a tiny step budget runs out mid-search
        let a = m(&[vec![2]]);
        let bounds = SearchBounds {
            budget: 4,
            ..Default::default()
        };
        match decide_balanced_elementary(&a, &a, &bounds) {
            Err(Error::BudgetExhausted { .. }) => {}
            other => panic!("expected budget exhaustion, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn corrupted_certificate_fails() {
        let (a_e, a_f) = eventual_pair();
        let s = m(&[vec![1, 0], vec![1, 0], vec![0, 1]]);
        let r_e = m(&[vec![1, 0, 0], vec![1, 0, 0]]);
        let r_f = m(&[vec![0, 1, 0], vec![1, 0, 0]]);
        let t = BeeTriple::new(r_e, s, r_f).unwrap();
        let good = BsseCertificate::new(vec![a_e.clone(), a_f.clone()], vec![t.clone()]).unwrap();
        assert!(verify_certificate(&good).unwrap());
        let mut bad_mat = a_f.clone();
        bad_mat.set(2, 2, BigUint::from(5u32));
        let bad = BsseCertificate::new(vec![a_e, bad_mat], vec![t]).unwrap();
        assert!(!verify_certificate(&bad).unwrap());
    }

    #[test]
    fn determinant_exact() {
        assert_eq!(m(&[vec![1, 1], vec![1, 0]]).determinant().unwrap(), BigInt::from(-1));
        assert_eq!(
            m(&[vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 4]]).determinant().unwrap(),
            BigInt::from(24)
        );
        assert_eq!(m(&[vec![1, 2], vec![2, 4]]).determinant().unwrap(), BigInt::zero());
    }

    #[test]
    fn json_roundtrip_exact() {
        let a = m(&[vec![1, 0, 3], vec![2, 5, 8]]);
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"rows\":2,\"cols\":3,\"entries\":[[1,0,3],[2,5,8]]"));
        let back: NonNegMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
        // negative entries are rejected
        let bad: std::result::Result<NonNegMatrix, _> =
            serde_json::from_str("{\"rows\":1,\"cols\":1,\"entries\":[[-1]]}");
        assert!(bad.is_err());
    }

    #[test]
    fn zero_row_in_s_forces_zero_rows() {
        let s = m(&[vec![0, 0], vec![1, 1]]);
        let r = m(&[vec![1, 2], vec![3, 4]]);
        let p = s.mul(&r).unwrap();
        assert!(p.row_is_zero(0));
    }
}

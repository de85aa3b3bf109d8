//! Pairwise independent functional triples.
//!
//! If `X`, `Y`, `Z` share one law `mu`, are pairwise independent, and
//! `Z = f(X, Y)` almost surely, then `mu` is uniform on its support. This
//! module checks the statement on given triples and searches small
//! alphabets for a counterexample.
//!
//! For a fixed `f` and a support `S`, the hypotheses are linear in `mu`: for
//! each `x` in `S` the map `y -> f(x, y)` must push `mu` forward to `mu`,
//! and symmetrically in `x`. The feasible set is a polytope whose vertices
//! are computed exactly; a positive feasible point other than the uniform
//! law is a counterexample.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::law::JointDist;

/// Probability weights, exact or floating point.
pub trait Mass: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Equality up to the type's tolerance (none for exact types).
    fn close(&self, other: &Self) -> bool;
    fn positive(&self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Mass for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn close(&self, other: &Self) -> bool {
        self == other
    }
    fn positive(&self) -> bool {
        self.is_positive()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Tolerance for floating-point tables.
pub const FLOAT_TOL: f64 = 1e-9;

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL
    }
    fn positive(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Law of `(X, Y, Z)` on `alphabet^3`, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTriple<M> {
    pub alphabet: u32,
    pub table: BTreeMap<[u32; 3], M>,
}

impl<M: Mass> FiniteTriple<M> {
    pub fn new(alphabet: u32, entries: impl IntoIterator<Item = ([u32; 3], M)>) -> Self {
        let mut table: BTreeMap<[u32; 3], M> = BTreeMap::new();
        for (k, m) in entries {
            assert!(k.iter().all(|&c| c < alphabet), "letter outside alphabet in {k:?}");
            let v = table.get(&k).map(|old| old.add(&m)).unwrap_or(m);
            table.insert(k, v);
        }
        Self { alphabet, table }
    }

    /// Law of `(X, Y, f(X, Y))` with `X`, `Y` independent, both of law `mu`.
    pub fn functional(mu: &[M], f: impl Fn(u32, u32) -> u32) -> Self {
        let a = mu.len() as u32;
        let entries = (0..a).flat_map(|x| (0..a).map(move |y| (x, y))).filter_map(|(x, y)| {
            let m = mu[x as usize].mul(&mu[y as usize]);
            m.positive().then(|| ([x, y, f(x, y)], m))
        });
        Self::new(a, entries.collect::<Vec<_>>())
    }

    /// Three independent copies of `mu`.
    pub fn independent(mu: &[M]) -> Self {
        let a = mu.len() as u32;
        let mut entries = Vec::new();
        for x in 0..a {
            for y in 0..a {
                for z in 0..a {
                    let m = mu[x as usize].mul(&mu[y as usize]).mul(&mu[z as usize]);
                    if m.positive() {
                        entries.push(([x, y, z], m));
                    }
                }
            }
        }
        Self::new(a, entries)
    }

    pub fn total(&self) -> M {
        self.table.values().fold(M::zero(), |acc, m| acc.add(m))
    }

    /// Law of coordinate `c`.
    pub fn marginal(&self, c: usize) -> Vec<M> {
        let mut out = vec![M::zero(); self.alphabet as usize];
        for (k, m) in &self.table {
            out[k[c] as usize] = out[k[c] as usize].add(m);
        }
        out
    }

    fn pair(&self, a: usize, b: usize) -> BTreeMap<(u32, u32), M> {
        let mut out: BTreeMap<(u32, u32), M> = BTreeMap::new();
        for (k, m) in &self.table {
            let e = out.entry((k[a], k[b])).or_insert_with(M::zero);
            *e = e.add(m);
        }
        out
    }
}

impl FiniteTriple<BigRational> {
    /// Reads a three-component law, coding each component word as a letter.
    pub fn from_joint(d: &JointDist) -> Result<Self> {
        let blocks = d.blocks();
        if blocks.len() != 3 || blocks.iter().any(|&b| b != blocks[0]) {
            return Err(Error::InvalidArgument(format!("need three equal components, got {blocks:?}")));
        }
        let len = blocks[0];
        let a = d.alphabet() as u32;
        let alphabet = a.checked_pow(len as u32).ok_or_else(|| Error::InvalidArgument("alphabet too large".into()))?;
        let code = |w: &[u8]| w.iter().fold(0u32, |acc, &c| acc * a + c as u32);
        let entries = d.iter().map(|(w, p)| ([code(&w[..len]), code(&w[len..2 * len]), code(&w[2 * len..])], p.clone()));
        Ok(Self::new(alphabet, entries.collect::<Vec<_>>()))
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Z = X + Y mod 2`, `X`, `Y` independent fair bits.
pub fn xor_triple() -> FiniteTriple<BigRational> {
    FiniteTriple::functional(&[ratio(1, 2), ratio(1, 2)], |x, y| x ^ y)
}

/// `Z = 2Y - X mod 3`, `X`, `Y` independent uniform on three letters.
pub fn mod3_triple() -> FiniteTriple<BigRational> {
    FiniteTriple::functional(&[ratio(1, 3), ratio(1, 3), ratio(1, 3)], |x, y| (2 * y + 3 - x) % 3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaStatus {
    /// Hypotheses hold and the marginal is uniform on its support.
    Confirmed,
    /// Hypotheses hold but the marginal is not uniform.
    Counterexample,
    /// Some hypothesis fails; the statement says nothing.
    HypothesesUnmet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaVerdict {
    pub same_marginal: bool,
    pub pairwise_independent: bool,
    pub functional: bool,
    pub uniform: bool,
    pub status: LemmaStatus,
}

pub fn check_lemma_instance<M: Mass>(t: &FiniteTriple<M>) -> LemmaVerdict {
    let marg: Vec<Vec<M>> = (0..3).map(|c| t.marginal(c)).collect();
    let same_marginal = (1..3).all(|c| marg[c].iter().zip(&marg[0]).all(|(a, b)| a.close(b)));

    let pairwise_independent = [(0, 1), (0, 2), (1, 2)].iter().all(|&(a, b)| {
        let joint = t.pair(a, b);
        (0..t.alphabet).all(|u| {
            (0..t.alphabet).all(|v| {
                let p = joint.get(&(u, v)).cloned().unwrap_or_else(M::zero);
                p.close(&marg[a][u as usize].mul(&marg[b][v as usize]))
            })
        })
    });

    // for each (x, y) carrying mass, Z takes a single value
    let mut seen: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut functional = true;
    for (k, m) in &t.table {
        if !m.positive() {
            continue;
        }
        if let Some(&z) = seen.get(&(k[0], k[1])) {
            if z != k[2] {
                functional = false;
            }
        } else {
            seen.insert((k[0], k[1]), k[2]);
        }
    }

    let support: Vec<&M> = marg[0].iter().filter(|m| m.positive()).collect();
    let uniform = support.windows(2).all(|w| w[0].close(w[1]));

    let status = match (same_marginal && pairwise_independent && functional, uniform) {
        (false, _) => LemmaStatus::HypothesesUnmet,
        (true, true) => LemmaStatus::Confirmed,
        (true, false) => LemmaStatus::Counterexample,
    };
    LemmaVerdict { same_marginal, pairwise_independent, functional, uniform, status }
}

/// How functions are enumerated in the counterexample search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Every `f: A x A -> A` (feasible for `A <= 3`).
    Exhaustive,
    /// Only restrictions `g: S x S -> A` whose rows and columns permute `S`;
    /// any other `g` forces some letter of `S` to mass zero.
    Pruned,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaSearchReport {
    pub alphabet: u32,
    pub grid: u32,
    pub mode: SearchMode,
    /// Functions `f` (exhaustive) or tables `g` on supports (pruned) examined.
    pub functions: u64,
    /// `(f, S)` pairs admitting a law with support exactly `S`.
    pub feasible_supports: u64,
    /// Grid marginals satisfying every hypothesis.
    pub grid_hits: u64,
    #[serde(skip)]
    pub counterexample: Option<FiniteTriple<BigRational>>,
}

impl LemmaSearchReport {
    pub fn found(&self) -> bool {
        self.counterexample.is_some()
    }
}

/// Linear constraints on `mu` restricted to `S` for the table `g` on `S x S`
/// (`g[i][j]` is `f(S[i], S[j])`). Each row is a coefficient vector over
/// `S`; the right-hand side is zero.
fn pushforward_rows(support: &[u32], g: &[Vec<u32>], alphabet: u32) -> Vec<Vec<i64>> {
    let n = support.len();
    let mut rows = Vec::new();
    for transpose in [false, true] {
        for fixed in 0..n {
            for z in 0..alphabet {
                let mut row = vec![0i64; n];
                for free in 0..n {
                    let v = if transpose { g[free][fixed] } else { g[fixed][free] };
                    if v == z {
                        row[free] += 1;
                    }
                }
                if let Some(pos) = support.iter().position(|&s| s == z) {
                    row[pos] -= 1;
                }
                if row.iter().any(|&c| c != 0) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// Unique solution of `rows * mu = 0`, `sum mu = 1`, `mu_i = 0` for `i` in
/// `zeros`, if the system determines `mu` completely.
fn solve_with_zeros(rows: &[Vec<i64>], n: usize, zeros: u32) -> Option<Vec<Rational64>> {
    let free: Vec<usize> = (0..n).filter(|i| zeros >> i & 1 == 0).collect();
    let m = free.len();
    if m == 0 {
        return None;
    }
    let mut mat: Vec<Vec<Rational64>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<Rational64> = free.iter().map(|&i| Rational64::from_integer(r[i])).collect();
            v.push(Rational64::zero());
            v
        })
        .collect();
    let mut norm = vec![Rational64::one(); m];
    norm.push(Rational64::one());
    mat.push(norm);

    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..m {
        let r = (pivot_row..mat.len()).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(pivot_row, r);
        let inv = mat[pivot_row][col].recip();
        for c in col..=m {
            mat[pivot_row][c] *= inv;
        }
        for r2 in 0..mat.len() {
            if r2 != pivot_row && !mat[r2][col].is_zero() {
                let factor = mat[r2][col];
                for c in col..=m {
                    let sub = factor * mat[pivot_row][c];
                    mat[r2][c] -= sub;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    if mat[pivot_row..].iter().any(|r| !r[m].is_zero()) {
        return None;
    }
    let mut mu = vec![Rational64::zero(); n];
    for (k, &i) in free.iter().enumerate() {
        mu[i] = mat[k][m];
    }
    Some(mu)
}

/// Vertices of `{mu >= 0 : rows * mu = 0, sum mu = 1}` over `S`.
fn polytope_vertices(rows: &[Vec<i64>], n: usize) -> Vec<Vec<Rational64>> {
    let mut out: Vec<Vec<Rational64>> = Vec::new();
    for zeros in 0..(1u32 << n) - 1 {
        if let Some(mu) = solve_with_zeros(rows, n, zeros) {
            if mu.iter().all(|x| !x.is_negative()) && !out.contains(&mu) {
                out.push(mu);
            }
        }
    }
    out
}

/// A law with support exactly `S` meeting the hypotheses and not uniform, if
/// one exists.
fn nonuniform_positive_point(rows: &[Vec<i64>], n: usize) -> (bool, Option<Vec<Rational64>>) {
    let verts = polytope_vertices(rows, n);
    if verts.is_empty() {
        return (false, None);
    }
    let k = Rational64::from_integer(verts.len() as i64);
    let bary: Vec<Rational64> = (0..n).map(|i| verts.iter().map(|v| v[i]).sum::<Rational64>() / k).collect();
    if bary.iter().any(|x| !x.is_positive()) {
        return (false, None);
    }
    let uniform = Rational64::new(1, n as i64);
    if bary.iter().any(|x| *x != uniform) {
        return (true, Some(bary));
    }
    match verts.iter().find(|v| v.iter().any(|x| *x != uniform)) {
        Some(v) => {
            let half = Rational64::new(1, 2);
            (true, Some(bary.iter().zip(v).map(|(b, x)| (b + x) * half).collect()))
        }
        None => (true, None),
    }
}

fn subsets(alphabet: u32) -> Vec<Vec<u32>> {
    (1u32..1 << alphabet).map(|m| (0..alphabet).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// `f` as a table from its index in base `A`.
fn function_table(index: u64, alphabet: u32) -> Vec<Vec<u32>> {
    let a = alphabet as u64;
    let mut x = index;
    (0..alphabet)
        .map(|_| {
            (0..alphabet)
                .map(|_| {
                    let v = (x % a) as u32;
                    x /= a;
                    v
                })
                .collect()
        })
        .collect()
}

/// Integer check of the hypotheses for `mu = counts / D`.
fn grid_point_feasible(counts: &[i64], f: &[Vec<u32>]) -> bool {
    let a = counts.len();
    for transpose in [false, true] {
        for fixed in 0..a {
            if counts[fixed] == 0 {
                continue;
            }
            let mut push = vec![0i64; a];
            for free in 0..a {
                let z = if transpose { f[free][fixed] } else { f[fixed][free] } as usize;
                push[z] += counts[free];
            }
            if push != counts {
                return false;
            }
        }
    }
    true
}

/// All compositions of `d` into `parts` nonnegative integers.
fn compositions(d: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .flat_map(|first| {
            compositions(d - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn grid_points(alphabet: u32, grid: u32) -> Vec<Vec<i64>> {
    let mut pts = Vec::new();
    for d in 1..=grid as i64 {
        for c in compositions(d, alphabet as usize) {
            // skip non-reduced duplicates of coarser grids
            let g = c.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
            if g == 1 {
                pts.push(c);
            }
        }
    }
    pts
}

fn is_uniform_counts(c: &[i64]) -> bool {
    let pos: Vec<i64> = c.iter().copied().filter(|&x| x > 0).collect();
    pos.windows(2).all(|w| w[0] == w[1])
}

/// Support, table on it, and marginal of a counterexample.
type Witness = (Vec<u32>, Vec<Vec<u32>>, Vec<Rational64>);

#[derive(Default)]
struct Tally {
    functions: u64,
    feasible: u64,
    grid_hits: u64,
    found: Option<Witness>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.functions += other.functions;
        self.feasible += other.feasible;
        self.grid_hits += other.grid_hits;
        self.found = self.found.or(other.found);
        self
    }

    /// Exact test of the table `g` on `S x S`.
    fn exact(&mut self, support: &[u32], g: &[Vec<u32>], alphabet: u32) {
        let rows = pushforward_rows(support, g, alphabet);
        let (feasible, point) = nonuniform_positive_point(&rows, support.len());
        if feasible {
            self.feasible += 1;
        }
        if let (Some(mu), None) = (point, &self.found) {
            self.found = Some((support.to_vec(), g.to_vec(), mu));
        }
    }
}

fn restrict(f: &[Vec<u32>], support: &[u32]) -> Vec<Vec<u32>> {
    support.iter().map(|&x| support.iter().map(|&y| f[x as usize][y as usize]).collect()).collect()
}

/// Tables `g: S x S -> S` with every row and column a permutation of `S`.
fn latin_tables(support: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let n = support.len();
    let mut out = Vec::new();
    let mut g = vec![vec![0u32; n]; n];
    fn fill(cell: usize, n: usize, support: &[u32], g: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if cell == n * n {
            out.push(g.clone());
            return;
        }
        let (r, c) = (cell / n, cell % n);
        for &v in support {
            if (0..c).any(|k| g[r][k] == v) || (0..r).any(|k| g[k][c] == v) {
                continue;
            }
            g[r][c] = v;
            fill(cell + 1, n, support, g, out);
        }
    }
    fill(0, n, support, &mut g, &mut out);
    out
}

/// Searches for a triple meeting the hypotheses with a non-uniform marginal.
///
/// Each candidate is tested exactly (polytope vertices) and on the grid of
/// marginals with denominators up to `grid`.
pub fn search_lemma_counterexample(alphabet: u32, grid: u32, mode: SearchMode) -> Result<LemmaSearchReport> {
    if alphabet == 0 || alphabet > 4 {
        return Err(Error::InvalidArgument(format!("alphabet size {alphabet} outside 1..=4")));
    }
    if mode == SearchMode::Exhaustive && alphabet > 3 {
        return Err(Error::InvalidArgument("exhaustive enumeration is limited to alphabets of size 3".into()));
    }
    let supports = subsets(alphabet);
    let points = grid_points(alphabet, grid);
    let tally = match mode {
        SearchMode::Exhaustive => {
            let count = (alphabet as u64).pow(alphabet * alphabet);
            (0..count)
                .into_par_iter()
                .map(|idx| {
                    let f = function_table(idx, alphabet);
                    let mut t = Tally { functions: 1, ..Default::default() };
                    for s in &supports {
                        t.exact(s, &restrict(&f, s), alphabet);
                    }
                    for c in &points {
                        if grid_point_feasible(c, &f) {
                            t.grid_hits += 1;
                            if !is_uniform_counts(c) && t.found.is_none() {
                                let support: Vec<u32> = (0..alphabet).filter(|&i| c[i as usize] > 0).collect();
                                let d: i64 = c.iter().sum();
                                let mu = support.iter().map(|&i| Rational64::new(c[i as usize], d)).collect();
                                t.found = Some((support.clone(), restrict(&f, &support), mu));
                            }
                        }
                    }
                    t
                })
                .reduce(Tally::default, Tally::merge)
        }
        SearchMode::Pruned => supports
            .par_iter()
            .map(|s| {
                let mut t = Tally::default();
                for g in latin_tables(s) {
                    t.functions += 1;
                    t.exact(s, &g, alphabet);
                    // grid points supported exactly on S
                    for c in points.iter().filter(|c| (0..alphabet).all(|i| (c[i as usize] > 0) == s.contains(&i))) {
                        let mut f = vec![vec![0u32; alphabet as usize]; alphabet as usize];
                        for (i, &x) in s.iter().enumerate() {
                            for (j, &y) in s.iter().enumerate() {
                                f[x as usize][y as usize] = g[i][j];
                            }
                        }
                        if grid_point_feasible(c, &f) {
                            t.grid_hits += 1;
                            if !is_uniform_counts(c) && t.found.is_none() {
                                let d: i64 = c.iter().sum();
                                let mu = s.iter().map(|&i| Rational64::new(c[i as usize], d)).collect();
                                t.found = Some((s.clone(), g.clone(), mu));
                            }
                        }
                    }
                }
                t
            })
            .reduce(Tally::default, Tally::merge),
    };
    let counterexample = tally.found.map(|(support, g, mu)| {
        let mut full = vec![<BigRational as Zero>::zero(); alphabet as usize];
        for (k, &s) in support.iter().enumerate() {
            full[s as usize] = BigRational::new(BigInt::from(*mu[k].numer()), BigInt::from(*mu[k].denom()));
        }
        let pos = |x: u32| support.iter().position(|&s| s == x);
        FiniteTriple::functional(&full, |x, y| match (pos(x), pos(y)) {
            (Some(i), Some(j)) => g[i][j],
            _ => 0,
        })
    });
    Ok(LemmaSearchReport {
        alphabet,
        grid,
        mode,
        functions: tally.functions,
        feasible_supports: tally.feasible,
        grid_hits: tally.grid_hits,
        counterexample,
    })
}

/// Laws of `(X, Y, X xor Y)` for word-valued affine `X`, `Y` built from a
/// small pool of coins; used to exercise the statement on linear triples.
pub fn linear_triples(word_len: usize, pool: i64) -> Vec<JointDist> {
    use crate::gf2::{joint_distribution, BitExpr, SeedId};
    let exprs: Vec<BitExpr> = (0u32..1 << (pool + 1))
        .map(|m| BitExpr::from_seeds((0..pool).filter(|i| m >> i & 1 == 1).map(SeedId::coin), m >> pool & 1 == 1))
        .collect();
    let e = exprs.len();
    let words = e.pow(word_len as u32);
    let word = |mut idx: usize| -> Vec<BitExpr> {
        (0..word_len)
            .map(|_| {
                let x = exprs[idx % e].clone();
                idx /= e;
                x
            })
            .collect()
    };
    (0..words * words)
        .into_par_iter()
        .map(|k| {
            let x = word(k % words);
            let y = word(k / words);
            let z: Vec<BitExpr> = x.iter().zip(&y).map(|(a, b)| a.xor(b)).collect();
            let all: Vec<BitExpr> = x.into_iter().chain(y).chain(z).collect();
            joint_distribution(&all).expect("small triple").with_blocks(vec![word_len; 3])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_and_mod3_instances() {
        let v = check_lemma_instance(&xor_triple());
        assert_eq!(v.status, LemmaStatus::Confirmed);
        assert!(v.same_marginal && v.pairwise_independent && v.functional && v.uniform);
        let v = check_lemma_instance(&mod3_triple());
        assert_eq!(v.status, LemmaStatus::Confirmed);
        assert_eq!(xor_triple().total(), BigRational::one());
    }

    #[test]
    fn independent_nonuniform_is_silent() {
        let t = FiniteTriple::independent(&[0.7, 0.3]);
        let v = check_lemma_instance(&t);
        assert!(v.same_marginal && v.pairwise_independent);
        assert!(!v.functional && !v.uniform);
        assert_eq!(v.status, LemmaStatus::HypothesesUnmet);
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"status\":\"hypotheses_unmet\""));
        assert!(json.contains("\"functional\":false"));
    }

    #[test]
    fn functional_nonindependent_case() {
        // Z = X with X = Y: functional, same marginal, not pairwise independent
        let t = FiniteTriple::new(2, [([0, 0, 0], ratio(1, 2)), ([1, 1, 1], ratio(1, 2))]);
        let v = check_lemma_instance(&t);
        assert!(v.functional && v.same_marginal && !v.pairwise_independent);
        assert_eq!(v.status, LemmaStatus::HypothesesUnmet);
    }

    #[test]
    fn float_tolerance() {
        let t = FiniteTriple::functional(&[0.5 + 1e-12, 0.5 - 1e-12], |x, y| x ^ y);
        assert_eq!(check_lemma_instance(&t).status, LemmaStatus::Confirmed);
    }

    #[test]
    fn small_searches_find_nothing() {
        for a in 1..=3 {
            let r = search_lemma_counterexample(a, 12, SearchMode::Exhaustive).unwrap();
            assert!(!r.found(), "A = {a}: {:?}", r.counterexample);
            assert_eq!(r.functions, (a as u64).pow(a * a));
            assert!(r.feasible_supports > 0);
        }
        let r = search_lemma_counterexample(2, 12, SearchMode::Exhaustive).unwrap();
        assert_eq!(r.functions, 16);
    }

    #[test]
    fn pruned_agrees_with_exhaustive() {
        for a in 1..=3 {
            let e = search_lemma_counterexample(a, 6, SearchMode::Exhaustive).unwrap();
            let p = search_lemma_counterexample(a, 6, SearchMode::Pruned).unwrap();
            assert!(!e.found() && !p.found());
            assert_eq!(e.grid_hits > 0, p.grid_hits > 0);
        }
        assert!(search_lemma_counterexample(4, 4, SearchMode::Exhaustive).is_err());
        let r = search_lemma_counterexample(4, 12, SearchMode::Pruned).unwrap();
        assert!(!r.found());
        // order-4 Latin squares: 576, plus 12, 2 and 1 per smaller support
        assert_eq!(r.functions, 576 + 4 * 12 + 6 * 2 + 4);
    }

    #[test]
    fn latin_squares_of_order_three_force_uniform() {
        let s = vec![0, 1, 2];
        let squares = latin_tables(&s);
        assert_eq!(squares.len(), 12);
        for g in squares {
            let rows = pushforward_rows(&s, &g, 3);
            let verts = polytope_vertices(&rows, 3);
            assert_eq!(verts, vec![vec![Rational64::new(1, 3); 3]]);
        }
    }

    #[test]
    fn vertex_method_detects_planted_solution() {
        // no constraints at all: every law on two letters is feasible
        let (feasible, point) = nonuniform_positive_point(&[], 2);
        assert!(feasible);
        let mu = point.unwrap();
        assert!(mu.iter().all(|x| x.is_positive()));
        assert_ne!(mu[0], mu[1]);
        // constraint mu_0 = mu_1 leaves only the uniform law
        let (feasible, point) = nonuniform_positive_point(&[vec![1, -1]], 2);
        assert!(feasible && point.is_none());
    }

    #[test]
    fn grid_check_examples() {
        let xor = vec![vec![0, 1], vec![1, 0]];
        assert!(grid_point_feasible(&[1, 1], &xor));
        assert!(!grid_point_feasible(&[2, 1], &xor));
        // constant map only keeps point masses
        let constant = vec![vec![0, 0], vec![0, 0]];
        assert!(grid_point_feasible(&[1, 0], &constant));
        assert!(!grid_point_feasible(&[1, 1], &constant));
        assert_eq!(compositions(3, 2).len(), 4);
    }

    #[test]
    fn linear_triples_never_contradict() {
        for (len, pool) in [(1, 3), (2, 2)] {
            let mut confirmed = 0;
            for d in linear_triples(len, pool) {
                let v = check_lemma_instance(&FiniteTriple::from_joint(&d).unwrap());
                assert_ne!(v.status, LemmaStatus::Counterexample);
                assert!(v.uniform);
                if v.status == LemmaStatus::Confirmed {
                    confirmed += 1;
                }
            }
            assert!(confirmed > 0);
        }
    }
}

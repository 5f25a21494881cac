//! Desk-scale executable attacks against Miranda toy parameter sets.
//!
//! Everything here runs the real algorithms end to end at small sizes, so
//! the security estimates in [`crate::analysis`] can be checked against
//! observable behaviour instead of being taken on faith:
//!
//! * [`find_low_rank`] — randomized constrained-kernel search for a code
//!   word of bounded rank, the primitive underneath every attack below.
//! * [`distinguish`] — decides whether a dual code looks like the dual of
//!   a hidden structured code or like a random code of the same dimension.
//! * [`same_rowspace_mate`] — the sub-code of words whose rows live inside
//!   a given word's row space, where collinear partners hide.
//! * [`collinearity_recover`] — given two words suspected to differ by an
//!   invertible left multiplier, solves for that multiplier.
//! * [`algebra_closure`] — the algebra generated by a candidate multiplier,
//!   with its minimal polynomial and a field test.
//! * [`structural_attack`] — the full key-recovery pipeline: search, mate,
//!   transfer, closure, and module filtering, composed until the hidden
//!   m-dimensional stabilizer algebra is reconstructed.

use crate::keys::{ParameterSet, PublicKey};
use crate::matrank::{self, BinMatrix, BitVec, Echelon, MatrixCode};
use rand::RngCore;
use thiserror::Error;

/// Mate candidates tried per low-rank word inside [`structural_attack`].
const MATE_REDRAWS: usize = 8;

/// Failure modes shared by the randomized searches.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    /// The loop budget ran out before a qualifying word appeared.
    #[error("search budget of {budget} loops exhausted")]
    Exhausted {
        /// Number of loops that were attempted.
        budget: usize,
    },
    /// The code has dimension zero, so no nonzero word exists at all.
    #[error("cannot search a zero-dimensional code")]
    ZeroCode,
}

/// Shape of the zero pattern imposed by one search loop.
///
/// A code of dimension `k = a*m + b` (with `0 < b <= m`) admits `k - 1`
/// independent linear constraints on a word: `a` full zero columns plus
/// `b - 1` zero entries at the top of the next column. Any nonzero word
/// satisfying them has rank at most `n - a`, and smaller target ranks `s`
/// succeed per loop with the rank-profile probability from
/// [`crate::analysis::rank_profile_probability`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchProfile {
    /// Number of fully zeroed columns.
    pub a: usize,
    /// Tail width: `b - 1` additional entries are zeroed in column `a`.
    pub b: usize,
    /// Target rank of the search.
    pub s: usize,
    /// Maximum number of randomized loops.
    pub budget: usize,
}

impl SearchProfile {
    /// Derives the zero pattern for an `m x n` code of dimension `k`.
    ///
    /// Panics when the decomposition is impossible or the target rank is
    /// incompatible with the pattern (`s` must satisfy `1 <= s <= n - a`).
    pub fn new(m: usize, n: usize, k: usize, s: usize, budget: usize) -> Self {
        assert!(k >= 1, "the code must have at least one dimension");
        let a = (k - 1) / m;
        let b = k - a * m;
        debug_assert!(b >= 1 && b <= m);
        assert!(a < n, "dimension {k} leaves no nonzero column in {m}x{n}");
        assert!(
            s >= 1 && s <= n - a,
            "target rank {s} outside 1..={} for dimension {k}",
            n - a
        );
        SearchProfile { a, b, s, budget }
    }
}

/// A successful low-rank search.
#[derive(Clone, Debug)]
pub struct SearchHit {
    /// The code word of rank at most `s` (in the original code).
    pub word: BinMatrix,
    /// The nonsingular column change under which `word * change` shows the
    /// prescribed zero pattern.
    pub change: BinMatrix,
    /// Number of loops used, starting at 1.
    pub loops: usize,
}

/// Searches `code` for a nonzero word of rank at most `s`.
///
/// Each loop draws a nonsingular column change `Q`, forces the `k - 1`
/// zero-pattern constraints on the transformed code, and keeps the kernel
/// word when its rank is small enough. At the terminal rank `s = n - a`
/// the pattern alone guarantees success, so the first loop always hits;
/// below that the loop count is geometric with the rank-profile rate.
///
/// Every returned word is re-verified here — membership in the code, the
/// zero pattern of the transformed word, and the rank bound — rather than
/// trusted from the kernel solver.
pub fn find_low_rank<R: RngCore + ?Sized>(
    code: &MatrixCode,
    s: usize,
    budget: usize,
    rng: &mut R,
) -> Result<SearchHit, AttackError> {
    let (m, n, k) = (code.m(), code.n(), code.dim());
    if k == 0 {
        return Err(AttackError::ZeroCode);
    }
    let profile = SearchProfile::new(m, n, k, s, budget);
    let zeros = profile.a * m + profile.b - 1;
    for loops in 1..=budget {
        let q = BinMatrix::random_nonsingular(n, rng);
        let shifted: Vec<BinMatrix> = code.basis().iter().map(|g| g.mul(&q)).collect();
        let coeffs = if zeros == 0 {
            // One-dimensional code: the only candidates are 0 and the
            // single basis word.
            let mut x = BitVec::zero(k);
            x.set(0, true);
            x
        } else {
            let constraints = BinMatrix::from_fn(zeros, k, |row, l| {
                let (i, j) = if row < profile.a * m {
                    (row % m, row / m)
                } else {
                    (row - profile.a * m, profile.a)
                };
                shifted[l].get(i, j)
            });
            // k - 1 constraints on k unknowns always leave a nonzero kernel.
            matrank::kernel_basis(&constraints)[0].clone()
        };
        let word = code.combine(&coeffs);
        if word.rank() > s {
            continue;
        }
        // Independent re-verification of the hit.
        assert!(code.contains(&word), "search word left the code");
        let transformed = word.mul(&q);
        for j in 0..profile.a {
            for i in 0..m {
                assert!(!transformed.get(i, j), "zero pattern violated");
            }
        }
        for i in 0..profile.b.saturating_sub(1) {
            assert!(!transformed.get(i, profile.a), "zero pattern violated");
        }
        let rank = transformed.rank();
        assert!(rank > 0 && rank <= s, "rank bound violated");
        return Ok(SearchHit {
            word,
            change: q,
            loops,
        });
    }
    Err(AttackError::Exhausted { budget })
}

/// Verdict of the dual-code distinguisher.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distinguish {
    /// No word of rank at most kappa appeared: consistent with the dual of
    /// a hidden structured code.
    Structured,
    /// A word of rank at most kappa was found, as a random code of this
    /// dimension readily yields.
    RandomLike,
}

/// Outcome of [`distinguish`], with the loop count actually spent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DistinguishReport {
    /// The verdict.
    pub verdict: Distinguish,
    /// Loops consumed (equals `budget` for a structured verdict).
    pub loops: usize,
    /// The budget that was granted.
    pub budget: usize,
}

/// Distinguishes the dual of a hidden structured code from a random code.
///
/// The dual of the hidden code has minimum rank distance `kappa + 1` when
/// no rows are stripped (`ls = 0`), so a search for a word of rank at most
/// `kappa` can never succeed there and the budget always exhausts —
/// including a budget of zero, which therefore reports `Structured`
/// vacuously. A random code of the same dimension contains such words in
/// abundance and the search finds one within a few multiples of the
/// rank-profile expectation. With stripped rows (`ls > 0`) the structured
/// dual may also contain low-rank words, so the verdict is one-sided:
/// `RandomLike` is always evidence, `Structured` only under `ls = 0`.
pub fn distinguish<R: RngCore + ?Sized>(
    dual_code: &MatrixCode,
    params: &ParameterSet,
    budget: usize,
    rng: &mut R,
) -> DistinguishReport {
    assert_eq!(dual_code.m(), params.m, "row count mismatch");
    assert_eq!(dual_code.n(), params.n, "column count mismatch");
    assert_eq!(
        dual_code.dim(),
        params.syn_len(),
        "dual dimension must match the syndrome length"
    );
    match find_low_rank(dual_code, params.kappa, budget, rng) {
        Ok(hit) => DistinguishReport {
            verdict: Distinguish::RandomLike,
            loops: hit.loops,
            budget,
        },
        Err(_) => DistinguishReport {
            verdict: Distinguish::Structured,
            loops: budget,
            budget,
        },
    }
}

/// Basis of the sub-code of words whose row space lies inside `word`'s.
///
/// A word `w` has all rows in the row space of `word` exactly when `w`
/// annihilates the right kernel of `word`, which is a linear condition on
/// the code coefficients. With `exclude_word` set, the returned basis
/// spans a complement of `word` inside that sub-code (the GF(2) multiples
/// of `word` are left out); otherwise the basis spans the whole sub-code,
/// `word` included.
pub fn same_rowspace_mate(
    code: &MatrixCode,
    word: &BinMatrix,
    exclude_word: bool,
) -> Vec<BinMatrix> {
    let (m, n, k) = (code.m(), code.n(), code.dim());
    assert_eq!((word.rows(), word.cols()), (m, n), "word shape mismatch");
    assert!(code.contains(word), "word must belong to the code");
    assert!(*word != BinMatrix::zero(m, n), "word must be nonzero");
    let null = matrank::kernel_basis(word);
    let coeffs: Vec<BitVec> = if null.is_empty() {
        // Full-rank word: its row space is everything, so the sub-code is
        // the whole code.
        (0..k)
            .map(|l| {
                let mut e = BitVec::zero(k);
                e.set(l, true);
                e
            })
            .collect()
    } else {
        let images: Vec<Vec<BitVec>> = code
            .basis()
            .iter()
            .map(|g| null.iter().map(|v| g.mul_vec(v)).collect())
            .collect();
        let constraints = BinMatrix::from_fn(m * null.len(), k, |row, l| {
            let (vi, i) = (row / m, row % m);
            images[l][vi].get(i)
        });
        matrank::kernel_basis(&constraints)
    };
    let mut seen = Echelon::new(m * n);
    if exclude_word {
        seen.insert(&word.to_rowvec());
    }
    let mut mates = Vec::new();
    for x in &coeffs {
        let w = code.combine(x);
        if seen.insert(&w.to_rowvec()) {
            mates.push(w);
        }
    }
    mates
}

/// Recovers an invertible left multiplier `P` with `P * cw = cw2`.
///
/// Both words must be nonzero, distinct, and of the same shape. The
/// routine returns `None` when no such multiplier exists — unequal ranks,
/// or row spaces that fail to contain each other (the per-row transfer
/// systems become inconsistent) — and otherwise solves for one:
///
/// 1. Change to a frame in which the left kernel of `cw2` is spanned by
///    the last `m - s` canonical vectors, so corrections to the return
///    map vanish on the first `s` columns.
/// 2. Pick nonsingular representatives `A` (of `{X : cw2 = X cw}`) and
///    `B` (of `{Y : cw = Y cw2}`) from their affine solution spaces.
/// 3. Solve `[(A + V) B] = I` on the first `s` columns for a correction
///    `V` with rows in the left kernel of `cw` (`m*s` equations,
///    `m*(m-s)` unknowns), certifying that `A + V` composes with `B` to
///    the identity where the pair carries information; the full-rank case
///    `s = m` needs no correction at all.
///
/// The result is re-checked against the defining relation before being
/// returned, so a `Some` is always a genuine multiplier. At full rank the
/// multiplier is unique, hence exactly the hidden one for a collinear
/// pair. Below full rank it is one representative of an affine family of
/// dimension `m*(m-s)` that all share the action on `cw`; any equal-rank
/// pair with identical row spaces admits such a family, so deciding
/// whether the pair was genuinely collinear is the job of
/// [`algebra_closure`] and the module filters in [`structural_attack`].
pub fn collinearity_recover<R: RngCore + ?Sized>(
    cw: &BinMatrix,
    cw2: &BinMatrix,
    rng: &mut R,
) -> Option<BinMatrix> {
    let m = cw.rows();
    let n = cw.cols();
    assert_eq!((cw2.rows(), cw2.cols()), (m, n), "pair shape mismatch");
    let zero = BinMatrix::zero(m, n);
    assert!(*cw != zero && *cw2 != zero, "pair must be nonzero");
    assert!(cw != cw2, "pair must not be equal (GF(2)-collinear)");
    let s = cw.rank();
    if cw2.rank() != s {
        // An invertible multiplier preserves rank.
        return None;
    }

    // Step 1: alignment frame.
    let ker2 = matrank::kernel_basis(&cw2.transpose());
    let mut rows = complete_rows(m, &ker2);
    debug_assert_eq!(rows.len(), s);
    rows.extend(ker2.iter().cloned());
    let frame = BinMatrix::from_rows(&rows);
    let frame_inv = frame.inverse().expect("completed basis is nonsingular");
    let c = frame.mul(cw);
    let c2 = frame.mul(cw2);

    // Step 2: nonsingular representatives of both transfer spaces.
    let a0 = affine_transfer(&c, &c2)?;
    let b0 = affine_transfer(&c2, &c)?;
    let ker_c = matrank::kernel_basis(&c.transpose());
    let ker_c2 = matrank::kernel_basis(&c2.transpose());
    let a = pick_nonsingular(&a0, &ker_c, rng)?;
    let b = pick_nonsingular(&b0, &ker_c2, rng)?;

    // Step 3: the correction V, row by row.
    let aligned = if s == m {
        // Full rank: the transfer space is a single point.
        a
    } else {
        let ab = a.mul(&b);
        let kmat = BinMatrix::from_rows(&ker_c);
        let g = kmat.mul(&b);
        // Transposed left system: G^T y_i^T = (I - AB)_i^T on s columns.
        let gst = BinMatrix::from_fn(s, m - s, |i, j| g.get(j, i));
        let mut v = BinMatrix::zero(m, m);
        for i in 0..m {
            let rhs = BitVec::from_bits((0..s).map(|j| (i == j) != ab.get(i, j)));
            let y = matrank::solve(&gst, &rhs)?;
            let mut row = BitVec::zero(m);
            for (l, kr) in ker_c.iter().enumerate() {
                if y.get(l) {
                    row.xor_in(kr);
                }
            }
            v.set_row(i, &row);
        }
        a.add(&v)
    };

    let p = frame_inv.mul(&aligned).mul(&frame);
    if p.mul(cw) != *cw2 || p.inverse().is_none() {
        return None;
    }
    Some(p)
}

/// The matrix algebra generated by one square matrix.
#[derive(Clone, Debug)]
pub struct AlgebraClosure {
    /// Dimension over GF(2); equals the degree of the minimal polynomial.
    pub dim: usize,
    /// Basis `I, P, P^2, ..., P^(dim-1)`.
    pub basis: Vec<BinMatrix>,
    /// Minimal polynomial coefficients, constant term first, leading
    /// coefficient (always 1) last.
    pub min_poly: Vec<bool>,
    /// Whether the closure is a field, i.e. the minimal polynomial is
    /// irreducible over GF(2).
    pub is_field: bool,
}

/// Closes a square matrix under multiplication: spans successive powers
/// of `p` until the first linear dependence, then extracts the minimal
/// polynomial from that dependence and tests it for irreducibility.
pub fn algebra_closure(p: &BinMatrix) -> AlgebraClosure {
    let m = p.rows();
    assert_eq!(p.cols(), m, "the generator must be square");
    let mut ech = Echelon::new(m * m);
    let mut basis = Vec::new();
    let mut power = BinMatrix::identity(m);
    while ech.insert(&power.to_rowvec()) {
        basis.push(power.clone());
        power = power.mul(p);
        assert!(basis.len() <= m, "minimal polynomial degree exceeds m");
    }
    let dim = basis.len();
    // The first dependent power expressed over the basis gives the
    // minimal polynomial: P^dim = sum c_i P^i.
    let rows: Vec<BitVec> = basis.iter().map(|b| b.to_rowvec()).collect();
    let flat = BinMatrix::from_rows(&rows);
    let coeffs = matrank::solve(&flat.transpose(), &power.to_rowvec())
        .expect("the next power lies in the span of its predecessors");
    let mut min_poly: Vec<bool> = (0..dim).map(|i| coeffs.get(i)).collect();
    min_poly.push(true);
    let is_field = poly_is_irreducible(&min_poly);
    AlgebraClosure {
        dim,
        basis,
        min_poly,
        is_field,
    }
}

/// Result of a successful structural key recovery.
#[derive(Clone, Debug)]
pub struct StructuralRecovery {
    /// Basis of the recovered stabilizer algebra (dimension `m`).
    pub algebra: Vec<BinMatrix>,
    /// The last accepted generator of that algebra.
    pub generator: BinMatrix,
    /// Basis of the hidden supercode `algebra * duals`.
    pub supercode: Vec<BinMatrix>,
    /// Its dimension, always `m * (n - kappa)` on success.
    pub supercode_dim: usize,
    /// Outer iterations consumed.
    pub iterations: usize,
}

/// Full structural key-recovery pipeline against a public key.
///
/// Each iteration searches the public dual code for a word at the
/// terminal rank `n - a`, draws a random equal-rank mate from its
/// row-space sub-code, transfers the pair to a candidate multiplier, and
/// filters the candidate through three gates: its closure must be a field
/// of dimension at least 2, the module it spans over the public dual
/// basis must fit inside the hidden `m*(n - kappa)`-dimensional
/// supercode, and it must stabilize that module. Accepted generators
/// compose — subfield hits accumulate — until the running algebra reaches
/// dimension `m`, at which point the supercode dimension and a final
/// stabilization check decide success.
///
/// Keys whose aberrant-row surplus leaves collinear mates in the dual
/// (such as the `weak-12` toy set) fall within a few thousand iterations;
/// hardened or random keys exhaust the budget.
pub fn structural_attack<R: RngCore + ?Sized>(
    pk: &PublicKey,
    budget: usize,
    rng: &mut R,
) -> Result<StructuralRecovery, AttackError> {
    let params = &pk.params;
    let (m, n) = (params.m, params.n);
    let dual = MatrixCode::new(m, n, pk.duals.clone());
    let k = dual.dim();
    if k == 0 {
        return Err(AttackError::ZeroCode);
    }
    let a = (k - 1) / m;
    let s = n - a;
    let target = m * (n - params.kappa);
    let mut running: Vec<BinMatrix> = Vec::new();
    let mut running_ech = Echelon::new(m * m);
    for iterations in 1..=budget {
        let Ok(hit) = find_low_rank(&dual, s, 16, rng) else {
            continue;
        };
        let mates = same_rowspace_mate(&dual, &hit.word, false);
        if mates.len() < 2 {
            continue;
        }
        // A collinear partner, when the word has one, is a rare draw from
        // the mate sub-code, so each word gets several attempts.
        for _ in 0..MATE_REDRAWS {
            let Some(mate) = draw_same_rank_mate(&mates, &hit.word, rng) else {
                break;
            };
            let Some(gen) = collinearity_recover(&hit.word, &mate, rng) else {
                continue;
            };
            let closure = algebra_closure(&gen);
            if closure.dim < 2 || !closure.is_field {
                continue;
            }
            // A genuine stabilizer element keeps the spanned module inside
            // the hidden supercode; junk multipliers blow far past it.
            let span = module_span(&closure.basis, &pk.duals);
            if span.dim() > target {
                continue;
            }
            if !stabilizes(&closure.basis, &span, m, n) {
                continue;
            }
            algebra_join(&mut running, &mut running_ech, &closure.basis);
            if running_ech.dim() > m {
                // Incompatible junk slipped through the gates; start over.
                running.clear();
                running_ech = Echelon::new(m * m);
                break;
            }
            if running_ech.dim() == m {
                let span = module_span(&running, &pk.duals);
                if span.dim() == target && stabilizes(&running, &span, m, n) {
                    let supercode = span
                        .rows()
                        .map(|r| BinMatrix::from_rowvec(r, m, n))
                        .collect();
                    return Ok(StructuralRecovery {
                        algebra: running,
                        generator: gen,
                        supercode,
                        supercode_dim: target,
                        iterations,
                    });
                }
                running.clear();
                running_ech = Echelon::new(m * m);
            }
            // A generator was accepted but the algebra is still growing;
            // fresh words contribute more than redraws from this one.
            break;
        }
    }
    Err(AttackError::Exhausted { budget })
}

/// Completes independent `base` rows to a basis of `GF(2)^dim` with
/// canonical vectors; returns only the added vectors.
fn complete_rows(dim: usize, base: &[BitVec]) -> Vec<BitVec> {
    let mut ech = Echelon::new(dim);
    for v in base {
        let fresh = ech.insert(v);
        debug_assert!(fresh, "base rows must be independent");
    }
    let mut extra = Vec::new();
    for i in 0..dim {
        if ech.dim() == dim {
            break;
        }
        let mut e = BitVec::zero(dim);
        e.set(i, true);
        if ech.insert(&e) {
            extra.push(e);
        }
    }
    extra
}

/// Particular solution of `target = X * source`, row by row; `None` when
/// some row of `target` lies outside the row space of `source`.
fn affine_transfer(source: &BinMatrix, target: &BinMatrix) -> Option<BinMatrix> {
    let st = source.transpose();
    let mut rows = Vec::with_capacity(target.rows());
    for i in 0..target.rows() {
        rows.push(matrank::solve(&st, &target.row(i))?);
    }
    Some(BinMatrix::from_rows(&rows))
}

/// Draws a nonsingular element of the affine space `base + <corrections
/// applied per row>`; `None` if 64 random draws all come out singular.
fn pick_nonsingular<R: RngCore + ?Sized>(
    base: &BinMatrix,
    corrections: &[BitVec],
    rng: &mut R,
) -> Option<BinMatrix> {
    if corrections.is_empty() {
        return if base.inverse().is_some() {
            Some(base.clone())
        } else {
            None
        };
    }
    let m = base.rows();
    for _ in 0..64 {
        let mut cand = base.clone();
        for i in 0..m {
            let mut row = cand.row(i);
            for kr in corrections {
                if rng.next_u32() & 1 == 1 {
                    row.xor_in(kr);
                }
            }
            cand.set_row(i, &row);
        }
        if cand.inverse().is_some() {
            return Some(cand);
        }
    }
    None
}

/// Uniform element of the mate span that is neither zero, nor `word`, nor
/// of a different rank; `None` after 16 rejected draws.
fn draw_same_rank_mate<R: RngCore + ?Sized>(
    mates: &[BinMatrix],
    word: &BinMatrix,
    rng: &mut R,
) -> Option<BinMatrix> {
    let (m, n) = (word.rows(), word.cols());
    let zero = BinMatrix::zero(m, n);
    let rank = word.rank();
    for _ in 0..16 {
        let mut cand = BinMatrix::zero(m, n);
        for mat in mates {
            if rng.next_u32() & 1 == 1 {
                cand = cand.add(mat);
            }
        }
        if cand != zero && cand != *word && cand.rank() == rank {
            return Some(cand);
        }
    }
    None
}

/// Echelon span of `{ g * d : g in algebra, d in duals }`.
fn module_span(algebra: &[BinMatrix], duals: &[BinMatrix]) -> Echelon {
    let (m, n) = (duals[0].rows(), duals[0].cols());
    let mut ech = Echelon::new(m * n);
    for g in algebra {
        for d in duals {
            ech.insert(&g.mul(d).to_rowvec());
        }
    }
    ech
}

/// Post-hoc check that every algebra element maps the spanned module back
/// into itself.
fn stabilizes(algebra: &[BinMatrix], span: &Echelon, m: usize, n: usize) -> bool {
    let span_mats: Vec<BinMatrix> = span.rows().map(|r| BinMatrix::from_rowvec(r, m, n)).collect();
    algebra
        .iter()
        .all(|g| span_mats.iter().all(|x| span.contains(&g.mul(x).to_rowvec())))
}

/// Joins `new_mats` into the running algebra and closes it under products.
fn algebra_join(running: &mut Vec<BinMatrix>, ech: &mut Echelon, new_mats: &[BinMatrix]) {
    let mut queue: Vec<BinMatrix> = Vec::new();
    for g in new_mats {
        if ech.insert(&g.to_rowvec()) {
            running.push(g.clone());
            queue.push(g.clone());
        }
    }
    while let Some(g) = queue.pop() {
        let snapshot = running.clone();
        for h in &snapshot {
            for prod in [g.mul(h), h.mul(&g)] {
                if ech.insert(&prod.to_rowvec()) {
                    running.push(prod.clone());
                    queue.push(prod);
                }
            }
        }
    }
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree up to half the input's; coefficients are constant-term-first.
fn poly_is_irreducible(coeffs: &[bool]) -> bool {
    let deg = coeffs.len() - 1;
    assert!(deg >= 1 && deg < 64, "degree out of range");
    assert!(coeffs[deg], "the polynomial must be monic");
    if deg == 1 {
        return true;
    }
    let p: u64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| (c as u64) << i)
        .sum();
    for g in 2u64..(1u64 << (deg / 2 + 1)) {
        if poly_rem(p, g) == 0 {
            return false;
        }
    }
    true
}

/// Remainder of GF(2)[x] division, polynomials packed as bit masks.
fn poly_rem(mut a: u64, b: u64) -> u64 {
    debug_assert!(b != 0);
    let db = 63 - b.leading_zeros();
    while a != 0 {
        let da = 63 - a.leading_zeros();
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::field::{FieldContext, FieldElement, Isometry};
    use crate::gabidulin::MatrixGabidulin;
    use crate::keys;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    /// Matrix of y -> alpha * y over GF(2), columns in the isometry basis.
    fn multiplication_matrix(ctx: &FieldContext, iso: &Isometry, alpha: FieldElement) -> BinMatrix {
        let m = ctx.m();
        let cols: Vec<BitVec> = iso
            .basis()
            .iter()
            .map(|&b| iso.coords(ctx.mul(alpha, b)))
            .collect();
        BinMatrix::from_fn(m, m, |i, j| cols[j].get(i))
    }

    /// Square hidden code plus the dual it stabilizes.
    fn planted_dual(
        m: usize,
        kappa: usize,
        rng: &mut ChaCha20Rng,
    ) -> (FieldContext, MatrixGabidulin, MatrixCode) {
        let ctx = FieldContext::new(m);
        let gab = MatrixGabidulin::sample(&ctx, kappa, rng);
        let duals = matrank::dual_basis(gab.matbasis());
        let code = MatrixCode::new(m, m, duals);
        (ctx, gab, code)
    }

    fn random_code_word(code: &MatrixCode, rng: &mut ChaCha20Rng) -> BinMatrix {
        let zero = BinMatrix::zero(code.m(), code.n());
        loop {
            let coeffs = BitVec::from_bits((0..code.dim()).map(|_| rng.next_u32() & 1 == 1));
            let w = code.combine(&coeffs);
            if w != zero {
                return w;
            }
        }
    }

    fn random_alpha(ctx: &FieldContext, rng: &mut ChaCha20Rng) -> FieldElement {
        loop {
            let a = ctx.random_element(rng);
            if a != ctx.zero() && a != ctx.one() {
                return a;
            }
        }
    }

    fn rowspace(mat: &BinMatrix) -> Echelon {
        let mut ech = Echelon::new(mat.cols());
        for i in 0..mat.rows() {
            ech.insert(&mat.row(i));
        }
        ech
    }

    #[test]
    fn multiplication_matrix_represents_field_product() {
        let mut rng = rng(0xA1);
        let (ctx, gab, _) = planted_dual(6, 4, &mut rng);
        let iso = gab.iso();
        for _ in 0..50 {
            let alpha = random_alpha(&ctx, &mut rng);
            let beta = random_alpha(&ctx, &mut rng);
            let x = ctx.random_element(&mut rng);
            let ma = multiplication_matrix(&ctx, iso, alpha);
            let mb = multiplication_matrix(&ctx, iso, beta);
            assert_eq!(
                ma.mul_vec(&iso.coords(x)),
                iso.coords(ctx.mul(alpha, x)),
                "action on coordinates"
            );
            assert_eq!(
                ma.mul(&mb),
                multiplication_matrix(&ctx, iso, ctx.mul(alpha, beta)),
                "multiplicativity"
            );
        }
    }

    #[test]
    fn constrained_search_hits_terminal_rank_on_first_loop() {
        let mut rng = rng(1);
        for _ in 0..20 {
            let code = matrank::random_code(5, 5, 13, &mut rng);
            // k = 13 = 2*5 + 3: two zero columns, terminal rank 3.
            let hit = find_low_rank(&code, 3, 4, &mut rng).expect("terminal rank always hits");
            assert_eq!(hit.loops, 1);
            assert!(hit.word.rank() <= 3 && hit.word.rank() > 0);
            assert!(code.contains(&hit.word));
        }
    }

    #[test]
    fn constrained_search_rejects_zero_code() {
        let code = MatrixCode::new(5, 5, Vec::new());
        let mut rng = rng(2);
        assert!(matches!(
            find_low_rank(&code, 2, 10, &mut rng),
            Err(AttackError::ZeroCode)
        ));
    }

    #[test]
    fn constrained_search_loop_count_tracks_rank_profile() {
        // Random [5x5, 13] codes searched one full rank below terminal.
        let p = analysis::rank_profile_probability(5, 5, 2, 2, 3, 2);
        let expected = 1.0 / p;
        let mut rng = rng(3);
        let searches = 400;
        let mut total_loops = 0usize;
        for _ in 0..searches {
            let code = matrank::random_code(5, 5, 13, &mut rng);
            let hit = find_low_rank(&code, 2, 100_000, &mut rng).expect("budget is generous");
            total_loops += hit.loops;
        }
        let mean = total_loops as f64 / searches as f64;
        assert!(
            mean < 4.0 * expected && mean > expected / 4.0,
            "mean loops {mean:.2} outside 4x window of {expected:.2}"
        );
    }

    #[test]
    fn constrained_search_exhausts_tiny_budget() {
        // Rank 1 in a random [5x5, 13] code succeeds per loop with
        // probability ~2^-8, so a one-loop budget essentially always
        // exhausts.
        let mut rng = rng(4);
        let code = matrank::random_code(5, 5, 13, &mut rng);
        assert!(matches!(
            find_low_rank(&code, 1, 1, &mut rng),
            Err(AttackError::Exhausted { budget: 1 })
        ));
    }

    #[test]
    fn search_profile_validates_inputs() {
        let profile = SearchProfile::new(5, 5, 13, 3, 10);
        assert_eq!((profile.a, profile.b), (2, 3));
        let result = std::panic::catch_unwind(|| SearchProfile::new(5, 5, 13, 4, 10));
        assert!(result.is_err(), "target rank above terminal must panic");
    }

    #[test]
    fn distinguisher_separates_toy_dual_from_random() {
        let params = analysis::param_by_name("toy-16").unwrap();
        let mut rng = rng(0x16);
        for key in 0..2u8 {
            let (pk, _sk) = keys::keygen(&params, &[key + 1; 16]);
            let dual = MatrixCode::new(params.m, params.n, pk.duals.clone());
            let report = distinguish(&dual, &params, 160, &mut rng);
            assert_eq!(report.verdict, Distinguish::Structured);
            assert_eq!(report.loops, 160);

            let random = matrank::random_code(params.m, params.n, params.syn_len(), &mut rng);
            let report = distinguish(&random, &params, 160, &mut rng);
            assert_eq!(report.verdict, Distinguish::RandomLike);
            assert!(report.loops <= 160);
        }
    }

    #[test]
    fn distinguisher_zero_budget_reports_structured() {
        // A zero budget cannot observe anything, so the vacuous verdict is
        // the structured one.
        let params = analysis::param_by_name("toy-16").unwrap();
        let mut rng = rng(5);
        let random = matrank::random_code(params.m, params.n, params.syn_len(), &mut rng);
        let report = distinguish(&random, &params, 0, &mut rng);
        assert_eq!(report.verdict, Distinguish::Structured);
        assert_eq!(report.loops, 0);
    }

    #[test]
    fn rowspace_mates_contain_planted_multiples() {
        let mut rng = rng(0x101);
        for _ in 0..100 {
            let (ctx, gab, dual) = planted_dual(6, 4, &mut rng);
            for _ in 0..10 {
                let e = random_code_word(&dual, &mut rng);
                let alpha = random_alpha(&ctx, &mut rng);
                let mt = multiplication_matrix(&ctx, gab.iso(), alpha).transpose();
                let e2 = mt.mul(&e);
                assert!(dual.contains(&e2), "planted multiple stays in the dual");
                let span = rowspace(&e);
                for i in 0..e2.rows() {
                    assert!(span.contains(&e2.row(i)), "row spaces must coincide");
                }
                let mates = same_rowspace_mate(&dual, &e, false);
                let mut mate_span = Echelon::new(36);
                for w in &mates {
                    mate_span.insert(&w.to_rowvec());
                }
                assert!(
                    mate_span.contains(&e2.to_rowvec()),
                    "the mate sub-code must contain the planted multiple"
                );
            }
        }
    }

    #[test]
    fn rowspace_mate_exclusion_drops_the_word_direction() {
        let mut rng = rng(0x102);
        let (_, _, dual) = planted_dual(6, 4, &mut rng);
        let e = random_code_word(&dual, &mut rng);
        let all = same_rowspace_mate(&dual, &e, false);
        let excl = same_rowspace_mate(&dual, &e, true);
        assert_eq!(excl.len() + 1, all.len());
        let mut span = Echelon::new(36);
        for w in &excl {
            span.insert(&w.to_rowvec());
        }
        assert!(
            !span.contains(&e.to_rowvec()),
            "excluded basis must not span the word"
        );
    }

    #[test]
    fn mate_dimension_matches_tail_width_on_toy_keys() {
        // For toy-16 the dual dimension is 51 = 3*16 + 3, so words at the
        // terminal rank 13 should very likely carry a mate sub-code of
        // dimension exactly the tail width b = 3.
        let params = analysis::param_by_name("toy-16").unwrap();
        let mut rng = rng(0x103);
        let mut exact = 0;
        for key in 0..10u8 {
            let (pk, _sk) = keys::keygen(&params, &[0x30 + key; 16]);
            let dual = MatrixCode::new(params.m, params.n, pk.duals.clone());
            let hit = find_low_rank(&dual, 13, 8, &mut rng).expect("terminal rank");
            let mates = same_rowspace_mate(&dual, &hit.word, false);
            if mates.len() == 3 {
                exact += 1;
            }
        }
        assert!(exact >= 7, "only {exact}/10 keys had mate dimension 3");
    }

    #[test]
    fn collinearity_recovery_returns_planted_multiplier() {
        let mut rng = rng(0x201);
        for _ in 0..20 {
            let (ctx, gab, dual) = planted_dual(8, 6, &mut rng);
            // Full-rank word: the transfer space is a single point.
            let e = loop {
                let w = random_code_word(&dual, &mut rng);
                if w.rank() == 8 {
                    break w;
                }
            };
            let alpha = random_alpha(&ctx, &mut rng);
            let mt = multiplication_matrix(&ctx, gab.iso(), alpha).transpose();
            let e2 = mt.mul(&e);
            let p = collinearity_recover(&e, &e2, &mut rng).expect("planted pair must recover");
            assert_eq!(p, mt, "full-rank recovery is exact");
            let closure = algebra_closure(&p);
            assert!(closure.is_field);
            assert!(closure.dim >= 2 && 8 % closure.dim == 0);
        }
    }

    #[test]
    fn collinearity_recovery_handles_rank_deficient_pairs() {
        // Dual words of rank 7 (one below full): recovery returns some
        // valid multiplier out of the affine family, whose action agrees
        // with the planted one and which differs from it only by rows in
        // the word's left kernel.
        let mut rng = rng(0x202);
        for _ in 0..50 {
            let (ctx, gab, dual) = planted_dual(8, 6, &mut rng);
            let e = loop {
                let w = random_code_word(&dual, &mut rng);
                if w.rank() == 7 {
                    break w;
                }
            };
            let alpha = random_alpha(&ctx, &mut rng);
            let mt = multiplication_matrix(&ctx, gab.iso(), alpha).transpose();
            let e2 = mt.mul(&e);
            let p = collinearity_recover(&e, &e2, &mut rng).expect("planted pair must recover");
            assert_eq!(p.mul(&e), e2, "the defining relation must hold");
            // p - mt annihilates e: p lies in the planted coset.
            let diff = p.add(&mt);
            assert_eq!(
                diff.mul(&e),
                BinMatrix::zero(8, 8),
                "p must differ from the planted multiplier only by the left kernel"
            );
        }
    }

    #[test]
    fn collinearity_recovery_rejects_disjoint_rowspaces() {
        // Adding an unrelated dual word keeps the rank but moves the row
        // space, so the per-row transfer systems go inconsistent.
        let mut rng = rng(0x203);
        let mut rejected = 0;
        let trials = 30;
        for _ in 0..trials {
            let (_, _, dual) = planted_dual(8, 6, &mut rng);
            let e = random_code_word(&dual, &mut rng);
            let e2 = loop {
                let w = random_code_word(&dual, &mut rng);
                let cand = e.add(&w);
                if cand != BinMatrix::zero(8, 8) && cand != e && cand.rank() == e.rank() {
                    break cand;
                }
            };
            if collinearity_recover(&e, &e2, &mut rng).is_none() {
                rejected += 1;
            }
        }
        assert!(
            rejected >= trials - 3,
            "only {rejected}/{trials} unrelated pairs were rejected"
        );
    }

    #[test]
    #[should_panic(expected = "GF(2)-collinear")]
    fn collinearity_recovery_rejects_equal_inputs() {
        let mut rng = rng(0x204);
        let (_, _, dual) = planted_dual(6, 4, &mut rng);
        let e = random_code_word(&dual, &mut rng);
        let _ = collinearity_recover(&e, &e.clone(), &mut rng);
    }

    #[test]
    fn algebra_closure_of_identity_is_one_dimensional() {
        let closure = algebra_closure(&BinMatrix::identity(5));
        assert_eq!(closure.dim, 1);
        assert_eq!(closure.min_poly, vec![true, true]); // x + 1
        assert!(closure.is_field);
    }

    #[test]
    fn algebra_closure_of_companion_matrix_is_a_field() {
        // Companion matrix of x^3 + x + 1, irreducible over GF(2).
        let mut c = BinMatrix::zero(3, 3);
        c.set(1, 0, true);
        c.set(2, 1, true);
        c.set(0, 2, true);
        c.set(1, 2, true);
        let closure = algebra_closure(&c);
        assert_eq!(closure.dim, 3);
        assert_eq!(closure.min_poly, vec![true, true, false, true]);
        assert!(closure.is_field);
    }

    #[test]
    fn algebra_closure_flags_idempotent_as_non_field() {
        let mut p = BinMatrix::zero(2, 2);
        p.set(0, 0, true); // diag(1, 0): P^2 = P
        let closure = algebra_closure(&p);
        assert_eq!(closure.dim, 2);
        assert_eq!(closure.min_poly, vec![false, true, true]); // x^2 + x
        assert!(!closure.is_field);
    }

    #[test]
    fn irreducibility_test_matches_known_polynomials() {
        // x^2 + x + 1 irreducible; x^2 + 1 = (x + 1)^2 not.
        assert!(poly_is_irreducible(&[true, true, true]));
        assert!(!poly_is_irreducible(&[true, false, true]));
        // x^4 + x + 1 irreducible; x^4 + x^2 + 1 = (x^2 + x + 1)^2 not.
        assert!(poly_is_irreducible(&[true, true, false, false, true]));
        assert!(!poly_is_irreducible(&[true, false, true, false, true]));
        // x^5 + x^2 + 1 irreducible.
        assert!(poly_is_irreducible(&[true, false, true, false, false, true]));
    }

    #[test]
    fn structural_attack_recovers_weak_key_algebra() {
        let params = analysis::param_by_name("weak-12").unwrap();
        let (pk, _sk) = keys::keygen(&params, b"structural-weak-key");
        let mut rng = rng(0x301);
        let recovery = structural_attack(&pk, 10_000, &mut rng)
            .expect("the weak toy key must fall within the budget");
        assert_eq!(recovery.algebra.len(), 12, "full stabilizer dimension");
        assert_eq!(recovery.supercode_dim, 12 * 2);
        // Independent stabilization audit of the returned artifacts.
        let mut span = Echelon::new(12 * 12);
        for s in &recovery.supercode {
            span.insert(&s.to_rowvec());
        }
        assert_eq!(span.dim(), recovery.supercode_dim);
        for g in &recovery.algebra {
            for s in &recovery.supercode {
                assert!(span.contains(&g.mul(s).to_rowvec()));
            }
            for d in &pk.duals {
                assert!(span.contains(&g.mul(d).to_rowvec()));
            }
        }
        let closure = algebra_closure(&recovery.generator);
        assert!(closure.is_field);
    }

    #[test]
    fn structural_attack_exhausts_on_hardened_key() {
        let params = analysis::param_by_name("hard-12").unwrap();
        let (pk, _sk) = keys::keygen(&params, b"structural-hard-key");
        let mut rng = rng(0x302);
        assert!(matches!(
            structural_attack(&pk, 1_000, &mut rng),
            Err(AttackError::Exhausted { budget: 1_000 })
        ));
    }

    #[test]
    fn structural_attack_exhausts_on_random_code() {
        let params = analysis::param_by_name("weak-12").unwrap();
        let mut rng = rng(0x303);
        let random = matrank::random_code(params.m, params.n, params.syn_len(), &mut rng);
        let pk = PublicKey {
            params: params.clone(),
            duals: random.basis().to_vec(),
        };
        assert!(matches!(
            structural_attack(&pk, 1_000, &mut rng),
            Err(AttackError::Exhausted { budget: 1_000 })
        ));
    }
}

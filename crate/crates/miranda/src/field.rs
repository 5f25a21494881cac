//! GF(2^m) arithmetic, linearized (q-)polynomials, and the coordinate
//! isometry between vectors over GF(2^m) and binary matrices.
//!
//! Elements are polynomials over GF(2) modulo a fixed irreducible modulus of
//! degree m, bit-packed into 64-bit words (coefficient of x^i at bit i). For
//! a given m the modulus is always the same one: x^m + g where g is the
//! lexicographically smallest tail (as an integer) making the sum
//! irreducible. For m = 3 that is x^3 + x + 1, for m = 4 it is x^4 + x + 1.
//!
//! All arithmetic goes through a [`FieldContext`], which owns the modulus;
//! [`FieldElement`] is a plain `Copy` value. Mixing elements from contexts
//! with different m is a caller bug and fails a debug assertion.
//!
//! Linearized polynomials P(x) = sum p_i x^(2^i) ([`QPolynomial`]) are the
//! engine behind Gabidulin codes: they are GF(2)-linear maps of the field,
//! closed under composition, and support left Euclidean division, which is
//! what the decoder uses.

use crate::matrank::{BinMatrix, BitVec};
use rand::RngCore;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_M: usize = 703;

/// Words per element (enough for MAX_M + 1 modulus bits).
const LIMBS: usize = 11;
/// Words in a double-width product before reduction.
const PROD_LIMBS: usize = 2 * LIMBS;

/// Faults the field layer can report as values. Contract violations (shape
/// or context mismatches) are assertions instead.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    /// Multiplicative inverse of zero requested.
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    /// A claimed basis of GF(2^m) over GF(2) is linearly dependent.
    #[error("basis elements are linearly dependent")]
    DependentBasis,
}

// ---------------------------------------------------------------------------
// Raw GF(2)[x] helpers on word slices (used for the modulus search and for
// the extended Euclidean inverse).
// ---------------------------------------------------------------------------

/// Degree of the bit-packed polynomial, or None for the zero polynomial.
fn pdeg(p: &[u64]) -> Option<usize> {
    for (wi, w) in p.iter().enumerate().rev() {
        if *w != 0 {
            return Some(wi * 64 + 63 - w.leading_zeros() as usize);
        }
    }
    None
}

#[inline]
fn pbit(p: &[u64], i: usize) -> bool {
    (p[i / 64] >> (i % 64)) & 1 == 1
}

/// dst ^= src << shift. `dst` must be long enough for the result.
fn pxor_shift(dst: &mut [u64], src: &[u64], shift: usize) {
    let (wo, bo) = (shift / 64, shift % 64);
    if bo == 0 {
        for (i, w) in src.iter().enumerate() {
            if *w != 0 {
                dst[wo + i] ^= w;
            }
        }
    } else {
        for (i, w) in src.iter().enumerate() {
            if *w != 0 {
                dst[wo + i] ^= w << bo;
                let hi = w >> (64 - bo);
                if hi != 0 {
                    dst[wo + i + 1] ^= hi;
                }
            }
        }
    }
}

/// Carry-less schoolbook product into `out` (which must be zeroed and wide
/// enough for deg a + deg b).
fn pmul_into(a: &[u64], b: &[u64], out: &mut [u64]) {
    for (wi, word) in a.iter().enumerate() {
        let mut w = *word;
        while w != 0 {
            let bit = w.trailing_zeros() as usize;
            w &= w - 1;
            pxor_shift(out, b, wi * 64 + bit);
        }
    }
}

/// Reduce `acc` modulo the degree-m polynomial `f` (in place).
fn prem(acc: &mut [u64], f: &[u64], m: usize) {
    let top = match pdeg(acc) {
        Some(d) => d,
        None => return,
    };
    for pos in (m..=top).rev() {
        if pbit(acc, pos) {
            pxor_shift(acc, f, pos - m);
        }
    }
}

/// gcd of two bit-packed polynomials.
fn pgcd(a: &[u64], b: &[u64]) -> Vec<u64> {
    let len = a.len().max(b.len());
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    r0.resize(len, 0);
    r1.resize(len, 0);
    while let Some(d1) = pdeg(&r1) {
        match pdeg(&r0) {
            None => break,
            Some(d0) if d0 < d1 => std::mem::swap(&mut r0, &mut r1),
            Some(d0) => {
                let shift = d0 - d1;
                let r1c = r1.clone();
                pxor_shift(&mut r0, &r1c, shift);
            }
        }
    }
    if pdeg(&r0).is_none() {
        std::mem::swap(&mut r0, &mut r1);
    }
    r0
}

/// Rabin irreducibility test for a degree-m polynomial f over GF(2):
/// x^(2^m) = x (mod f), and gcd(x^(2^(m/p)) - x, f) = 1 for every prime p
/// dividing m.
fn is_irreducible(f: &[u64], m: usize) -> bool {
    let words = (m + 1).div_ceil(64);
    // h := x^(2^k) mod f by repeated squaring, reusing one scratch buffer.
    let sq_mod = |h: &[u64]| -> Vec<u64> {
        let mut prod = vec![0u64; 2 * words + 1];
        pmul_into(h, h, &mut prod);
        prem(&mut prod, f, m);
        prod.truncate(words);
        prod
    };
    let mut x = vec![0u64; words];
    x[0] = 0b10; // the polynomial x
    if m == 1 {
        return true;
    }

    let mut primes = Vec::new();
    let mut rest = m;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            primes.push(p);
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += 1;
    }
    if rest > 1 {
        primes.push(rest);
    }

    let mut h = x.clone();
    let mut k = 0usize;
    // Checkpoints in increasing order of exponent k = m/p, then k = m.
    let mut checkpoints: Vec<(usize, bool)> = primes.iter().map(|p| (m / p, false)).collect();
    checkpoints.push((m, true));
    checkpoints.sort();
    for (target, is_final) in checkpoints {
        while k < target {
            h = sq_mod(&h);
            k += 1;
        }
        let mut diff = h.clone();
        diff[0] ^= 0b10; // h - x
        if is_final {
            // x^(2^m) must equal x.
            if pdeg(&diff).is_some() {
                return false;
            }
        } else {
            // gcd(x^(2^(m/p)) - x, f) must be trivial.
            let g = pgcd(&diff, f);
            if pdeg(&g) != Some(0) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Field context and elements
// ---------------------------------------------------------------------------

/// An element of GF(2^m): m coefficient bits, little-endian in words.
///
/// Plain data: `Copy`, comparable, hashable. All arithmetic lives on
/// [`FieldContext`]. The element remembers m only to catch cross-field mixing
/// in debug builds.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    m: u16,
    limbs: [u64; LIMBS],
}

impl FieldElement {
    /// The zero element of GF(2^m).
    pub fn zero(m: usize) -> Self {
        assert!(m >= 2 && m <= MAX_M, "extension degree out of range");
        FieldElement {
            m: m as u16,
            limbs: [0u64; LIMBS],
        }
    }

    /// Extension degree this element belongs to.
    pub fn m(&self) -> usize {
        self.m as usize
    }

    /// True for the zero element.
    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|w| *w == 0)
    }

    /// Coefficient bits as a length-m vector (bit i = coefficient of x^i),
    /// i.e. the coordinates in the polynomial basis 1, x, ..., x^(m-1).
    pub fn bits(&self) -> BitVec {
        let m = self.m as usize;
        let mut v = BitVec::zero(m);
        for i in 0..m {
            if (self.limbs[i / 64] >> (i % 64)) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Rebuild an element from its coefficient bits.
    pub fn from_bitvec(m: usize, bits: &BitVec) -> Self {
        assert_eq!(bits.len(), m, "bit vector length must equal m");
        let mut e = FieldElement::zero(m);
        for (i, w) in bits.words().iter().enumerate() {
            e.limbs[i] = *w;
        }
        e
    }

    /// Element with the low 64 coefficient bits given as an integer
    /// (convenience for small fields in tests and docs).
    pub fn from_u64(m: usize, bits: u64) -> Self {
        assert!(m >= 64 || bits < (1u64 << m), "bits exceed the field size");
        let mut e = FieldElement::zero(m);
        e.limbs[0] = bits;
        e
    }

    /// The low 64 coefficient bits as an integer (m must be at most 64).
    pub fn to_u64(&self) -> u64 {
        assert!(self.m <= 64, "element does not fit in 64 bits");
        self.limbs[0]
    }
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let words = (self.m as usize).div_ceil(64);
        write!(f, "0x")?;
        for w in self.limbs[..words].iter().rev() {
            write!(f, "{w:016x}")?;
        }
        write!(f, "/GF(2^{})", self.m)
    }
}

/// Per-m modulus cache: the search is deterministic, so sharing results
/// across contexts is safe and saves the one-time scan for large m.
static MODULUS_CACHE: OnceLock<Mutex<HashMap<usize, Vec<u64>>>> = OnceLock::new();

/// Arithmetic context for GF(2^m): the modulus and the word geometry.
#[derive(Clone, Debug)]
pub struct FieldContext {
    m: usize,
    words: usize,
    modulus: [u64; LIMBS],
}

impl FieldContext {
    /// Context for GF(2^m) with the canonical modulus for this m: the first
    /// irreducible x^m + g scanning tails g = 1, 2, 3, ... in integer order.
    /// Deterministic, so every party derives the same field.
    pub fn new(m: usize) -> Self {
        assert!(
            (2..=MAX_M).contains(&m),
            "extension degree {m} outside supported range 2..={MAX_M}"
        );
        let cache = MODULUS_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let modulus_words = {
            let mut guard = cache.lock().unwrap();
            guard
                .entry(m)
                .or_insert_with(|| Self::find_modulus(m))
                .clone()
        };
        let mut modulus = [0u64; LIMBS];
        modulus[..modulus_words.len()].copy_from_slice(&modulus_words);
        FieldContext {
            m,
            words: m.div_ceil(64),
            modulus,
        }
    }

    fn find_modulus(m: usize) -> Vec<u64> {
        let words = (m + 1).div_ceil(64);
        let mut f = vec![0u64; words];
        f[m / 64] |= 1u64 << (m % 64);
        // Tails never get near 2^64 in practice: an irreducible with a small
        // tail exists for every m in range (the search terminating is the
        // proof for each supported m).
        let lead_in_low_word = if m < 64 { 1u64 << m } else { 0 };
        for tail in 1u64.. {
            assert!(
                m >= 64 || tail < (1u64 << m),
                "no irreducible modulus of degree {m} with a small tail"
            );
            f[0] = lead_in_low_word | tail;
            if is_irreducible(&f, m) {
                return f;
            }
        }
        unreachable!()
    }

    /// Extension degree m.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Modulus words, little-endian bits; degree m.
    pub fn modulus_words(&self) -> &[u64] {
        &self.modulus[..(self.m + 1).div_ceil(64)]
    }

    #[inline]
    fn check(&self, a: &FieldElement) {
        debug_assert_eq!(
            a.m as usize, self.m,
            "element from GF(2^{}) used with a GF(2^{}) context",
            a.m, self.m
        );
    }

    /// The zero element.
    pub fn zero(&self) -> FieldElement {
        FieldElement::zero(self.m)
    }

    /// The one element.
    pub fn one(&self) -> FieldElement {
        FieldElement::from_u64(self.m, 1)
    }

    /// Sum (= difference) in characteristic 2: coefficient-wise XOR.
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(&a);
        self.check(&b);
        let mut out = a;
        for (o, w) in out.limbs.iter_mut().zip(b.limbs.iter()) {
            *o ^= *w;
        }
        out
    }

    /// Product: carry-less schoolbook multiply, then reduction by the
    /// modulus.
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(&a);
        self.check(&b);
        let mut acc = [0u64; PROD_LIMBS];
        pmul_into(&a.limbs[..self.words], &b.limbs[..self.words], &mut acc);
        self.reduce(&mut acc)
    }

    fn reduce(&self, acc: &mut [u64; PROD_LIMBS]) -> FieldElement {
        prem(acc, &self.modulus[..(self.m + 1).div_ceil(64)], self.m);
        let mut out = FieldElement::zero(self.m);
        out.limbs[..self.words].copy_from_slice(&acc[..self.words]);
        out
    }

    /// Square (one Frobenius step).
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// GF(2)[x]; fails on zero.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(&a);
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let len = (self.m + 1).div_ceil(64);
        let mut r0 = vec![0u64; len];
        r0.copy_from_slice(&self.modulus[..len]);
        let mut r1 = vec![0u64; len];
        r1[..self.words].copy_from_slice(&a.limbs[..self.words]);
        let mut s0 = vec![0u64; len];
        let mut s1 = vec![0u64; len];
        s1[0] = 1;
        // Invariant: s_i * a = r_i (mod modulus). r0 is always the side being
        // reduced; once it drops below r1 (or empties, leaving the gcd in
        // r1), swap so the loop keeps shrinking the larger side.
        while let Some(d1) = pdeg(&r1) {
            match pdeg(&r0) {
                Some(d0) if d0 >= d1 => {
                    let shift = d0 - d1;
                    let r1c = r1.clone();
                    pxor_shift(&mut r0, &r1c, shift);
                    let s1c = s1.clone();
                    pxor_shift(&mut s0, &s1c, shift);
                }
                _ => {
                    std::mem::swap(&mut r0, &mut r1);
                    std::mem::swap(&mut s0, &mut s1);
                }
            }
        }
        debug_assert_eq!(pdeg(&r0), Some(0), "modulus is irreducible, gcd is 1");
        let mut out = FieldElement::zero(self.m);
        out.limbs[..len.min(LIMBS)].copy_from_slice(&s0[..len.min(LIMBS)]);
        // Bezout coefficient has degree < m already; mask defensively.
        let mut acc = [0u64; PROD_LIMBS];
        acc[..LIMBS].copy_from_slice(&out.limbs);
        Ok(self.reduce(&mut acc))
    }

    /// i-fold Frobenius a -> a^(2^i). The exponent is reduced mod m since
    /// the Frobenius has order m.
    pub fn frobenius(&self, a: FieldElement, i: usize) -> FieldElement {
        self.check(&a);
        let mut out = a;
        for _ in 0..(i % self.m) {
            out = self.square(out);
        }
        out
    }

    /// Uniformly random element.
    pub fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut e = FieldElement::zero(self.m);
        for w in e.limbs[..self.words].iter_mut() {
            *w = rng.next_u64();
        }
        let r = self.m % 64;
        if r != 0 {
            e.limbs[self.words - 1] &= (1u64 << r) - 1;
        }
        e
    }

    /// Uniformly random GF(2)-basis of the field: draw elements, keep each
    /// iff independent of those kept so far, until m of them accumulate.
    pub fn random_basis<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<FieldElement> {
        let mut ech = crate::matrank::Echelon::new(self.m);
        let mut basis = Vec::with_capacity(self.m);
        while basis.len() < self.m {
            let cand = self.random_element(rng);
            if ech.insert(&cand.bits()) {
                basis.push(cand);
            }
        }
        basis
    }

    /// The polynomial basis 1, x, x^2, ..., x^(m-1).
    pub fn polynomial_basis(&self) -> Vec<FieldElement> {
        (0..self.m)
            .map(|i| {
                let mut e = FieldElement::zero(self.m);
                e.limbs[i / 64] |= 1u64 << (i % 64);
                e
            })
            .collect()
    }
}

/// Rank weight of a vector over GF(2^m): the GF(2)-dimension of the span of
/// its entries. Basis-independent (change of basis is an invertible linear
/// map on coordinates).
pub fn rank_weight(v: &[FieldElement]) -> usize {
    if v.is_empty() {
        return 0;
    }
    let m = v[0].m();
    let mut ech = crate::matrank::Echelon::new(m);
    for e in v {
        assert_eq!(e.m(), m, "mixed extension degrees");
        ech.insert(&e.bits());
    }
    ech.dim()
}

// ---------------------------------------------------------------------------
// Linearized (q-)polynomials
// ---------------------------------------------------------------------------

/// A linearized polynomial P(x) = sum_i p_i x^(2^i) over GF(2^m).
///
/// These are exactly the GF(2)-linear maps of the field. `coeffs[i]` is p_i;
/// the vector is kept trimmed, so the zero polynomial has no coefficients and
/// [`QPolynomial::qdeg`] is the index of the last (nonzero) one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPolynomial {
    coeffs: Vec<FieldElement>,
}

impl QPolynomial {
    /// The zero polynomial.
    pub fn zero() -> Self {
        QPolynomial { coeffs: Vec::new() }
    }

    /// The identity map P(x) = x.
    pub fn identity(ctx: &FieldContext) -> Self {
        QPolynomial {
            coeffs: vec![ctx.one()],
        }
    }

    /// Build from coefficients (p_0 first); trailing zeros are trimmed.
    pub fn from_coeffs(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPolynomial { coeffs }
    }

    /// The single term c x^(2^i).
    pub fn monomial(ctx: &FieldContext, c: FieldElement, i: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![ctx.zero(); i + 1];
        coeffs[i] = c;
        QPolynomial { coeffs }
    }

    /// q-degree: the largest i with p_i nonzero; None for the zero
    /// polynomial.
    pub fn qdeg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients, constant-exponent term first.
    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Coefficient p_i (zero beyond the stored length).
    pub fn coeff(&self, ctx: &FieldContext, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or_else(|| ctx.zero())
    }

    /// Evaluate at x: one squaring and one multiply per coefficient.
    pub fn eval(&self, ctx: &FieldContext, x: FieldElement) -> FieldElement {
        let mut acc = ctx.zero();
        let mut power = x; // x^(2^i)
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = ctx.square(power);
            }
            if !c.is_zero() {
                acc = ctx.add(acc, ctx.mul(*c, power));
            }
        }
        acc
    }

    /// Sum of two polynomials.
    pub fn add(&self, ctx: &FieldContext, other: &QPolynomial) -> QPolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| ctx.add(self.coeff(ctx, i), other.coeff(ctx, i)))
            .collect();
        QPolynomial::from_coeffs(coeffs)
    }

    /// Scalar multiple c.P.
    pub fn scale(&self, ctx: &FieldContext, c: FieldElement) -> QPolynomial {
        QPolynomial::from_coeffs(self.coeffs.iter().map(|p| ctx.mul(*p, c)).collect())
    }

    /// Composition self(other(x)) — the Ore product. The coefficient rule is
    /// (self o other)_(i+j) += self_i . other_j^(2^i).
    pub fn compose(&self, ctx: &FieldContext, other: &QPolynomial) -> QPolynomial {
        let (Some(da), Some(db)) = (self.qdeg(), other.qdeg()) else {
            return QPolynomial::zero();
        };
        let mut out = vec![ctx.zero(); da + db + 1];
        // other's coefficients raised to 2^i, updated incrementally.
        let mut twisted: Vec<FieldElement> = other.coeffs.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                for t in twisted.iter_mut() {
                    *t = ctx.square(*t);
                }
            }
            if a.is_zero() {
                continue;
            }
            for (j, b) in twisted.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = ctx.add(out[i + j], ctx.mul(*a, *b));
                }
            }
        }
        QPolynomial::from_coeffs(out)
    }

    /// Left Euclidean division by `divisor` V: returns (Q, R) with
    /// self = V o Q + R and qdeg R < qdeg V.
    ///
    /// Each step kills the leading term of the running remainder F with the
    /// quotient term c x^(2^e), e = qdeg F - qdeg V, where c solves
    /// v_t c^(2^t) = f_d, i.e. c = (f_d / v_t)^(2^(m-t)).
    ///
    /// Panics when the divisor is zero.
    pub fn left_divide(&self, ctx: &FieldContext, divisor: &QPolynomial) -> (QPolynomial, QPolynomial) {
        let t = divisor.qdeg().expect("left division by the zero polynomial");
        let vt_inv = ctx
            .inv(divisor.coeffs[t])
            .expect("leading coefficient is nonzero");
        let mut rem = self.clone();
        let mut quot = vec![ctx.zero(); self.coeffs.len().saturating_sub(t)];
        while let Some(d) = rem.qdeg() {
            if d < t {
                break;
            }
            let e = d - t;
            let c = ctx.frobenius(ctx.mul(rem.coeffs[d], vt_inv), ctx.m() - t);
            quot[e] = ctx.add(quot[e], c);
            // rem -= V o (c x^(2^e)): term i lands at i+e with coefficient
            // v_i c^(2^i).
            let mut c_pow = c;
            for (i, v) in divisor.coeffs.iter().enumerate() {
                if i > 0 {
                    c_pow = ctx.square(c_pow);
                }
                if !v.is_zero() {
                    rem.coeffs[i + e] = ctx.add(rem.coeffs[i + e], ctx.mul(*v, c_pow));
                }
            }
            debug_assert!(rem.coeffs[d].is_zero(), "leading term must cancel");
            rem = QPolynomial::from_coeffs(rem.coeffs);
        }
        (QPolynomial::from_coeffs(quot), rem)
    }

    /// The monic linearized polynomial vanishing exactly on the GF(2)-span
    /// of `points`: qdeg equals the span dimension.
    ///
    /// Built incrementally: A := A^2 + A(u).A extends the kernel by u
    /// (skipping points already annihilated).
    pub fn annihilator(ctx: &FieldContext, points: &[FieldElement]) -> QPolynomial {
        let mut a = QPolynomial::identity(ctx);
        for u in points {
            let v = a.eval(ctx, *u);
            if v.is_zero() {
                continue;
            }
            let mut next = vec![ctx.zero(); a.coeffs.len() + 1];
            for (i, c) in a.coeffs.iter().enumerate() {
                next[i + 1] = ctx.add(next[i + 1], ctx.square(*c));
                next[i] = ctx.add(next[i], ctx.mul(v, *c));
            }
            a = QPolynomial::from_coeffs(next);
        }
        a
    }
}

// ---------------------------------------------------------------------------
// Coordinate isometry: GF(2^m)^n  <->  m x n binary matrices
// ---------------------------------------------------------------------------

/// Coordinate map for a fixed GF(2)-basis B of GF(2^m): column j of the
/// matrix image holds the B-coordinates of the j-th vector entry.
///
/// The map is a GF(2)-linear bijection and preserves rank: the rank weight
/// of the vector equals the matrix rank. Changing the basis multiplies the
/// matrix image by a fixed invertible matrix on the left, so statements about
/// rank are basis-independent.
#[derive(Clone, Debug)]
pub struct Isometry {
    m: usize,
    basis: Vec<FieldElement>,
    /// Columns are the basis elements' polynomial-basis bits.
    mb: BinMatrix,
    /// Inverse of `mb`: takes an element's bits to its B-coordinates.
    mb_inv: BinMatrix,
}

impl Isometry {
    /// Build the coordinate map for the given basis; fails when the claimed
    /// basis is dependent.
    pub fn new(m: usize, basis: Vec<FieldElement>) -> Result<Self, FieldError> {
        assert_eq!(basis.len(), m, "a basis of GF(2^m) has exactly m elements");
        for b in &basis {
            assert_eq!(b.m(), m, "mixed extension degrees in basis");
        }
        let mb = BinMatrix::from_fn(m, m, |i, j| basis[j].bits().get(i));
        let mb_inv = mb.inverse().ok_or(FieldError::DependentBasis)?;
        Ok(Isometry {
            m,
            basis,
            mb,
            mb_inv,
        })
    }

    /// The polynomial-basis map (identity change of basis).
    pub fn polynomial(ctx: &FieldContext) -> Self {
        Isometry::new(ctx.m(), ctx.polynomial_basis()).expect("polynomial basis is independent")
    }

    /// The basis this map uses.
    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    /// Coordinates of one element in the basis.
    pub fn coords(&self, a: FieldElement) -> BitVec {
        assert_eq!(a.m(), self.m, "element from a different field");
        // coords = MB^{-1} . bits
        let bits = a.bits();
        let mut out = BitVec::zero(self.m);
        for i in 0..self.m {
            let mut acc = false;
            for j in 0..self.m {
                acc ^= self.mb_inv.get(i, j) && bits.get(j);
            }
            out.set(i, acc);
        }
        out
    }

    /// Element with the given coordinates.
    pub fn from_coords(&self, coords: &BitVec) -> FieldElement {
        assert_eq!(coords.len(), self.m, "coordinate length must equal m");
        let mut bits = BitVec::zero(self.m);
        for i in 0..self.m {
            let mut acc = false;
            for j in 0..self.m {
                acc ^= self.mb.get(i, j) && coords.get(j);
            }
            bits.set(i, acc);
        }
        FieldElement::from_bitvec(self.m, &bits)
    }

    /// Matrix image of a vector: m x n, column j = coordinates of v[j].
    pub fn vec_to_mat(&self, v: &[FieldElement]) -> BinMatrix {
        let n = v.len();
        let mut out = BinMatrix::zero(self.m, n);
        for (j, e) in v.iter().enumerate() {
            let c = self.coords(*e);
            for i in 0..self.m {
                if c.get(i) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// Vector preimage of a matrix: entry j rebuilt from column j.
    pub fn mat_to_vec(&self, mat: &BinMatrix) -> Vec<FieldElement> {
        assert_eq!(mat.rows(), self.m, "matrix must have m rows");
        (0..mat.cols())
            .map(|j| {
                let col = BitVec::from_bits((0..self.m).map(|i| mat.get(i, j)));
                self.from_coords(&col)
            })
            .collect()
    }
}

//! Bit-packed GF(2) linear algebra and matrix-code machinery.
//!
//! Everything downstream of the field layer works with m x n matrices over
//! GF(2): rank-metric words, code bases, dual bases, syndromes. This module
//! provides the carriers ([`BinMatrix`], [`BitVec`], [`MatrixCode`]) and the
//! operations on them: rank, reduced row echelon form, linear-system solving,
//! the trace pairing tr(X B^T), dual bases, basis completion, and the random
//! sampling routines (uniform codes, subcodes, complements) used by key
//! generation and by the cryptanalysis experiments.
//!
//! Bit layout is row-major, least-significant-bit-first within each 64-bit
//! word; serialization in `wire` uses the same order per byte, so the packed
//! words here flatten directly into the canonical byte stream.

use rand::RngCore;

/// Number of 64-bit words needed to hold `bits` bits.
#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// A bit vector over GF(2), packed little-endian into 64-bit words.
///
/// Used for syndromes, flattened matrices, and solution vectors. Bits past
/// `len` in the last word are kept zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    /// All-zero vector of the given length.
    pub fn zero(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0u64; words_for(len)],
        }
    }

    /// Uniformly random vector.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = BitVec::zero(len);
        for w in v.words.iter_mut() {
            *w = rng.next_u64();
        }
        v.mask_tail();
        v
    }

    /// Build from an iterator of bits, least index first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = BitVec::zero(bits.len());
        for (i, b) in bits.iter().enumerate() {
            v.set(i, *b);
        }
        v
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// Length in bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the length is zero.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Set bit `i` to `b`.
    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// XOR `other` into `self` (same length required).
    pub fn xor_in(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "BitVec length mismatch");
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    /// True when every bit is zero.
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Index of the first set bit, if any.
    pub fn leading_bit(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Number of set bits.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Raw words (little-endian bit packing).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Concatenate two vectors: `self` bits first, then `other`.
    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut out = BitVec::zero(self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// Iterator over the bits, least index first.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Pack into bytes, LSB-first within each byte, zero-padded tail:
    /// bit i lands in byte i/8 at position i%8.
    pub fn to_lsb_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    /// Inverse of [`BitVec::to_lsb_bytes`]. Strict: `bytes` must be exactly
    /// ceil(len/8) long and every padding bit must be zero; returns None
    /// otherwise, so decoders reject non-canonical encodings.
    pub fn from_lsb_bytes(bytes: &[u8], len: usize) -> Option<BitVec> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        if len % 8 != 0 {
            let last = bytes[bytes.len() - 1];
            if last >> (len % 8) != 0 {
                return None;
            }
        }
        let mut v = BitVec::zero(len);
        for i in 0..len {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                v.set(i, true);
            }
        }
        Some(v)
    }

    /// GF(2) inner product: parity of the AND of the two vectors.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(other.words.iter()) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVec[{s}]")
    }
}

/// An m x n matrix over GF(2), rows packed into 64-bit words.
///
/// Each row occupies `words_for(cols)` words so row XOR is a straight word
/// loop; the canonical row-major continuous bit stream (no per-row padding)
/// is produced by [`BinMatrix::to_rowvec`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    wpr: usize,
    data: Vec<u64>,
}

impl BinMatrix {
    /// All-zero matrix.
    pub fn zero(rows: usize, cols: usize) -> Self {
        let wpr = words_for(cols).max(1);
        BinMatrix {
            rows,
            cols,
            wpr,
            data: vec![0u64; rows * wpr],
        }
    }

    /// n x n identity.
    pub fn identity(n: usize) -> Self {
        let mut m = BinMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Uniformly random matrix.
    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = BinMatrix::zero(rows, cols);
        for r in 0..rows {
            for w in 0..m.wpr {
                m.data[r * m.wpr + w] = rng.next_u64();
            }
        }
        m.mask_tails();
        m
    }

    /// Uniformly random nonsingular n x n matrix (rejection sampling; the
    /// acceptance probability is bounded below by ~0.288 for every n).
    pub fn random_nonsingular<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = BinMatrix::random(n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    /// Build from a closure over (row, col).
    pub fn from_fn<F: FnMut(usize, usize) -> bool>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = BinMatrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Build a matrix whose rows are the given bit vectors.
    pub fn from_rows(rows: &[BitVec]) -> Self {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let cols = rows[0].len();
        let mut m = BinMatrix::zero(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.set_row(i, r);
        }
        m
    }

    fn mask_tails(&mut self) {
        let r = self.cols % 64;
        if r != 0 {
            let mask = (1u64 << r) - 1;
            for row in 0..self.rows {
                self.data[row * self.wpr + self.wpr - 1] &= mask;
            }
        }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at (i, j).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.wpr + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Set entry (i, j) to `b`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let mask = 1u64 << (j % 64);
        let w = &mut self.data[i * self.wpr + j / 64];
        if b {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.wpr..(i + 1) * self.wpr]
    }

    /// Row `i` as a bit vector.
    pub fn row(&self, i: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(i).to_vec(),
        }
    }

    /// Overwrite row `i`.
    pub fn set_row(&mut self, i: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.data[i * self.wpr..(i + 1) * self.wpr].copy_from_slice(&v.words);
    }

    #[inline]
    fn xor_rows(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.wpr, src * self.wpr);
        for w in 0..self.wpr {
            let v = self.data[s + w];
            self.data[d + w] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.wpr {
            self.data.swap(a * self.wpr + w, b * self.wpr + w);
        }
    }

    /// Entrywise sum (XOR). Shapes must match.
    pub fn add(&self, other: &BinMatrix) -> BinMatrix {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch in add"
        );
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a ^= *b;
        }
        out
    }

    /// Matrix product over GF(2). Inner dimensions must agree.
    pub fn mul(&self, other: &BinMatrix) -> BinMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in mul");
        let mut out = BinMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            let base = i * self.wpr;
            for wj in 0..self.wpr {
                let mut w = self.data[base + wj];
                while w != 0 {
                    let j = wj * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    let (d, s) = (i * out.wpr, j * other.wpr);
                    for t in 0..out.wpr {
                        out.data[d + t] ^= other.data[s + t];
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product: result bit i is the inner product of row i
    /// with `v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        let mut out = BitVec::zero(self.rows);
        for i in 0..self.rows {
            let mut acc = 0u64;
            for (a, b) in self.row_words(i).iter().zip(v.words.iter()) {
                acc ^= a & b;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    /// Matrix transpose.
    pub fn transpose(&self) -> BinMatrix {
        let mut out = BinMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            let base = i * self.wpr;
            for wj in 0..self.wpr {
                let mut w = self.data[base + wj];
                while w != 0 {
                    let j = wj * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    out.set(j, i, true);
                }
            }
        }
        out
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|w| *w == 0)
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// In-place reduction to reduced row echelon form.
    ///
    /// Pivots are chosen leftmost-column first, topmost row first, and the
    /// pivot columns are cleared above as well as below, so the result is the
    /// canonical RREF of the row space: two matrices with equal row spans
    /// reduce to identical forms. Returns the pivot column indices in
    /// increasing order.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut sel = None;
            for i in r..self.rows {
                if self.get(i, c) {
                    sel = Some(i);
                    break;
                }
            }
            let Some(i) = sel else { continue };
            self.swap_rows(r, i);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_rows(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Flatten row-major into a single bit vector of length rows*cols
    /// (no per-row padding).
    pub fn to_rowvec(&self) -> BitVec {
        let mut v = BitVec::zero(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    v.set(i * self.cols + j, true);
                }
            }
        }
        v
    }

    /// Inverse of [`BinMatrix::to_rowvec`].
    pub fn from_rowvec(v: &BitVec, rows: usize, cols: usize) -> Self {
        assert_eq!(v.len(), rows * cols, "bit length does not match shape");
        let mut m = BinMatrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if v.get(i * cols + j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Inverse of a nonsingular square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<BinMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        // Eliminate [self | I]; self reduces to I exactly when nonsingular.
        let mut aug = BinMatrix::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            aug.set(i, n + i, true);
        }
        let pivots = aug.rref();
        if pivots.len() != n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = BinMatrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                if aug.get(i, n + j) {
                    inv.set(i, j, true);
                }
            }
        }
        Some(inv)
    }
}

impl std::fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        write!(f, "]")
    }
}

/// Outcome of [`solve`]: one particular solution, when the system is
/// consistent. "Inconsistent" is a value (`None`), not a fault.
pub fn solve(a: &BinMatrix, b: &BitVec) -> Option<BitVec> {
    assert_eq!(a.rows(), b.len(), "rhs length must equal row count");
    let n = a.cols();
    // Eliminate the augmented matrix [A | b].
    let mut aug = BinMatrix::zero(a.rows(), n + 1);
    for i in 0..a.rows() {
        for w in 0..a.wpr {
            aug.data[i * aug.wpr + w] = a.data[i * a.wpr + w];
        }
        if b.get(i) {
            aug.set(i, n, true);
        }
    }
    aug.mask_tails();
    let pivots = aug.rref();
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = BitVec::zero(n);
    for (r, &c) in pivots.iter().enumerate() {
        if aug.get(r, n) {
            x.set(c, true);
        }
    }
    Some(x)
}

/// Basis of the right kernel {x : Ax = 0}, one vector per non-pivot column,
/// in increasing column order (deterministic).
pub fn kernel_basis(a: &BinMatrix) -> Vec<BitVec> {
    let n = a.cols();
    let mut r = a.clone();
    let pivots = r.rref();
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::with_capacity(n - pivots.len());
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = BitVec::zero(n);
        v.set(free, true);
        for (row, &pc) in pivots.iter().enumerate() {
            if pc < free && r.get(row, free) {
                v.set(pc, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Canonical basis of the column space of `a`, as vectors of length
/// `a.rows()`: the nonzero rows of the RREF of the transpose. Deterministic
/// in `a`.
pub fn column_space_basis(a: &BinMatrix) -> Vec<BitVec> {
    let mut t = a.transpose();
    let pivots = t.rref();
    (0..pivots.len()).map(|i| t.row(i)).collect()
}

/// Trace pairing tr(X B^T) over GF(2): the parity of the entrywise overlap.
pub fn trace_pairing(x: &BinMatrix, b: &BinMatrix) -> bool {
    assert!(
        x.rows == b.rows && x.cols == b.cols,
        "shape mismatch in trace pairing"
    );
    let mut acc = 0u64;
    for (xw, bw) in x.data.iter().zip(b.data.iter()) {
        acc ^= xw & bw;
    }
    acc.count_ones() % 2 == 1
}

/// Syndrome of X against a list of dual-basis matrices: bit i is
/// tr(X duals[i]^T). GF(2)-linear in X.
pub fn syndrome(x: &BinMatrix, duals: &[BinMatrix]) -> BitVec {
    let mut s = BitVec::zero(duals.len());
    for (i, d) in duals.iter().enumerate() {
        if trace_pairing(x, d) {
            s.set(i, true);
        }
    }
    s
}

/// Online Gaussian eliminator maintaining the canonical RREF of a growing
/// span. Rows are stored fully reduced and indexed by pivot position, so
/// membership tests and independent-row insertion are both one reduction.
#[derive(Clone)]
pub struct Echelon {
    cols: usize,
    // Sorted by pivot column; each row has a 1 at its pivot and zeros in
    // every other pivot column.
    rows: Vec<(usize, BitVec)>,
}

impl Echelon {
    /// Empty eliminator over vectors of the given length.
    pub fn new(cols: usize) -> Self {
        Echelon {
            cols,
            rows: Vec::new(),
        }
    }

    /// Dimension of the span inserted so far.
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the stored rows (in place).
    pub fn reduce(&self, v: &mut BitVec) {
        for (p, row) in &self.rows {
            if v.get(*p) {
                v.xor_in(row);
            }
        }
    }

    /// Insert `v` into the span. Returns true when `v` was independent of the
    /// rows inserted before (and so grew the span).
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut v = v.clone();
        self.reduce(&mut v);
        let Some(p) = v.leading_bit() else {
            return false;
        };
        // Clear the new pivot from existing rows to keep the form reduced.
        for (_, row) in self.rows.iter_mut() {
            if row.get(p) {
                row.xor_in(&v);
            }
        }
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, v));
        true
    }

    /// True when `v` lies in the span inserted so far.
    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// The canonical RREF rows of the span, in pivot order.
    pub fn rows(&self) -> impl Iterator<Item = &BitVec> {
        self.rows.iter().map(|(_, r)| r)
    }

    /// Pivot columns in increasing order.
    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }
}

/// A GF(2)-linear code of m x n matrices, given by an ordered basis.
#[derive(Clone, Debug)]
pub struct MatrixCode {
    m: usize,
    n: usize,
    basis: Vec<BinMatrix>,
}

impl MatrixCode {
    /// Wrap an ordered basis. The matrices must share the shape and be
    /// GF(2)-linearly independent.
    pub fn new(m: usize, n: usize, basis: Vec<BinMatrix>) -> Self {
        for b in &basis {
            assert!(
                b.rows() == m && b.cols() == n,
                "basis element has wrong shape"
            );
        }
        let code = MatrixCode { m, n, basis };
        assert_eq!(
            code.flattened_rank(),
            code.basis.len(),
            "basis elements are dependent"
        );
        code
    }

    /// The zero code.
    pub fn empty(m: usize, n: usize) -> Self {
        MatrixCode {
            m,
            n,
            basis: Vec::new(),
        }
    }

    /// Wrap a basis whose independence is guaranteed by construction,
    /// skipping the O(k^2 mn) rank check. For code built from an invertible
    /// image of an independent set (e.g. an isometry applied to field-basis
    /// multiples); misuse breaks the dimension bookkeeping downstream.
    pub fn new_unchecked(m: usize, n: usize, basis: Vec<BinMatrix>) -> Self {
        for b in &basis {
            assert!(
                b.rows() == m && b.cols() == n,
                "basis element has wrong shape"
            );
        }
        MatrixCode { m, n, basis }
    }

    /// Row count of the codeword matrices.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Column count of the codeword matrices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Code dimension over GF(2).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The ordered basis.
    pub fn basis(&self) -> &[BinMatrix] {
        &self.basis
    }

    /// The k x mn matrix whose rows are the flattened basis elements.
    pub fn flattened(&self) -> BinMatrix {
        assert!(!self.basis.is_empty(), "zero code has no flattened basis");
        let rows: Vec<BitVec> = self.basis.iter().map(|b| b.to_rowvec()).collect();
        BinMatrix::from_rows(&rows)
    }

    fn flattened_rank(&self) -> usize {
        if self.basis.is_empty() {
            return 0;
        }
        self.flattened().rank()
    }

    /// Echelon form of the flattened basis (canonical for the span).
    pub fn echelon(&self) -> Echelon {
        let mut ech = Echelon::new(self.m * self.n);
        for b in &self.basis {
            ech.insert(&b.to_rowvec());
        }
        ech
    }

    /// Membership test: is `x` in the span of the basis?
    pub fn contains(&self, x: &BinMatrix) -> bool {
        assert!(x.rows() == self.m && x.cols() == self.n, "shape mismatch");
        self.echelon().contains(&x.to_rowvec())
    }

    /// The codeword with the given coefficient vector (one bit per basis
    /// element).
    pub fn combine(&self, coeffs: &BitVec) -> BinMatrix {
        assert_eq!(coeffs.len(), self.basis.len(), "coefficient count");
        let mut acc = BinMatrix::zero(self.m, self.n);
        for (i, b) in self.basis.iter().enumerate() {
            if coeffs.get(i) {
                acc = acc.add(b);
            }
        }
        acc
    }

    /// Two codes are equal as sets iff their canonical echelon rows agree.
    pub fn same_span(&self, other: &MatrixCode) -> bool {
        if self.m != other.m || self.n != other.n || self.dim() != other.dim() {
            return false;
        }
        let a = self.echelon();
        let b = other.echelon();
        a.pivots() == b.pivots() && a.rows().zip(b.rows()).all(|(x, y)| x == y)
    }
}

/// Uniformly random m x n matrix of rank exactly r: the product S C of a
/// uniform full-column-rank m x r factor and a uniform full-row-rank r x n
/// factor. Every rank-r matrix has exactly |GL_r| such factorizations, so
/// the product is uniform over the rank-r sphere.
pub fn random_rank_matrix<R: RngCore + ?Sized>(
    m: usize,
    n: usize,
    r: usize,
    rng: &mut R,
) -> BinMatrix {
    assert!(r <= m.min(n), "rank exceeds the matrix dimensions");
    if r == 0 {
        return BinMatrix::zero(m, n);
    }
    let s = loop {
        let c = BinMatrix::random(m, r, rng);
        if c.rank() == r {
            break c;
        }
    };
    let c = loop {
        let c = BinMatrix::random(r, n, rng);
        if c.rank() == r {
            break c;
        }
    };
    s.mul(&c)
}

/// Basis of the dual code {B : tr(C B^T) = 0 for all C in the code}.
///
/// Under the trace pairing the dual is the kernel of the flattened basis
/// matrix, so the output has dimension mn - k. The returned order is the
/// deterministic kernel-basis order (increasing free column).
pub fn dual_basis(code: &MatrixCode) -> Vec<BinMatrix> {
    let (m, n) = (code.m(), code.n());
    if code.dim() == 0 {
        // Dual of the zero code is the full space.
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let mut e = BinMatrix::zero(m, n);
                e.set(i, j, true);
                out.push(e);
            }
        }
        return out;
    }
    kernel_basis(&code.flattened())
        .into_iter()
        .map(|v| BinMatrix::from_rowvec(&v, m, n))
        .collect()
}

/// Uniformly random matrix code of dimension k: draw k matrices and retry
/// until the flattened rank is k (uniform over ordered independent bases).
pub fn random_code<R: RngCore + ?Sized>(m: usize, n: usize, k: usize, rng: &mut R) -> MatrixCode {
    assert!(k <= m * n, "dimension exceeds the ambient space");
    if k == 0 {
        return MatrixCode::empty(m, n);
    }
    loop {
        let basis: Vec<BinMatrix> = (0..k).map(|_| BinMatrix::random(m, n, rng)).collect();
        let rows: Vec<BitVec> = basis.iter().map(|b| b.to_rowvec()).collect();
        if BinMatrix::from_rows(&rows).rank() == k {
            return MatrixCode { m, n, basis };
        }
    }
}

/// Uniformly random code of dimension `la` intersecting `avoid` trivially.
///
/// Each basis element is drawn uniformly and accepted iff it is independent
/// of avoid plus the elements accepted so far; the chain rule makes the
/// accepted tuple uniform over all valid ordered bases.
pub fn random_complement_code<R: RngCore + ?Sized>(
    avoid: &MatrixCode,
    la: usize,
    rng: &mut R,
) -> MatrixCode {
    let (m, n) = (avoid.m(), avoid.n());
    assert!(
        la + avoid.dim() <= m * n,
        "no complement of that dimension exists"
    );
    let mut ech = avoid.echelon();
    let mut basis = Vec::with_capacity(la);
    while basis.len() < la {
        let cand = BinMatrix::random(m, n, rng);
        if ech.insert(&cand.to_rowvec()) {
            basis.push(cand);
        }
    }
    MatrixCode { m, n, basis }
}

/// Uniformly random subcode of codimension `ls`: apply a uniformly random
/// full-row-rank (k-ls) x k coefficient matrix to the basis.
pub fn random_subcode<R: RngCore + ?Sized>(
    code: &MatrixCode,
    ls: usize,
    rng: &mut R,
) -> MatrixCode {
    let k = code.dim();
    assert!(ls <= k, "codimension exceeds the dimension");
    let sub = k - ls;
    if sub == 0 {
        return MatrixCode::empty(code.m(), code.n());
    }
    let coeff = loop {
        let c = BinMatrix::random(sub, k, rng);
        if c.rank() == sub {
            break c;
        }
    };
    let basis: Vec<BinMatrix> = (0..sub).map(|i| code.combine(&coeff.row(i))).collect();
    MatrixCode {
        m: code.m(),
        n: code.n(),
        basis,
    }
}

/// Extend `sub`'s basis to a basis of `sup` with uniformly random elements
/// of `sup`; returns the dim(sup) - dim(sub) added matrices.
///
/// Panics when `sub` is not contained in `sup`.
pub fn complete_basis<R: RngCore + ?Sized>(
    sub: &MatrixCode,
    sup: &MatrixCode,
    rng: &mut R,
) -> Vec<BinMatrix> {
    assert!(sub.m() == sup.m() && sub.n() == sup.n(), "shape mismatch");
    let sup_ech = sup.echelon();
    let mut ech = Echelon::new(sub.m() * sub.n());
    for b in sub.basis() {
        let row = b.to_rowvec();
        assert!(
            sup_ech.contains(&row),
            "sub is not contained in the ambient code"
        );
        ech.insert(&row);
    }
    let need = sup.dim() - ech.dim();
    let mut out = Vec::with_capacity(need);
    while out.len() < need {
        let coeffs = BitVec::random(sup.dim(), rng);
        let cand = sup.combine(&coeffs);
        if ech.insert(&cand.to_rowvec()) {
            out.push(cand);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn mat(rows: &[&[u8]]) -> BinMatrix {
        BinMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j] == 1)
    }

    #[test]
    fn rank_of_zero_identity_and_repeated_row() {
        assert_eq!(BinMatrix::zero(3, 5).rank(), 0);
        assert_eq!(BinMatrix::identity(7).rank(), 7);
        // [[1,1],[1,1]] has rank 1: the rows coincide.
        assert_eq!(mat(&[&[1, 1], &[1, 1]]).rank(), 1);
    }

    #[test]
    fn rref_is_canonical_for_the_row_space() {
        let mut r = rng(1);
        for _ in 0..50 {
            let a = BinMatrix::random(5, 9, &mut r);
            // Multiply by a random nonsingular matrix: same row space.
            let t = BinMatrix::random_nonsingular(5, &mut r);
            let mut x = a.clone();
            let mut y = t.mul(&a);
            x.rref();
            y.rref();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn solve_examples() {
        // solve(I, b) = b with empty kernel.
        let b = BitVec::from_bits([true, false, true]);
        let x = solve(&BinMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
        assert!(kernel_basis(&BinMatrix::identity(3)).is_empty());

        // solve(0, nonzero b) is inconsistent.
        assert!(solve(&BinMatrix::zero(2, 2), &BitVec::from_bits([true, false])).is_none());

        // A=[[1,1],[0,1]], b=(0,1) has the unique solution (1,1).
        let a = mat(&[&[1, 1], &[0, 1]]);
        let x = solve(&a, &BitVec::from_bits([false, true])).unwrap();
        assert_eq!(x, BitVec::from_bits([true, true]));
        assert!(kernel_basis(&a).is_empty());
    }

    #[test]
    fn solve_agrees_with_substitution_on_random_systems() {
        let mut r = rng(2);
        for _ in 0..200 {
            let a = BinMatrix::random(6, 9, &mut r);
            let b = BitVec::random(6, &mut r);
            if let Some(x) = solve(&a, &b) {
                // Check A x = b.
                let mut ax = BitVec::zero(6);
                for i in 0..6 {
                    let mut acc = false;
                    for j in 0..9 {
                        acc ^= a.get(i, j) && x.get(j);
                    }
                    ax.set(i, acc);
                }
                assert_eq!(ax, b);
            } else {
                // Inconsistent: b must be outside the column space, i.e.
                // rank([A|b]) > rank(A).
                let mut aug = BinMatrix::zero(6, 10);
                for i in 0..6 {
                    for j in 0..9 {
                        aug.set(i, j, a.get(i, j));
                    }
                    aug.set(i, 9, b.get(i));
                }
                assert_eq!(aug.rank(), a.rank() + 1);
            }
        }
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let mut r = rng(3);
        for _ in 0..100 {
            let a = BinMatrix::random(5, 8, &mut r);
            let ker = kernel_basis(&a);
            assert_eq!(ker.len(), 8 - a.rank());
            for v in &ker {
                for i in 0..5 {
                    let mut acc = false;
                    for j in 0..8 {
                        acc ^= a.get(i, j) && v.get(j);
                    }
                    assert!(!acc, "kernel vector not annihilated");
                }
            }
        }
    }

    #[test]
    fn trace_pairing_examples() {
        let i2 = BinMatrix::identity(2);
        assert!(!trace_pairing(&i2, &BinMatrix::zero(2, 2)));
        // I_2 against I_2 overlaps in two entries: even parity.
        assert!(!trace_pairing(&i2, &i2));
        // [[1,0],[0,0]] against all-ones overlaps once.
        let x = mat(&[&[1, 0], &[0, 0]]);
        let b = mat(&[&[1, 1], &[1, 1]]);
        assert!(trace_pairing(&x, &b));
    }

    #[test]
    fn trace_pairing_matches_trace_of_product() {
        let mut r = rng(4);
        for _ in 0..100 {
            let x = BinMatrix::random(3, 5, &mut r);
            let b = BinMatrix::random(3, 5, &mut r);
            let prod = x.mul(&b.transpose());
            let mut tr = false;
            for i in 0..3 {
                tr ^= prod.get(i, i);
            }
            assert_eq!(tr, trace_pairing(&x, &b));
        }
    }

    #[test]
    fn syndrome_linear_and_zero_on_code() {
        let mut r = rng(5);
        let code = random_code(4, 4, 6, &mut r);
        let duals = dual_basis(&code);
        assert_eq!(duals.len(), 16 - 6);
        // Codewords have zero syndrome.
        for _ in 0..50 {
            let c = code.combine(&BitVec::random(6, &mut r));
            assert!(syndrome(&c, &duals).is_zero());
        }
        // Linearity.
        for _ in 0..50 {
            let x = BinMatrix::random(4, 4, &mut r);
            let y = BinMatrix::random(4, 4, &mut r);
            let mut sx = syndrome(&x, &duals);
            let sy = syndrome(&y, &duals);
            sx.xor_in(&sy);
            assert_eq!(sx, syndrome(&x.add(&y), &duals));
        }
    }

    #[test]
    fn syndrome_zero_iff_member_exhaustive_small() {
        // For m=n in {2,3,4}: X in span(C) iff syndrome(X, dual(C)) = 0,
        // exhaustively over all X.
        let mut r = rng(6);
        for n in 2..=4usize {
            let k = n + 1; // some mid-range dimension
            let code = random_code(n, n, k, &mut r);
            let duals = dual_basis(&code);
            let ech = code.echelon();
            for x_bits in 0..(1u32 << (n * n)) {
                let v = BitVec::from_bits((0..n * n).map(|i| (x_bits >> i) & 1 == 1));
                let x = BinMatrix::from_rowvec(&v, n, n);
                let member = ech.contains(&v);
                assert_eq!(member, syndrome(&x, &duals).is_zero());
            }
        }
    }

    #[test]
    fn dual_of_identity_span_in_2x2_enumerated() {
        // C = span(I_2) in 2x2: the dual is exactly the 8 matrices with even
        // overlap with I_2, a 3-dimensional space.
        let code = MatrixCode::new(2, 2, vec![BinMatrix::identity(2)]);
        let duals = dual_basis(&code);
        assert_eq!(duals.len(), 3);
        let dual_code = MatrixCode::new(2, 2, duals.clone());
        let mut count = 0usize;
        for bits in 0..16u32 {
            let v = BitVec::from_bits((0..4).map(|i| (bits >> i) & 1 == 1));
            let m = BinMatrix::from_rowvec(&v, 2, 2);
            let even_overlap = !trace_pairing(&m, &BinMatrix::identity(2));
            assert_eq!(dual_code.contains(&m), even_overlap);
            if even_overlap {
                count += 1;
            }
        }
        assert_eq!(count, 8);
    }

    #[test]
    fn dual_extremes() {
        // Dual of the full space has dimension 0; dual of the zero code is
        // the full space.
        let mut r = rng(7);
        let full = random_code(2, 3, 6, &mut r);
        assert!(dual_basis(&full).is_empty());
        let zero = MatrixCode::empty(2, 3);
        assert_eq!(dual_basis(&zero).len(), 6);
    }

    #[test]
    fn dual_is_involution_up_to_span() {
        let mut r = rng(8);
        for _ in 0..20 {
            let code = random_code(3, 4, 5, &mut r);
            let dd = MatrixCode::new(3, 4, dual_basis(&MatrixCode::new(3, 4, dual_basis(&code))));
            assert!(dd.same_span(&code));
        }
    }

    #[test]
    fn complement_code_never_intersects() {
        let mut r = rng(9);
        for _ in 0..1000 {
            let avoid = random_code(3, 3, 3, &mut r);
            let comp = random_complement_code(&avoid, 2, &mut r);
            // Joint flattened rank must be 5.
            let mut ech = avoid.echelon();
            let mut joint = avoid.dim();
            for b in comp.basis() {
                if ech.insert(&b.to_rowvec()) {
                    joint += 1;
                }
            }
            assert_eq!(joint, 5);
        }
    }

    #[test]
    #[should_panic(expected = "no complement")]
    fn complement_of_full_space_panics() {
        let mut r = rng(10);
        let avoid = random_code(2, 2, 4, &mut r);
        let _ = random_complement_code(&avoid, 1, &mut r);
    }

    #[test]
    fn subcode_is_contained_and_has_right_dimension() {
        let mut r = rng(11);
        let code = random_code(3, 3, 4, &mut r);
        // ls = 0 keeps the span; ls = dim gives the zero code.
        assert!(random_subcode(&code, 0, &mut r).same_span(&code));
        assert_eq!(random_subcode(&code, 4, &mut r).dim(), 0);
        for _ in 0..100 {
            let sub = random_subcode(&code, 1, &mut r);
            assert_eq!(sub.dim(), 3);
            for b in sub.basis() {
                assert!(code.contains(b));
            }
        }
    }

    #[test]
    fn complete_basis_examples() {
        let mut r = rng(12);
        let sup = random_code(2, 2, 4, &mut r);
        // sub = sup: nothing to add.
        assert!(complete_basis(&sup, &sup, &mut r).is_empty());
        // sub = zero code: a full basis of sup comes back.
        let sub = MatrixCode::empty(2, 2);
        let ext = complete_basis(&sub, &sup, &mut r);
        assert_eq!(ext.len(), 4);
        // span(I) inside the full 2x2 space: 3 matrices, joint rank 4.
        let sub = MatrixCode::new(2, 2, vec![BinMatrix::identity(2)]);
        let ext = complete_basis(&sub, &sup, &mut r);
        assert_eq!(ext.len(), 3);
        let mut ech = sub.echelon();
        for e in &ext {
            assert!(ech.insert(&e.to_rowvec()));
        }
        assert_eq!(ech.dim(), 4);
    }

    #[test]
    fn matrix_product_and_inverse() {
        let mut r = rng(13);
        for _ in 0..50 {
            let a = BinMatrix::random_nonsingular(6, &mut r);
            let inv = a.inverse().expect("nonsingular");
            assert_eq!(a.mul(&inv), BinMatrix::identity(6));
            assert_eq!(inv.mul(&a), BinMatrix::identity(6));
        }
        // Singular matrices have no inverse.
        assert!(BinMatrix::zero(3, 3).inverse().is_none());
    }

    #[test]
    fn transpose_involution_and_rowvec_round_trip() {
        let mut r = rng(14);
        let a = BinMatrix::random(5, 9, &mut r);
        assert_eq!(a.transpose().transpose(), a);
        let v = a.to_rowvec();
        assert_eq!(BinMatrix::from_rowvec(&v, 5, 9), a);
    }

    #[test]
    fn random_rank_matrix_has_exact_rank() {
        let mut r = rng(16);
        for rank in 0..=3usize {
            for _ in 0..50 {
                let m = random_rank_matrix(4, 6, rank, &mut r);
                assert_eq!(m.rank(), rank);
            }
        }
    }

    #[test]
    fn dot_and_mul_vec_match_bitwise_definitions() {
        let mut r = rng(23);
        for _ in 0..200 {
            let a = BitVec::random(70, &mut r);
            let b = BitVec::random(70, &mut r);
            let naive = (0..70).filter(|&i| a.get(i) && b.get(i)).count() % 2 == 1;
            assert_eq!(a.dot(&b), naive);
        }
        for _ in 0..50 {
            let a = BinMatrix::random(5, 70, &mut r);
            let v = BitVec::random(70, &mut r);
            let got = a.mul_vec(&v);
            for i in 0..5 {
                assert_eq!(got.get(i), a.row(i).dot(&v));
            }
        }
    }

    #[test]
    fn lsb_byte_round_trip_and_strictness() {
        // 10 bits: 1,0,1,1,0,0,1,0 | 1,1 -> bytes 0x4D, 0x03.
        let v = BitVec::from_bits(
            [true, false, true, true, false, false, true, false, true, true]
                .into_iter(),
        );
        assert_eq!(v.to_lsb_bytes(), vec![0x4D, 0x03]);
        assert_eq!(BitVec::from_lsb_bytes(&[0x4D, 0x03], 10), Some(v.clone()));
        // Nonzero padding bits are rejected.
        assert_eq!(BitVec::from_lsb_bytes(&[0x4D, 0x07], 10), None);
        // Wrong byte count is rejected.
        assert_eq!(BitVec::from_lsb_bytes(&[0x4D], 10), None);
        let mut r = rng(25);
        for len in [0usize, 1, 7, 8, 9, 64, 65, 130] {
            let v = BitVec::random(len, &mut r);
            assert_eq!(BitVec::from_lsb_bytes(&v.to_lsb_bytes(), len), Some(v));
        }
    }

    #[test]
    fn column_space_basis_spans_the_columns() {
        let mut r = rng(24);
        for _ in 0..50 {
            let a = random_rank_matrix(6, 9, 3, &mut r);
            let basis = column_space_basis(&a);
            assert_eq!(basis.len(), 3);
            let mut ech = Echelon::new(6);
            for v in &basis {
                assert!(ech.insert(v));
            }
            // Every column of a lies in the span of the basis.
            for j in 0..9 {
                let col = BitVec::from_bits((0..6).map(|i| a.get(i, j)));
                assert!(ech.contains(&col));
            }
        }
        assert!(column_space_basis(&BinMatrix::zero(4, 4)).is_empty());
    }

    #[test]
    fn echelon_tracks_membership() {
        let mut r = rng(15);
        let mut ech = Echelon::new(12);
        let mut rows = Vec::new();
        for _ in 0..5 {
            let v = BitVec::random(12, &mut r);
            if ech.insert(&v) {
                rows.push(v);
            }
        }
        // Any combination of inserted rows is contained.
        for mask in 1..(1u32 << rows.len()) {
            let mut acc = BitVec::zero(12);
            for (i, row) in rows.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    acc.xor_in(row);
                }
            }
            assert!(ech.contains(&acc));
        }
    }
}

//! Bit-exact file formats: public keys in systematic form, compact
//! support-based signatures, and secret keys.
//!
//! Key files are `magic (8 bytes) ‖ version (u16 LE) ‖ param-id (u16 LE) ‖
//! body`. Signature files are bare bodies — exactly `sig_size_bytes` long,
//! the size the signature formula counts, with no self-describing header:
//! the verifier already holds the public key and takes the parameter set
//! from there. Bodies are continuous bit streams packed row-major,
//! LSB-first within each byte, zero-padded to a whole byte at the tail;
//! decoders reject non-canonical padding.
//!
//! * Public key (`.mpk`): the code admits a generator `[I | P]` on its
//!   leading `code_dim` coordinates (key generation guarantees it); the
//!   body is `P`, `code_dim x syn_len` bits. Decoding returns the dual
//!   basis in the matching canonical form, the rows of `[P^T | I]` — the
//!   same dual space as the generation-time basis, in the basis every
//!   consumer of the file agrees on.
//! * Signature (`.msig`): a rank-<=t preimage is stored as its column
//!   support — the unique basis of its column space that is the identity
//!   on a table-indexed pivot row set — as `t(m-t)` non-pivot bits, the
//!   table index (9 bits; 10 at lambda = 256), and the salt.
//! * Secret key (`.msk`): the evaluation points g, the coordinate basis B,
//!   and the la completion matrices, bit-packed in that order.

use crate::field::{FieldContext, FieldElement};
use crate::gabidulin::{GabidulinCode, MatrixGabidulin};
use crate::keys::{ParameterSet, PublicKey, Trapdoor};
use crate::matrank::{column_space_basis, BinMatrix, BitVec, Echelon};
use crate::xof::{XofStream, PIVOT_TAG};
use rand::RngCore;
use thiserror::Error;

/// Magic for public-key files.
pub const MAGIC_PUBLIC: [u8; 8] = *b"MIRANDPK";
/// Magic for secret-key files.
pub const MAGIC_SECRET: [u8; 8] = *b"MIRANDSK";
/// Current format version.
pub const WIRE_VERSION: u16 = 1;
/// Header length: magic + version + param id.
pub const HEADER_LEN: usize = 12;

/// Decoding and encoding failures.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("file too short")]
    Truncated,
    #[error("bad magic (expected {expected:?})")]
    BadMagic { expected: &'static str },
    #[error("unsupported version {0}")]
    BadVersion(u16),
    #[error("param id {found} does not match expected {expected}")]
    ParamMismatch { found: u16, expected: u16 },
    #[error("body length {found} does not match expected {expected}")]
    BadLength { found: usize, expected: usize },
    #[error("non-canonical padding or malformed body")]
    Malformed,
    #[error("preimage rank exceeds t; not encodable")]
    RankTooHigh,
    #[error("no pivot row set gives an invertible minor")]
    NoInvertibleMinor,
    #[error("public code admits no systematic form on the leading columns")]
    NotSystematic,
}

/// Parsed file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub magic: [u8; 8],
    pub version: u16,
    pub param_id: u16,
}

/// Read the 12-byte header without touching the body — callers use the
/// param id to resolve a parameter set before full decoding.
pub fn peek_header(bytes: &[u8]) -> Result<Header, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::Truncated);
    }
    Ok(Header {
        magic: bytes[..8].try_into().unwrap(),
        version: u16::from_le_bytes([bytes[8], bytes[9]]),
        param_id: u16::from_le_bytes([bytes[10], bytes[11]]),
    })
}

fn write_header(out: &mut Vec<u8>, magic: &[u8; 8], param_id: u16) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&WIRE_VERSION.to_le_bytes());
    out.extend_from_slice(&param_id.to_le_bytes());
}

/// Validate the header and return the body slice.
fn checked_body<'a>(
    bytes: &'a [u8],
    magic: &'static [u8; 8],
    magic_name: &'static str,
    params: &ParameterSet,
) -> Result<&'a [u8], WireError> {
    let h = peek_header(bytes)?;
    if h.magic != *magic {
        return Err(WireError::BadMagic {
            expected: magic_name,
        });
    }
    if h.version != WIRE_VERSION {
        return Err(WireError::BadVersion(h.version));
    }
    if h.param_id != params.id {
        return Err(WireError::ParamMismatch {
            found: h.param_id,
            expected: params.id,
        });
    }
    Ok(&bytes[HEADER_LEN..])
}

// ---------------------------------------------------------------------------
// Pivot table
// ---------------------------------------------------------------------------

/// min(2^idx_bits, C(m, t)): the pivot table cannot hold more distinct
/// t-subsets than exist.
fn pivot_table_len(p: &ParameterSet) -> usize {
    let cap = 1usize << p.idx_bits();
    let mut binom: u128 = 1;
    for i in 0..p.t {
        binom = binom * (p.m - i) as u128 / (i + 1) as u128;
        if binom >= cap as u128 {
            return cap;
        }
    }
    binom as usize
}

/// The table of pivot row sets: deterministic t-subsets of [0, m), all
/// distinct, derived from an extendable-output stream keyed by the
/// parameter-set name. A signature stores an index into this table instead
/// of the t pivot row positions themselves.
pub fn pivot_table(p: &ParameterSet) -> Vec<Vec<usize>> {
    let target = pivot_table_len(p);
    let row_bits = usize::BITS as usize - (p.m - 1).leading_zeros() as usize;
    let mut stream = XofStream::new(PIVOT_TAG, &[p.name.as_bytes()]);
    let mut seen = std::collections::HashSet::new();
    let mut table = Vec::with_capacity(target);
    while table.len() < target {
        let mut subset = Vec::with_capacity(p.t);
        while subset.len() < p.t {
            let bits = stream.bits(row_bits);
            let idx = (0..row_bits).fold(0usize, |acc, i| acc | (usize::from(bits.get(i)) << i));
            if idx < p.m && !subset.contains(&idx) {
                subset.push(idx);
            }
        }
        subset.sort_unstable();
        if seen.insert(subset.clone()) {
            table.push(subset);
        }
    }
    table
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

/// Encode a signature: reduce the preimage to its canonical column support
/// and pack `t(m-t)` support bits ‖ table index ‖ salt.
///
/// `e` is any matrix over GF(2) with m rows and at most n columns whose
/// column space has dimension at most t — a full m x n preimage or an
/// already-extracted m x t support both work. The column-space basis is
/// padded with uniformly random independent columns when its rank is
/// below t — verification solves for a coefficient matrix inside the
/// support, so a strictly larger support stays sound — then the first
/// table entry whose row minor is invertible pins the canonical basis:
/// columns are reduced so those rows become the identity and only the
/// remaining m-t rows are stored. No invertible minor is a distinct error
/// (vanishing probability; the signer responds by resalting).
pub fn encode_signature<R: RngCore + ?Sized>(
    params: &ParameterSet,
    e: &BinMatrix,
    salt: &[u8],
    rng: &mut R,
) -> Result<Vec<u8>, WireError> {
    let (m, t) = (params.m, params.t);
    if e.rows() != m || e.cols() > params.n || salt.len() != params.lambda / 8 {
        return Err(WireError::Malformed);
    }
    let mut cols = column_space_basis(e);
    if cols.len() > t {
        return Err(WireError::RankTooHigh);
    }
    let mut ech = Echelon::new(m);
    for c in &cols {
        ech.insert(c);
    }
    while cols.len() < t {
        let cand = BitVec::random(m, rng);
        if ech.insert(&cand) {
            cols.push(cand);
        }
    }
    let support = BinMatrix::from_fn(m, t, |i, j| cols[j].get(i));

    let table = pivot_table(params);
    let (index, reduced) = reduce_to_pivot_rows(&support, &table)?;

    // support payload: non-pivot rows ascending, t bits each.
    let pivot_rows = &table[index];
    let mut body = BitVec::zero(0);
    let mut payload = BitVec::zero(t * (m - t));
    let mut at = 0;
    for i in 0..m {
        if pivot_rows.contains(&i) {
            continue;
        }
        for j in 0..t {
            payload.set(at, reduced.get(i, j));
            at += 1;
        }
    }
    body = body.concat(&payload);
    let index_bits =
        BitVec::from_bits((0..params.idx_bits()).map(|b| (index >> b) & 1 == 1));
    body = body.concat(&index_bits);
    let salt_bits =
        BitVec::from_bits((0..params.lambda).map(|b| (salt[b / 8] >> (b % 8)) & 1 == 1));
    body = body.concat(&salt_bits);

    let packed = body.to_lsb_bytes();
    debug_assert_eq!(packed.len(), params.sig_size_bytes());
    Ok(packed)
}

/// First table entry whose t x t row minor of `support` is invertible,
/// and the column-reduced support (identity on those rows). The reduced
/// matrix depends only on the column space, so re-encoding a decoded
/// support is byte-identical.
fn reduce_to_pivot_rows(
    support: &BinMatrix,
    table: &[Vec<usize>],
) -> Result<(usize, BinMatrix), WireError> {
    let t = support.cols();
    for (index, rows) in table.iter().enumerate() {
        let minor = BinMatrix::from_fn(t, t, |i, j| support.get(rows[i], j));
        if let Some(inv) = minor.inverse() {
            return Ok((index, support.mul(&inv)));
        }
    }
    Err(WireError::NoInvertibleMinor)
}

/// Decode a signature file into (support, salt). The support is the m x t
/// canonical basis matrix; verification feeds it to the compact verifier.
/// Signature files carry no header, so the parameter set must come from
/// the public key the signature is checked against.
pub fn decode_signature(
    bytes: &[u8],
    params: &ParameterSet,
) -> Result<(BinMatrix, Vec<u8>), WireError> {
    let body = bytes;
    if body.len() != params.sig_size_bytes() {
        return Err(WireError::BadLength {
            found: body.len(),
            expected: params.sig_size_bytes(),
        });
    }
    let (m, t) = (params.m, params.t);
    let nbits = t * (m - t) + params.idx_bits() + params.lambda;
    let bits = BitVec::from_lsb_bytes(body, nbits).ok_or(WireError::Malformed)?;

    let index = (0..params.idx_bits())
        .fold(0usize, |acc, b| acc | (usize::from(bits.get(t * (m - t) + b)) << b));
    let table = pivot_table(params);
    if index >= table.len() {
        return Err(WireError::Malformed);
    }
    let pivot_rows = &table[index];

    let mut support = BinMatrix::zero(m, t);
    for (j, &r) in pivot_rows.iter().enumerate() {
        support.set(r, j, true);
    }
    let mut at = 0;
    for i in 0..m {
        if pivot_rows.contains(&i) {
            continue;
        }
        for j in 0..t {
            support.set(i, j, bits.get(at));
            at += 1;
        }
    }

    let salt_base = t * (m - t) + params.idx_bits();
    let mut salt = vec![0u8; params.lambda / 8];
    for b in 0..params.lambda {
        if bits.get(salt_base + b) {
            salt[b / 8] |= 1 << (b % 8);
        }
    }
    Ok((support, salt))
}

// ---------------------------------------------------------------------------
// Public keys
// ---------------------------------------------------------------------------

/// Encode a public key in systematic form. With the duals as rows of
/// H = [H_L | H_R] (syn_len x mn), the code has a generator [I | P] iff
/// H_R is invertible, and then P^T = H_R^{-1} H_L; the body is P.
pub fn encode_public_key(pk: &PublicKey) -> Result<Vec<u8>, WireError> {
    let p = &pk.params;
    let (k, syn) = (p.code_dim(), p.syn_len());
    let rows: Vec<BitVec> = pk.duals.iter().map(|b| b.to_rowvec()).collect();
    let h_r = BinMatrix::from_fn(syn, syn, |i, j| rows[i].get(k + j));
    let h_r_inv = h_r.inverse().ok_or(WireError::NotSystematic)?;
    let h_l = BinMatrix::from_fn(syn, k, |i, j| rows[i].get(j));
    let p_t = h_r_inv.mul(&h_l); // syn x k
    // Pack P = p_t^T row-major: bit (i, j) of P is p_t(j, i).
    let mut bits = BitVec::zero(k * syn);
    for i in 0..k {
        for j in 0..syn {
            if p_t.get(j, i) {
                bits.set(i * syn + j, true);
            }
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + p.pk_body_bytes());
    write_header(&mut out, &MAGIC_PUBLIC, p.id);
    let packed = bits.to_lsb_bytes();
    debug_assert_eq!(packed.len(), p.pk_body_bytes());
    out.extend_from_slice(&packed);
    Ok(out)
}

/// Decode a public key: the duals are the rows of [P^T | I], the canonical
/// dual basis of the encoded code.
pub fn decode_public_key(bytes: &[u8], params: &ParameterSet) -> Result<PublicKey, WireError> {
    let body = checked_body(bytes, &MAGIC_PUBLIC, "MIRANDPK", params)?;
    if body.len() != params.pk_body_bytes() {
        return Err(WireError::BadLength {
            found: body.len(),
            expected: params.pk_body_bytes(),
        });
    }
    let (k, syn) = (params.code_dim(), params.syn_len());
    let bits = BitVec::from_lsb_bytes(body, k * syn).ok_or(WireError::Malformed)?;
    let duals: Vec<BinMatrix> = (0..syn)
        .map(|i| {
            let mut row = BitVec::zero(k + syn);
            for j in 0..k {
                // (P^T)_{i,j} = P_{j,i}
                if bits.get(j * syn + i) {
                    row.set(j, true);
                }
            }
            row.set(k + i, true);
            BinMatrix::from_rowvec(&row, params.m, params.n)
        })
        .collect();
    Ok(PublicKey {
        params: params.clone(),
        duals,
    })
}

// ---------------------------------------------------------------------------
// Secret keys
// ---------------------------------------------------------------------------

/// Encode a trapdoor: g (n·m bits) ‖ B (m·m bits) ‖ extra (la·mn bits).
pub fn encode_secret_key(sk: &Trapdoor) -> Vec<u8> {
    let p = &sk.params;
    let mut bits = BitVec::zero(0);
    for x in sk.gab.code().g() {
        bits = bits.concat(&x.bits());
    }
    for x in sk.gab.iso().basis() {
        bits = bits.concat(&x.bits());
    }
    for b in &sk.extra {
        bits = bits.concat(&b.to_rowvec());
    }
    let mut out = Vec::with_capacity(HEADER_LEN + p.sk_body_bytes());
    write_header(&mut out, &MAGIC_SECRET, p.id);
    let packed = bits.to_lsb_bytes();
    debug_assert_eq!(packed.len(), p.sk_body_bytes());
    out.extend_from_slice(&packed);
    out
}

/// Decode a trapdoor. The generation-time code bases (cs_basis, a_basis)
/// are not serialized and come back as None; signing does not need them.
pub fn decode_secret_key(bytes: &[u8], params: &ParameterSet) -> Result<Trapdoor, WireError> {
    let body = checked_body(bytes, &MAGIC_SECRET, "MIRANDSK", params)?;
    if body.len() != params.sk_body_bytes() {
        return Err(WireError::BadLength {
            found: body.len(),
            expected: params.sk_body_bytes(),
        });
    }
    let (m, n, la) = (params.m, params.n, params.la);
    let nbits = n * m + m * m + la * m * n;
    let bits = BitVec::from_lsb_bytes(body, nbits).ok_or(WireError::Malformed)?;
    let take = |at: usize, len: usize| BitVec::from_bits((0..len).map(|i| bits.get(at + i)));

    let ctx = FieldContext::new(m);
    let g: Vec<FieldElement> = (0..n)
        .map(|i| FieldElement::from_bitvec(m, &take(i * m, m)))
        .collect();
    let b: Vec<FieldElement> = (0..m)
        .map(|i| FieldElement::from_bitvec(m, &take(n * m + i * m, m)))
        .collect();
    // Reject dependent g / B: GabidulinCode::new asserts independence of g,
    // so check both up front and fail soft.
    let mut ech = Echelon::new(m);
    if !g.iter().all(|x| ech.insert(&x.bits())) {
        return Err(WireError::Malformed);
    }
    let mut ech = Echelon::new(m);
    if !b.iter().all(|x| ech.insert(&x.bits())) {
        return Err(WireError::Malformed);
    }
    let gab = MatrixGabidulin::new(GabidulinCode::new(ctx, g, params.kappa), b);
    let extra: Vec<BinMatrix> = (0..la)
        .map(|i| BinMatrix::from_rowvec(&take(n * m + m * m + i * m * n, m * n), m, n))
        .collect();
    Ok(Trapdoor {
        params: params.clone(),
        gab,
        extra,
        cs_basis: None,
        a_basis: None,
    })
}

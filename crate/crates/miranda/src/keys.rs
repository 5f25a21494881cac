//! Parameter sets and add-and-remove key generation.
//!
//! The hidden code is D = C_s + A (direct sum): C_s is a codimension-ls
//! subcode of a matrix Gabidulin code C, and A is a uniformly random
//! la-dimensional code intersecting C trivially. The public key is a random
//! basis of the dual of D; the trapdoor is the Gabidulin structure (g, B)
//! plus the la matrices completing that dual basis to a basis of C_s's dual
//! — exactly what preimage sampling needs to peel the random summand off a
//! syndrome and hand the remainder to the Gabidulin decoder.
//!
//! Key generation is fully deterministic given (parameters, seed): a single
//! SHAKE-256 stream feeds every draw in a fixed order — g, B, the C_s
//! annihilator, A's basis, the dual change of basis, then the completion
//! draws. If the resulting public code admits no systematic form on the
//! leading coordinates (probability ~0.71 per attempt), the whole key is
//! resampled from the continuing stream, so serialized public keys always
//! encode compactly.

use crate::field::FieldContext;
use crate::gabidulin::MatrixGabidulin;
use crate::matrank::{
    complete_basis, random_complement_code, BinMatrix, BitVec, Echelon, MatrixCode,
};
use crate::xof::{XofStream, KEYGEN_TAG};
use rand::RngCore;
use thiserror::Error;

/// Ways a parameter set can be inconsistent.
#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    /// The scheme is instantiated with square matrices only.
    #[error("n must equal m (got m={m}, n={n})")]
    NotSquare { m: usize, n: usize },
    /// Extension degree outside the supported range.
    #[error("m={0} outside supported range")]
    BadDegree(usize),
    /// kappa must satisfy 0 < kappa <= n with n - kappa even.
    #[error("kappa={kappa} invalid for n={n} (need 0 < kappa <= n, n - kappa even)")]
    BadKappa { n: usize, kappa: usize },
    /// t must be (n - kappa)/2.
    #[error("t={t} but (n - kappa)/2 = {expect}")]
    BadRadius { t: usize, expect: usize },
    /// Dimension bookkeeping must leave at least one syndrome bit.
    #[error("ls={ls}, la={la} leave no syndrome space (code_dim={dim}, mn={mn})")]
    BadDimensions {
        ls: usize,
        la: usize,
        dim: usize,
        mn: usize,
    },
    /// Security parameter must be one of the supported salt lengths.
    #[error("lambda={0} not in {{128, 192, 256}}")]
    BadLambda(usize),
    /// The decoding radius must beat the Gilbert-Varshamov radius of the
    /// public code, otherwise some syndromes have no rank-t preimage.
    #[error("t={t} does not exceed the GV radius {gv:.3} of the public code")]
    BelowGvRadius { t: usize, gv: f64 },
}

/// A named parameter set: field and code shape, add/remove dimensions, salt
/// length, and the registry id used in wire headers.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParameterSet {
    /// Registry name, e.g. "miranda-128a" or "toy-24".
    pub name: String,
    /// Wire-format id (unique per registry entry).
    pub id: u16,
    /// Extension degree (matrix rows).
    pub m: usize,
    /// Code length (matrix columns); always equal to m here.
    pub n: usize,
    /// Gabidulin dimension over GF(2^m).
    pub kappa: usize,
    /// Decoding radius; (n - kappa)/2.
    pub t: usize,
    /// Added random dimensions.
    pub la: usize,
    /// Removed (subcode) dimensions.
    pub ls: usize,
    /// Salt length in bits (also names the security level).
    pub lambda: usize,
}

impl ParameterSet {
    /// GF(2)-dimension of the public code D: kappa*m - ls + la.
    pub fn code_dim(&self) -> usize {
        self.m * self.kappa - self.ls + self.la
    }

    /// Public syndrome length: mn - code_dim = m(n - kappa) + ls - la.
    pub fn syn_len(&self) -> usize {
        self.m * self.n - self.code_dim()
    }

    /// Extended (secret-side) syndrome length: syn_len + la = m(n-kappa)+ls,
    /// the dimension of C_s's dual.
    pub fn ext_syn_len(&self) -> usize {
        self.syn_len() + self.la
    }

    /// Pivot-index width for compact signatures: 9 bits, 10 at lambda=256.
    pub fn idx_bits(&self) -> usize {
        if self.lambda == 256 {
            10
        } else {
            9
        }
    }

    /// Compact signature size: ceil((t(m-t) + idx_bits + lambda)/8) bytes.
    pub fn sig_size_bytes(&self) -> usize {
        (self.t * (self.m - self.t) + self.idx_bits() + self.lambda).div_ceil(8)
    }

    /// Public key body size: ceil(code_dim * syn_len / 8) bytes (the
    /// non-systematic block).
    pub fn pk_body_bytes(&self) -> usize {
        (self.code_dim() * self.syn_len()).div_ceil(8)
    }

    /// Secret key body size: g (nm bits), B (m^2 bits), la completion
    /// matrices (la*mn bits).
    pub fn sk_body_bytes(&self) -> usize {
        (self.n * self.m + self.m * self.m + self.la * self.m * self.n).div_ceil(8)
    }

    /// Gilbert-Varshamov radius estimate of the public code:
    /// m(1 - sqrt(code_dim/m^2)) for n = m.
    pub fn gv_radius(&self) -> f64 {
        crate::analysis::gv_radius(self.m, self.n, self.code_dim())
    }

    /// Check every structural invariant; all other operations assume a
    /// validated set.
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n != self.m {
            return Err(ParamError::NotSquare {
                m: self.m,
                n: self.n,
            });
        }
        if self.m < 2 || self.m > crate::field::MAX_M {
            return Err(ParamError::BadDegree(self.m));
        }
        if self.kappa == 0 || self.kappa > self.n || (self.n - self.kappa) % 2 != 0 {
            return Err(ParamError::BadKappa {
                n: self.n,
                kappa: self.kappa,
            });
        }
        let expect = (self.n - self.kappa) / 2;
        if self.t != expect {
            return Err(ParamError::BadRadius { t: self.t, expect });
        }
        let mn = self.m * self.n;
        if self.ls > self.m * self.kappa || self.code_dim() >= mn {
            return Err(ParamError::BadDimensions {
                ls: self.ls,
                la: self.la,
                dim: self.m * self.kappa - self.ls + self.la,
                mn,
            });
        }
        if !matches!(self.lambda, 128 | 192 | 256) {
            return Err(ParamError::BadLambda(self.lambda));
        }
        let gv = self.gv_radius();
        if (self.t as f64) <= gv {
            return Err(ParamError::BelowGvRadius { t: self.t, gv });
        }
        Ok(())
    }
}

/// Public key: the parameter set and a basis of the dual of the hidden code
/// D = C_s + A (syn_len matrices).
#[derive(Clone, Debug)]
pub struct PublicKey {
    /// Validated parameter set.
    pub params: ParameterSet,
    /// Basis of D's dual under the trace pairing; the syndrome map is
    /// E -> (tr(E duals[i]^T))_i.
    pub duals: Vec<BinMatrix>,
}

/// Secret trapdoor. Only (g, B, extra) are serialized; the code bases are
/// retained in memory at generation time because they make the invariants
/// directly testable, and are absent (None) on keys read back from disk —
/// they cannot be soundly reconstructed from the serialized fields and
/// nothing in the signing path needs them.
#[derive(Clone, Debug)]
pub struct Trapdoor {
    /// Validated parameter set.
    pub params: ParameterSet,
    /// The hidden Gabidulin structure: evaluation points g and basis B.
    pub gab: MatrixGabidulin,
    /// la matrices completing pk.duals to a basis of C_s's dual; peeling a
    /// guessed la-bit extension off a syndrome happens against these.
    pub extra: Vec<BinMatrix>,
    /// The subcode C_s (generation-time only; for invariant checks).
    pub cs_basis: Option<MatrixCode>,
    /// The random summand A (generation-time only; for invariant checks).
    pub a_basis: Option<MatrixCode>,
}

/// The add-and-remove construction on an arbitrary matrix code: pick a
/// uniform codimension-ls subcode C_s of C and a uniform la-dimensional
/// complement A with A intersecting C trivially; return (D = C_s + A, C_s,
/// A). Panics when the dimensions do not fit the ambient space.
pub fn add_remove<R: RngCore + ?Sized>(
    c: &MatrixCode,
    la: usize,
    ls: usize,
    rng: &mut R,
) -> (MatrixCode, MatrixCode, MatrixCode) {
    assert!(ls <= c.dim(), "cannot remove more dimensions than exist");
    assert!(
        c.dim() - ls + la <= c.m() * c.n(),
        "dimension overflow: D would not fit the ambient space"
    );
    let cs = crate::matrank::random_subcode(c, ls, rng);
    let a = random_complement_code(c, la, rng);
    let mut basis = cs.basis().to_vec();
    basis.extend(a.basis().iter().cloned());
    let d = MatrixCode::new(c.m(), c.n(), basis);
    (d, cs, a)
}

/// Deterministic key generation from a seed.
///
/// One SHAKE-256 stream keyed by (params.name, seed) feeds all draws, in
/// this order:
///
/// 1. evaluation points g (a uniform basis of GF(2^m), draw-and-retry);
/// 2. the coordinate basis B (same sampler);
/// 3. the C_s annihilator: a uniform full-row-rank ls x kappa*m matrix L
///    (C_s = codewords whose Gabidulin coefficient vector lies in ker L —
///    a uniform codimension-ls subcode, since every subcode corresponds to
///    exactly |GL_ls| choices of L);
/// 4. A's basis: uniform m x n matrices, each kept iff independent of C
///    plus those already kept;
/// 5. the dual change of basis: a uniform nonsingular syn_len matrix;
/// 6. the completion draws: uniform elements of C_s's dual, kept iff
///    independent.
///
/// If the public code has no systematic form on its leading code_dim
/// coordinates the whole key is resampled from the continuing stream
/// (expected ~3.5 attempts).
pub fn keygen(params: &ParameterSet, seed: &[u8]) -> (PublicKey, Trapdoor) {
    params.validate().expect("parameter set must be valid");
    let mut stream = XofStream::new(KEYGEN_TAG, &[params.name.as_bytes(), seed]);
    let ctx = FieldContext::new(params.m);
    let (m, n) = (params.m, params.n);
    let mn = m * n;
    let k_pub = params.code_dim();
    let syn = params.syn_len();

    loop {
        // Lines 1-3: the Gabidulin code and its matrix form (dimension
        // kappa*m by construction).
        let gab = MatrixGabidulin::sample(&ctx, params.kappa, &mut stream);
        let c_mat = gab.matbasis();
        let k_c = c_mat.dim();

        // Line 4: C_s, via a uniform annihilator on coefficient space. The
        // draw-and-retry rank check is on an ls x k_c matrix — tiny — where
        // checking a (k_c - ls) x k_c coefficient matrix would be quadratic
        // in the key size.
        let cs = if params.ls == 0 {
            c_mat.clone()
        } else {
            let l = loop {
                let cand = BinMatrix::random(params.ls, k_c, &mut stream);
                if cand.rank() == params.ls {
                    break cand;
                }
            };
            let basis: Vec<BinMatrix> = crate::matrank::kernel_basis(&l)
                .iter()
                .map(|coeffs| c_mat.combine(coeffs))
                .collect();
            MatrixCode::new_unchecked(m, n, basis)
        };

        // Line 5: A avoiding all of C (not just C_s).
        let a = random_complement_code(c_mat, params.la, &mut stream);

        // Generator of D = C_s + A; full rank k_pub because A avoids C and
        // C_s sits inside C.
        let mut gen_rows: Vec<BitVec> = cs.basis().iter().map(|b| b.to_rowvec()).collect();
        gen_rows.extend(a.basis().iter().map(|b| b.to_rowvec()));
        let gen = BinMatrix::from_rows(&gen_rows);

        // One elimination serves two purposes: the kernel is D's dual, and
        // the pivot positions decide systematic encodability.
        let mut reduced = gen.clone();
        let pivots = reduced.rref();
        assert_eq!(pivots.len(), k_pub, "D's generator must have full rank");
        if pivots.iter().enumerate().any(|(i, p)| i != *p) {
            // No systematic form on the leading coordinates: resample the
            // whole key from the continuing stream.
            continue;
        }
        let dual_canonical = kernel_from_rref(&reduced, &pivots, mn);
        debug_assert_eq!(dual_canonical.len(), syn);

        // Line 6: randomize the dual basis with a uniform nonsingular
        // change of basis, hiding the canonical kernel structure.
        let tmat = BinMatrix::random_nonsingular(syn, &mut stream);
        let h = BinMatrix::from_rows(&dual_canonical);
        let randomized = tmat.mul(&h);
        let duals: Vec<BinMatrix> = (0..syn)
            .map(|i| BinMatrix::from_rowvec(&randomized.row(i), m, n))
            .collect();

        // Line 7: complete the duals to a basis of C_s's dual with uniform
        // draws from that dual.
        let cs_perp_basis: Vec<BinMatrix> = {
            let flat = cs.flattened();
            crate::matrank::kernel_basis(&flat)
                .iter()
                .map(|v| BinMatrix::from_rowvec(v, m, n))
                .collect()
        };
        debug_assert_eq!(cs_perp_basis.len(), params.ext_syn_len());
        let duals_code = MatrixCode::new_unchecked(m, n, duals.clone());
        let cs_perp = MatrixCode::new_unchecked(m, n, cs_perp_basis);
        let extra = complete_basis(&duals_code, &cs_perp, &mut stream);
        debug_assert_eq!(extra.len(), params.la);

        let pk = PublicKey {
            params: params.clone(),
            duals,
        };
        let sk = Trapdoor {
            params: params.clone(),
            gab,
            extra,
            cs_basis: Some(cs),
            a_basis: Some(a),
        };
        return (pk, sk);
    }
}

/// Kernel basis read off an already-reduced matrix (same construction as
/// `matrank::kernel_basis`, reusing the elimination done for the
/// systematic-form check).
fn kernel_from_rref(reduced: &BinMatrix, pivots: &[usize], cols: usize) -> Vec<BitVec> {
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::with_capacity(cols - pivots.len());
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = BitVec::zero(cols);
        v.set(free, true);
        for (row, &pc) in pivots.iter().enumerate() {
            if pc < free && reduced.get(row, free) {
                v.set(pc, true);
            }
        }
        out.push(v);
    }
    out
}

/// Joint span check used by tests and the signer: duals plus extra must
/// form a basis of C_s's dual.
pub fn extended_dual_rank(pk: &PublicKey, sk: &Trapdoor) -> usize {
    let mut ech = Echelon::new(pk.params.m * pk.params.n);
    for b in pk.duals.iter().chain(sk.extra.iter()) {
        ech.insert(&b.to_rowvec());
    }
    ech.dim()
}

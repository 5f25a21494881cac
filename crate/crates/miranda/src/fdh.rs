//! Full-domain-hash signing: hash to a syndrome, sample a rank-t preimage
//! with the trapdoor, verify against the public duals.
//!
//! The sampler solves the *extended* syndrome system: the public syndrome s
//! is concatenated with a uniformly random guess for the la missing
//! coordinates (the pairing against the trapdoor's completion matrices),
//! a particular solution Y of the extended system is decoded against the
//! hidden Gabidulin code, and the result is accepted only if its extended
//! syndrome matches the guess exactly. Guesses are drawn independently and
//! uniformly — never enumerated — so a returned preimage is a uniform
//! sample from the rank-t preimages of s, independent of the trapdoor:
//! signatures leak nothing about the secret key.

use crate::analysis;
use crate::keys::{ParameterSet, PublicKey, Trapdoor};
use crate::matrank::{solve, syndrome, BinMatrix, BitVec};
use crate::xof::{XofStream, HASH_TAG};
use rand::RngCore;
use thiserror::Error;

/// Salts tried before signing gives up. With honest parameters each salt
/// fails with probability at most e^-256, so exhaustion signals a broken
/// key or parameter set rather than bad luck.
pub const MAX_SALTS: u32 = 64;

/// Hash a (salt, message) pair into the public syndrome space.
pub fn hash_to_syndrome(params: &ParameterSet, salt: &[u8], msg: &[u8]) -> BitVec {
    debug_assert_eq!(salt.len(), params.lambda / 8, "salt must be lambda bits");
    XofStream::new(HASH_TAG, &[params.name.as_bytes(), salt, msg]).bits(params.syn_len())
}

/// A raw signature: the rank-t preimage and the salt that selected the
/// syndrome. The wire format stores only the column support plus the
/// coefficient-recovery index; this in-memory form keeps the whole matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    /// Salt, lambda/8 bytes.
    pub salt: Vec<u8>,
    /// The preimage: an m x n matrix of rank at most t.
    pub e: BinMatrix,
}

/// A successful preimage draw and the number of guesses it consumed.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    /// The sampled preimage, rank at most t, exact extended syndrome.
    pub preimage: BinMatrix,
    /// Decoding trials used, starting at 1.
    pub trials: u64,
}

/// A signature plus the work it took — salt count and total decoding
/// trials — for trial-statistics audits.
#[derive(Clone, Debug)]
pub struct SignReport {
    /// The signature.
    pub sig: Signature,
    /// Salts consumed (the last one succeeded).
    pub salts_used: u32,
    /// Decoding trials summed over all salts.
    pub trials: u64,
}

/// Why signing failed.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignError {
    /// Every salt exhausted its trial budget.
    #[error("no preimage found after {salts} salts ({trials} trials)")]
    Exhausted { salts: u32, trials: u64 },
}

/// Why a signature was rejected.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RejectReason {
    /// Salt or matrix dimensions disagree with the parameter set.
    #[error("signature shape does not match the parameter set")]
    WrongShape,
    /// The preimage's rank exceeds the decoding radius.
    #[error("preimage rank {rank} exceeds the bound t")]
    RankExceedsBound { rank: usize },
    /// The syndrome of the preimage does not match the message hash.
    #[error("syndrome does not match the message hash")]
    WrongSyndrome,
}

/// Trapdoor preimage sampler. Construction does the one-time work — the
/// elimination of the extended dual system — so repeated signing only pays
/// per-trial costs (one matrix-vector product and one decode).
pub struct PreimageSampler<'a> {
    pk: &'a PublicKey,
    sk: &'a Trapdoor,
    /// Pivot columns of the extended dual matrix's RREF; the particular
    /// solution is supported on these.
    pivots: Vec<usize>,
    /// U with U * H_ext in RREF: row i of the transformed right-hand side
    /// is the value of the particular solution at pivots[i].
    transform: BinMatrix,
    /// Trials per salt before resalting: 2^8 * ceil(1/density), or a single
    /// trial when la = 0 (the guess space is empty, so retrying a salt
    /// cannot help a deterministic decoder).
    budget: u64,
}

impl<'a> PreimageSampler<'a> {
    /// Precompute the solver for a key pair.
    pub fn new(pk: &'a PublicKey, sk: &'a Trapdoor) -> Self {
        let p = &pk.params;
        let (m, n) = (p.m, p.n);
        let mn = m * n;
        let ext = p.ext_syn_len();
        let rows: Vec<BitVec> = pk
            .duals
            .iter()
            .chain(sk.extra.iter())
            .map(|b| b.to_rowvec())
            .collect();
        assert_eq!(rows.len(), ext, "duals + extra must have ext_syn_len rows");
        // Reduce [H_ext | I]: the right block accumulates the transform U,
        // and because H_ext has full row rank every pivot lands in the left
        // block.
        let mut aug = BinMatrix::from_fn(ext, mn + ext, |i, j| {
            if j < mn {
                rows[i].get(j)
            } else {
                j - mn == i
            }
        });
        let pivots = aug.rref();
        assert!(
            pivots.len() == ext && pivots.iter().all(|&c| c < mn),
            "extended dual basis must be linearly independent"
        );
        let transform = BinMatrix::from_fn(ext, ext, |i, j| aug.get(i, mn + j));
        let budget = if p.la == 0 {
            1
        } else {
            (analysis::expected_trials(p).ceil().max(1.0) as u64).saturating_mul(256)
        };
        PreimageSampler {
            pk,
            sk,
            pivots,
            transform,
            budget,
        }
    }

    /// Trial budget per salt.
    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Draw a uniform rank-t preimage of the public syndrome `s`, or None
    /// if the per-salt budget runs out.
    ///
    /// Each trial: guess the la extension bits uniformly, solve the
    /// extended system for a particular solution Y, decode Y against the
    /// hidden Gabidulin code, and accept only on exact extended-syndrome
    /// match. The match is not redundant when ls > 0: the decoder works
    /// modulo the full Gabidulin code, so it can return a word whose coset
    /// modulo the subcode — and hence whose syndrome — is wrong.
    pub fn sample_preimage<R: RngCore + ?Sized>(
        &self,
        s: &BitVec,
        rng: &mut R,
    ) -> Option<SampleOutcome> {
        let p = &self.pk.params;
        assert_eq!(s.len(), p.syn_len(), "syndrome length mismatch");
        for trial in 1..=self.budget {
            let guess = BitVec::random(p.la, rng);
            let rhs = s.concat(&guess);
            let transformed = self.transform.mul_vec(&rhs);
            let mut y = BitVec::zero(p.m * p.n);
            for (i, &pc) in self.pivots.iter().enumerate() {
                if transformed.get(i) {
                    y.set(pc, true);
                }
            }
            let ymat = BinMatrix::from_rowvec(&y, p.m, p.n);
            debug_assert_eq!(syndrome(&ymat, &self.pk.duals), *s);
            debug_assert_eq!(syndrome(&ymat, &self.sk.extra), guess);
            if let Some(e) = self.sk.gab.decode_matrix(&ymat) {
                if syndrome(&e, &self.pk.duals) == *s && syndrome(&e, &self.sk.extra) == guess {
                    return Some(SampleOutcome { preimage: e, trials: trial });
                }
            }
        }
        None
    }

    /// Sign a message: fresh uniform salt, hash, preimage; resalt when a
    /// budget is exhausted, up to [`MAX_SALTS`].
    pub fn sign<R: RngCore + ?Sized>(
        &self,
        msg: &[u8],
        rng: &mut R,
    ) -> Result<SignReport, SignError> {
        let p = &self.pk.params;
        let mut trials = 0u64;
        for attempt in 1..=MAX_SALTS {
            let mut salt = vec![0u8; p.lambda / 8];
            rng.fill_bytes(&mut salt);
            let s = hash_to_syndrome(p, &salt, msg);
            match self.sample_preimage(&s, rng) {
                Some(out) => {
                    return Ok(SignReport {
                        sig: Signature {
                            salt,
                            e: out.preimage,
                        },
                        salts_used: attempt,
                        trials: trials + out.trials,
                    });
                }
                None => trials += self.budget,
            }
        }
        Err(SignError::Exhausted {
            salts: MAX_SALTS,
            trials,
        })
    }
}

/// Verify a raw signature: shape, rank bound, then syndrome match. The
/// reject reasons are distinct so misuse (rank inflation) and forgery
/// (syndrome mismatch) are distinguishable in tests and audits.
pub fn verify(pk: &PublicKey, msg: &[u8], sig: &Signature) -> Result<(), RejectReason> {
    let p = &pk.params;
    if sig.salt.len() != p.lambda / 8 || sig.e.rows() != p.m || sig.e.cols() != p.n {
        return Err(RejectReason::WrongShape);
    }
    let rank = sig.e.rank();
    if rank > p.t {
        return Err(RejectReason::RankExceedsBound { rank });
    }
    let s = hash_to_syndrome(p, &sig.salt, msg);
    if syndrome(&sig.e, &pk.duals) != s {
        return Err(RejectReason::WrongSyndrome);
    }
    Ok(())
}

/// Verify from the column support alone (the wire form): accept iff some
/// preimage with that support matches the hash.
///
/// Writing E = S W with S the m x t support and W an unknown t x n
/// coefficient matrix, each syndrome bit is linear in W:
/// tr(S W B^T) = tr(W B^T S) = <W, S^T B>, so the verifier solves a
/// syn_len x (t n) system and accepts iff it is consistent. Any solution
/// has rank at most t by construction, so no separate rank check is
/// needed.
pub fn verify_compact(
    pk: &PublicKey,
    msg: &[u8],
    salt: &[u8],
    support: &BinMatrix,
) -> Result<(), RejectReason> {
    let p = &pk.params;
    if salt.len() != p.lambda / 8 || support.rows() != p.m || support.cols() != p.t {
        return Err(RejectReason::WrongShape);
    }
    let s = hash_to_syndrome(p, salt, msg);
    let st = support.transpose();
    let rows: Vec<BitVec> = pk.duals.iter().map(|b| st.mul(b).to_rowvec()).collect();
    let system = BinMatrix::from_rows(&rows);
    match solve(&system, &s) {
        Some(_) => Ok(()),
        None => Err(RejectReason::WrongSyndrome),
    }
}

//! Deterministic byte streams from SHAKE-256, used wherever the scheme
//! needs reproducible randomness: key generation from a seed, hashing
//! messages to syndromes, and the pivot-set table.
//!
//! Domain separation: every stream absorbs a tag string and a list of parts,
//! each length-prefixed (u64 little-endian) so distinct part lists can never
//! collide byte-wise.

use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake256, Shake256Reader};

/// Stream tag for key generation.
pub const KEYGEN_TAG: &str = "miranda.v1.keygen";
/// Stream tag for hashing messages to syndromes.
pub const HASH_TAG: &str = "miranda.v1.msg-hash";
/// Stream tag for the signature pivot-set table.
pub const PIVOT_TAG: &str = "miranda.v1.pivot-table";

/// An unbounded deterministic byte stream; implements [`RngCore`] so the
/// sampling routines can consume it like any other randomness source.
pub struct XofStream {
    reader: Shake256Reader,
}

impl XofStream {
    /// Absorb `tag` and the length-prefixed `parts`, then switch to
    /// squeezing.
    pub fn new(tag: &str, parts: &[&[u8]]) -> Self {
        let mut hasher = Shake256::default();
        hasher.update(&(tag.len() as u64).to_le_bytes());
        hasher.update(tag.as_bytes());
        for part in parts {
            hasher.update(&(part.len() as u64).to_le_bytes());
            hasher.update(part);
        }
        XofStream {
            reader: hasher.finalize_xof(),
        }
    }

    /// Next `len` bits packed LSB-first per byte into a bit vector.
    pub fn bits(&mut self, len: usize) -> crate::matrank::BitVec {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        self.reader.read(&mut bytes);
        crate::matrank::BitVec::from_bits(
            (0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1),
        )
    }
}

impl RngCore for XofStream {
    fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.reader.read(&mut b);
        u32::from_le_bytes(b)
    }

    fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.reader.read(&mut b);
        u64::from_le_bytes(b)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.reader.read(dest);
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.reader.read(dest);
        Ok(())
    }
}

impl CryptoRng for XofStream {}

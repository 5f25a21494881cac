//! Miranda: a rank-metric hash-and-sign signature scheme.
//!
//! The scheme works in the space of m x n matrices over GF(2) equipped with
//! the rank metric. A public key is a random-looking basis of the dual of a
//! hidden matrix code built from a Gabidulin code by the add-and-remove
//! construction (remove ls dimensions, add la random ones). The secret
//! trapdoor turns syndrome decoding of that public code into bounded-rank
//! decoding of the hidden Gabidulin code, which gives a full-domain-hash
//! signature: a signature on a message is a low-rank matrix preimage of the
//! message's salted hash under the public syndrome map.
//!
//! # Security warning
//!
//! **Do not use this crate to protect data.** It is a research-grade
//! implementation built for studying the construction: it is not audited,
//! makes no constant-time claims, and ships its own cryptanalysis toolbox
//! (`cryptanalysis`) for attacking toy parameters.
//!
//! # Layout
//!
//! * [`field`]: GF(2^m) arithmetic and q-polynomials (linearized polynomials).
//! * [`matrank`]: bit-packed GF(2) matrices, matrix codes, rank and syndromes.
//! * [`gabidulin`]: Gabidulin codes, their matrix-code form, bounded-rank decoding.
//! * [`keys`]: parameter sets, add-and-remove key generation, trapdoors.
//! * [`fdh`]: hashing to syndromes, preimage sampling, sign and verify.
//! * [`wire`]: byte-exact encodings for keys and signatures.
//! * [`analysis`]: counting formulas, densities, sizes, attack-cost estimates,
//!   the parameter registry, and statistical audits.
//! * [`cryptanalysis`]: low-rank codeword search, a distinguisher, and the
//!   structural key-recovery attack, all at desk scale.

pub mod analysis;
pub mod cryptanalysis;
pub mod fdh;
pub mod field;
pub mod gabidulin;
pub mod keys;
pub mod matrank;
pub mod wire;
pub mod xof;

pub use cryptanalysis::{
    algebra_closure, collinearity_recover, distinguish, find_low_rank, same_rowspace_mate,
    structural_attack, AlgebraClosure, AttackError, Distinguish, DistinguishReport, SearchHit,
    SearchProfile, StructuralRecovery,
};
pub use fdh::{hash_to_syndrome, verify, verify_compact, PreimageSampler, Signature};
pub use field::{FieldContext, FieldElement, QPolynomial};
pub use gabidulin::{GabidulinCode, MatrixGabidulin};
pub use keys::{keygen, ParameterSet, PublicKey, Trapdoor};
pub use matrank::{BinMatrix, BitVec, MatrixCode};
pub use wire::{
    decode_public_key, decode_secret_key, decode_signature, encode_public_key, encode_secret_key,
    encode_signature, peek_header, WireError,
};
pub use xof::XofStream;

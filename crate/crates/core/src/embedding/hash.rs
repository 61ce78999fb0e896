use rayon::prelude::*;

use super::{normalize, Embedder, Role};
use crate::error::{Error, Result};
use crate::text::trigrams;

pub(crate) const MIN_DIM: usize = 8;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

// splitmix64 finalizer; spreads FNV's weak low bits before the modulo.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn seeded_hash(seed: u64, bytes: &[u8]) -> u64 {
    mix(fnv1a(fnv1a(FNV_OFFSET, &seed.to_le_bytes()), bytes))
}

/// Signed feature hashing of boundary-padded lowercase character trigrams,
/// L2-normalized. A pure function of `(text, dim, seed)`; hashing works on
/// UTF-8 bytes with fixed-width little-endian seeds, so output is identical
/// across platforms.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Result<Vec<f32>> {
    if dim < MIN_DIM {
        return Err(Error::input(format!(
            "hash embedding dim must be at least {MIN_DIM}, got {dim}"
        )));
    }
    let grams = trigrams(text);
    if grams.is_empty() {
        return Err(Error::input("cannot embed blank text"));
    }
    let mut acc = vec![0i64; dim];
    let mut buf = [0u8; 12];
    for gram in &grams {
        let mut len = 0;
        for c in gram {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        let h = seeded_hash(seed, &buf[..len]);
        let bucket = (h % dim as u64) as usize;
        acc[bucket] += if h >> 63 == 0 { 1 } else { -1 };
    }
    let mut v: Vec<f32> = acc.into_iter().map(|c| c as f32).collect();
    if !normalize(&mut v) {
        // Every gram cancelled out; fall back to a single whole-text bucket.
        let h = seeded_hash(seed, text.trim().to_lowercase().as_bytes());
        v[(h % dim as u64) as usize] = 1.0;
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(Error::input(format!(
                "hash embedding dim must be at least {MIN_DIM}, got {dim}"
            )));
        }
        Ok(HashEmbedder { dim, seed })
    }

    pub fn embed_one(&self, text: &str) -> Result<Vec<f32>> {
        hash_embed(text, self.dim, self.seed)
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, texts: &[String], _role: Role, _prompt: &str) -> Result<Vec<Vec<f32>>> {
        texts.par_iter().map(|t| self.embed_one(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{dot, norm};

    fn cosine(a: &str, b: &str, dim: usize, seed: u64) -> f32 {
        dot(
            &hash_embed(a, dim, seed).unwrap(),
            &hash_embed(b, dim, seed).unwrap(),
        )
    }

    #[test]
    fn deterministic() {
        let a = hash_embed("abc", 64, 7).unwrap();
        let b = hash_embed("abc", 64, 7).unwrap();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn self_similarity_and_norm() {
        let t = "Seismic resistance of industrial buildings";
        assert!((cosine(t, t, 64, 7) - 1.0).abs() < 1e-6);
        assert!((norm(&hash_embed(t, 64, 7).unwrap()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shared_trigrams_raise_similarity() {
        // Shared padded trigram counts (enumerated by a standalone script):
        // engineering/safety share 10, engineering/music share 0.
        let base = "earthquake engineering";
        let near = cosine(base, "earthquake safety", 256, 7);
        let far = cosine(base, "baroque music", 256, 7);
        assert!(near > far, "near {near} far {far}");
    }

    #[test]
    fn seed_changes_output() {
        assert_ne!(
            hash_embed("abc", 64, 7).unwrap(),
            hash_embed("abc", 64, 8).unwrap()
        );
    }

    #[test]
    fn pinned_hash_values() {
        // Regression pin for cross-platform stability of the bucket hash.
        assert_eq!(seeded_hash(0, b""), mix(fnv1a(FNV_OFFSET, &[0; 8])));
        assert_eq!(fnv1a(FNV_OFFSET, b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn rejects_blank_and_tiny_dim() {
        assert!(hash_embed("   ", 64, 7).is_err());
        assert!(hash_embed("abc", 4, 7).is_err());
    }
}

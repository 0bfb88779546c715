//! Fiat-Shamir transcript over SHA3-256.
//!
//! The state is a running 32-byte digest. Every absorb hashes
//! `state || label || len || bytes`; every squeeze derives 64 bytes from the
//! state and a counter, reduces them mod p, and absorbs the challenge back.

use sha3::{Digest, Sha3_256};

use crate::field::Fr;

/// Tag recorded in proof headers for the transcript hash.
pub const HASH_TAG_SHA3_256: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptEvent {
    Absorb { label: &'static str, len: usize },
    Challenge { label: &'static str, value: Fr },
}

#[derive(Debug, Clone)]
pub struct Transcript {
    state: [u8; 32],
    counter: u64,
    log: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn new(domain: &[u8]) -> Self {
        let mut t = Self {
            state: [0; 32],
            counter: 0,
            log: Vec::new(),
        };
        t.absorb_bytes("domain", domain);
        t
    }

    pub fn absorb_bytes(&mut self, label: &'static str, bytes: &[u8]) {
        let mut h = Sha3_256::new();
        h.update(self.state);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
        self.state = h.finalize().into();
        self.log.push(TranscriptEvent::Absorb {
            label,
            len: bytes.len(),
        });
    }

    pub fn absorb_u64(&mut self, label: &'static str, v: u64) {
        self.absorb_bytes(label, &v.to_le_bytes());
    }

    pub fn absorb_field(&mut self, label: &'static str, v: &Fr) {
        self.absorb_bytes(label, &v.to_bytes_le());
    }

    pub fn absorb_fields(&mut self, label: &'static str, vs: &[Fr]) {
        let bytes: Vec<u8> = vs.iter().flat_map(|v| v.to_bytes_le()).collect();
        self.absorb_bytes(label, &bytes);
    }

    /// Derives a challenge in `[0, p)` and absorbs it.
    pub fn challenge(&mut self, label: &'static str) -> Fr {
        let mut wide = [0u8; 64];
        for (i, half) in wide.chunks_exact_mut(32).enumerate() {
            let mut h = Sha3_256::new();
            h.update(self.state);
            h.update(b"challenge");
            h.update(self.counter.to_le_bytes());
            h.update([i as u8]);
            half.copy_from_slice(&h.finalize());
        }
        self.counter += 1;
        let value = Fr::from_uniform_bytes(&wide);
        self.absorb_bytes(label, &value.to_bytes_le());
        // replace the absorb entry with a challenge entry
        self.log.pop();
        self.log.push(TranscriptEvent::Challenge { label, value });
        value
    }

    pub fn challenges(&mut self, label: &'static str, n: usize) -> Vec<Fr> {
        (0..n).map(|_| self.challenge(label)).collect()
    }

    pub fn log(&self) -> &[TranscriptEvent] {
        &self.log
    }

    pub fn state(&self) -> [u8; 32] {
        self.state
    }
}

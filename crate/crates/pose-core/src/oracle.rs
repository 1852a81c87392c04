//! Keyed random-oracle abstraction used by every graph-labelling protocol.
//!
//! A [`HashOracle`] is instantiated once per session and per logical actor
//! from a session seed. Its output at a given input is a pure function of
//! `(seed, word_bits, input)`, so transcripts replay bit-for-bit. The oracle
//! counts every query it serves and can enforce a hard call budget: once the
//! budget is reached, no further label bits are ever returned.

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Domain-separation tag prepended to every oracle evaluation.
const ORACLE_TAG: &[u8] = b"pose/oracle/v1";
/// Tag for counter-mode expansion blocks when `word_bits > 256`.
const EXPAND_TAG: &[u8] = b"pose/expand/v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("word_bits must be a positive multiple of 8, got {0}")]
    InvalidWordBits(u32),
    #[error("oracle call budget exhausted")]
    BudgetExhausted,
}

/// A `word_bits`-wide label word, the unit the protocols store and exchange.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Label(Vec<u8>);

impl Label {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Label(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn bits(&self) -> usize {
        self.0.len() * 8
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }
}

/// Identity of an oracle instance: the session seed plus the output width.
///
/// Two instances built from the same key compute the same function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleKey {
    seed: Vec<u8>,
    word_bits: u32,
}

impl OracleKey {
    pub fn new(seed: &[u8], word_bits: u32) -> Result<Self, OracleError> {
        if word_bits == 0 || word_bits % 8 != 0 {
            return Err(OracleError::InvalidWordBits(word_bits));
        }
        Ok(OracleKey {
            seed: seed.to_vec(),
            word_bits,
        })
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn word_bytes(&self) -> usize {
        self.word_bits as usize / 8
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    /// Evaluate the oracle function without any session state.
    fn evaluate(&self, input: &[u8]) -> Label {
        let mut hasher = Sha256::new();
        hasher.update(ORACLE_TAG);
        hasher.update((self.seed.len() as u64).to_be_bytes());
        hasher.update(&self.seed);
        hasher.update(input);
        let digest = hasher.finalize();

        let want = self.word_bytes();
        if want <= digest.len() {
            return Label(digest[..want].to_vec());
        }
        // Wider words: expand the digest in counter mode.
        let mut out = Vec::with_capacity(want);
        let mut counter = 0u32;
        while out.len() < want {
            let mut h = Sha256::new();
            h.update(EXPAND_TAG);
            h.update(digest);
            h.update(counter.to_be_bytes());
            let block = h.finalize();
            let take = (want - out.len()).min(block.len());
            out.extend_from_slice(&block[..take]);
            counter += 1;
        }
        Label(out)
    }
}

/// Per-session oracle instance with a monotone call counter and an optional
/// hard budget. Repeated queries on the same input are counted: the security
/// experiment charges calls, not distinct inputs.
#[derive(Debug, Clone)]
pub struct HashOracle {
    key: OracleKey,
    calls_made: u64,
    budget: Option<u64>,
}

impl HashOracle {
    pub fn new(seed: &[u8], word_bits: u32, budget: Option<u64>) -> Result<Self, OracleError> {
        Ok(HashOracle {
            key: OracleKey::new(seed, word_bits)?,
            calls_made: 0,
            budget,
        })
    }

    pub fn key(&self) -> &OracleKey {
        &self.key
    }

    pub fn word_bits(&self) -> u32 {
        self.key.word_bits
    }

    pub fn word_bytes(&self) -> usize {
        self.key.word_bytes()
    }

    pub fn calls_made(&self) -> u64 {
        self.calls_made
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn remaining_budget(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.calls_made))
    }

    /// A fresh instance over the same function with its own counter/budget.
    pub fn fork(&self, budget: Option<u64>) -> HashOracle {
        HashOracle {
            key: self.key.clone(),
            calls_made: 0,
            budget,
        }
    }

    pub fn query(&mut self, input: &[u8]) -> Result<Label, OracleError> {
        if let Some(budget) = self.budget {
            if self.calls_made >= budget {
                return Err(OracleError::BudgetExhausted);
            }
        }
        self.calls_made += 1;
        Ok(self.key.evaluate(input))
    }
}

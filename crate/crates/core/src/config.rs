//! Resource guards shared by every bounded procedure.
//!
//! Exceeding a guard is always a clean [`Error::GuardExceeded`], never a
//! silent truncation. All limits are plain data so callers (and the CLI's
//! `--config` file) can raise or lower them.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guards {
    /// Largest structure accepted by first-order type computation.
    pub fo_max_size: usize,
    pub fo_max_rank: usize,
    /// Largest structure accepted by monadic second-order type computation.
    pub mso_max_size: usize,
    pub mso_max_rank: usize,
    /// EF-game solver limits.
    pub ef_max_size: usize,
    pub ef_fo_max_rank: usize,
    pub ef_mso_max_rank: usize,
    /// Maximum number of linear (or sibling) orders enumerated per structure.
    pub order_cap: u64,
    /// Maximum total number of relation bits when enumerating structures.
    pub enum_max_bits: u32,
    /// Maximum |Q|^r state sequences explored by Parikh decomposition.
    pub parikh_max_sequences: u64,
    /// Maximum structure size for evaluating set quantifiers.
    pub eval_max_set_size: usize,
    /// Tree-automaton synthesis limits.
    pub synth_max_alphabet: usize,
    pub synth_max_rank: usize,
    pub synth_max_nodes: usize,
    /// Feferman-Vaught table limits.
    pub fv_max_rank: usize,
    pub fv_product_max_bound: usize,
    pub fv_union_max_bound: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            fo_max_size: 8,
            fo_max_rank: 4,
            mso_max_size: 8,
            mso_max_rank: 3,
            ef_max_size: 6,
            ef_fo_max_rank: 4,
            ef_mso_max_rank: 3,
            order_cap: 3_628_800,
            enum_max_bits: 30,
            parikh_max_sequences: 20_736,
            eval_max_set_size: 16,
            synth_max_alphabet: 2,
            synth_max_rank: 1,
            synth_max_nodes: 5,
            fv_max_rank: 2,
            fv_product_max_bound: 3,
            fv_union_max_bound: 4,
        }
    }
}

impl Guards {
    /// Guards with every limit effectively lifted except the structural ones
    /// that protect memory (set bitmasks, enumeration bits).
    pub fn permissive() -> Self {
        Guards {
            fo_max_size: 16,
            fo_max_rank: 8,
            mso_max_size: 12,
            mso_max_rank: 8,
            ef_max_size: 16,
            ef_fo_max_rank: 8,
            ef_mso_max_rank: 8,
            order_cap: 3_628_800 * 11,
            enum_max_bits: 30,
            parikh_max_sequences: 1 << 24,
            eval_max_set_size: 20,
            synth_max_alphabet: 4,
            synth_max_rank: 4,
            synth_max_nodes: 8,
            fv_max_rank: 3,
            fv_product_max_bound: 4,
            fv_union_max_bound: 6,
        }
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::InvalidArgument(format!("bad value `{value}` for `{key}`"));
        let n: u64 = value.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::InvalidArgument(format!("`{key}` must be positive")));
        }
        let as_usize = n as usize;
        match key.trim() {
            "fo_max_size" => self.fo_max_size = as_usize,
            "fo_max_rank" => self.fo_max_rank = as_usize,
            "mso_max_size" => self.mso_max_size = as_usize,
            "mso_max_rank" => self.mso_max_rank = as_usize,
            "ef_max_size" => self.ef_max_size = as_usize,
            "ef_fo_max_rank" => self.ef_fo_max_rank = as_usize,
            "ef_mso_max_rank" => self.ef_mso_max_rank = as_usize,
            "order_cap" => self.order_cap = n,
            "enum_max_bits" => self.enum_max_bits = n.min(62) as u32,
            "parikh_max_sequences" => self.parikh_max_sequences = n,
            "eval_max_set_size" => self.eval_max_set_size = as_usize.min(63),
            "synth_max_alphabet" => self.synth_max_alphabet = as_usize,
            "synth_max_rank" => self.synth_max_rank = as_usize,
            "synth_max_nodes" => self.synth_max_nodes = as_usize,
            "fv_max_rank" => self.fv_max_rank = as_usize,
            "fv_product_max_bound" => self.fv_product_max_bound = as_usize,
            "fv_union_max_bound" => self.fv_union_max_bound = as_usize,
            other => return Err(Error::InvalidArgument(format!("unknown guard `{other}`"))),
        }
        Ok(())
    }

    /// Parses a `key=value` file (blank lines and `#` comments ignored).
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut guards = Guards::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", i + 1, 1, "expected key=value"))?;
            guards.set(k, v)?;
        }
        Ok(guards)
    }

    /// Deterministic `key=value` listing, used for report config echoes.
    pub fn entries(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("fo_max_size", self.fo_max_size as u64),
            ("fo_max_rank", self.fo_max_rank as u64),
            ("mso_max_size", self.mso_max_size as u64),
            ("mso_max_rank", self.mso_max_rank as u64),
            ("ef_max_size", self.ef_max_size as u64),
            ("ef_fo_max_rank", self.ef_fo_max_rank as u64),
            ("ef_mso_max_rank", self.ef_mso_max_rank as u64),
            ("order_cap", self.order_cap),
            ("enum_max_bits", self.enum_max_bits as u64),
            ("parikh_max_sequences", self.parikh_max_sequences),
            ("eval_max_set_size", self.eval_max_set_size as u64),
            ("synth_max_alphabet", self.synth_max_alphabet as u64),
            ("synth_max_rank", self.synth_max_rank as u64),
            ("synth_max_nodes", self.synth_max_nodes as u64),
            ("fv_max_rank", self.fv_max_rank as u64),
            ("fv_product_max_bound", self.fv_product_max_bound as u64),
            ("fv_union_max_bound", self.fv_union_max_bound as u64),
        ]
    }
}

pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overrides_and_rejects_zero() {
        let g = Guards::from_config_text("# comment\nmso_max_rank = 4\n\norder_cap=24\n").unwrap();
        assert_eq!(g.mso_max_rank, 4);
        assert_eq!(g.order_cap, 24);
        assert!(Guards::from_config_text("fo_max_rank=0").is_err());
        assert!(Guards::from_config_text("nonsense=3").is_err());
        assert!(Guards::from_config_text("fo_max_rank").is_err());
    }
}

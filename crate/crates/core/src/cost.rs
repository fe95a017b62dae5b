//! Energy and area estimates for a compiled network.
//!
//! Energies are in fJ, delays in ps and areas in µm². Dynamic energy is
//! charged per active processing element per cycle and per module
//! operation; idle modules cost nothing.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{ActivityTrace, AutomatonIr, NodeKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub bank_energy: f64,
    pub bank_delay: f64,
    pub bank_area: f64,
    pub counter_energy: f64,
    pub counter_delay: f64,
    pub counter_area: f64,
    pub bitvector_energy: f64,
    pub bitvector_delay: f64,
    pub bitvector_area: f64,
    pub stes_per_pe: u32,
    pub pes_per_bank: u32,
    pub counters_per_pe: u32,
    pub bitvector_capacity_bits: u32,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            bank_energy: 16780.0,
            bank_delay: 325.0,
            bank_area: 3919.0,
            counter_energy: 288.0,
            counter_delay: 101.0,
            counter_area: 237.0,
            bitvector_energy: 3340.0,
            bitvector_delay: 71.0,
            bitvector_area: 6382.0,
            stes_per_pe: 512,
            // one processing element per bank; see the README for why
            pes_per_bank: 1,
            counters_per_pe: 8,
            bitvector_capacity_bits: 2000,
        }
    }
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("bad cost parameters: {0}")]
    Params(String),
    #[error("trace does not belong to this IR: {0}")]
    TraceMismatch(String),
}

impl CostParams {
    /// Reads `key = value` lines; keys not given keep their defaults.
    pub fn from_config(text: &str) -> Result<CostParams, CostError> {
        let p: CostParams = toml::from_str(text).map_err(|e| CostError::Params(e.message().to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_config(&self) -> String {
        toml::to_string(self).expect("parameters always serialize")
    }

    pub fn validate(&self) -> Result<(), CostError> {
        let reals = [
            ("bank_energy", self.bank_energy),
            ("bank_delay", self.bank_delay),
            ("bank_area", self.bank_area),
            ("counter_energy", self.counter_energy),
            ("counter_delay", self.counter_delay),
            ("counter_area", self.counter_area),
            ("bitvector_energy", self.bitvector_energy),
            ("bitvector_delay", self.bitvector_delay),
            ("bitvector_area", self.bitvector_area),
        ];
        for (k, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(CostError::Params(format!("{k} must be positive, got {v}")));
            }
        }
        let ints = [
            ("stes_per_pe", self.stes_per_pe),
            ("pes_per_bank", self.pes_per_bank),
            ("counters_per_pe", self.counters_per_pe),
            ("bitvector_capacity_bits", self.bitvector_capacity_bits),
        ];
        for (k, v) in ints {
            if v == 0 {
                return Err(CostError::Params(format!("{k} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Allocation {
    pub banks: u64,
    pub pes: u64,
    pub hstates: u64,
    pub counters: u64,
    /// Physical bit vectors.
    pub bitvectors: u64,
    pub bitvector_bits: u64,
    pub wasted_bits: u64,
}

/// Packs bit-vector sizes into vectors of `capacity` bits, first fit by
/// decreasing size. Returns the number of vectors. Sizes above the
/// capacity take whole chained vectors.
pub fn pack_bitvectors(sizes: &[u32], capacity: u32) -> u64 {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut whole = 0u64;
    let mut free: Vec<u32> = Vec::new();
    for s in sorted {
        if s >= capacity {
            whole += s.div_ceil(capacity) as u64;
            continue;
        }
        match free.iter_mut().find(|f| **f >= s) {
            Some(f) => *f -= s,
            None => free.push(capacity - s),
        }
    }
    whole + free.len() as u64
}

pub fn allocate(ir: &AutomatonIr, params: &CostParams) -> Allocation {
    let mut a = Allocation::default();
    let mut sizes = Vec::new();
    for n in &ir.nodes {
        match n.kind {
            NodeKind::HState { .. } => a.hstates += 1,
            NodeKind::Counter { .. } => a.counters += 1,
            NodeKind::Bitvector { size, .. } => sizes.push(size),
        }
    }
    a.pes =
        a.hstates.div_ceil(params.stes_per_pe as u64).max(a.counters.div_ceil(params.counters_per_pe as u64)).max(1);
    a.banks = a.pes.div_ceil(params.pes_per_bank as u64);
    a.bitvectors = pack_bitvectors(&sizes, params.bitvector_capacity_bits);
    a.bitvector_bits = sizes.iter().map(|&s| s as u64).sum();
    a.wasted_bits = a.bitvectors * params.bitvector_capacity_bits as u64 - a.bitvector_bits;
    a
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    pub bank: f64,
    pub counter: f64,
    pub bitvector: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.bank + self.counter + self.bitvector
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub params: CostParams,
    pub allocation: Allocation,
    pub cycles: u64,
    pub active_pes_per_cycle: f64,
    pub counter_ops_per_byte: f64,
    pub bitvector_ops_per_byte: f64,
    pub energy_per_byte: f64,
    pub energy: Breakdown,
    pub total_area: f64,
    pub area: Breakdown,
    /// Delay of the slowest component in use, in ps.
    pub cycle_time: f64,
    pub critical_path: String,
}

pub fn estimate(ir: &AutomatonIr, trace: &ActivityTrace, params: &CostParams) -> Result<CostReport, CostError> {
    params.validate()?;
    let alloc = allocate(ir, params);
    let cycles = trace.cycles.len() as u64;
    let per_pe = params.stes_per_pe as u64;
    let mut pe_cycles = 0u64;
    let mut seen: Vec<u64> = Vec::new();
    for (t, c) in trace.cycles.iter().enumerate() {
        seen.clear();
        for &s in &c.active {
            if s as u64 >= alloc.hstates {
                return Err(CostError::TraceMismatch(format!("cycle {} names state {s} of {}", t + 1, alloc.hstates)));
            }
            let pe = s as u64 / per_pe;
            if !seen.contains(&pe) {
                seen.push(pe);
            }
        }
        pe_cycles += seen.len() as u64;
        if c.counter_ops as u64 > alloc.counters || (c.bitvector_ops > 0 && alloc.bitvectors == 0) {
            return Err(CostError::TraceMismatch(format!("cycle {} uses modules the IR lacks", t + 1)));
        }
    }
    let per_byte = |x: u64| if cycles == 0 { 0.0 } else { x as f64 / cycles as f64 };
    let active_pes_per_cycle = per_byte(pe_cycles);
    let counter_ops_per_byte = per_byte(trace.total_counter_ops());
    let bitvector_ops_per_byte = per_byte(trace.total_bitvector_ops());
    let energy = Breakdown {
        bank: active_pes_per_cycle * params.bank_energy / params.pes_per_bank as f64,
        counter: counter_ops_per_byte * params.counter_energy,
        bitvector: bitvector_ops_per_byte * params.bitvector_energy,
    };
    let area = Breakdown {
        bank: alloc.banks as f64 * params.bank_area,
        counter: alloc.counters as f64 * params.counter_area,
        bitvector: alloc.bitvectors as f64 * params.bitvector_area,
    };
    let mut critical = ("bank", params.bank_delay);
    if alloc.counters > 0 && params.counter_delay > critical.1 {
        critical = ("counter", params.counter_delay);
    }
    if alloc.bitvectors > 0 && params.bitvector_delay > critical.1 {
        critical = ("bitvector", params.bitvector_delay);
    }
    Ok(CostReport {
        params: params.clone(),
        allocation: alloc,
        cycles,
        active_pes_per_cycle,
        counter_ops_per_byte,
        bitvector_ops_per_byte,
        energy_per_byte: energy.total(),
        energy,
        total_area: area.total(),
        area,
        cycle_time: critical.1,
        critical_path: critical.0.to_string(),
    })
}

impl CostReport {
    /// Aligned two-column text rendering.
    pub fn to_table(&self) -> String {
        let a = &self.allocation;
        let rows: Vec<(&str, String)> = vec![
            ("banks", a.banks.to_string()),
            ("processing elements", a.pes.to_string()),
            ("states", a.hstates.to_string()),
            ("counters", a.counters.to_string()),
            ("bit vectors", a.bitvectors.to_string()),
            ("bit-vector bits used", a.bitvector_bits.to_string()),
            ("bit-vector bits wasted", a.wasted_bits.to_string()),
            ("cycles", self.cycles.to_string()),
            ("active PEs per cycle", format!("{:.4}", self.active_pes_per_cycle)),
            ("energy/byte bank (fJ)", format!("{:.2}", self.energy.bank)),
            ("energy/byte counter (fJ)", format!("{:.2}", self.energy.counter)),
            ("energy/byte bitvector (fJ)", format!("{:.2}", self.energy.bitvector)),
            ("energy/byte total (fJ)", format!("{:.2}", self.energy_per_byte)),
            ("area bank (um2)", format!("{:.1}", self.area.bank)),
            ("area counter (um2)", format!("{:.1}", self.area.counter)),
            ("area bitvector (um2)", format!("{:.1}", self.area.bitvector)),
            ("area total (um2)", format!("{:.1}", self.total_area)),
            ("cycle time (ps)", format!("{:.0} ({})", self.cycle_time, self.critical_path)),
        ];
        let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let vw = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<w$}  {v:>vw$}");
        }
        out
    }
}

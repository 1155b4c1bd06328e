use alloc::vec::Vec;

use libm::sqrt;

use super::TrellisCode;
use crate::error::{Error, Result};

/// Per-time branch costs indexed by the packed output triple. Punctured
/// positions contribute nothing; costs are minimized.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchCosts {
    k: usize,
    table: Vec<[f64; 8]>,
}

impl BranchCosts {
    fn empty(k: usize) -> Self {
        Self {
            k,
            table: alloc::vec![[0.0; 8]; k],
        }
    }

    fn add<F: Fn(u8) -> f64>(&mut self, position: u32, cost: F) {
        let (stream, t) = (position as usize / self.k, position as usize % self.k);
        for (o, slot) in self.table[t].iter_mut().enumerate() {
            *slot += cost((o as u8 >> stream) & 1);
        }
    }

    /// Hamming costs for hard-decision BSC outputs.
    pub fn hard(k: usize, positions: &[u32], received: &[u8]) -> Result<Self> {
        if positions.len() != received.len() {
            return Err(Error::InvalidArgument("one received bit per position"));
        }
        let mut bc = Self::empty(k);
        for (&p, &y) in positions.iter().zip(received) {
            bc.add(p, |b| (b != y) as u8 as f64);
        }
        Ok(bc)
    }

    /// Squared Euclidean costs to BPSK points `+sqrt(eta)` (bit 0) and
    /// `-sqrt(eta)` (bit 1).
    pub fn soft(k: usize, positions: &[u32], received: &[f64], eta: f64) -> Result<Self> {
        if positions.len() != received.len() {
            return Err(Error::InvalidArgument("one received sample per position"));
        }
        let amp = sqrt(eta);
        let mut bc = Self::empty(k);
        for (&p, &y) in positions.iter().zip(received) {
            bc.add(p, |b| {
                let x = if b == 0 { amp } else { -amp };
                (y - x) * (y - x)
            });
        }
        Ok(bc)
    }

    /// Cost of the tail-biting codeword of `message`.
    pub fn codeword_cost(&self, code: &TrellisCode, message: &[u8]) -> f64 {
        let mask = (1u32 << code.nu) - 1;
        let mut state = code.tail_state(message);
        let mut acc = 0.0;
        for (t, &u) in message.iter().enumerate() {
            let reg = (state << 1) | u as u32;
            acc += self.table[t][code.output(reg) as usize];
            state = reg & mask;
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    /// Exact tail-biting ML: constrained searches over start states,
    /// pruned by the unconstrained path metrics.
    ExactMl,
    /// Wrap-around Viterbi with a fixed number of passes.
    Wava { wraps: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub message: Vec<u8>,
    pub metric: f64,
}

/// Tail-biting Viterbi decoder with reusable scratch space.
#[derive(Clone, Debug)]
pub struct Decoder {
    code: TrellisCode,
    kind: DecoderKind,
    outputs: Vec<u8>,
    decisions: Vec<u8>,
    metrics: Vec<f64>,
    next: Vec<f64>,
    labels: Vec<u32>,
    next_labels: Vec<u32>,
}

impl Decoder {
    pub fn new(code: TrellisCode, kind: DecoderKind) -> Self {
        let s = code.states();
        let outputs = (0..2 * s as u32).map(|reg| code.output(reg)).collect();
        Self {
            code,
            kind,
            outputs,
            decisions: Vec::new(),
            metrics: alloc::vec![0.0; s],
            next: alloc::vec![0.0; s],
            labels: alloc::vec![0; s],
            next_labels: alloc::vec![0; s],
        }
    }

    pub fn code(&self) -> &TrellisCode {
        &self.code
    }

    /// One trellis pass starting from `self.metrics` and `self.labels`.
    fn forward(&mut self, bc: &BranchCosts) {
        let s = self.code.states();
        let half = (s / 2) as u32;
        self.decisions.resize(bc.k * s, 0);
        for t in 0..bc.k {
            let row = &bc.table[t];
            for ns in 0..s as u32 {
                let u = ns & 1;
                let sa = ns >> 1;
                let sb = sa | half;
                let ma = self.metrics[sa as usize]
                    + row[self.outputs[((sa << 1) | u) as usize] as usize];
                let mb = self.metrics[sb as usize]
                    + row[self.outputs[((sb << 1) | u) as usize] as usize];
                let (m, pick, from) = if mb < ma { (mb, 1, sb) } else { (ma, 0, sa) };
                self.next[ns as usize] = m;
                self.next_labels[ns as usize] = self.labels[from as usize];
                self.decisions[t * s + ns as usize] = pick;
            }
            core::mem::swap(&mut self.metrics, &mut self.next);
            core::mem::swap(&mut self.labels, &mut self.next_labels);
        }
    }

    fn traceback(&self, end: u32, k: usize) -> Vec<u8> {
        let s = self.code.states();
        let high = self.code.nu - 1;
        let mut state = end;
        let mut msg = alloc::vec![0u8; k];
        for t in (0..k).rev() {
            msg[t] = (state & 1) as u8;
            state = (state >> 1) | ((self.decisions[t * s + state as usize] as u32) << high);
        }
        msg
    }

    fn reset_unconstrained(&mut self, init: Option<&[f64]>) {
        for (i, l) in self.labels.iter_mut().enumerate() {
            *l = i as u32;
        }
        match init {
            Some(m) => self.metrics.copy_from_slice(m),
            None => self.metrics.iter_mut().for_each(|m| *m = 0.0),
        }
    }

    /// Best tail-biting path that starts and ends in `start`.
    fn constrained(&mut self, bc: &BranchCosts, start: u32) -> DecodeResult {
        self.metrics.iter_mut().for_each(|m| *m = f64::INFINITY);
        self.metrics[start as usize] = 0.0;
        self.forward(bc);
        DecodeResult {
            metric: self.metrics[start as usize],
            message: self.traceback(start, bc.k),
        }
    }

    fn argmin(v: &[f64]) -> u32 {
        let mut best = 0;
        for (i, &x) in v.iter().enumerate() {
            if x < v[best] {
                best = i;
            }
        }
        best as u32
    }

    pub fn decode(&mut self, bc: &BranchCosts) -> Result<DecodeResult> {
        if bc.k < self.code.nu as usize {
            return Err(Error::InvalidArgument(
                "message shorter than the code memory",
            ));
        }
        match self.kind {
            DecoderKind::ExactMl => Ok(self.decode_exact(bc)),
            DecoderKind::Wava { wraps } => Ok(self.decode_wava(bc, wraps.max(1))),
        }
    }

    fn decode_exact(&mut self, bc: &BranchCosts) -> DecodeResult {
        self.reset_unconstrained(None);
        self.forward(bc);
        let best = Self::argmin(&self.metrics);
        if self.labels[best as usize] == best {
            return DecodeResult {
                metric: self.metrics[best as usize],
                message: self.traceback(best, bc.k),
            };
        }
        // The unconstrained metric of each end state lower-bounds every
        // tail-biting path through it.
        let bound = self.metrics.clone();
        let mut incumbent: Option<DecodeResult> = None;
        for (e, &l) in self.labels.iter().enumerate() {
            if l == e as u32 && incumbent.as_ref().is_none_or(|r| bound[e] < r.metric) {
                incumbent = Some(DecodeResult {
                    metric: bound[e],
                    message: self.traceback(e as u32, bc.k),
                });
            }
        }
        let mut order: Vec<u32> = (0..bound.len() as u32).collect();
        order.sort_by(|&a, &b| {
            bound[a as usize]
                .total_cmp(&bound[b as usize])
                .then(a.cmp(&b))
        });
        for e in order {
            if incumbent
                .as_ref()
                .is_some_and(|r| bound[e as usize] >= r.metric)
            {
                break;
            }
            let cand = self.constrained(bc, e);
            if incumbent.as_ref().is_none_or(|r| cand.metric < r.metric) {
                incumbent = Some(cand);
            }
        }
        incumbent.expect("some start state yields a tail-biting path")
    }

    fn decode_wava(&mut self, bc: &BranchCosts, wraps: u32) -> DecodeResult {
        let mut candidates: Vec<u32> = Vec::new();
        self.reset_unconstrained(None);
        let mut last_best = 0;
        for wrap in 0..wraps {
            self.forward(bc);
            let best = Self::argmin(&self.metrics);
            last_best = best;
            if self.labels[best as usize] == best {
                if wrap == 0 {
                    // Best unconstrained path is tail-biting: it is ML.
                    return DecodeResult {
                        metric: self.metrics[best as usize],
                        message: self.traceback(best, bc.k),
                    };
                }
                candidates.push(best);
                break;
            }
            let tb = (0..self.metrics.len())
                .filter(|&e| self.labels[e] == e as u32)
                .min_by(|&a, &b| self.metrics[a].total_cmp(&self.metrics[b]));
            if let Some(e) = tb {
                candidates.push(e as u32);
            }
            let floor = self.metrics[best as usize];
            let init: Vec<f64> = self.metrics.iter().map(|m| m - floor).collect();
            self.reset_unconstrained(Some(&init));
        }
        if candidates.is_empty() {
            candidates.push(last_best);
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut best: Option<DecodeResult> = None;
        for c in candidates {
            let r = self.constrained(bc, c);
            if best.as_ref().is_none_or(|b| r.metric < b.metric) {
                best = Some(r);
            }
        }
        best.expect("at least one candidate start state")
    }
}

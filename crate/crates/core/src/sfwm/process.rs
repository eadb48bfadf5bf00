use std::fmt;

use serde::{Deserialize, Serialize};

use crate::modes::ModeId;

/// SFWM process class by transverse-mode content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProcessType {
    /// All four photons in one mode.
    I,
    /// Degenerate pumps in one mode, signal and idler both in another.
    II,
    /// One pump photon and one output photon in each of two modes.
    III,
}

impl fmt::Display for ProcessType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessType::I => "I",
            ProcessType::II => "II",
            ProcessType::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SfwmProcess {
    pub pump_a: ModeId,
    pub pump_b: ModeId,
    pub signal: ModeId,
    pub idler: ModeId,
    pub ptype: ProcessType,
}

impl SfwmProcess {
    /// Classifies a mode tuple; `None` if it is none of Types I/II/III.
    pub fn classify(pa: ModeId, pb: ModeId, s: ModeId, i: ModeId) -> Option<ProcessType> {
        if pa == pb && s == i {
            if s == pa {
                Some(ProcessType::I)
            } else {
                Some(ProcessType::II)
            }
        } else if pa != pb && ((s == pa && i == pb) || (s == pb && i == pa)) {
            Some(ProcessType::III)
        } else {
            None
        }
    }

    pub fn new(pa: ModeId, pb: ModeId, s: ModeId, i: ModeId) -> Option<Self> {
        Self::classify(pa, pb, s, i).map(|ptype| SfwmProcess {
            pump_a: pa.min(pb),
            pump_b: pa.max(pb),
            signal: s,
            idler: i,
            ptype,
        })
    }

    pub fn intramodal(mode: ModeId) -> Self {
        Self::new(mode, mode, mode, mode).unwrap()
    }

    pub fn intermodal(signal: ModeId, idler: ModeId) -> Self {
        Self::new(signal, idler, signal, idler).expect("signal and idler modes differ")
    }

    /// Two distinguishable pump photons double the amplitude.
    pub fn degeneracy(&self) -> f64 {
        if self.pump_a == self.pump_b {
            1.0
        } else {
            2.0
        }
    }

    /// `TE0TE1>TE1TE0` style label: pump pair, then signal/idler pair.
    pub fn label(&self) -> String {
        format!("{}{}>{}{}", self.pump_a, self.pump_b, self.signal, self.idler)
    }

    /// Signal/idler combination, e.g. `TE1TE0`.
    pub fn output_label(&self) -> String {
        format!("{}{}", self.signal, self.idler)
    }
}

impl fmt::Display for SfwmProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (Type {})", self.label(), self.ptype)
    }
}

/// All Type I, II and III processes among `modes`, in that order.
///
/// `n` modes give `n` Type I, `n(n-1)` Type II and `n(n-1)` Type III processes.
pub fn enumerate_processes(modes: &[ModeId]) -> Vec<SfwmProcess> {
    let mut modes = modes.to_vec();
    modes.sort();
    modes.dedup();
    let mut out = Vec::new();
    for &m in &modes {
        out.push(SfwmProcess::intramodal(m));
    }
    for &p in &modes {
        for &o in modes.iter().filter(|&&o| o != p) {
            out.extend(SfwmProcess::new(p, p, o, o));
        }
    }
    for (i, &a) in modes.iter().enumerate() {
        for &b in &modes[i + 1..] {
            out.extend(SfwmProcess::new(a, b, a, b));
            out.extend(SfwmProcess::new(a, b, b, a));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn single_mode_has_one_process() {
        let p = enumerate_processes(&[ModeId::TE0]);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].ptype, ProcessType::I);
    }

    #[test]
    fn two_modes_give_four_output_combinations() {
        let p = enumerate_processes(&[ModeId::TE0, ModeId::TE1]);
        assert_eq!(p.len(), 6);
        let count = |t| p.iter().filter(|q| q.ptype == t).count();
        assert_eq!((count(ProcessType::I), count(ProcessType::II), count(ProcessType::III)), (2, 2, 2));
        let outputs: BTreeSet<_> = p
            .iter()
            .filter(|q| q.ptype != ProcessType::II)
            .map(|q| (q.signal.order, q.idler.order))
            .collect();
        assert_eq!(outputs, BTreeSet::from([(0, 0), (1, 1), (0, 1), (1, 0)]));
    }

    #[test]
    fn brute_force_count_for_three_modes() {
        let modes = [ModeId::te(0), ModeId::te(1), ModeId::te(2)];
        let mut brute = BTreeSet::new();
        for &pa in &modes {
            for &pb in &modes {
                for &s in &modes {
                    for &i in &modes {
                        if let Some(t) = SfwmProcess::classify(pa, pb, s, i) {
                            brute.insert((pa.min(pb), pa.max(pb), s, i, t));
                        }
                    }
                }
            }
        }
        let got: BTreeSet<_> = enumerate_processes(&modes)
            .into_iter()
            .map(|p| (p.pump_a, p.pump_b, p.signal, p.idler, p.ptype))
            .collect();
        assert_eq!(got, brute);
        assert_eq!(got.len(), 15);
    }

    #[test]
    fn type_labels_follow_mode_content() {
        let (a, b) = (ModeId::TE0, ModeId::TE1);
        assert_eq!(SfwmProcess::classify(a, a, a, a), Some(ProcessType::I));
        assert_eq!(SfwmProcess::classify(a, a, b, b), Some(ProcessType::II));
        assert_eq!(SfwmProcess::classify(a, b, b, a), Some(ProcessType::III));
        assert_eq!(SfwmProcess::classify(a, a, a, b), None);
        assert_eq!(SfwmProcess::intermodal(b, a).degeneracy(), 2.0);
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaussian::{AmplifierKind, GaussianChannel, GaussianState, SymplecticMap};

/// One step of an optical circuit. Mode indices refer to the modes alive
/// when the stage runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    /// DFT multisplitter on `modes` (in order); `inverse` selects its adjoint.
    Multisplitter { modes: Vec<usize>, inverse: bool },
    /// Trace out `modes`; survivors keep their relative order.
    Discard { modes: Vec<usize> },
    /// Append `count` vacuum modes.
    AddVacuum { count: usize },
    /// Quantum-limited amplifier on a single mode.
    Amplifier {
        mode: usize,
        gain: f64,
        kind: AmplifierKind,
    },
    /// Heterodyne `mode` and prepare `copies` coherent states at
    /// `scale·outcome` (conjugated when `conjugate`). The copies are appended
    /// after the remaining modes.
    HeterodynePrepare {
        mode: usize,
        copies: usize,
        scale: f64,
        conjugate: bool,
    },
}

impl Stage {
    /// Number of live modes after this stage, validating indices against
    /// `live` modes before it.
    fn advance(&self, live: usize) -> Result<usize> {
        let check = |i: usize| {
            if i >= live {
                Err(Error::ModeIndex {
                    index: i,
                    n_modes: live,
                })
            } else {
                Ok(())
            }
        };
        let distinct = |modes: &[usize]| -> Result<()> {
            for (k, &i) in modes.iter().enumerate() {
                check(i)?;
                if modes[..k].contains(&i) {
                    return domain(format!("mode {i} listed twice in one stage"));
                }
            }
            Ok(())
        };
        match self {
            Stage::Multisplitter { modes, .. } => {
                if modes.is_empty() {
                    return domain("multisplitter stage on no modes");
                }
                distinct(modes)?;
                Ok(live)
            }
            Stage::Discard { modes } => {
                distinct(modes)?;
                if modes.len() >= live {
                    return domain("discard stage would remove every mode");
                }
                Ok(live - modes.len())
            }
            Stage::AddVacuum { count } => Ok(live + count),
            Stage::Amplifier { mode, .. } => {
                check(*mode)?;
                Ok(live)
            }
            Stage::HeterodynePrepare { mode, copies, .. } => {
                check(*mode)?;
                if *copies == 0 {
                    return domain("heterodyne-and-prepare stage with zero copies");
                }
                Ok(live - 1 + copies)
            }
        }
    }

    fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        match self {
            Stage::Multisplitter { modes, inverse } => {
                let mut map = SymplecticMap::multisplitter(modes.len())?;
                if *inverse {
                    map = map.inverse();
                }
                state.apply_symplectic(&map.embed(modes, state.n_modes())?)
            }
            Stage::Discard { modes } => {
                let keep: Vec<usize> = (0..state.n_modes())
                    .filter(|i| !modes.contains(i))
                    .collect();
                state.partial_trace(&keep)
            }
            Stage::AddVacuum { count } => Ok(state.add_vacuum(*count)),
            Stage::Amplifier { mode, gain, kind } => {
                state.apply_channel(&GaussianChannel::amplifier(*gain, *kind)?, &[*mode])
            }
            Stage::HeterodynePrepare {
                mode,
                copies,
                scale,
                conjugate,
            } => {
                let ch = GaussianChannel::heterodyne_prepare(*copies, *scale, *conjugate)?;
                if ch.n_out() == ch.n_in() {
                    // keep the "appended after the rest" placement for one copy too
                    let rest: Vec<usize> = (0..state.n_modes()).filter(|i| i != mode).collect();
                    let mut order = rest;
                    order.push(*mode);
                    state
                        .permute_modes(&order)?
                        .apply_channel(&ch, &[state.n_modes() - 1])
                } else {
                    state.apply_channel(&ch, &[*mode])
                }
            }
        }
    }
}

/// An `n_in → n_out` circuit as an ordered list of stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_in: usize,
    pub n_out: usize,
    pub stages: Vec<Stage>,
}

impl CircuitSpec {
    /// Validates that every stage addresses live modes and that the circuit
    /// ends with `n_out` modes.
    pub fn new(n_in: usize, n_out: usize, stages: Vec<Stage>) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return domain("circuits need at least one input and one output mode");
        }
        let mut live = n_in;
        for stage in &stages {
            live = stage.advance(live)?;
        }
        if live != n_out {
            return domain(format!("circuit ends with {live} modes, expected {n_out}"));
        }
        Ok(Self {
            n_in,
            n_out,
            stages,
        })
    }

    pub fn run(&self, input: &GaussianState) -> Result<GaussianState> {
        if input.n_modes() != self.n_in {
            return Err(Error::Dimension {
                expected: self.n_in,
                found: input.n_modes(),
            });
        }
        self.stages
            .iter()
            .try_fold(input.clone(), |state, stage| stage.apply(&state))
    }

    /// Intermediate states: the input followed by the state after each stage.
    pub fn trace(&self, input: &GaussianState) -> Result<Vec<GaussianState>> {
        let mut states = vec![input.clone()];
        for stage in &self.stages {
            let next = stage.apply(states.last().expect("nonempty"))?;
            states.push(next);
        }
        Ok(states)
    }
}

/// Concentrate `n` equal-amplitude modes into mode 0 and drop the rest.
fn concentration(n: usize) -> Vec<Stage> {
    if n == 1 {
        return Vec::new();
    }
    vec![
        Stage::Multisplitter {
            modes: (0..n).collect(),
            inverse: false,
        },
        Stage::Discard {
            modes: (1..n).collect(),
        },
    ]
}

/// Spread mode 0 over `k` modes by mixing it with `k − 1` vacua.
fn distribution(k: usize) -> Vec<Stage> {
    if k == 1 {
        return Vec::new();
    }
    vec![
        Stage::AddVacuum { count: k - 1 },
        Stage::Multisplitter {
            modes: (0..k).collect(),
            inverse: true,
        },
    ]
}

/// Optimal `N → M` broadcasting: concentrate, amplify with gain `M/N`,
/// distribute over `M` modes.
pub fn build_broadcast_circuit(n: usize, m: usize) -> Result<CircuitSpec> {
    if n == 0 || m <= n {
        return domain(format!("broadcasting needs M > N ≥ 1, got N={n}, M={m}"));
    }
    let mut stages = concentration(n);
    stages.push(Stage::Amplifier {
        mode: 0,
        gain: m as f64 / n as f64,
        kind: AmplifierKind::PhasePreserving,
    });
    stages.extend(distribution(m));
    CircuitSpec::new(n, m, stages)
}

/// Optimal purification `N → M ≤ N`: concentrate, redistribute over `N`
/// modes, keep the first `M`.
///
/// Redistributing over exactly `N` modes is what restores amplitude `α` on
/// every copy; the per-copy noise then does not depend on `M`.
pub fn build_purify_circuit(n: usize, m: usize) -> Result<CircuitSpec> {
    if m == 0 || m > n {
        return domain(format!("purification needs 1 ≤ M ≤ N, got N={n}, M={m}"));
    }
    let mut stages = concentration(n);
    stages.extend(distribution(n));
    if m < n {
        stages.push(Stage::Discard {
            modes: (m..n).collect(),
        });
    }
    CircuitSpec::new(n, m, stages)
}

/// Optimal phase-conjugating map: concentrate, heterodyne, prepare `M`
/// coherent states at `conj(outcome)/√N`.
pub fn build_phase_conjugate_circuit(n: usize, m: usize) -> Result<CircuitSpec> {
    if n == 0 || m == 0 {
        return domain(format!(
            "phase conjugation needs N, M ≥ 1, got N={n}, M={m}"
        ));
    }
    let mut stages = concentration(n);
    stages.push(Stage::HeterodynePrepare {
        mode: 0,
        copies: m,
        scale: 1.0 / (n as f64).sqrt(),
        conjugate: true,
    });
    CircuitSpec::new(n, m, stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_to_three_is_splitter_amplifier_tritter() {
        let c = build_broadcast_circuit(2, 3).unwrap();
        assert_eq!(
            c.stages,
            vec![
                Stage::Multisplitter {
                    modes: vec![0, 1],
                    inverse: false
                },
                Stage::Discard { modes: vec![1] },
                Stage::Amplifier {
                    mode: 0,
                    gain: 1.5,
                    kind: AmplifierKind::PhasePreserving
                },
                Stage::AddVacuum { count: 2 },
                Stage::Multisplitter {
                    modes: vec![0, 1, 2],
                    inverse: true
                },
            ]
        );
    }

    #[test]
    fn one_to_two_skips_concentration() {
        let c = build_broadcast_circuit(1, 2).unwrap();
        assert!(matches!(c.stages[0], Stage::Amplifier { gain, .. } if gain == 2.0));
        assert_eq!(c.stages.len(), 3);
    }

    #[test]
    fn two_to_four_gain() {
        let c = build_broadcast_circuit(2, 4).unwrap();
        assert!(c
            .stages
            .iter()
            .any(|s| matches!(s, Stage::Amplifier { gain, .. } if *gain == 2.0)));
    }

    #[test]
    fn builders_reject_wrong_regimes() {
        assert!(build_broadcast_circuit(3, 3).is_err());
        assert!(build_broadcast_circuit(0, 3).is_err());
        assert!(build_purify_circuit(2, 3).is_err());
        assert!(build_purify_circuit(2, 0).is_err());
        assert!(build_phase_conjugate_circuit(0, 1).is_err());
    }

    #[test]
    fn purify_identity_for_one_mode() {
        let c = build_purify_circuit(1, 1).unwrap();
        assert!(c.stages.is_empty());
    }

    #[test]
    fn invalid_stage_indices() {
        let bad = CircuitSpec::new(
            2,
            2,
            vec![Stage::Amplifier {
                mode: 2,
                gain: 1.0,
                kind: AmplifierKind::PhasePreserving,
            }],
        );
        assert!(matches!(bad, Err(Error::ModeIndex { index: 2, .. })));
        let wrong_count = CircuitSpec::new(2, 3, vec![Stage::Discard { modes: vec![0] }]);
        assert!(wrong_count.is_err());
        let all_gone = CircuitSpec::new(2, 1, vec![Stage::Discard { modes: vec![0, 1] }]);
        assert!(all_gone.is_err());
    }

    #[test]
    fn run_checks_input_size() {
        let c = build_broadcast_circuit(2, 3).unwrap();
        assert!(c.run(&GaussianState::vacuum(3)).is_err());
        let out = c.run(&GaussianState::vacuum(2)).unwrap();
        assert_eq!(out.n_modes(), 3);
    }

    #[test]
    fn stage_serialization_is_tagged() {
        let s = serde_json::to_string(&Stage::AddVacuum { count: 2 }).unwrap();
        assert_eq!(s, r#"{"stage":"add_vacuum","count":2}"#);
    }
}

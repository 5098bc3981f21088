//! Built-in scenario families used by the verification suite and examples.

use crate::scenario::{OperatorDoc, ScenarioDocument, ScheduleDoc};

fn word(n: usize, sites: &[(usize, char)]) -> String {
    let mut w = vec!['I'; n];
    for &(i, ch) in sites {
        w[i] = ch;
    }
    w.into_iter().collect()
}

/// Qubit steered from `|0>` to `|1>` by `K = (pi / 2 tau) Y`, no noise.
pub fn qubit_pi_rotation(tau: f64) -> ScenarioDocument {
    ScenarioDocument::measure(
        1,
        0,
        tau,
        ScheduleDoc::Constant {
            op: format!("{:e}*Y", std::f64::consts::PI / (2.0 * tau)).as_str().into(),
        },
    )
    .with_name("qubit-pi-rotation")
}

fn schedule_for(sys: usize, tau: f64, polynomial: bool) -> ScheduleDoc {
    let w = std::f64::consts::PI / (2.0 * tau);
    if sys == 1 {
        if polynomial {
            // rate ramps linearly with mean w
            ScheduleDoc::Polynomial {
                coefficients: vec![
                    format!("{:e}*Y", 0.5 * w).as_str().into(),
                    format!("{:e}*Y", w / tau).as_str().into(),
                ],
            }
        } else {
            ScheduleDoc::Constant {
                op: format!("{:e}*Y", w).as_str().into(),
            }
        }
    } else if polynomial {
        ScheduleDoc::Polynomial {
            coefficients: vec![
                format!("{:e}*YI + {:e}*XY", 0.8 * w, 0.3 * w).as_str().into(),
                format!("{:e}*IY", 0.4 * w / tau).as_str().into(),
            ],
        }
    } else {
        ScheduleDoc::Constant {
            op: format!("{:e}*YI + {:e}*ZY", 0.8 * w, 0.6 * w).as_str().into(),
        }
    }
}

fn coupling(sys: usize, bath: usize, g: f64) -> Option<OperatorDoc> {
    if g == 0.0 {
        return None;
    }
    let n = sys + bath;
    let mut terms = vec![format!("{g:e}*{}", word(n, &[(0, 'Z')]))];
    if bath == 0 {
        terms.push(format!("{g:e}*{}", word(n, &[(sys - 1, 'X')])));
    } else {
        terms.push(format!("{g:e}*{}", word(n, &[(0, 'X'), (sys, 'X')])));
        terms.push(format!("{g:e}*{}", word(n, &[(sys - 1, 'Y'), (n - 1, 'Z')])));
    }
    Some(terms.join(" + ").as_str().into())
}

fn bath_term(sys: usize, bath: usize, g: f64) -> Option<OperatorDoc> {
    if bath == 0 || g == 0.0 {
        return None;
    }
    let n = sys + bath;
    Some(format!("{:e}*{}", 0.5, word(n, &[(n - 1, 'X')])).as_str().into())
}

/// Measurement-steering corpus: 1 and 2 system qubits, 0 to 2 bath qubits,
/// couplings `g` in `{0, 0.05, 0.2}` and durations `tau` in `{1, 3}`.
pub fn measurement_corpus() -> Vec<ScenarioDocument> {
    let mut out = Vec::new();
    for sys in [1usize, 2] {
        for bath in [0usize, 1, 2] {
            for (gi, g) in [0.0, 0.05, 0.2].into_iter().enumerate() {
                for tau in [1.0, 3.0] {
                    let polynomial = (sys + bath + gi) % 2 == 1;
                    let name = format!("measure-s{sys}-b{bath}-g{g}-tau{tau}");
                    let doc = ScenarioDocument::measure(sys as u32, bath as u32, tau, schedule_for(sys, tau, polynomial))
                        .with_noise(coupling(sys, bath, g), bath_term(sys, bath, g))
                        .with_name(&name);
                    out.push(doc);
                }
            }
        }
    }
    out
}

/// Noiseless pulse steering of a qubit: `U0 = Z`, `K = (pi / 2 tau) Y`, start in `|0>`.
pub fn qubit_pulse(tau: f64) -> ScenarioDocument {
    ScenarioDocument::pulse(
        1,
        0,
        tau,
        ScheduleDoc::Constant {
            op: format!("{:e}*Y", std::f64::consts::PI / (2.0 * tau)).as_str().into(),
        },
        "Z".into(),
        0,
    )
    .with_name("qubit-pulse")
}

/// Controlled-Z as a Pauli expression.
pub const CZ: &str = "0.5*II + 0.5*IZ + 0.5*ZI - 0.5*ZZ";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_validates() {
        let corpus = measurement_corpus();
        assert_eq!(corpus.len(), 36);
        for doc in &corpus {
            let s = doc.validate().unwrap_or_else(|e| panic!("{:?}: {e}", doc.name));
            assert!(s.dim() <= 16);
        }
        qubit_pi_rotation(1.0).validate().unwrap();
        qubit_pulse(1.0).validate().unwrap();
    }
}

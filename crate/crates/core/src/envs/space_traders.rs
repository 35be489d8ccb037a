//! The Space Traders family of two-step MOMDPs.
//!
//! A trader starts at planet A, travels to planet B, then returns home. Each
//! leg offers Indirect (safe, slow), Direct (risky, faster) and Teleport
//! (riskiest, instant). Objective 1 measures success, objective 2 is a
//! non-positive time penalty.

use rust_decimal::Decimal;
use rust_decimal_macros::dec;

use super::chain::ChainSpec;
use super::file::{ActionEntry, ModelFile, OutcomeEntry, StateEntry, TerminalKind};
use super::model::MomdpModel;
use crate::error::Result;

pub const GOAL: &str = "goal";
pub const FAIL: &str = "fail";

/// `(action name, success probability, success reward, failure reward)`
type Leg = (&'static str, Decimal, [Decimal; 2], [Decimal; 2]);

fn action(
    name: &str,
    next: &str,
    p: Decimal,
    success: [Decimal; 2],
    failure: [Decimal; 2],
) -> ActionEntry {
    let mut outcomes = vec![OutcomeEntry::new(p, next, success.to_vec())];
    if p < Decimal::ONE {
        outcomes.push(OutcomeEntry::new(Decimal::ONE - p, FAIL, failure.to_vec()));
    }
    ActionEntry {
        name: name.to_owned(),
        letter: None,
        outcomes,
    }
}

fn two_planet(at_a: [Leg; 3], at_b: [Leg; 3], threshold: Decimal) -> ModelFile {
    let a = at_a
        .iter()
        .map(|&(n, p, s, f)| action(n, "B", p, s, f))
        .collect();
    let b = at_b
        .iter()
        .map(|&(n, p, s, f)| action(n, GOAL, p, s, f))
        .collect();
    ModelFile {
        objectives: 2,
        initial: "A".into(),
        discount: Decimal::ONE,
        thresholds: vec![threshold],
        states: vec![
            StateEntry::decision("A", a),
            StateEntry::decision("B", b),
            StateEntry::terminal(GOAL, TerminalKind::Goal),
            StateEntry::terminal(FAIL, TerminalKind::Failure),
        ],
    }
}

pub(crate) fn original_file() -> ModelFile {
    two_planet(
        [
            (
                "Indirect",
                dec!(1),
                [dec!(0), dec!(-12)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(0), dec!(-6)],
                [dec!(0), dec!(-1)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(0), dec!(0)],
                [dec!(0), dec!(0)],
            ),
        ],
        [
            (
                "Indirect",
                dec!(1),
                [dec!(1), dec!(-10)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(1), dec!(-8)],
                [dec!(0), dec!(-7)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(1), dec!(0)],
                [dec!(0), dec!(0)],
            ),
        ],
        dec!(0.88),
    )
}

pub(crate) fn reward_design_file() -> ModelFile {
    two_planet(
        [
            (
                "Indirect",
                dec!(1),
                [dec!(0), dec!(-12)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(0), dec!(-6)],
                [dec!(-1), dec!(-1)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(0), dec!(0)],
                [dec!(-1), dec!(0)],
            ),
        ],
        [
            (
                "Indirect",
                dec!(1),
                [dec!(1), dec!(-10)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(1), dec!(-8)],
                [dec!(-1), dec!(-7)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(1), dec!(0)],
                [dec!(-1), dec!(0)],
            ),
        ],
        dec!(0.76),
    )
}

/// Original Space Traders, threshold 0.88 on the success objective.
pub fn space_traders_original() -> MomdpModel {
    original_file()
        .into_model()
        .expect("built-in model is valid")
}

/// Every failure costs -1 on the success objective; threshold 0.76.
pub fn space_traders_reward_design() -> MomdpModel {
    reward_design_file()
        .into_model()
        .expect("built-in model is valid")
}

/// Original dynamics with the time penalties of planets A and B exchanged.
pub fn space_traders_swapped() -> MomdpModel {
    two_planet(
        [
            (
                "Indirect",
                dec!(1),
                [dec!(0), dec!(-10)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(0), dec!(-8)],
                [dec!(0), dec!(-7)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(0), dec!(0)],
                [dec!(0), dec!(0)],
            ),
        ],
        [
            (
                "Indirect",
                dec!(1),
                [dec!(1), dec!(-12)],
                [dec!(0), dec!(0)],
            ),
            (
                "Direct",
                dec!(0.9),
                [dec!(1), dec!(-6)],
                [dec!(0), dec!(-1)],
            ),
            (
                "Teleport",
                dec!(0.85),
                [dec!(1), dec!(0)],
                [dec!(0), dec!(0)],
            ),
        ],
        dec!(0.88),
    )
    .into_model()
    .expect("built-in model is valid")
}

/// Reward-design variant whose Direct route from A runs through the chain
/// of intermediate states described by `spec`.
pub fn space_traders_extra_state(spec: &ChainSpec) -> Result<MomdpModel> {
    spec.apply(reward_design_file(), "A", "Direct", "B")?
        .into_model()
}

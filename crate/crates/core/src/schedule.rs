use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-episode value of a hyper-parameter such as the learning rate or the
/// softmax temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    Constant {
        value: f64,
    },
    LinearDecay {
        initial: f64,
        #[serde(rename = "final")]
        last: f64,
        horizon: u64,
    },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn linear(initial: f64, last: f64, horizon: u64) -> Self {
        Schedule::LinearDecay {
            initial,
            last,
            horizon,
        }
    }

    pub fn initial(&self) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::LinearDecay { initial, .. } => initial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { value } if value.is_finite() => Ok(()),
            Schedule::Constant { value } => Err(Error::config(format!(
                "schedule value {value} is not finite"
            ))),
            Schedule::LinearDecay { horizon: 0, .. } => Err(Error::config(
                "linear-decay schedule needs a horizon of at least one episode",
            )),
            Schedule::LinearDecay { initial, last, .. }
                if initial.is_finite() && last.is_finite() =>
            {
                Ok(())
            }
            Schedule::LinearDecay { .. } => Err(Error::config("schedule endpoints must be finite")),
        }
    }

    pub fn value(&self, episode: u64) -> Result<f64> {
        self.validate()?;
        Ok(self.value_unchecked(episode))
    }

    pub(crate) fn value_unchecked(&self, episode: u64) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::LinearDecay { last, horizon, .. } if episode >= horizon => last,
            Schedule::LinearDecay {
                initial,
                last,
                horizon,
            } => initial + (last - initial) * (episode as f64 / horizon as f64),
        }
    }
}

pub fn schedule_value(s: &Schedule, episode: u64) -> Result<f64> {
    s.value(episode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            schedule_value(&Schedule::constant(0.01), 19_999).unwrap(),
            0.01
        );
        assert_eq!(
            schedule_value(&Schedule::linear(0.01, 0.0001, 20_000), 0).unwrap(),
            0.01
        );
        assert_eq!(
            schedule_value(&Schedule::linear(10.0, 2.0, 20_000), 10_000).unwrap(),
            6.0
        );
        assert_eq!(
            schedule_value(&Schedule::linear(10.0, 2.0, 20_000), 20_000).unwrap(),
            2.0
        );
        assert_eq!(
            schedule_value(&Schedule::linear(10.0, 2.0, 20_000), 90_000).unwrap(),
            2.0
        );
    }

    #[test]
    fn zero_horizon_is_a_config_error() {
        let err = Schedule::linear(1.0, 0.5, 0).value(3).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    proptest! {
        #[test]
        fn linear_decay_is_monotone(
            initial in 0.0f64..20.0,
            drop in 0.0f64..20.0,
            horizon in 1u64..50_000,
            e in 0u64..60_000,
        ) {
            let s = Schedule::linear(initial, initial - drop, horizon);
            prop_assert!(s.value(e + 1).unwrap() <= s.value(e).unwrap());
        }
    }
}

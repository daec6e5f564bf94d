use serde::{Deserialize, Serialize};

use crate::engines::TrialClock;
use crate::error::{Error, Result};

/// Trial counts reported for the measured storage times; the clock fits more
/// trials than this, so these act as caps.
const REPORTED_TRIALS_PER_RUN: [(f64, u64); 3] = [(30.0, 10_000), (230.0, 8_333), (430.0, 8_333)];

/// Experimental cycle: a preparation phase, then a run of repeated
/// write/store/read/clean trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingSequence {
    pub prep_ms: f64,
    pub run_ms: f64,
    pub write_ns: f64,
    pub read_ns: f64,
    pub clean_ns: f64,
    pub runs_per_second: u64,
    /// Fixed trial count per run instead of the derived one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_per_run: Option<u64>,
}

impl Default for TimingSequence {
    fn default() -> Self {
        TimingSequence {
            prep_ms: 23.0,
            run_ms: 10.0,
            write_ns: 70.0,
            read_ns: 100.0,
            clean_ns: 200.0,
            runs_per_second: 30,
            trials_per_run: None,
        }
    }
}

impl TimingSequence {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("prep_ms", self.prep_ms),
            ("run_ms", self.run_ms),
            ("write_ns", self.write_ns),
            ("read_ns", self.read_ns),
            ("clean_ns", self.clean_ns),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("timing.{name}"), "must be finite and non-negative"));
            }
        }
        if self.run_ms <= 0.0 {
            return Err(Error::invalid("timing.run_ms", "must be positive"));
        }
        if self.runs_per_second == 0 {
            return Err(Error::invalid("timing.runs_per_second", "must be positive"));
        }
        let cycle_ms = 1e3 / self.runs_per_second as f64;
        if self.prep_ms + self.run_ms > cycle_ms + 1.0 {
            return Err(Error::invalid(
                "timing.runs_per_second",
                format!("{} ms of preparation and run do not fit a {cycle_ms:.3} ms cycle", self.prep_ms + self.run_ms),
            ));
        }
        Ok(())
    }

    /// `write + τ + read + clean`, in ns.
    pub fn trial_len_ns(&self, tau_ns: f64) -> f64 {
        self.write_ns + tau_ns + self.read_ns + self.clean_ns
    }

    /// Trials per run at storage time `tau_ns`.
    pub fn trials_per_run(&self, tau_ns: f64) -> Result<u64> {
        let len = self.trial_len_ns(tau_ns);
        if !(len > 0.0) {
            return Err(Error::domain("trial length must be positive"));
        }
        let run_ns = self.run_ms * 1e6;
        let fit = (run_ns / len).floor() as u64;
        if fit == 0 {
            return Err(Error::domain(format!(
                "a {len} ns trial does not fit in a {} ms run",
                self.run_ms
            )));
        }
        match self.trials_per_run {
            Some(0) => Err(Error::invalid("timing.trials_per_run", "must be positive")),
            Some(n) if n > fit => Err(Error::invalid(
                "timing.trials_per_run",
                format!("{n} trials of {len} ns exceed the {} ms run", self.run_ms),
            )),
            Some(n) => Ok(n),
            None => Ok(REPORTED_TRIALS_PER_RUN
                .iter()
                .find(|(t, _)| (t - tau_ns).abs() < 1e-9)
                .map_or(fit, |&(_, n)| n.min(fit))),
        }
    }

    pub fn clock(&self, tau_ns: f64) -> Result<TrialClock> {
        Ok(TrialClock {
            trials_per_run: self.trials_per_run(tau_ns)?,
            cycle_ns: 1e9 / self.runs_per_second as f64,
            run_offset_ns: self.prep_ms * 1e6,
            trial_len_ns: self.trial_len_ns(tau_ns),
            read_offset_ns: self.write_ns + tau_ns,
        })
    }
}

/// Trials per second `N = n × runs_per_second`.
pub fn trials_per_second(timing: &TimingSequence, tau_ns: f64) -> Result<u64> {
    Ok(timing.trials_per_run(tau_ns)? * timing.runs_per_second)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_cases() {
        let t = TimingSequence::default();
        assert_eq!(trials_per_second(&t, 30.0).unwrap(), 300_000);
        assert_eq!(t.trials_per_run(230.0).unwrap(), 8_333);
        assert_eq!(trials_per_second(&t, 230.0).unwrap(), 249_990);
        assert_eq!(trials_per_second(&t, 430.0).unwrap(), 249_990);
    }

    #[test]
    fn derived_case() {
        let t = TimingSequence::default();
        assert_eq!(t.trial_len_ns(0.0), 370.0);
        assert_eq!(t.trials_per_run(0.0).unwrap(), 27_027);
    }

    #[test]
    fn oversized_trial_rejected() {
        let t = TimingSequence::default();
        assert!(t.trials_per_run(2e7).is_err());
        let fixed = TimingSequence {
            trials_per_run: Some(30_000),
            ..TimingSequence::default()
        };
        assert!(fixed.trials_per_run(30.0).is_err());
    }

    #[test]
    fn clock_offsets() {
        let c = TimingSequence::default().clock(30.0).unwrap();
        assert_eq!(c.timestamp_ns(0), 23e6 + 100.0);
        assert_eq!(c.timestamp_ns(1), 23e6 + 400.0 + 100.0);
    }
}

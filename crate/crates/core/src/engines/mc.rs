use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use super::detector::ClickSet;
use super::exact::OutcomeDistribution;
use crate::error::{Error, Result};

/// Model time of each trial's read window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialClock {
    /// Trials inside one run; the next run starts one cycle later.
    pub trials_per_run: u64,
    pub cycle_ns: f64,
    /// Start of the first trial within a cycle.
    pub run_offset_ns: f64,
    pub trial_len_ns: f64,
    /// Read window start within a trial.
    pub read_offset_ns: f64,
}

impl TrialClock {
    pub fn timestamp_ns(&self, trial_index: u64) -> f64 {
        let run = trial_index / self.trials_per_run;
        let k = trial_index % self.trials_per_run;
        run as f64 * self.cycle_ns + self.run_offset_ns + k as f64 * self.trial_len_ns + self.read_offset_ns
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub timestamp_ns: f64,
    pub clicks: ClickSet,
}

/// Independent stream for `(seed, index)`.
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer, to give each measurement block its own seed.
pub fn derive_seed(seed: u64, block: u64) -> u64 {
    let mut z = seed.wrapping_add(block.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Sampler<'a> {
    sets: Vec<&'a ClickSet>,
    cumulative: Vec<f64>,
    empty: ClickSet,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a OutcomeDistribution) -> Self {
        let mut acc = 0.0;
        let mut sets = Vec::new();
        let mut cumulative = Vec::new();
        for (s, p) in dist.entries() {
            acc += p;
            sets.push(s);
            cumulative.push(acc);
        }
        Sampler {
            sets,
            cumulative,
            empty: ClickSet::empty(),
        }
    }

    /// Inverse-CDF draw; the unassigned remainder (if any) is the empty set.
    fn draw(&self, u: f64) -> ClickSet {
        let i = self.cumulative.partition_point(|&c| c <= u);
        match self.sets.get(i) {
            Some(s) => (*s).clone(),
            None if (u - self.cumulative.last().copied().unwrap_or(0.0)).abs() < 1e-12 => {
                // u landed in floating-point slack above the final bin
                self.sets.last().map_or_else(|| self.empty.clone(), |s| (*s).clone())
            }
            None => self.empty.clone(),
        }
    }
}

/// `n` i.i.d. trials. Trial `k` uses its own RNG stream, so the result does
/// not depend on how many worker threads run.
pub fn sample_trials(dist: &OutcomeDistribution, n: u64, seed: u64, clock: &TrialClock) -> Result<Vec<TrialOutcome>> {
    if n == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let sampler = Sampler::new(dist);
    Ok((0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            TrialOutcome {
                trial_index: k,
                timestamp_ns: clock.timestamp_ns(k),
                clicks: sampler.draw(rng.random::<f64>()),
            }
        })
        .collect())
}

/// `n` trials that produced at least one click, with the intervening
/// silent trials skipped geometrically. Equivalent in law to filtering the
/// non-empty outcomes of [`sample_trials`], without simulating them.
pub fn sample_recorded(dist: &OutcomeDistribution, n: u64, seed: u64, clock: &TrialClock) -> Result<Vec<TrialOutcome>> {
    sample_recorded_where(dist, n, seed, clock, |s| !s.is_empty())
}

/// [`sample_recorded`] with a custom record trigger: only trials whose click
/// set satisfies `trigger` are kept.
pub fn sample_recorded_where(
    dist: &OutcomeDistribution,
    n: u64,
    seed: u64,
    clock: &TrialClock,
    trigger: impl Fn(&ClickSet) -> bool,
) -> Result<Vec<TrialOutcome>> {
    if n == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let cond = dist.conditioned(&trigger)?;
    let p = dist.p_where(&trigger).min(1.0);
    let gaps = Geometric::new(p).map_err(|e| Error::domain(format!("click probability {p}: {e}")))?;
    let sampler = Sampler::new(&cond);
    let draws: Vec<(u64, ClickSet)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, j);
            let gap = gaps.sample(&mut rng);
            (gap, sampler.draw(rng.random::<f64>()))
        })
        .collect();
    let mut next = 0u64;
    Ok(draws
        .into_iter()
        .map(|(gap, clicks)| {
            let k = next + gap;
            next = k + 1;
            TrialOutcome {
                trial_index: k,
                timestamp_ns: clock.timestamp_ns(k),
                clicks,
            }
        })
        .collect())
}

/// Number of trials whose clicks include every detector in `pattern`.
pub fn coincidences(outcomes: &[TrialOutcome], pattern: &ClickSet) -> u64 {
    outcomes.iter().filter(|o| o.clicks.contains(pattern)).count() as u64
}

/// `trial_index,timestamp_ns,click_list` rows, detectors `;`-joined.
pub fn write_trial_log<W: Write>(mut w: W, detectors: &[String], outcomes: &[TrialOutcome]) -> io::Result<()> {
    writeln!(w, "trial_index,timestamp_ns,click_list")?;
    for o in outcomes {
        writeln!(w, "{},{},{}", o.trial_index, o.timestamp_ns, o.clicks.render(detectors))?;
    }
    Ok(())
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock() -> TrialClock {
        TrialClock {
            trials_per_run: 10,
            cycle_ns: 1000.0,
            run_offset_ns: 0.0,
            trial_len_ns: 50.0,
            read_offset_ns: 10.0,
        }
    }

    fn names() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    #[test]
    fn certain_outcome() {
        let d = OutcomeDistribution::new(names(), [(ClickSet::of(&[0]), 1.0)]).unwrap();
        let t = sample_trials(&d, 5, 1, &clock()).unwrap();
        assert!(t.iter().all(|o| o.clicks == ClickSet::of(&[0])));
        assert_eq!(coincidences(&t, &ClickSet::of(&[0])), 5);
    }

    #[test]
    fn fair_coin_frequency() {
        let d = OutcomeDistribution::new(names(), [(ClickSet::of(&[0]), 0.5), (ClickSet::of(&[1]), 0.5)]).unwrap();
        let t = sample_trials(&d, 100_000, 42, &clock()).unwrap();
        let a = coincidences(&t, &ClickSet::of(&[0])) as f64 / 1e5;
        assert!((a - 0.5).abs() < 0.01);
    }

    #[test]
    fn deterministic_across_workers() {
        let d = OutcomeDistribution::new(
            names(),
            [(ClickSet::of(&[0]), 0.01), (ClickSet::of(&[0, 1]), 0.02), (ClickSet::empty(), 0.97)],
        )
        .unwrap();
        let one = with_workers(1, || sample_recorded(&d, 1000, 9, &clock())).unwrap().unwrap();
        let four = with_workers(4, || sample_recorded(&d, 1000, 9, &clock())).unwrap().unwrap();
        assert_eq!(one, four);
        assert!(one.iter().all(|o| !o.clicks.is_empty()));
        assert!(one.windows(2).all(|w| w[0].trial_index < w[1].trial_index));
    }

    #[test]
    fn clock_layout() {
        let c = clock();
        assert_eq!(c.timestamp_ns(0), 10.0);
        assert_eq!(c.timestamp_ns(11), 1000.0 + 50.0 + 10.0);
    }

    #[test]
    fn log_format() {
        let o = vec![TrialOutcome {
            trial_index: 3,
            timestamp_ns: 160.0,
            clicks: ClickSet::of(&[0, 1]),
        }];
        let mut buf = Vec::new();
        write_trial_log(&mut buf, &names(), &o).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial_index,timestamp_ns,click_list\n3,160,A;B\n");
    }

    #[test]
    fn zero_trials_rejected() {
        let d = OutcomeDistribution::new(names(), [(ClickSet::of(&[0]), 1.0)]).unwrap();
        assert!(sample_trials(&d, 0, 1, &clock()).is_err());
    }
}

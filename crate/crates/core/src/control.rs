//! Control laws shared by the simulation routines.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numcore::Vector;

pub type FeedbackFn = Arc<dyn Fn(f64, &Vector) -> Result<Vector> + Send + Sync>;

/// Open-loop control sampled on a (not necessarily uniform) increasing time
/// grid; evaluated by linear interpolation, clamped at the ends.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledControl {
    pub times: Vec<f64>,
    pub values: Vec<Vector>,
}

impl SampledControl {
    pub fn new(times: Vec<f64>, values: Vec<Vector>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::Grid(format!(
                "{} times for {} samples",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("control times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn eval(&self, t: f64) -> Vector {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.values[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1].clone();
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        &self.values[i] * (1.0 - w) + &self.values[i + 1] * w
    }
}

#[derive(Clone)]
pub enum ControlLaw {
    OpenLoop(SampledControl),
    Feedback(FeedbackFn),
}

impl ControlLaw {
    pub fn feedback<F>(f: F) -> Self
    where
        F: Fn(f64, &Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        ControlLaw::Feedback(Arc::new(f))
    }

    pub fn eval(&self, t: f64, x: &Vector) -> Result<Vector> {
        match self {
            ControlLaw::OpenLoop(c) => Ok(c.eval(t)),
            ControlLaw::Feedback(f) => f(t, x),
        }
    }
}

impl std::fmt::Debug for ControlLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControlLaw::OpenLoop(c) => f.debug_tuple("OpenLoop").field(c).finish(),
            ControlLaw::Feedback(_) => f.write_str("Feedback(..)"),
        }
    }
}

use super::{Matrix, Vector};
use crate::error::{Error, Result};

fn simpson_weight(i: usize, last: usize) -> f64 {
    if i == 0 || i == last {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Grid(format!("Simpson needs an odd sample count >= 3, got {n}")));
    }
    Ok(())
}

/// Composite Simpson rule on equally spaced samples.
pub fn simpson(samples: &[f64], step: f64) -> Result<f64> {
    check_count(samples.len())?;
    let last = samples.len() - 1;
    let s: f64 = samples.iter().enumerate().map(|(i, v)| simpson_weight(i, last) * v).sum();
    Ok(s * step / 3.0)
}

/// Simpson rule applied entrywise; summed in index order.
pub fn simpson_matrices(samples: &[Matrix], step: f64) -> Result<Matrix> {
    check_count(samples.len())?;
    let last = samples.len() - 1;
    let mut acc = Matrix::zeros(samples[0].nrows(), samples[0].ncols());
    for (i, m) in samples.iter().enumerate() {
        acc += m * simpson_weight(i, last);
    }
    Ok(acc * (step / 3.0))
}

pub fn simpson_vectors(samples: &[Vector], step: f64) -> Result<Vector> {
    check_count(samples.len())?;
    let last = samples.len() - 1;
    let mut acc = Vector::zeros(samples[0].len());
    for (i, v) in samples.iter().enumerate() {
        acc += v * simpson_weight(i, last);
    }
    Ok(acc * (step / 3.0))
}

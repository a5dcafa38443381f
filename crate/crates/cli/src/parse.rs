//! Parsers for point, mass and threshold arguments.

use christoffel::cdkernel::ThresholdPolicy;
use christoffel::{Complex64, Error, Result};

/// `re1,im1[,re2,im2,...]` as a point of `C^d`.
pub fn point(text: &str) -> Result<Vec<Complex64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("point '{text}': '{}' is not a number", s.trim())))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() || !values.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("point '{text}' needs re,im pairs")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("point '{text}' is not finite")));
    }
    Ok(values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

/// `POINT@WEIGHT`, e.g. `1.5,0@0.05`.
pub fn mass(text: &str) -> Result<(Vec<Complex64>, f64)> {
    let (p, t) = text
        .rsplit_once('@')
        .ok_or_else(|| Error::InvalidInput(format!("mass '{text}' must look like re,im@weight")))?;
    let t: f64 = t
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("mass weight '{t}' is not a number")))?;
    Ok((point(p)?, t))
}

/// `auto` or a fixed number.
pub fn threshold(text: &str) -> Result<Option<f64>> {
    if text == "auto" {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::InvalidInput(format!("threshold '{text}' is neither 'auto' nor a number")))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::InvalidInput(format!("threshold {v} must be positive and finite")));
    }
    Ok(Some(v))
}

pub fn leverage_policy(text: &str) -> Result<ThresholdPolicy> {
    Ok(match threshold(text)? {
        None => ThresholdPolicy::default(),
        Some(v) => ThresholdPolicy::Fixed(v),
    })
}

pub fn same_dim(points: &[Vec<Complex64>], dim: usize) -> Result<()> {
    match points.iter().find(|p| p.len() != dim) {
        Some(p) => Err(Error::DimensionMismatch { expected: dim, found: p.len() }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points_and_masses() {
        assert_eq!(point("1,-2").unwrap(), vec![Complex64::new(1.0, -2.0)]);
        assert_eq!(point(" 0, 1 ,2,3").unwrap().len(), 2);
        assert!(point("1,2,3").is_err());
        assert!(point("x,1").is_err());
        assert!(point("nan,0").is_err());
        let (p, t) = mass("-1.3,0@0.02").unwrap();
        assert_eq!(p, vec![Complex64::new(-1.3, 0.0)]);
        assert_eq!(t, 0.02);
        assert!(mass("1,0").is_err());
    }

    #[test]
    fn parses_thresholds() {
        assert_eq!(threshold("auto").unwrap(), None);
        assert_eq!(threshold("0.5").unwrap(), Some(0.5));
        assert!(threshold("-1").is_err());
        assert!(threshold("high").is_err());
    }
}

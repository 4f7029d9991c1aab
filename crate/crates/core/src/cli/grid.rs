use std::f64::consts::TAU;
use std::str::FromStr;

use crate::linalg::{Scalar, C64};

/// Parses a grid specification into scan points.
///
/// Segments are separated by `;`:
/// * `circle:<count>` gives `count` equally spaced unit-circle points
///   followed by the reference points `0` and `2`;
/// * `box:<re0>,<re1>,<im0>,<im1>,<steps>` gives a `steps x steps` lattice
///   including the corners;
/// * otherwise a comma-separated list of points such as `0.5`, `1-2i`, `i`.
pub fn parse_grid(spec: &str) -> Result<Vec<Scalar>, String> {
    let mut points = Vec::new();
    for segment in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(count) = segment.strip_prefix("circle:") {
            let count: usize = count.trim().parse().map_err(|_| format!("bad circle count in '{segment}'"))?;
            if count == 0 {
                return Err("circle count must be positive".into());
            }
            for k in 0..count {
                let z = C64::from_polar(1.0, TAU * k as f64 / count as f64);
                points.push(Scalar::complex(z.re, z.im));
            }
            points.push(Scalar::complex(0.0, 0.0));
            points.push(Scalar::complex(2.0, 0.0));
        } else if let Some(body) = segment.strip_prefix("box:") {
            let parts: Vec<&str> = body.split(',').map(str::trim).collect();
            let [re0, re1, im0, im1, steps] = parts.as_slice() else {
                return Err(format!("box needs re0,re1,im0,im1,steps, got '{body}'"));
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number '{s}' in box"));
            let (re0, re1, im0, im1) = (num(re0)?, num(re1)?, num(im0)?, num(im1)?);
            let steps: usize = steps.parse().map_err(|_| format!("bad step count '{steps}' in box"))?;
            if steps < 2 {
                return Err("box needs at least 2 steps per axis".into());
            }
            let at = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (steps - 1) as f64;
            for i in 0..steps {
                for r in 0..steps {
                    points.push(Scalar::complex(at(re0, re1, r), at(im0, im1, i)));
                }
            }
        } else {
            for p in segment.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let z = C64::from_str(p).map_err(|_| format!("bad grid point '{p}'"))?;
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(format!("grid point '{p}' is not finite"));
                }
                points.push(Scalar::complex(z.re, z.im));
            }
        }
    }
    if points.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(points)
}

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Exact hypervolume of `front` with respect to `reference` (minimization).
///
/// Points that do not strictly dominate the reference point contribute
/// nothing and are dropped.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if m == 0 {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    if let Some(p) = front.iter().find(|p| p.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: p.len(),
        });
    }
    if front
        .iter()
        .flatten()
        .chain(reference)
        .any(|v| !v.is_finite())
    {
        return Err(Error::Parameter("hypervolume needs finite values".into()));
    }
    let points: Vec<Vec<f64>> = front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(a, r)| a < r))
        .cloned()
        .collect();
    Ok(wfg(nondominated(points), reference))
}

fn dominates_weakly(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Drops points weakly dominated by another, keeping one copy of duplicates.
fn nondominated(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    points.dedup();
    let mut keep: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        // lexicographic order: nothing later can dominate an earlier point
        if !keep.iter().any(|k| dominates_weakly(k, &p)) {
            keep.push(p);
        }
    }
    keep
}

fn box_volume(p: &[f64], r: &[f64]) -> f64 {
    p.iter().zip(r).map(|(a, b)| b - a).product()
}

fn sweep_2d(points: &mut [Vec<f64>], r: &[f64]) -> f64 {
    points.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap_or(Ordering::Equal));
    let mut volume = 0.0;
    let mut floor = r[1];
    for p in points.iter() {
        if p[1] < floor {
            volume += (r[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    volume
}

/// Sum of exclusive contributions. Points are taken in descending order of
/// the last objective, so every limit set shares the current point's last
/// coordinate and its volume is a slab over an (m-1)-dimensional volume.
fn wfg(mut points: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    let m = r.len();
    match (points.len(), m) {
        (0, _) => return 0.0,
        (1, _) => return box_volume(&points[0], r),
        (_, 1) => return r[0] - points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        (_, 2) => return sweep_2d(&mut points, r),
        _ => {}
    }
    points.sort_by(|a, b| b[m - 1].partial_cmp(&a[m - 1]).unwrap_or(Ordering::Equal));
    let sub = &r[..m - 1];
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let height = r[m - 1] - p[m - 1];
        let limit: Vec<Vec<f64>> = points[i + 1..]
            .iter()
            .map(|q| {
                q[..m - 1]
                    .iter()
                    .zip(&p[..m - 1])
                    .map(|(a, b)| a.max(*b))
                    .collect()
            })
            .collect();
        let shadow = wfg(nondominated(limit), sub);
        total += height * (box_volume(&p[..m - 1], sub) - shadow);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cases() {
        assert_eq!(hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(), 1.0);
        let two = [vec![0.25, 0.75], vec![0.75, 0.25]];
        assert!((hypervolume(&two, &[1.0, 1.0]).unwrap() - 0.3125).abs() < 1e-15);
        assert_eq!(
            hypervolume(&vec![vec![1.0, 1.0]; 3], &[1.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(hypervolume(&[], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(hypervolume(&[vec![0.0]], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn three_objective_cube_corner() {
        let front = [
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ];
        // inclusion-exclusion over the three boxes
        let expected = 3.0 * 0.25 - 3.0 * 0.125 + 0.125;
        assert!((hypervolume(&front, &[1.0, 1.0, 1.0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn beyond_reference_is_clipped() {
        let front = [vec![0.5, 0.5], vec![2.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(hypervolume(&front, &[1.0, 1.0]).unwrap(), 0.25);
    }
}

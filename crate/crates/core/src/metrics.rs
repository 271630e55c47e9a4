//! Comparison metrics between series or images.

/// `||a - b||_2 / ||b||_2` (reference in the denominator).
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}

/// `max |a - b| / max |b|`.
pub fn rel_linf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = linf(b);
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    num / den
}

pub fn linf(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Zero-lag normalized cross-correlation `<a, b> / (|a| |b|)` (no mean removal).
pub fn ncc(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return if aa == bb { 1.0 } else { 0.0 };
    }
    // rounding can push it just past the Cauchy-Schwarz bound
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// Divide by `max |a|` (unchanged when all zero).
pub fn peak_normalize(a: &[f64]) -> Vec<f64> {
    let m = linf(a);
    if m == 0.0 {
        a.to_vec()
    } else {
        a.iter().map(|x| x / m).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let a = [1.0, -2.0, 0.5];
        assert_eq!(rel_l2(&a, &a), 0.0);
        assert_eq!(rel_linf(&a, &a), 0.0);
        assert!((ncc(&a, &a) - 1.0).abs() < 1e-15);
        assert_eq!(peak_normalize(&a), vec![0.5, -1.0, 0.25]);
    }

    #[test]
    fn scale_and_sign() {
        let a = [1.0, 2.0, 3.0];
        let b: Vec<f64> = a.iter().map(|x| -4.0 * x).collect();
        assert!((ncc(&a, &b) + 1.0).abs() < 1e-15);
        assert!((rel_l2(&[2.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert_eq!(ncc(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }
}

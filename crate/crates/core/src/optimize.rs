//! One-dimensional golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_minimize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> GoldenResult {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    GoldenResult {
        x,
        value,
        iterations,
    }
}

/// Maximizes `f` on `[lo, hi]`.
pub fn golden_maximize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> GoldenResult {
    let r = golden_minimize(|x| -f(x), lo, hi, tol);
    GoldenResult {
        value: -r.value,
        ..r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        let r = golden_minimize(|x| (x - 0.37).powi(2), -3.0, 5.0, 1e-10);
        assert!((r.x - 0.37).abs() < 1e-9);
        assert!(r.value < 1e-18);
    }

    #[test]
    fn maximize_cosine() {
        let r = golden_maximize(f64::cos, -1.0, 2.0, 1e-10);
        assert!(r.x.abs() < 1e-7);
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_minimum() {
        let r = golden_minimize(|x| x, 1.0, 2.0, 1e-9);
        assert!((r.x - 1.0).abs() < 1e-8);
    }
}

//! Gauss-Legendre quadrature on the unit interval.

/// Nodes and weights of the n-point Gauss-Legendre rule mapped to (0,1).
///
/// Roots of P_n are found by Newton iteration from the Chebyshev-angle
/// initial guess; weights use w = 2 / ((1-x^2) P_n'(x)^2) before mapping.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    // mirror to the full rule on [-1,1], then map to (0,1); for odd n the
    // last computed root is the middle node x=0 and must not be duplicated
    let mut full = Vec::with_capacity(n);
    for &(x, w) in rule.iter().rev() {
        full.push((-x, w));
    }
    for &(x, w) in rule.iter().take(rule.len() - n % 2) {
        full.push((x, w));
    }
    full.into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

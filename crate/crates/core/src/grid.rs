//! Small shared helpers for sampling axes.

/// `n` points spaced evenly in `ln` between `a` and `b` inclusive.
///
/// The endpoints are returned exactly.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            let step = (lb - la) / (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => a,
                    i if i == n - 1 => b,
                    i => (la + step * i as f64).exp(),
                })
                .collect()
        }
    }
}

/// `n` points spaced evenly between `a` and `b` inclusive.
pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let g = log_grid(std::f64::consts::E, 1e8, 1000);
        assert_eq!(g.len(), 1000);
        assert_eq!(g[0], std::f64::consts::E);
        assert_eq!(g[999], 1e8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(lin_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert!(log_grid(1.0, 2.0, 0).is_empty());
    }
}

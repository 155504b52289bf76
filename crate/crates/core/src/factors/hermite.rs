//! Gauss-Hermite quadrature nodes for the weight `exp(-x^2)`.

use std::sync::OnceLock;

pub const ORDER: usize = 64;

/// Nodes and weights of the `ORDER`-point rule, ascending in the node.
pub fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(nodes_and_weights::<ORDER>)
}

/// Newton iteration on the orthonormal Hermite recurrence, seeded with the
/// usual asymptotic guesses for the largest roots.
fn nodes_and_weights<const N: usize>() -> ([f64; N], [f64; N]) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    let m = N.div_ceil(2);
    let nf = N as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..N {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[N - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[N - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_even_monomials() {
        let (x, w) = rule();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mass: f64 = w.iter().sum();
        assert!((mass - sqrt_pi).abs() < 1e-13);
        let second: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
        assert!((second - sqrt_pi / 2.0).abs() < 1e-13);
        let fourth: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((fourth - 3.0 * sqrt_pi / 4.0).abs() < 1e-12);
        let odd: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(3)).sum();
        assert!(odd.abs() < 1e-12);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }
}

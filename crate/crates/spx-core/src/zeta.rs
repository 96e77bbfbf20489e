//! Hurwitz zeta via Euler-Maclaurin. Used for certified tail sums of
//! power-family series, where naive term-by-term summation cannot reach
//! 1e-12 relative accuracy near the convergence boundary.

/// B_{2j}/(2j)! for j = 1..=8.
const BERN_FACT: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -1.691_177_753_566_639e-10,
    6.423_764_674_486_387e-12,
    -2.191_947_530_318_372e-13,
];

/// zeta(s, a) = sum_{k>=0} (a+k)^-s for s > 1, a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta needs s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta needs a > 0, got {a}");
    // Shift until the asymptotic expansion at a+n is accurate.
    let n = if a >= 12.0 + s { 0 } else { (12.0 + s - a).ceil() as usize };
    let mut head = crate::kahan::Kahan::new();
    for k in 0..n {
        head.add((a + k as f64).powf(-s));
    }
    let x = a + n as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // sum_j B_2j/(2j)! * (s)_{2j-1} * x^(-s-2j+1), rising factorial of odd length
    let mut poch = s;
    let mut xp = x.powf(-s - 1.0);
    for (j, bf) in BERN_FACT.iter().enumerate() {
        tail += bf * poch * xp;
        let jj = 2.0 * j as f64;
        poch *= (s + jj + 1.0) * (s + jj + 2.0);
        xp /= x * x;
    }
    head.value() + tail
}

/// sum_{k > m} k^-s as zeta(s, m+1). Direct, no cancellation.
pub fn zeta_tail(s: f64, m: u64) -> f64 {
    hurwitz_zeta(s, m as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_values() {
        let pi = std::f64::consts::PI;
        assert!((hurwitz_zeta(2.0, 1.0) - pi * pi / 6.0).abs() < 1e-13);
        assert!((hurwitz_zeta(4.0, 1.0) - pi.powi(4) / 90.0).abs() < 1e-13);
        assert!((hurwitz_zeta(3.0, 1.0) - 1.202_056_903_159_594_2).abs() < 1e-13);
        assert!((hurwitz_zeta(1.5, 1.0) - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn shift_identity() {
        // zeta(s, a) = a^-s + zeta(s, a+1)
        for s in [1.25, 2.0, 3.5, 7.0] {
            for a in [1.0, 2.5, 10.0] {
                let lhs = hurwitz_zeta(s, a);
                let rhs = a.powf(-s) + hurwitz_zeta(s, a + 1.0);
                assert!((lhs - rhs).abs() < 1e-12 * lhs.abs(), "s={s} a={a}");
            }
        }
    }

    #[test]
    fn tail_matches_brute_force() {
        for s in [1.5, 2.0, 3.0] {
            for m in [0u64, 1, 5, 100] {
                let brute: f64 = (m + 1..m + 2_000_000).map(|k| (k as f64).powf(-s)).sum();
                let tail = zeta_tail(s, m);
                // brute force is missing its own far tail; bound it crudely
                let miss = ((m + 2_000_000) as f64).powf(1.0 - s) / (s - 1.0);
                assert!(
                    (tail - brute - miss).abs() < 1e-8 * tail.abs() + 1e-12,
                    "s={s} m={m} tail={tail} brute+miss={}",
                    brute + miss
                );
            }
        }
    }
}

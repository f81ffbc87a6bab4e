//! Quadrature rules on the reference triangle and the reference segment.

/// Barycentric point `(l0, l1, l2)` with weight; weights sum to 1 so the
/// rule computes the mean over the triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Degree-2 exact, 3 interior points.
pub const TRI3: [TriPoint; 3] = [
    TriPoint { bary: [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], weight: 1.0 / 3.0 },
    TriPoint { bary: [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], weight: 1.0 / 3.0 },
    TriPoint { bary: [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], weight: 1.0 / 3.0 },
];

const A1: f64 = 0.445_948_490_915_965;
const B1: f64 = 0.108_103_018_168_070;
const W1: f64 = 0.223_381_589_678_011;
const A2: f64 = 0.091_576_213_509_771;
const B2: f64 = 0.816_847_572_980_459;
const W2: f64 = 0.109_951_743_655_322;

/// Degree-4 exact, 6 points (Dunavant).
pub const TRI6: [TriPoint; 6] = [
    TriPoint { bary: [B1, A1, A1], weight: W1 },
    TriPoint { bary: [A1, B1, A1], weight: W1 },
    TriPoint { bary: [A1, A1, B1], weight: W1 },
    TriPoint { bary: [B2, A2, A2], weight: W2 },
    TriPoint { bary: [A2, B2, A2], weight: W2 },
    TriPoint { bary: [A2, A2, B2], weight: W2 },
];

/// Gauss-Legendre on `[0, 1]`: `(s, weight)`, weights sum to 1.
pub fn gauss_segment(n: usize) -> &'static [(f64, f64)] {
    const G1: [(f64, f64); 1] = [(0.5, 1.0)];
    const R3: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)
    const G2: [(f64, f64); 2] = [(0.5 - R3, 0.5), (0.5 + R3, 0.5)];
    const R15: f64 = 0.387_298_334_620_741_7; // sqrt(3/5) / 2
    const G3: [(f64, f64); 3] = [
        (0.5 - R15, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + R15, 5.0 / 18.0),
    ];
    match n {
        1 => &G1,
        2 => &G2,
        3 => &G3,
        _ => panic!("gauss_segment supports 1..=3 points"),
    }
}

/// Physical point of barycentric coordinates on a triangle.
pub fn map_point(corners: &[[f64; 2]; 3], bary: [f64; 3]) -> [f64; 2] {
    [
        bary[0] * corners[0][0] + bary[1] * corners[1][0] + bary[2] * corners[2][0],
        bary[0] * corners[0][1] + bary[1] * corners[1][1] + bary[2] * corners[2][1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // exact mean of x^a y^b over the reference triangle: 2 a! b! / (a+b+2)!
    fn exact_mean(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * f(a) * f(b) / f(a + b + 2)
    }

    fn rule_mean(rule: &[TriPoint], a: u32, b: u32) -> f64 {
        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        rule.iter()
            .map(|q| {
                let p = map_point(&corners, q.bary);
                q.weight * p[0].powi(a as i32) * p[1].powi(b as i32)
            })
            .sum()
    }

    #[test]
    fn triangle_rules_reach_their_degree() {
        for (rule, deg) in [(&TRI3[..], 2), (&TRI6[..], 4)] {
            let wsum: f64 = rule.iter().map(|q| q.weight).sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let err = (rule_mean(rule, a, b) - exact_mean(a, b)).abs();
                    assert!(err < 1e-14, "degree ({a},{b}) error {err}");
                }
            }
        }
        // one degree beyond is not exact
        assert!((rule_mean(&TRI3, 3, 0) - exact_mean(3, 0)).abs() > 1e-6);
    }

    #[test]
    fn segment_rules() {
        for n in 1..=3 {
            let q = gauss_segment(n);
            for k in 0..(2 * n as i32) {
                let v: f64 = q.iter().map(|&(s, w)| w * s.powi(k)).sum();
                assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
            }
        }
    }
}

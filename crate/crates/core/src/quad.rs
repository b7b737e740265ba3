//! Gauss–Legendre nodes and composite panel quadrature on straight
//! complex segments.
//!
//! Nodes on `[−1,1]` come from Newton iteration on the Legendre
//! polynomial; panels map them affinely onto complex segments, so the
//! weights of a straight segment sum exactly to its endpoint difference.

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending nodes.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[mid] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A quadrature node on a contour: position, complex weight `dμ`, and the
/// branch the node belongs to.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub mu: Complex64,
    pub weight: Complex64,
    pub branch: usize,
}

/// Appends composite Gauss–Legendre nodes for the straight segment
/// `[a, b]`, split into `panels` equal panels of `order` nodes each.
pub fn segment_nodes(
    a: Complex64,
    b: Complex64,
    order: usize,
    panels: usize,
    branch: usize,
    out: &mut Vec<QuadNode>,
) {
    let (xs, ws) = gauss_legendre(order);
    let step = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let mid = lo + step * 0.5;
        let half = step * 0.5;
        for (x, w) in xs.iter().zip(ws.iter()) {
            out.push(QuadNode {
                mu: mid + half * *x,
                weight: half * *w,
                branch,
            });
        }
    }
}

/// Dyadic panel edges for a ray leg: offsets from the ray start that grow
/// geometrically, `0, δ, 3δ, 7δ, …`, truncated at `extent`.
pub fn dyadic_edges(extent: f64, initial: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut e = initial;
    while e < extent {
        edges.push(e);
        e = 2.0 * e + initial;
    }
    edges.push(extent);
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix for the
    /// Legendre recurrence; weights are 2·(first eigenvector component)².
    fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
        use nalgebra::DMatrix;
        let mut j = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let kf = k as f64;
            let b = kf / (4.0 * kf * kf - 1.0).sqrt();
            j[(k - 1, k)] = b;
            j[(k, k - 1)] = b;
        }
        let se = j.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (se.eigenvalues[i], 2.0 * se.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    }

    #[test]
    fn gl2_matches_golub_welsch() {
        let (x, w) = gauss_legendre(2);
        let inv_sqrt3 = 1.0 / 3.0f64.sqrt();
        assert!((x[0] + inv_sqrt3).abs() < 1e-14);
        assert!((x[1] - inv_sqrt3).abs() < 1e-14);
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] - 1.0).abs() < 1e-14);
        let (gx, gw) = golub_welsch(2);
        for i in 0..2 {
            assert!((x[i] - gx[i]).abs() < 1e-12);
            assert!((w[i] - gw[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn gl_matches_golub_welsch_up_to_24() {
        for n in 1..=24 {
            let (x, w) = gauss_legendre(n);
            let (gx, gw) = golub_welsch(n);
            for i in 0..n {
                assert!((x[i] - gx[i]).abs() < 1e-11, "node {i} of GL({n})");
                assert!((w[i] - gw[i]).abs() < 1e-11, "weight {i} of GL({n})");
            }
        }
    }

    #[test]
    fn unit_segment_gl2_nodes() {
        let mut nodes = Vec::new();
        segment_nodes(
            Complex64::from(0.0),
            Complex64::from(1.0),
            2,
            1,
            0,
            &mut nodes,
        );
        let half_inv_sqrt3 = 0.5 / 3.0f64.sqrt();
        assert_eq!(nodes.len(), 2);
        assert!((nodes[0].mu.re - (0.5 - half_inv_sqrt3)).abs() < 1e-14);
        assert!((nodes[1].mu.re - (0.5 + half_inv_sqrt3)).abs() < 1e-14);
        assert!((nodes[0].weight - Complex64::from(0.5)).norm() < 1e-14);
        assert!((nodes[1].weight - Complex64::from(0.5)).norm() < 1e-14);
    }

    #[test]
    fn weights_sum_to_endpoint_difference() {
        let a = Complex64::new(-1.0, -0.4);
        let b = Complex64::new(1.0, -0.4);
        let mut nodes = Vec::new();
        segment_nodes(a, b, 16, 8, 0, &mut nodes);
        let sum: Complex64 = nodes.iter().map(|n| n.weight).sum();
        assert!((sum - (b - a)).norm() < 1e-13);
    }

    #[test]
    fn panel_doubling_richardson_rate() {
        // ∫ (1−μ²) dμ along a bent polyline, exact value by antiderivative
        // F(μ) = μ − μ³/3 evaluated at the endpoints.
        let verts = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(-0.3, -0.5),
            Complex64::new(0.4, -0.5),
            Complex64::new(1.0, 0.0),
        ];
        let f = |m: Complex64| Complex64::from(1.0) - m * m;
        let anti = |m: Complex64| m - m * m * m / 3.0;
        let exact = anti(verts[3]) - anti(verts[0]);
        let integrate = |panels: usize| -> Complex64 {
            let mut nodes = Vec::new();
            for pair in verts.windows(2) {
                // order 1 keeps the integrand unresolved so the composite
                // O(h^{2g}) rate is visible
                segment_nodes(pair[0], pair[1], 1, panels, 0, &mut nodes);
            }
            nodes.iter().map(|n| n.weight * f(n.mu)).sum()
        };
        let mut prev_err = (integrate(2) - exact).norm();
        for k in [4usize, 8, 16] {
            let err = (integrate(k) - exact).norm();
            if prev_err < 1e-13 {
                break;
            }
            // 2^{2g−1} = 2 for g = 1
            assert!(err <= prev_err / 2.0, "panels {k}: {err} vs {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn dyadic_edges_cover_extent() {
        let edges = dyadic_edges(1.0e8, 1.0);
        assert_eq!(edges[0], 0.0);
        assert_eq!(*edges.last().unwrap(), 1.0e8);
        assert!(edges.len() < 40);
        for pair in edges.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }
}

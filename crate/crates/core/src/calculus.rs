//! Pointwise and summed p-quantities: gradient p-th power, p-Dirichlet sum,
//! p-Laplacian, the boundary-aware energy Ξ, the D_p and BD_p norms, and the
//! edge energy ξ_p of an edge density.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// An exponent `p > 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(PExponent(p))
        } else {
            Err(Error::domain(format!("exponent p must be a finite real > 1, got {p}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when `p` is within 1e-12 of 2, where the linear formulas apply.
    #[inline]
    pub fn is_quadratic(self) -> bool {
        (self.0 - 2.0).abs() < 1e-12
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `|t|^{p-2} t`, written as `sign(t)|t|^{p-1}` so that `t = 0` gives 0 for
/// every `p > 1`.
#[inline]
pub fn signed_pow(t: f64, p: PExponent) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p.0 - 1.0)
    }
}

#[inline]
fn abs_pow(t: f64, p: PExponent) -> f64 {
    if p.is_quadratic() {
        t * t
    } else {
        t.abs().powf(p.0)
    }
}

/// A real-valued function on an explicit vertex domain.
///
/// Reading a vertex outside the domain is an error rather than a silent zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl VertexFunction {
    /// Function defined on every vertex.
    pub fn from_values(values: Vec<f64>) -> Self {
        let defined = vec![true; values.len()];
        VertexFunction { values, defined }
    }

    /// Constant function on all `n` vertices; `constant(n, 1.0)` is `1_V`.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_values(vec![c; n])
    }

    /// Function on the listed vertices of a graph with `n` vertices.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut f = VertexFunction {
            values: vec![0.0; n],
            defined: vec![false; n],
        };
        for (x, v) in pairs {
            if x >= n {
                return Err(Error::domain(format!("vertex {x} out of range 0..{n}")));
            }
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite value at vertex {x}")));
            }
            f.values[x] = v;
            f.defined[x] = true;
        }
        Ok(f)
    }

    /// Size of the ambient vertex set.
    pub fn vertex_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.defined.get(x).copied().unwrap_or(false)
    }

    pub fn get(&self, x: usize) -> Result<f64> {
        if self.contains(x) {
            Ok(self.values[x])
        } else {
            Err(Error::domain(format!("vertex {x} is outside the function's domain")))
        }
    }

    pub fn set(&mut self, x: usize, v: f64) {
        self.values[x] = v;
        self.defined[x] = true;
    }

    /// Sorted domain.
    pub fn domain(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&x| self.defined[x]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.values.len())
            .filter(|&x| self.defined[x])
            .map(|x| (x, self.values[x]))
    }

    pub fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Pointwise combination on the common domain.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let n = self.values.len().min(other.values.len());
        let mut out = VertexFunction {
            values: vec![0.0; n],
            defined: vec![false; n],
        };
        for x in 0..n {
            if self.defined[x] && other.defined[x] {
                out.set(x, op(self.values[x], other.values[x]));
            }
        }
        out
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        VertexFunction {
            values: self.values.iter().map(|&v| op(v)).collect(),
            defined: self.defined.clone(),
        }
    }

    fn require(&self, x: usize) -> Result<f64> {
        self.get(x)
    }
}

/// A nonnegative function on the undirected edges of a graph, indexed by
/// canonical edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDensity {
    values: Vec<f64>,
}

impl EdgeDensity {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain(format!(
                "edge density must be finite and nonnegative, edge {i} has {}",
                values[i]
            )));
        }
        Ok(EdgeDensity { values })
    }

    pub fn zeros(edge_count: usize) -> Self {
        EdgeDensity {
            values: vec![0.0; edge_count],
        }
    }

    pub fn constant(edge_count: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; edge_count])
    }

    pub fn get(&self, edge: usize) -> Result<f64> {
        self.values
            .get(edge)
            .copied()
            .ok_or_else(|| Error::domain(format!("edge {edge} has no density value")))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every value by `s ≥ 0`.
    pub fn scaled(&self, s: f64) -> Self {
        EdgeDensity {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// `|Df(x)|^p = Σ_{y∼x} |f(y) − f(x)|^p`.
pub fn gradient_p(g: &Graph, f: &VertexFunction, x: usize, p: PExponent) -> Result<f64> {
    g.check_vertex(x)?;
    let fx = f.require(x)?;
    g.neighbors(x)
        .iter()
        .map(|&y| f.require(y).map(|fy| abs_pow(fy - fx, p)))
        .sum()
}

/// `I_p(f, S) = Σ_{x∈S} |Df(x)|^p`.
pub fn dirichlet_sum(g: &Graph, f: &VertexFunction, set: &[usize], p: PExponent) -> Result<f64> {
    set.iter().map(|&x| gradient_p(g, f, x, p)).sum()
}

/// `Δ_p f(x) = Σ_{y∼x} |f(y) − f(x)|^{p−2}(f(y) − f(x))`, with the term taken
/// as zero when `f(y) = f(x)`.
pub fn p_laplacian(g: &Graph, f: &VertexFunction, x: usize, p: PExponent) -> Result<f64> {
    g.check_vertex(x)?;
    let fx = f.require(x)?;
    g.neighbors(x)
        .iter()
        .map(|&y| f.require(y).map(|fy| signed_pow(fy - fx, p)))
        .sum()
}

/// `Ξ(f, S) = ½ ( I_p(f, S) + Σ_{x∈∂S} Σ_{y∈N_x∩S} |f(x) − f(y)|^p )`.
///
/// Each edge with at least one endpoint in `S` contributes exactly once.
pub fn xi(g: &Graph, f: &VertexFunction, set: &[usize], p: PExponent) -> Result<f64> {
    g.check_set(set)?;
    let inside = g.mask(set);
    let interior = dirichlet_sum(g, f, set, p)?;
    let mut boundary = 0.0;
    for x in g.outer_boundary(set) {
        let fx = f.require(x)?;
        for &y in g.neighbors(x) {
            if inside[y] {
                boundary += abs_pow(fx - f.require(y)?, p);
            }
        }
    }
    Ok(0.5 * (interior + boundary))
}

/// `Σ_e |f(u) − f(v)|^p` over the listed edge ids.
pub fn edge_energy(g: &Graph, f: &VertexFunction, edges: &[usize], p: PExponent) -> Result<f64> {
    edges
        .iter()
        .map(|&e| {
            let (u, v) = g.edges()[e];
            Ok(abs_pow(f.require(u)? - f.require(v)?, p))
        })
        .sum()
}

fn require_total(g: &Graph, f: &VertexFunction) -> Result<()> {
    if f.vertex_count() != g.vertex_count() || (0..g.vertex_count()).any(|x| !f.contains(x)) {
        return Err(Error::domain("norm requires a function defined on every vertex"));
    }
    Ok(())
}

/// `‖f‖_{D_p} = (I_p(f, V) + |f(o)|^p)^{1/p}`.
pub fn dp_norm(g: &Graph, f: &VertexFunction, o: usize, p: PExponent) -> Result<f64> {
    require_total(g, f)?;
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let base = f.get(o)?;
    Ok((dirichlet_sum(g, f, &all, p)? + abs_pow(base, p)).powf(1.0 / p.value()))
}

/// `‖f‖_{BD_p} = I_p(f, V)^{1/p} + ‖f‖_∞`.
pub fn bdp_norm(g: &Graph, f: &VertexFunction, p: PExponent) -> Result<f64> {
    require_total(g, f)?;
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    Ok(dirichlet_sum(g, f, &all, p)?.powf(1.0 / p.value()) + f.sup_norm())
}

/// `ξ_p(ρ) = Σ_e ρ(e)^p`.
pub fn xi_p_edges(g: &Graph, rho: &EdgeDensity, p: PExponent) -> Result<f64> {
    if rho.len() != g.edge_count() {
        return Err(Error::domain(format!(
            "density has {} values for {} edges",
            rho.len(),
            g.edge_count()
        )));
    }
    Ok(rho.values().iter().map(|&v| abs_pow(v, p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> PExponent {
        PExponent::new(v).unwrap()
    }

    fn path3() -> (Graph, VertexFunction) {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        (g, VertexFunction::from_values(vec![0.0, 1.0, 3.0]))
    }

    #[test]
    fn exponent_bounds() {
        assert!(PExponent::new(1.0).is_err());
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        assert!(PExponent::new(1.0001).is_ok());
    }

    #[test]
    fn gradient_examples() {
        let (g, f) = path3();
        assert_eq!(gradient_p(&g, &f, 1, p(2.0)).unwrap(), 5.0);
        let expected = 1.0 + 2f64.powf(1.5);
        assert!((gradient_p(&g, &f, 1, p(1.5)).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 3.8284).abs() < 1e-4);
        let c = VertexFunction::constant(3, 4.0);
        assert_eq!(gradient_p(&g, &c, 1, p(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let (g, f) = path3();
        assert_eq!(p_laplacian(&g, &f, 1, p(2.0)).unwrap(), 1.0);
        let got = p_laplacian(&g, &f, 1, p(1.5)).unwrap();
        assert!((got - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // zero convention for 1 < p < 2
        let flat = VertexFunction::from_values(vec![1.0, 1.0, 1.0]);
        assert_eq!(p_laplacian(&g, &flat, 1, p(1.2)).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let (g, _) = path3();
        let partial = VertexFunction::from_pairs(3, [(0, 0.0), (1, 1.0)]).unwrap();
        assert!(gradient_p(&g, &partial, 1, p(2.0)).is_err());
        assert!(p_laplacian(&g, &partial, 1, p(2.0)).is_err());
        assert!(partial.get(2).is_err());
        assert!(dp_norm(&g, &partial, 0, p(2.0)).is_err());
    }

    #[test]
    fn sums_and_xi() {
        let (g, f) = path3();
        assert_eq!(dirichlet_sum(&g, &f, &[1], p(2.0)).unwrap(), 5.0);
        assert_eq!(xi(&g, &f, &[1], p(2.0)).unwrap(), 5.0);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let h = VertexFunction::from_values(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(dirichlet_sum(&star, &h, &[0, 1, 2, 3], p(2.0)).unwrap(), 6.0);
    }

    #[test]
    fn norms() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let f = VertexFunction::from_values(vec![0.0, 1.0]);
        assert!((dp_norm(&g, &f, 0, p(2.0)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((bdp_norm(&g, &f, p(2.0)).unwrap() - (2f64.sqrt() + 1.0)).abs() < 1e-15);
        let c = VertexFunction::constant(2, -3.0);
        assert!((dp_norm(&g, &c, 0, p(1.7)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(bdp_norm(&g, &c, p(1.7)).unwrap(), 3.0);
    }

    #[test]
    fn edge_energy_of_densities() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(xi_p_edges(&g, &EdgeDensity::zeros(3), p(2.0)).unwrap(), 0.0);
        let half = EdgeDensity::constant(3, 0.5).unwrap();
        assert!((xi_p_edges(&g, &half, p(2.0)).unwrap() - 0.75).abs() < 1e-15);
        let third = EdgeDensity::constant(3, 1.0 / 3.0).unwrap();
        let want = 3f64.powf(1.0 - 2.5);
        assert!((xi_p_edges(&g, &third, p(2.5)).unwrap() - want).abs() < 1e-14);
        assert!(EdgeDensity::new(vec![0.1, -0.2]).is_err());
    }
}

//! Uniform tensor grids on the unit box, nodal fields, quadrature, discrete
//! differential operators, and the discrete Lebesgue/Sobolev norms built on
//! them.
//!
//! The domain is fixed to the unit interval/square. Node `(ix, iy)` sits at
//! `(ix*h, iy*h)` with `h = 1/(n-1)`; 2-D fields are stored row-major with
//! flat index `ix*n + iy`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Uniform grid over the unit box in 1 or 2 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    h: f64,
    boundary: Vec<bool>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh width, `1/(n-1)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.boundary[idx]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Coordinates of a node; the second entry is 0 in 1-D.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [idx as f64 * self.h, 0.0],
            _ => {
                let ix = idx / self.n;
                let iy = idx % self.n;
                [ix as f64 * self.h, iy as f64 * self.h]
            }
        }
    }

    /// Quadrature weight of a node (composite trapezoid, exact on constants).
    pub fn weight(&self, idx: usize) -> f64 {
        let axis = |i: usize| if i == 0 || i == self.n - 1 { 0.5 } else { 1.0 };
        match self.dim {
            1 => self.h * axis(idx),
            _ => self.h * self.h * axis(idx / self.n) * axis(idx % self.n),
        }
    }

    fn flat(&self, ix: usize, iy: usize) -> usize {
        ix * self.n + iy
    }
}

/// Builds the uniform grid with `n` nodes per axis on the unit box.
pub fn build_grid(dim: usize, n: usize) -> Result<Arc<GridSpec>> {
    if dim == 0 || dim > 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if n < 3 {
        return Err(Error::GridTooSmall(n));
    }
    let h = 1.0 / (n - 1) as f64;
    let boundary = match dim {
        1 => (0..n).map(|i| i == 0 || i == n - 1).collect(),
        _ => {
            let mut mask = vec![false; n * n];
            for ix in 0..n {
                for iy in 0..n {
                    mask[ix * n + iy] = ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
                }
            }
            mask
        }
    };
    Ok(Arc::new(GridSpec {
        dim,
        n,
        h,
        boundary,
    }))
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<GridSpec>) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_values(grid: &Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidInput(
                "value count does not match node count".to_string(),
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteField("field values"));
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Nodal evaluation of a closure over coordinates.
    pub fn from_fn(grid: &Arc<GridSpec>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.num_nodes()).map(|i| f(grid.coords(i))).collect();
        ScalarField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// Nodal positive part `max(value, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// Nodal power `value^e`; callers apply it to nonnegative fields.
    pub fn powf(&self, e: f64) -> Self {
        self.map(|v| math::powf(v, e))
    }

    /// True when every boundary node holds exactly 0.
    pub fn is_dirichlet(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(i, &v)| !self.grid.is_boundary(i) || v == 0.0)
    }

    /// Copy with all boundary nodes forced to 0.
    pub fn with_zero_boundary(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.values.len() {
            if out.grid.is_boundary(i) {
                out.values[i] = 0.0;
            }
        }
        out
    }
}

/// One real value per node and axis; holds discrete gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<GridSpec>,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Nodal Euclidean magnitude, computed overflow-safely.
    pub fn magnitude(&self) -> ScalarField {
        let values = match self.components.len() {
            1 => self.components[0].iter().map(|v| v.abs()).collect(),
            _ => self.components[0]
                .iter()
                .zip(&self.components[1])
                .map(|(&a, &b)| math::hypot(a, b))
                .collect(),
        };
        ScalarField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// Quadrature of the pointwise dot product with another vector field.
    pub fn dot_integral(&self, other: &VectorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut total = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            for i in 0..a.len() {
                total += self.grid.weight(i) * a[i] * b[i];
            }
        }
        Ok(total)
    }
}

/// Composite-trapezoid quadrature of a nodal field over the unit box.
pub fn integrate(field: &ScalarField) -> f64 {
    let grid = field.grid();
    field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| grid.weight(i) * v)
        .sum()
}

/// Discrete L^s norm `(∫|field|^s)^(1/s)`, `s >= 1`.
///
/// Evaluated on the max-normalized field so that huge iterates do not
/// overflow inside the power; the norm itself then only overflows when the
/// true value does.
pub fn lp_norm(field: &ScalarField, s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::InvalidExponent {
            name: "s",
            value: s,
            requirement: "L^s norms need s >= 1",
        });
    }
    let scale = field.abs_max();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if !scale.is_finite() {
        return Ok(f64::INFINITY);
    }
    let grid = field.grid();
    let total: f64 = field
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| grid.weight(i) * math::powf((v / scale).abs(), s))
        .sum();
    Ok(scale * math::powf(total, 1.0 / s))
}

/// Discrete W^{1,1} norm: `∫|field| + ∫|∇field|`.
pub fn w11_norm(field: &ScalarField) -> f64 {
    let l1 = lp_norm(field, 1.0).expect("s = 1 is valid");
    let g1 = lp_norm(&gradient(field).magnitude(), 1.0).expect("s = 1 is valid");
    l1 + g1
}

/// Discrete gradient: centered differences at interior nodes, one-sided
/// second-order differences on the boundary. Exact on affine fields.
pub fn gradient(field: &ScalarField) -> VectorField {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.h();
    let v = field.values();
    let diff_1d = |get: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        if i == 0 {
            (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h)
        } else {
            (get(i + 1) - get(i - 1)) / (2.0 * h)
        }
    };
    let components = match grid.dim() {
        1 => {
            let get = |i: usize| v[i];
            vec![(0..n).map(|i| diff_1d(&get, i)).collect()]
        }
        _ => {
            let mut gx = vec![0.0; v.len()];
            let mut gy = vec![0.0; v.len()];
            for ix in 0..n {
                for iy in 0..n {
                    let along_x = |i: usize| v[grid.flat(i, iy)];
                    let along_y = |j: usize| v[grid.flat(ix, j)];
                    gx[grid.flat(ix, iy)] = diff_1d(&along_x, ix);
                    gy[grid.flat(ix, iy)] = diff_1d(&along_y, iy);
                }
            }
            vec![gx, gy]
        }
    };
    VectorField {
        grid: Arc::clone(grid),
        components,
    }
}

/// Applies the (2·dim+1)-point second-order stencil of `-Δ` at interior
/// nodes; boundary rows return the field value (identity rows).
pub fn laplacian_apply(field: &ScalarField) -> ScalarField {
    let grid = field.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let v = field.values();
    let mut out = v.to_vec();
    match grid.dim() {
        1 => {
            for i in 1..n - 1 {
                out[i] = (2.0 * v[i] - v[i - 1] - v[i + 1]) / h2;
            }
        }
        _ => {
            for ix in 1..n - 1 {
                for iy in 1..n - 1 {
                    let c = grid.flat(ix, iy);
                    out[c] = (4.0 * v[c]
                        - v[grid.flat(ix - 1, iy)]
                        - v[grid.flat(ix + 1, iy)]
                        - v[grid.flat(ix, iy - 1)]
                        - v[grid.flat(ix, iy + 1)])
                        / h2;
                }
            }
        }
    }
    ScalarField {
        grid: Arc::clone(grid),
        values: out,
    }
}

/// Catalog of nodal function descriptors.
///
/// String forms (parsed by [`FnDescriptor::parse`]):
/// `"zero"`, `"one"`, `"sinprod"`, `"sinprod_pow:k"`, `"radial_pow:a"`,
/// `"gauss:s"`, `"bump"`, `"file:PATH"`.
#[derive(Debug, Clone, PartialEq)]
pub enum FnDescriptor {
    Zero,
    One,
    /// `∏ sin(π x_i)`.
    SinProd,
    /// `∏ sin^k(π x_i)`.
    SinProdPow(u32),
    /// `|x - c|^a` with `c` the box center; negative powers are regularized
    /// by clamping `|x - c|` to `h/2`.
    RadialPow(f64),
    /// `exp(-|x - c|² / (2 s²))` with `c` the box center.
    Gauss(f64),
    /// `∏ exp(1 - 1/(4 x_i (1 - x_i)))`: flat to all orders at the boundary.
    Bump,
    /// Nodal values loaded from a file, one per line, row-major. Resolving
    /// the path is up to the caller; [`sample`] rejects this variant.
    File(String),
}

impl FnDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        match (head, arg) {
            ("zero", None) => Ok(FnDescriptor::Zero),
            ("one", None) => Ok(FnDescriptor::One),
            ("sinprod", None) => Ok(FnDescriptor::SinProd),
            ("bump", None) => Ok(FnDescriptor::Bump),
            ("sinprod_pow", Some(a)) => {
                let k: u32 = a.parse().map_err(|_| {
                    Error::InvalidDescriptor(text.to_string(), "power must be a positive integer")
                })?;
                if k == 0 {
                    return Err(Error::InvalidDescriptor(
                        text.to_string(),
                        "power must be a positive integer",
                    ));
                }
                Ok(FnDescriptor::SinProdPow(k))
            }
            ("radial_pow", Some(a)) => {
                let e: f64 = a.parse().map_err(|_| {
                    Error::InvalidDescriptor(text.to_string(), "exponent must be a number")
                })?;
                Ok(FnDescriptor::RadialPow(e))
            }
            ("gauss", Some(a)) => {
                let s: f64 = a.parse().map_err(|_| {
                    Error::InvalidDescriptor(text.to_string(), "width must be a number")
                })?;
                if !(s > 0.0) {
                    return Err(Error::InvalidDescriptor(
                        text.to_string(),
                        "width must be positive",
                    ));
                }
                Ok(FnDescriptor::Gauss(s))
            }
            ("file", Some(path)) => Ok(FnDescriptor::File(path.to_string())),
            _ => Err(Error::UnknownDescriptor(text.to_string())),
        }
    }

    pub fn id(&self) -> String {
        use alloc::format;
        match self {
            FnDescriptor::Zero => "zero".to_string(),
            FnDescriptor::One => "one".to_string(),
            FnDescriptor::SinProd => "sinprod".to_string(),
            FnDescriptor::SinProdPow(k) => format!("sinprod_pow:{k}"),
            FnDescriptor::RadialPow(a) => format!("radial_pow:{a}"),
            FnDescriptor::Gauss(s) => format!("gauss:{s}"),
            FnDescriptor::Bump => "bump".to_string(),
            FnDescriptor::File(p) => format!("file:{p}"),
        }
    }
}

/// Nodal evaluation of a catalog descriptor.
///
/// `File` descriptors carry external data and are rejected here; the caller
/// owning IO resolves them into [`ScalarField::from_values`].
pub fn sample(grid: &Arc<GridSpec>, descriptor: &FnDescriptor) -> Result<ScalarField> {
    let dim = grid.dim();
    let h = grid.h();
    let center = 0.5;
    let radial = |c: [f64; 2]| -> f64 {
        match dim {
            1 => (c[0] - center).abs(),
            _ => math::hypot(c[0] - center, c[1] - center),
        }
    };
    match descriptor {
        FnDescriptor::Zero => Ok(ScalarField::zeros(grid)),
        FnDescriptor::One => Ok(ScalarField::from_fn(grid, |_| 1.0)),
        FnDescriptor::SinProd => Ok(ScalarField::from_fn(grid, |c| {
            let mut v = math::sin(math::PI * c[0]);
            if dim == 2 {
                v *= math::sin(math::PI * c[1]);
            }
            v
        })),
        FnDescriptor::SinProdPow(k) => Ok(ScalarField::from_fn(grid, |c| {
            let mut v = math::sin(math::PI * c[0]);
            if dim == 2 {
                v *= math::sin(math::PI * c[1]);
            }
            math::powf(v, *k as f64)
        })),
        FnDescriptor::RadialPow(a) => Ok(ScalarField::from_fn(grid, |c| {
            let mut r = radial(c);
            if *a < 0.0 && r < 0.5 * h {
                r = 0.5 * h;
            }
            math::powf(r, *a)
        })),
        FnDescriptor::Gauss(s) => Ok(ScalarField::from_fn(grid, |c| {
            let r = radial(c);
            math::exp(-r * r / (2.0 * s * s))
        })),
        FnDescriptor::Bump => Ok(ScalarField::from_fn(grid, |c| {
            let axis = |t: f64| -> f64 {
                if t <= 0.0 || t >= 1.0 {
                    0.0
                } else {
                    math::exp(1.0 - 1.0 / (4.0 * t * (1.0 - t)))
                }
            };
            let mut v = axis(c[0]);
            if dim == 2 {
                v *= axis(c[1]);
            }
            v
        })),
        FnDescriptor::File(path) => Err(Error::DescriptorNeedsIo(path.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> Arc<GridSpec> {
        build_grid(2, n).unwrap()
    }

    #[test]
    fn build_grid_smallest() {
        let g = build_grid(1, 3).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.h(), 0.5);
        assert_eq!(
            (0..3).filter(|&i| !g.is_boundary(i)).count(),
            1,
            "one interior node"
        );
    }

    #[test]
    fn build_grid_counts_2d() {
        let g = grid2(5);
        assert_eq!(g.num_nodes(), 25);
        assert_eq!(g.h(), 0.25);
        assert_eq!((0..25).filter(|&i| !g.is_boundary(i)).count(), 9);
    }

    #[test]
    fn build_grid_rejects_degenerate() {
        assert!(matches!(build_grid(2, 2), Err(Error::GridTooSmall(2))));
        assert!(matches!(build_grid(3, 9), Err(Error::InvalidDimension(3))));
    }

    #[test]
    fn sample_one_and_zero() {
        let g = grid2(9);
        let one = sample(&g, &FnDescriptor::One).unwrap();
        assert!(one.values().iter().all(|&v| v == 1.0));
        let zero = sample(&g, &FnDescriptor::Zero).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sample_sinprod_1d_three_nodes() {
        let g = build_grid(1, 3).unwrap();
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        assert!((f.values()[0]).abs() < 1e-15);
        assert!((f.values()[1] - 1.0).abs() < 1e-15);
        assert!((f.values()[2]).abs() < 1e-15);
    }

    #[test]
    fn sample_rejects_unknown_and_file() {
        let g = grid2(5);
        assert!(matches!(
            FnDescriptor::parse("wavelet"),
            Err(Error::UnknownDescriptor(_))
        ));
        assert!(matches!(
            sample(&g, &FnDescriptor::parse("file:some.txt").unwrap()),
            Err(Error::DescriptorNeedsIo(_))
        ));
    }

    #[test]
    fn radial_pow_clamps_singular_center() {
        // odd n puts a node exactly at the center
        let g = grid2(5);
        let f = sample(&g, &FnDescriptor::parse("radial_pow:-1").unwrap()).unwrap();
        assert!(f.is_finite());
        let center = 2 * 5 + 2;
        assert_eq!(f.values()[center], 1.0 / (0.5 * g.h()));
    }

    #[test]
    fn integrate_constants_exactly() {
        for n in [3, 17, 101] {
            let g = grid2(n);
            let one = sample(&g, &FnDescriptor::One).unwrap();
            assert!((integrate(&one) - 1.0).abs() < 1e-13);
            assert_eq!(integrate(&ScalarField::zeros(&g)), 0.0);
        }
    }

    #[test]
    fn integrate_sine_against_antiderivative() {
        // ∫_0^1 sin(πx) dx = 2/π
        let g = build_grid(1, 101).unwrap();
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        assert!((integrate(&f) - 2.0 / math::PI).abs() < 1e-3);
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid2(33);
        let one = sample(&g, &FnDescriptor::One).unwrap();
        assert!((lp_norm(&one, 1.7).unwrap() - 1.0).abs() < 1e-13);
        assert!((lp_norm(&one.scaled(2.0), 2.0).unwrap() - 2.0).abs() < 1e-13);
        assert!(matches!(
            lp_norm(&one, 0.5),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn lp_norm_sine_l2() {
        // ||sin(πx)||_2 = sqrt(1/2) on (0,1)
        let g = build_grid(1, 101).unwrap();
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - math::sqrt(0.5)).abs() < 1e-3);
    }

    #[test]
    fn lp_norm_survives_huge_fields() {
        let g = grid2(9);
        let f = sample(&g, &FnDescriptor::One).unwrap().scaled(1e300);
        let v = lp_norm(&f, 5.0).unwrap();
        assert!(v.is_finite());
        assert!((v / 1e300 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_exact_on_affine() {
        let g = grid2(17);
        let f = ScalarField::from_fn(&g, |c| 3.0 * c[0] - 2.0 * c[1] + 1.0);
        let grad = gradient(&f);
        for i in 0..g.num_nodes() {
            assert!((grad.components()[0][i] - 3.0).abs() < 1e-12);
            assert!((grad.components()[1][i] + 2.0).abs() < 1e-12);
        }
        let c = ScalarField::from_fn(&g, |_| 4.0);
        let gc = gradient(&c);
        assert!(gc.magnitude().abs_max() < 1e-12);
    }

    #[test]
    fn gradient_sine_second_order() {
        let g = build_grid(1, 101).unwrap();
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        let grad = gradient(&f);
        let mut worst = 0.0_f64;
        for i in 0..g.num_nodes() {
            let x = g.coords(i)[0];
            worst = worst.max((grad.components()[0][i] - math::PI * libm::cos(math::PI * x)).abs());
        }
        // O(h²): π³h²/6 ≈ 5e-4 interior, ~3x at the one-sided ends
        assert!(worst < 2e-3, "worst gradient error {worst}");
    }

    #[test]
    fn laplacian_zero_and_quadratic() {
        let g = build_grid(1, 21).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(laplacian_apply(&z).abs_max(), 0.0);
        // -d²/dx² of x(1-x) is 2, stencil-exact at interior nodes
        let f = ScalarField::from_fn(&g, |c| c[0] * (1.0 - c[0]));
        let lap = laplacian_apply(&f);
        for i in 1..g.num_nodes() - 1 {
            assert!((lap.values()[i] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_eigenfunction_second_order() {
        let g = grid2(65);
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        let lap = laplacian_apply(&f);
        let mut worst = 0.0_f64;
        for i in 0..g.num_nodes() {
            if !g.is_boundary(i) {
                let want = 2.0 * math::PI * math::PI * f.values()[i];
                worst = worst.max((lap.values()[i] - want).abs());
            }
        }
        // truncation constant 2π⁴/12·max|u| ≈ 16
        let h2 = g.h() * g.h();
        assert!(worst < 20.0 * h2, "worst stencil error {worst}");
    }

    #[test]
    fn operators_are_linear() {
        let g = grid2(9);
        let f = sample(&g, &FnDescriptor::SinProd).unwrap();
        let p = sample(&g, &FnDescriptor::parse("gauss:0.3").unwrap()).unwrap();
        let combo = f.scaled(2.5).add(&p.scaled(-1.25)).unwrap();
        let lhs = laplacian_apply(&combo);
        let rhs = laplacian_apply(&f)
            .scaled(2.5)
            .add(&laplacian_apply(&p).scaled(-1.25))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().abs_max() < 1e-9);
        let glhs = gradient(&combo);
        for axis in 0..2 {
            for i in 0..g.num_nodes() {
                let want = 2.5 * gradient(&f).components()[axis][i]
                    - 1.25 * gradient(&p).components()[axis][i];
                assert!((glhs.components()[axis][i] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quadrature_refines_at_second_order() {
        let g_c = grid2(17);
        let g_f = grid2(33);
        let exact = 4.0 / (math::PI * math::PI);
        let e_c = (integrate(&sample(&g_c, &FnDescriptor::SinProd).unwrap()) - exact).abs();
        let e_f = (integrate(&sample(&g_f, &FnDescriptor::SinProd).unwrap()) - exact).abs();
        let ratio = e_c / e_f;
        assert!(ratio > 3.0 && ratio < 5.0, "refinement ratio {ratio}");
    }

    #[test]
    fn dirichlet_detection() {
        let g = grid2(9);
        let z = ScalarField::zeros(&g);
        assert!(z.is_dirichlet());
        let one = sample(&g, &FnDescriptor::One).unwrap();
        assert!(!one.is_dirichlet());
        assert!(one.with_zero_boundary().is_dirichlet());
    }
}

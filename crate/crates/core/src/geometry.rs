//! Small linear-algebra helpers shared by the extractors and the detector.

use nalgebra::{Matrix3, SymmetricEigen};

pub type Vec3 = nalgebra::Vector3<f64>;

pub fn mean(points: &[Vec3]) -> Vec3 {
    if points.is_empty() {
        return Vec3::zeros();
    }
    points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64
}

/// Principal axes of a point cloud, sorted by decreasing variance.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalAxes {
    pub centroid: Vec3,
    /// Population variances along each axis, descending.
    pub variances: [f64; 3],
    pub axes: [Vec3; 3],
}

impl PrincipalAxes {
    pub fn total_variance(&self) -> f64 {
        self.variances.iter().sum()
    }
}

/// Eigen-decomposition of the covariance matrix of `points`.
pub fn principal_axes(points: &[Vec3]) -> PrincipalAxes {
    let centroid = mean(points);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    if !points.is_empty() {
        cov /= points.len() as f64;
    }
    let (variances, axes) = sorted_eigen(cov);
    PrincipalAxes {
        centroid,
        variances,
        axes,
    }
}

/// Eigenpairs of the uncentred second-moment matrix, descending.
pub fn second_moment_axes(vectors: &[Vec3]) -> ([f64; 3], [Vec3; 3]) {
    let mut m = Matrix3::zeros();
    for v in vectors {
        m += v * v.transpose();
    }
    sorted_eigen(m)
}

/// Eigenpairs of a symmetric matrix, descending by eigenvalue.
pub fn sorted_eigen(m: Matrix3<f64>) -> ([f64; 3], [Vec3; 3]) {
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.map(|i| eig.eigenvalues[i].max(0.0));
    let vectors = idx.map(|i| eig.eigenvectors.column(i).into_owned());
    (values, vectors)
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Returns `None` with fewer than two samples or no spread in `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= f64::EPSILON {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

pub fn mean_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median_of(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

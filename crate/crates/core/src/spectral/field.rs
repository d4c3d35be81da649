use std::borrow::Cow;

use super::basis::{Basis2D, Mode};
use crate::error::{Error, Result};

/// Which of the two interconvertible representations a [`GridField`] currently holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `n²` nodal values, row-major with the first coordinate as the slow index.
    Nodal,
    /// `n² − 1` cosine coefficients in [`Basis2D`] mode order.
    Spectral,
}

/// A real field on the grid of a [`Basis2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    basis: Basis2D,
    repr: Representation,
    data: Vec<f64>,
}

impl GridField {
    pub fn from_nodal(basis: &Basis2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != basis.node_count() {
            return Err(Error::invalid(
                "values",
                format!("expected {} nodal values, got {}", basis.node_count(), values.len()),
            ));
        }
        Ok(GridField { basis: basis.clone(), repr: Representation::Nodal, data: values })
    }

    pub fn from_spectral(basis: &Basis2D, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.mode_count() {
            return Err(Error::invalid(
                "coefficients",
                format!("expected {} coefficients, got {}", basis.mode_count(), coefficients.len()),
            ));
        }
        Ok(GridField { basis: basis.clone(), repr: Representation::Spectral, data: coefficients })
    }

    /// Samples `f(x, y)` at the cell centres.
    pub fn from_fn(basis: &Basis2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = basis.grid_size();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x = basis.node_coordinate(i);
            for l in 0..n {
                values.push(f(x, basis.node_coordinate(l)));
            }
        }
        GridField { basis: basis.clone(), repr: Representation::Nodal, data: values }
    }

    pub fn zeros(basis: &Basis2D) -> Self {
        GridField { basis: basis.clone(), repr: Representation::Spectral, data: vec![0.0; basis.mode_count()] }
    }

    /// Unit-norm eigenfunction of a single mode.
    pub fn unit_mode(basis: &Basis2D, mode: Mode) -> Result<Self> {
        let idx = basis
            .index_of(mode)
            .ok_or_else(|| Error::invalid("mode", format!("({}, {}) is not in the basis", mode.j, mode.k)))?;
        let mut f = Self::zeros(basis);
        f.data[idx] = 1.0;
        Ok(f)
    }

    pub fn basis(&self) -> &Basis2D {
        &self.basis
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Raw storage of the current representation.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_spectral(&self) -> GridField {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Nodal => GridField {
                basis: self.basis.clone(),
                repr: Representation::Spectral,
                data: forward(&self.basis, &self.data),
            },
        }
    }

    pub fn to_nodal(&self) -> GridField {
        match self.repr {
            Representation::Nodal => self.clone(),
            Representation::Spectral => GridField {
                basis: self.basis.clone(),
                repr: Representation::Nodal,
                data: inverse(&self.basis, &self.data),
            },
        }
    }

    pub fn to_representation(&self, repr: Representation) -> GridField {
        match repr {
            Representation::Nodal => self.to_nodal(),
            Representation::Spectral => self.to_spectral(),
        }
    }

    pub fn coefficients(&self) -> Cow<'_, [f64]> {
        match self.repr {
            Representation::Spectral => Cow::Borrowed(&self.data),
            Representation::Nodal => Cow::Owned(forward(&self.basis, &self.data)),
        }
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        match self.repr {
            Representation::Spectral => self.data,
            Representation::Nodal => forward(&self.basis, &self.data),
        }
    }

    pub fn nodal_values(&self) -> Cow<'_, [f64]> {
        match self.repr {
            Representation::Nodal => Cow::Borrowed(&self.data),
            Representation::Spectral => Cow::Owned(inverse(&self.basis, &self.data)),
        }
    }

    pub fn into_nodal_values(self) -> Vec<f64> {
        match self.repr {
            Representation::Nodal => self.data,
            Representation::Spectral => inverse(&self.basis, &self.data),
        }
    }

    /// Euclidean norm of the stored values. For a mean-zero field both representations agree.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> f64 {
        match self.repr {
            Representation::Spectral => 0.0,
            Representation::Nodal => self.data.iter().sum::<f64>() / self.data.len() as f64,
        }
    }

    /// `self + scale * other`, in the representation of `self`.
    pub fn add_scaled(&self, scale: f64, other: &GridField) -> Result<GridField> {
        self.basis.ensure_same(&other.basis, "add_scaled")?;
        let rhs = other.to_representation(self.repr);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + scale * b).collect();
        Ok(GridField { basis: self.basis.clone(), repr: self.repr, data })
    }

    pub fn scaled(&self, factor: f64) -> GridField {
        GridField { basis: self.basis.clone(), repr: self.repr, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Subtract the nodal mean (no-op on spectral fields).
    pub fn remove_mean(&mut self) {
        if self.repr == Representation::Nodal {
            let m = self.mean();
            self.data.iter_mut().for_each(|v| *v -= m);
        }
    }

    /// Map each coefficient, producing a field in the same representation as `self`.
    pub(crate) fn map_coefficients(&self, f: impl Fn(usize, f64) -> f64) -> GridField {
        let coeffs = self.coefficients();
        let mapped: Vec<f64> = coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        let out = GridField { basis: self.basis.clone(), repr: Representation::Spectral, data: mapped };
        out.to_representation(self.repr)
    }
}

// Separable orthonormal DCT-II: coefficients = C F Cᵀ with C[j][i] = w_j cos(jπ(i+½)/n).
fn forward(basis: &Basis2D, nodal: &[f64]) -> Vec<f64> {
    let n = basis.grid_size();
    let c = basis.cos_table();
    let mut tmp = vec![0.0; n * n];
    for j in 0..n {
        let row = &c[j * n..(j + 1) * n];
        let out = &mut tmp[j * n..(j + 1) * n];
        for (i, &w) in row.iter().enumerate() {
            let src = &nodal[i * n..(i + 1) * n];
            for (o, &s) in out.iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    let mut coeffs = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        let src = &tmp[j * n..(j + 1) * n];
        for k in 0..n {
            if j == 0 && k == 0 {
                continue;
            }
            let row = &c[k * n..(k + 1) * n];
            coeffs.push(row.iter().zip(src).map(|(a, b)| a * b).sum());
        }
    }
    coeffs
}

fn inverse(basis: &Basis2D, coeffs: &[f64]) -> Vec<f64> {
    let n = basis.grid_size();
    let c = basis.cos_table();
    // tmp[j][l] = Σ_k coeff[j][k] C[k][l]
    let mut tmp = vec![0.0; n * n];
    for j in 0..n {
        let out = &mut tmp[j * n..(j + 1) * n];
        for k in 0..n {
            let v = if j == 0 && k == 0 { 0.0 } else { coeffs[j * n + k - 1] };
            if v == 0.0 {
                continue;
            }
            let row = &c[k * n..(k + 1) * n];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += v * w;
            }
        }
    }
    // nodal[i][l] = Σ_j C[j][i] tmp[j][l]
    let mut nodal = vec![0.0; n * n];
    for j in 0..n {
        let src = &tmp[j * n..(j + 1) * n];
        let row = &c[j * n..(j + 1) * n];
        for (i, &w) in row.iter().enumerate() {
            let out = &mut nodal[i * n..(i + 1) * n];
            for (o, &s) in out.iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    nodal
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::rng::{standard_normals, Purpose};

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn constant_field_has_no_coefficients() {
        let b = Basis2D::new(12).unwrap();
        let f = GridField::from_fn(&b, |_, _| 3.7);
        let c = f.coefficients();
        assert!(c.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn single_cosine_maps_to_single_mode() {
        let n = 16;
        let b = Basis2D::new(n).unwrap();
        let f = GridField::from_fn(&b, |x, _| (PI * x).cos());
        let c = f.coefficients();
        let idx = b.index_of(Mode { j: 1, k: 0 }).unwrap();

        // Direct quadrature oracle: coefficient = <f, e_(1,0)> with e the unit-norm sampled eigenvector.
        let e = |i: usize, l: usize| {
            let _ = l;
            (2.0 / n as f64).sqrt() * (1.0 / n as f64).sqrt() * (PI * (i as f64 + 0.5) / n as f64).cos()
        };
        let vals = f.nodal_values();
        let mut quad = 0.0;
        for i in 0..n {
            for l in 0..n {
                quad += vals[i * n + l] * e(i, l);
            }
        }
        assert!((c[idx] - quad).abs() < 1e-12);
        for (i, v) in c.iter().enumerate() {
            if i != idx {
                assert!(v.abs() < 1e-12, "mode {:?} = {v}", b.mode_at(i));
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let b = Basis2D::new(20).unwrap();
        let coeffs = standard_normals(1, Purpose::Oracle, 0, 0, b.mode_count());
        let f = GridField::from_spectral(&b, coeffs.clone()).unwrap();
        let nodal = f.to_nodal();
        assert!(nodal.mean().abs() < 1e-12);
        assert!((nodal.norm() - f.norm()).abs() <= 1e-12 * f.norm());
        let back = nodal.to_spectral();
        assert!(rel_err(back.data(), &coeffs) < 1e-12);
    }

    #[test]
    fn add_scaled_checks_basis() {
        let a = GridField::zeros(&Basis2D::new(4).unwrap());
        let b = GridField::zeros(&Basis2D::new(5).unwrap());
        assert!(matches!(a.add_scaled(1.0, &b), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn wrong_lengths_rejected() {
        let b = Basis2D::new(4).unwrap();
        assert!(GridField::from_nodal(&b, vec![0.0; 15]).is_err());
        assert!(GridField::from_spectral(&b, vec![0.0; 16]).is_err());
    }
}

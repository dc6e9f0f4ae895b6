//! Time integration: Newmark-β for the bridge, Dormand–Prince 5(4) for the vehicle.

mod newmark;
mod rk;

pub use newmark::{
    newmark_solve, DenseForceHistory, ForceHistory, NewmarkParams, NewmarkSolver, NewmarkState,
    NewmarkStepper,
};
pub use rk::{
    rk_integrate, BaseInput, DormandPrince, GridMode, LinearSegment, Ode, RkTolerances,
    SampledInput,
};

use ndarray::Array2;

use crate::error::{Result, VbiError};
use crate::scalar::Real;

/// Response histories on a uniform time grid, one column per recorded DOF.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesResult<T = f64> {
    pub time_step: T,
    pub dof_labels: Vec<String>,
    pub displacement: Array2<T>,
    pub velocity: Array2<T>,
    pub acceleration: Array2<T>,
}

impl<T: Real> TimeSeriesResult<T> {
    pub fn zeros(time_step: T, dof_labels: Vec<String>, steps: usize) -> Self {
        let cols = dof_labels.len();
        Self {
            time_step,
            dof_labels,
            displacement: Array2::zeros((steps, cols)),
            velocity: Array2::zeros((steps, cols)),
            acceleration: Array2::zeros((steps, cols)),
        }
    }

    pub fn steps(&self) -> usize {
        self.displacement.nrows()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.dof_labels.iter().position(|l| l == label)
    }

    /// Displacement history of one recorded DOF.
    pub fn displacement_of(&self, label: &str) -> Result<Vec<T>> {
        let c = self.column_index(label).ok_or(VbiError::InvalidParameter {
            name: "label",
            reason: format!("no recorded DOF named `{label}`"),
        })?;
        Ok(self.displacement.column(c).to_vec())
    }

    pub fn set_row(&mut self, step: usize, u: &[T], v: &[T], a: &[T]) {
        for c in 0..self.dof_labels.len() {
            self.displacement[[step, c]] = u[c];
            self.velocity[[step, c]] = v[c];
            self.acceleration[[step, c]] = a[c];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.displacement
            .iter()
            .chain(self.velocity.iter())
            .chain(self.acceleration.iter())
            .all(|v| v.is_finite())
    }
}

//! Bridge model: box-girder sections, Euler–Bernoulli beam assembly with
//! simply-supported ends, modal frequencies and Rayleigh damping.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::linalg::{subspace, SymBand};
use crate::scalar::Real;

/// Structural steel, the material assumed for every reference bridge.
pub const STEEL_ELASTIC_MODULUS: f64 = 200.0e9;
pub const STEEL_DENSITY: f64 = 7850.0;
pub const DEFAULT_NODE_SPACING: f64 = 0.1;
pub const DEFAULT_DAMPING_RATIO: f64 = 0.02;

/// Hollow rectangular (box) cross-section, outside dimensions in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSection<T = f64> {
    pub depth: T,
    pub width: T,
    pub flange_thickness: T,
    pub web_thickness: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionProperties<T = f64> {
    /// m²
    pub area: T,
    /// m⁴, about the horizontal centroidal axis
    pub second_moment: T,
}

impl<T: Real> BoxSection<T> {
    pub fn new(depth: T, width: T, flange_thickness: T, web_thickness: T) -> Result<Self> {
        let s = Self {
            depth,
            width,
            flange_thickness,
            web_thickness,
        };
        s.validate()?;
        Ok(s)
    }

    /// Walls may meet in the middle (`2·t = outside dimension`), which is the solid limit.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("depth", self.depth),
            ("width", self.width),
            ("flange_thickness", self.flange_thickness),
            ("web_thickness", self.web_thickness),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        let two = T::lit(2.0);
        if two * self.flange_thickness > self.depth {
            return Err(invalid("flange_thickness", "two flanges exceed the outside depth"));
        }
        if two * self.web_thickness > self.width {
            return Err(invalid("web_thickness", "two webs exceed the outside width"));
        }
        Ok(())
    }
}

pub fn section_properties<T: Real>(section: &BoxSection<T>) -> Result<SectionProperties<T>> {
    section.validate()?;
    let two = T::lit(2.0);
    let (b, d) = (section.width, section.depth);
    let bi = b - two * section.web_thickness;
    let di = d - two * section.flange_thickness;
    Ok(SectionProperties {
        area: b * d - bi * di,
        second_moment: (b * d * d * d - bi * di * di * di) / T::lit(12.0),
    })
}

/// One of the six reference bridges and its reported fundamental frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBridge {
    pub span: f64,
    pub depth: f64,
    pub width: f64,
    pub flange_thickness: f64,
    pub web_thickness: f64,
    pub fundamental_hz: f64,
}

pub const REFERENCE_BRIDGES: [ReferenceBridge; 6] = [
    ReferenceBridge { span: 15.0, depth: 0.60, width: 0.30, flange_thickness: 0.04, web_thickness: 0.02, fundamental_hz: 8.03 },
    ReferenceBridge { span: 30.0, depth: 1.10, width: 0.50, flange_thickness: 0.05, web_thickness: 0.03, fundamental_hz: 3.63 },
    ReferenceBridge { span: 50.0, depth: 1.60, width: 1.30, flange_thickness: 0.10, web_thickness: 0.05, fundamental_hz: 2.05 },
    ReferenceBridge { span: 100.0, depth: 2.40, width: 2.00, flange_thickness: 0.15, web_thickness: 0.10, fundamental_hz: 0.75 },
    ReferenceBridge { span: 200.0, depth: 3.00, width: 2.50, flange_thickness: 0.15, web_thickness: 0.10, fundamental_hz: 0.24 },
    ReferenceBridge { span: 500.0, depth: 5.00, width: 4.00, flange_thickness: 0.50, web_thickness: 0.25, fundamental_hz: 0.06 },
];

impl ReferenceBridge {
    pub fn find(span: f64) -> Option<&'static ReferenceBridge> {
        REFERENCE_BRIDGES.iter().find(|r| (r.span - span).abs() < 1e-9)
    }

    pub fn section<T: Real>(&self) -> BoxSection<T> {
        BoxSection {
            depth: T::lit(self.depth),
            width: T::lit(self.width),
            flange_thickness: T::lit(self.flange_thickness),
            web_thickness: T::lit(self.web_thickness),
        }
    }
}

/// Geometry, material and discretization of a simply-supported bridge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec<T = f64> {
    pub span: T,
    pub section: BoxSection<T>,
    pub elastic_modulus: T,
    pub mass_density: T,
    pub node_spacing: T,
    pub damping_ratio: T,
    /// 1-based mode indices used to calibrate Rayleigh damping.
    pub damping_calibration_modes: (usize, usize),
}

impl<T: Real> BridgeSpec<T> {
    /// Steel bridge with default discretization and 2% Rayleigh damping on modes 1 and 2.
    pub fn steel(span: T, section: BoxSection<T>) -> Self {
        Self {
            span,
            section,
            elastic_modulus: T::lit(STEEL_ELASTIC_MODULUS),
            mass_density: T::lit(STEEL_DENSITY),
            node_spacing: T::lit(DEFAULT_NODE_SPACING),
            damping_ratio: T::lit(DEFAULT_DAMPING_RATIO),
            damping_calibration_modes: (1, 2),
        }
    }

    /// One of the reference spans (15, 30, 50, 100, 200, 500 m).
    pub fn reference(span: f64) -> Result<Self> {
        let r = ReferenceBridge::find(span).ok_or_else(|| {
            invalid(
                "span",
                format!("{span} m is not a reference span (15, 30, 50, 100, 200, 500)"),
            )
        })?;
        Ok(Self::steel(T::lit(r.span), r.section()))
    }

    pub fn with_node_spacing(mut self, spacing: T) -> Self {
        self.node_spacing = spacing;
        self
    }

    pub fn element_count(&self) -> Result<usize> {
        if !(self.node_spacing > T::zero()) {
            return Err(invalid("node_spacing", "must be positive"));
        }
        if !(self.span > T::zero()) {
            return Err(invalid("span", "must be positive"));
        }
        let ratio = self.span / self.node_spacing;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-6) * n.max(T::one()) {
            return Err(invalid(
                "node_spacing",
                format!("span {} is not an integer multiple of {}", self.span, self.node_spacing),
            ));
        }
        let n = n.to_usize().unwrap_or(0);
        if n < 2 {
            return Err(invalid("node_spacing", "need at least two elements"));
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        self.section.validate()?;
        self.element_count()?;
        if !(self.elastic_modulus > T::zero()) {
            return Err(invalid("elastic_modulus", "must be positive"));
        }
        if !(self.mass_density > T::zero()) {
            return Err(invalid("mass_density", "must be positive"));
        }
        if !(self.damping_ratio >= T::zero() && self.damping_ratio < T::one()) {
            return Err(invalid("damping_ratio", "must lie in [0, 1)"));
        }
        let (i, j) = self.damping_calibration_modes;
        if i == 0 || j == 0 || i == j {
            return Err(invalid(
                "damping_calibration_modes",
                "need two distinct 1-based mode indices",
            ));
        }
        Ok(())
    }
}

/// Mass, damping and stiffness of a linear structure in banded storage.
pub trait LinearStructure<T: Real> {
    fn mass(&self) -> &SymBand<T>;
    fn damping(&self) -> &SymBand<T>;
    fn stiffness(&self) -> &SymBand<T>;

    fn dof_count(&self) -> usize {
        self.stiffness().dim()
    }
}

/// Plain `M, C, K` triple, handy for small test structures.
#[derive(Debug, Clone)]
pub struct StructuralMatrices<T> {
    pub mass: SymBand<T>,
    pub damping: SymBand<T>,
    pub stiffness: SymBand<T>,
}

impl<T: Real> LinearStructure<T> for StructuralMatrices<T> {
    fn mass(&self) -> &SymBand<T> {
        &self.mass
    }
    fn damping(&self) -> &SymBand<T> {
        &self.damping
    }
    fn stiffness(&self) -> &SymBand<T> {
        &self.stiffness
    }
}

/// Assembled bridge with boundary conditions applied.
///
/// Every node carries a vertical translation and a rotation; the end
/// translations are removed. Free DOFs keep node order, so the half
/// bandwidth stays at 3.
#[derive(Debug, Clone)]
pub struct BeamSystem<T = f64> {
    pub mass_matrix: SymBand<T>,
    pub stiffness_matrix: SymBand<T>,
    pub damping_matrix: SymBand<T>,
    pub node_positions: Vec<T>,
    /// Indices in the unconstrained numbering (`2·node` translation, `2·node + 1` rotation).
    pub constrained_dofs: Vec<usize>,
    pub section: SectionProperties<T>,
    pub rayleigh: RayleighCoefficients<T>,
    translation: Vec<Option<usize>>,
}

impl<T: Real> LinearStructure<T> for BeamSystem<T> {
    fn mass(&self) -> &SymBand<T> {
        &self.mass_matrix
    }
    fn damping(&self) -> &SymBand<T> {
        &self.damping_matrix
    }
    fn stiffness(&self) -> &SymBand<T> {
        &self.stiffness_matrix
    }
}

impl<T: Real> BeamSystem<T> {
    pub fn node_count(&self) -> usize {
        self.node_positions.len()
    }

    pub fn element_count(&self) -> usize {
        self.node_count() - 1
    }

    pub fn free_dof_count(&self) -> usize {
        self.stiffness_matrix.dim()
    }

    /// Free-DOF index of the vertical translation at `node`, `None` at the supports.
    pub fn translation_dof(&self, node: usize) -> Option<usize> {
        self.translation.get(node).copied().flatten()
    }

    pub fn midspan_node(&self) -> usize {
        self.element_count() / 2
    }

    /// Static solution `K u = f`.
    pub fn static_displacement(&self, load: &[T]) -> Result<Vec<T>> {
        if load.len() != self.free_dof_count() {
            return Err(VbiError::DimensionMismatch {
                context: "static load vector",
                expected: self.free_dof_count(),
                found: load.len(),
            });
        }
        Ok(self.stiffness_matrix.cholesky()?.solve(load))
    }

    /// Writes one of the matrices in Matrix Market coordinate format.
    pub fn export_matrix<W: Write>(&self, which: MatrixKind, out: W) -> io::Result<()> {
        let m = match which {
            MatrixKind::Mass => &self.mass_matrix,
            MatrixKind::Stiffness => &self.stiffness_matrix,
            MatrixKind::Damping => &self.damping_matrix,
        };
        write_matrix_market(m, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Mass,
    Stiffness,
    Damping,
}

/// Element matrices of a 2-node Hermite beam: (stiffness, consistent mass).
fn element_matrices<T: Real>(ei: T, rho_a: T, h: T) -> ([[T; 4]; 4], [[T; 4]; 4]) {
    let l = T::lit;
    let k = ei / (h * h * h);
    let kk = [
        [l(12.0), l(6.0) * h, l(-12.0), l(6.0) * h],
        [l(6.0) * h, l(4.0) * h * h, l(-6.0) * h, l(2.0) * h * h],
        [l(-12.0), l(-6.0) * h, l(12.0), l(-6.0) * h],
        [l(6.0) * h, l(2.0) * h * h, l(-6.0) * h, l(4.0) * h * h],
    ]
    .map(|row| row.map(|v| v * k));
    let m = rho_a * h / l(420.0);
    let mm = [
        [l(156.0), l(22.0) * h, l(54.0), l(-13.0) * h],
        [l(22.0) * h, l(4.0) * h * h, l(13.0) * h, l(-3.0) * h * h],
        [l(54.0), l(13.0) * h, l(156.0), l(-22.0) * h],
        [l(-13.0) * h, l(-3.0) * h * h, l(-22.0) * h, l(4.0) * h * h],
    ]
    .map(|row| row.map(|v| v * m));
    (kk, mm)
}

/// Assembles `(K, M)` over all `2·(n+1)` DOFs, no boundary conditions.
pub(crate) fn assemble_unconstrained<T: Real>(spec: &BridgeSpec<T>) -> Result<(SymBand<T>, SymBand<T>)> {
    spec.validate()?;
    let props = section_properties(&spec.section)?;
    let ne = spec.element_count()?;
    let h = spec.span / T::from_usize_lossy(ne);
    let ndof = 2 * (ne + 1);
    let mut k = SymBand::zeros(ndof, 3);
    let mut m = SymBand::zeros(ndof, 3);
    let (ke, me) = element_matrices(
        spec.elastic_modulus * props.second_moment,
        spec.mass_density * props.area,
        h,
    );
    for e in 0..ne {
        let base = 2 * e;
        for a in 0..4 {
            for b in 0..=a {
                k.add(base + a, base + b, ke[a][b]);
                m.add(base + a, base + b, me[a][b]);
            }
        }
    }
    Ok((k, m))
}

pub fn assemble_beam<T: Real>(spec: &BridgeSpec<T>) -> Result<BeamSystem<T>> {
    let (k_full, m_full) = assemble_unconstrained(spec)?;
    let props = section_properties(&spec.section)?;
    let ne = spec.element_count()?;
    let nn = ne + 1;
    let h = spec.span / T::from_usize_lossy(ne);
    let constrained = vec![0, 2 * ne];

    let mut free_index = vec![None; 2 * nn];
    let mut next = 0;
    for (dof, slot) in free_index.iter_mut().enumerate() {
        if !constrained.contains(&dof) {
            *slot = Some(next);
            next += 1;
        }
    }
    let nfree = next;
    let mut k = SymBand::zeros(nfree, 3);
    let mut m = SymBand::zeros(nfree, 3);
    k_full.for_each_lower(|i, j, v| {
        if let (Some(fi), Some(fj)) = (free_index[i], free_index[j]) {
            k.add(fi, fj, v);
        }
    });
    m_full.for_each_lower(|i, j, v| {
        if let (Some(fi), Some(fj)) = (free_index[i], free_index[j]) {
            m.add(fi, fj, v);
        }
    });
    // Singular stiffness means the supports do not restrain the beam.
    k.cholesky()?;

    let (ci, cj) = spec.damping_calibration_modes;
    let (damping, rayleigh) = if spec.damping_ratio == T::zero() {
        (SymBand::zeros(nfree, 3), RayleighCoefficients::default())
    } else {
        rayleigh_damping(&m, &k, spec.damping_ratio, (ci, cj))?
    };

    let translation = (0..nn).map(|node| free_index[2 * node]).collect();
    Ok(BeamSystem {
        mass_matrix: m,
        stiffness_matrix: k,
        damping_matrix: damping,
        node_positions: (0..nn).map(|i| h * T::from_usize_lossy(i)).collect(),
        constrained_dofs: constrained,
        section: props,
        rayleigh,
        translation,
    })
}

/// The `count` lowest natural frequencies in Hz, ascending.
pub fn modal_frequencies<T: Real, S: LinearStructure<T>>(system: &S, count: usize) -> Result<Vec<T>> {
    let lambdas = subspace::lowest_eigenvalues(system.stiffness(), system.mass(), count)?;
    Ok(lambdas
        .into_iter()
        .map(|l| l.max(T::zero()).sqrt() / T::TAU())
        .collect())
}

/// `C = a₀ M + a₁ K`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RayleighCoefficients<T = f64> {
    pub mass: T,
    pub stiffness: T,
}

impl<T: Real> RayleighCoefficients<T> {
    /// Damping ratio the coefficients produce at circular frequency `omega`.
    pub fn modal_ratio(&self, omega: T) -> T {
        self.mass / (T::lit(2.0) * omega) + self.stiffness * omega / T::lit(2.0)
    }

    /// Solves `ζ_i = a₀/(2ω_i) + a₁ω_i/2` for two modes.
    pub fn calibrate(zeta: (T, T), omega: (T, T)) -> Result<Self> {
        let (wi, wj) = omega;
        let two = T::lit(2.0);
        let det = (wj / wi - wi / wj) / T::lit(4.0);
        if det.abs() <= T::epsilon() * T::lit(16.0) {
            return Err(VbiError::Singular(
                "Rayleigh calibration frequencies coincide",
            ));
        }
        // [1/(2ωi)  ωi/2] [a0]   [ζi]
        // [1/(2ωj)  ωj/2] [a1] = [ζj]
        let a0 = (zeta.0 * wj / two - zeta.1 * wi / two) / det;
        let a1 = (zeta.1 / (two * wi) - zeta.0 / (two * wj)) / det;
        Ok(Self {
            mass: a0,
            stiffness: a1,
        })
    }
}

/// Rayleigh damping matrix with ratio `damping_ratio` at both 1-based calibration modes.
pub fn rayleigh_damping<T: Real>(
    mass: &SymBand<T>,
    stiffness: &SymBand<T>,
    damping_ratio: T,
    calibration_modes: (usize, usize),
) -> Result<(SymBand<T>, RayleighCoefficients<T>)> {
    let (i, j) = calibration_modes;
    if i == 0 || j == 0 || i == j {
        return Err(invalid(
            "damping_calibration_modes",
            "need two distinct 1-based mode indices",
        ));
    }
    if damping_ratio == T::zero() {
        return Ok((
            SymBand::zeros(mass.dim(), mass.half_bandwidth()),
            RayleighCoefficients::default(),
        ));
    }
    let lambdas = subspace::lowest_eigenvalues(stiffness, mass, i.max(j))?;
    let wi = lambdas[i - 1].sqrt();
    let wj = lambdas[j - 1].sqrt();
    let coeffs = RayleighCoefficients::calibrate((damping_ratio, damping_ratio), (wi, wj))?;
    let c = mass.linear_combination(coeffs.mass, stiffness, coeffs.stiffness)?;
    Ok((c, coeffs))
}

/// Matrix Market coordinate format, lower triangle, 1-based indices.
///
/// ```text
/// %%MatrixMarket matrix coordinate real symmetric
/// <rows> <cols> <nonzeros>
/// <row> <col> <value>
/// ```
pub fn write_matrix_market<T: Real, W: Write>(m: &SymBand<T>, mut out: W) -> io::Result<()> {
    let mut entries = Vec::new();
    m.for_each_lower(|i, j, v| {
        if v != T::zero() {
            entries.push((i, j, v));
        }
    });
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bridge15() -> BridgeSpec<f64> {
        BridgeSpec::reference(15.0).unwrap()
    }

    #[test]
    fn hollow_box_properties() {
        let s = BoxSection::new(0.60, 0.30, 0.04, 0.02).unwrap();
        let p = section_properties(&s).unwrap();
        assert_relative_eq!(p.area, 0.0448, max_relative = 1e-12);
        assert_relative_eq!(p.second_moment, 2.353_493_333_333_333e-3, max_relative = 1e-9);
    }

    #[test]
    fn solid_limit() {
        let s = BoxSection::new(0.8, 0.4, 0.4, 0.2).unwrap();
        let p = section_properties(&s).unwrap();
        assert_relative_eq!(p.area, 0.32, max_relative = 1e-12);
        assert_relative_eq!(p.second_moment, 0.4 * 0.8f64.powi(3) / 12.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_walls() {
        assert!(BoxSection::new(0.6, 0.3, 0.0, 0.02).is_err());
        assert!(BoxSection::new(0.6, 0.3, -0.1, 0.02).is_err());
        assert!(BoxSection::new(0.6, 0.3, 0.31, 0.02).is_err());
        assert!(BoxSection::new(0.6, 0.3, 0.04, 0.2).is_err());
    }

    #[test]
    fn spacing_must_divide_span() {
        let spec = bridge15().with_node_spacing(0.7);
        assert!(spec.element_count().is_err());
        let spec = bridge15().with_node_spacing(10.0);
        assert!(spec.element_count().is_err());
        assert_eq!(bridge15().element_count().unwrap(), 150);
    }

    #[test]
    fn midspan_static_deflection() {
        for &spacing in &[0.15, 0.1] {
            let spec = bridge15().with_node_spacing(spacing);
            let sys = assemble_beam(&spec).unwrap();
            let p = 1.0e4;
            let mut f = vec![0.0; sys.free_dof_count()];
            let mid = sys.translation_dof(sys.midspan_node()).unwrap();
            f[mid] = p;
            let u = sys.static_displacement(&f).unwrap();
            let ei = spec.elastic_modulus * sys.section.second_moment;
            let exact = p * 15f64.powi(3) / (48.0 * ei);
            assert_relative_eq!(u[mid], exact, max_relative = 1e-3);
        }
    }

    #[test]
    fn consistent_mass_completeness() {
        let spec = bridge15();
        let (_, m) = assemble_unconstrained(&spec).unwrap();
        let u: Vec<f64> = (0..m.dim()).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let total = m.bilinear(&u, &u);
        let p = section_properties(&spec.section).unwrap();
        assert_relative_eq!(total, spec.mass_density * p.area * 15.0, max_relative = 5e-3);
    }

    #[test]
    fn matrices_symmetric_and_supports_fixed() {
        let sys = assemble_beam(&bridge15()).unwrap();
        assert_eq!(sys.free_dof_count(), 2 * 151 - 2);
        assert!(sys.translation_dof(0).is_none());
        assert!(sys.translation_dof(150).is_none());
        assert_eq!(sys.translation_dof(1), Some(1));
        for m in [&sys.mass_matrix, &sys.stiffness_matrix, &sys.damping_matrix] {
            let d = m.to_dense();
            let asym = (&d - &d.t()).mapv(|x: f64| x * x).sum().sqrt();
            assert!(asym <= 1e-12 * m.frobenius_norm());
        }
    }

    #[test]
    fn fifteen_metre_frequency() {
        let sys = assemble_beam(&bridge15()).unwrap();
        let f = modal_frequencies(&sys, 3).unwrap();
        assert!((f[0] - 8.03).abs() / 8.03 < 0.02, "f1 = {}", f[0]);
        // Higher modes of a simply-supported beam scale with i².
        assert_relative_eq!(f[1] / f[0], 4.0, max_relative = 1e-3);
        assert_relative_eq!(f[2] / f[0], 9.0, max_relative = 1e-3);
    }

    #[test]
    fn frequency_scales_with_sqrt_modulus() {
        let spec = bridge15().with_node_spacing(0.5);
        let mut stiff = spec;
        stiff.elastic_modulus = spec.elastic_modulus * 2.0;
        let f1 = modal_frequencies(&assemble_beam(&spec).unwrap(), 4).unwrap();
        let f2 = modal_frequencies(&assemble_beam(&stiff).unwrap(), 4).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert_relative_eq!(b / a, 2f64.sqrt(), max_relative = 1e-9);
        }
    }

    #[test]
    fn rayleigh_hits_calibration_modes() {
        let spec = BridgeSpec::<f64>::reference(50.0).unwrap().with_node_spacing(0.5);
        let sys = assemble_beam(&spec).unwrap();
        let f = modal_frequencies(&sys, 3).unwrap();
        let w: Vec<f64> = f.iter().map(|x| x * std::f64::consts::TAU).collect();
        assert_relative_eq!(sys.rayleigh.modal_ratio(w[0]), 0.02, max_relative = 1e-8);
        assert_relative_eq!(sys.rayleigh.modal_ratio(w[1]), 0.02, max_relative = 1e-8);
        // Mode 3 sits above the calibration band; evaluate a₀/(2ω₃) + a₁ω₃/2 directly.
        let (w1, w2, w3) = (w[0], w[1], w[2]);
        let a0 = 2.0 * 0.02 * w1 * w2 / (w1 + w2);
        let a1 = 2.0 * 0.02 / (w1 + w2);
        let z3 = a0 / (2.0 * w3) + a1 * w3 / 2.0;
        assert!(z3 > 0.0);
        assert_relative_eq!(sys.rayleigh.modal_ratio(w3), z3, max_relative = 1e-10);
    }

    #[test]
    fn zero_damping_gives_zero_matrix() {
        let mut spec = bridge15().with_node_spacing(0.5);
        spec.damping_ratio = 0.0;
        let sys = assemble_beam(&spec).unwrap();
        assert!(sys.damping_matrix.is_zero());
    }

    #[test]
    fn identical_calibration_frequencies_rejected() {
        assert!(RayleighCoefficients::calibrate((0.02, 0.02), (3.0, 3.0)).is_err());
        let spec = bridge15().with_node_spacing(0.5);
        let (k, m) = assemble_unconstrained(&spec).unwrap();
        assert!(rayleigh_damping(&m, &k, 0.02, (2, 2)).is_err());
    }

    #[test]
    fn matrix_market_header() {
        let spec = bridge15().with_node_spacing(1.5);
        let sys = assemble_beam(&spec).unwrap();
        let mut buf = Vec::new();
        sys.export_matrix(MatrixKind::Stiffness, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "%%MatrixMarket matrix coordinate real symmetric");
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(dims[0], sys.free_dof_count());
        assert_eq!(lines.count(), dims[2]);
    }
}

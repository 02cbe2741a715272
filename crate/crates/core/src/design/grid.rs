use std::str::FromStr;

use crate::{Error, Result, C64};

/// Transverse field sampled on a uniform rectangular grid (row-major, `ny` rows of `nx`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub values: Vec<C64>,
}

impl FieldGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, values: Vec<C64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Data("field grid must be nonempty".into()));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::Data(format!("cell sizes must be positive, got {dx} x {dy}")));
        }
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch { expected: nx * ny, found: values.len() });
        }
        Ok(FieldGrid { nx, ny, dx, dy, values })
    }

    /// Samples `f(x, y)` at cell centres of a grid centred on the origin.
    pub fn from_fn(nx: usize, ny: usize, dx: f64, dy: f64, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = (j as f64 + 0.5 - 0.5 * ny as f64) * dy;
            for i in 0..nx {
                let x = (i as f64 + 0.5 - 0.5 * nx as f64) * dx;
                values.push(f(x, y));
            }
        }
        Self::new(nx, ny, dx, dy, values)
    }

    pub fn scaled(&self, c: C64) -> Self {
        FieldGrid { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    fn cell(&self) -> f64 {
        self.dx * self.dy
    }

    fn same_geometry(&self, other: &FieldGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.dy - other.dy).abs() <= 1e-12 * self.dy
    }

    /// ∫|E|² and ∫|E|²E.
    fn moments(&self) -> (f64, C64) {
        let mut p = 0.0;
        let mut q = C64::new(0.0, 0.0);
        for v in &self.values {
            p += v.norm_sqr();
            q += v * v.norm_sqr();
        }
        (p * self.cell(), q * self.cell())
    }

    /// A = (∫|E|²)³ / |∫|E|²E|²
    pub fn mode_area(&self) -> Result<f64> {
        let (p, q) = self.moments();
        if q.norm() == 0.0 {
            return Err(Error::Data("field is identically zero".into()));
        }
        Ok(p.powi(3) / q.norm_sqr())
    }
}

impl FromStr for FieldGrid {
    type Err = Error;

    /// Header line `nx ny dx dy` (metres), then `ny` rows of `nx` real values.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::Data("empty field file".into()))?;
        let h: Vec<&str> = header.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        if h.len() != 4 {
            return Err(Error::Data(format!("line {}: header must be `nx ny dx dy`", hl + 1)));
        }
        let bad = |what: &str| Error::Data(format!("line {}: invalid {what}", hl + 1));
        let nx: usize = h[0].parse().map_err(|_| bad("nx"))?;
        let ny: usize = h[1].parse().map_err(|_| bad("ny"))?;
        let dx: f64 = h[2].parse().map_err(|_| bad("dx"))?;
        let dy: f64 = h[3].parse().map_err(|_| bad("dy"))?;
        let mut values = Vec::with_capacity(nx * ny);
        for (ln, line) in lines {
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Data(format!("line {}: cannot parse `{tok}`", ln + 1)))?;
                values.push(C64::new(v, 0.0));
            }
        }
        FieldGrid::new(nx, ny, dx, dy, values)
    }
}

/// Overlap factor |ζ| and effective area A_eff = (A_ω² A_2ω)^{1/3}, where
/// ζ = ∫(E_ω*)²E_2ω / (|∫|E_ω|²E_ω|^{2/3} |∫|E_2ω|²E_2ω|^{1/3}).
pub fn overlap_and_area(field_omega: &FieldGrid, field_2omega: &FieldGrid) -> Result<(f64, f64)> {
    if !field_omega.same_geometry(field_2omega) {
        return Err(Error::Data("fields are sampled on different grids".into()));
    }
    let (_, q1) = field_omega.moments();
    let (_, q2) = field_2omega.moments();
    if q1.norm() == 0.0 || q2.norm() == 0.0 {
        return Err(Error::Data("field is identically zero".into()));
    }
    let num: C64 = field_omega
        .values
        .iter()
        .zip(&field_2omega.values)
        .map(|(e1, e2)| e1.conj() * e1.conj() * e2)
        .sum::<C64>()
        * field_omega.cell();
    let zeta = num.norm() / (q1.norm().powf(2.0 / 3.0) * q2.norm().powf(1.0 / 3.0));
    let a1 = field_omega.mode_area()?;
    let a2 = field_2omega.mode_area()?;
    Ok((zeta, (a1 * a1 * a2).cbrt()))
}

//! Correlation series over a grid of one time variable.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{EtaVector, Permutation};
use crate::correlation::{check_increasing, EvolvedCache, Evaluator};
use crate::error::{Error, Result};

/// A time slot as an affine function of the swept variable x: offset + slope·x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeExpr {
    pub offset: f64,
    pub slope: f64,
}

impl TimeExpr {
    pub fn fixed(t: f64) -> Self {
        Self { offset: t, slope: 0.0 }
    }

    pub fn axis() -> Self {
        Self { offset: 0.0, slope: 1.0 }
    }

    pub fn axis_plus(offset: f64) -> Self {
        Self { offset, slope: 1.0 }
    }

    pub fn at(&self, x: f64) -> f64 {
        if self.slope == 0.0 {
            self.offset
        } else {
            self.offset + self.slope * x
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TemplateKind {
    Wightman(Permutation),
    Ctoc(EtaVector),
}

impl TemplateKind {
    pub fn order(&self) -> usize {
        match self {
            TemplateKind::Wightman(s) => s.len(),
            TemplateKind::Ctoc(e) => e.len(),
        }
    }
}

/// One correlation evaluated along the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTemplate {
    pub name: String,
    pub kind: TemplateKind,
    pub observables: Vec<String>,
    pub times: Vec<TimeExpr>,
}

impl SweepTemplate {
    /// Named `W:<trace label>`, e.g. `W:213` for Tr[B2 B1 B3 ρ].
    pub fn wightman(sigma: Permutation, observables: Vec<String>, times: Vec<TimeExpr>) -> Self {
        Self { name: format!("W:{}", sigma.trace_label()), kind: TemplateKind::Wightman(sigma), observables, times }
    }

    /// Named `C:<eta>`, e.g. `C:+-+`.
    pub fn ctoc(eta: EtaVector, observables: Vec<String>, times: Vec<TimeExpr>) -> Self {
        Self { name: format!("C:{eta}"), kind: TemplateKind::Ctoc(eta), observables, times }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn times_at(&self, x: f64) -> Vec<f64> {
        self.times.iter().map(|t| t.at(x)).collect()
    }

    fn is_real(&self) -> bool {
        matches!(self.kind, TemplateKind::Ctoc(_))
    }
}

/// start, start + step, … up to stop (inclusive within rounding).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const MAX_POINTS: usize = 1_000_000;

    pub fn points(&self) -> Result<Vec<f64>> {
        let Grid { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("bounds and step must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if stop < start {
            return Err(Error::InvalidGrid(format!("stop {stop} is below start {start}")));
        }
        let intervals = ((stop - start) / step + 1e-9).floor();
        if intervals >= Self::MAX_POINTS as f64 {
            return Err(Error::InvalidGrid(format!("more than {} points", Self::MAX_POINTS)));
        }
        Ok((0..=intervals as usize).map(|i| start + i as f64 * step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeriesValues {
    Real { values: Vec<f64> },
    Complex { re: Vec<f64>, im: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    #[serde(flatten)]
    pub values: SeriesValues,
}

impl Series {
    pub fn len(&self) -> usize {
        match &self.values {
            SeriesValues::Real { values } => values.len(),
            SeriesValues::Complex { re, .. } => re.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn complex_at(&self, i: usize) -> Complex64 {
        match &self.values {
            SeriesValues::Real { values } => Complex64::new(values[i], 0.0),
            SeriesValues::Complex { re, im } => Complex64::new(re[i], im[i]),
        }
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.len()).map(|i| self.complex_at(i).norm()).fold(0.0, f64::max)
    }

    fn columns(&self) -> Vec<(String, &[f64])> {
        match &self.values {
            SeriesValues::Real { values } => vec![(self.name.clone(), values.as_slice())],
            SeriesValues::Complex { re, im } => {
                vec![(format!("{}:re", self.name), re.as_slice()), (format!("{}:im", self.name), im.as_slice())]
            }
        }
    }
}

/// Grid plus one series per template, all the same length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: String,
    pub grid: Vec<f64>,
    pub series: Vec<Series>,
}

/// 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once(self.axis.clone()).chain(self.series.iter().flat_map(|s| s.columns().into_iter().map(|c| c.0))).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(self.header())?;
        let columns: Vec<&[f64]> = self.series.iter().flat_map(|s| s.columns().into_iter().map(|c| c.1)).collect();
        for (i, x) in self.grid.iter().enumerate() {
            let row = std::iter::once(format_number(*x)).chain(columns.iter().map(|c| format_number(c[i])));
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Evaluator {
    /// Evaluates every template at every grid point. Grid points run in
    /// parallel; output order is fixed by the grid and template order.
    pub fn sweep(&self, axis: &str, grid: &[f64], templates: &[SweepTemplate]) -> Result<SweepResult> {
        if grid.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        check_increasing(grid).map_err(|_| Error::InvalidGrid("grid must be finite and strictly increasing".into()))?;

        let mut resolved = Vec::with_capacity(templates.len());
        for template in templates {
            let n = template.kind.order();
            if template.observables.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: template.observables.len() });
            }
            if template.times.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: template.times.len() });
            }
            for &x in grid {
                let times = template.times_at(x);
                if check_increasing(&times).is_err() {
                    return Err(Error::GridOrdering { template: template.name.clone(), point: x, times });
                }
            }
            resolved.push(self.resolve(&template.observables)?);
        }

        let rows: Vec<Vec<Complex64>> = grid
            .par_iter()
            .map(|&x| {
                let mut cache = EvolvedCache::default();
                templates
                    .iter()
                    .zip(&resolved)
                    .map(|(template, obs)| self.evaluate_point(&template.kind, &template.times_at(x), obs, &mut cache))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let series = templates
            .iter()
            .enumerate()
            .map(|(k, template)| {
                let column: Vec<Complex64> = rows.iter().map(|row| row[k]).collect();
                if column.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite(template.name.clone()));
                }
                let values = if template.is_real() {
                    SeriesValues::Real { values: column.iter().map(|z| z.re).collect() }
                } else {
                    SeriesValues::Complex { re: column.iter().map(|z| z.re).collect(), im: column.iter().map(|z| z.im).collect() }
                };
                Ok(Series { name: template.name.clone(), values })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(SweepResult { axis: axis.to_string(), grid: grid.to_vec(), series })
    }
}

//! Band tables along wavevector paths and over the full zone, plus the
//! analyses run on them: band gaps, turning points, extrema and counts of
//! wavevectors sharing one frequency.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::assembly::{BlochAssembly, Wavevector};
use crate::eigen::modes_at;
use crate::error::DispersionError;
use crate::model::LatticeModel;

/// Smallest grid resolution accepted by the zone-wide analyses.
pub const MIN_RESOLUTION: usize = 16;

/// Gaps narrower than `GAP_TOL (1 + max ω)` are treated as touching bands.
pub const GAP_TOL: f64 = 1e-10;

/// Piecewise-linear path through wavevector space.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub vertices: Vec<Wavevector>,
    /// Samples per segment, both endpoints included.
    pub samples_per_segment: usize,
}

impl PathSpec {
    pub fn new(vertices: Vec<Wavevector>, samples_per_segment: usize) -> Self {
        PathSpec {
            vertices,
            samples_per_segment,
        }
    }

    /// Straight segment between two points.
    pub fn segment(from: Vec<f64>, to: Vec<f64>, samples: usize) -> Self {
        PathSpec::new(vec![Wavevector(from), Wavevector(to)], samples)
    }

    /// Named paths. `paper-2d-path` runs (0,0) → (π,0) → (π,π) → (0,0).
    pub fn preset(name: &str, samples_per_segment: usize) -> Option<Self> {
        let vertices = match name {
            "paper-2d-path" => vec![vec![0.0, 0.0], vec![PI, 0.0], vec![PI, PI], vec![0.0, 0.0]],
            "half-zone-1d" => vec![vec![0.0], vec![PI]],
            "full-zone-1d" => vec![vec![-PI], vec![PI]],
            _ => return None,
        };
        Some(PathSpec::new(
            vertices.into_iter().map(Wavevector).collect(),
            samples_per_segment,
        ))
    }

    pub fn dimension(&self) -> usize {
        self.vertices.first().map_or(0, Wavevector::dimension)
    }

    pub fn sample_count(&self) -> usize {
        1 + self.vertices.len().saturating_sub(1) * self.samples_per_segment.saturating_sub(1)
    }

    fn check(&self) -> Result<(), DispersionError> {
        if self.vertices.len() < 2 || self.samples_per_segment < 2 {
            return Err(DispersionError::InvalidPath);
        }
        let d = self.dimension();
        for v in &self.vertices {
            if v.dimension() != d {
                return Err(DispersionError::DimensionMismatch {
                    expected: d,
                    found: v.dimension(),
                });
            }
            if !v.is_finite() {
                return Err(DispersionError::InvalidPath);
            }
        }
        for (i, w) in self.vertices.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(DispersionError::DegenerateSegment(i));
            }
        }
        Ok(())
    }

    /// Samples paired with their cumulative Euclidean arc length.
    fn samples_with_arclength(&self) -> Result<Vec<(f64, Wavevector)>, DispersionError> {
        self.check()?;
        let steps = self.samples_per_segment - 1;
        let mut out = Vec::with_capacity(self.sample_count());
        out.push((0.0, self.vertices[0].clone()));
        let mut start = 0.0;
        for w in self.vertices.windows(2) {
            let (from, to) = (w[0].components(), w[1].components());
            let length = from
                .iter()
                .zip(to)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt();
            for t in 1..=steps {
                let mu = if t == steps {
                    to.to_vec()
                } else {
                    let f = t as f64 / steps as f64;
                    from.iter().zip(to).map(|(a, b)| a + (b - a) * f).collect()
                };
                out.push((start + length * t as f64 / steps as f64, Wavevector(mu)));
            }
            start += length;
        }
        Ok(out)
    }
}

/// Wavevectors along the path; shared corners appear once.
pub fn sample_path(spec: &PathSpec) -> Result<Vec<Wavevector>, DispersionError> {
    Ok(spec
        .samples_with_arclength()?
        .into_iter()
        .map(|(_, mu)| mu)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandRow {
    /// Cumulative path parameter (arc length for paths, sample index for grids).
    pub s: f64,
    pub mu: Wavevector,
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub dimension: usize,
    pub bands: usize,
    pub rows: Vec<BandRow>,
}

impl BandTable {
    pub fn empty(dimension: usize, bands: usize) -> Self {
        BandTable {
            dimension,
            bands,
            rows: Vec::new(),
        }
    }

    /// Values of band `j` (0-based) in row order.
    pub fn band(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.omegas[j]).collect()
    }
}

/// Frequencies at every point, in input order.
fn evaluate(
    assembly: &BlochAssembly,
    points: &[Wavevector],
) -> Result<Vec<Vec<f64>>, DispersionError> {
    points
        .par_iter()
        .map(|mu| modes_at(assembly, mu, false).map(|m| m.omegas))
        .collect()
}

fn check_dimension(model: &LatticeModel, found: usize) -> Result<(), DispersionError> {
    if found != model.dimension() {
        return Err(DispersionError::DimensionMismatch {
            expected: model.dimension(),
            found,
        });
    }
    Ok(())
}

pub fn band_structure(model: &LatticeModel, spec: &PathSpec) -> Result<BandTable, DispersionError> {
    let samples = spec.samples_with_arclength()?;
    check_dimension(model, spec.dimension())?;
    let assembly = BlochAssembly::new(model);
    let points: Vec<Wavevector> = samples.iter().map(|(_, mu)| mu.clone()).collect();
    let omegas = evaluate(&assembly, &points)?;
    Ok(BandTable {
        dimension: model.dimension(),
        bands: model.node_count(),
        rows: samples
            .into_iter()
            .zip(omegas)
            .map(|((s, mu), omegas)| BandRow { s, mu, omegas })
            .collect(),
    })
}

/// Uniform periodic grid over `[-π, π)^d`, `resolution` points per direction,
/// first direction slowest. Doubling the resolution refines the grid in place.
pub fn zone_grid(dimension: usize, resolution: usize) -> Vec<Wavevector> {
    let h = 2.0 * PI / resolution as f64;
    let total = resolution.pow(dimension as u32);
    (0..total)
        .map(|mut idx| {
            let mut mu = vec![0.0; dimension];
            for c in mu.iter_mut().rev() {
                *c = -PI + h * (idx % resolution) as f64;
                idx /= resolution;
            }
            Wavevector(mu)
        })
        .collect()
}

fn check_resolution(resolution: usize) -> Result<(), DispersionError> {
    if resolution < MIN_RESOLUTION {
        return Err(DispersionError::ResolutionTooLow(resolution));
    }
    Ok(())
}

/// Band table over the whole zone grid; `s` is the grid index.
pub fn dispersion_surface(
    model: &LatticeModel,
    resolution: usize,
) -> Result<BandTable, DispersionError> {
    check_resolution(resolution)?;
    let grid = zone_grid(model.dimension(), resolution);
    let omegas = evaluate(&BlochAssembly::new(model), &grid)?;
    Ok(BandTable {
        dimension: model.dimension(),
        bands: model.node_count(),
        rows: grid
            .into_iter()
            .zip(omegas)
            .enumerate()
            .map(|(i, (mu, omegas))| BandRow {
                s: i as f64,
                mu,
                omegas,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monotonicity {
    pub nonmonotonic: bool,
    /// Sample indices where the direction of the band reverses.
    pub turning_points: Vec<usize>,
}

/// Looks for interior sign changes in the discrete slope of band `band`
/// (0-based). Steps smaller than `1e-8 (1 + max ω)` count as flat and are
/// skipped.
pub fn detect_nonmonotonic(
    table: &BandTable,
    band: usize,
) -> Result<Monotonicity, DispersionError> {
    if band >= table.bands {
        return Err(DispersionError::BandOutOfRange {
            band,
            bands: table.bands,
        });
    }
    let values = table.band(band);
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let flat = 1e-8 * (1.0 + top);
    let mut turning_points = Vec::new();
    let mut rising: Option<bool> = None;
    for (i, w) in values.windows(2).enumerate() {
        let step = w[1] - w[0];
        if step.abs() <= flat {
            continue;
        }
        let up = step > 0.0;
        if rising.is_some_and(|r| r != up) {
            turning_points.push(i);
        }
        rising = Some(up);
    }
    Ok(Monotonicity {
        nonmonotonic: !turning_points.is_empty(),
        turning_points,
    })
}

/// Number of (band, wavevector) pairs on the path where a band crosses
/// `omega`, counted as sign changes of `ω_j - omega` between samples.
///
/// A band that only touches `omega` without crossing is missed; use more
/// samples near tangencies.
pub fn count_wavevectors(
    model: &LatticeModel,
    omega: f64,
    spec: &PathSpec,
) -> Result<usize, DispersionError> {
    let table = band_structure(model, spec)?;
    Ok((0..table.bands)
        .map(|j| {
            table
                .band(j)
                .windows(2)
                .filter(|w| (w[0] > omega) != (w[1] > omega))
                .count()
        })
        .sum())
}

/// A frequency interval free of every band, between band `lower` and
/// `lower + 1` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lower: usize,
    pub low: f64,
    pub high: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
}

impl GapReport {
    /// Global gaps over a set of sampled spectra.
    pub fn from_samples<'a, I>(bands: usize, samples: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut max = vec![f64::NEG_INFINITY; bands];
        let mut min = vec![f64::INFINITY; bands];
        for omegas in samples {
            for (j, &w) in omegas.iter().enumerate() {
                max[j] = max[j].max(w);
                min[j] = min[j].min(w);
            }
        }
        let top = max.iter().copied().fold(0.0, f64::max);
        let gaps = (1..bands)
            .filter_map(|j| {
                let (low, high) = (max[j - 1], min[j]);
                let width = high - low;
                (width > GAP_TOL * (1.0 + top)).then_some(Gap {
                    lower: j,
                    low,
                    high,
                    width,
                })
            })
            .collect();
        GapReport { gaps }
    }
}

/// Gaps between consecutive bands over a `resolution^d` zone grid.
pub fn band_gaps(model: &LatticeModel, resolution: usize) -> Result<GapReport, DispersionError> {
    let table = dispersion_surface(model, resolution)?;
    Ok(GapReport::from_samples(
        table.bands,
        table.rows.iter().map(|r| r.omegas.as_slice()),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandExtrema {
    /// 0-based band index.
    pub band: usize,
    pub argmax: Wavevector,
    pub max: f64,
    pub argmin: Wavevector,
    pub min: f64,
    /// Whether the maximum sits on an edge of the `[0, π]^d` wedge (some
    /// component is 0 or ±π), i.e. on lines a high-symmetry path would visit.
    pub max_on_boundary: bool,
}

/// Wraps each component into `(-π, π]`.
fn wrap_into_zone(mu: &Wavevector) -> Wavevector {
    Wavevector(
        mu.components()
            .iter()
            .map(|&c| {
                let w = c - 2.0 * PI * (c / (2.0 * PI)).round();
                if w <= -PI + 1e-12 {
                    w + 2.0 * PI
                } else {
                    w
                }
            })
            .collect(),
    )
}

fn on_wedge_boundary(mu: &Wavevector) -> bool {
    const TOL: f64 = 1e-9;
    mu.components()
        .iter()
        .any(|c| c.abs() <= TOL || (PI - c.abs()).abs() <= TOL)
}

/// Neighborhood offsets `{-1, 0, 1}^d` without the center.
fn stencil(dimension: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(dimension as u32);
    (0..total)
        .filter(|&i| i != total / 2)
        .map(|mut i| {
            let mut v = vec![0.0; dimension];
            for c in v.iter_mut() {
                *c = (i % 3) as f64 - 1.0;
                i /= 3;
            }
            v
        })
        .collect()
}

/// Grid maximum and minimum of band `band` (0-based), each refined by one
/// pass over the half-step neighborhood of the best grid point.
pub fn band_extrema(
    model: &LatticeModel,
    band: usize,
    resolution: usize,
) -> Result<BandExtrema, DispersionError> {
    check_resolution(resolution)?;
    if band >= model.node_count() {
        return Err(DispersionError::BandOutOfRange {
            band,
            bands: model.node_count(),
        });
    }
    let d = model.dimension();
    let assembly = BlochAssembly::new(model);
    let grid = zone_grid(d, resolution);
    let values: Vec<f64> = evaluate(&assembly, &grid)?
        .into_iter()
        .map(|w| w[band])
        .collect();

    let mut imax = 0;
    let mut imin = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[imax] {
            imax = i;
        }
        if v < values[imin] {
            imin = i;
        }
    }

    let half_step = PI / resolution as f64;
    let offsets = stencil(d);
    let refine = |center: &Wavevector, value: f64, better: fn(f64, f64) -> bool| {
        let candidates: Vec<Wavevector> = offsets
            .iter()
            .map(|o| {
                Wavevector(
                    center
                        .components()
                        .iter()
                        .zip(o)
                        .map(|(c, s)| c + s * half_step)
                        .collect(),
                )
            })
            .collect();
        let omegas = evaluate(&assembly, &candidates)?;
        let mut best = (center.clone(), value);
        for (mu, w) in candidates.into_iter().zip(omegas) {
            if better(w[band], best.1) {
                best = (mu, w[band]);
            }
        }
        Ok::<_, DispersionError>((wrap_into_zone(&best.0), best.1))
    };
    let (argmax, max) = refine(&grid[imax], values[imax], |a, b| a > b)?;
    let (argmin, min) = refine(&grid[imin], values[imin], |a, b| a < b)?;
    let max_on_boundary = on_wedge_boundary(&argmax);
    Ok(BandExtrema {
        band,
        argmax,
        max,
        argmin,
        min,
        max_on_boundary,
    })
}

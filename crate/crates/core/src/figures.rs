//! Datasets behind the evaluation figures, plus the tables printed by the CLI.

use std::fmt;
use std::str::FromStr;

use crate::bounds::{averaged_bounds, BoundPair, ConditioningKind, Regime};
use crate::channel::ChannelParams;
use crate::contour::{contour_grid, default_contour_distance, ContourGrid};
use crate::error::{Error, Result};
use crate::monte_carlo::{estimate_throughput, ExperimentConfig, Scheme, SchemeSelection, SimEstimate};
use crate::output::{Column, Dataset, Kind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    /// Type C links against density.
    Fig7,
    /// Type D links, both regimes, against density.
    Fig9,
    /// Sum over all link types against density.
    Fig10,
    ContourC,
    ContourD1,
    ContourD2,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::Fig7,
        FigureId::Fig9,
        FigureId::Fig10,
        FigureId::ContourC,
        FigureId::ContourD1,
        FigureId::ContourD2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig7 => "fig7",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
            FigureId::ContourC => "contour_c",
            FigureId::ContourD1 => "contour_d1",
            FigureId::ContourD2 => "contour_d2",
        }
    }

    pub fn regimes(self) -> Vec<Regime> {
        match self {
            FigureId::Fig7 | FigureId::ContourC => vec![Regime::C],
            FigureId::Fig9 => vec![Regime::D1, Regime::D2],
            FigureId::Fig10 => Regime::ALL.to_vec(),
            FigureId::ContourD1 => vec![Regime::D1],
            FigureId::ContourD2 => vec![Regime::D2],
        }
    }

    pub fn is_contour(self) -> bool {
        matches!(self, FigureId::ContourC | FigureId::ContourD1 | FigureId::ContourD2)
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFigure {
                given: s.to_string(),
                valid: FigureId::ALL.map(FigureId::name).join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Link length; the regime midpoint when `None`.
    pub r_k: Option<f64>,
    pub resolution: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            r_k: None,
            resolution: 1.0,
        }
    }
}

/// One point of a density sweep: bounds and both schemes' estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// `None` for the all-class total.
    pub regime: Option<Regime>,
    pub density: f64,
    pub bounds: BoundPair,
    pub proposed: SimEstimate,
    pub conventional: SimEstimate,
}

fn estimate(estimates: &[SimEstimate], density: f64, regime: Regime, scheme: Scheme) -> SimEstimate {
    *estimates
        .iter()
        .find(|e| e.density == density && e.regime == regime && e.scheme == scheme)
        .expect("every cell was simulated")
}

/// Bounds and Monte-Carlo estimates for every density and regime of `config`.
pub fn density_sweep(config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let cfg = ExperimentConfig {
        scheme: SchemeSelection::Both,
        ..config.clone()
    };
    let estimates = estimate_throughput(&cfg)?;
    let mut out = Vec::new();
    for &density in &cfg.densities {
        for &regime in &cfg.regimes {
            out.push(SweepPoint {
                regime: Some(regime),
                density,
                bounds: averaged_bounds(regime, cfg.conditioning.at(density), &cfg.channel)?,
                proposed: estimate(&estimates, density, regime, Scheme::Proposed),
                conventional: estimate(&estimates, density, regime, Scheme::Conventional),
            });
        }
    }
    Ok(out)
}

/// Per-density sums over regimes. Standard errors add in quadrature.
pub fn sum_over_regimes(points: &[SweepPoint]) -> Vec<SweepPoint> {
    let mut out: Vec<SweepPoint> = Vec::new();
    for p in points {
        match out.iter_mut().find(|q| q.density == p.density) {
            Some(q) => {
                q.bounds.lower += p.bounds.lower;
                q.bounds.upper += p.bounds.upper;
                for (acc, e) in [(&mut q.proposed, &p.proposed), (&mut q.conventional, &p.conventional)] {
                    acc.mean += e.mean;
                    acc.stderr = acc.stderr.hypot(e.stderr);
                }
            }
            None => {
                let mut q = *p;
                q.regime = None;
                q.bounds.context.regime = None;
                out.push(q);
            }
        }
    }
    out
}

fn sweep_columns(with_regime: bool) -> Vec<Column> {
    let mut cols = Vec::new();
    if with_regime {
        cols.push(Column::new("regime", Kind::Text));
    }
    cols.extend([
        Column::new("lambda", Kind::Real),
        Column::new("upper", Kind::Mbps),
        Column::new("proposed", Kind::Mbps),
        Column::new("conventional", Kind::Mbps),
        Column::new("lower", Kind::Mbps),
        Column::new("proposed_stderr", Kind::Mbps),
        Column::new("conventional_stderr", Kind::Mbps),
        Column::new("trials", Kind::Int),
    ]);
    cols
}

pub fn sweep_table(points: &[SweepPoint], with_regime: bool) -> Dataset {
    let mut d = Dataset::new(sweep_columns(with_regime));
    for p in points {
        let mut row = Vec::new();
        if with_regime {
            row.push(p.regime.map_or("all".to_string(), |r| r.to_string()).into());
        }
        row.extend([
            p.density.into(),
            p.bounds.upper.into(),
            p.proposed.mean.into(),
            p.conventional.mean.into(),
            p.bounds.lower.into(),
            p.proposed.stderr.into(),
            p.conventional.stderr.into(),
            p.proposed.trials.into(),
        ]);
        d.push(row);
    }
    d
}

pub fn contour_table(grid: &ContourGrid) -> Dataset {
    let mut d = Dataset::new(vec![
        Column::new("x", Kind::Real),
        Column::new("y", Kind::Real),
        Column::new("tier", Kind::Int),
        Column::new("throughput", Kind::Mbps),
    ]);
    for p in grid.points.iter().filter(|p| p.tier.is_some()) {
        d.push(vec![p.x.into(), p.y.into(), p.tier.into(), p.throughput.into()]);
    }
    d
}

/// Averaged bounds for each regime and density.
pub fn bounds_table(
    regimes: &[Regime],
    densities: &[f64],
    conditioning: ConditioningKind,
    params: &ChannelParams,
) -> Result<Dataset> {
    let mut d = Dataset::new(vec![
        Column::new("regime", Kind::Text),
        Column::new("lambda", Kind::Real),
        Column::new("conditioning", Kind::Text),
        Column::new("lower", Kind::Mbps),
        Column::new("upper", Kind::Mbps),
    ]);
    for &density in densities {
        for &regime in regimes {
            let b = averaged_bounds(regime, conditioning.at(density), params)?;
            d.push(vec![
                regime.to_string().into(),
                density.into(),
                conditioning.to_string().into(),
                b.lower.into(),
                b.upper.into(),
            ]);
        }
    }
    Ok(d)
}

pub fn estimates_table(estimates: &[SimEstimate]) -> Dataset {
    let mut d = Dataset::new(vec![
        Column::new("regime", Kind::Text),
        Column::new("lambda", Kind::Real),
        Column::new("scheme", Kind::Text),
        Column::new("mean", Kind::Mbps),
        Column::new("stderr", Kind::Mbps),
        Column::new("trials", Kind::Int),
    ]);
    for e in estimates {
        d.push(vec![
            e.regime.to_string().into(),
            e.density.into(),
            e.scheme.to_string().into(),
            e.mean.into(),
            e.stderr.into(),
            e.trials.into(),
        ]);
    }
    d
}

/// Builds the dataset behind figure `id`. Density sweeps use `config` with the
/// figure's regimes; contour figures use only its channel parameters.
pub fn reproduce_figure(id: FigureId, config: &ExperimentConfig, contour: &ContourOptions) -> Result<Dataset> {
    if id.is_contour() {
        let regime = id.regimes()[0];
        let r_k = contour.r_k.unwrap_or_else(|| default_contour_distance(regime));
        let grid = contour_grid(regime, r_k, contour.resolution, &config.channel)?;
        return Ok(contour_table(&grid));
    }
    let cfg = ExperimentConfig {
        regimes: id.regimes(),
        ..config.clone()
    };
    let points = density_sweep(&cfg)?;
    Ok(match id {
        FigureId::Fig7 => sweep_table(&points, false),
        FigureId::Fig9 => sweep_table(&points, true),
        _ => sweep_table(&sum_over_regimes(&points), false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Value;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            densities: vec![0.001, 0.004],
            trials: 2000,
            ..Default::default()
        }
    }

    #[test]
    fn figure_ids_parse() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        let err = "fig8".parse::<FigureId>().unwrap_err().to_string();
        assert!(err.contains("fig7") && err.contains("contour_d2"));
    }

    #[test]
    fn fig7_has_one_row_per_density() {
        let d = reproduce_figure(FigureId::Fig7, &small(), &ContourOptions::default()).unwrap();
        assert_eq!(d.rows.len(), 2);
        let names: Vec<_> = d.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(&names[..5], ["lambda", "upper", "proposed", "conventional", "lower"]);
    }

    #[test]
    fn fig10_sums_regimes() {
        let cfg = small();
        let parts = density_sweep(&ExperimentConfig {
            regimes: Regime::ALL.to_vec(),
            ..cfg.clone()
        })
        .unwrap();
        let total = sum_over_regimes(&parts);
        assert_eq!(total.len(), 2);
        let want: f64 = parts.iter().filter(|p| p.density == 0.001).map(|p| p.bounds.upper).sum();
        assert!((total[0].bounds.upper - want).abs() < 1e-12);
        let d = reproduce_figure(FigureId::Fig10, &cfg, &ContourOptions::default()).unwrap();
        assert_eq!(d.column_f64("upper").unwrap()[0], Some(total[0].bounds.upper));
    }

    #[test]
    fn contour_rows_only_inside_tiers() {
        let d = reproduce_figure(FigureId::ContourD2, &small(), &ContourOptions::default()).unwrap();
        assert!(!d.rows.is_empty());
        let tier = d.column_index("tier").unwrap();
        assert!(d.rows.iter().all(|r| matches!(r[tier], Value::Int(t) if (2..=5).contains(&t))));
    }
}

//! Parametric test shapes, all sampled at equal polar angles about the
//! origin so that sample `i` sits at `θ_i = 2πi/N`.

use std::f64::consts::{PI, TAU};

use clap::ValueEnum;
use serde::Serialize;
use shapeflow::Contour;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Ellipse,
    Star,
    Bump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeParams {
    pub samples: usize,
    pub radius: f64,
    /// Semi-axis along `y` for ellipses; the semi-axis along `x` is `radius`.
    pub minor: f64,
    /// Star `λ` or bump height relative to `radius`.
    pub amplitude: f64,
    /// Star lobe count `n`.
    pub lobes: u32,
    /// Bump variance in `θ`.
    pub spread: f64,
    /// Bump centre angle.
    pub center: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self {
            samples: 256,
            radius: 1.0,
            minor: 0.6,
            amplitude: 0.3,
            lobes: 5,
            spread: 0.1,
            center: 1.0,
        }
    }
}

/// Radius function of each kind.
fn radius_fn(kind: ShapeKind, p: ShapeParams) -> impl Fn(f64) -> f64 {
    move |t: f64| match kind {
        ShapeKind::Circle => p.radius,
        ShapeKind::Ellipse => {
            1.0 / ((t.cos() / p.radius).powi(2) + (t.sin() / p.minor).powi(2)).sqrt()
        }
        ShapeKind::Star => {
            p.radius * (1.0 + p.amplitude / p.lobes as f64 * (p.lobes as f64 * t).sin())
        }
        ShapeKind::Bump => {
            let d = (t - p.center + PI).rem_euclid(TAU) - PI;
            p.radius * (1.0 + p.amplitude * (-d * d / p.spread).exp())
        }
    }
}

pub fn generate(kind: ShapeKind, p: ShapeParams) -> CliResult<Contour> {
    let bad = |m: &str| Err(CliError::usage(m.to_string()));
    if p.samples < 8 {
        return bad("at least 8 samples are required");
    }
    if !(p.radius > 0.0 && p.radius.is_finite()) {
        return bad("radius must be positive");
    }
    match kind {
        ShapeKind::Ellipse if !(p.minor > 0.0 && p.minor.is_finite()) => {
            return bad("minor semi-axis must be positive")
        }
        ShapeKind::Star if p.lobes == 0 => return bad("star needs at least one lobe"),
        ShapeKind::Star if !(p.amplitude >= 0.0 && p.amplitude < p.lobes as f64) => {
            return bad(
                "star amplitude must satisfy 0 <= amplitude < lobes so the radius stays positive",
            )
        }
        ShapeKind::Bump if !(p.amplitude > -1.0 && p.amplitude.is_finite()) => {
            return bad("bump amplitude must exceed -1 so the radius stays positive")
        }
        ShapeKind::Bump if !(p.spread > 0.0 && p.spread.is_finite()) => {
            return bad("bump spread must be positive")
        }
        _ => {}
    }
    Contour::from_polar(p.samples, radius_fn(kind, p)).map_err(CliError::input)
}

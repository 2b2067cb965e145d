//! Data for the standard plots: one column per plotted parameter
//! value, plus the limiting curves drawn next to them.

use rayon::prelude::*;
use serde_json::json;

use quadbound_core::scaling::{self as sc, QuadratureConfig, ScalingError};

use crate::format::{num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// Phi-bar(D, P) against D.
    #[value(name = "phi_of_P")]
    PhiOfP,
    /// rho-tilde(delta, P) with the small-P and Rayleigh limits.
    #[value(name = "rho_tilde_bound_P")]
    RhoTildeBoundP,
    /// Phi-hat(D, P) against D.
    #[value(name = "phi_hat_P")]
    PhiHatP,
    /// phi_z(d) and tanh^2(d beta(z)).
    #[value(name = "phi_z")]
    PhiZ,
    /// phi-tilde_Z(d) and tanh^2(d beta-tilde(Z)).
    #[value(name = "phi_tilde_Z")]
    PhiTildeZ,
    /// <delta(u)>_P with both limits.
    #[value(name = "mean_delta_u")]
    MeanDeltaU,
    /// Phi-bar against D sqrt(P) at large P, with tanh^2.
    #[value(name = "phi_bar_large_P")]
    PhiBarLargeP,
}

impl Figure {
    /// Default parameter values of the plot.
    pub fn default_params(self) -> Vec<f64> {
        match self {
            Figure::PhiOfP => vec![0.01, 0.1, 0.5, 1.0, 2.0, 5.0],
            Figure::RhoTildeBoundP | Figure::MeanDeltaU => vec![0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0],
            Figure::PhiHatP => vec![0.01, 0.1, 0.2, 0.5, 1.0],
            Figure::PhiZ => vec![0.13, 0.126, 0.1255, 0.1251],
            Figure::PhiTildeZ => vec![0.23, 0.225, 0.223, 0.2227],
            Figure::PhiBarLargeP => vec![1.0, 2.0, 5.0],
        }
    }

    /// (start, stop, step) of the abscissa.
    pub fn default_grid(self) -> (f64, f64, f64) {
        match self {
            Figure::PhiOfP | Figure::PhiHatP => (0.0, 3.0, 0.05),
            Figure::RhoTildeBoundP => (0.0, 3.0, 0.05),
            Figure::PhiZ | Figure::PhiTildeZ => (0.0, 150.0, 1.0),
            Figure::MeanDeltaU => (0.0, 1.0, 0.025),
            Figure::PhiBarLargeP => (0.0, 5.0, 0.1),
        }
    }

    fn param_name(self) -> &'static str {
        match self {
            Figure::PhiZ => "z",
            Figure::PhiTildeZ => "Z",
            _ => "P",
        }
    }

    fn x_name(self) -> &'static str {
        match self {
            Figure::PhiOfP | Figure::PhiHatP => "D",
            Figure::RhoTildeBoundP => "delta",
            Figure::PhiZ | Figure::PhiTildeZ => "d",
            Figure::MeanDeltaU => "u",
            Figure::PhiBarLargeP => "D_sqrt_P",
        }
    }
}

fn col(name: &str, v: f64) -> String {
    format!("{}={}", name, v)
}

/// Builds the table for `fig`. Evaluation is parallel over abscissae; row
/// order and values do not depend on scheduling.
pub fn figure_table(fig: Figure, params: &[f64], xs: &[f64], cfg: &QuadratureConfig) -> Result<Table, ScalingError> {
    let pn = fig.param_name();
    let mut columns = vec![fig.x_name().to_string()];
    for &p in params {
        columns.push(col(pn, p));
        if matches!(fig, Figure::PhiZ | Figure::PhiTildeZ) {
            columns.push(col(&format!("tanh2_{}", pn), p));
        }
    }
    match fig {
        Figure::RhoTildeBoundP => columns.extend(["small_P".to_string(), "rayleigh".to_string()]),
        Figure::MeanDeltaU => columns.extend(["small_P".to_string(), "large_P".to_string()]),
        Figure::PhiBarLargeP => columns.push("tanh2".to_string()),
        _ => {}
    }

    let rows: Vec<Vec<String>> = xs
        .par_iter()
        .map(|&x| -> Result<Vec<String>, ScalingError> {
            let mut row = vec![num(x)];
            for &p in params {
                match fig {
                    Figure::PhiOfP => row.push(num(sc::phi_bar(x, p, cfg)?.value)),
                    Figure::PhiHatP => row.push(num(sc::phi_hat(x, p, cfg)?.value)),
                    Figure::RhoTildeBoundP => row.push(num(sc::rho_tilde_bound(x, p, cfg)?.value)),
                    Figure::MeanDeltaU => {
                        let v = if x <= 0.0 || x >= 1.0 { 0.0 } else { sc::mean_delta(x, p, cfg)?.value };
                        row.push(num(v));
                    }
                    Figure::PhiBarLargeP => row.push(num(sc::phi_bar(x / p.sqrt(), p, cfg)?.value)),
                    Figure::PhiZ => {
                        row.push(num(sc::phi_z(x, p)?));
                        row.push(num((x * sc::beta(p)?).tanh().powi(2)));
                    }
                    Figure::PhiTildeZ => {
                        row.push(num(sc::phi_tilde_z(x, p)?));
                        row.push(num((x * sc::beta_tilde(p)?).tanh().powi(2)));
                    }
                }
            }
            match fig {
                Figure::RhoTildeBoundP => {
                    row.push(num(sc::rho_tilde_small_p(x)));
                    row.push(num(sc::rayleigh(x)));
                }
                Figure::MeanDeltaU => {
                    let inside = x > 0.0 && x < 1.0;
                    row.push(num(if inside { sc::mean_delta_small_p(x)? } else { 0.0 }));
                    row.push(num(if inside { sc::mean_delta_large_p(x)? } else { 0.0 }));
                }
                Figure::PhiBarLargeP => row.push(num((0.75f64.sqrt() * x).tanh().powi(2))),
                _ => {}
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let meta = json!({
        "figure": format!("{:?}", fig),
        "parameter": pn,
        "values": params,
        "x": fig.x_name(),
        "quadrature": { "xi_max": cfg.xi_max, "nodes": cfg.nodes, "tolerance": cfg.tolerance },
    });
    Ok(Table { meta, columns, rows })
}

//! The bilinear operator `N(f,g)`, `T = N^{1/2}`, the linear operator `N*`
//! and the weighted bounds built on them.

mod bounds;
mod operators;

pub use bounds::{
    endpoint_bound_check, hypothesis_check, layer_bound_check, layer_decompose, series_sum_check,
    EndpointBoundReport, HypothesisReport, LayerBoundReport, LayerDecomposition, SeriesReport,
    SeriesTerm,
};
pub use operators::{nstar_growth, operator_n, operator_nstar, operator_t, spike_family, NstarRow};

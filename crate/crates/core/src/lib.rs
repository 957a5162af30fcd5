//! Numerical laboratory for the Kobayashi–Royden metric, Kobayashi distance
//! and almost-geodesics on domains in ℂⁿ.

// `!(x >= a)` rejects NaN along with small values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod format;
pub mod geodesic;
pub mod localization;
pub mod metric;
pub mod point;
pub mod report;
pub mod visibility;

pub use domain::{
    boundary_approach, boundary_distance, complex_line_radius, contains, intersect_with_ball, is_boundary_point,
    sample_interior, CompactSlice, DomainDoc, DomainKind, DomainSpec, HalfSpace, LineRadiusMethod, Neighborhood,
};
pub use error::{KobError, Result};
pub use geodesic::{
    build_graph, build_local_graph, certify_geodesic, certify_geodesic_multi, distance_estimate, graph_distance,
    remeasure, reparametrize_by_length, set_distance, shortest_curve, shortest_curve_with_chords, truncate_at_exit,
    Curve, GeodesicCertificate, GraphParams, GraphSummary, MetricGraph, Overlay,
};
pub use localization::{
    additive_gap_survey, check_royden_lemma, check_sarkar_estimate, diverges, gromov_product, gromov_property_probe,
    hyperbolicity_probe, length_localization_survey, multiplicative_ratio_survey, royden_lemma_sample, sarkar_constant,
    sarkar_factor, vanishes, weak_gromov_probe, RoydenSample, RATIO_FLOOR,
};
pub use metric::{
    distance_lower, distance_oracle, kob_length, lempert_tilde_upper, lempert_upper, royden_estimate, royden_lower,
    royden_oracle, royden_upper, AnalyticDiscCandidate, Method, MetricEstimate, SearchConfig,
};
pub use point::{ComplexPoint, TangentVector, C64};
pub use report::{Cell, ExperimentReport, Table, Verdict};
pub use visibility::{
    classify, geodesic_transfer_check, germ_compare, local_global_compare, pair_visibility_probe,
    pair_visibility_sweep, visibility_probe, CurveOrigin, GeodesicRecord, ProbeParams, SequencePair, VisibilityOutcome,
    VisibilityVerdict,
};

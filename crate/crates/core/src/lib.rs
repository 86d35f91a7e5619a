//! Cluster-tendency assessment and scalable co-clustering, plus the booking
//! analytics used to build and score driver pickup-performance data.

pub mod bookings;
pub mod coclust;
pub mod error;
pub mod features;
pub mod generators;
pub mod imaging;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod mmrs;
pub mod prediction;
pub mod scoring;
pub mod vat;

pub use error::{Error, Result};
pub use matrix::{
    pairwise_dissimilarity, DissimilarityMatrix, DistanceMode, FeatureMatrix, MatrixKind, Metric,
    ObjectSet, RectRelationalMatrix,
};
pub use mmrs::{maximin_select, mmrs_sample, MmrsSample};
pub use vat::{cut_clusters, ivat, ivat_transform, minimax_oracle, suggest_k, vat_reorder, VatOrdering};
pub use bookings::{BookingRecord, DowClass, GeoBox, GeoCell};
pub use coclust::{extract_coclusters, sco_ivat, CoClusterBlock, CoClusterResult, ScoIvatConfig};
pub use features::{DerivedBooking, FeatureTables, Grouping};
pub use prediction::{LabeledDataset, LogisticModel};
pub use scoring::{rank_candidates, Mechanism, ScoreConfig, ScoreRequest};

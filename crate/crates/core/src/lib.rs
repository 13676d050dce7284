pub mod autodiff;
pub mod data;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod train;
pub mod tsne;

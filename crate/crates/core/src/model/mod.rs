//! The multi-view, multi-line transcription network.

mod checkpoint;
mod config;
mod network;
mod report;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{LineFanIn, StreetConfig};
pub use network::{
    closed_form_counts, decode_logits, shape_plan, LayerCount, LayerShape, ParamStore, StreetModel,
};
pub use report::{grouped, params_report};

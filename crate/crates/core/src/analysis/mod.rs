//! The bibliographic analysis pipeline and model persistence.

pub mod experiment;
pub mod persist;
pub mod tags;
pub mod trends;

pub use experiment::{
    filter_records, run_experiment, run_experiment_with, CorpusStats,
    Exclusions, ExperimentConfig, ExperimentOutput, Manifest, MANIFEST_FILE, MODEL_FILE, TAGS_FILE,
    TOPICS_FILE, TRENDS_FILE,
};
pub use persist::{load_model, model_from_json, model_to_json, save_model, SavedModel, FORMAT_VERSION};
pub use tags::generate_tags;
pub use trends::{topic_trends, year_span, TopicTrends};

//! Post-processing of word embeddings for lexical entailment.
//!
//! Starting from any vector space, specialisation pulls synonyms and
//! hyponym/hypernym pairs together, pushes antonyms apart and orders vector
//! norms so that more general concepts end up longer. Entailment is then
//! decoded by combining cosine distance with a norm-based asymmetric
//! distance.
//!
//! Modules follow the pipeline:
//!
//! - [`embedding`]: vector storage, text I/O, cosine and norms
//! - [`constraints`]: constraint files, vocabulary filtering, transitive closure
//! - [`objective`]: cost terms and analytic gradients
//! - [`negatives`]: in-batch negative selection
//! - [`optimizer`]: AdaGrad training loop
//! - [`metrics`]: entailment decoding and Spearman correlation
//! - [`eval`]: directionality, detection, graded and similarity protocols
//! - [`cli`]: the `lexspec` command implementations
//!
//! Batch-level work runs on rayon when the `parallel` feature is on (the
//! default); results are identical either way.

pub mod cli;
pub mod constraints;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod negatives;
pub mod objective;
pub mod optimizer;
pub mod par;
pub mod synthetic;

pub use constraints::{ConstraintKind, ConstraintSet, WordPair};
pub use embedding::{cosine, load_embeddings, save_embeddings, VectorSpace};
pub use error::{Error, Result};
pub use objective::{AblationMode, DistanceVariant, Hyperparameters, MiniBatch};
pub use optimizer::{run_specialization, TrainingLog};

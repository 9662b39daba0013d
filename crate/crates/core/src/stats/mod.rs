//! Paired nonparametric tests, effect sizes, multiple-comparison control,
//! correlation and PCA.

pub mod correlation;
pub mod effect;
pub mod eigen;
pub mod fdr;
pub mod pca;
pub mod prepost;
pub mod wilcoxon;

pub use correlation::{pearson, CorrelationResult};
pub use effect::{cohens_d, rank_biserial, BootstrapConfig, EffectWithCi};
pub use fdr::bh_fdr;
pub use pca::{pca, PcaResult};
pub use prepost::{paired_test, pre_post_per_pitch, PairedTestConfig, PitchComparison, PitchStatus, TestResult};
pub use wilcoxon::{wilcoxon_signed_rank, PValueMethod, PairedSample, ZeroPolicy};

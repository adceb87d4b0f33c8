//! Certified choice of the regularization parameter `C` of an L2-regularized
//! linear classifier.
//!
//! A solution at one `C̃`, even an approximate one, bounds the validation
//! error at every other `C`. Collecting those bounds over a few solved values
//! yields a certificate: the best validation error found is within ε of the
//! best attainable anywhere in `[C_l, C_u]`.
//!
//! Runnable tours live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `prepare_data` | libsvm parsing, scaling, holdout and k-fold splits |
//! | `score_bounds` | per-instance score bounds and guarantee intervals |
//! | `certify_grid` | certificate of a grid search, gap against grid size |
//! | `find_parameter` | the step-by-step search for an ε-approximate `C` |
//! | `find_tricked` | the coarse-grid variant with inflated steps |
//! | `track_path` | a piecewise-constant ε-approximate regularization path |
//! | `cross_validation` | the search on k-fold CV error |
//! | `ionosphere` | everything above on a real dataset |

pub mod bounds;
pub mod cli;
pub mod data;
pub mod loss;
pub mod pathalg;
pub mod solver;

//! Per-kind scoring, the cross-kind interdependence experiment, and loss values.

mod loss;
mod metrics;
mod quantexp;
mod score;

pub use loss::{correction_loss, detection_loss, losses, LossInput, LossReport, SecondTurnInput};
pub use metrics::{f_beta, Counts};
pub use quantexp::{build_action_subsets, non_featured, quantexp, KindDelta, QuantReport};
pub use score::{score, EditMatchKey, EvalReport, KindScore, MatchMode};

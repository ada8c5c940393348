use crate::error::{Error, Result};

/// `max(0, 1 - (I + ln 2) / ln N)`.
pub fn fano_lower_bound(num_hypotheses: usize, mutual_info_nats: f64) -> Result<f64> {
    if num_hypotheses < 2 {
        return Err(Error::InvalidArgument(format!(
            "Fano's bound needs at least two hypotheses, got {num_hypotheses}"
        )));
    }
    if !(mutual_info_nats >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mutual information must be nonnegative, got {mutual_info_nats}"
        )));
    }
    let ln_n = (num_hypotheses as f64).ln();
    Ok((1.0 - (mutual_info_nats + std::f64::consts::LN_2) / ln_n).max(0.0))
}

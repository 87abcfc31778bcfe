//! Barrier and penalty parameter schedule, applied after unsuccessful
//! iterations only.

use crate::merit::MeritParams;

/// `alpha_next <= min(rho_log^beta, gmin^2)`.
pub fn log_criterion(alpha_next: f64, rho_log: f64, beta: f64, gmin: f64) -> bool {
    alpha_next <= rho_log.powf(beta).min(gmin * gmin)
}

/// `alpha_next <= min(rho_log^beta, rho_ext^beta, gmin^2)`.
pub fn ext_criterion(alpha_next: f64, rho_log: f64, rho_ext: f64, beta: f64, gmin: f64) -> bool {
    alpha_next <= rho_log.powf(beta).min(rho_ext.powf(beta)).min(gmin * gmin)
}

/// Shrinks `rho_log` and `rho_ext` by `zeta` when their criteria hold. Both
/// criteria read the values on entry. `gmin = +inf` when the barrier set is
/// empty.
pub fn penalty_update(alpha_next: f64, params: &MeritParams, gmin: f64) -> MeritParams {
    let mut out = params.clone();
    if log_criterion(alpha_next, params.rho_log, params.beta, gmin) {
        out.rho_log = params.zeta * params.rho_log;
    }
    if ext_criterion(alpha_next, params.rho_log, params.rho_ext, params.beta, gmin) {
        out.rho_ext = params.zeta * params.rho_ext;
    }
    out
}

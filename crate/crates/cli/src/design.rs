use bosonet::reservoir_engineering::{design_report, DesignReport};

use crate::config::DesignConfig;
use crate::error::Result;

pub fn design(cfg: &DesignConfig) -> Result<DesignReport> {
    let p = cfg.drive_params()?;
    Ok(design_report(&p, cfg.n_max, cfg.gamma)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersive_working_point() {
        let cfg = DesignConfig::from_json(r#"{"omega0": 5e5, "gamma": 7.5}"#).unwrap();
        let rep = design(&cfg).unwrap();
        let ratio = rep.rates[0].rate_over_gamma.unwrap();
        assert!((ratio - 336.7).abs() < 0.1, "{ratio}");
    }
}

//! Build a config in code, write its effective form, load it back and certify.

use poisson_gradflow::experiment::{certify, preset, ExperimentConfig, Overrides, RhoSetting};

fn main() -> poisson_gradflow::Result<()> {
    let mut cfg = preset("experiment2")?;
    cfg.analysis.rho = Some(RhoSetting::PerAgent(vec![0.5, 1.0, 2.0]));
    cfg.analysis.beta_target = Some(0.1);
    cfg.apply_overrides(&Overrides {
        seed: Some(99),
        paths: Some(10),
    })?;
    let text = cfg.effective_json();
    let back = ExperimentConfig::from_json_str(&text)?;
    assert_eq!(back, cfg);
    println!("{text}");
    print!("{}", certify(&back)?);

    let broken = text.replace("\"h\": 0.01", "\"h\": -1.0");
    if let Err(e) = ExperimentConfig::from_json_str(&broken) {
        println!("rejected: {e}");
    }
    Ok(())
}

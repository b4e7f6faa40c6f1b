//! Shipped configurations, one per reproduced figure.

pub const PRESETS: [(&str, &str); 9] = [
    ("fig2", include_str!("../../configs/fig2.toml")),
    ("fig3", include_str!("../../configs/fig3.toml")),
    ("fig4", include_str!("../../configs/fig4.toml")),
    ("fig5", include_str!("../../configs/fig5.toml")),
    ("fig6c", include_str!("../../configs/fig6c.toml")),
    ("fig7", include_str!("../../configs/fig7.toml")),
    ("fig7-inset", include_str!("../../configs/fig7-inset.toml")),
    ("fig8b", include_str!("../../configs/fig8b.toml")),
    ("fig8c", include_str!("../../configs/fig8c.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunConfig;

    #[test]
    fn every_preset_validates_for_its_experiment() {
        for (name, text) in PRESETS {
            let c = RunConfig::from_toml(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let e = c
                .experiment
                .unwrap_or_else(|| panic!("{name} declares no experiment"));
            c.validate(e).unwrap_or_else(|err| panic!("{name}: {err}"));
            assert_eq!(c.output.name.as_deref(), Some(name));
        }
    }
}

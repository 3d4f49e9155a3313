//! Shipped configs for three stabilization regimes on the disk and the torus.

pub const NAMES: [&str; 3] = ["regime-fast", "regime-slow", "regime-infinite"];

/// Text of the preset `name`.
pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "regime-fast" => Some(include_str!("../../presets/regime-fast.toml")),
        "regime-slow" => Some(include_str!("../../presets/regime-slow.toml")),
        "regime-infinite" => Some(include_str!("../../presets/regime-infinite.toml")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::ExperimentConfig;

    #[test]
    fn presets_parse() {
        for n in NAMES {
            let c = ExperimentConfig::parse(get(n).unwrap()).unwrap();
            assert!(c.map.is_some(), "{n}");
        }
    }
}

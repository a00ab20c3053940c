//! Every config shipped under configs/ must parse and validate.

use std::path::PathBuf;

use cosfl::sim::FedConfig;

#[test]
fn shipped_configs_are_valid() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            FedConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{} failed to parse: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 6, "expected the shipped configs, found {seen}");
}

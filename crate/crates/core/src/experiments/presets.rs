//! Presets shipped under `crates/core/presets/`, compiled into the binary.

const PRESETS: &[(&str, &str)] = &[
    ("base", include_str!("../../presets/base.ini")),
    ("fig1a", include_str!("../../presets/fig1a.ini")),
    ("fig1b", include_str!("../../presets/fig1b.ini")),
    ("fig2a", include_str!("../../presets/fig2a.ini")),
    ("fig2b", include_str!("../../presets/fig2b.ini")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

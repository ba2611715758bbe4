//! Scenarios shipped with the crate.

const FILES: &[(&str, &str)] = &[
    ("example1.json", include_str!("../data/example1.json")),
    ("sample1p.json", include_str!("../data/sample1p.json")),
    ("setup2.json", include_str!("../data/setup2.json")),
    ("setup5.json", include_str!("../data/setup5.json")),
    ("sample1p_game.json", include_str!("../data/sample1p_game.json")),
    ("two_members.json", include_str!("../data/two_members.json")),
];

/// Divide-and-Choose scenarios, in presentation order.
pub const DC_SCENARIOS: [&str; 4] = ["example1.json", "sample1p.json", "setup2.json", "setup5.json"];

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Contents of a bundled file by name.
pub fn get(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

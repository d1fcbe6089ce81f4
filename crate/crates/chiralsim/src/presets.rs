//! Built-in scenario presets.
//!
//! Each preset is a TOML document embedded at compile time; asking for a
//! preset by name is exactly equivalent to parsing its text. The catalog
//! covers twelve result families (`figure_coverage`), one preset per
//! panel group.
//!
//! ```
//! let sc = chiralsim::presets::preset("fig2").unwrap();
//! assert_eq!(sc.name, "fig2");
//! assert_eq!(sc.sweep.unwrap().values.len(), 11);
//! ```

use crate::config::parse_config_named;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// `(name, embedded TOML)` for every preset, in catalog order.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("fig1c", include_str!("../presets/fig1c.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4a", include_str!("../presets/fig4a.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("fig5a", include_str!("../presets/fig5a.toml")),
    ("fig5b", include_str!("../presets/fig5b.toml")),
    ("fig5c", include_str!("../presets/fig5c.toml")),
    ("fig5d", include_str!("../presets/fig5d.toml")),
    ("fig6ab", include_str!("../presets/fig6ab.toml")),
    ("fig6c", include_str!("../presets/fig6c.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9pos", include_str!("../presets/fig9pos.toml")),
    ("fig9neg", include_str!("../presets/fig9neg.toml")),
    ("fig10pos", include_str!("../presets/fig10pos.toml")),
    ("fig10neg", include_str!("../presets/fig10neg.toml")),
    ("fig11pos", include_str!("../presets/fig11pos.toml")),
    ("fig11neg", include_str!("../presets/fig11neg.toml")),
    ("fig12pos", include_str!("../presets/fig12pos.toml")),
    ("fig12neg", include_str!("../presets/fig12neg.toml")),
];

/// Presets designed for the `compare-pure-mixed` verb (any pure-initial
/// preset works there; these exist specifically for that comparison).
pub const COMPARE_PRESETS: &[&str] = &["fig5a", "fig5b", "fig5c", "fig5d"];

/// Result family → presets that produce its panels. Every family is
/// covered and every preset serves some family.
pub fn figure_coverage() -> Vec<(u8, Vec<&'static str>)> {
    vec![
        (1, vec!["fig1a", "fig1b", "fig1c"]),
        (2, vec!["fig2"]),
        (3, vec!["fig3a", "fig3b"]),
        (4, vec!["fig4a", "fig4b"]),
        (5, vec!["fig5a", "fig5b", "fig5c", "fig5d"]),
        (6, vec!["fig6ab", "fig6c"]),
        (7, vec!["fig7"]),
        (8, vec!["fig8"]),
        (9, vec!["fig9pos", "fig9neg"]),
        (10, vec!["fig10pos", "fig10neg"]),
        (11, vec!["fig11pos", "fig11neg"]),
        (12, vec!["fig12pos", "fig12neg"]),
    ]
}

/// All preset names in catalog order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// The embedded TOML text of a preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses the named preset into a scenario.
pub fn preset(name: &str) -> Result<Scenario> {
    let text = preset_text(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    parse_config_named(text, name)
}

//! Built-in scenarios. Each preset is a set of configuration keys that the
//! command line and a config file may override.

use std::fmt::Write;

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub values: &'static [(&'static str, &'static str)],
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "classical-hbt",
        summary: "two incoherent classical point sources, random relative phase",
        values: &[
            ("scenario", "classical-hbt"),
            ("alpha", "1"),
            ("beta", "1"),
            ("k", "10"),
            ("source_separation", "1"),
            ("screen_distance", "100"),
            ("phase", "random"),
        ],
    },
    Preset {
        name: "independent-bosons",
        summary: "two independent Gaussian packets, symmetric state",
        values: &[
            ("scenario", "independent-bosons"),
            ("epsilon", "1"),
            ("x0", "3"),
            ("delta", "100"),
        ],
    },
    Preset {
        name: "independent-fermions",
        summary: "two independent Gaussian packets, antisymmetric state",
        values: &[
            ("scenario", "independent-fermions"),
            ("epsilon", "1"),
            ("x0", "3"),
            ("delta", "100"),
        ],
    },
    Preset {
        name: "entangled-epr",
        summary: "momentum-entangled pair in the strong-entanglement regime",
        values: &[
            ("scenario", "entangled-epr"),
            ("sigma", "1"),
            ("omega", "1"),
            ("x0", "3"),
            ("exchange", "boson"),
            ("delta_e", "200"),
        ],
    },
    Preset {
        name: "ghosh-mandel",
        summary:
            "entangled pair from two virtual sources next to independent bosons at the same period",
        values: &[
            ("scenario", "ghosh-mandel"),
            ("epsilon", "1"),
            ("sigma", "1"),
            ("omega", "1"),
            ("x0", "3"),
            ("exchange", "boson"),
            ("delta", "100"),
        ],
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

/// One row per preset: name, description, and its parameter values.
pub fn table() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    writeln!(out, "{:width$}  parameters", "preset").unwrap();
    for p in PRESETS {
        let params: Vec<String> = p
            .values
            .iter()
            .filter(|(k, _)| *k != "scenario")
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "{:width$}  {}", p.name, params.join(" ")).unwrap();
        writeln!(out, "{:width$}  {}", "", p.summary).unwrap();
    }
    out
}

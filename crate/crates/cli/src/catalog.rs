//! Scenarios shipped with the binary.

use crate::scenario::Scenario;

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../scenarios/", $name, ".json")))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundled![
    "thm22_standard",
    "thm23_coreless",
    "thm24_core_shell_dual",
    "thm26_fixed_shell_primal",
    "thm27_adaptive_shell_primal",
    "thm31_blowup",
    "thm31_calr",
    "thm32_sensitivity",
    "thm33_outside_critical",
    "homogeneous_null",
];

pub fn find(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn all() -> Vec<Scenario> {
    BUNDLED
        .iter()
        .map(|(name, text)| Scenario::parse(text).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_are_valid_and_named_after_their_files() {
        for (name, s) in BUNDLED.iter().map(|(n, _)| n).zip(all()) {
            assert_eq!(*name, s.name);
            s.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn every_theorem_is_covered() {
        let tags: Vec<String> = all().into_iter().filter_map(|s| s.theorem).collect();
        for t in ["2.2", "2.3", "2.4", "2.6", "2.7", "3.1", "3.2", "3.3"] {
            assert!(tags.iter().any(|x| x == t), "missing {t}");
        }
        assert!(BUNDLED.len() >= 9);
    }
}

use cli_harness::config::QuadratureRule;
use cli_harness::experiment::certificate;
use cli_harness::{parse_config_str, CheckName, DataSpec, HarnessError};
use proptest::prelude::*;
use transport_solver::{BoundaryKind, SpatialScheme};

fn errors(text: &str, strict: bool) -> Vec<String> {
    match parse_config_str(text, strict) {
        Err(HarnessError::Config(e)) => e,
        other => panic!("expected configuration errors, got {other:?}"),
    }
}

#[test]
fn minimal_file_gets_defaults() {
    let p = parse_config_str("preset = \"inflow-sine\"\nepsilons = [0.1, 0.05, 0.025]\n", true).unwrap();
    let c = p.config;
    assert!(p.ignored_keys.is_empty());
    assert_eq!(c.data, DataSpec::Preset("inflow-sine".into()));
    assert_eq!(c.t_final, 0.5);
    assert_eq!(c.quadrature.nodes, 16);
    assert_eq!(c.quadrature.rule, QuadratureRule::Composite);
    assert_eq!(c.grid.cells, 200);
    assert_eq!(c.time.step_factor, 1.0);
    assert_eq!(c.time.scheme, SpatialScheme::Minmod);
    assert_eq!(c.jobs, 1);
    assert_eq!(c.seed, 0);
    assert_eq!(c.checks, vec![CheckName::RateFloor]);
    assert_eq!(c.kind(), Some(BoundaryKind::InFlow));
}

#[test]
fn two_epsilons_name_the_minimum() {
    let e = errors("preset = \"constant\"\nepsilons = [0.1, 0.05]\n", false);
    assert_eq!(e.len(), 1);
    assert!(e[0].contains("at least 3"), "{e:?}");
}

#[test]
fn errors_are_aggregated() {
    let text = r#"
preset = "nope"
epsilons = [0.6, 0.7]
t_final = -1.0
checks = ["rate-window", "wobble"]
[quadrature]
nodes = 7
"#;
    let e = errors(text, false);
    let joined = e.join("\n");
    for needle in ["at least 3", "(0, 0.5]", "strictly decreasing", "t_final", "unknown preset", "wobble", "nodes"] {
        assert!(joined.contains(needle), "missing `{needle}` in\n{joined}");
    }
}

#[test]
fn unknown_keys_are_errors_only_when_strict() {
    let text = "preset = \"constant\"\nepsilons = [0.1, 0.05, 0.025]\ncolour = \"red\"\n[grid]\ncels = 3\n";
    let lax = parse_config_str(text, false).unwrap();
    assert_eq!(lax.ignored_keys, vec!["colour".to_string(), "grid.cels".to_string()]);
    let e = errors(text, true);
    assert_eq!(e.len(), 2);
    assert!(e[0].contains("colour") && e[1].contains("grid.cels"));
}

#[test]
fn preset_and_data_are_exclusive() {
    let text = r#"
preset = "constant"
epsilons = [0.1, 0.05, 0.025]
[data]
kind = "inflow"
initial = "1"
boundary = "1"
"#;
    assert!(errors(text, false)[0].contains("not both"));
    assert!(errors("epsilons = [0.1, 0.05, 0.025]\n", false)[0].contains("required"));
}

#[test]
fn inline_data_and_sections_parse() {
    let text = r#"
epsilons = [0.2, 0.1, 0.05]
t_final = 0.25
seed = 7
jobs = 2
checks = ["null-flux"]
[data]
kind = "diffuse"
initial = "1 + cos(pi * x)"
boundary = "(1 - exp(-t)) * mu * (1 - abs(mu))"
[grid]
cells = 50
layer_width = 0.0
[quadrature]
rule = "gauss-legendre"
nodes = 8
[time]
scheme = "upwind"
records = 10
"#;
    let c = parse_config_str(text, true).unwrap().config;
    let DataSpec::Inline(d) = &c.data else { panic!("inline data expected") };
    assert_eq!(d.kind, BoundaryKind::Diffuse);
    assert_eq!((c.t_final, c.seed, c.jobs), (0.25, 7, 2));
    assert_eq!(c.checks, vec![CheckName::NullFlux]);
    assert_eq!(c.grid.cells, 50);
    assert_eq!(c.quadrature.rule, QuadratureRule::GaussLegendre);
    assert_eq!(c.time.scheme, SpatialScheme::Upwind);
    assert_eq!(c.time.records, 10);
}

#[test]
fn null_flux_check_needs_reflecting_walls() {
    let e = errors("preset = \"inflow-sine\"\nepsilons = [0.1, 0.05, 0.025]\nchecks = [\"null-flux\"]\n", false);
    assert!(e[0].contains("null-flux"));
}

#[test]
fn composite_nodes_must_split_over_panels() {
    let e = errors("preset = \"constant\"\nepsilons = [0.1, 0.05, 0.025]\n[quadrature]\nnodes = 12\n", false);
    assert!(e[0].contains("panels"), "{e:?}");
}

#[test]
fn inflow_sine_carries_a_clean_certificate() {
    let c = parse_config_str("preset = \"inflow-sine\"\nepsilons = [0.1, 0.05, 0.025]\n", true).unwrap().config;
    let (data, report) = certificate(&c).unwrap();
    assert_eq!(data.label, "inflow-sine");
    assert_eq!(report.kind, BoundaryKind::InFlow);
    assert!(report.is_compatible());
    assert!(!report.checks.is_empty());
    assert!(report.checks.iter().all(|k| k.violation < 1e-12), "{:?}", report.checks);
}

#[test]
fn every_preset_but_the_refused_one_is_compatible() {
    for p in cli_harness::PRESETS {
        let c = parse_config_str(&format!("preset = \"{}\"\nepsilons = [0.1, 0.05, 0.025]\n", p.name), true).unwrap().config;
        let (_, report) = certificate(&c).unwrap();
        assert_eq!(report.is_compatible(), p.name != "incompatible", "{}: {:?}", p.name, report.checks);
    }
}

#[test]
fn perturbed_presets_stay_compatible() {
    for name in ["inflow-sine", "diffuse-cosine", "specular-quiet"] {
        let text = format!("preset = \"{name}\"\nepsilons = [0.1, 0.05, 0.025]\nseed = 11\nperturbation = 0.3\n");
        let c = parse_config_str(&text, true).unwrap().config;
        assert!(certificate(&c).unwrap().1.is_compatible(), "{name}");
    }
}

#[test]
fn bad_toml_is_a_config_error() {
    assert!(!errors("preset = \n", false).is_empty());
}

proptest! {
    #[test]
    fn decreasing_lists_in_range_are_accepted(mut v in proptest::collection::btree_set(1u32..=500, 3..8)) {
        let eps: Vec<f64> = v.iter().rev().map(|&k| k as f64 / 1000.0).collect();
        let text = format!("preset = \"constant\"\nepsilons = {eps:?}\n");
        prop_assert!(parse_config_str(&text, true).is_ok());
        // swapping two entries breaks the order
        let mut bad = eps.clone();
        bad.swap(0, 1);
        let text = format!("preset = \"constant\"\nepsilons = {bad:?}\n");
        prop_assert!(parse_config_str(&text, true).is_err());
        v.clear();
    }
}

use igusa_cli::{parse_document, run, CliError, Command, Options};
use igusa_core::padic::FieldKind;
use serde_json::json;

const DISC: &str = include_str!("data/disc.igs");
const PLANE: &str = include_str!("data/plane.igs");

fn exec(src: &str, cmd: Command, opts: &Options) -> Result<igusa_cli::CommandOutput, CliError> {
    run(&parse_document(src).unwrap(), &cmd, opts)
}

fn region(r: &str, w: Option<&str>) -> (String, Option<String>) {
    (r.to_string(), w.map(str::to_string))
}

#[test]
fn euler_of_open_half_line() {
    let out = exec(DISC, Command::Euler { set: "P".into() }, &Options::default()).unwrap();
    assert_eq!(out.json, json!({"chi_g": -1, "chi_b": 0, "class": "X"}));
    assert_eq!(out.envelope()["command"], "euler P");
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn euler_of_closed_segment_and_point() {
    let src = "set I(g) { g >= 0 and g <= 1 } set O(g) { g == 3 } set N(g, h) { g > 0 and h > g }";
    let e = |s: &str| exec(src, Command::Euler { set: s.into() }, &Options::default()).unwrap().json;
    assert_eq!(e("I"), json!({"chi_g": 1, "chi_b": 1, "class": "1"}));
    assert_eq!(e("O"), json!({"chi_g": 1, "chi_b": 1, "class": "1"}));
    // (0,∞) × (0,∞) up to the unimodular shear, X² = -X
    assert_eq!(e("N"), json!({"chi_g": 1, "chi_b": 0, "class": "-X"}));
}

#[test]
fn zeta_of_monomial_disc() {
    let (r, w) = region("R", Some("W"));
    let out = exec(DISC, Command::Zeta { region: r, weight: w }, &Options::default()).unwrap();
    assert_eq!(out.text, "(q-1)/(1 - q^-1*T1)");
    assert_eq!(out.json["canonical"], "(q-1)/(1 - q^-1*T1)");
}

#[test]
fn zeta_rho_flag_and_normalization() {
    let (r, w) = region("R", Some("W"));
    let opts = Options {
        rho: Some(vec![2]),
        ..Options::default()
    };
    let out = exec(DISC, Command::Zeta { region: r.clone(), weight: w.clone() }, &opts).unwrap();
    assert_eq!(out.text, "(q-1)/(1 - q^-2*T1^2)");
    let classical = format!("{DISC}\nnormalization classical;\n");
    let out = exec(&classical, Command::Zeta { region: r, weight: w }, &Options::default()).unwrap();
    assert_eq!(out.text, "(1-q^-1)/(1 - q^-1*T1)");
}

#[test]
fn volume_without_weight() {
    let out = exec(DISC, Command::Zeta { region: "R".into(), weight: None }, &Options::default()).unwrap();
    // vol(O) = q in the default normalization
    assert_eq!(out.text, "q");
}

#[test]
fn qe_eliminates_witness() {
    let out = exec(PLANE, Command::Qe { set: "S".into() }, &Options::default()).unwrap();
    assert_eq!(out.text, "(-x + 2*y >= 0 and -y + 3 >= 0 and x >= 0 and x == 0 (mod 2))");
    assert_eq!(out.json["cells"], 1);
}

#[test]
fn sum_over_odd_naturals() {
    let out = exec(DISC, Command::Sum { set: "D".into(), weight: None }, &Options::default()).unwrap();
    assert_eq!(out.text, "q^-1/(1 - q^-2)");
}

#[test]
fn checks_pass_on_plane() {
    let (r, w) = region("R", Some("W"));
    let fub = exec(PLANE, Command::FubiniCheck { region: r.clone(), weight: w.clone() }, &Options::default()).unwrap();
    assert!(fub.passed, "{}", fub.text);
    assert_eq!(fub.json["orders"].as_array().unwrap().len(), 2);
    let cov = exec(
        PLANE,
        Command::CovCheck { region: r.clone(), weight: w.clone(), map: "M".into() },
        &Options::default(),
    )
    .unwrap();
    assert!(cov.passed, "{}", cov.text);
    assert_eq!(cov.json["measure"]["accepted"], true);
    let fam = exec(PLANE, Command::Family { region: r, weight: w }, &Options::default()).unwrap();
    assert!(fam.passed);
    assert_eq!(fam.json["entries"].as_array().unwrap().len(), 2);
}

#[test]
fn class_json_is_graded() {
    let out = exec(DISC, Command::Class { region: "R".into(), weight: Some("W".into()) }, &Options::default())
        .unwrap();
    assert!(out.json.is_object() || out.json.is_array());
    assert!(out.text.contains("(u) ⊗"), "{}", out.text);
}

#[test]
fn oracle_check_passes() {
    let opts = Options {
        kappa: Some(vec![igusa_core::num::rat(2, 1)]),
        decimal: Some(5),
        ..Options::default()
    };
    let cmd = Command::OracleCheck {
        region: "R".into(),
        weight: Some("W".into()),
        field: FieldKind::Qp,
        p: 3,
        delta: 1,
        precision: 12,
    };
    let out = exec(DISC, cmd, &opts).unwrap();
    assert!(out.passed, "{}", out.text);
    assert_eq!(out.json["verdict"], "pass");
    assert_eq!(out.json["symbolic"], "27/13");
    assert_eq!(out.json["symbolic_decimal"], "2.07692");
}

#[test]
fn oracle_rejects_irrational_specialization() {
    let cmd = Command::OracleCheck {
        region: "R".into(),
        weight: Some("W".into()),
        field: FieldKind::Qp,
        p: 2,
        delta: 1,
        precision: 6,
    };
    let opts = Options {
        kappa: Some(vec![num_rational::BigRational::new(1.into(), 2.into())]),
        ..Options::default()
    };
    let err = exec(DISC, cmd, &opts).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn resolution_errors() {
    let err = exec(DISC, Command::Zeta { region: "Nope".into(), weight: None }, &Options::default()).unwrap_err();
    assert!(matches!(&err, CliError::Resolve { name, .. } if name == "Nope"));
    assert_eq!(err.exit_code(), 2);

    let err = exec(DISC, Command::Zeta { region: "D".into(), weight: None }, &Options::default()).unwrap_err();
    assert!(err.to_string().contains("not a region"));

    let bad = "region R(x) { strata { gamma { x >= 0 }; fiber u; } } weight W { kappa 1: y; }";
    let err = exec(bad, Command::Zeta { region: "R".into(), weight: Some("W".into()) }, &Options::default())
        .unwrap_err();
    assert!(err.to_string().contains("unknown variable `y`"), "{err}");

    let dup = "set A { true } set A { false }";
    let err = exec(dup, Command::Qe { set: "A".into() }, &Options::default()).unwrap_err();
    assert!(err.to_string().contains("more than once"));
}

#[test]
fn engine_errors_carry_command() {
    let half = "region R(x) { strata { gamma { x >= 0 }; fiber u; } } weight W { kappa 1: 1/2*x; }";
    let err = exec(half, Command::Zeta { region: "R".into(), weight: Some("W".into()) }, &Options::default())
        .unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().starts_with("zeta: integrality violation"), "{err}");

    let unbounded = "region R(x) { strata { gamma { x <= 0 }; fiber u; } }";
    let err = exec(unbounded, Command::Zeta { region: "R".into(), weight: None }, &Options::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);

    let singular = format!("{PLANE}\nmap Z {{ matrix [[2, 0], [0, 1]]; units [0, 0]; }}");
    let err = exec(
        &singular,
        Command::CovCheck { region: "R".into(), weight: Some("W".into()), map: "Z".into() },
        &Options::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("not unimodular"), "{err}");
}

#[test]
fn region_with_symbol_counts() {
    let src = "symbol E { q^2 + q + 1 }\nregion R(x, y) { strata { gamma { x >= 0 and y >= 0 }; fiber E; } }";
    // an E-fibre stands for q^2+q+1 points per valuation vector
    let err = exec(src, Command::Zeta { region: "R".into(), weight: None }, &Options::default());
    // E has degree 1 but the open stratum has dimension 2
    assert_eq!(err.unwrap_err().exit_code(), 3);
    let ok = "symbol E { q^2 + q + 1 }\nregion R(x, y) { strata { gamma { x >= 0 and y >= 0 }; fiber u*E; } }";
    let out = exec(ok, Command::Zeta { region: "R".into(), weight: None }, &Options::default()).unwrap();
    // (q^3 - 1)/(1 - q^-1)^2 after cancelling q - 1
    assert_eq!(out.text, "(q^3+q^2+q)/(1 - q^-1)");
}

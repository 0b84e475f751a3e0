//! The shipped model fixtures must stay byte-identical to the built-in
//! generators (regenerate with `cargo run -p hmmon-core --example
//! gen_fixtures -- fixtures` after intentional changes).

use hmmon_core::model::{Dfa, Hmm};
use hmmon_core::oracle::{icy_driving, monitor_a, monitor_b};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn fixtures_match_generators_byte_for_byte() {
    assert_eq!(icy_driving().to_json_string(), fixture("icy.hmm.json"));
    assert_eq!(monitor_a().to_json_string(), fixture("monitorA.dfa.json"));
    assert_eq!(monitor_b().to_json_string(), fixture("monitorB.dfa.json"));
}

#[test]
fn fixtures_load_as_models() {
    let hmm = Hmm::from_json_str(&fixture("icy.hmm.json")).unwrap();
    assert_eq!(hmm.num_states(), 3);
    let a = Dfa::from_json_str(&fixture("monitorA.dfa.json")).unwrap();
    let b = Dfa::from_json_str(&fixture("monitorB.dfa.json")).unwrap();
    assert_eq!(a.num_states(), 3);
    assert_eq!(b.num_states(), 3);
    a.check_alphabet(&hmm).unwrap();
    b.check_alphabet(&hmm).unwrap();
}

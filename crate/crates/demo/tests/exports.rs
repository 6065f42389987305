use serde_json::Value;
use traitlens_demo::{factor_explore, kappa_explore, profile_prompt};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn profile_prompt_renders_the_level() {
    let v = parse(profile_prompt("I'm a retired teacher.", "agreeableness", 5));
    let system = v["system"].as_str().unwrap();
    assert!(system.contains("Very warm, Very kind"), "{system}");
    assert!(system.contains("retired teacher"));
    let bad = parse(profile_prompt("x", "Agreeableness", 9));
    assert!(bad["error"].is_string());
    assert!(parse(profile_prompt("x", "Humor", 3))["error"].is_string());
}

#[test]
fn kappa_matches_hand_computation() {
    let v = parse(kappa_explore("1,2,3,4,5", "1 2 3 4 5", true));
    assert_eq!(v["kappa"]["kappa"], 1.0);
    assert_eq!(v["disagreements"], 0);
    assert_eq!(v["table"][2][2], 1);
    // Independent margins give zero agreement beyond chance.
    let v = parse(kappa_explore("1,1,5,5", "1,5,1,5", false));
    assert!(v["kappa"]["kappa"].as_f64().unwrap().abs() < 1e-12);
    assert!(parse(kappa_explore("1,2", "1", true))["error"].is_string());
    assert!(parse(kappa_explore("1,x", "1,2", true))["error"].is_string());
}

#[test]
fn factor_explorer_finds_planted_factors() {
    let v = parse(factor_explore(7, "0.9, 0.85, 0.8", 8, 2, 0.4));
    assert_eq!(v["retained"], 3, "{v}");
    let dropped: Vec<&str> = v["dropped"].as_array().unwrap().iter().map(|d| d.as_str().unwrap()).collect();
    let noise: Vec<&str> = v["noise_items"].as_array().unwrap().iter().map(|d| d.as_str().unwrap()).collect();
    assert_eq!(dropped, noise);
    assert!(v["scree_svg"].as_str().unwrap().starts_with("<svg"));
    assert!(parse(factor_explore(1, "1.5", 8, 0, 0.4))["error"].is_string());
}

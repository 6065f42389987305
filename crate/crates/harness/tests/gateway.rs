mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use common::{mock_gateway, stored_gateway};
use traitlens::config::EndpointConfig;
use traitlens::error::HarnessError;
use traitlens::gateway::{Gateway, LiveTransport};
use traitlens::mock::{EchoModel, Flaky, MockBehavior, MockFault, MockServer, NliTriple};
use traitlens::scripted::DefaultMock;

struct Fixed;

impl MockBehavior for Fixed {
    fn chat(&self, _: &str, system: Option<&str>, user: &str) -> Result<String, MockFault> {
        Ok(format!("{}|{user}", system.unwrap_or("-")))
    }

    fn embed(&self, _: &str, text: &str) -> Result<Vec<f64>, MockFault> {
        let mut v = vec![0.0; 4];
        v[text.len() % 4] = 1.0;
        Ok(v)
    }

    fn nli(&self, premise: &str, hypothesis: &str) -> Result<NliTriple, MockFault> {
        Ok(match (premise, hypothesis) {
            ("p", "h") => NliTriple {
                entailment: 0.7,
                contradiction: 0.1,
                neutral: 0.2,
            },
            _ => NliTriple {
                entailment: 2.0,
                contradiction: 0.0,
                neutral: 0.0,
            },
        })
    }
}

/// Embedding dimension depends on the input, which a real model never does.
struct ShiftingDims;

impl MockBehavior for ShiftingDims {
    fn chat(&self, _: &str, _: Option<&str>, _: &str) -> Result<String, MockFault> {
        Ok(String::new())
    }

    fn embed(&self, _: &str, text: &str) -> Result<Vec<f64>, MockFault> {
        Ok(vec![1.0; text.len()])
    }
}

fn cfg() -> EndpointConfig {
    EndpointConfig::mock("m")
}

#[test]
fn echo_returns_the_reply() {
    let gw = mock_gateway(EchoModel("I always comply.".into()));
    let x = gw.chat_complete(&cfg(), None, "prompt").unwrap();
    assert_eq!(x.response_text, "I always comply.");
    assert_eq!(x.model_id, "m");
}

#[test]
fn request_hash_is_pure() {
    let a = stored_gateway(Arc::new(Fixed));
    let b = stored_gateway(Arc::new(Fixed));
    let x = a.gateway.chat_complete(&cfg(), Some("s"), "u").unwrap();
    let y = b.gateway.chat_complete(&cfg(), Some("s"), "u").unwrap();
    assert_eq!(x.request_hash, y.request_hash);
    assert_eq!(x.request_hash.len(), 64);
    let mut hot = cfg();
    hot.temperature = 0.5;
    assert_ne!(a.gateway.chat_complete(&hot, Some("s"), "u").unwrap().request_hash, x.request_hash);
    assert_ne!(a.gateway.chat_complete(&cfg(), None, "u").unwrap().request_hash, x.request_hash);
}

#[test]
fn live_transport_without_key_is_a_config_error() {
    let gw = Gateway::new(Arc::new(LiveTransport));
    let mut c = EndpointConfig::new("http://127.0.0.1:9", "m");
    c.api_key_ref = Some("TRAITLENS_TEST_KEY_THAT_IS_NOT_SET".into());
    match gw.chat_complete(&c, None, "hi") {
        Err(HarnessError::Config(msg)) => assert!(msg.contains("TRAITLENS_TEST_KEY_THAT_IS_NOT_SET")),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn empty_inputs_are_rejected() {
    let gw = mock_gateway(Fixed);
    assert!(matches!(gw.chat_complete(&cfg(), None, " "), Err(HarnessError::Precondition(_))));
    assert!(matches!(gw.embed(&cfg(), ""), Err(HarnessError::Precondition(_))));
    assert!(matches!(gw.nli_score(&cfg(), "p", ""), Err(HarnessError::Precondition(_))));
}

#[test]
fn embeddings_are_deterministic_and_dimension_checked() {
    let gw = mock_gateway(Fixed);
    assert_eq!(gw.embed(&cfg(), "a").unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    assert_eq!(gw.embed(&cfg(), "abcd").unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    assert_eq!(gw.embed(&cfg(), "a").unwrap(), gw.embed(&cfg(), "a").unwrap());

    let gw = mock_gateway(ShiftingDims);
    gw.embed(&cfg(), "abc").unwrap();
    assert!(matches!(
        gw.embed(&cfg(), "abcdef"),
        Err(HarnessError::Dimension { expected: 3, got: 6, .. })
    ));
    // Dimensions are tracked per model.
    gw.embed(&EndpointConfig::mock("other"), "abcdef").unwrap();
}

#[test]
fn nli_scores_come_from_the_table() {
    let gw = mock_gateway(Fixed);
    let s = gw.nli_score(&cfg(), "p", "h").unwrap();
    assert_eq!((s.entailment, s.contradiction, s.neutral), (0.7, 0.1, 0.2));
    assert!(s.normalized);
    assert!((s.entailment + s.contradiction + s.neutral - 1.0).abs() < 1e-6);
    // Out-of-simplex values are kept raw and flagged.
    let raw = gw.nli_score(&cfg(), "x", "y").unwrap();
    assert_eq!(raw.entailment, 2.0);
    assert!(!raw.normalized);
}

#[test]
fn transient_failures_are_retried() {
    let gw = mock_gateway(Flaky::new(EchoModel("ok".into()), 2, 503));
    assert_eq!(gw.chat_complete(&cfg(), None, "u").unwrap().response_text, "ok");
    assert_eq!(gw.transport_calls(), 3);

    let gw = mock_gateway(Flaky::new(EchoModel("ok".into()), 10, 429));
    match gw.chat_complete(&cfg(), None, "u") {
        Err(HarnessError::Upstream { status: 429, .. }) => {}
        other => panic!("expected upstream error, got {other:?}"),
    }
    assert_eq!(gw.transport_calls(), 4, "one call plus max_retries");

    let gw = mock_gateway(Flaky::new(EchoModel("ok".into()), 1, 400));
    match gw.chat_complete(&cfg(), None, "u") {
        Err(HarnessError::Upstream { status: 400, body }) => assert!(body.contains("injected")),
        other => panic!("expected upstream error, got {other:?}"),
    }
    assert_eq!(gw.transport_calls(), 1, "client errors are not retried");
}

#[test]
fn cache_serves_repeats_without_transport_calls() {
    let s = stored_gateway(Arc::new(Fixed));
    let first = s.gateway.chat_complete(&cfg(), Some("s"), "u").unwrap();
    let calls = s.gateway.transport_calls();
    let again = s.gateway.chat_complete(&cfg(), Some("s"), "u").unwrap();
    assert_eq!(s.gateway.transport_calls(), calls);
    assert_eq!(serde_json::to_string(&first).unwrap(), serde_json::to_string(&again).unwrap());
    let v1 = s.gateway.embed(&cfg(), "text").unwrap();
    let n1 = s.gateway.nli_score(&cfg(), "p", "h").unwrap();
    let calls = s.gateway.transport_calls();
    assert_eq!(s.gateway.embed(&cfg(), "text").unwrap(), v1);
    assert_eq!(s.gateway.nli_score(&cfg(), "p", "h").unwrap(), n1);
    assert_eq!(s.gateway.transport_calls(), calls);
}

/// Counts calls so order-shuffling can be checked against a stateful-looking mock.
struct Counting(AtomicUsize);

impl MockBehavior for Counting {
    fn chat(&self, _: &str, _: Option<&str>, user: &str) -> Result<String, MockFault> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Ok(user.chars().rev().collect())
    }
}

#[test]
fn calls_are_independent_of_order() {
    let prompts: Vec<String> = (0..20).map(|i| format!("prompt {i}")).collect();
    let gw = mock_gateway(Counting(AtomicUsize::new(0)));
    let forward: Vec<String> = prompts
        .iter()
        .map(|p| gw.chat_complete(&cfg(), None, p).unwrap().response_text)
        .collect();
    let mut order: Vec<usize> = (0..prompts.len()).collect();
    fastrand::Rng::with_seed(5).shuffle(&mut order);
    for i in order {
        assert_eq!(gw.chat_complete(&cfg(), None, &prompts[i]).unwrap().response_text, forward[i]);
    }
}

#[test]
fn http_mock_server_speaks_all_three_protocols() {
    let server = MockServer::start(Arc::new(DefaultMock::default())).unwrap();
    let gw = Gateway::new(Arc::new(LiveTransport));
    let c = EndpointConfig::new(server.base_url(), "served");
    let item = traitlens_core::inventory::find_item(traitlens_core::inventory::ItemId::new(3).unwrap());
    let prompt = traitlens_core::inventory::render_administration_prompt(&item, traitlens_core::Orientation::Normal);
    let answer = gw.chat_complete(&c, None, &prompt.user_text).unwrap().response_text;
    assert!(traitlens_core::rater::extract_frequency_keyword(&answer).primary.is_some(), "{answer}");
    assert_eq!(gw.embed(&c, "hello world").unwrap().len(), traitlens::mock::MOCK_EMBEDDING_DIM);
    let s = gw.nli_score(&c, &answer, "The personality of the respondent is warm in terms of Big Five Factors.").unwrap();
    assert!(s.normalized);

    // Unknown routes come back as upstream errors with the body attached.
    let r = LiveTransport_post(&server.base_url());
    assert_eq!(r, 404);
}

#[allow(non_snake_case)]
fn LiveTransport_post(base: &str) -> u16 {
    use traitlens::gateway::Transport;
    let c = EndpointConfig::new(base, "served");
    match LiveTransport.post_json(&c, "/nowhere", &serde_json::json!({})) {
        Err(traitlens::gateway::TransportFailure::Status { status, .. }) => status,
        other => panic!("expected a status failure, got {other:?}"),
    }
}

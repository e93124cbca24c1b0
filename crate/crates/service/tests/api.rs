use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use psyscale::jsonl::read_responses;
use psyscale::mlds::{Choice, ClassPair};
use psyscale::pipeline::write_sequence;
use psyscale::stimuli::{generate_sequence, GrayImage, SequenceSpec, Viewport};
use psyscale::trials::Presentation;
use psyscale_service::{line_hash, router, AppState, ServiceConfig};
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;
use tower::ServiceExt;

fn write_stimuli(dir: &Path, n: usize) {
    for i in 0..n {
        let a = GrayImage::from_fn(6, 4, |x, y| ((x * 7 + y * 3 + i) % 11) as f64 / 10.0).unwrap();
        let b = GrayImage::filled(6, 4, 0.9).unwrap();
        let spec = SequenceSpec::new(ClassPair::new("cat", "dog"), format!("c{i}"), "d0", Viewport::XPos);
        write_sequence(dir, &generate_sequence(&a, &b, spec).unwrap()).unwrap();
    }
}

struct Fixture {
    _dir: tempfile::TempDir,
    config: ServiceConfig,
}

fn fixture(n_sequences: usize, max_trials: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let stim = dir.path().join("stimuli");
    std::fs::create_dir_all(&stim).unwrap();
    write_stimuli(&stim, n_sequences);
    let mut config = ServiceConfig::new(stim, dir.path().join("out"));
    config.max_trials_per_session = max_trials;
    config.rng_seed = 42;
    Fixture { _dir: dir, config }
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value, bytes)
}

async fn raw(app: &axum::Router, uri: &str, body: &str) -> StatusCode {
    let req = Request::builder()
        .method("POST")
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    app.clone().oneshot(req).await.unwrap().status()
}

fn app(config: &ServiceConfig) -> (Arc<AppState>, axum::Router) {
    let state = Arc::new(AppState::new(config.clone()).unwrap());
    (state.clone(), router(state))
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .map(str::to_string)
        .collect()
}

#[tokio::test]
async fn health_and_empty_stimuli() {
    let f = fixture(0, 5);
    let (_, app) = app(&f.config);
    let (status, body, _) = call(&app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["sequences"], 0);
    let (status, _, _) = call(&app, "POST", "/session", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn session_lifecycle() {
    let f = fixture(2, 3);
    let (state, app) = app(&f.config);

    let (status, s1, _) = call(&app, "POST", "/session", Some(json!({"participant_hint": "p1"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(s1["cursor"], 0);
    let (_, s2, _) = call(&app, "POST", "/session", None).await;
    assert_ne!(s1["token"], s2["token"]);
    let token = s1["token"].as_str().unwrap().to_string();
    let file = state.session_file(&token);

    // Idempotent until a response is posted.
    let (status, t0, _) = call(&app, "GET", &format!("/session/{token}/trial"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(t0["trial_id"], 0);
    let (_, again, _) = call(&app, "GET", &format!("/session/{token}/trial"), None).await;
    assert_eq!(t0, again);

    let resp_uri = format!("/session/{token}/response");
    let (status, _, _) = call(&app, "POST", &resp_uri, Some(json!({"trial_id": 0, "choice": "Sideways"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(raw(&app, &resp_uri, "not json").await, StatusCode::BAD_REQUEST);
    assert!(lines(&file).is_empty());

    let (status, ack, _) = call(&app, "POST", &resp_uri, Some(json!({"trial_id": 0, "choice": "FirstPairMoreSimilar"}))).await;
    assert_eq!(status, StatusCode::OK);
    let written = lines(&file);
    assert_eq!(written.len(), 1);
    assert_eq!(ack["line_hash"], line_hash(&written[0]));
    assert_eq!(ack["cursor"], 1);

    let (status, _, _) = call(&app, "POST", &resp_uri, Some(json!({"trial_id": 0, "choice": "FirstPairMoreSimilar"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(lines(&file).len(), 1);

    let (_, t1, _) = call(&app, "GET", &format!("/session/{token}/trial"), None).await;
    assert_eq!(t1["trial_id"], 1);

    for id in 1..3 {
        let (status, _, _) = call(&app, "POST", &resp_uri, Some(json!({"trial_id": id, "choice": "SecondPairMoreSimilar"}))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (status, _, _) = call(&app, "GET", &format!("/session/{token}/trial"), None).await;
    assert_eq!(status, StatusCode::GONE);
    let (status, _, _) = call(&app, "POST", &resp_uri, Some(json!({"trial_id": 3, "choice": "FirstPairMoreSimilar"}))).await;
    assert_eq!(status, StatusCode::GONE);
    let (_, prog, _) = call(&app, "GET", &format!("/session/{token}/progress"), None).await;
    assert_eq!(prog["complete"], true);
    assert_eq!(prog["cursor"], 3);

    // Persisted lines pass the same schema validation as machine responses.
    let rs = read_responses(&file).unwrap();
    assert_eq!(rs.len(), 3);
    assert!(rs.iter().all(|r| r.observer_id == format!("human:{token}")));

    let (status, _, _) = call(&app, "GET", "/session/nope/trial", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = call(&app, "POST", "/session/nope/response", Some(json!({"trial_id": 0, "choice": "FirstPairMoreSimilar"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _, _) = call(&app, "GET", "/session/nope/progress", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn recorded_choice_is_canonical_and_urls_match_presentation() {
    let f = fixture(1, 40);
    let (state, app) = app(&f.config);
    let (_, s, _) = call(&app, "POST", "/session", None).await;
    let token = s["token"].as_str().unwrap().to_string();
    let index = s["index"].as_u64().unwrap();
    for cursor in 0..40usize {
        let (_, t, _) = call(&app, "GET", &format!("/session/{token}/trial"), None).await;
        let scheduled = state.session_trial(index, cursor);
        let presentation = Presentation::from_seed(scheduled.presentation_seed);
        assert_eq!(t["presentation_seed"], scheduled.presentation_seed);

        // Every URL serves the frame the presentation says is shown there.
        let (top, bottom) = presentation.present(scheduled.quadruple);
        let shown = [top.0, top.1, bottom.0, bottom.1];
        let urls = [&t["pairs"][0][0], &t["pairs"][0][1], &t["pairs"][1][0], &t["pairs"][1][1]];
        for (frame, url) in shown.iter().zip(urls) {
            let (status, _, bytes) = call(&app, "GET", url.as_str().unwrap(), None).await;
            assert_eq!(status, StatusCode::OK);
            let path = f.config.stimuli_dir.join(&scheduled.sequence_id).join(format!("frame_{frame}.png"));
            assert_eq!(bytes, std::fs::read(path).unwrap());
        }

        let presented = if cursor % 3 == 0 { Choice::FirstPairMoreSimilar } else { Choice::SecondPairMoreSimilar };
        call(&app, "POST", &format!("/session/{token}/response"), Some(json!({"trial_id": cursor, "choice": presented}))).await;
        let rs = read_responses(&state.session_file(&token)).unwrap();
        let last = rs.last().unwrap();
        assert_eq!(last.choice, presentation.to_canonical(presented));
        assert_eq!(last.quadruple, scheduled.quadruple);
    }
    let (status, _, _) = call(&app, "GET", "/stimuli/deadbeef.png", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn replay_depends_only_on_seed_and_token() {
    let f = fixture(2, 30);
    let mut other = f.config.clone();
    other.output_dir = f.config.output_dir.with_file_name("out2");
    let (a, _) = app(&f.config);
    let (b, _) = app(&other);
    for index in 0..4 {
        for cursor in 0..30 {
            assert_eq!(a.session_trial(index, cursor), b.session_trial(index, cursor));
        }
    }
    // Sessions past the first plan epoch still get valid trials, from a
    // reshuffled epoch.
    let epoch0: Vec<_> = (0..70).map(|g| a.session_trial(0, g)).collect();
    let epoch1: Vec<_> = (70..140).map(|g| a.session_trial(0, g)).collect();
    assert_ne!(
        epoch0.iter().map(|t| t.quadruple).collect::<Vec<_>>(),
        epoch1.iter().map(|t| t.quadruple).collect::<Vec<_>>()
    );
    let mut seen: Vec<_> = epoch1.iter().map(|t| (t.sequence_id.clone(), t.quadruple)).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 70);
}

#[tokio::test]
async fn restart_never_reuses_session_files() {
    let f = fixture(1, 2);
    let (state, app1) = app(&f.config);
    let (_, s, _) = call(&app1, "POST", "/session", None).await;
    let token = s["token"].as_str().unwrap().to_string();
    call(&app1, "POST", &format!("/session/{token}/response"), Some(json!({"trial_id": 0, "choice": "FirstPairMoreSimilar"}))).await;
    assert!(state.session_file(&token).exists());

    let (_, app2) = app(&f.config);
    let (_, s2, _) = call(&app2, "POST", "/session", None).await;
    assert_eq!(s2["index"], 1);
}

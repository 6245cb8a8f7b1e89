mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use chrono::Duration;
use common::*;
use http_body_util::BodyExt;
use serde_json::Value;
use spoofeval_service::http::router;
use tower::ServiceExt;

const BOUNDARY: &str = "XyZbOuNdArY";

fn multipart(fields: &[(&str, &str)]) -> Body {
    let mut body = String::new();
    for (name, value) in fields {
        body.push_str(&format!(
            "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}.txt\"\r\n\r\n{value}\r\n"
        ));
    }
    body.push_str(&format!("--{BOUNDARY}--\r\n"));
    Body::from(body)
}

fn submit(task: &str, fields: &[(&str, &str)]) -> Request<Body> {
    Request::post(format!("/api/v1/{task}/submissions"))
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(multipart(fields))
        .unwrap()
}

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

fn get(uri: &str, token: Option<&str>) -> Request<Body> {
    let mut b = Request::get(uri);
    if let Some(t) = token {
        b = b.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    b.body(Body::empty()).unwrap()
}

#[tokio::test]
async fn submission_lifecycle_and_status_codes() {
    let fx = Fixture::new("2021-08-01T08:00:00Z");
    let app = router(Arc::new(fx.open()));

    let (s, body) = call(
        &app,
        submit(
            "LA",
            &[("token", "tok-alpha"), ("scores", LA_PROGRESS_SCORES)],
        ),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["status"], "scored");
    assert_eq!(body["phase"], "progress");
    assert_eq!(body["results"]["eer"], 25.0);
    assert_eq!(body["digest"].as_str().unwrap().len(), 64);
    let id = body["id"].as_u64().unwrap();

    let (s, _) = call(
        &app,
        submit("LA", &[("token", "nope"), ("scores", LA_PROGRESS_SCORES)]),
    )
    .await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, _) = call(&app, submit("LA", &[("scores", LA_PROGRESS_SCORES)])).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, body) = call(
        &app,
        submit("LA", &[("token", "tok-alpha"), ("scores", "p1 x\n")]),
    )
    .await;
    assert_eq!(
        (s, body["error"].as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, Some("parse_error"))
    );
    let (s, body) = call(
        &app,
        submit("LA", &[("token", "tok-alpha"), ("scores", "p1 1\n")]),
    )
    .await;
    assert_eq!(
        (s, body["error"].as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, Some("alignment_error"))
    );
    let (s, _) = call(&app, submit("LA", &[("token", "tok-alpha")])).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(
        &app,
        submit("XX", &[("token", "tok-alpha"), ("scores", "")]),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(
        &app,
        submit("PA", &[("token", "tok-alpha"), ("scores", "")]),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    for _ in 0..2 {
        let (s, _) = call(
            &app,
            submit("LA", &[("token", "tok-alpha"), ("scores", LA_SEPARABLE)]),
        )
        .await;
        assert_eq!(s, StatusCode::CREATED);
    }
    let (s, body) = call(
        &app,
        submit("LA", &[("token", "tok-alpha"), ("scores", LA_SEPARABLE)]),
    )
    .await;
    assert_eq!(
        (s, body["error"].as_str()),
        (StatusCode::TOO_MANY_REQUESTS, Some("quota_exceeded"))
    );

    let uri = format!("/api/v1/LA/submissions/{id}");
    let (s, body) = call(&app, get(&uri, Some("tok-alpha"))).await;
    assert_eq!((s, body["id"].as_u64()), (StatusCode::OK, Some(id)));
    let (s, _) = call(&app, get(&uri, Some("tok-beta"))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, get(&uri, None)).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, _) = call(
        &app,
        get(&format!("/api/v1/DF/submissions/{id}"), Some("tok-alpha")),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    fx.clock.set(at("2021-09-01T00:00:00Z"));
    let (s, body) = call(
        &app,
        submit("LA", &[("token", "tok-alpha"), ("scores", LA_SEPARABLE)]),
    )
    .await;
    assert_eq!(
        (s, body["error"].as_str()),
        (StatusCode::FORBIDDEN, Some("phase_closed"))
    );
}

#[tokio::test]
async fn leaderboard_and_series_endpoints() {
    let fx = Fixture::new("2021-08-01T08:00:00Z");
    let app = router(Arc::new(fx.open()));
    for (tok, scores) in [
        ("tok-alpha", LA_PROGRESS_SCORES),
        ("tok-beta", LA_SEPARABLE),
        ("tok-gamma", LA_SEPARABLE),
    ] {
        let (s, _) = call(&app, submit("LA", &[("token", tok), ("scores", scores)])).await;
        assert_eq!(s, StatusCode::CREATED);
        fx.clock.advance(Duration::days(1));
    }

    let (s, board) = call(&app, get("/api/v1/LA/leaderboard?phase=progress", None)).await;
    assert_eq!(s, StatusCode::OK);
    let board = board.as_array().unwrap();
    assert_eq!(board.len(), 2);
    assert_eq!(board[0]["rank"], 1);
    assert_eq!(board[0]["best"], 0.1588);
    assert!(board[0]["alias"].as_str().unwrap().starts_with("team-"));
    let (_, default_phase) = call(&app, get("/api/v1/LA/leaderboard", None)).await;
    assert_eq!(default_phase.as_array().unwrap().len(), 2);
    let (_, eval) = call(&app, get("/api/v1/LA/leaderboard?phase=evaluation", None)).await;
    assert!(eval.as_array().unwrap().is_empty());
    let (s, _) = call(&app, get("/api/v1/LA/leaderboard?phase=bogus", None)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, series) = call(&app, get("/api/v1/LA/progress-series", None)).await;
    assert_eq!(s, StatusCode::OK);
    let points = series["points"].as_array().unwrap();
    let best: Vec<f64> = points.iter().map(|p| p["best"].as_f64().unwrap()).collect();
    assert_eq!(best.len(), 3);
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(points[0]["date"], "2021-08-01");
    assert_eq!(series["metric"], "min_tdcf");
}

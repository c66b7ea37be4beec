use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use serde_json::{json, Value};
use tower::ServiceExt;

use impact_screen::catalog::Catalog;
use impact_screen::report::{build_observatory, export_table, ExportFormat, DISCLAIMER};
use impact_screen::server::{router, AppState};

async fn call(state: &AppState, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, String, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or("").to_string())).unwrap();
    let res = router(state.clone()).oneshot(req).await.unwrap();
    let status = res.status();
    let media = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec();
    (status, media, bytes)
}

async fn get_json(state: &AppState, uri: &str) -> (StatusCode, Value) {
    let (status, _, bytes) = call(state, Method::GET, uri, None).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post_json(state: &AppState, uri: &str, body: &str) -> (StatusCode, Value) {
    let (status, _, bytes) = call(state, Method::POST, uri, Some(body)).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn shipped() -> AppState {
    AppState::new(Catalog::shipped())
}

fn fmt4(v: &Value) -> String {
    format!("{:.4}", v.as_f64().unwrap())
}

#[tokio::test]
async fn models_lists_the_bundle() {
    let state = shipped();
    let (status, v) = get_json(&state, "/v1/models").await;
    assert_eq!(status, StatusCode::OK);
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 8);
    assert_eq!(models[0]["raw_active_params"]["unit"], "B params");
    assert_eq!(v["methodology_version"], Catalog::shipped().methodology_version());
    assert_eq!(v["disclaimer"], DISCLAIMER);

    let empty = AppState::new(Catalog::shipped().without_models());
    let (_, v) = get_json(&empty, "/v1/models").await;
    assert_eq!(v["models"], json!([]));
}

#[tokio::test]
async fn unknown_routes_and_versions() {
    let state = shipped();
    let (status, v) = get_json(&state, "/v2/models").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_version");
    let (status, v) = get_json(&state, "/v1/nothing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "not_found");
    let (status, _, bytes) = call(&state, Method::DELETE, "/v1/models", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert!(v["methodology_version"].is_string());
}

#[tokio::test]
async fn parse_endpoint() {
    let state = shipped();
    let body = json!({"description": "We use GPT-4o-mini for customer support, around 4,000 uses per month."});
    let (status, v) = post_json(&state, "/v1/parse", &body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let s = &v["scenario"];
    assert_eq!(s["model_id"], "gpt-4o-mini");
    assert_eq!(s["request_type"], "chat");
    assert_eq!(s["requests_per_month"], json!({"value": 4000.0, "unit": "requests/month"}));
    assert_eq!(s["input_tokens"]["value"], 1000.0);
    assert_eq!(s["country_code"], Value::Null);
    assert_eq!(
        s["provenance"],
        json!({
            "model_id": "explicit",
            "request_type": "inferred",
            "token_load": "default",
            "requests_per_month": "explicit",
            "country_code": "default"
        })
    );

    let (status, v) = post_json(&state, "/v1/parse", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_request");

    let (status, v) = post_json(&state, "/v1/parse", r#"{"description": "use FooNet 9"}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "parse_failed");
    let diagnostics = v["error"]["details"]["diagnostics"].as_array().unwrap();
    assert!(!diagnostics[0]["suggestions"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn estimate_endpoint() {
    let state = shipped();
    let (status, v) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini"}"#).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fmt4(&v["inference"]["energy_wh"]["central"]), "0.1706");
    assert_eq!(fmt4(&v["inference"]["carbon_g"]["central"]), "0.0657");
    assert_eq!(v["inference"]["energy_wh"]["unit"], "Wh/request");
    assert_eq!(v["annualized"], Value::Null);
    assert!(!v["assumptions"].as_array().unwrap().is_empty());

    let body = r#"{"model": "Ministral 8B", "request_type": "chat", "requests_per_month": 20000, "country": "FR"}"#;
    let (_, v) = post_json(&state, "/v1/estimate", body).await;
    let kwh = v["annualized"]["energy_kwh"]["central"].as_f64().unwrap();
    assert_eq!(format!("{kwh:.2}"), "2.38");
    assert_eq!(v["annualized"]["energy_kwh"]["unit"], "kWh/year");

    let (status, v) = post_json(&state, "/v1/estimate", r#"{"model": "foonet"}"#).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_model");
    assert_eq!(v["error"]["details"]["suggestions"].as_array().unwrap().len(), 3);

    let (status, v) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "input_tokens": 0, "output_tokens": 0}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "invalid_tokens");

    let (status, v) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "requests_per_month": 0}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "invalid_volume");

    let (status, v) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "country": "DE"}"#).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "unknown_country");

    let (status, v) = post_json(&state, "/v1/estimate", r#"{"modle": "gpt-5-mini"}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_request");
}

#[tokio::test]
async fn country_switch_changes_only_carbon() {
    let state = shipped();
    let (_, us) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "country": "US"}"#).await;
    let (_, fr) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "country": "FR"}"#).await;
    assert_eq!(us["inference"]["energy_wh"], fr["inference"]["energy_wh"]);
    let ratio = fr["inference"]["carbon_g"]["central"].as_f64().unwrap() / us["inference"]["carbon_g"]["central"].as_f64().unwrap();
    assert!((ratio - 40.3 / 385.0).abs() < 1e-12);
}

#[tokio::test]
async fn estimate_from_a_parsed_scenario_round_trip() {
    let state = shipped();
    let (_, parsed) = post_json(&state, "/v1/parse", r#"{"description": "GPT-5 mini retrieval, 4,000 uses per month, US"}"#).await;
    let s = &parsed["scenario"];
    let body = json!({
        "scenario": {
            "model_id": s["model_id"],
            "request_type": s["request_type"],
            "input_tokens": s["input_tokens"]["value"].as_f64().unwrap() as u64,
            "output_tokens": s["output_tokens"]["value"].as_f64().unwrap() as u64,
            "requests_per_month": s["requests_per_month"]["value"].as_f64().unwrap() as u64,
            "country_code": s["country_code"],
            "provenance": s["provenance"],
        }
    });
    let (status, v) = post_json(&state, "/v1/estimate", &body.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["scenario"]["provenance"], s["provenance"]);
    let kwh = v["annualized"]["energy_kwh"]["central"].as_f64().unwrap();
    let kg = v["annualized"]["carbon"]["central"].as_f64().unwrap();
    assert_eq!(format!("{kwh:.2}"), "12.31");
    assert_eq!(format!("{kg:.2}"), "4.74");
    assert_eq!(v["annualized"]["carbon"]["unit"], "kgCO2e/year");
}

#[tokio::test]
async fn observatory_formats() {
    let state = shipped();
    let c = Catalog::shipped();
    let rows = build_observatory(&c);

    let (status, media, bytes) = call(&state, Method::GET, "/v1/observatory?format=csv", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(media.starts_with("text/csv"));
    assert_eq!(bytes, export_table(&rows, ExportFormat::Csv, &c.methodology_version()));

    let (status, v) = get_json(&state, "/v1/observatory?format=json").await;
    assert_eq!(status, StatusCode::OK);
    let json_rows = v["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), 8);
    for (j, r) in json_rows.iter().zip(&rows) {
        assert_eq!(j["model_id"], r.model_id.as_str());
        assert_eq!(j["inference_wh"]["central"].as_f64(), r.inference_wh_central());
        assert_eq!(j["training_gwh"]["central"].as_f64(), r.training_gwh_central());
    }
    let (_, default) = get_json(&state, "/v1/observatory").await;
    assert_eq!(default, v);

    let (status, v) = get_json(&state, "/v1/observatory?format=xml").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "bad_format");
}

#[tokio::test]
async fn training_endpoint() {
    let state = shipped();
    let (status, v) = get_json(&state, "/v1/models/claude-opus-4-1/training").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(format!("{:.2}", v["energy_gwh"]["central"].as_f64().unwrap()), "125.63");
    assert_eq!(v["tokens_used"]["unit"], "B tokens");
    assert_eq!(v["country_code"], "US");

    let (_, fr) = get_json(&state, "/v1/models/claude-opus-4-1/training?country=FR").await;
    assert_eq!(fr["energy_gwh"], v["energy_gwh"]);
    assert_eq!(fr["carbon_t"]["unit"], "tCO2e");

    let (status, v) = get_json(&state, "/v1/models/foonet/training").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "unknown_model");
}

#[tokio::test]
async fn responses_are_pure_functions_of_input() {
    let state = shipped();
    for _ in 0..2 {
        let (_, a) = post_json(&state, "/v1/estimate", r#"{"description": "Claude Opus 4.1 drafting, 300 per day"}"#).await;
        let (_, b) = post_json(&state, "/v1/estimate", r#"{"description": "Claude Opus 4.1 drafting, 300 per day"}"#).await;
        assert_eq!(a, b);
    }
}

#[tokio::test]
async fn catalog_swap_is_atomic_between_requests() {
    let state = shipped();
    let before = state.current();
    let mut edited = Catalog::shipped();
    edited.models.truncate(3);
    state.replace(edited);
    // a snapshot taken before the swap is unchanged
    assert_eq!(before.models.len(), 8);
    let (_, v) = get_json(&state, "/v1/models").await;
    assert_eq!(v["models"].as_array().unwrap().len(), 3);

    let dir = tempfile::tempdir().unwrap();
    assert!(state.reload_from(dir.path()).is_err());
    let (_, v) = get_json(&state, "/v1/models").await;
    assert_eq!(v["models"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn every_number_carries_a_unit() {
    fn check(v: &Value, path: &str, parent_has_unit: bool) {
        match v {
            Value::Number(_) => assert!(parent_has_unit, "bare number at {path}"),
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    check(item, &format!("{path}[{i}]"), parent_has_unit);
                }
            }
            Value::Object(map) => {
                let has_unit = map.contains_key("unit");
                for (k, item) in map {
                    check(item, &format!("{path}.{k}"), has_unit);
                }
            }
            _ => {}
        }
    }
    let state = shipped();
    let (_, v) = post_json(&state, "/v1/estimate", r#"{"model": "gpt-5-mini", "requests_per_month": 4000}"#).await;
    check(&v, "estimate", false);
    let (_, v) = get_json(&state, "/v1/models").await;
    check(&v, "models", false);
    let (_, v) = get_json(&state, "/v1/models/gpt-5-mini/training").await;
    check(&v, "training", false);
    let (_, v) = get_json(&state, "/v1/observatory").await;
    check(&v, "observatory", false);
    let (_, v) = post_json(&state, "/v1/parse", r#"{"description": "GPT-5 mini, 10 per day"}"#).await;
    check(&v, "parse", false);
}

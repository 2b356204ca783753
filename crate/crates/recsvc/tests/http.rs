use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use nextview_core::{load_csv, recommend, LoadOptions, RecommendConfig, RecommendationSet, SpecInput, VizSpec};
use nextview_recsvc::wire::ChartSet;
use nextview_recsvc::{http::router, SessionContext, Store};

fn data(name: &str) -> Vec<u8> {
    std::fs::read(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)).unwrap()
}

fn app() -> Router {
    router(Arc::new(Store::default()))
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<Vec<u8>>, json_body: bool) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if json_body {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let has = body.is_some();
    let (status, bytes) = call_raw(app, method, uri, body.map(|b| serde_json::to_vec(&b).unwrap()), has).await;
    let v: Value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("non-json body: {}", String::from_utf8_lossy(&bytes)));
    assert_eq!(v["version"], "1");
    assert_eq!(v["ok"], status.is_success(), "{v}");
    assert!(v.get("data").is_some() != v.get("error").is_some(), "exactly one of data/error: {v}");
    (status, v)
}

async fn upload(app: &Router, name: &str) -> String {
    let (status, bytes) = call_raw(app, Method::POST, "/datasets", Some(data(name)), false).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    v["data"]["dataset_id"].as_str().unwrap().to_string()
}

async fn session(app: &Router, dataset: &str) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(json!({ "dataset_id": dataset }))).await;
    assert_eq!(status, StatusCode::OK);
    v["data"]["session_id"].as_str().unwrap().to_string()
}

fn keys(v: &Value) -> Vec<String> {
    let set: ChartSet = serde_json::from_value(v["data"].clone()).unwrap();
    set.without_data().items().map(|i| i.key.clone()).collect()
}

#[tokio::test]
async fn upload_is_content_addressed_and_schema_has_stats() {
    let app = app();
    let a = upload(&app, "cars.csv").await;
    assert_eq!(a, upload(&app, "cars.csv").await);
    let (status, v) = call(&app, Method::GET, &format!("/datasets/{a}/schema"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["columns"].as_array().unwrap().len(), 10);
    assert_eq!(v["data"]["stats"].as_array().unwrap().len(), 10);
    assert_eq!(v["data"]["row_count"], 406);
}

#[tokio::test]
async fn json_upload_applies_schema_override() {
    let app = app();
    let csv = String::from_utf8(data("cars.csv")).unwrap();
    let body = json!({ "csv": csv, "schema_override": { "columns": [{ "name": "Cylinders", "dtype": "nominal" }] } });
    let (status, v) = call(&app, Method::POST, "/datasets", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let cyl = v["data"]["columns"].as_array().unwrap().iter().find(|c| c["name"] == "Cylinders").unwrap();
    assert_eq!(cyl["dtype"], "nominal");
}

#[tokio::test]
async fn unknown_ids_are_404_and_bad_json_is_400() {
    let app = app();
    assert_eq!(call(&app, Method::GET, "/datasets/nope/schema", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::POST, "/sessions", Some(json!({ "dataset_id": "nope" }))).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::GET, "/sessions/nope/view", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::GET, "/sessions/nope/recommendations", None).await.0, StatusCode::NOT_FOUND);
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    let (status, _) = call_raw(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(b"{not json".to_vec()), true).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?k=lots"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_raw(&app, Method::POST, "/datasets", Some(Vec::new()), false).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn invalid_views_are_422() {
    let app = app();
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    let uri = format!("/sessions/{id}/view");
    for body in [
        json!({ "attrs": ["Horsepower", "Weight", "Displacement", "Origin"] }),
        json!({ "attrs": ["Nope"] }),
        json!({ "attrs": ["Horsepower"], "filters": [{ "attr": "Origin", "value": "Atlantis" }] }),
        json!({ "attrs": ["Origin", "Horsepower"], "filters": [{ "attr": "Origin", "value": "USA" }] }),
    ] {
        let (status, v) = call(&app, Method::PUT, &uri, Some(body)).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
        assert_eq!(v["error"]["code"], "invalid_spec");
    }
    // A rejected view leaves the previous one in place.
    let (_, v) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(v["data"]["view"], Value::Null);
}

#[tokio::test]
async fn sat_cost_enhance_row_has_fundingmodel_scatter_with_inline_data() {
    let app = app();
    let id = session(&app, &upload(&app, "college.csv").await).await;
    let (status, v) = call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": ["AverageCost", "SATAverage"] }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["view"]["mark"], "scatter");
    assert!(v["data"]["data"]["points"].as_array().unwrap().len() <= 2000);
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let set: ChartSet = serde_json::from_value(v["data"].clone()).unwrap();
    let ChartSet::Categorized { categories } = set else { panic!("categorized by default") };
    let enhance = categories.iter().find(|c| c.category.kind == nextview_core::CategoryKind::Enhance).unwrap();
    let hit = enhance.items.iter().find(|i| i.item.spec.color() == Some("FundingModel")).expect("FundingModel scatter");
    match &hit.data {
        nextview_core::AggregatedData::Points { points, labels, .. } => {
            assert!(points.len() <= 2000);
            assert_eq!(labels.as_ref().unwrap().len(), points.len());
        }
        other => panic!("scatter data expected, got {other:?}"),
    }
}

#[tokio::test]
async fn responses_match_direct_orchestrator_calls() {
    let app = app();
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    let input = json!({ "attrs": ["Cylinders", "Horsepower"], "filters": [{ "attr": "Origin", "value": "Europe" }] });
    call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(input.clone())).await;
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?k=4&metric=mi"), None).await;
    let served: ChartSet = serde_json::from_value(v["data"].clone()).unwrap();

    let ds = load_csv(&data("cars.csv")[..], &LoadOptions::default()).unwrap();
    let view = serde_json::from_value::<SpecInput>(input).unwrap().resolve(ds.schema()).unwrap();
    let mut config = RecommendConfig { k: 4, ..Default::default() };
    config.scoring.metric = nextview_core::CorrelationMetric::MutualInformation;
    assert_eq!(served.without_data(), recommend(view.as_ref(), &ds, &config));
}

#[tokio::test]
async fn repeated_requests_are_byte_identical() {
    let app = app();
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": ["Origin"] }))).await;
    for q in ["", "?mode=baseline&seed=7", "?k=3&similarity_order=descending"] {
        let uri = format!("/sessions/{id}/recommendations{q}");
        let a = call_raw(&app, Method::GET, &uri, None, false).await;
        let b = call_raw(&app, Method::GET, &uri, None, false).await;
        assert_eq!(a, b, "{uri}");
    }
}

#[tokio::test]
async fn baseline_mode_has_no_category_labels() {
    let app = app();
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    let (_, cat) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let (_, base) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations?mode=baseline&seed=3"), None).await;
    assert_eq!(base["data"]["mode"], "baseline");
    assert!(base["data"].get("categories").is_none());
    let (mut a, mut b) = (keys(&cat), keys(&base));
    assert_ne!(a, b);
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[tokio::test]
async fn promote_sets_the_served_spec_and_recomputes() {
    let app = app();
    let id = session(&app, &upload(&app, "college.csv").await).await;
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/promote"), Some(json!({ "key": "bar|[]|[]" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "not_served");

    call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": ["SATAverage", "AverageCost"] }))).await;
    let (_, recs) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let set: ChartSet = serde_json::from_value(recs["data"].clone()).unwrap();
    let target = set.without_data().items().find(|i| i.spec.color() == Some("FundingModel")).unwrap().clone();

    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/promote"), Some(json!({ "key": target.key }))).await;
    assert_eq!(status, StatusCode::OK);
    let (_, now) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
    assert_eq!(now["data"], v["data"]);
    let promoted: VizSpec = serde_json::from_value(now["data"]["view"].clone()).unwrap();
    assert_eq!(promoted, target.spec);

    let (_, after) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let ds = load_csv(&data("college.csv")[..], &LoadOptions::default()).unwrap();
    let want = recommend(Some(&target.spec), &ds, &RecommendConfig::default());
    let got: ChartSet = serde_json::from_value(after["data"].clone()).unwrap();
    assert_eq!(got.without_data(), want);
    // Generalize leads back to where we came from.
    let back = want
        .category(nextview_core::CategoryKind::Generalize)
        .unwrap()
        .items
        .iter()
        .find(|i| i.spec.color().is_none())
        .unwrap()
        .key
        .clone();
    call(&app, Method::POST, &format!("/sessions/{id}/promote"), Some(json!({ "key": back }))).await;
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
    let attrs: Vec<&str> = v["data"]["view"]["attrs"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert_eq!(attrs, ["AverageCost", "SATAverage"]);
}

#[tokio::test]
async fn star_and_toggle() {
    let app = app();
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/star"), Some(json!({ "key": "x" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, recs) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let first = keys(&recs)[0].clone();
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/star"), Some(json!({ "key": first }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["data"]["starred"], json!([first]));
    let (_, v) = call(&app, Method::POST, &format!("/sessions/{id}/star"), Some(json!({ "key": first, "starred": false }))).await;
    assert_eq!(v["data"]["starred"], json!([]));

    let (_, v) = call(&app, Method::POST, &format!("/sessions/{id}/toggle-category"), Some(json!({ "category": "correlation" }))).await;
    assert_eq!(v["data"]["correlation"], false);
    let (_, recs) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let kinds: Vec<&str> = recs["data"]["categories"].as_array().unwrap().iter().map(|c| c["category"]["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["distribution"]);
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/toggle-category"), Some(json!({ "category": "bogus" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/log"), None).await;
    let kinds: Vec<&str> = log["data"].as_array().unwrap().iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["session_created", "recommendations", "star", "star", "toggle_category", "recommendations"]);
    assert!(log["data"].as_array().unwrap().iter().all(|e| e["session"] == id.as_str()));
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let ds = upload(&app, "cars.csv").await;
    let (a, b) = (session(&app, &ds).await, session(&app, &ds).await);
    call(&app, Method::PUT, &format!("/sessions/{a}/view"), Some(json!({ "attrs": ["Horsepower"] }))).await;
    let (_, rb) = call(&app, Method::GET, &format!("/sessions/{b}/recommendations"), None).await;
    call(&app, Method::PUT, &format!("/sessions/{b}/view"), Some(json!({ "attrs": ["Origin"] }))).await;
    let (_, ra) = call(&app, Method::GET, &format!("/sessions/{a}/recommendations"), None).await;

    let (_, va) = call(&app, Method::GET, &format!("/sessions/{a}/view"), None).await;
    let (_, vb) = call(&app, Method::GET, &format!("/sessions/{b}/view"), None).await;
    assert_eq!(va["data"]["view"]["attrs"], json!(["Horsepower"]));
    assert_eq!(vb["data"]["view"]["attrs"], json!(["Origin"]));

    // A key served only to A cannot be promoted in B.
    let only_a = keys(&ra).into_iter().find(|k| !keys(&rb).contains(k)).unwrap();
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{b}/promote"), Some(json!({ "key": only_a }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    call(&app, Method::POST, &format!("/sessions/{a}/toggle-category"), Some(json!({ "category": "pivot" }))).await;
    let (_, sb) = call(&app, Method::GET, &format!("/sessions/{b}"), None).await;
    assert_eq!(sb["data"]["category_toggles"], json!({}));
}

#[tokio::test]
async fn concurrent_sessions_do_not_interfere() {
    let app = app();
    let ds = upload(&app, "cars.csv").await;
    let mut handles = Vec::new();
    for attrs in [["Horsepower"], ["Origin"], ["Weight"], ["Cylinders"]] {
        let app = app.clone();
        let ds = ds.clone();
        handles.push(tokio::spawn(async move {
            let id = session(&app, &ds).await;
            for _ in 0..3 {
                call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": attrs }))).await;
                call(&app, Method::GET, &format!("/sessions/{id}/recommendations?k=2"), None).await;
            }
            let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/view"), None).await;
            assert_eq!(v["data"]["view"]["attrs"], json!(attrs));
        }));
    }
    for h in handles {
        h.await.unwrap();
    }
}

#[tokio::test]
async fn protocol_types_round_trip() {
    let app = app();
    let id = session(&app, &upload(&app, "college.csv").await).await;
    call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": ["Region", "MedianEarnings"] }))).await;
    call(&app, Method::GET, &format!("/sessions/{id}/recommendations?k=2"), None).await;
    call(&app, Method::GET, &format!("/sessions/{id}/recommendations?mode=baseline"), None).await;
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    let ctx: SessionContext = serde_json::from_value(v["data"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&ctx).unwrap(), v["data"]);
    assert_eq!(serde_json::from_value::<SessionContext>(serde_json::to_value(&ctx).unwrap()).unwrap(), ctx);

    let view = ctx.current_view.clone().unwrap();
    assert_eq!(serde_json::from_str::<VizSpec>(&serde_json::to_string(&view).unwrap()).unwrap(), view);
    let (_, recs) = call(&app, Method::GET, &format!("/sessions/{id}/recommendations"), None).await;
    let set: ChartSet = serde_json::from_value(recs["data"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&set).unwrap(), recs["data"]);
    let plain = set.without_data();
    assert_eq!(serde_json::from_str::<RecommendationSet>(&serde_json::to_string(&plain).unwrap()).unwrap(), plain);
}

#[tokio::test]
async fn snapshot_and_log_files() {
    let dir = std::env::temp_dir().join(format!("nextview-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (log_path, snap_path) = (dir.join("events.jsonl"), dir.join("sessions.json"));
    let _ = std::fs::remove_file(&log_path);
    let store = Arc::new(Store::new(Some(nextview_recsvc::store::EventLog::open(&log_path).unwrap()), Some(snap_path.clone())));
    let app = router(store.clone());
    let id = session(&app, &upload(&app, "cars.csv").await).await;
    call(&app, Method::PUT, &format!("/sessions/{id}/view"), Some(json!({ "attrs": ["Origin"] }))).await;
    store.save_snapshot().await.unwrap();

    let lines: Vec<Value> = std::fs::read_to_string(&log_path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let kinds: Vec<&str> = lines.iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["session_created", "set_view"]);
    for e in &lines {
        assert!(e["ts"].is_u64() && e["session"] == id.as_str() && e.get("payload").is_some());
    }
    let snap: Vec<SessionContext> = serde_json::from_slice(&std::fs::read(&snap_path).unwrap()).unwrap();
    assert_eq!(snap.len(), 1);
    assert_eq!(snap[0].current_view.as_ref().unwrap().attrs(), ["Origin"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use polarcut::spheregraph::build_icosphere;
use polarcut::volume::{generate_phantom, save_native, write_nifti_bytes, NiftiDatatype};
use polarcut::{BinaryMask, PhantomSpec, Vec3, Volume};
use polarcut_cli::api::{router, AppState};
use polarcut_cli::commands::{cmd_eval, cmd_segment, EvalArgs};
use serde_json::{json, Value};
use tower::ServiceExt;

const CENTER: [f64; 3] = [32.0, 32.0, 32.0];

struct Phantom {
    _dir: tempfile::TempDir,
    volume: PathBuf,
    mask: PathBuf,
}

fn phantom(sigma: f64) -> Phantom {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = PhantomSpec::sphere([64; 3], [1.0; 3], Vec3::from(CENTER), 10.0);
    spec.noise_sigma = sigma;
    spec.rng_seed = 5;
    let (v, m) = generate_phantom(&spec).unwrap();
    let volume = dir.path().join("p.vol");
    let mask = dir.path().join("p.mask");
    save_native(&v, &volume).unwrap();
    m.save_native(&mask).unwrap();
    Phantom {
        _dir: dir,
        volume,
        mask,
    }
}

async fn call(state: &Arc<AppState>, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        to_bytes(resp.into_body(), usize::MAX)
            .await
            .unwrap()
            .to_vec(),
    )
}

fn post_json(uri: &str, body: &Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(serde_json::to_vec(body).unwrap()))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes)
        .unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(bytes)))
}

fn kind(bytes: &[u8]) -> String {
    json_of(bytes)["error"]["kind"]
        .as_str()
        .unwrap()
        .to_string()
}

async fn open(state: &Arc<AppState>, volume: &Path, reference: Option<&Path>) -> String {
    let mut body = json!({"path": volume});
    if let Some(r) = reference {
        body["reference"] = json!(r);
    }
    let (status, bytes) = call(state, post_json("/session", &body)).await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&bytes)
    );
    json_of(&bytes)["id"].as_str().unwrap().to_string()
}

fn decode_png(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Grayscale);
    assert_eq!(info.bit_depth, png::BitDepth::Eight);
    buf.truncate(info.buffer_size());
    (info.width, info.height, buf)
}

/// Shortest distance from `p` to any segment of the slice's polylines.
fn distance_to_contour(contour: &Value, p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for line in contour["polylines"].as_array().unwrap() {
        let pts: Vec<[f64; 2]> = serde_json::from_value(line.clone()).unwrap();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
            };
            let q = [a[0] + t * d[0] - p[0], a[1] + t * d[1] - p[1]];
            best = best.min((q[0] * q[0] + q[1] * q[1]).sqrt());
        }
    }
    best
}

fn slice_of(resp: &Value, z: usize) -> Value {
    resp["contours"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["slice"] == z)
        .cloned()
        .unwrap()
}

#[tokio::test]
async fn sessions_open_from_path_or_bytes() {
    let p = phantom(0.0);
    let state = AppState::new(true);
    let (status, bytes) = call(&state, post_json("/session", &json!({"path": p.volume}))).await;
    assert_eq!(status, StatusCode::OK);
    let info = json_of(&bytes);
    assert_eq!(info["dims"], json!([64, 64, 64]));
    assert_eq!(info["intensity_range"], json!([0.0, 100.0]));
    let second = open(&state, &p.volume, None).await;
    assert_ne!(info["id"].as_str().unwrap(), second);

    let v = Volume::new([4, 3, 2], [1.0; 3], (0..24).map(|i| i as f32).collect()).unwrap();
    let nifti = write_nifti_bytes(v.dims(), v.spacing(), v.data(), NiftiDatatype::Float32).unwrap();
    let (status, bytes) = call(
        &state,
        Request::post("/session").body(Body::from(nifti)).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&bytes)["dims"], json!([4, 3, 2]));

    let (status, bytes) = call(
        &state,
        Request::post("/session")
            .body(Body::from(vec![7u8; 500]))
            .unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(!kind(&bytes).is_empty());

    let (status, bytes) = call(
        &state,
        post_json("/session", &json!({"path": "/nonexistent/x.vol"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(kind(&bytes), "io");

    let small = BinaryMask::empty([8; 3], [1.0; 3]);
    let dir = tempfile::tempdir().unwrap();
    small.save_native(dir.path().join("small.mask")).unwrap();
    let body = json!({"path": p.volume, "reference": dir.path().join("small.mask")});
    let (status, bytes) = call(&state, post_json("/session", &body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(kind(&bytes), "dimension_mismatch");
}

#[tokio::test]
async fn slices_are_windowed_grayscale_png() {
    let dir = tempfile::tempdir().unwrap();
    let flat = Volume::new([16, 12, 4], [1.0; 3], vec![40.0; 16 * 12 * 4]).unwrap();
    save_native(&flat, dir.path().join("flat.vol")).unwrap();
    let p = phantom(0.0);
    let state = AppState::new(true);
    let flat_id = open(&state, &dir.path().join("flat.vol"), None).await;
    let id = open(&state, &p.volume, None).await;

    let (status, bytes) = call(&state, get(&format!("/session/{flat_id}/slice/2"))).await;
    assert_eq!(status, StatusCode::OK);
    let (w, h, px) = decode_png(&bytes);
    assert_eq!((w, h), (16, 12));
    assert!(px.iter().all(|&v| v == px[0]));

    let (_, bytes) = call(&state, get(&format!("/session/{id}/slice/32?lo=0&hi=0"))).await;
    assert!(decode_png(&bytes).2.iter().all(|&v| v == 255));

    let (_, bytes) = call(&state, get(&format!("/session/{id}/slice/32?lo=0&hi=100"))).await;
    let (w, h, px) = decode_png(&bytes);
    assert_eq!((w, h), (64, 64));
    let bright = px.iter().filter(|&&v| v == 255).count();
    assert!(px.iter().all(|&v| v == 0 || v == 255));
    // Lattice points of a radius 10 disk.
    assert_eq!(bright, 317);

    let (status, bytes) = call(&state, get(&format!("/session/{id}/slice/64"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "slice_out_of_range");
    let (status, bytes) = call(&state, get("/session/nope/slice/0")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "unknown_session");
}

#[tokio::test]
async fn segmentation_answers_with_contours() {
    let p = phantom(0.0);
    let state = AppState::new(true);
    let id = open(&state, &p.volume, Some(&p.mask)).await;
    let uri = format!("/session/{id}/segment");

    let (status, bytes) = call(&state, get(&format!("/session/{id}/export/mask"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "no_result");

    let (status, bytes) = call(&state, post_json(&uri, &json!({"seed": CENTER}))).await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&bytes)
    );
    let first = json_of(&bytes);
    let center = slice_of(&first, 32);
    assert_eq!(center["polylines"].as_array().unwrap().len(), 1);
    assert!(distance_to_contour(&center, [42.0, 32.0]) <= 1.0);
    assert!(first["dsc"].as_f64().unwrap() >= 0.95);

    let (_, again) = call(&state, post_json(&uri, &json!({"seed": CENTER}))).await;
    let again = json_of(&again);
    assert_eq!(again["contours"], first["contours"]);
    assert_eq!(again["stats"], first["stats"]);
    assert!(again["generation"].as_u64() > first["generation"].as_u64());

    // A click two millimeters outside the object pulls the contour to it.
    let click = [44.0, 32.0, 32.0];
    assert!(distance_to_contour(&center, [click[0], click[1]]) > 1.5);
    let (status, bytes) = call(
        &state,
        post_json(&uri, &json!({"seed": CENTER, "extra_seeds": [click]})),
    )
    .await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&bytes)
    );
    let pulled = slice_of(&json_of(&bytes), 32);
    let d = distance_to_contour(&pulled, [click[0], click[1]]);
    assert!(d <= 1.0, "contour {d} voxels from the click");
}

#[tokio::test]
async fn bad_segment_requests_are_rejected() {
    let p = phantom(0.0);
    let state = AppState::new(true);
    let id = open(&state, &p.volume, None).await;
    let uri = format!("/session/{id}/segment");

    let (status, bytes) = call(
        &state,
        post_json(&uri, &json!({"seed": [32.0, 32.0, 80.0]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(kind(&bytes), "seed_out_of_bounds");

    let u = build_icosphere(1).unwrap().directions()[0];
    let c = Vec3::from(CENTER);
    let body = json!({
        "seed": CENTER,
        "extra_seeds": [(c + u * 3.0).to_array(), (c + u * 8.0).to_array()],
        "params": {"level": 1},
    });
    let (status, bytes) = call(&state, post_json(&uri, &body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(kind(&bytes), "conflicting_constraint");

    let (status, bytes) = call(
        &state,
        post_json(&uri, &json!({"seed": CENTER, "params": {"level": 9}})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(kind(&bytes), "invalid_params");

    let (status, bytes) = call(&state, post_json(&uri, &json!({"seed": "middle"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(kind(&bytes), "malformed_json");

    let (status, bytes) = call(
        &state,
        post_json("/session/s999/segment", &json!({"seed": CENTER})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "unknown_session");
}

#[tokio::test]
async fn exports_round_trip() {
    let p = phantom(10.0);
    let state = AppState::new(true);
    let id = open(&state, &p.volume, Some(&p.mask)).await;
    let (status, bytes) = call(
        &state,
        post_json(&format!("/session/{id}/segment"), &json!({"seed": CENTER})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let resp = json_of(&bytes);

    // The API result matches a CLI run with the same parameters.
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(
        &job,
        serde_json::to_vec(&json!({"input": p.volume, "seed": CENTER})).unwrap(),
    )
    .unwrap();
    let report = cmd_segment(&job, false).unwrap();
    assert_eq!(
        resp["stats"]["mask_voxels"],
        json!(report.stats.mask_voxels)
    );
    assert_eq!(resp["stats"]["cut_cost"], json!(report.stats.cut_cost));

    let (status, nifti) = call(&state, get(&format!("/session/{id}/export/mask"))).await;
    assert_eq!(status, StatusCode::OK);
    let mask_path = dir.path().join("api.nii");
    std::fs::write(&mask_path, &nifti).unwrap();
    let eval = cmd_eval(&EvalArgs {
        a: &mask_path,
        r: &p.mask,
        semi: None,
        csv: None,
        case: None,
    })
    .unwrap();
    assert!((eval.dsc - resp["dsc"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(eval.voxels_a, report.stats.mask_voxels);

    let (status, obj) = call(&state, get(&format!("/session/{id}/export/mesh"))).await;
    assert_eq!(status, StatusCode::OK);
    let obj = String::from_utf8(obj).unwrap();
    let vertices = obj.lines().filter(|l| l.starts_with("v ")).count();
    let faces: Vec<Vec<usize>> = obj
        .lines()
        .filter(|l| l.starts_with("f "))
        .map(|l| {
            l.split_whitespace()
                .skip(1)
                .map(|t| t.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(vertices, 2562);
    assert_eq!(faces.len(), 2 * vertices - 4);
    assert!(faces.iter().flatten().all(|&i| (1..=vertices).contains(&i)));

    let (status, csv) = call(&state, get(&format!("/session/{id}/export/csv"))).await;
    assert_eq!(status, StatusCode::OK);
    let mut reader = csv::Reader::from_reader(csv.as_slice());
    assert_eq!(
        reader
            .headers()
            .unwrap()
            .iter()
            .collect::<Vec<_>>()
            .join(","),
        polarcut::metrics::CSV_HEADER
    );
    let rows: Vec<polarcut::metrics::CaseStats> =
        reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].dsc_oneclick - eval.dsc).abs() < 1e-12);

    let (status, bytes) = call(&state, get(&format!("/session/{id}/export/pdf"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "unknown_export");

    let bare = open(&state, &p.volume, None).await;
    call(
        &state,
        post_json(
            &format!("/session/{bare}/segment"),
            &json!({"seed": CENTER, "params": {"level": 1}}),
        ),
    )
    .await;
    let (status, bytes) = call(&state, get(&format!("/session/{bare}/export/csv"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(kind(&bytes), "no_reference");
}

/// A request slow enough that later ones arrive while it runs.
fn slow_request() -> Value {
    json!({"seed": CENTER, "params": {"level": 4, "samples": 120}})
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn busy_session_refuses_without_queueing() {
    let p = phantom(0.0);
    let state = AppState::new(false);
    let id = open(&state, &p.volume, None).await;
    let uri = format!("/session/{id}/segment");

    let first = tokio::spawn({
        let (state, uri) = (state.clone(), uri.clone());
        async move { call(&state, post_json(&uri, &slow_request())).await }
    });
    tokio::time::sleep(Duration::from_millis(150)).await;
    let (status, bytes) = call(
        &state,
        post_json(&uri, &json!({"seed": CENTER, "params": {"level": 1}})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(kind(&bytes), "busy");
    assert_eq!(first.await.unwrap().0, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn only_the_latest_queued_request_runs() {
    let p = phantom(0.0);
    let state = AppState::new(true);
    let id = open(&state, &p.volume, None).await;
    let uri = format!("/session/{id}/segment");
    let spawn = |body: Value| {
        let (state, uri) = (state.clone(), uri.clone());
        tokio::spawn(async move { call(&state, post_json(&uri, &body)).await })
    };

    let running = spawn(slow_request());
    tokio::time::sleep(Duration::from_millis(150)).await;
    let stale = spawn(json!({"seed": CENTER, "params": {"level": 1}}));
    tokio::time::sleep(Duration::from_millis(50)).await;
    let newest = spawn(json!({"seed": CENTER, "params": {"level": 2}}));

    assert_eq!(running.await.unwrap().0, StatusCode::OK);
    let (status, bytes) = stale.await.unwrap();
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(kind(&bytes), "superseded");
    let (status, bytes) = newest.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&bytes)["stats"]["rays"], 162);
}

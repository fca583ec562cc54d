//! End-to-end acceptance run: one PASS/FAIL line per criterion, each with
//! its own time budget. Runs without any client UI.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;

use tweetscape::analytics::{self, TagRule, TimeInterval};
use tweetscape::ingest::{self, COLUMNS};
use tweetscape::layout::{self, StackParams};
use tweetscape::synth::{self, CorpusSpec, Corruption};
use tweetscape::terrain::{self, Mesh};
use tweetscape::{Dataset, GeoBounds, SceneFrame, ScenePoint};
use tweetscape_server::api::{self, QueryResponse, TerrainResponse, TweetsParams};
use tweetscape_server::{boot, ServiceConfig};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn ingest_ledger() -> Check {
    let spec = CorpusSpec {
        corruption: Corruption::Mixed,
        ..CorpusSpec::new(1_000, 20, 42)
    };
    let corpus = synth::generate_corpus(&spec);
    let bounds = GeoBounds::cambridge_campus();
    let ds = ingest::load_dataset_from_bytes(&corpus.bytes, bounds).map_err(|e| e.to_string())?;
    ensure!(ds.skipped == 20, "rejected {} rows, generator corrupted 20", ds.skipped);
    ensure!(ds.len() == 980, "accepted {} rows, expected 980", ds.len());
    ensure!(ds.reject_log == corpus.ledger, "reject log differs from generator ledger");
    let mut ids: Vec<_> = ds.records.iter().map(|r| r.id.clone()).collect();
    ids.sort();
    ensure!(ids == corpus.valid_ids, "accepted ids differ from generator's valid ids");
    let (rows, errors) = ingest::parse_tsv(&corpus.bytes, &COLUMNS).map_err(|e| e.to_string())?;
    ensure!(rows.len() + errors.len() == 1_000, "line accounting off");
    let again = ingest::load_dataset_from_bytes(&corpus.bytes, bounds).map_err(|e| e.to_string())?;
    ensure!(again == ds, "second load differs");
    Ok(())
}

fn projection() -> Check {
    let b = GeoBounds::cambridge_campus();
    let frame = SceneFrame::new(b).map_err(|e| e.to_string())?;
    let mut rng = common::rng(2014);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let lat = rng.gen_range(b.min_lat..=b.max_lat);
        let lon = rng.gen_range(b.min_lon..=b.max_lon);
        let p = frame.project(lat, lon).map_err(|e| e.to_string())?;
        let (lat2, lon2) = frame.unproject(p.x, p.y).map_err(|e| e.to_string())?;
        worst = worst.max((lat2 - lat).abs()).max((lon2 - lon).abs());
    }
    ensure!(worst < 1e-9, "worst round-trip error {worst:e} degrees");
    let corners = [
        ((b.min_lat, b.min_lon), (0.0, 0.0)),
        ((b.min_lat, b.max_lon), (frame.width_m, 0.0)),
        ((b.max_lat, b.min_lon), (0.0, frame.depth_m)),
        ((b.max_lat, b.max_lon), (frame.width_m, frame.depth_m)),
    ];
    for ((lat, lon), (x, y)) in corners {
        let p = frame.project(lat, lon).map_err(|e| e.to_string())?;
        ensure!(p.x == x && p.y == y, "corner ({lat}, {lon}) -> ({}, {})", p.x, p.y);
        let back = frame.unproject(x, y).map_err(|e| e.to_string())?;
        ensure!(back == (lat, lon), "corner ({x}, {y}) unprojects to {back:?}");
    }
    Ok(())
}

type Tri = [[u64; 3]; 3];

fn resolved(mesh: &Mesh) -> impl Iterator<Item = Tri> + '_ {
    (0..mesh.triangles.len()).map(|t| mesh.triangle_positions(t).map(|v| v.map(f64::to_bits)))
}

fn chunking() -> Check {
    let hm = synth::campus_heightmap(301, 301, 1.0, 8);
    let mesh = terrain::triangulate(&hm, ScenePoint::ORIGIN).map_err(|e| e.to_string())?;
    ensure!(mesh.vertices.len() == 90_601, "{} vertices", mesh.vertices.len());
    let chunks = terrain::chunk_mesh(&mesh, 65_000).map_err(|e| e.to_string())?;
    let mut soup: HashMap<Tri, i64> = HashMap::new();
    for t in resolved(&mesh) {
        *soup.entry(t).or_default() += 1;
    }
    for c in &chunks {
        ensure!(c.mesh.vertices.len() <= 65_000, "chunk {} has {} vertices", c.chunk_id, c.mesh.vertices.len());
        for t in resolved(&c.mesh) {
            *soup.entry(t).or_default() -= 1;
        }
    }
    ensure!(soup.values().all(|&n| n == 0), "triangle multiset changed");
    ensure!(chunks.len() >= 2, "expected the grid to need more than one chunk");
    Ok(())
}

fn stl() -> Check {
    let mut rng = common::rng(100);
    let vertices: Vec<[f64; 3]> = (0..300)
        .map(|_| [rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0), rng.gen_range(0.0..60.0)])
        .collect();
    let triangles: Vec<[u32; 3]> = (0..100).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect();
    let mesh = Mesh::new(vertices, triangles).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("random.stl");
    terrain::export_stl([&mesh], &path).map_err(|e| e.to_string())?;
    let back = terrain::import_stl(&path).map_err(|e| e.to_string())?;
    ensure!(back.len() == 100, "{} triangles read back", back.len());
    for (t, tri) in back.iter().enumerate() {
        let expected = mesh.triangle_positions(t).map(|v| v.map(|c| (c as f32).to_bits()));
        ensure!(tri.vertices.map(|v| v.map(f32::to_bits)) == expected, "triangle {t} differs");
    }

    let two = Mesh::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .map_err(|e| e.to_string())?;
    let small = dir.path().join("two.stl");
    let written = terrain::export_stl([&two], &small).map_err(|e| e.to_string())?;
    let on_disk = std::fs::metadata(&small).map_err(|e| e.to_string())?.len();
    ensure!(written == 184 && on_disk == 184, "2-triangle file is {on_disk} bytes");
    Ok(())
}

fn analytics_oracles() -> Check {
    let frame = SceneFrame::new(GeoBounds::cambridge_campus()).map_err(|e| e.to_string())?;
    let rules = [
        TagRule::danger(),
        TagRule::new("Hall", "place", true).map_err(|e| e.to_string())?,
        TagRule::new("coffee", "food", false).map_err(|e| e.to_string())?,
    ];
    for seed in 0..100u64 {
        let ds = common::random_dataset(seed, 500);
        let mut rng = common::rng(seed ^ 0xA5A5);
        for _ in 0..5 {
            let kw = common::random_keyword(&mut rng);
            let got = analytics::search(&ds, &kw).map_err(|e| e.to_string())?;
            ensure!(got == common::oracle_search(&ds, &kw), "search seed {seed} keyword {kw:?}");
        }
        let first = ds.records.first().map(|r| r.timestamp).unwrap();
        for _ in 0..5 {
            let a = first + chrono::TimeDelta::minutes(rng.gen_range(-100..2_100));
            let b = a + chrono::TimeDelta::minutes(rng.gen_range(0..800));
            let interval = TimeInterval::new(a, b).map_err(|e| e.to_string())?;
            ensure!(
                analytics::filter_time(&ds, &interval) == common::oracle_filter_time(&ds, a, b),
                "filter_time seed {seed}"
            );
        }
        let tagged = analytics::tag_keywords(&ds, &rules);
        let tags: Vec<_> = tagged.records.iter().map(|r| r.tags.clone()).collect();
        ensure!(tags == common::oracle_tags(&ds, &rules), "tag_keywords seed {seed}");
        for u in 0..25 {
            let user = format!("u{u}");
            let path = analytics::user_path(&ds, &user);
            let (ids, edges) = common::oracle_user_path(&ds, &user);
            let got: Vec<(String, String)> = path.edges.iter().map(|e| (e.from.clone(), e.to.clone())).collect();
            ensure!(path.tweet_ids == ids && got == edges, "user_path seed {seed} user {user}");
        }
        let cell = [2.0, 7.5, 50.0][seed as usize % 3];
        let stats = analytics::cluster_stats(&ds, &frame, cell).map_err(|e| e.to_string())?;
        ensure!(stats.counts == common::oracle_cells(&ds, &frame, cell), "cluster_stats seed {seed}");
    }
    Ok(())
}

fn stacking() -> Check {
    let frame = SceneFrame::new(GeoBounds::cambridge_campus()).map_err(|e| e.to_string())?;
    let params = StackParams::default();
    let hm = synth::campus_heightmap(371, 390, 2.0, 3);
    for seed in 0..100u64 {
        let ds = common::random_dataset(seed, 300);
        let terrain = (seed % 2 == 0).then_some(&hm);
        let placed = layout::place(&ds, &frame, terrain, &params).map_err(|e| e.to_string())?;
        ensure!(placed.len() == ds.len(), "seed {seed}: {} placements", placed.len());
        let ts: HashMap<&str, _> = ds.records.iter().map(|r| (r.id.as_str(), r.timestamp)).collect();

        let mut cells: BTreeMap<(i64, i64), Vec<&layout::Placement>> = BTreeMap::new();
        for p in &placed {
            let key = (
                (p.position.x / params.cell_size_m).floor() as i64,
                (p.position.y / params.cell_size_m).floor() as i64,
            );
            cells.entry(key).or_default().push(p);
        }
        for stack in cells.values_mut() {
            stack.sort_by_key(|p| p.stack_index);
            for (i, p) in stack.iter().enumerate() {
                ensure!(p.stack_index as usize == i, "seed {seed}: stack indices have a gap");
            }
            for w in stack.windows(2) {
                ensure!(w[0].position.z < w[1].position.z, "seed {seed}: z not strictly increasing");
                let key = |p: &layout::Placement| (ts[p.record_id.as_str()], p.record_id.clone());
                ensure!(key(w[0]) <= key(w[1]), "seed {seed}: stack not chronological");
            }
        }

        let mut records = ds.records.clone();
        records.reverse();
        let mut rng = common::rng(seed);
        for i in (1..records.len()).rev() {
            records.swap(i, rng.gen_range(0..=i));
        }
        let permuted = Dataset { records, ..ds.clone() };
        let again = layout::place(&permuted, &frame, terrain, &params).map_err(|e| e.to_string())?;
        ensure!(again == placed, "seed {seed}: placement depends on input order");
    }
    Ok(())
}

fn scaling() -> Check {
    let frame = SceneFrame::new(GeoBounds::cambridge_campus()).map_err(|e| e.to_string())?;
    let report = layout::benchmark_placement(&[1_000, 2_000, 4_000, 8_000], &frame, &StackParams::default(), 2014)
        .map_err(|e| e.to_string())?;
    print!("{}", report.to_csv());
    for w in report.samples.windows(2) {
        let growth = w[1].elapsed.as_secs_f64() / w[0].elapsed.as_secs_f64().max(1e-9);
        ensure!(growth <= 3.0, "elapsed({})/elapsed({}) = {growth:.2}", w[1].n, w[0].n);
        ensure!(
            w[0].collision_ratio() <= w[1].collision_ratio(),
            "collision ratio fell from n={} to n={}",
            w[0].n,
            w[1].n
        );
    }
    Ok(())
}

/// Blocking HTTP/1.1 exchange over a fresh connection; returns status and body.
fn http(addr: SocketAddr, method: &str, path: &str, body: Option<&str>) -> Result<(u16, Vec<u8>), String> {
    let mut stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    let body = body.unwrap_or("");
    let req = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(req.as_bytes()).map_err(|e| e.to_string())?;
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).map_err(|e| e.to_string())?;
    let split = raw.windows(4).position(|w| w == b"\r\n\r\n").ok_or("no header terminator")?;
    let head = String::from_utf8_lossy(&raw[..split]);
    let status = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad status line in {head:?}"))?;
    Ok((status, raw[split + 4..].to_vec()))
}

fn json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).unwrap()
}

fn service_integration() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = synth::generate_corpus(&CorpusSpec::new(2_000, 20, 7));
    let dataset = dir.path().join("tweets.tsv");
    std::fs::write(&dataset, &corpus.bytes).map_err(|e| e.to_string())?;
    let asc = dir.path().join("campus.asc");
    terrain::save_heightmap(&synth::campus_heightmap(371, 390, 2.0, 7), &asc).map_err(|e| e.to_string())?;
    let config = ServiceConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        dataset: dataset.clone(),
        heightmap: Some(asc),
        ..ServiceConfig::default()
    };

    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    let service = rt.block_on(boot(config)).map_err(|e| e.to_string())?;
    let addr = service.addr;
    let snap = service.state.store.current();
    let get = |path: &str| http(addr, "GET", path, None);

    let (status, body) = get("/health")?;
    ensure!(status == 200 && body == br#"{"status":"ok"}"#, "/health");
    ensure!(get("/scene")?.1 == json(&api::scene_response(&snap)), "/scene");
    ensure!(
        get("/terrain")?.1 == json(&TerrainResponse { chunks: snap.terrain_chunks.clone() }),
        "/terrain"
    );

    let (from, to) = ("2013-11-01T00:00:00Z", "2013-12-15T00:00:00Z");
    let (status, body) = get(&format!("/tweets?from={from}&to={to}"))?;
    let interval = TimeInterval::new(
        ingest::parse_timestamp(from).unwrap(),
        ingest::parse_timestamp(to).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let expected_ids = analytics::filter_time(&snap.dataset, &interval);
    let expected = api::PlacementsResponse {
        placements: expected_ids.iter().map(|id| snap.placement(id).unwrap().clone()).collect(),
    };
    ensure!(status == 200 && body == json(&expected), "/tweets?from&to");
    let params = TweetsParams {
        bbox: Some("42.351,-71.098,42.355,-71.093".into()),
        ..TweetsParams::default()
    };
    let direct = api::tweets_response(&snap, &params).map_err(|e| format!("{e:?}"))?;
    ensure!(get("/tweets?bbox=42.351,-71.098,42.355,-71.093")?.1 == json(&direct), "/tweets?bbox");

    let record = &snap.dataset.records[123];
    ensure!(get(&format!("/tweets/{}", record.id))?.1 == json(record), "/tweets/{{id}}");
    ensure!(get("/tweets/missing")?.0 == 404, "/tweets/{{unknown}} should be 404");

    for keyword in ["danger", "Library", "no-such-words"] {
        let (status, body) = http(addr, "POST", "/query", Some(&format!(r#"{{"keyword":"{keyword}"}}"#)))?;
        let ids = analytics::search(&snap.dataset, keyword).map_err(|e| e.to_string())?;
        let wall = layout::build_wall(&snap.dataset, keyword, &ids, &snap.frame, &snap.wall).map_err(|e| e.to_string())?;
        ensure!(status == 200 && body == json(&QueryResponse { wall }), "/query {keyword}");
    }
    let (status, body) = http(addr, "POST", "/query", Some(r#"{"keyword":"  "}"#))?;
    ensure!(status == 400 && String::from_utf8_lossy(&body).contains("empty-query"), "/query blank");

    let user = &snap.dataset.records[0].username;
    ensure!(
        get(&format!("/users/{user}/path"))?.1 == json(&analytics::user_path(&snap.dataset, user)),
        "/users/{{name}}/path"
    );
    let stats = analytics::cluster_stats(&snap.dataset, &snap.frame, snap.stack.cell_size_m).map_err(|e| e.to_string())?;
    ensure!(get("/stats")?.1 == json(&stats), "/stats");
    let stats = analytics::cluster_stats(&snap.dataset, &snap.frame, 40.0).map_err(|e| e.to_string())?;
    ensure!(get("/stats?cell_size=40")?.1 == json(&stats), "/stats?cell_size");

    // reload under concurrent readers; every response must come from one load
    let old: Vec<u8> = json(&api::tweets_response(&snap, &TweetsParams::default()).unwrap());
    let bigger = synth::generate_corpus(&CorpusSpec::new(3_000, 0, 8));
    std::fs::write(&dataset, &bigger.bytes).map_err(|e| e.to_string())?;
    let stop = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || -> Result<HashSet<Vec<u8>>, String> {
                let mut seen = HashSet::new();
                while !stop.load(std::sync::atomic::Ordering::Relaxed) {
                    seen.insert(http(addr, "GET", "/tweets", None)?.1);
                }
                seen.insert(http(addr, "GET", "/tweets", None)?.1);
                Ok(seen)
            })
        })
        .collect();
    std::thread::sleep(Duration::from_millis(50));
    let (status, _) = http(addr, "POST", "/admin/reload", None)?;
    std::thread::sleep(Duration::from_millis(50));
    stop.store(true, std::sync::atomic::Ordering::Relaxed);
    ensure!(status == 200, "/admin/reload returned {status}");
    let fresh = service.state.store.current();
    ensure!(fresh.dataset.len() == 3_000, "reload left {} records", fresh.dataset.len());
    let new: Vec<u8> = json(&api::tweets_response(&fresh, &TweetsParams::default()).unwrap());
    let mut observed = HashSet::new();
    for r in readers {
        observed.extend(r.join().map_err(|_| "reader panicked")??);
    }
    ensure!(observed.iter().all(|b| *b == old || *b == new), "a response mixed two snapshots");
    ensure!(observed.contains(&new), "readers never saw the reloaded snapshot");

    rt.block_on(service.shutdown()).map_err(|e| e.to_string())?;
    Ok(())
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 8] = [
        ("ingest ledger", Duration::from_secs(1), ingest_ledger),
        ("projection round trip", Duration::from_secs(1), projection),
        ("chunking 301x301", Duration::from_secs(10), chunking),
        ("stl round trip", Duration::from_secs(1), stl),
        ("analytics oracle equivalence", Duration::from_secs(30), analytics_oracles),
        ("stacking", Duration::from_secs(10), stacking),
        ("scaling shape", Duration::from_secs(60), scaling),
        ("service integration", Duration::from_secs(30), service_integration),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(()) if elapsed <= budget => "PASS".to_string(),
            Ok(()) => format!("FAIL (over budget {budget:?})"),
            Err(why) => format!("FAIL ({why})"),
        };
        if verdict != "PASS" {
            failed += 1;
        }
        println!("{verdict:<4} {name} [{:.3} s / {} s]", elapsed.as_secs_f64(), budget.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
